//! Exact decision, counting, and enumeration of satisfying assignments.
//!
//! A satisfying assignment is a set T of variables hitting every clause
//! exactly once, counting multiplicity, so the problem is literally exact
//! cover: the universe is the clause set and each variable is a candidate
//! covering the clauses it occurs in. The search is Knuth's Algorithm X over
//! dancing links, branching on the clause with the fewest remaining
//! candidates.
//!
//! Preprocessing: a variable occurring with multiplicity >= 2 in some clause
//! can never be true (it would give that clause two true occurrences), so it
//! is deleted up front. After this step every remaining candidate covers a
//! plain set of clauses and the exact-cover reduction is one-to-one.

use crate::model::{Assignment, FormulaInstance};
use num::{BigUint, One, Zero};
use std::io::Write;
use thiserror::Error;

/// Default search-node budget; exceeding it is an explicit third outcome,
/// never a wrong answer.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

/// Largest n accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_N: u64 = 24;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("node budget exceeded after {nodes} nodes (result unknown)")]
    BudgetExceeded { nodes: u64 },
    #[error("instance too large for brute force: n = {n} > {max}")]
    InstanceTooLarge { n: u64, max: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Stop at the first solution; `count` is then a >= 1 marker.
    Decide,
    /// Count all solutions exactly.
    Count,
    /// Count and return every solution.
    Enumerate,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub satisfiable: bool,
    /// Exact number of satisfying assignments (in decide mode: min(Z, 1)).
    pub count: BigUint,
    /// Present only in enumerate mode; sorted, distinct, each verified.
    pub solutions: Option<Vec<Assignment>>,
    /// Search nodes explored.
    pub nodes: u64,
}

/// True iff every clause of `f` contains exactly one member of `a`, counting
/// multiplicity (a clause {1,1,2} is not satisfied by T = {1}).
pub fn satisfies(f: &FormulaInstance, a: &Assignment) -> bool {
    let n = f.params().n() as usize;
    let mut truthy = vec![false; n + 1];
    for &v in a.vars() {
        truthy[v as usize] = true;
    }
    f.clauses().iter().all(|clause| {
        let occ: u32 = clause.iter().map(|&v| truthy[v as usize] as u32).sum();
        occ == 1
    })
}

/// Solve with the default node budget.
pub fn solve(f: &FormulaInstance, mode: SolveMode) -> Result<SolveResult, SolveError> {
    solve_with_budget(f, mode, DEFAULT_NODE_BUDGET)
}

pub fn solve_with_budget(
    f: &FormulaInstance,
    mode: SolveMode,
    node_budget: u64,
) -> Result<SolveResult, SolveError> {
    let n = f.params().n() as usize;
    let m = f.params().m() as usize;

    let mut var_occs: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for (j, clause) in f.clauses().iter().enumerate() {
        for &v in clause {
            var_occs[v as usize].push(j as u32);
        }
    }

    // Candidate rows: variable -> distinct clauses it covers. A variable with
    // multiplicity >= 2 somewhere (adjacent duplicates in its occurrence
    // list) is forced false and contributes no row.
    let mut rows: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut clause_candidates = vec![0u32; m];
    for v in 1..=n as u32 {
        let occs = std::mem::take(&mut var_occs[v as usize]);
        if occs.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        for &j in &occs {
            clause_candidates[j as usize] += 1;
        }
        rows.push((v, occs));
    }

    // A clause with no remaining candidates makes the instance unsatisfiable.
    if clause_candidates.contains(&0) {
        return Ok(SolveResult {
            satisfiable: false,
            count: BigUint::zero(),
            solutions: if matches!(mode, SolveMode::Enumerate) {
                Some(Vec::new())
            } else {
                None
            },
            nodes: 0,
        });
    }

    // Decide-mode fast path for degree-2 reductions: every candidate covers
    // exactly two clauses, so satisfiability is perfect-matching existence on
    // the clause multigraph. Backtracking refutes matching-free graphs in
    // exponential time; Edmonds' blossom algorithm is polynomial.
    if matches!(mode, SolveMode::Decide) && rows.iter().all(|(_, cols)| cols.len() == 2) {
        return Ok(decide_by_matching(f, m, &rows));
    }

    let mut dlx = Dlx::new(m, &rows);
    let mut search = Search {
        dlx: &mut dlx,
        mode,
        node_budget,
        nodes: 0,
        count: BigUint::zero(),
        partial: Vec::new(),
        solutions: Vec::new(),
    };
    search.run();
    let nodes = search.nodes;
    // The only way past the budget is the in-search check, which unwinds
    // immediately, so nodes > budget identifies exhaustion unambiguously.
    if nodes > node_budget {
        return Err(SolveError::BudgetExceeded { nodes });
    }

    let count = search.count;
    let satisfiable = !count.is_zero();
    let solutions = match mode {
        SolveMode::Enumerate => {
            let mut sols: Vec<Assignment> = search
                .solutions
                .iter()
                .map(|vars| {
                    let mut vs = vars.clone();
                    vs.sort_unstable();
                    Assignment::from_sorted_unchecked(vs)
                })
                .collect();
            sols.sort_by(|a, b| a.vars().cmp(b.vars()));
            debug_assert!(sols.windows(2).all(|w| w[0] != w[1]));
            for s in &sols {
                assert!(satisfies(f, s), "enumerated a non-satisfying assignment");
            }
            Some(sols)
        }
        _ => None,
    };
    Ok(SolveResult {
        satisfiable,
        count,
        solutions,
        nodes,
    })
}

/// Independent oracle: tests `satisfies` on all 2^n subsets. Enforces
/// n <= [`BRUTE_FORCE_MAX_N`].
pub fn brute_force_count(f: &FormulaInstance) -> Result<BigUint, SolveError> {
    let n = f.params().n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(SolveError::InstanceTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let n = n as u32;

    // Per-clause masks; clauses with repeated members keep (bit, multiplicity)
    // pairs so occurrences are counted with multiplicity.
    enum ClauseCheck {
        Distinct(u32),
        WithMult(Vec<(u32, u32)>),
    }
    let checks: Vec<ClauseCheck> = f
        .clauses()
        .iter()
        .map(|clause| {
            let mut pairs: Vec<(u32, u32)> = Vec::new();
            for &v in clause {
                let bit = 1u32 << (v - 1);
                match pairs.iter_mut().find(|(b, _)| *b == bit) {
                    Some((_, mult)) => *mult += 1,
                    None => pairs.push((bit, 1)),
                }
            }
            if pairs.iter().all(|&(_, mult)| mult == 1) {
                ClauseCheck::Distinct(pairs.iter().fold(0, |acc, &(b, _)| acc | b))
            } else {
                ClauseCheck::WithMult(pairs)
            }
        })
        .collect();

    let mut count: u64 = 0;
    for subset in 0u64..(1u64 << n) {
        let sub = subset as u32;
        let ok = checks.iter().all(|check| match check {
            ClauseCheck::Distinct(mask) => (sub & mask).count_ones() == 1,
            ClauseCheck::WithMult(pairs) => {
                let occ: u32 = pairs
                    .iter()
                    .map(|&(bit, mult)| if sub & bit != 0 { mult } else { 0 })
                    .sum();
                occ == 1
            }
        });
        if ok {
            count += 1;
        }
    }
    Ok(BigUint::from(count))
}

/// Emits the machine-readable result record: `<satisfiable:0|1> <count>`,
/// then one `s <sorted indices>` line per solution in enumerate mode.
pub fn write_result<W: Write>(r: &SolveResult, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{} {}", r.satisfiable as u8, r.count)?;
    if let Some(solutions) = &r.solutions {
        for s in solutions {
            let line: Vec<String> = s.vars().iter().map(|v| v.to_string()).collect();
            writeln!(sink, "s {}", line.join(" "))?;
        }
    }
    Ok(())
}

/// Perfect-matching decision on the clause multigraph for instances whose
/// candidates all cover exactly two clauses. Parallel edges cannot change
/// matching existence, so one representative variable per clause pair
/// suffices; a found matching is mapped back to an assignment and verified.
fn decide_by_matching(f: &FormulaInstance, m: usize, rows: &[(u32, Vec<u32>)]) -> SolveResult {
    use petgraph::algo::matching::maximum_matching;
    use petgraph::graph::{NodeIndex, UnGraph};

    let mut graph: UnGraph<(), u32> = UnGraph::with_capacity(m, rows.len());
    for _ in 0..m {
        graph.add_node(());
    }
    let mut seen = std::collections::HashSet::with_capacity(rows.len());
    for (v, cols) in rows {
        let (a, b) = (cols[0], cols[1]);
        debug_assert!(a < b);
        if seen.insert((a, b)) {
            graph.add_edge(NodeIndex::new(a as usize), NodeIndex::new(b as usize), *v);
        }
    }
    let matching = maximum_matching(&graph);
    let satisfiable = matching.is_perfect();
    if satisfiable {
        let vars: Vec<u32> = matching
            .edges()
            .map(|(a, b)| *graph.edge_weight(graph.find_edge(a, b).unwrap()).unwrap())
            .collect();
        let witness = Assignment::new(vars, f.params().n()).expect("matching edges are distinct");
        assert!(
            satisfies(f, &witness),
            "matching witness failed verification"
        );
    }
    SolveResult {
        satisfiable,
        count: if satisfiable {
            BigUint::one()
        } else {
            BigUint::zero()
        },
        solutions: None,
        nodes: 0,
    }
}

// ---------------------------------------------------------------------------
// Dancing links
// ---------------------------------------------------------------------------

const NIL: u32 = u32::MAX;

/// Toroidal doubly-linked sparse matrix. Node 0 is the head; nodes 1..=m are
/// the clause column heads; the rest are row cells.
struct Dlx {
    left: Vec<u32>,
    right: Vec<u32>,
    up: Vec<u32>,
    down: Vec<u32>,
    /// Column head index of each cell.
    col: Vec<u32>,
    /// Variable labelling each cell's row.
    var: Vec<u32>,
    /// Live cell count per column head.
    size: Vec<u32>,
}

impl Dlx {
    fn new(m: usize, rows: &[(u32, Vec<u32>)]) -> Self {
        let header_len = m + 1;
        let cells: usize = rows.iter().map(|(_, cols)| cols.len()).sum();
        let total = header_len + cells;
        let mut dlx = Dlx {
            left: vec![NIL; total],
            right: vec![NIL; total],
            up: vec![NIL; total],
            down: vec![NIL; total],
            col: vec![NIL; total],
            var: vec![0; total],
            size: vec![0; header_len],
        };
        // Head + column heads in a circular row; columns self-linked vertically.
        for i in 0..header_len {
            dlx.left[i] = ((i + header_len - 1) % header_len) as u32;
            dlx.right[i] = ((i + 1) % header_len) as u32;
            dlx.up[i] = i as u32;
            dlx.down[i] = i as u32;
        }
        let mut next = header_len as u32;
        for (v, cols) in rows {
            let start = next;
            for &c in cols {
                let node = next;
                next += 1;
                let head = c + 1;
                dlx.col[node as usize] = head;
                dlx.var[node as usize] = *v;
                // Append at the bottom of the column.
                let bottom = dlx.up[head as usize];
                dlx.up[node as usize] = bottom;
                dlx.down[node as usize] = head;
                dlx.down[bottom as usize] = node;
                dlx.up[head as usize] = node;
                dlx.size[head as usize] += 1;
            }
            // Circular horizontal links within the row.
            let end = next;
            for node in start..end {
                dlx.left[node as usize] = if node == start { end - 1 } else { node - 1 };
                dlx.right[node as usize] = if node + 1 == end { start } else { node + 1 };
            }
        }
        dlx
    }

    fn cover(&mut self, head: u32) {
        let (l, r) = (self.left[head as usize], self.right[head as usize]);
        self.right[l as usize] = r;
        self.left[r as usize] = l;
        let mut i = self.down[head as usize];
        while i != head {
            let mut j = self.right[i as usize];
            while j != i {
                let (u, d) = (self.up[j as usize], self.down[j as usize]);
                self.down[u as usize] = d;
                self.up[d as usize] = u;
                self.size[self.col[j as usize] as usize] -= 1;
                j = self.right[j as usize];
            }
            i = self.down[i as usize];
        }
    }

    fn uncover(&mut self, head: u32) {
        let mut i = self.up[head as usize];
        while i != head {
            let mut j = self.left[i as usize];
            while j != i {
                let (u, d) = (self.up[j as usize], self.down[j as usize]);
                self.down[u as usize] = j;
                self.up[d as usize] = j;
                self.size[self.col[j as usize] as usize] += 1;
                j = self.left[j as usize];
            }
            i = self.up[i as usize];
        }
        let (l, r) = (self.left[head as usize], self.right[head as usize]);
        self.right[l as usize] = head;
        self.left[r as usize] = head;
    }
}

struct Search<'a> {
    dlx: &'a mut Dlx,
    mode: SolveMode,
    node_budget: u64,
    nodes: u64,
    count: BigUint,
    partial: Vec<u32>,
    solutions: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn run(&mut self) {
        self.recurse();
    }

    fn recurse(&mut self) -> bool {
        if self.dlx.right[0] == 0 {
            // Every clause covered exactly once.
            self.count += BigUint::one();
            if matches!(self.mode, SolveMode::Enumerate) {
                self.solutions.push(self.partial.clone());
            }
            return matches!(self.mode, SolveMode::Decide);
        }

        // Branch on the clause with the fewest remaining candidates.
        let mut best = NIL;
        let mut best_size = u32::MAX;
        let mut head = self.dlx.right[0];
        while head != 0 {
            let s = self.dlx.size[head as usize];
            if s < best_size {
                best_size = s;
                best = head;
                if s == 0 {
                    break;
                }
            }
            head = self.dlx.right[head as usize];
        }
        if best_size == 0 {
            return false;
        }

        let c = best;
        self.dlx.cover(c);
        let mut r = self.dlx.down[c as usize];
        let mut stop = false;
        while r != c {
            self.nodes += 1;
            if self.nodes > self.node_budget {
                stop = true;
                break;
            }
            self.partial.push(self.dlx.var[r as usize]);
            let mut j = self.dlx.right[r as usize];
            while j != r {
                self.dlx.cover(self.dlx.col[j as usize]);
                j = self.dlx.right[j as usize];
            }
            stop = self.recurse();
            let mut j = self.dlx.left[r as usize];
            while j != r {
                self.dlx.uncover(self.dlx.col[j as usize]);
                j = self.dlx.left[j as usize];
            }
            self.partial.pop();
            if stop {
                break;
            }
            r = self.dlx.down[r as usize];
        }
        self.dlx.uncover(c);
        stop
    }
}
