//! Census correctness against an independent enumeration oracle.
//!
//! The oracle counts ordered, rooted, directed closed alternating walks with
//! all-distinct variables, clauses, and edges, then divides by the 2i-fold
//! rotation/reflection overcount. It shares no code with the census DFS.

use xcover::census::census;
use xcover::model::{generate, FormulaInstance, ModelParams};
use xcover::rng::SplitMix64;

/// Edge-level view of the instance: (clause, edge_id) per variable and
/// (variable, edge_id) per clause.
struct Adjacency {
    var_adj: Vec<Vec<(u32, u32)>>,
    clause_adj: Vec<Vec<(u32, u32)>>,
}

fn adjacency(f: &FormulaInstance) -> Adjacency {
    let n = f.params().n() as usize;
    let m = f.params().m() as usize;
    let mut var_adj = vec![Vec::new(); n + 1];
    let mut clause_adj = vec![Vec::new(); m];
    let mut edge = 0u32;
    for (j, clause) in f.clauses().iter().enumerate() {
        for &v in clause {
            var_adj[v as usize].push((j as u32, edge));
            clause_adj[j].push((v, edge));
            edge += 1;
        }
    }
    Adjacency { var_adj, clause_adj }
}

/// Counts ordered rooted directed closed walks of length 2i for each
/// i <= max_i; every cycle class is hit exactly 2i times.
fn naive_census(f: &FormulaInstance, max_i: usize) -> Vec<u64> {
    let adj = adjacency(f);
    let n = f.params().n() as usize;
    let m = f.params().m() as usize;
    let mut walks = vec![0u64; max_i];

    struct State<'a> {
        adj: &'a Adjacency,
        used_var: Vec<bool>,
        used_clause: Vec<bool>,
        used_edge: Vec<bool>,
        root: u32,
        walks: Vec<u64>,
        max_i: usize,
    }

    impl State<'_> {
        fn visit(&mut self, v: u32, depth: usize) {
            for &(c, e1) in &self.adj.var_adj[v as usize] {
                if self.used_clause[c as usize] || self.used_edge[e1 as usize] {
                    continue;
                }
                self.used_clause[c as usize] = true;
                self.used_edge[e1 as usize] = true;
                // Close back to the root.
                for &(v2, e2) in &self.adj.clause_adj[c as usize] {
                    if v2 == self.root && !self.used_edge[e2 as usize] {
                        self.walks[depth - 1] += 1;
                    }
                }
                // Extend to a fresh variable.
                if depth < self.max_i {
                    for &(v2, e2) in &self.adj.clause_adj[c as usize] {
                        if !self.used_var[v2 as usize] && !self.used_edge[e2 as usize] {
                            self.used_var[v2 as usize] = true;
                            self.used_edge[e2 as usize] = true;
                            self.visit(v2, depth + 1);
                            self.used_edge[e2 as usize] = false;
                            self.used_var[v2 as usize] = false;
                        }
                    }
                }
                self.used_edge[e1 as usize] = false;
                self.used_clause[c as usize] = false;
            }
        }
    }

    let mut st = State {
        adj: &adj,
        used_var: vec![false; n + 1],
        used_clause: vec![false; m],
        used_edge: vec![false; f.params().copies() as usize],
        root: 0,
        walks: vec![0u64; max_i],
        max_i,
    };
    for r in 1..=n as u32 {
        st.root = r;
        st.used_var[r as usize] = true;
        st.visit(r, 1);
        st.used_var[r as usize] = false;
    }
    for (idx, w) in st.walks.iter().enumerate() {
        let sym = 2 * (idx as u64 + 1);
        assert_eq!(w % sym, 0, "walk count not divisible by 2i at i={}", idx + 1);
        walks[idx] = w / sym;
    }
    walks
}

#[test]
fn census_matches_naive_enumeration() {
    let shapes = [
        (3u32, 2u32, 9u64),
        (3, 2, 12),
        (3, 3, 9),
        (4, 2, 12),
        (4, 3, 8),
        (3, 4, 6),
        (5, 2, 10),
    ];
    for (k, d, n) in shapes {
        let p = ModelParams::new(k, d, n).unwrap();
        for seed in 0..40 {
            let f = generate(p, seed);
            let fast = census(&f, 4).unwrap();
            let slow = naive_census(&f, 4);
            assert_eq!(fast.counts(), &slow[..], "k={k} d={d} n={n} seed={seed}");
        }
    }
}

#[test]
fn census_is_isomorphism_invariant() {
    let p = ModelParams::new(3, 2, 12).unwrap();
    let mut rng = SplitMix64::new(999);
    for seed in 0..30 {
        let f = generate(p, seed);
        let baseline = census(&f, 4).unwrap();

        // Random relabelling of variables and clauses.
        let mut var_map: Vec<u32> = (1..=12).collect();
        rng.shuffle(&mut var_map);
        let mut clause_order: Vec<usize> = (0..f.clauses().len()).collect();
        rng.shuffle(&mut clause_order);
        let relabeled: Vec<Vec<u32>> = clause_order
            .iter()
            .map(|&j| {
                f.clauses()[j]
                    .iter()
                    .map(|&v| var_map[v as usize - 1])
                    .collect()
            })
            .collect();
        let g = FormulaInstance::new(p, relabeled).unwrap();
        assert_eq!(census(&g, 4).unwrap(), baseline, "seed={seed}");
    }
}
