//! Formula data model: parameters, instances, assignments, configuration-model
//! generation, and the instance file format.
//!
//! An instance is a bipartite multigraph: `n` variables of degree `d` on one
//! side, `m = dn/k` clauses of degree `k` on the other. A clause is a multiset
//! of k variable indices; a variable may appear in the same clause with
//! multiplicity greater than one, and such multi-edges are deliberately kept
//! (rejecting them would break the cycle statistics).

use crate::rng::SplitMix64;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// The tuple (n, m, k, d) with dn = km.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelParams {
    k: u32,
    d: u32,
    n: u64,
}

impl ModelParams {
    /// Validates k >= 3, d >= 1, n >= k and k | n (so both |T| = n/k and
    /// m = dn/k are integral).
    pub fn new(k: u32, d: u32, n: u64) -> Result<Self, ModelError> {
        if k < 3 {
            return Err(ModelError::InvalidParams(format!("k = {k} < 3")));
        }
        if d < 1 {
            return Err(ModelError::InvalidParams("d must be >= 1".into()));
        }
        if n < k as u64 {
            return Err(ModelError::InvalidParams(format!("n = {n} < k = {k}")));
        }
        if !n.is_multiple_of(k as u64) {
            return Err(ModelError::InvalidParams(format!(
                "k = {k} does not divide n = {n}"
            )));
        }
        Ok(ModelParams { k, d, n })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Clause count m = dn/k.
    pub fn m(&self) -> u64 {
        self.d as u64 * self.n / self.k as u64
    }

    /// Total copy count dn = km.
    pub fn copies(&self) -> u64 {
        self.d as u64 * self.n
    }
}

/// A k-uniform d-regular formula: m clause multisets over variables 1..=n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaInstance {
    params: ModelParams,
    clauses: Vec<Vec<u32>>,
}

impl FormulaInstance {
    /// Builds an instance, checking the regularity invariants: each clause has
    /// exactly k members (with multiplicity) and each variable occurs exactly
    /// d times in total.
    pub fn new(params: ModelParams, clauses: Vec<Vec<u32>>) -> Result<Self, ModelError> {
        if clauses.len() as u64 != params.m() {
            return Err(ModelError::InvariantViolation(format!(
                "expected {} clauses, got {}",
                params.m(),
                clauses.len()
            )));
        }
        let mut occurrences = vec![0u64; params.n as usize + 1];
        for (j, clause) in clauses.iter().enumerate() {
            if clause.len() as u64 != params.k as u64 {
                return Err(ModelError::InvariantViolation(format!(
                    "clause {} has {} members, expected k = {}",
                    j + 1,
                    clause.len(),
                    params.k
                )));
            }
            for &v in clause {
                if v == 0 || v as u64 > params.n {
                    return Err(ModelError::InvariantViolation(format!(
                        "clause {} references variable {} outside 1..={}",
                        j + 1,
                        v,
                        params.n
                    )));
                }
                occurrences[v as usize] += 1;
            }
        }
        for (v, &occ) in occurrences.iter().enumerate().skip(1) {
            if occ != params.d as u64 {
                return Err(ModelError::InvariantViolation(format!(
                    "variable {} occurs {} times, expected d = {}",
                    v, occ, params.d
                )));
            }
        }
        Ok(FormulaInstance { params, clauses })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn clauses(&self) -> &[Vec<u32>] {
        &self.clauses
    }

    /// Canonical copy: indices sorted within each clause, clauses sorted
    /// lexicographically. This is the order used by the file writer.
    pub fn canonical(&self) -> FormulaInstance {
        let mut clauses = self.clauses.clone();
        for c in &mut clauses {
            c.sort_unstable();
        }
        clauses.sort_unstable();
        FormulaInstance {
            params: self.params,
            clauses,
        }
    }
}

/// The set T of true variables (1-based indices, sorted, distinct).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    vars: Vec<u32>,
}

impl Assignment {
    pub fn new(mut vars: Vec<u32>, n: u64) -> Result<Self, ModelError> {
        vars.sort_unstable();
        for w in vars.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::InvalidParams(format!(
                    "duplicate variable {} in assignment",
                    w[0]
                )));
            }
        }
        if let (Some(&first), Some(&last)) = (vars.first(), vars.last()) {
            if first == 0 || last as u64 > n {
                return Err(ModelError::InvalidParams(format!(
                    "assignment indices must lie in 1..={n}"
                )));
            }
        }
        Ok(Assignment { vars })
    }

    pub(crate) fn from_sorted_unchecked(vars: Vec<u32>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        Assignment { vars }
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vars.binary_search(&v).is_ok()
    }
}

/// Draws an instance from the configuration model: d copies of each variable
/// and k copies of each clause, matched uniformly at random.
///
/// Deterministic in (params, seed): the km clause-copy slots are permuted by a
/// seeded Fisher-Yates shuffle and variable i's copies occupy slot positions
/// d(i-1) .. di-1, which is uniform over matchings up to copy labelling.
pub fn generate(params: ModelParams, seed: u64) -> FormulaInstance {
    let k = params.k as u64;
    let d = params.d as u64;
    let m = params.m();
    let copies = params.copies();

    let mut slots: Vec<u32> = (0..copies).map(|p| (p / k) as u32).collect();
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut slots);

    let mut clauses: Vec<Vec<u32>> = vec![Vec::with_capacity(params.k as usize); m as usize];
    for (p, &clause_idx) in slots.iter().enumerate() {
        let var = (p as u64 / d) as u32 + 1;
        clauses[clause_idx as usize].push(var);
    }
    debug_assert!(clauses.iter().all(|c| c.len() == params.k as usize));
    FormulaInstance { params, clauses }
}

/// Writes the instance file format: optional `c ` comments, one header
/// `p xc <n> <m> <k> <d>`, then m lines of k space-separated 1-based indices.
/// Clauses are emitted in canonical order so files are comparable.
pub fn write_instance<W: Write>(f: &FormulaInstance, mut sink: W) -> std::io::Result<()> {
    let canonical = f.canonical();
    let p = canonical.params;
    writeln!(sink, "p xc {} {} {} {}", p.n, p.m(), p.k, p.d)?;
    for clause in &canonical.clauses {
        let line: Vec<String> = clause.iter().map(|v| v.to_string()).collect();
        writeln!(sink, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Parses the instance file format; the inverse of [`write_instance`] up to
/// canonical clause order.
pub fn read_instance<R: BufRead>(source: R) -> Result<FormulaInstance, ModelError> {
    let mut params: Option<ModelParams> = None;
    let mut clauses: Vec<Vec<u32>> = Vec::new();
    let mut declared_m = 0u64;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.starts_with('c') {
            continue;
        }
        if line.trim().is_empty() {
            return Err(ModelError::Parse {
                line: line_no,
                msg: "blank line".into(),
            });
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if params.is_some() {
                return Err(ModelError::Parse {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 5 || fields[0] != "xc" {
                return Err(ModelError::Parse {
                    line: line_no,
                    msg: format!("malformed header: expected `p xc <n> <m> <k> <d>`, got `{line}`"),
                });
            }
            let parse_u64 = |s: &str, what: &str| -> Result<u64, ModelError> {
                s.parse().map_err(|_| ModelError::Parse {
                    line: line_no,
                    msg: format!("invalid {what}: `{s}`"),
                })
            };
            let n = parse_u64(fields[1], "n")?;
            let m = parse_u64(fields[2], "m")?;
            let k = parse_u64(fields[3], "k")? as u32;
            let d = parse_u64(fields[4], "d")? as u32;
            let p = ModelParams::new(k, d, n)?;
            if p.m() != m {
                return Err(ModelError::InvariantViolation(format!(
                    "header declares m = {m} but dn/k = {}",
                    p.m()
                )));
            }
            declared_m = m;
            params = Some(p);
            continue;
        }
        let Some(p) = params else {
            return Err(ModelError::Parse {
                line: line_no,
                msg: "clause line before header".into(),
            });
        };
        if clauses.len() as u64 == declared_m {
            return Err(ModelError::Parse {
                line: line_no,
                msg: format!("more than the declared {declared_m} clause lines"),
            });
        }
        let mut clause = Vec::with_capacity(p.k() as usize);
        for tok in line.split_whitespace() {
            let v: u32 = tok.parse().map_err(|_| ModelError::Parse {
                line: line_no,
                msg: format!("invalid variable index `{tok}`"),
            })?;
            if v == 0 || v as u64 > p.n() {
                return Err(ModelError::Parse {
                    line: line_no,
                    msg: format!("variable index {v} outside 1..={}", p.n()),
                });
            }
            clause.push(v);
        }
        if clause.len() != p.k() as usize {
            return Err(ModelError::Parse {
                line: line_no,
                msg: format!(
                    "clause has {} indices, expected k = {}",
                    clause.len(),
                    p.k()
                ),
            });
        }
        clauses.push(clause);
    }

    let Some(p) = params else {
        return Err(ModelError::Parse {
            line: 1,
            msg: "missing header".into(),
        });
    };
    // FormulaInstance::new re-checks clause count and per-variable degrees
    // against the declared parameters.
    FormulaInstance::new(p, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: u32, d: u32, n: u64) -> ModelParams {
        ModelParams::new(k, d, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2, 1, 4).is_err());
        assert!(ModelParams::new(3, 1, 8).is_err()); // 3 does not divide 8
        assert!(ModelParams::new(3, 0, 9).is_err());
        assert!(ModelParams::new(4, 2, 3).is_err()); // n < k
        let p = params(3, 2, 9);
        assert_eq!(p.m(), 6);
        assert_eq!(p.copies(), 18);
    }

    #[test]
    fn unique_instance_for_single_clause() {
        // (k=3, d=1, n=3): only one matching up to copy permutation.
        for seed in 0..50 {
            let f = generate(params(3, 1, 3), seed);
            assert_eq!(f.canonical().clauses(), &[vec![1, 2, 3]]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(3, 2, 9);
        for seed in [0u64, 1, 7, u64::MAX] {
            assert_eq!(generate(p, seed), generate(p, seed));
        }
        assert_ne!(generate(p, 1), generate(p, 2));
    }

    #[test]
    fn generated_instances_are_regular() {
        for (k, d, n) in [(3u32, 2u32, 9u64), (3, 3, 12), (4, 2, 12), (5, 4, 10)] {
            let p = params(k, d, n);
            for seed in 0..200 {
                let f = generate(p, seed);
                // FormulaInstance::new asserts the invariants exhaustively.
                FormulaInstance::new(p, f.clauses().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn single_clause_file_format_is_bit_exact() {
        let f = generate(params(3, 1, 3), 0);
        let mut buf = Vec::new();
        write_instance(&f, &mut buf).unwrap();
        assert_eq!(buf, b"p xc 3 1 3 1\n1 2 3\n");
    }

    #[test]
    fn round_trip_is_canonical_identity() {
        let p = params(4, 3, 12);
        for seed in 0..20 {
            let f = generate(p, seed);
            let mut buf = Vec::new();
            write_instance(&f, &mut buf).unwrap();
            let g = read_instance(buf.as_slice()).unwrap();
            assert_eq!(g, f.canonical());
            // write . read . write == write
            let mut buf2 = Vec::new();
            write_instance(&g, &mut buf2).unwrap();
            assert_eq!(buf, buf2);
        }
    }

    #[test]
    fn comments_are_ignored() {
        let text = "c generated for a test\nc another comment\np xc 3 1 3 1\n1 2 3\n";
        let f = read_instance(text.as_bytes()).unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn short_clause_line_is_a_parse_error() {
        let text = "p xc 3 1 3 1\n1 2\n";
        match read_instance(text.as_bytes()) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn degree_mismatch_is_an_invariant_violation() {
        // Declared d = 2 but variable 1 occurs three times.
        let text = "p xc 6 4 3 2\n1 1 1\n2 2 3\n3 4 5\n4 5 6\n";
        match read_instance(text.as_bytes()) {
            Err(ModelError::InvariantViolation(_)) => {}
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn assignment_validation() {
        assert!(Assignment::new(vec![1, 2, 2], 9).is_err());
        assert!(Assignment::new(vec![0], 9).is_err());
        assert!(Assignment::new(vec![10], 9).is_err());
        let a = Assignment::new(vec![3, 1], 9).unwrap();
        assert_eq!(a.vars(), &[1, 3]);
        assert!(a.contains(3));
        assert!(!a.contains(2));
    }
}
