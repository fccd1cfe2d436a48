//! Short-cycle census of the formula's bipartite multigraph.
//!
//! A cycle of length 2i alternates between i distinct variables and i
//! distinct clauses through 2i distinct matching edges (parallel edges count
//! as distinct). Cycles are counted up to rotation and reflection, with exact
//! integers throughout: each class is visited exactly once by rooting the
//! walk at its smallest variable and fixing the direction so the first edge
//! id is smaller than the closing edge id. In particular X_1 sums C(mu, 2)
//! over variable-clause pairs of edge multiplicity mu.

use crate::model::FormulaInstance;
use std::io::Write;
use thiserror::Error;

/// Hard upper bound on the census length.
pub const MAX_CENSUS_I: usize = 8;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("census bound exceeded: max_i = {max_i} not in 1..={limit}")]
    BoundExceeded { max_i: usize, limit: usize },
}

/// Cycle counts X_1 .. X_maxI for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCensus {
    counts: Vec<u64>,
}

impl CycleCensus {
    pub fn max_i(&self) -> usize {
        self.counts.len()
    }

    /// X_i (1-based i).
    pub fn count(&self, i: usize) -> u64 {
        self.counts[i - 1]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Emits one `X[i]=<count>` line per length.
    pub fn write_kv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        for (idx, c) in self.counts.iter().enumerate() {
            writeln!(sink, "X[{}]={}", idx + 1, c)?;
        }
        Ok(())
    }
}

/// Counts cycles of every length 2, 4, ..., 2*max_i.
pub fn census(f: &FormulaInstance, max_i: usize) -> Result<CycleCensus, CensusError> {
    if !(1..=MAX_CENSUS_I).contains(&max_i) {
        return Err(CensusError::BoundExceeded {
            max_i,
            limit: MAX_CENSUS_I,
        });
    }
    let n = f.params().n() as usize;
    let m = f.params().m() as usize;

    // Edge-level adjacency; edge ids enumerate (clause, position) slots so
    // parallel edges stay distinct.
    let mut var_adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n + 1];
    let mut clause_adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
    let mut edge_id = 0u32;
    for (j, clause) in f.clauses().iter().enumerate() {
        for &v in clause {
            var_adj[v as usize].push((j as u32, edge_id));
            clause_adj[j].push((v, edge_id));
            edge_id += 1;
        }
    }

    let mut walker = Walker {
        var_adj: &var_adj,
        clause_adj: &clause_adj,
        used_var: vec![false; n + 1],
        used_clause: vec![false; m],
        max_i,
        counts: vec![0u64; max_i],
        root: 0,
    };
    for r in 1..=n as u32 {
        walker.root = r;
        walker.descend(r, 1, 0);
    }
    Ok(CycleCensus {
        counts: walker.counts,
    })
}

struct Walker<'a> {
    var_adj: &'a [Vec<(u32, u32)>],
    clause_adj: &'a [Vec<(u32, u32)>],
    used_var: Vec<bool>,
    used_clause: Vec<bool>,
    max_i: usize,
    counts: Vec<u64>,
    root: u32,
}

impl Walker<'_> {
    /// Extends the alternating walk from variable `v` (depth = variables on
    /// the walk so far, root included). `first_edge` is the walk's first edge
    /// id; at depth 1 it is not yet chosen.
    fn descend(&mut self, v: u32, depth: usize, first_edge: u32) {
        for &(c, e_in) in &self.var_adj[v as usize] {
            if self.used_clause[c as usize] {
                continue;
            }
            let first = if depth == 1 { e_in } else { first_edge };
            // Close the cycle back to the root. The canonical-direction rule
            // (first edge id < closing edge id) also enforces edge
            // distinctness for the 2-cycle case.
            for &(v2, e_close) in &self.clause_adj[c as usize] {
                if v2 == self.root && e_close > first {
                    self.counts[depth - 1] += 1;
                }
            }
            if depth < self.max_i {
                self.used_clause[c as usize] = true;
                for &(v2, e_out) in &self.clause_adj[c as usize] {
                    if v2 > self.root && !self.used_var[v2 as usize] && e_out != e_in {
                        self.used_var[v2 as usize] = true;
                        self.descend(v2, depth + 1, first);
                        self.used_var[v2 as usize] = false;
                    }
                }
                self.used_clause[c as usize] = false;
            }
        }
    }
}
