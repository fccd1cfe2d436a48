//! Monte Carlo harness tying the generator, solver, cycle census, and theory
//! together: satisfiability curves, moment estimation, overlap histograms,
//! and Poisson tests for cycle counts, with deterministic seeding and a fixed
//! CSV schema.
//!
//! Reproducibility contract: trial t of cell c draws its RNG stream from
//! `mix3(master_seed, c, t)`, trials are aggregated in trial order, and
//! float formatting is canonical, so identical configs produce byte-identical
//! CSV regardless of worker count or scheduling.

use crate::census::{census, CensusError, MAX_CENSUS_I};
use crate::model::{generate, ModelParams};
use crate::rng::mix3;
use crate::solver::{solve_with_budget, SolveError, SolveMode, DEFAULT_NODE_BUDGET};
use crate::stats::{binomial_se, mean_and_se, poisson_gof, sample_correlation, sample_covariance, sample_variance};
use crate::theory::{
    exact_cycle_expectation, exact_first_moment, exact_second_moment, pair_moment_rational,
};
use num::rational::Ratio;
use num::ToPrimitive;
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

/// Largest n accepted by the counting-based experiment kinds.
pub const MAX_COUNTING_N: u64 = 60;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    ConfigInvalid(String),
    #[error("trial failed: {0}")]
    Solve(#[from] SolveError),
    #[error("trial failed: {0}")]
    Census(#[from] CensusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Psat,
    Moments,
    Cycles,
    Overlap,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "psat" => Some(ExperimentKind::Psat),
            "moments" => Some(ExperimentKind::Moments),
            "cycles" => Some(ExperimentKind::Cycles),
            "overlap" => Some(ExperimentKind::Overlap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k_values: Vec<u32>,
    pub d_values: Vec<u32>,
    pub n_values: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
    pub node_budget: u64,
    /// Census length for the cycles kind.
    pub max_i: usize,
    /// Worker threads; 0 means all available. Results do not depend on it.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            k_values: Vec::new(),
            d_values: Vec::new(),
            n_values: Vec::new(),
            trials: 1,
            master_seed: 0,
            node_budget: DEFAULT_NODE_BUDGET,
            max_i: 3,
            workers: 0,
        }
    }

    /// The (k, d, n) grid in cell-index order.
    pub fn cells(&self) -> Result<Vec<ModelParams>, ExperimentError> {
        if self.trials < 1 {
            return Err(ExperimentError::ConfigInvalid("trials must be >= 1".into()));
        }
        if self.k_values.is_empty() || self.d_values.is_empty() || self.n_values.is_empty() {
            return Err(ExperimentError::ConfigInvalid(
                "k, d, and n lists must be non-empty".into(),
            ));
        }
        let mut cells = Vec::new();
        for &k in &self.k_values {
            for &d in &self.d_values {
                for &n in &self.n_values {
                    let p = ModelParams::new(k, d, n).map_err(|e| {
                        ExperimentError::ConfigInvalid(format!("cell (k={k}, d={d}, n={n}): {e}"))
                    })?;
                    cells.push(p);
                }
            }
        }
        Ok(cells)
    }

    fn require_counting_sizes(&self) -> Result<(), ExperimentError> {
        if let Some(&n) = self.n_values.iter().find(|&&n| n > MAX_COUNTING_N) {
            return Err(ExperimentError::ConfigInvalid(format!(
                "n = {n} exceeds the counting limit {MAX_COUNTING_N}"
            )));
        }
        Ok(())
    }
}

/// Runs trial bodies 0..trials on the requested worker count, preserving
/// trial order in the output.
fn map_trials<T: Send>(
    trials: u64,
    workers: usize,
    body: impl Fn(u64) -> T + Sync + Send,
) -> Vec<T> {
    if workers == 1 {
        (0..trials).map(body).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| (0..trials).into_par_iter().map(body).collect())
    }
}

fn collect_trials<T: Send>(
    trials: u64,
    workers: usize,
    body: impl Fn(u64) -> Result<T, ExperimentError> + Sync + Send,
) -> Result<Vec<T>, ExperimentError> {
    map_trials(trials, workers, body).into_iter().collect()
}

// ---------------------------------------------------------------------------
// psat
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PsatRow {
    pub k: u32,
    pub d: u32,
    pub n: u64,
    pub trials: u64,
    pub sat: u64,
    pub unsat: u64,
    pub undecided: u64,
    /// Fraction satisfiable among decided trials.
    pub p_hat: f64,
    pub stderr: f64,
    pub master_seed: u64,
}

/// Empirical satisfiability curve. Budget-exceeded trials are reported in
/// their own column and never counted as unsat.
pub fn psat_curve(cfg: &ExperimentConfig) -> Result<Vec<PsatRow>, ExperimentError> {
    let cells = cfg.cells()?;
    let mut rows = Vec::with_capacity(cells.len());
    for (cell_idx, &params) in cells.iter().enumerate() {
        let outcomes = map_trials(cfg.trials, cfg.workers, |t| {
            let seed = mix3(cfg.master_seed, cell_idx as u64, t);
            let inst = generate(params, seed);
            match solve_with_budget(&inst, SolveMode::Decide, cfg.node_budget) {
                Ok(r) if r.satisfiable => Outcome::Sat,
                Ok(_) => Outcome::Unsat,
                Err(SolveError::BudgetExceeded { .. }) => Outcome::Undecided,
                Err(e) => unreachable!("decide cannot fail otherwise: {e}"),
            }
        });
        let sat = outcomes.iter().filter(|o| matches!(o, Outcome::Sat)).count() as u64;
        let unsat = outcomes.iter().filter(|o| matches!(o, Outcome::Unsat)).count() as u64;
        let undecided = cfg.trials - sat - unsat;
        let decided = sat + unsat;
        let p_hat = sat as f64 / decided as f64;
        rows.push(PsatRow {
            k: params.k(),
            d: params.d(),
            n: params.n(),
            trials: cfg.trials,
            sat,
            unsat,
            undecided,
            p_hat,
            stderr: binomial_se(sat, decided),
            master_seed: cfg.master_seed,
        });
    }
    Ok(rows)
}

enum Outcome {
    Sat,
    Unsat,
    Undecided,
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsRow {
    pub k: u32,
    pub d: u32,
    pub n: u64,
    pub trials: u64,
    pub mean_z: f64,
    pub se_z: f64,
    pub mean_z2: f64,
    pub se_z2: f64,
    pub exact_ez: f64,
    pub exact_ez2: f64,
}

/// Monte Carlo estimates of E\[Z\] and E\[Z^2\] with the exact values alongside.
pub fn moment_estimate(cfg: &ExperimentConfig) -> Result<Vec<MomentsRow>, ExperimentError> {
    cfg.require_counting_sizes()?;
    let cells = cfg.cells()?;
    let mut rows = Vec::with_capacity(cells.len());
    for (cell_idx, &params) in cells.iter().enumerate() {
        let zs: Vec<f64> = collect_trials(cfg.trials, cfg.workers, |t| {
            let seed = mix3(cfg.master_seed, cell_idx as u64, t);
            let inst = generate(params, seed);
            let r = solve_with_budget(&inst, SolveMode::Count, cfg.node_budget)?;
            Ok(r.count.to_f64().expect("count fits f64 for n <= 60"))
        })?;
        let z2s: Vec<f64> = zs.iter().map(|z| z * z).collect();
        let (mean_z, se_z) = mean_and_se(&zs);
        let (mean_z2, se_z2) = mean_and_se(&z2s);
        rows.push(MomentsRow {
            k: params.k(),
            d: params.d(),
            n: params.n(),
            trials: cfg.trials,
            mean_z,
            se_z,
            mean_z2,
            se_z2,
            exact_ez: exact_first_moment(&params).to_f64(),
            exact_ez2: exact_second_moment(&params).to_f64(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// overlap
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRow {
    pub k: u32,
    pub d: u32,
    pub n: u64,
    /// Overlap-difference parameter w as a reduced fraction.
    pub w_num: u64,
    pub w_den: u64,
    /// Monte Carlo mean number of ordered solution pairs at this w.
    pub mean: f64,
    pub se: f64,
    pub exact: f64,
}

/// Histogram of solution-pair overlap differences against the exact pair
/// moments. Only w with integral w n/k receive mass.
pub fn overlap_histogram(cfg: &ExperimentConfig) -> Result<Vec<OverlapRow>, ExperimentError> {
    cfg.require_counting_sizes()?;
    let cells = cfg.cells()?;
    let mut rows = Vec::new();
    for (cell_idx, &params) in cells.iter().enumerate() {
        let n_over_k = params.n() / params.k() as u64;
        let per_trial: Vec<Vec<u64>> = collect_trials(cfg.trials, cfg.workers, |t| {
            let seed = mix3(cfg.master_seed, cell_idx as u64, t);
            let inst = generate(params, seed);
            let r = solve_with_budget(&inst, SolveMode::Enumerate, cfg.node_budget)?;
            let masks: Vec<u64> = r
                .solutions
                .expect("enumerate mode returns solutions")
                .iter()
                .map(|a| {
                    a.vars()
                        .iter()
                        .fold(0u64, |acc, &v| acc | (1u64 << (v - 1)))
                })
                .collect();
            let mut buckets = vec![0u64; n_over_k as usize + 1];
            for a in &masks {
                for b in &masks {
                    let diff = (a & !b).count_ones() as usize;
                    buckets[diff] += 1;
                }
            }
            Ok(buckets)
        })?;
        for j in 0..=n_over_k {
            let samples: Vec<f64> = per_trial.iter().map(|b| b[j as usize] as f64).collect();
            let (mean, se) = mean_and_se(&samples);
            let w = Ratio::new(j, n_over_k.max(1));
            rows.push(OverlapRow {
                k: params.k(),
                d: params.d(),
                n: params.n(),
                w_num: *w.numer(),
                w_den: *w.denom(),
                mean,
                se,
                exact: pair_moment_rational(&params, j)
                    .expect("j in range")
                    .to_f64()
                    .unwrap(),
            });
        }
    }
    Ok(rows)
}

/// The w at which the empirical histogram peaks, for comparison against
/// w_max = 1 - 1/k.
pub fn overlap_peak(rows: &[OverlapRow]) -> Option<(u64, u64)> {
    rows.iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .map(|r| (r.w_num, r.w_den))
}

// ---------------------------------------------------------------------------
// cycles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CyclesRow {
    pub k: u32,
    pub d: u32,
    pub n: u64,
    pub i: u32,
    pub trials: u64,
    pub mean: f64,
    pub var: f64,
    pub exact_e: f64,
    pub chi2: f64,
    pub df: u64,
}

/// Pairwise sample covariance/correlation of cycle counts within one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePairStat {
    pub k: u32,
    pub d: u32,
    pub n: u64,
    pub i: u32,
    pub j: u32,
    pub cov: f64,
    pub corr: f64,
}

#[derive(Debug, Clone)]
pub struct CyclesOutcome {
    pub rows: Vec<CyclesRow>,
    pub pair_stats: Vec<CyclePairStat>,
}

/// Per-length empirical mean/variance of cycle counts, chi-square statistic
/// against Poisson(exact E\[X_i\]), and pairwise covariances.
pub fn cycle_poisson_test(cfg: &ExperimentConfig) -> Result<CyclesOutcome, ExperimentError> {
    if cfg.max_i < 1 || cfg.max_i > MAX_CENSUS_I {
        return Err(ExperimentError::ConfigInvalid(format!(
            "max_i = {} not in 1..={MAX_CENSUS_I}",
            cfg.max_i
        )));
    }
    let cells = cfg.cells()?;
    for &params in &cells {
        if 2 * cfg.max_i as u64 > params.copies() {
            return Err(ExperimentError::ConfigInvalid(format!(
                "2 max_i = {} exceeds km = {} for (k={}, d={}, n={})",
                2 * cfg.max_i,
                params.copies(),
                params.k(),
                params.d(),
                params.n()
            )));
        }
    }
    let mut rows = Vec::new();
    let mut pair_stats = Vec::new();
    for (cell_idx, &params) in cells.iter().enumerate() {
        let per_trial: Vec<Vec<u64>> = collect_trials(cfg.trials, cfg.workers, |t| {
            let seed = mix3(cfg.master_seed, cell_idx as u64, t);
            let inst = generate(params, seed);
            Ok(census(&inst, cfg.max_i)?.counts().to_vec())
        })?;
        let series: Vec<Vec<f64>> = (0..cfg.max_i)
            .map(|idx| per_trial.iter().map(|c| c[idx] as f64).collect())
            .collect();
        for (idx, xs) in series.iter().enumerate() {
            let i = idx as u32 + 1;
            let exact_e = exact_cycle_expectation(&params, i)
                .expect("2i <= km checked above")
                .to_f64()
                .unwrap();
            let mut hist = vec![0u64; per_trial.iter().map(|c| c[idx]).max().unwrap() as usize + 1];
            for trial in &per_trial {
                hist[trial[idx] as usize] += 1;
            }
            let gof = poisson_gof(&hist, exact_e, 5.0);
            let (mean, _) = mean_and_se(xs);
            rows.push(CyclesRow {
                k: params.k(),
                d: params.d(),
                n: params.n(),
                i,
                trials: cfg.trials,
                mean,
                var: sample_variance(xs),
                exact_e,
                chi2: gof.chi2,
                df: gof.df,
            });
        }
        for a in 0..cfg.max_i {
            for b in a + 1..cfg.max_i {
                pair_stats.push(CyclePairStat {
                    k: params.k(),
                    d: params.d(),
                    n: params.n(),
                    i: a as u32 + 1,
                    j: b as u32 + 1,
                    cov: sample_covariance(&series[a], &series[b]),
                    corr: sample_correlation(&series[a], &series[b]),
                });
            }
        }
    }
    Ok(CyclesOutcome { rows, pair_stats })
}

// ---------------------------------------------------------------------------
// dispatch + CSV
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum ExperimentOutput {
    Psat(Vec<PsatRow>),
    Moments(Vec<MomentsRow>),
    Cycles(CyclesOutcome),
    Overlap(Vec<OverlapRow>),
}

/// Runs the experiment named by `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    Ok(match cfg.kind {
        ExperimentKind::Psat => ExperimentOutput::Psat(psat_curve(cfg)?),
        ExperimentKind::Moments => ExperimentOutput::Moments(moment_estimate(cfg)?),
        ExperimentKind::Cycles => ExperimentOutput::Cycles(cycle_poisson_test(cfg)?),
        ExperimentKind::Overlap => ExperimentOutput::Overlap(overlap_histogram(cfg)?),
    })
}

impl ExperimentOutput {
    /// Fixed CSV schema per kind: LF line endings, header row, ASCII.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        match self {
            ExperimentOutput::Psat(rows) => {
                writeln!(sink, "k,d,n,trials,sat,unsat,undecided,p_hat,stderr,master_seed")?;
                for r in rows {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.k, r.d, r.n, r.trials, r.sat, r.unsat, r.undecided, r.p_hat, r.stderr,
                        r.master_seed
                    )?;
                }
            }
            ExperimentOutput::Moments(rows) => {
                writeln!(sink, "k,d,n,trials,meanZ,seZ,meanZ2,seZ2,exactEZ,exactEZ2")?;
                for r in rows {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.k, r.d, r.n, r.trials, r.mean_z, r.se_z, r.mean_z2, r.se_z2,
                        r.exact_ez, r.exact_ez2
                    )?;
                }
            }
            ExperimentOutput::Cycles(outcome) => {
                writeln!(sink, "k,d,n,i,trials,mean,var,exactE,chi2,df")?;
                for r in &outcome.rows {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.k, r.d, r.n, r.i, r.trials, r.mean, r.var, r.exact_e, r.chi2, r.df
                    )?;
                }
            }
            ExperimentOutput::Overlap(rows) => {
                writeln!(sink, "k,d,n,w_num,w_den,mean,se,exact")?;
                for r in rows {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{},{},{}",
                        r.k, r.d, r.n, r.w_num, r.w_den, r.mean, r.se, r.exact
                    )?;
                }
            }
        }
        Ok(())
    }
}
