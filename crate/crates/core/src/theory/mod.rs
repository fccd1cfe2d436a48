//! Closed-form and exact-combinatorial quantities: the satisfiability
//! threshold d*, the first/second moment rate functions phi_1 and phi_2(w),
//! the Laplace-method ratio C, and the cycle-statistics family
//! (lambda_i, delta_i, mu_i). All rates are in nats.

mod cycles;
mod moments;

pub use cycles::{
    delta_i, delta_i_rational, exact_cycle_expectation, lambda_i, mu_i, necklace, NecklaceTable,
};
pub use moments::{
    admissible_overlaps, exact_first_moment, exact_pair_moment, exact_second_moment,
    first_moment_ln, first_moment_rational, pair_moment_ln, pair_moment_rational, MomentValue,
    PairMomentPoint,
};

use crate::model::ModelError;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overlap w = {0} is not admissible: w*n/k and w*m must be integers")]
    NonIntegralOverlap(String),
    #[error("cycle too long: 2i = {two_i} exceeds the copy count km = {km}")]
    CycleTooLong { two_i: u64, km: u64 },
    #[error("series diverges for d >= k (d = {d}, k = {k})")]
    DivergentSeries { k: u32, d: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shannon entropy in nats with the analytic x ln x -> 0 endpoint limits.
/// Internal variant that assumes its argument is already in [0, 1].
pub(crate) fn h(a: f64) -> f64 {
    let mut s = 0.0;
    if a > 0.0 {
        s -= a * a.ln();
    }
    if a < 1.0 {
        s -= (1.0 - a) * (1.0 - a).ln();
    }
    s
}

/// Shannon entropy h(alpha) = -alpha ln alpha - (1-alpha) ln(1-alpha).
pub fn entropy(alpha: f64) -> Result<f64, TheoryError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TheoryError::Domain(format!(
            "entropy argument {alpha} outside [0, 1]"
        )));
    }
    Ok(h(alpha))
}

/// -ln(1 - 1/k), evaluated via ln_1p for accuracy at large k.
fn neg_ln_one_minus_inv(kf: f64) -> f64 {
    -(-1.0 / kf).ln_1p()
}

/// The satisfiability threshold d*_k = ln k / ((k-1)(-ln(1-1/k))) + 1.
pub fn dstar(k: u32) -> Result<f64, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!("dstar requires k >= 3, got {k}")));
    }
    let kf = k as f64;
    Ok(kf.ln() / ((kf - 1.0) * neg_ln_one_minus_inv(kf)) + 1.0)
}

/// First-moment rate phi_1 = (d/k) ln k - (d-1) h(1/k).
///
/// Real d >= 1 is accepted so the threshold can be located by root-finding.
/// Both algebraic forms are evaluated and must agree to 1e-12.
pub fn phi1(k: u32, d: f64) -> f64 {
    debug_assert!(k >= 3, "phi1 requires k >= 3");
    debug_assert!(d >= 1.0, "phi1 requires d >= 1");
    let kf = k as f64;
    let direct = d / kf * kf.ln() - (d - 1.0) * h(1.0 / kf);
    let folded = (kf.ln() - (d - 1.0) * (kf - 1.0) * neg_ln_one_minus_inv(kf)) / kf;
    assert!(
        (direct - folded).abs() <= 1e-12,
        "phi1 evaluation routes disagree: {direct} vs {folded}"
    );
    direct
}

/// Pair-overlap rate phi_2(w); w is the overlap-difference parameter
/// (|T - T'| = w n/k). Endpoints are taken by analytic limit.
pub fn phi2(w: f64, k: u32, d: f64) -> Result<f64, TheoryError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(TheoryError::Domain(format!(
            "phi2 overlap {w} outside [0, 1]"
        )));
    }
    let kf = k as f64;
    Ok(phi1(k, d) + w * d / kf * (kf - 1.0).ln() + h(w) / kf
        - (d - 1.0) * (1.0 - 1.0 / kf) * h(w / (kf - 1.0)))
}

/// Laplace prefactor f(w) = d sqrt(k / (w(1-w))), defined on the open
/// interval.
pub fn f_prefactor(w: f64, k: u32, d: f64) -> Result<f64, TheoryError> {
    if w <= 0.0 || w >= 1.0 {
        return Err(TheoryError::Domain(format!(
            "f_prefactor requires 0 < w < 1, got {w}"
        )));
    }
    let kf = k as f64;
    Ok(d * (kf / (w * (1.0 - w))).sqrt())
}

/// d phi_2 / dw, used to polish the maximizer past the float noise floor of
/// value comparisons.
fn phi2_prime(w: f64, k: u32, d: f64) -> f64 {
    let kf = k as f64;
    d / kf * (kf - 1.0).ln() + ((1.0 - w) / w).ln() / kf
        - (d - 1.0) / kf * ((kf - 1.0 - w) / w).ln()
}

/// Global maximizer of phi_2 on [0, 1]: dense grid scan (1e4 points), ternary
/// refinement, then a bisection polish on the analytic derivative.
///
/// Below the threshold the maximizer provably sits at the independent-pair
/// point, so for d < d*_k the result is asserted to equal 1 - 1/k; for
/// d >= d* the maximizer is returned without the assertion.
pub fn maximize_phi2(k: u32, d: f64) -> (f64, f64) {
    const GRID: usize = 10_000;
    let eval = |w: f64| phi2(w, k, d).expect("grid point inside [0,1]");

    let mut best_j = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for j in 0..=GRID {
        let v = eval(j as f64 / GRID as f64);
        if v > best_val {
            best_val = v;
            best_j = j;
        }
    }
    let mut lo = (best_j.saturating_sub(1)) as f64 / GRID as f64;
    let mut hi = ((best_j + 1).min(GRID)) as f64 / GRID as f64;

    // Ternary refinement while value comparisons are still reliable.
    while hi - lo > 1e-4 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }

    // Near the maximum phi_2 is flat to O(eps) over ~1e-8, so finish on the
    // sign change of the derivative when the bracket straddles it.
    let interior = lo > 0.0 && hi < 1.0;
    let wmax = if interior && phi2_prime(lo, k, d) > 0.0 && phi2_prime(hi, k, d) < 0.0 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if phi2_prime(mid, k, d) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    } else {
        while hi - lo > 1e-10 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1) < eval(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        0.5 * (lo + hi)
    };

    let value = eval(wmax);
    if let Ok(ds) = dstar(k) {
        if d < ds {
            let expected = 1.0 - 1.0 / k as f64;
            assert!(
                (wmax - expected).abs() <= 1e-8,
                "phi2 maximizer {wmax} != 1 - 1/k = {expected} for k={k}, d={d}"
            );
        }
    }
    (wmax, value)
}

/// Closed-form curvature phi''_2(1 - 1/k) = -k(k-d)/(k-1)^2.
pub fn phi2_curvature(k: u32, d: f64) -> f64 {
    debug_assert!(k >= 3);
    let kf = k as f64;
    // `+ 0.0` keeps the d = k case from rendering as negative zero.
    -kf * (kf - d) / ((kf - 1.0) * (kf - 1.0)) + 0.0
}

/// Inflection point w_0 = (d-2)(k-1)/(dk-d-k) of phi_2, or None when the
/// denominator vanishes.
pub fn inflection(k: u32, d: f64) -> Option<f64> {
    let kf = k as f64;
    let denom = d * kf - d - kf;
    if denom == 0.0 {
        None
    } else {
        Some((d - 2.0) * (kf - 1.0) / denom)
    }
}

/// Second-moment ratio limit C = sqrt((k-1)/(k-d)); requires d < k.
pub fn laplace_ratio(k: u32, d: f64) -> Result<f64, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!(
            "laplace_ratio requires k >= 3, got {k}"
        )));
    }
    let kf = k as f64;
    if d >= kf {
        return Err(TheoryError::Domain(format!(
            "laplace_ratio requires d < k (got d = {d}, k = {k})"
        )));
    }
    Ok(((kf - 1.0) / (kf - d)).sqrt())
}

/// The second-moment method's satisfiability floor, Pr\[Z > 0\] >= 1/C.
pub fn psat_lower_bound(k: u32, d: f64) -> Result<f64, TheoryError> {
    Ok(1.0 / laplace_ratio(k, d)?)
}

/// Closed form of the conditioning series, sum_i lambda_i delta_i^2
/// = (1/2) ln((k-1)/(k-d)); diverges for d >= k.
pub fn sum_lambda_delta_sq(k: u32, d: f64) -> Result<f64, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!(
            "sum_lambda_delta_sq requires k >= 3, got {k}"
        )));
    }
    let kf = k as f64;
    if d >= kf {
        return Err(TheoryError::DivergentSeries { k, d });
    }
    Ok(0.5 * ((kf - 1.0) / (kf - d)).ln())
}

/// Partial sums of lambda_i delta_i^2 = (1/(2i)) ((d-1)/(k-1))^i, truncated
/// when the geometric tail bound drops below `tol`.
pub fn sum_lambda_delta_sq_partial(k: u32, d: f64, tol: f64) -> Result<f64, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!(
            "sum_lambda_delta_sq_partial requires k >= 3, got {k}"
        )));
    }
    let kf = k as f64;
    if d >= kf {
        return Err(TheoryError::DivergentSeries { k, d });
    }
    let r = (d - 1.0) / (kf - 1.0);
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut i = 0u32;
    loop {
        i += 1;
        power *= r;
        sum += power / (2.0 * i as f64);
        // tail < r^{i+1} / (2(i+1)(1-r))
        if power * r / (2.0 * (i + 1) as f64 * (1.0 - r)) < tol {
            break;
        }
        assert!(i < 1_000_000, "series truncation failed to converge");
    }
    Ok(sum)
}

/// Every closed-form scalar for one (k, d) pair. Fields that require d < k
/// (the Laplace ratio and the conditioning series) are None outside that
/// range.
#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub k: u32,
    pub d: u32,
    pub dstar: f64,
    pub phi1: f64,
    pub c_ratio: Option<f64>,
    pub psat_lower_bound: Option<f64>,
    pub wmax: f64,
    pub phi2_at_wmax: f64,
    pub phi2_curvature: f64,
    pub w0: Option<f64>,
    pub sum_lambda_delta_sq: Option<f64>,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Assembles the full report; cycle families run over i = 1..=max_i.
pub fn theory_report(k: u32, d: u32, max_i: u32) -> Result<TheoryReport, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!(
            "theory_report requires k >= 3, got {k}"
        )));
    }
    if d < 1 {
        return Err(TheoryError::Domain("theory_report requires d >= 1".into()));
    }
    if max_i > 64 {
        return Err(TheoryError::Domain(format!(
            "cycle family index max_i = {max_i} exceeds the necklace limit 64"
        )));
    }
    let df = d as f64;
    let (wmax, phi2_at_wmax) = maximize_phi2(k, df);
    let mut lambda = Vec::new();
    let mut delta = Vec::new();
    let mut mu = Vec::new();
    for i in 1..=max_i {
        lambda.push(lambda_i(k, d, i));
        delta.push(delta_i(k, i)?);
        mu.push(mu_i(k, d, i)?);
    }
    Ok(TheoryReport {
        k,
        d,
        dstar: dstar(k)?,
        phi1: phi1(k, df),
        c_ratio: laplace_ratio(k, df).ok(),
        psat_lower_bound: psat_lower_bound(k, df).ok(),
        wmax,
        phi2_at_wmax,
        phi2_curvature: phi2_curvature(k, df),
        w0: inflection(k, df),
        sum_lambda_delta_sq: sum_lambda_delta_sq(k, df).ok(),
        lambda,
        delta,
        mu,
    })
}

impl TheoryReport {
    /// Flat `key=value` rendering, one scalar per line.
    pub fn write_kv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        writeln!(sink, "k={}", self.k)?;
        writeln!(sink, "d={}", self.d)?;
        writeln!(sink, "dstar={}", self.dstar)?;
        writeln!(sink, "phi1={}", self.phi1)?;
        writeln!(sink, "C={}", opt(self.c_ratio))?;
        writeln!(sink, "psat_lower_bound={}", opt(self.psat_lower_bound))?;
        writeln!(sink, "wmax={}", self.wmax)?;
        writeln!(sink, "phi2_at_wmax={}", self.phi2_at_wmax)?;
        writeln!(sink, "phi2_curvature={}", self.phi2_curvature)?;
        writeln!(sink, "w0={}", opt(self.w0))?;
        writeln!(sink, "sum_lambda_delta_sq={}", opt(self.sum_lambda_delta_sq))?;
        for (idx, v) in self.lambda.iter().enumerate() {
            writeln!(sink, "lambda[{}]={}", idx + 1, v)?;
        }
        for (idx, v) in self.delta.iter().enumerate() {
            writeln!(sink, "delta[{}]={}", idx + 1, v)?;
        }
        for (idx, v) in self.mu.iter().enumerate() {
            writeln!(sink, "mu[{}]={}", idx + 1, v)?;
        }
        Ok(())
    }

    /// `key,value` CSV rendering with a header row.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "key,value")?;
        let mut kv = Vec::new();
        self.write_kv(&mut kv)?;
        for line in String::from_utf8(kv).unwrap().lines() {
            let (key, value) = line.split_once('=').unwrap();
            writeln!(sink, "{key},{value}")?;
        }
        Ok(())
    }
}
