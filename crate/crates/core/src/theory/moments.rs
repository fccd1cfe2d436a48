//! Exact first and second moments of the solution count Z.
//!
//! E[Z] = k^m C(n, n/k) / C(km, m); the pair moment at overlap difference
//! |T - T'| = wn/k multiplies in (k-1)^{wm} C(n/k, wn/k) C(n - n/k, wn/k)
//! / C((k-1)m, wm); E[Z^2] sums the pair moment over all admissible w.
//!
//! Computations stay in exact big rationals while km <= 2000 and move to
//! natural-log floats beyond, where only asymptotics are probed; the two
//! routes agree to better than 1e-9 relative on the overlap window.

use super::TheoryError;
use crate::model::ModelParams;
use crate::numeric::{
    big_binomial, ln_big_rational, ln_binomial, EXACT_REGIME_MAX_KM,
};
use num::rational::Ratio;
use num::{BigInt, BigRational, BigUint, ToPrimitive, Zero};

/// A moment value in whichever regime it was computed.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Exact(BigRational),
    /// Natural log of the value.
    LogSpace(f64),
}

impl MomentValue {
    /// Natural log of the value in either regime.
    pub fn ln(&self) -> f64 {
        match self {
            MomentValue::Exact(r) => ln_big_rational(r),
            MomentValue::LogSpace(l) => *l,
        }
    }

    /// The value itself; may overflow to infinity in the log regime.
    pub fn to_f64(&self) -> f64 {
        match self {
            MomentValue::Exact(r) => r.to_f64().unwrap_or(f64::INFINITY),
            MomentValue::LogSpace(l) => l.exp(),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            MomentValue::Exact(r) => Some(r),
            MomentValue::LogSpace(_) => None,
        }
    }
}

/// One admissible point of the pair-moment curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMomentPoint {
    /// Overlap-difference parameter, reduced.
    pub w: Ratio<u64>,
    pub value: MomentValue,
}

fn ratio_binomial(n: u64, r: u64) -> BigRational {
    BigRational::from(BigInt::from(big_binomial(n, r)))
}

/// Exact E\[Z\] as a big rational, any size.
pub fn first_moment_rational(p: &ModelParams) -> BigRational {
    let (k, n, m) = (p.k() as u64, p.n(), p.m());
    let power = BigUint::from(k).pow(m.try_into().expect("m fits u32 in exact regime"));
    BigRational::from(BigInt::from(power)) * ratio_binomial(n, n / k)
        / ratio_binomial(k * m, m)
}

/// ln E\[Z\] in log-space floats, any size.
pub fn first_moment_ln(p: &ModelParams) -> f64 {
    let (k, n, m) = (p.k() as u64, p.n(), p.m());
    m as f64 * (k as f64).ln() + ln_binomial(n, n / k) - ln_binomial(k * m, m)
}

/// Exact E\[Z\], switching regimes at km = 2000.
pub fn exact_first_moment(p: &ModelParams) -> MomentValue {
    if p.copies() <= EXACT_REGIME_MAX_KM {
        MomentValue::Exact(first_moment_rational(p))
    } else {
        MomentValue::LogSpace(first_moment_ln(p))
    }
}

/// Validates an overlap parameter and returns j = w n/k.
fn overlap_index(p: &ModelParams, w: Ratio<u64>) -> Result<u64, TheoryError> {
    if w > Ratio::from_integer(1) {
        return Err(TheoryError::NonIntegralOverlap(format!(
            "w = {w} exceeds 1"
        )));
    }
    let n_over_k = Ratio::from_integer(p.n() / p.k() as u64);
    let m = Ratio::from_integer(p.m());
    let s = w * n_over_k;
    let wm = w * m;
    if !s.is_integer() || !wm.is_integer() {
        return Err(TheoryError::NonIntegralOverlap(w.to_string()));
    }
    Ok(s.to_integer())
}

/// Exact E\[Z^(2)_w\] as a big rational, indexed by j = w n/k (the number of
/// variables in T - T').
pub fn pair_moment_rational(p: &ModelParams, j: u64) -> Result<BigRational, TheoryError> {
    let (k, d, n, m) = (p.k() as u64, p.d() as u64, p.n(), p.m());
    let n_over_k = n / k;
    if j > n_over_k {
        return Err(TheoryError::NonIntegralOverlap(format!(
            "overlap difference {j} exceeds n/k = {n_over_k}"
        )));
    }
    let jd = j * d; // = w m
    let factor = BigRational::from(BigInt::from(BigUint::from(k - 1).pow(
        jd.try_into().expect("wm fits u32 in exact regime"),
    )));
    Ok(first_moment_rational(p) * factor * ratio_binomial(n_over_k, j)
        * ratio_binomial(n - n_over_k, j)
        / ratio_binomial((k - 1) * m, jd))
}

/// ln E\[Z^(2)_w\] in log-space floats.
pub fn pair_moment_ln(p: &ModelParams, j: u64) -> Result<f64, TheoryError> {
    let (k, d, n, m) = (p.k() as u64, p.d() as u64, p.n(), p.m());
    let n_over_k = n / k;
    if j > n_over_k {
        return Err(TheoryError::NonIntegralOverlap(format!(
            "overlap difference {j} exceeds n/k = {n_over_k}"
        )));
    }
    let jd = j * d;
    Ok(first_moment_ln(p) + jd as f64 * ((k - 1) as f64).ln() + ln_binomial(n_over_k, j)
        + ln_binomial(n - n_over_k, j)
        - ln_binomial((k - 1) * m, jd))
}

/// Exact E\[Z^(2)_w\] for a rational overlap parameter w; errors unless both
/// w n/k and w m are integers.
pub fn exact_pair_moment(p: &ModelParams, w: Ratio<u64>) -> Result<PairMomentPoint, TheoryError> {
    let j = overlap_index(p, w)?;
    let value = if p.copies() <= EXACT_REGIME_MAX_KM {
        MomentValue::Exact(pair_moment_rational(p, j)?)
    } else {
        MomentValue::LogSpace(pair_moment_ln(p, j)?)
    };
    Ok(PairMomentPoint { w: w.reduced(), value })
}

/// The admissible overlap parameters w = 0, k/n, 2k/n, ..., 1 (reduced).
pub fn admissible_overlaps(p: &ModelParams) -> Vec<Ratio<u64>> {
    let n_over_k = p.n() / p.k() as u64;
    (0..=n_over_k)
        .map(|j| Ratio::new(j, n_over_k.max(1)))
        .collect()
}

/// Exact E\[Z^2\] = sum over admissible w of E\[Z^(2)_w\].
pub fn exact_second_moment(p: &ModelParams) -> MomentValue {
    let n_over_k = p.n() / p.k() as u64;
    if p.copies() <= EXACT_REGIME_MAX_KM {
        let mut acc = BigRational::zero();
        for j in 0..=n_over_k {
            acc += pair_moment_rational(p, j).expect("j in range");
        }
        MomentValue::Exact(acc)
    } else {
        // log-sum-exp over the admissible overlaps
        let lns: Vec<f64> = (0..=n_over_k)
            .map(|j| pair_moment_ln(p, j).expect("j in range"))
            .collect();
        let top = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = lns.iter().map(|l| (l - top).exp()).sum();
        MomentValue::LogSpace(top + sum.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{laplace_ratio, phi1};

    fn params(k: u32, d: u32, n: u64) -> ModelParams {
        ModelParams::new(k, d, n).unwrap()
    }

    fn rational(num: u64, den: u64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn first_moment_exact_small() {
        let ez = first_moment_rational(&params(3, 2, 9));
        assert_eq!(ez, rational(729, 221));
        match exact_first_moment(&params(3, 2, 9)) {
            MomentValue::Exact(r) => assert_eq!(r, rational(729, 221)),
            _ => panic!("expected exact regime"),
        }
    }

    #[test]
    fn one_clause_over_all_variables() {
        // d = 1, n = k: E[Z] = k exactly.
        for k in [3u32, 4, 5, 9] {
            let ez = first_moment_rational(&params(k, 1, k as u64));
            assert_eq!(ez, rational(k as u64, 1));
        }
    }

    #[test]
    fn first_moment_asymptotic_ratio() {
        // E[Z] / (sqrt(d) e^{n phi1}) -> 1; within 1% at n = 3e4.
        let p = params(3, 2, 30000);
        let ln_ez = first_moment_ln(&p);
        let ln_asymptotic = 0.5 * 2f64.ln() + 30000.0 * phi1(3, 2.0);
        assert!((ln_ez - ln_asymptotic).abs() < 0.01f64.ln_1p());
    }

    #[test]
    fn pair_moment_small_values() {
        let p = params(3, 2, 9);
        // w = 0 collapses to the first moment.
        let at0 = exact_pair_moment(&p, Ratio::new(0, 1)).unwrap();
        assert_eq!(at0.value.as_exact().unwrap(), &rational(729, 221));
        // w = 1: disjoint pairs.
        let at1 = exact_pair_moment(&p, Ratio::new(1, 1)).unwrap();
        assert_eq!(at1.value.as_exact().unwrap(), &rational(77760, 17017));
        // non-integral overlap rejected: w n/k = 3/2
        assert!(exact_pair_moment(&p, Ratio::new(1, 2)).is_err());
        assert!(exact_pair_moment(&p, Ratio::new(3, 2)).is_err());
    }

    #[test]
    fn second_moment_is_sum_of_pair_moments() {
        let p = params(3, 2, 9);
        let total = exact_second_moment(&p);
        let mut acc = BigRational::zero();
        for w in admissible_overlaps(&p) {
            acc += exact_pair_moment(&p, w)
                .unwrap()
                .value
                .as_exact()
                .unwrap()
                .clone();
        }
        assert_eq!(total.as_exact().unwrap(), &acc);
        assert_eq!(acc, rational(16281, 1001));
    }

    #[test]
    fn admissible_overlaps_shape() {
        let p = params(3, 2, 9);
        let ws = admissible_overlaps(&p);
        assert_eq!(ws.len(), 4);
        assert_eq!(ws[0], Ratio::new(0, 1));
        assert_eq!(ws[3], Ratio::new(1, 1));
    }

    #[test]
    fn regimes_agree_on_overlap_window() {
        // 500 <= km <= 2000: exact-rational and log-gamma evaluations agree
        // to 1e-9 relative.
        for (k, d, n) in [(3u32, 2u32, 252u64), (3, 2, 999), (4, 2, 300), (5, 3, 500)] {
            let p = params(k, d, n);
            let km = p.copies();
            assert!((500..=2000).contains(&km), "window: km = {km}");
            let exact = ln_big_rational(&first_moment_rational(&p));
            let lg = first_moment_ln(&p);
            assert!((exact - lg).abs() < 1e-9, "first moment k={k} d={d} n={n}");
            let n_over_k = n / k as u64;
            for j in [0, 1, n_over_k / 2, n_over_k] {
                let exact = ln_big_rational(&pair_moment_rational(&p, j).unwrap());
                let lg = pair_moment_ln(&p, j).unwrap();
                assert!((exact - lg).abs() < 1e-9, "pair moment j={j}");
            }
            let exact2 = exact_second_moment(&p).ln();
            // recompute in the log regime by summing pair moments
            let lns: Vec<f64> = (0..=n_over_k)
                .map(|j| pair_moment_ln(&p, j).unwrap())
                .collect();
            let top = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + lns.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
            assert!((exact2 - lse).abs() < 1e-9, "second moment");
        }
    }

    #[test]
    fn second_moment_laplace_limit() {
        // E[Z^2] / (C E[Z]^2) -> 1; within 2% at n = 6000.
        for (k, d) in [(3u32, 2u32), (4, 2)] {
            let n = 6000u64;
            let p = params(k, d, n);
            let ln_ratio = exact_second_moment(&p).ln()
                - laplace_ratio(k, d as f64).unwrap().ln()
                - 2.0 * first_moment_ln(&p);
            assert!(ln_ratio.abs() < 0.02f64.ln_1p(), "k={k}: {ln_ratio}");
        }
    }

    #[test]
    fn stirling_consistency_improves_with_n() {
        // Exact over asymptotic tends to 1 monotonically on a doubling ladder.
        let mut prev = f64::INFINITY;
        for n in [96u64, 192, 384, 768, 1536] {
            let p = params(3, 2, n);
            let ln_ez = first_moment_ln(&p);
            let gap = (ln_ez - (0.5 * 2f64.ln() + n as f64 * phi1(3, 2.0))).abs();
            assert!(gap < prev, "n={n}: gap {gap} vs prev {prev}");
            prev = gap;
        }
    }
}
