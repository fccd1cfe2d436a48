//! Statistics helpers for the Monte Carlo harness: sample means with standard
//! errors, binomial errors, covariance, and chi-square goodness of fit
//! against Poisson or arbitrary categorical laws.

use crate::numeric::ln_factorial;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and its standard error (n-1 variance).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (n-1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_se(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Sample covariance (n-1 denominator).
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0)
}

/// Sample Pearson correlation.
pub fn sample_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    sample_covariance(xs, ys) / (sample_variance(xs).sqrt() * sample_variance(ys).sqrt())
}

/// Poisson probability mass function, evaluated in log space.
pub fn poisson_pmf(mu: f64, j: u64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (j as f64 * mu.ln() - mu - ln_factorial(j)).exp()
}

/// Chi-square goodness-of-fit outcome.
#[derive(Debug, Clone, Copy)]
pub struct Gof {
    pub chi2: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(chi2: f64, df: u64) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    dist.sf(chi2)
}

/// Generic chi-square test of observed cell counts against cell
/// probabilities. No parameters are fitted, so df = cells - 1.
pub fn categorical_gof(observed: &[u64], probs: &[f64]) -> Gof {
    assert_eq!(observed.len(), probs.len());
    assert!(observed.len() >= 2, "need at least two cells");
    let trials: u64 = observed.iter().sum();
    let mut chi2 = 0.0;
    for (&obs, &p) in observed.iter().zip(probs) {
        let expected = trials as f64 * p;
        assert!(expected > 0.0, "cell with zero expected count");
        let diff = obs as f64 - expected;
        chi2 += diff * diff / expected;
    }
    let df = observed.len() as u64 - 1;
    Gof {
        chi2,
        df,
        p_value: chi_square_sf(chi2, df),
    }
}

/// Chi-square test of an integer-valued sample, summarized as a histogram
/// `hist[v] = #observations equal to v`, against Poisson(mu). The right
/// tail is pooled so every cell keeps an expected count of at least
/// `min_expected`.
pub fn poisson_gof(hist: &[u64], mu: f64, min_expected: f64) -> Gof {
    let trials: u64 = hist.iter().sum();
    assert!(trials > 0);

    // Largest J with expected tail mass P(X >= J) still >= min_expected.
    let mut tail = 1.0; // P(X >= 0)
    let mut cut = 0usize;
    loop {
        let next_tail = tail - poisson_pmf(mu, cut as u64);
        if trials as f64 * next_tail < min_expected {
            break;
        }
        tail = next_tail;
        cut += 1;
    }
    let cut = cut.max(1);

    // Cells {0}, {1}, ..., {cut-1}, {>= cut}.
    let mut observed = vec![0u64; cut + 1];
    for (v, &count) in hist.iter().enumerate() {
        observed[v.min(cut)] += count;
    }
    let mut probs = vec![0.0; cut + 1];
    let mut head = 0.0;
    for (j, p) in probs.iter_mut().enumerate().take(cut) {
        *p = poisson_pmf(mu, j as u64);
        head += *p;
    }
    probs[cut] = (1.0 - head).max(f64::MIN_POSITIVE);
    categorical_gof(&observed, &probs)
}
