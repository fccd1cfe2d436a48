//! Exact and log-space arithmetic shared by the closed-form calculators.
//!
//! Two regimes: exact big-integer rationals where oracle tests need bit-exact
//! values, and natural-log floating arithmetic where only asymptotics are
//! probed. `ln_factorial` backs the log regime with a lazily extended,
//! compensated cumulative table so that log-route and exact-route
//! evaluations agree to well under 1e-9 on the overlap window.

use num::bigint::Sign;
use num::{BigInt, BigRational, BigUint, One, ToPrimitive};
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

/// Largest copy count `km` for which moment computations stay in exact
/// big-integer rationals; above it they switch to log-space floats.
pub const EXACT_REGIME_MAX_KM: u64 = 2000;

struct LnFacTable {
    sums: Vec<f64>,
    // Kahan compensation carried across lazy extensions.
    comp: f64,
}

static LN_FAC: Mutex<LnFacTable> = Mutex::new(LnFacTable {
    sums: Vec::new(),
    comp: 0.0,
});

// Beyond this the table would get large; switch to the Stirling series,
// whose truncation error is far below 1e-12 there.
const LN_FAC_TABLE_MAX: u64 = 1 << 22;

/// Natural log of `n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n > LN_FAC_TABLE_MAX {
        return ln_gamma_stirling(n as f64 + 1.0);
    }
    let mut table = LN_FAC.lock().unwrap();
    if table.sums.is_empty() {
        table.sums.push(0.0); // ln 0! = 0
    }
    while table.sums.len() <= n as usize {
        let i = table.sums.len() as f64;
        let last = *table.sums.last().unwrap();
        // Kahan step: sums[i] = sums[i-1] + ln(i)
        let y = i.ln() - table.comp;
        let t = last + y;
        table.comp = (t - last) - y;
        table.sums.push(t);
    }
    table.sums[n as usize]
}

// Stirling series for ln Gamma(x), x large (only used for x > 2^22).
fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x * x)
}

/// Natural log of the binomial coefficient C(n, r).
pub fn ln_binomial(n: u64, r: u64) -> f64 {
    assert!(r <= n, "ln_binomial: r = {r} > n = {n}");
    ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r)
}

/// Exact binomial coefficient C(n, r).
pub fn big_binomial(n: u64, r: u64) -> BigUint {
    assert!(r <= n, "big_binomial: r = {r} > n = {n}");
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Falling factorial (x)_r = x (x-1) ... (x-r+1); (x)_0 = 1.
///
/// Works for any numeric kind with the obvious ring operations (`f64`,
/// `BigInt`, `BigRational`, ...).
pub fn falling_factorial<T>(x: T, r: u32) -> T
where
    T: Clone + One + std::ops::Mul<Output = T> + std::ops::Sub<Output = T>,
{
    let mut acc = T::one();
    let mut cur = x;
    for _ in 0..r {
        acc = acc * cur.clone();
        cur = cur - T::one();
    }
    acc
}

/// Natural log of a positive big integer, accurate to a few ulps even when
/// the value itself overflows `f64`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(*x > BigUint::ZERO, "ln_biguint: argument must be positive");
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * LN_2
}

/// Natural log of a positive big rational.
pub fn ln_big_rational(x: &BigRational) -> f64 {
    assert!(x.numer().sign() == Sign::Plus, "ln_big_rational: argument must be positive");
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

/// Rational from an integer pair.
pub fn big_ratio(num: i64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
