//! Cycle-statistics theory: asymptotic Poisson means lambda_i, the exact
//! finite-size cycle expectations, the necklace table N_{i,t} behind the
//! generating function g(z), and the tilt factors delta_i, mu_i.

use super::TheoryError;
use crate::model::ModelParams;
use crate::numeric::falling_factorial;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

/// Counts N_{i,0} .. N_{i, floor(i/2)} of labeled length-i cyclic
/// arrangements with t marked positions, no two adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecklaceTable {
    i: u32,
    counts: Vec<u64>,
}

impl NecklaceTable {
    pub fn cycle_length(&self) -> u32 {
        self.i
    }

    /// N_{i,t}.
    pub fn count(&self, t: usize) -> u64 {
        self.counts[t]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Evaluates g(z) = sum_t N_{i,t} z^t exactly.
    pub fn evaluate(&self, z: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        let mut zpow = BigRational::one();
        for &c in &self.counts {
            acc += BigRational::from(BigInt::from(c)) * zpow.clone();
            zpow *= z.clone();
        }
        acc
    }
}

// Polynomials in s = sqrt(z), dense u64 coefficient vectors. For i <= 64 all
// counts fit comfortably (they are bounded by C(64, 32) < 2^61).
type Poly = Vec<u64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(x.checked_mul(y).unwrap()).unwrap();
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

type PolyMat = [[Poly; 2]; 2];

fn mat_mul(a: &PolyMat, b: &PolyMat) -> PolyMat {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let mut acc: Poly = vec![0];
            for (l, row) in b.iter().enumerate() {
                acc = poly_add(&acc, &poly_mul(&a[r][l], &row[c]));
            }
            acc
        })
    })
}

/// Exact necklace table via the integer transfer matrix
/// [[0, s], [s, 1]] with s^2 = z: the trace of its i-th power is g(z), and
/// only even powers of s survive. No floating surds anywhere.
pub fn necklace(i: u32) -> NecklaceTable {
    assert!((1..=64).contains(&i), "necklace requires 1 <= i <= 64");
    let m: PolyMat = [[vec![0], vec![0, 1]], [vec![0, 1], vec![1]]];
    let mut power = m.clone();
    for _ in 1..i {
        power = mat_mul(&power, &m);
    }
    let trace = poly_add(&power[0][0], &power[1][1]);
    let mut counts = vec![0u64; i as usize / 2 + 1];
    for (deg, &coef) in trace.iter().enumerate() {
        if coef != 0 {
            assert!(deg % 2 == 0, "odd power of sqrt(z) survived in the trace");
            counts[deg / 2] = coef;
        }
    }
    NecklaceTable { i, counts }
}

/// Asymptotic Poisson mean lambda_i = ((k-1)(d-1))^i / (2i).
pub fn lambda_i(k: u32, d: u32, i: u32) -> f64 {
    assert!(k >= 3 && d >= 1 && i >= 1);
    (((k - 1) as f64 * (d - 1) as f64).powi(i as i32)) / (2.0 * i as f64)
}

/// Exact finite-size expectation of the number of 2i-cycles:
/// (m)_i (n)_i (k(k-1)d(d-1))^i / (2i (km)_{2i}).
pub fn exact_cycle_expectation(params: &ModelParams, i: u32) -> Result<BigRational, TheoryError> {
    if i < 1 {
        return Err(TheoryError::Domain("cycle length index i must be >= 1".into()));
    }
    let km = params.copies();
    if 2 * i as u64 > km {
        return Err(TheoryError::CycleTooLong {
            two_i: 2 * i as u64,
            km,
        });
    }
    let (k, d, n, m) = (params.k() as u64, params.d() as u64, params.n(), params.m());
    let wiring = BigInt::from(k * (k - 1) * d * (d - 1)).pow(i);
    let numer = falling_factorial(BigInt::from(m), i)
        * falling_factorial(BigInt::from(n), i)
        * wiring;
    let denom = BigInt::from(2 * i as u64) * falling_factorial(BigInt::from(km), 2 * i);
    Ok(BigRational::new(numer, denom))
}

/// Rational delta_i, computed both through the generating-function route
/// ((k-2)/(k-1))^i g((k-1)/(k-2)^2) - 1 and through the closed form
/// (-1/(k-1))^i; the two must agree exactly.
pub fn delta_i_rational(k: u32, i: u32) -> Result<BigRational, TheoryError> {
    if k < 3 {
        return Err(TheoryError::Domain(format!(
            "delta_i requires k >= 3 (k = 2 makes the g argument singular), got {k}"
        )));
    }
    assert!(i >= 1, "delta_i requires i >= 1");
    let km1 = BigInt::from(k - 1);
    let km2 = BigInt::from(k - 2);

    let closed = BigRational::new(BigInt::from(-1), km1.clone()).pow(i as i32);

    let table = necklace(i);
    let z = BigRational::new(km1.clone(), km2.clone() * km2.clone());
    let g = table.evaluate(&z);
    let via_g = BigRational::new(km2, km1).pow(i as i32) * g - BigRational::one();

    assert_eq!(
        via_g, closed,
        "delta_{i} routes disagree for k = {k}: g-route {via_g} vs closed {closed}"
    );
    Ok(closed)
}

/// delta_i = (-1/(k-1))^i.
pub fn delta_i(k: u32, i: u32) -> Result<f64, TheoryError> {
    Ok(delta_i_rational(k, i)?.to_f64().unwrap())
}

/// mu_i = lambda_i (1 + delta_i).
pub fn mu_i(k: u32, d: u32, i: u32) -> Result<f64, TheoryError> {
    Ok(lambda_i(k, d, i) * (1.0 + delta_i(k, i)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::big_binomial;
    use num::FromPrimitive;

    #[test]
    fn necklace_known_rows() {
        assert_eq!(necklace(1).counts(), &[1]);
        assert_eq!(necklace(2).counts(), &[1, 2]);
        assert_eq!(necklace(6).counts(), &[1, 6, 9, 2]);
    }

    #[test]
    fn necklace_matches_direct_enumeration() {
        // Cyclic binary strings of length i with no two adjacent ones,
        // bucketed by popcount.
        for i in 1..=16u32 {
            let mut counts = vec![0u64; i as usize / 2 + 1];
            for mask in 0u32..(1 << i) {
                let rotated = (mask >> 1) | ((mask & 1) << (i - 1));
                if mask & rotated != 0 {
                    continue;
                }
                let t = mask.count_ones() as usize;
                if t < counts.len() {
                    counts[t] += 1;
                } else {
                    panic!("valid string with t > floor(i/2) at i={i}");
                }
            }
            assert_eq!(necklace(i).counts(), &counts[..], "i={i}");
        }
    }

    #[test]
    fn necklace_closed_form() {
        // N_{i,t} = (i/(i-t)) C(i-t, t) for t >= 1.
        for i in 1..=16u64 {
            let table = necklace(i as u32);
            assert_eq!(table.count(0), 1);
            for t in 1..=(i as usize / 2) {
                let t64 = t as u64;
                let expect = BigInt::from(i) * BigInt::from(big_binomial(i - t64, t64))
                    / BigInt::from(i - t64);
                assert_eq!(BigInt::from(table.count(t)), expect, "i={i} t={t}");
            }
        }
    }

    #[test]
    fn necklace_largest_supported() {
        // i = 64 must not overflow; total strings = trace at z = 1 is the
        // Lucas number L_64.
        let table = necklace(64);
        let total: u64 = table.counts().iter().sum();
        assert_eq!(total, 23725150497407);
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_i(3, 2, 1), 1.0);
        assert_eq!(lambda_i(3, 2, 2), 1.0);
        assert!((lambda_i(3, 2, 3) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(lambda_i(5, 1, 4), 0.0);
    }

    #[test]
    fn exact_cycle_expectation_small() {
        let p = ModelParams::new(3, 2, 9).unwrap();
        let e1 = exact_cycle_expectation(&p, 1).unwrap();
        assert_eq!(e1, BigRational::new(BigInt::from(18), BigInt::from(17)));
        // 2i > km is rejected.
        assert!(matches!(
            exact_cycle_expectation(&p, 10),
            Err(TheoryError::CycleTooLong { .. })
        ));
    }

    #[test]
    fn exact_cycle_expectation_approaches_lambda() {
        let p = ModelParams::new(3, 2, 9999).unwrap();
        for i in 1..=4 {
            let exact = exact_cycle_expectation(&p, i).unwrap().to_f64().unwrap();
            let ratio = exact / lambda_i(3, 2, i);
            assert!((ratio - 1.0).abs() < 0.01, "i={i}: {ratio}");
        }
    }

    #[test]
    fn delta_values_and_dual_route() {
        assert_eq!(
            delta_i_rational(3, 1).unwrap(),
            BigRational::from_f64(-0.5).unwrap()
        );
        assert_eq!(
            delta_i_rational(3, 2).unwrap(),
            BigRational::from_f64(0.25).unwrap()
        );
        assert_eq!(
            delta_i_rational(3, 3).unwrap(),
            BigRational::from_f64(-0.125).unwrap()
        );
        // The dual-route equality assert runs inside; exercise a grid.
        for k in 3..=12 {
            for i in 1..=20 {
                let d = delta_i(k, i).unwrap();
                assert!(d > -1.0, "delta > -1 hypothesis violated at k={k} i={i}");
            }
        }
        assert!(delta_i(2, 1).is_err());
    }

    #[test]
    fn mu_composition() {
        let mu = mu_i(3, 2, 1).unwrap();
        assert!((mu - 0.5).abs() < 1e-15);
        for i in 1..=6 {
            let lhs = mu_i(4, 3, i).unwrap();
            let rhs = lambda_i(4, 3, i) * (1.0 + delta_i(4, i).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}
