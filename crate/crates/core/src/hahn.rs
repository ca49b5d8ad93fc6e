//! Associated Hahn polynomials on `{0, ..., N}`.
//!
//! The primitive is the unnormalized polynomial `q̃_n = d_n q_n`, evaluated
//! exactly from its terminating hypergeometric sum. The normalized value
//! [`eval`] divides by `sqrt(d_n^2)` only at the float boundary.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    binomial_int, factorial_int, inv_factorial, pochhammer_int, ExactScalar, ScaledFloat,
};

/// Parameters `(alpha, beta, N)` of the associated Hahn family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HahnParams {
    pub alpha: u32,
    pub beta: u32,
    pub big_n: u32,
}

impl HahnParams {
    pub fn new(alpha: u32, beta: u32, big_n: u32) -> Self {
        HahnParams { alpha, beta, big_n }
    }

    pub fn check_degree(&self, n: u32) -> Result<()> {
        if n > self.big_n {
            return Err(Error::OutOfRange {
                what: "Hahn degree",
                value: n as i64,
                lo: 0,
                hi: self.big_n as i64,
            });
        }
        Ok(())
    }
}

/// Orthogonality weight `1/(x! (x+alpha)! (N+beta-x)! (N-x)!)`; zero off the
/// lattice.
pub fn weight(p: HahnParams, x: i64) -> ExactScalar {
    let (a, b, n) = (p.alpha as i64, p.beta as i64, p.big_n as i64);
    inv_factorial(x) * inv_factorial(x + a) * inv_factorial(n + b - x) * inv_factorial(n - x)
}

/// Squared normalization `d_n^2`, the squared weighted norm of `q̃_n`.
pub fn norm_sq(p: HahnParams, n: u32) -> Result<ExactScalar> {
    p.check_degree(n)?;
    let (a, b, big_n) = (p.alpha as i64, p.beta as i64, p.big_n as i64);
    let n = n as i64;
    let num = pochhammer_int(a + b + big_n + 1 - n, (big_n + 1) as u32);
    let den = BigInt::from(a + b + 2 * big_n + 1 - 2 * n)
        * factorial_int(n as u64)
        * factorial_int((b + big_n - n) as u64)
        * factorial_int((a + big_n - n) as u64)
        * factorial_int((big_n - n) as u64);
    Ok(ExactScalar::new(num, den))
}

/// `n! q̃_n(x)` as an integer.
///
/// Pulling the prefactor inside the sum turns every ratio of Pochhammer
/// symbols into a shorter Pochhammer symbol, so the whole sum is integral.
fn scaled_unnorm_int(p: HahnParams, n: u32, x: i64) -> BigInt {
    let (a, b, big_n) = (p.alpha as i64, p.beta as i64, p.big_n as i64);
    let ni = n as i64;
    let mut acc = BigInt::zero();
    for j in 0..=n {
        let ji = j as i64;
        let rising_x = pochhammer_int(-x, j);
        if rising_x.is_zero() {
            // (-x)_j = 0 for every larger j as well
            break;
        }
        let mut term = binomial_int(ni, ji)
            * rising_x
            * pochhammer_int(ni - 2 * big_n - a - b - 1, j)
            * pochhammer_int(-big_n - b + ji, n - j)
            * pochhammer_int(-big_n + ji, n - j);
        if j % 2 == 1 {
            term = -term;
        }
        acc += term;
    }
    acc
}

/// The unnormalized polynomial `q̃_n(x) = d_n q_n(x)`, exactly.
pub fn eval_unnorm(p: HahnParams, n: u32, x: i64) -> Result<ExactScalar> {
    p.check_degree(n)?;
    Ok(ExactScalar::new(
        scaled_unnorm_int(p, n, x),
        factorial_int(n as u64),
    ))
}

/// The orthonormal polynomial `q_n(x)` in floating point.
pub fn eval(p: HahnParams, n: u32, x: i64) -> Result<f64> {
    let unnorm = eval_unnorm(p, n, x)?;
    let inv_norm = ScaledFloat::from_exact(&norm_sq(p, n)?.recip()).sqrt();
    Ok(ScaledFloat::from_exact(&unnorm).mul(inv_norm).to_f64())
}

/// Terminating `3F2(-n, a2, a3; b1, b2; 1)`.
pub fn hyp3f2_terminating(
    n: u32,
    a2: &ExactScalar,
    a3: &ExactScalar,
    b1: &ExactScalar,
    b2: &ExactScalar,
) -> Result<ExactScalar> {
    let mut sum = ExactScalar::one();
    let mut term = ExactScalar::one();
    let neg_n = ExactScalar::from_integer(BigInt::from(-(n as i64)));
    for j in 0..n {
        let jj = ExactScalar::from_integer(BigInt::from(j));
        let lower = (b1 + &jj) * (b2 + &jj);
        if lower.is_zero() {
            return Err(Error::DegenerateLowerParameter(j + 1));
        }
        term = term * (&neg_n + &jj) * (a2 + &jj) * (a3 + &jj) / (lower * (&jj + BigInt::one()));
        sum += &term;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, pochhammer, ratio};
    use proptest::prelude::*;

    #[test]
    fn weight_examples() {
        let p = HahnParams::new(0, 0, 1);
        assert_eq!(weight(p, 0), int(1));
        assert_eq!(weight(p, 1), int(1));
        assert_eq!(weight(p, 2), int(0));
        assert_eq!(weight(p, -1), int(0));
    }

    #[test]
    fn norm_sq_examples() {
        assert_eq!(norm_sq(HahnParams::new(0, 0, 1), 0).unwrap(), int(2));
        assert_eq!(norm_sq(HahnParams::new(0, 0, 0), 0).unwrap(), int(1));
        assert!(norm_sq(HahnParams::new(0, 0, 1), 2).is_err());
        for (a, b, big_n) in [(0, 0, 5), (3, 1, 4), (2, 4, 7)] {
            let p = HahnParams::new(a, b, big_n);
            for n in 0..=big_n {
                assert!(norm_sq(p, n).unwrap() > int(0));
            }
        }
    }

    #[test]
    fn norm_sq_is_orthogonality_sum() {
        // Oracle: the weighted sum of q̃_n^2 over the lattice.
        let p = HahnParams::new(0, 0, 1);
        let s: ExactScalar = (0..=1)
            .map(|x| {
                let q = eval_unnorm(p, 0, x).unwrap();
                &q * &q * weight(p, x)
            })
            .sum();
        assert_eq!(s, int(2));
    }

    #[test]
    fn degree_zero_is_one() {
        for x in -3..6 {
            assert_eq!(eval_unnorm(HahnParams::new(2, 3, 4), 0, x).unwrap(), int(1));
        }
    }

    #[test]
    fn degree_one_on_two_points() {
        let p = HahnParams::new(0, 0, 1);
        let v0 = eval_unnorm(p, 1, 0).unwrap();
        let v1 = eval_unnorm(p, 1, 1).unwrap();
        assert_eq!(&v0 * &v0 + &v1 * &v1, norm_sq(p, 1).unwrap());
        assert_eq!(&v0 + &v1, int(0));
        assert!(eval_unnorm(p, 2, 0).is_err());
    }

    #[test]
    fn finite_difference_degree() {
        for (a, b, big_n) in [(0, 0, 6), (2, 1, 7), (4, 3, 8)] {
            let p = HahnParams::new(a, b, big_n);
            for n in 0..=big_n {
                // (n+1)-th forward difference over n+2 consecutive points
                let mut vals: Vec<ExactScalar> = (0..=(n as i64 + 1))
                    .map(|x| eval_unnorm(p, n, x).unwrap())
                    .collect();
                for _ in 0..=n {
                    vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
                }
                assert_eq!(vals, vec![int(0)]);
                // the n-th difference is a nonzero constant
                let mut vals: Vec<ExactScalar> =
                    (0..=n as i64).map(|x| eval_unnorm(p, n, x).unwrap()).collect();
                for _ in 0..n {
                    vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
                }
                assert_ne!(vals[0], int(0));
            }
        }
    }

    #[test]
    fn unnorm_matches_hypergeometric_form() {
        let p = HahnParams::new(2, 3, 5);
        let (a, b, big_n) = (2i64, 3i64, 5i64);
        for n in 0..=5u32 {
            for x in 0..=5 {
                let pre = pochhammer(&int(-big_n - b), n) * pochhammer(&int(-big_n), n)
                    / ExactScalar::from_integer(factorial_int(n as u64));
                let f = hyp3f2_terminating(
                    n,
                    &int(n as i64 - 2 * big_n - a - b - 1),
                    &int(-x),
                    &int(-big_n - b),
                    &int(-big_n),
                )
                .unwrap();
                assert_eq!(eval_unnorm(p, n, x).unwrap(), pre * f);
            }
        }
    }

    #[test]
    fn eval_examples() {
        let v = eval(HahnParams::new(0, 0, 1), 0, 0).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(eval(HahnParams::new(0, 0, 0), 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn float_orthonormality() {
        for (a, b) in [(0u32, 0u32), (1, 3), (4, 2)] {
            for big_n in [1u32, 7, 20] {
                let p = HahnParams::new(a, b, big_n);
                let w: Vec<f64> = (0..=big_n as i64)
                    .map(|x| crate::exactnum::to_f64(&weight(p, x)))
                    .collect();
                let table: Vec<Vec<f64>> = (0..=big_n)
                    .map(|n| (0..=big_n as i64).map(|x| eval(p, n, x).unwrap()).collect())
                    .collect();
                for n in 0..=big_n as usize {
                    for m in 0..=big_n as usize {
                        let s: f64 = (0..=big_n as usize)
                            .map(|x| table[n][x] * table[m][x] * w[x])
                            .sum();
                        let expected = if n == m { 1.0 } else { 0.0 };
                        assert!((s - expected).abs() < 1e-12, "a={a} b={b} N={big_n} n={n} m={m}: {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_orthogonality_small() {
        for big_n in 0..=8u32 {
            for (a, b) in [(0, 0), (1, 2), (3, 0)] {
                let p = HahnParams::new(a, b, big_n);
                for n in 0..=big_n {
                    for m in 0..=big_n {
                        let s: ExactScalar = (0..=big_n as i64)
                            .map(|x| {
                                eval_unnorm(p, n, x).unwrap()
                                    * eval_unnorm(p, m, x).unwrap()
                                    * weight(p, x)
                            })
                            .sum();
                        let expected = if n == m { norm_sq(p, n).unwrap() } else { int(0) };
                        assert_eq!(s, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn hyp3f2_trivial_cases() {
        let one = hyp3f2_terminating(0, &int(3), &int(4), &int(5), &int(6)).unwrap();
        assert_eq!(one, int(1));
        for n in 1..6 {
            let v = hyp3f2_terminating(n, &ratio(3, 2), &int(7), &ratio(3, 2), &int(7)).unwrap();
            assert_eq!(v, int(0));
        }
    }

    #[test]
    fn hyp3f2_degenerate_lower() {
        let err = hyp3f2_terminating(3, &int(1), &int(1), &int(-1), &int(2));
        assert!(matches!(err, Err(Error::DegenerateLowerParameter(2))));
        // a vanishing lower symbol after termination is harmless
        assert!(hyp3f2_terminating(1, &int(1), &int(1), &int(-1), &int(2)).is_ok());
    }

    fn sheppard_rhs(
        n: u32,
        a: &ExactScalar,
        b: &ExactScalar,
        d: &ExactScalar,
        e: &ExactScalar,
    ) -> Result<ExactScalar> {
        let nn = int(n as i64);
        let one = int(1);
        let den = pochhammer(d, n) * pochhammer(e, n);
        if den == int(0) {
            return Err(Error::DegenerateLowerParameter(n));
        }
        let pre = pochhammer(&(d - a), n) * pochhammer(&(e - a), n) / den;
        let third = a + b - &nn - d - e + &one;
        let lower1 = a - &nn - d + &one;
        let lower2 = a - &nn - e + &one;
        Ok(pre * hyp3f2_terminating(n, a, &third, &lower1, &lower2)?)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn three_f_two_transformation(
            n in 0u32..=6,
            a in (-12i64..12, 1i64..4),
            b in (-12i64..12, 1i64..4),
            d in (-12i64..12, 1i64..4),
            e in (-12i64..12, 1i64..4),
        ) {
            let (a, b, d, e) = (ratio(a.0, a.1), ratio(b.0, b.1), ratio(d.0, d.1), ratio(e.0, e.1));
            let lhs = hyp3f2_terminating(n, &a, &b, &d, &e);
            let rhs = sheppard_rhs(n, &a, &b, &d, &e);
            prop_assume!(lhs.is_ok() && rhs.is_ok());
            prop_assert_eq!(lhs.unwrap(), rhs.unwrap());
        }
    }
}
