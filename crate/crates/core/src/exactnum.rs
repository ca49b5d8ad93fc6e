//! Exact rational arithmetic and the combinatorial scalars built on it.
//!
//! Every discrete-model quantity in this crate (weights, Pochhammer ratios,
//! transition counts, determinants) is an [`ExactScalar`]. Floating point
//! only enters through [`to_f64`] and [`ScaledFloat`], which convert values
//! whose numerators and denominators are far outside the `f64` range.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type ExactScalar = BigRational;

/// Square matrix of exact rationals, row major.
pub type ExactMatrix = Vec<Vec<ExactScalar>>;

pub const DEFAULT_FACTORIAL_CACHE_CAP: usize = 10_000;

static FACTORIAL_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_FACTORIAL_CACHE_CAP);
static FACTORIALS: LazyLock<RwLock<Vec<BigInt>>> =
    LazyLock::new(|| RwLock::new(vec![BigInt::one()]));

/// Sets the largest `n` whose factorial is memoized. Larger factorials are
/// still computed, just not stored.
pub fn set_factorial_cache_cap(cap: usize) {
    FACTORIAL_CAP.store(cap, Ordering::Relaxed);
}

pub fn factorial_cache_cap() -> usize {
    FACTORIAL_CAP.load(Ordering::Relaxed)
}

#[inline]
pub fn int(v: i64) -> ExactScalar {
    ExactScalar::from_integer(BigInt::from(v))
}

#[inline]
pub fn ratio(n: i64, d: i64) -> ExactScalar {
    ExactScalar::new(BigInt::from(n), BigInt::from(d))
}

/// `n!` as a big integer.
pub fn factorial_int(n: u64) -> BigInt {
    let n = n as usize;
    {
        let table = FACTORIALS.read().expect("factorial table poisoned");
        if n < table.len() {
            return table[n].clone();
        }
    }
    let cap = factorial_cache_cap();
    if n > cap {
        let mut acc = factorial_int(cap.min(n) as u64);
        for k in (cap + 1)..=n {
            acc *= k;
        }
        return acc;
    }
    let mut table = FACTORIALS.write().expect("factorial table poisoned");
    while table.len() <= n {
        let k = table.len();
        let next = &table[k - 1] * k;
        table.push(next);
    }
    table[n].clone()
}

/// `n!`; negative input is rejected.
pub fn factorial(n: i64) -> Result<ExactScalar> {
    if n < 0 {
        return Err(Error::NegativeFactorial(n));
    }
    Ok(ExactScalar::from_integer(factorial_int(n as u64)))
}

/// `1/n!`, with the convention `1/n! = 0` for `n < 0`.
pub fn inv_factorial(n: i64) -> ExactScalar {
    if n < 0 {
        ExactScalar::zero()
    } else {
        ExactScalar::new(BigInt::one(), factorial_int(n as u64))
    }
}

/// Rising factorial `x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: &ExactScalar, n: u32) -> ExactScalar {
    let mut acc = ExactScalar::one();
    let mut term = x.clone();
    for _ in 0..n {
        acc *= &term;
        if acc.is_zero() {
            return acc;
        }
        term += BigInt::one();
    }
    acc
}

/// Rising factorial of an integer argument, computed in integers.
pub fn pochhammer_int(x: i64, n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..n as i64 {
        let f = x + i;
        if f == 0 {
            return BigInt::zero();
        }
        acc *= f;
    }
    acc
}

pub fn binomial_int(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` for `0 <= k <= n`, and 0 otherwise.
pub fn binomial(n: i64, k: i64) -> ExactScalar {
    ExactScalar::from_integer(binomial_int(n, k))
}

fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let n = m.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    for (row, r) in m.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare {
                rows: n,
                row,
                cols: r.len(),
            });
        }
    }
    Ok(n)
}

/// Determinant of an integer matrix by Bareiss fraction-free elimination.
/// Every intermediate quotient is exact.
pub fn det_int(m: &[Vec<BigInt>]) -> Result<BigInt> {
    let n = check_square(m)?;
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign < 0 { -d } else { d })
}

/// Exact determinant of a rational matrix.
///
/// Each row is scaled by the lcm of its denominators, the resulting integer
/// matrix goes through [`det_int`], and the scale factors are divided out.
pub fn det_exact(m: &[Vec<ExactScalar>]) -> Result<ExactScalar> {
    check_square(m)?;
    let mut scale = BigInt::one();
    let rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            scale *= &l;
            row.iter()
                .map(|v| v.numer() * (&l / v.denom()))
                .collect()
        })
        .collect();
    Ok(ExactScalar::new(det_int(&rows)?, scale))
}

/// Exact inverse by Gauss-Jordan elimination.
pub fn inverse_exact(m: &[Vec<ExactScalar>]) -> Result<ExactMatrix> {
    let n = check_square(m)?;
    let mut a: Vec<Vec<ExactScalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { ExactScalar::one() } else { ExactScalar::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .find(|&i| !a[i][col].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(col, p);
        let pivot = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &pivot;
        }
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Float image of an exact rational. Correct to within an ulp or two even
/// when numerator and denominator individually overflow `f64`.
pub fn to_f64(x: &ExactScalar) -> f64 {
    ScaledFloat::from_exact(x).to_f64()
}

/// A float with an unbounded binary exponent: `mantissa * 2^exponent` with
/// `0.5 <= |mantissa| < 1` (or zero).
///
/// Used to multiply and take square roots of exact quantities such as
/// `1/(400!)^2` whose float images would underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledFloat {
    mantissa: f64,
    exponent: i64,
}

impl ScaledFloat {
    pub const ZERO: ScaledFloat = ScaledFloat {
        mantissa: 0.0,
        exponent: 0,
    };

    pub fn new(mantissa: f64, exponent: i64) -> Self {
        if mantissa == 0.0 || !mantissa.is_finite() {
            return ScaledFloat {
                mantissa,
                exponent: 0,
            };
        }
        let (m, e) = frexp(mantissa);
        ScaledFloat {
            mantissa: m,
            exponent: exponent + e,
        }
    }

    pub fn from_exact(x: &ExactScalar) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        let num = x.numer().abs();
        let den = x.denom();
        // Shift so the integer quotient carries ~64 significant bits.
        let shift = 64 + den.bits() as i64 - num.bits() as i64;
        let q = if shift >= 0 {
            (num << shift as usize) / den
        } else {
            num / (den << (-shift) as usize)
        };
        let m = q.to_f64().expect("quotient fits in f64");
        let signed = if x.is_negative() { -m } else { m };
        Self::new(signed, -shift)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn mul(self, other: ScaledFloat) -> ScaledFloat {
        ScaledFloat::new(self.mantissa * other.mantissa, self.exponent + other.exponent)
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self) -> ScaledFloat {
        assert!(self.mantissa >= 0.0, "sqrt of negative ScaledFloat");
        if self.exponent % 2 == 0 {
            ScaledFloat::new(self.mantissa.sqrt(), self.exponent / 2)
        } else {
            ScaledFloat::new((2.0 * self.mantissa).sqrt(), (self.exponent - 1) / 2)
        }
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mantissa, self.exponent)
    }
}

fn frexp(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    if exp == 0 {
        // subnormal
        let (m, e) = frexp(x * f64::from_bits(0x43f0_0000_0000_0000)); // 2^64
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, exp - 1022)
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    if m == 0.0 {
        return m;
    }
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// `true` if `x` is the square of a rational; returns the root.
pub fn exact_sqrt(x: &ExactScalar) -> Option<ExactScalar> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(ExactScalar::new(n, d))
    } else {
        None
    }
}
