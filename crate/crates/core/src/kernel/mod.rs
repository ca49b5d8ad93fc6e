//! The extended Hahn kernel and the pieces it is assembled from.
//!
//! The initial and final single-step factors of the path measure are
//! replaced, by row operations, with `psi` and `psi*`. After that the
//! Gram matrix `A` becomes diagonal with entries `1/C_n`, and the kernel
//! collapses to a sum over associated Hahn polynomials. [`generic`] holds
//! the direct evaluation of the LGV kernel with delta endpoints, which is
//! the independent reference for everything here.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    binomial_int, det_exact, exact_sqrt, factorial_int, int, inv_factorial, pochhammer_int,
    to_f64, ExactMatrix, ExactScalar, ScaledFloat,
};
use crate::hahn;
use crate::model::{omega, omega_tilde, transition_count, HexagonSpec, LineGeometry};

mod det;
mod generic;
mod grid;

pub use det::{corr_det, corr_det_exact};
pub use generic::{generic_kernel, GenericKernel};
pub use grid::{grid_row_count, kernel_grid_rows, write_kernel_grid_csv, KernelGridRow};

/// Which square-root coefficient multiplies the `n`-th term of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coefficient {
    /// `sqrt((a+s-1-n)! (a+b+c-r-1-n)! / ((a+r-1-n)! (a+b+c-s-1-n)!))`,
    /// which equals 1 on the diagonal `r = s`.
    #[default]
    Derived,
    /// The variant with `(a+b+c-1-n)!` in the last slot. Kept only for the
    /// regression comparison; it does not reproduce the correlations.
    Unnormalized,
}

/// A kernel evaluation. `exact_part` is set when the value is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub exact_part: Option<ExactScalar>,
}

#[derive(Debug)]
struct LineTables {
    /// `q̃_n(x) omega_r(x)`, indexed `[n][x]`
    left: Vec<Vec<ExactScalar>>,
    /// `q̃_n(x) omega~_r(x)`, indexed `[n][x]`
    right: Vec<Vec<ExactScalar>>,
    norm_sq: Vec<ExactScalar>,
}

/// Precomputed normalizations for one hexagon. Immutable apart from the
/// lazily filled per-line polynomial tables, so it can be shared freely.
#[derive(Debug)]
pub struct KernelContext {
    spec: HexagonSpec,
    row_coeffs: ExactMatrix,
    f: ExactMatrix,
    f_star: ExactMatrix,
    c_consts: Vec<ExactScalar>,
    lines: Vec<LineGeometry>,
    tables: Vec<OnceLock<LineTables>>,
}

fn ex(v: BigInt) -> ExactScalar {
    ExactScalar::from_integer(v)
}

impl KernelContext {
    pub fn new(spec: HexagonSpec) -> Self {
        let a = spec.a();
        let (b, c) = (spec.b(), spec.c());
        let row_coeffs = (0..a)
            .map(|j| {
                (0..a)
                    .map(|k| {
                        if k > j {
                            ExactScalar::zero()
                        } else {
                            inv_factorial(j - k) * inv_factorial(a - 1 - j) / int(a - k)
                        }
                    })
                    .collect()
            })
            .collect();
        let f_table = |lower: i64| -> ExactMatrix {
            (0..a)
                .map(|n| {
                    (0..a)
                        .map(|k| {
                            if k > n {
                                return ExactScalar::zero();
                            }
                            let k32 = k as u32;
                            ExactScalar::new(
                                binomial_int(n, k) * pochhammer_int(n - 2 * a - b - c + 1, k32),
                                pochhammer_int(lower, k32) * pochhammer_int(-a, k32),
                            )
                        })
                        .collect()
                })
                .collect()
        };
        let c_consts = (0..a)
            .map(|n| {
                let num = factorial_int((a + b - 1) as u64)
                    * factorial_int((a + c - 1) as u64)
                    * (2 * a + b + c - 2 * n - 1)
                    * factorial_int(a as u64).pow(2);
                let den = factorial_int(n as u64) * factorial_int((2 * a + b + c - n - 1) as u64);
                ExactScalar::new(num, den)
            })
            .collect();
        let lines: Vec<LineGeometry> = (0..=spec.last_line()).map(|r| spec.line(r)).collect();
        let tables = (0..lines.len()).map(|_| OnceLock::new()).collect();
        KernelContext {
            spec,
            row_coeffs,
            f: f_table(-a - c + 1),
            f_star: f_table(-a - b + 1),
            c_consts,
            lines,
            tables,
        }
    }

    pub fn spec(&self) -> &HexagonSpec {
        &self.spec
    }

    pub fn line(&self, r: i64) -> &LineGeometry {
        &self.lines[r as usize]
    }

    fn check_degree(&self, n: i64) -> Result<()> {
        if n < 0 || n >= self.spec.a() {
            return Err(Error::OutOfRange {
                what: "polynomial index",
                value: n,
                lo: 0,
                hi: self.spec.a() - 1,
            });
        }
        Ok(())
    }

    fn check_interior(&self, r: i64) -> Result<()> {
        if r < 1 || r >= self.spec.last_line() {
            return Err(Error::OutOfRange {
                what: "interior line",
                value: r,
                lo: 1,
                hi: self.spec.last_line() - 1,
            });
        }
        Ok(())
    }

    /// Row-operation coefficient `c_{j,k} = 1/((a-k) (j-k)! (a-1-j)!)`.
    pub fn row_coeff(&self, j: i64, k: i64) -> &ExactScalar {
        &self.row_coeffs[j as usize][k as usize]
    }

    /// `f_{n,k} = C(n,k) (n-2a-b-c+1)_k / ((-a-c+1)_k (-a)_k)`.
    pub fn f(&self, n: i64, k: i64) -> &ExactScalar {
        &self.f[n as usize][k as usize]
    }

    /// `f*_{n,k}`, as `f` with `(-a-b+1)_k` in place of `(-a-c+1)_k`.
    pub fn f_star(&self, n: i64, k: i64) -> &ExactScalar {
        &self.f_star[n as usize][k as usize]
    }

    /// `C_n = (a+b-1)! (a+c-1)! (2a+b+c-2n-1) (a!)^2 / (n! (2a+b+c-n-1)!)`.
    pub fn c_n(&self, n: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        Ok(self.c_consts[n as usize].clone())
    }

    /// Sum of `C(n,j) (n-2a-b-c+1)_j / ((l1)_j (l2)_j) / ((u-j)! v!)` over
    /// `j = 0..=n`: the shape shared by every closed form below.
    fn closed_form_sum(&self, n: i64, l1: i64, l2: i64, u: i64, v: i64) -> ExactScalar {
        let (a, b, c) = (self.spec.a(), self.spec.b(), self.spec.c());
        let tail = inv_factorial(v);
        if tail.is_zero() {
            return tail;
        }
        let mut acc = ExactScalar::zero();
        for j in 0..=n {
            let head = inv_factorial(u - j);
            if head.is_zero() {
                continue;
            }
            let j32 = j as u32;
            acc += ExactScalar::new(
                binomial_int(n, j) * pochhammer_int(n - 2 * a - b - c + 1, j32),
                pochhammer_int(l1, j32) * pochhammer_int(l2, j32),
            ) * head;
        }
        acc * tail
    }

    /// `psi(n, z)`: the modified first-step function, zero for even `z`.
    pub fn psi(&self, n: i64, z: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        if z.rem_euclid(2) == 0 {
            return Ok(ExactScalar::zero());
        }
        let a = self.spec.a();
        let h = (z + 1) / 2;
        Ok(self.closed_form_sum(n, -a - self.spec.c() + 1, -a, h, a - h))
    }

    /// `psi*(n, w)`: the modified last-step function, nonzero only when
    /// `w - (c-b)` is odd.
    pub fn psi_star(&self, n: i64, w: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        let z = w - (self.spec.c() - self.spec.b());
        if z.rem_euclid(2) == 0 {
            return Ok(ExactScalar::zero());
        }
        let a = self.spec.a();
        let h = (z + 1) / 2;
        Ok(self.closed_form_sum(n, -a - self.spec.b() + 1, -a, h, a - h))
    }

    /// `psi(n, z)` straight from the row operations,
    /// `sum_m f_{n,m} sum_{j>=m} c_{j,m} phi(2j, z)`.
    pub fn psi_by_row_operations(&self, n: i64, z: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        Ok(self.row_operation_sum(&self.f, n, |j| 2 * j, z))
    }

    /// `psi*(n, w)` straight from the row operations on the final line.
    pub fn psi_star_by_row_operations(&self, n: i64, w: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        let shift = self.spec.c() - self.spec.b();
        Ok(self.row_operation_sum(&self.f_star, n, |j| shift + 2 * j, w))
    }

    fn row_operation_sum(
        &self,
        f: &ExactMatrix,
        n: i64,
        endpoint: impl Fn(i64) -> i64,
        z: i64,
    ) -> ExactScalar {
        let a = self.spec.a();
        let mut acc = ExactScalar::zero();
        for m in 0..=n {
            let mut inner = ExactScalar::zero();
            for j in m..a {
                let steps = transition_count(0, 1, endpoint(j), z);
                if !steps.is_zero() {
                    inner += self.row_coeff(j, m) * steps;
                }
            }
            acc += &f[n as usize][m as usize] * inner;
        }
        acc
    }

    /// `phi_{0,r}(n, y)`: `psi(n, .)` propagated to line `r`, closed form.
    pub fn phi_left(&self, n: i64, r: i64, y: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        self.check_interior(r)?;
        if (y + r).rem_euclid(2) != 0 {
            return Ok(ExactScalar::zero());
        }
        let a = self.spec.a();
        let sum = self.closed_form_sum(
            n,
            -a - self.spec.c() + 1,
            -a - r + 1,
            (y + r) / 2,
            a - 1 - (y - r) / 2,
        );
        Ok(ex(pochhammer_int(a + 1, (r - 1) as u32)) * sum)
    }

    /// `phi_{r,b+c}(y, n)`: `psi*(n, .)` propagated back to line `r`.
    pub fn phi_right(&self, r: i64, y: i64, n: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        self.check_interior(r)?;
        if (y + r).rem_euclid(2) != 0 {
            return Ok(ExactScalar::zero());
        }
        let (a, b, c) = (self.spec.a(), self.spec.b(), self.spec.c());
        let sum = self.closed_form_sum(
            n,
            -a - b + 1,
            -a - b - c + r + 1,
            (y - r) / 2 + b,
            a + c - 1 - (y + r) / 2,
        );
        Ok(ex(pochhammer_int(a + 1, (b + c - r - 1) as u32)) * sum)
    }

    fn tables(&self, r: i64) -> &LineTables {
        self.tables[r as usize].get_or_init(|| {
            let g = self.line(r);
            let p = g.hahn_params();
            let a = self.spec.a();
            let mut left = Vec::with_capacity(a as usize);
            let mut right = Vec::with_capacity(a as usize);
            let mut norm_sq = Vec::with_capacity(a as usize);
            let w_left: Vec<ExactScalar> = g.sites().map(|x| omega(&self.spec, r, x)).collect();
            let w_right: Vec<ExactScalar> =
                g.sites().map(|x| omega_tilde(&self.spec, r, x)).collect();
            for n in 0..a as u32 {
                let q: Vec<ExactScalar> = g
                    .sites()
                    .map(|x| hahn::eval_unnorm(p, n, x).expect("n < a <= gamma_r + 1"))
                    .collect();
                left.push(q.iter().zip(&w_left).map(|(q, w)| q * w).collect());
                right.push(q.iter().zip(&w_right).map(|(q, w)| q * w).collect());
                norm_sq.push(hahn::norm_sq(p, n).expect("n <= gamma_r"));
            }
            LineTables {
                left,
                right,
                norm_sq,
            }
        })
    }

    fn unnorm_hahn(&self, r: i64, n: i64, x: i64) -> ExactScalar {
        hahn::eval_unnorm(self.line(r).hahn_params(), n as u32, x).expect("n < a <= gamma_r + 1")
    }

    /// `phi_{0,r}(n, alpha_r + 2x)` written through the Hahn polynomial on
    /// line `r`. The prefactor depends on which of the three regimes
    /// `[1,b]`, `[b,c]`, `[c,b+c)` contains `r`.
    pub fn phi_left_hahn(&self, n: i64, r: i64, x: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        self.check_interior(r)?;
        let (a, b, c) = (self.spec.a(), self.spec.b(), self.spec.c());
        let g = self.line(r);
        let n32 = n as u32;
        let mut pre = ExactScalar::new(
            pochhammer_int(a + 1, (r - 1) as u32) * factorial_int(n as u64),
            pochhammer_int(-a - c + 1, n32) * pochhammer_int(-a - r + 1, n32),
        );
        if r > b {
            pre *= ExactScalar::new(
                pochhammer_int(a + b - n, n32) * pochhammer_int(a + b + c - r - n, n32),
                pochhammer_int(-a - b + 1, n32) * pochhammer_int(-a - b - c + 1 + r, n32),
            );
        }
        let w = if r <= b {
            inv_factorial(x) * inv_factorial(g.gamma_r - x)
        } else if r <= c {
            inv_factorial(g.b_r + x) * inv_factorial(g.gamma_r - x)
        } else {
            inv_factorial(g.b_r + x) * inv_factorial(g.gamma_r + g.a_r - x)
        };
        Ok(pre * self.unnorm_hahn(r, n, x) * w)
    }

    /// `phi_{r,b+c}(alpha_r + 2x, n)` written through the Hahn polynomial.
    pub fn phi_right_hahn(&self, r: i64, x: i64, n: i64) -> Result<ExactScalar> {
        self.check_degree(n)?;
        self.check_interior(r)?;
        let (a, b, c) = (self.spec.a(), self.spec.b(), self.spec.c());
        let g = self.line(r);
        let n32 = n as u32;
        let mut pre = ExactScalar::new(
            pochhammer_int(a + 1, (b + c - r - 1) as u32) * factorial_int(n as u64),
            pochhammer_int(-a - b + 1, n32) * pochhammer_int(-a - b - c + 1 + r, n32),
        );
        if r <= b {
            pre *= ExactScalar::new(
                pochhammer_int(a + c - n, n32) * pochhammer_int(a + r - n, n32),
                pochhammer_int(-a - c + 1, n32) * pochhammer_int(-a - r + 1, n32),
            );
        }
        let w = if r <= b {
            inv_factorial(g.b_r + x) * inv_factorial(g.gamma_r + g.a_r - x)
        } else if r <= c {
            inv_factorial(x) * inv_factorial(g.gamma_r + g.a_r - x)
        } else {
            inv_factorial(x) * inv_factorial(g.gamma_r - x)
        };
        Ok(pre * self.unnorm_hahn(r, n, x) * w)
    }

    /// `A_{nm} = sum_z phi_{0,r}(n, z) phi_{r,b+c}(z, m)` on line `r`.
    pub fn gram_matrix(&self, r: i64) -> Result<ExactMatrix> {
        self.check_interior(r)?;
        let a = self.spec.a();
        let g = *self.line(r);
        let left: Vec<Vec<ExactScalar>> = (0..a)
            .map(|n| {
                g.sites()
                    .map(|x| self.phi_left(n, r, g.walk(x)))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let right: Vec<Vec<ExactScalar>> = (0..a)
            .map(|m| {
                g.sites()
                    .map(|x| self.phi_right(r, g.walk(x), m))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        Ok(left
            .iter()
            .map(|l| {
                right
                    .iter()
                    .map(|rt| l.iter().zip(rt).map(|(u, v)| u * v).sum())
                    .collect()
            })
            .collect())
    }

    /// Partition function from the kernel machinery:
    /// `prod_n 1/(c_{n,n}^2 f_{n,n} f*_{n,n}) * det A`.
    pub fn partition_via_gram(&self, r: i64) -> Result<ExactScalar> {
        let mut pre = ExactScalar::one();
        for n in 0..self.spec.a() {
            let cnn = self.row_coeff(n, n);
            pre /= cnn * cnn * self.f(n, n) * self.f_star(n, n);
        }
        Ok(pre * det_exact(&self.gram_matrix(r)?)?)
    }

    /// Square of the `n`-th kernel coefficient for lines `r`, `s`.
    pub fn coefficient_sq(&self, form: Coefficient, r: i64, s: i64, n: i64) -> ExactScalar {
        let (a, b, c) = (self.spec.a(), self.spec.b(), self.spec.c());
        let f = |k: i64| factorial_int(k as u64);
        let last = match form {
            Coefficient::Derived => a + b + c - s - 1 - n,
            Coefficient::Unnormalized => a + b + c - 1 - n,
        };
        ExactScalar::new(
            f(a + s - 1 - n) * f(a + b + c - r - 1 - n),
            f(a + r - 1 - n) * f(last),
        )
    }

    fn check_point(&self, r: i64, x: i64) -> Result<()> {
        self.check_interior(r)?;
        let g = self.line(r);
        if x < 0 || x > g.gamma_r {
            return Err(Error::OutOfRange {
                what: "Hahn coordinate",
                value: x,
                lo: 0,
                hi: g.gamma_r,
            });
        }
        Ok(())
    }

    /// The extended Hahn kernel `K(r, alpha_r+2x; s, alpha_s+2y)`.
    pub fn hahn_kernel(&self, r: i64, x: i64, s: i64, y: i64) -> Result<KernelValue> {
        self.hahn_kernel_with(Coefficient::Derived, r, x, s, y)
    }

    pub fn hahn_kernel_with(
        &self,
        form: Coefficient,
        r: i64,
        x: i64,
        s: i64,
        y: i64,
    ) -> Result<KernelValue> {
        self.check_point(r, x)?;
        self.check_point(s, y)?;
        let phi = transition_count(r, s, self.line(r).walk(x), self.line(s).walk(y));
        let (tr, ts) = (self.tables(r), self.tables(s));
        let terms: Vec<(ExactScalar, ExactScalar)> = (0..self.spec.a() as usize)
            .map(|n| {
                let p = &tr.left[n][x as usize] * &ts.right[n][y as usize];
                let coeff_sq = self.coefficient_sq(form, r, s, n as i64)
                    / (&tr.norm_sq[n] * &ts.norm_sq[n]);
                (p, coeff_sq)
            })
            .collect();

        let roots: Option<Vec<ExactScalar>> =
            terms.iter().map(|(_, k2)| exact_sqrt(k2)).collect();
        if let Some(roots) = roots {
            let exact = terms
                .iter()
                .zip(&roots)
                .fold(-phi, |acc, ((p, _), k)| acc + p * k);
            return Ok(KernelValue {
                value: to_f64(&exact),
                exact_part: Some(exact),
            });
        }
        let sum: f64 = terms
            .iter()
            .map(|(p, k2)| {
                ScaledFloat::from_exact(p)
                    .mul(ScaledFloat::from_exact(k2).sqrt())
                    .to_f64()
            })
            .sum();
        Ok(KernelValue {
            value: sum - to_f64(&phi),
            exact_part: None,
        })
    }

    /// Kernel evaluated at two [`LinePoint`](crate::model::LinePoint)s; the
    /// float value only.
    pub fn eval(&self, u: crate::model::LinePoint, v: crate::model::LinePoint) -> Result<f64> {
        Ok(self.hahn_kernel(u.r, u.x_hahn, v.r, v.x_hahn)?.value)
    }

    /// Diagonal `K(u; u)` as an exact rational. On a single line every
    /// coefficient is 1, so the one-point density is always rational.
    pub fn density(&self, r: i64, x: i64) -> Result<ExactScalar> {
        let v = self.hahn_kernel(r, x, r, x)?;
        Ok(v.exact_part.expect("diagonal coefficients are rational"))
    }
}

#[cfg(test)]
mod tests;
