use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactnum::{inverse_exact, ExactMatrix, ExactScalar};
use crate::model::{transition_count, HexagonSpec, LinePoint};

/// The LGV correlation kernel for `a` walks started at `0, 2, .., 2a-2` on
/// line 0 and ending at `c-b, c-b+2, ..` on line `b+c`, with the inverse
/// transfer matrix cached.
#[derive(Debug, Clone)]
pub struct GenericKernel {
    spec: HexagonSpec,
    a_inv: ExactMatrix,
}

impl GenericKernel {
    pub fn new(spec: HexagonSpec) -> Result<Self> {
        let m = spec.last_line();
        let shift = spec.c() - spec.b();
        let a = spec.a();
        let mat: ExactMatrix = (0..a)
            .map(|i| {
                (0..a)
                    .map(|j| transition_count(0, m, 2 * i, shift + 2 * j))
                    .collect()
            })
            .collect();
        let a_inv = inverse_exact(&mat)?;
        Ok(GenericKernel { spec, a_inv })
    }

    pub fn spec(&self) -> &HexagonSpec {
        &self.spec
    }

    /// Kernel at walk coordinates.
    pub fn eval_walk(&self, r: i64, x: i64, s: i64, y: i64) -> Result<ExactScalar> {
        let last = self.spec.last_line();
        for line in [r, s] {
            if line < 1 || line >= last {
                return Err(Error::OutOfRange {
                    what: "interior line",
                    value: line,
                    lo: 1,
                    hi: last - 1,
                });
            }
        }
        let shift = self.spec.c() - self.spec.b();
        let a = self.spec.a();
        let to_end: Vec<ExactScalar> = (0..a)
            .map(|i| transition_count(r, last, x, shift + 2 * i))
            .collect();
        let from_start: Vec<ExactScalar> =
            (0..a).map(|j| transition_count(0, s, 2 * j, y)).collect();
        let mut acc = -transition_count(r, s, x, y);
        for (i, e) in to_end.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            for (j, st) in from_start.iter().enumerate() {
                if !st.is_zero() {
                    acc += e * &self.a_inv[i][j] * st;
                }
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, u: LinePoint, v: LinePoint) -> Result<ExactScalar> {
        self.eval_walk(u.r, u.walk(&self.spec), v.r, v.walk(&self.spec))
    }
}

/// One-shot evaluation; builds and discards the inverse transfer matrix.
pub fn generic_kernel(
    spec: &HexagonSpec,
    r: i64,
    x_walk: i64,
    s: i64,
    y_walk: i64,
) -> Result<ExactScalar> {
    GenericKernel::new(*spec)?.eval_walk(r, x_walk, s, y_walk)
}
