use num_traits::Zero;

use crate::error::Result;
use crate::exactnum::{det_exact, ExactScalar};
use crate::model::LinePoint;

/// `det(K(p_i; p_j))` in floating point (LU with partial pivoting).
/// The empty determinant is 1.
pub fn corr_det<F>(kernel: F, points: &[LinePoint]) -> Result<f64>
where
    F: Fn(LinePoint, LinePoint) -> Result<f64>,
{
    let k = points.len();
    let mut m = vec![vec![0.0f64; k]; k];
    for (i, &u) in points.iter().enumerate() {
        for (j, &v) in points.iter().enumerate() {
            m[i][j] = kernel(u, v)?;
        }
    }
    Ok(lu_det(m))
}

/// Exact counterpart of [`corr_det`] for rational kernels.
pub fn corr_det_exact<F>(kernel: F, points: &[LinePoint]) -> Result<ExactScalar>
where
    F: Fn(LinePoint, LinePoint) -> Result<ExactScalar>,
{
    if points.is_empty() {
        return Ok(num_traits::One::one());
    }
    let m = points
        .iter()
        .map(|&u| points.iter().map(|&v| kernel(u, v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    det_exact(&m)
}

fn lu_det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("nonempty range");
        if m[pivot][col].is_zero() {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for i in col + 1..n {
            let factor = m[i][col] / p;
            if factor != 0.0 {
                for j in col..n {
                    m[i][j] -= factor * m[col][j];
                }
            }
        }
    }
    det
}
