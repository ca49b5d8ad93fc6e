use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::report::sig17;

use super::KernelContext;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelGridRow {
    pub r: i64,
    pub x_hahn: i64,
    pub s: i64,
    pub y_hahn: i64,
    pub value: f64,
}

/// Rows the grid export will contain for the given line pairs.
pub fn grid_row_count(ctx: &KernelContext, pairs: &[(i64, i64)]) -> usize {
    pairs
        .iter()
        .map(|&(r, s)| ((ctx.line(r).gamma_r + 1) * (ctx.line(s).gamma_r + 1)) as usize)
        .sum()
}

/// Kernel values at every `(x, y)` for each `(r, s)` in `pairs`.
pub fn kernel_grid_rows(ctx: &KernelContext, pairs: &[(i64, i64)]) -> Result<Vec<KernelGridRow>> {
    let mut rows = Vec::with_capacity(grid_row_count(ctx, pairs));
    for &(r, s) in pairs {
        for x in ctx.line(r).sites() {
            for y in ctx.line(s).sites() {
                let value = ctx.hahn_kernel(r, x, s, y)?.value;
                rows.push(KernelGridRow {
                    r,
                    x_hahn: x,
                    s,
                    y_hahn: y,
                    value,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes [`kernel_grid_rows`] as CSV with header `r,x_hahn,s,y_hahn,value`.
/// Returns the number of data rows.
pub fn write_kernel_grid_csv<W: Write>(
    ctx: &KernelContext,
    pairs: &[(i64, i64)],
    mut out: W,
) -> Result<usize> {
    let rows = kernel_grid_rows(ctx, pairs)?;
    writeln!(out, "r,x_hahn,s,y_hahn,value")?;
    for g in &rows {
        writeln!(out, "{},{},{},{},{}", g.r, g.x_hahn, g.s, g.y_hahn, sig17(g.value))?;
    }
    Ok(rows.len())
}
