//! Scaling-limit diagnostics: symmetric Hahn polynomials against Hermite
//! polynomials, and the Hahn kernel of a tall hexagon against the Brownian
//! kernel.
//!
//! Each diagnostic runs over a doubling scale sequence and produces a
//! [`LimitReport`]. Continuum arguments are snapped to the nearest lattice
//! point of the right parity, and the target is evaluated at the snapped
//! point, so the reported error measures the formula and not the rounding.

use rayon::prelude::*;
use serde::Serialize;

use crate::continuum::{hermite_h, kbm_at};
use crate::error::{Error, Result};
use crate::exactnum::{factorial_int, to_f64};
use crate::hahn::{self, HahnParams};
use crate::kernel::KernelContext;
use crate::model::HexagonSpec;

/// Slack allowed when checking that errors do not increase; absorbs
/// rounding noise in sequences that are already at machine precision.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Terminal relative error below which a diagnostic counts as converged.
pub const TERMINAL_TOLERANCE: f64 = 0.05;

/// A fitted rescale further than this from 1 is flagged.
pub const RESCALE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub scales: Vec<i64>,
    pub errors: Vec<f64>,
    pub monotone: bool,
    pub fitted_rescale: Option<f64>,
}

impl LimitReport {
    pub fn new(scales: Vec<i64>, errors: Vec<f64>, fitted_rescale: Option<f64>) -> Self {
        let monotone = errors.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        LimitReport {
            scales,
            errors,
            monotone,
            fitted_rescale,
        }
    }
}

/// A [`LimitReport`] with the extra numbers needed to judge it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDiagnostic {
    pub label: String,
    pub report: LimitReport,
    pub terminal_relative_error: f64,
    /// Largest distance between a requested continuum argument and the
    /// lattice point actually used, in continuum units.
    pub max_displacement: f64,
    pub rescale_flagged: bool,
}

impl LimitDiagnostic {
    fn build(
        label: String,
        scales: Vec<i64>,
        errors: Vec<f64>,
        terminal: &[(f64, f64)],
        max_displacement: f64,
    ) -> Self {
        let fitted = fit_rescale(terminal);
        let scale = terminal.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let worst = terminal.iter().map(|p| (p.0 - p.1).abs()).fold(0.0, f64::max);
        let terminal_relative_error = if scale > 0.0 { worst / scale } else { worst };
        LimitDiagnostic {
            label,
            report: LimitReport::new(scales, errors, fitted),
            terminal_relative_error,
            max_displacement,
            rescale_flagged: fitted.is_some_and(|l| (l - 1.0).abs() > RESCALE_TOLERANCE),
        }
    }

    pub fn converged(&self) -> bool {
        self.terminal_relative_error < TERMINAL_TOLERANCE
    }

    /// Monotone, and either converged or carrying a flagged rescale that
    /// localizes the discrepancy.
    pub fn passes(&self) -> bool {
        self.report.monotone && (self.converged() || self.rescale_flagged)
    }
}

/// Least-squares `lambda` minimizing `sum (lambda approx - target)^2`.
pub fn fit_rescale(pairs: &[(f64, f64)]) -> Option<f64> {
    let den: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    if den == 0.0 {
        return None;
    }
    Some(pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / den)
}

/// Constant in front of `z` in the lattice argument
/// `N/2 + c z sqrt((2t+1) N / (t+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArgumentScale {
    /// `c = 1/2`; the scaled polynomial tends to `H_n(z)`.
    #[default]
    Half,
    /// `c = 2`; the scaled polynomial then tends to `H_n(4z)`.
    Two,
}

impl ArgumentScale {
    pub fn factor(self) -> f64 {
        match self {
            ArgumentScale::Half => 0.5,
            ArgumentScale::Two => 2.0,
        }
    }
}

/// One evaluation of [`scaled_hahn`] with its lattice bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledHahnPoint {
    pub value: f64,
    pub lattice_x: i64,
    /// The continuum argument the lattice point corresponds to.
    pub z_effective: f64,
    pub displacement: f64,
}

/// `n! (-2 / (N^{3/2} sqrt((2t+1)(t+1))))^n q̃_n(x)` for the symmetric
/// family `alpha = beta = round(tN)`, at the lattice point nearest to the
/// scaled argument of `z`. Tends to `H_n(z)`.
pub fn scaled_hahn(n: u32, big_n: u32, t_ratio: f64, z: f64) -> Result<f64> {
    Ok(scaled_hahn_with(ArgumentScale::default(), n, big_n, t_ratio, z)?.value)
}

pub fn scaled_hahn_with(
    scale: ArgumentScale,
    n: u32,
    big_n: u32,
    t_ratio: f64,
    z: f64,
) -> Result<ScaledHahnPoint> {
    if !(t_ratio >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_ratio = {t_ratio} must be nonnegative"
        )));
    }
    let nf = big_n as f64;
    let alpha = (t_ratio * nf).round() as u32;
    let p = HahnParams::new(alpha, alpha, big_n);
    p.check_degree(n)?;
    let sc = scale.factor() * ((2.0 * t_ratio + 1.0) * nf / (t_ratio + 1.0)).sqrt();
    let x = (nf / 2.0 + z * sc).round() as i64;
    if x < 0 || x > big_n as i64 {
        return Err(Error::OutOfRange {
            what: "lattice argument",
            value: x,
            lo: 0,
            hi: big_n as i64,
        });
    }
    let z_effective = (x as f64 - nf / 2.0) / sc;
    let q = to_f64(&hahn::eval_unnorm(p, n, x)?);
    let step = -2.0 / (nf.powf(1.5) * ((2.0 * t_ratio + 1.0) * (t_ratio + 1.0)).sqrt());
    let nfact = to_f64(&factorial_int(n as u64).into());
    Ok(ScaledHahnPoint {
        value: nfact * step.powi(n as i32) * q,
        lattice_x: x,
        z_effective,
        displacement: (z_effective - z).abs(),
    })
}

/// Error of [`scaled_hahn_with`] against `H_n` at the effective argument,
/// maximized over `zs`, for each `N` in `scales`.
pub fn polynomial_limit_report(
    scale: ArgumentScale,
    n: u32,
    t_ratio: f64,
    scales: &[u32],
    zs: &[f64],
) -> Result<LimitDiagnostic> {
    let per_scale: Vec<Vec<(ScaledHahnPoint, f64)>> = scales
        .par_iter()
        .map(|&big_n| {
            zs.iter()
                .map(|&z| {
                    let pt = scaled_hahn_with(scale, n, big_n, t_ratio, z)?;
                    Ok((pt, hermite_h(n as usize, pt.z_effective)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let errors = per_scale
        .iter()
        .map(|pts| pts.iter().map(|(p, h)| (p.value - h).abs()).fold(0.0, f64::max))
        .collect();
    let terminal: Vec<(f64, f64)> = per_scale
        .last()
        .map(|pts| pts.iter().map(|(p, h)| (p.value, *h)).collect())
        .unwrap_or_default();
    let max_displacement = per_scale
        .iter()
        .flatten()
        .map(|(p, _)| p.displacement)
        .fold(0.0, f64::max);
    Ok(LimitDiagnostic::build(
        format!("hahn-to-hermite n={n} t={t_ratio} scale={}", scale.factor()),
        scales.iter().map(|&s| s as i64).collect(),
        errors,
        &terminal,
        max_displacement,
    ))
}

/// A gauge-invariant quantity compared between the two kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeInvariant {
    /// `K(u; u)` at time `tau`, position `xi`.
    Diagonal { tau: f64, xi: f64 },
    /// `K(u; v) K(v; u)` for `u = (tau, xi)`, `v = (sigma, eta)`.
    Product {
        tau: f64,
        xi: f64,
        sigma: f64,
        eta: f64,
    },
}

/// Diagonal points used by the default diagnostic (`T = 1`).
pub fn default_diagonal_points() -> Vec<GaugeInvariant> {
    let mut out = Vec::new();
    for tau in [0.3, 0.5] {
        for xi in [-0.5, 0.0, 0.4] {
            out.push(GaugeInvariant::Diagonal { tau, xi });
        }
    }
    out
}

/// Two-time points used by the default diagnostic (`T = 1`).
pub fn default_product_points() -> Vec<GaugeInvariant> {
    let mut out = Vec::new();
    for (tau, sigma) in [(0.3, 0.5), (0.5, 0.7)] {
        for (xi, eta) in [(0.0, 0.0), (-0.3, 0.2), (0.2, 0.2)] {
            out.push(GaugeInvariant::Product {
                tau,
                xi,
                sigma,
                eta,
            });
        }
    }
    out
}

/// Lattice image of a continuum point on the hexagon `(a, k, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub r: i64,
    pub x_hahn: i64,
    pub tau_effective: f64,
    pub xi_effective: f64,
}

/// Snap `(tau, xi)` to line `round(2 tau k / T)` and the walk position of
/// matching parity nearest to `(a-1) + xi sqrt(2k/T)`.
pub fn lattice_point(spec: &HexagonSpec, t_horizon: f64, tau: f64, xi: f64) -> Result<LatticePoint> {
    let k = spec.b();
    let a = spec.a();
    let r = (2.0 * tau * k as f64 / t_horizon).round() as i64;
    if r < 1 || r >= spec.last_line() {
        return Err(Error::OutOfRange {
            what: "scaled line index",
            value: r,
            lo: 1,
            hi: spec.last_line() - 1,
        });
    }
    let sc = (2.0 * k as f64 / t_horizon).sqrt();
    let target = (a - 1) as f64 + xi * sc;
    let mut z = target.round() as i64;
    if (z - r).rem_euclid(2) != 0 {
        z += if target > z as f64 { 1 } else { -1 };
    }
    let g = spec.line(r);
    let x_hahn = (z - g.alpha_r) / 2;
    if x_hahn < 0 || x_hahn > g.gamma_r {
        return Err(Error::OutOfRange {
            what: "scaled walk position",
            value: z,
            lo: g.alpha_r,
            hi: g.walk(g.gamma_r),
        });
    }
    Ok(LatticePoint {
        r,
        x_hahn,
        tau_effective: r as f64 * t_horizon / (2.0 * k as f64),
        xi_effective: (z - (a - 1)) as f64 / sc,
    })
}

/// Paired values at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BmComparison {
    pub approx: Vec<f64>,
    pub target: Vec<f64>,
    /// `max |approx - target| / max |target|`.
    pub error: f64,
    pub max_displacement: f64,
}

/// Rescaled Hahn kernel of the hexagon `(a, k, k)` against the Brownian
/// kernel with `a` walkers on `[0, T]`. Diagonals carry the density
/// Jacobian `sqrt(k / 2T)`, products its square.
pub fn hahn_to_bm_error(
    a: i64,
    k: i64,
    t_horizon: f64,
    points: &[GaugeInvariant],
) -> Result<BmComparison> {
    let spec = HexagonSpec::new(a, k, k)?;
    let ctx = KernelContext::new(spec);
    let jac = (k as f64 / (2.0 * t_horizon)).sqrt();
    let n = a as usize;
    let mut approx = Vec::with_capacity(points.len());
    let mut target = Vec::with_capacity(points.len());
    let mut max_displacement: f64 = 0.0;
    let mut note = |p: &LatticePoint, tau: f64, xi: f64| {
        max_displacement = max_displacement
            .max((p.tau_effective - tau).abs())
            .max((p.xi_effective - xi).abs());
    };
    for pt in points {
        match *pt {
            GaugeInvariant::Diagonal { tau, xi } => {
                let u = lattice_point(&spec, t_horizon, tau, xi)?;
                note(&u, tau, xi);
                let kh = ctx.hahn_kernel(u.r, u.x_hahn, u.r, u.x_hahn)?.value;
                approx.push(jac * kh);
                let (te, xe) = (u.tau_effective, u.xi_effective);
                target.push(kbm_at(n, t_horizon, te, xe, te, xe));
            }
            GaugeInvariant::Product {
                tau,
                xi,
                sigma,
                eta,
            } => {
                let u = lattice_point(&spec, t_horizon, tau, xi)?;
                let v = lattice_point(&spec, t_horizon, sigma, eta)?;
                note(&u, tau, xi);
                note(&v, sigma, eta);
                let uv = ctx.hahn_kernel(u.r, u.x_hahn, v.r, v.x_hahn)?.value;
                let vu = ctx.hahn_kernel(v.r, v.x_hahn, u.r, u.x_hahn)?.value;
                approx.push(jac * jac * uv * vu);
                let (tu, xu, tv, xv) = (u.tau_effective, u.xi_effective, v.tau_effective, v.xi_effective);
                target.push(kbm_at(n, t_horizon, tu, xu, tv, xv) * kbm_at(n, t_horizon, tv, xv, tu, xu));
            }
        }
    }
    let scale = target.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let worst = approx
        .iter()
        .zip(&target)
        .map(|(p, t)| (p - t).abs())
        .fold(0.0, f64::max);
    Ok(BmComparison {
        error: if scale > 0.0 { worst / scale } else { worst },
        approx,
        target,
        max_displacement,
    })
}

/// [`hahn_to_bm_error`] over a scale sequence, one thread per scale.
pub fn kernel_limit_report(
    label: &str,
    a: i64,
    ks: &[i64],
    t_horizon: f64,
    points: &[GaugeInvariant],
) -> Result<LimitDiagnostic> {
    let runs: Vec<BmComparison> = ks
        .par_iter()
        .map(|&k| hahn_to_bm_error(a, k, t_horizon, points))
        .collect::<Result<_>>()?;
    let terminal: Vec<(f64, f64)> = runs
        .last()
        .map(|r| r.approx.iter().copied().zip(r.target.iter().copied()).collect())
        .unwrap_or_default();
    Ok(LimitDiagnostic::build(
        format!("hahn-to-brownian {label} a={a}"),
        ks.to_vec(),
        runs.iter().map(|r| r.error).collect(),
        &terminal,
        runs.iter().map(|r| r.max_displacement).fold(0.0, f64::max),
    ))
}
