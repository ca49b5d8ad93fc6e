//! Continuum kernels: normalized Hermite polynomials, the Mehler kernel,
//! the extended Hermite kernel in its finite-sum, series and double
//! contour forms, and the Brownian-motion kernel it transforms into.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::sig17;

/// `|p_k(x)| e^{-x^2/2} <= CRAMER * pi^{-1/4}` for every `k` and real `x`.
const CRAMER: f64 = 1.086_435;

/// Normalized Hermite polynomial `p_n(x) = (sqrt(pi) 2^n n!)^{-1/2} H_n(x)`,
/// by the three-term recurrence on the normalized family.
pub fn hermite_p(n: usize, x: f64) -> f64 {
    HermiteIter::new(x).nth(n).expect("infinite iterator")
}

/// `p_0(x), p_1(x), ...`
#[derive(Debug, Clone)]
pub struct HermiteIter {
    x: f64,
    k: usize,
    prev: f64,
    cur: f64,
}

impl HermiteIter {
    pub fn new(x: f64) -> Self {
        HermiteIter {
            x,
            k: 0,
            prev: 0.0,
            cur: PI.powf(-0.25),
        }
    }
}

impl Iterator for HermiteIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let k = self.k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * self.x * self.cur - (k / (k + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        Some(out)
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_h(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q = {q} must lie in (0, 1)")))
    }
}

/// Mehler kernel `sum_k q^k p_k(x) p_k(y) e^{-y^2}` in closed form.
pub fn mehler(q: f64, x: f64, y: f64) -> Result<f64> {
    check_q(q)?;
    let d = 1.0 - q * q;
    Ok((PI * d).powf(-0.5) * (-(q * x - y).powi(2) / d).exp())
}

/// First `terms` terms of the Mehler expansion.
pub fn mehler_partial(q: f64, x: f64, y: f64, terms: usize) -> Result<f64> {
    check_q(q)?;
    let w = (-y * y).exp();
    Ok(HermiteIter::new(x)
        .zip(HermiteIter::new(y))
        .take(terms)
        .enumerate()
        .map(|(k, (px, py))| q.powi(k as i32) * px * py * w)
        .sum())
}

fn heat_term(t: f64, x: f64, s: f64, y: f64) -> f64 {
    if t < s {
        let q = (t - s).exp();
        let d = 1.0 - q * q;
        (PI * d).powf(-0.5) * (-(q * x - y).powi(2) / d).exp()
    } else {
        0.0
    }
}

fn hermite_sum(n: usize, t: f64, x: f64, s: f64, y: f64) -> f64 {
    let w = (-y * y).exp();
    HermiteIter::new(x)
        .zip(HermiteIter::new(y))
        .take(n)
        .enumerate()
        .map(|(k, (px, py))| (k as f64 * (t - s)).exp() * px * py * w)
        .sum()
}

/// Extended Hermite kernel as a finite sum plus the heat-kernel term.
pub fn ext_hermite(n: usize, t: f64, x: f64, s: f64, y: f64) -> f64 {
    hermite_sum(n, t, x, s, y) - heat_term(t, x, s, y)
}

/// Hard cap on series terms before giving up with `InsufficientDecay`.
pub const SERIES_TERM_CAP: usize = 200_000;

/// Extended Hermite kernel from the tail series `-sum_{k>=n}` when `t < s`;
/// the finite sum otherwise.
pub fn ext_hermite_series(n: usize, t: f64, x: f64, s: f64, y: f64, tol: f64) -> Result<f64> {
    if t >= s {
        return Ok(hermite_sum(n, t, x, s, y));
    }
    let q = (t - s).exp();
    let envelope = CRAMER * CRAMER / PI.sqrt() * ((x * x - y * y) / 2.0).exp() / (1.0 - q);
    let w = (-y * y).exp();
    let mut hx = HermiteIter::new(x);
    let mut hy = HermiteIter::new(y);
    let mut acc = 0.0;
    let mut qk = 1.0;
    for k in 0..SERIES_TERM_CAP {
        let (px, py) = (hx.next().unwrap(), hy.next().unwrap());
        if k >= n {
            acc -= qk * px * py * w;
            // bound on sum_{j > k} q^j |p_j(x) p_j(y)| e^{-y^2}
            if envelope * qk * q < tol {
                return Ok(acc);
            }
        }
        qk *= q;
    }
    Err(Error::InsufficientDecay {
        terms: SERIES_TERM_CAP,
        bound: envelope * qk,
    })
}

/// Quadrature settings for [`ext_hermite_contour`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Abscissa `L` of the vertical line `L + iu`.
    pub line_abscissa: f64,
    /// Radius of the circle around the origin.
    pub circle_radius: f64,
    /// The line is cut to `|u| <= truncation`.
    pub truncation: f64,
    /// Trapezoid step along the line.
    pub step: f64,
    pub circle_points: usize,
    /// Largest acceptable error estimate.
    pub tolerance: f64,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            line_abscissa: 1.0,
            circle_radius: 0.5,
            truncation: 10.0,
            step: 0.005,
            circle_points: 1024,
            tolerance: 1e-6,
        }
    }
}

impl ContourParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.circle_radius > 0.0
            && self.line_abscissa > self.circle_radius
            && self.truncation > 0.0
            && self.step > 0.0
            && self.step < self.truncation
            && self.circle_points >= 8
            && self.circle_points.is_multiple_of(2);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "contour parameters {self:?}: need L > radius > 0, 0 < step < truncation, even circle_points >= 8"
            )))
        }
    }
}

/// A contour evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourEstimate {
    pub value: f64,
    /// Imaginary part of the computed integral, zero up to rounding.
    pub imag_residue: f64,
    /// `|fine - coarse|`, the coarse rule using every other node.
    pub error_estimate: f64,
}

/// Extended Hermite kernel as the double contour integral
/// `2/(2 pi i)^2 ∮ dz ∫ dw (w/z)^n/(w-z) exp(w^2 - 2yw - q^2 z^2 + 2qxz)`,
/// `q = e^{t-s}`, plus the heat-kernel term when `t < s`.
pub fn ext_hermite_contour(
    n: usize,
    t: f64,
    x: f64,
    s: f64,
    y: f64,
    cp: &ContourParams,
) -> Result<ContourEstimate> {
    cp.validate()?;
    let q = (t - s).exp();
    let m = cp.circle_points;
    let dtheta = 2.0 * PI / m as f64;
    let circle: Vec<(Complex64, Complex64)> = (0..m)
        .map(|j| {
            let z = Complex64::from_polar(cp.circle_radius, j as f64 * dtheta);
            let f = z.powi(-(n as i32)) * (-q * q * z * z + 2.0 * q * x * z).exp();
            (z, f * Complex64::i() * z * dtheta)
        })
        .collect();
    let half = (cp.truncation / cp.step).round() as i64;
    // (fine, coarse) partial sums over the line nodes
    let (fine, coarse) = (-half..=half)
        .into_par_iter()
        .map(|k| {
            let w = Complex64::new(cp.line_abscissa, k as f64 * cp.step);
            let g = w.powi(n as i32) * (w * w - 2.0 * y * w).exp() * Complex64::i() * cp.step;
            let mut all = Complex64::new(0.0, 0.0);
            let mut even = Complex64::new(0.0, 0.0);
            for (j, (z, f)) in circle.iter().enumerate() {
                let term = f / (w - z);
                all += term;
                if j % 2 == 0 {
                    even += term;
                }
            }
            let fine = g * all;
            let coarse = if k % 2 == 0 {
                g * even * 4.0
            } else {
                Complex64::new(0.0, 0.0)
            };
            (fine, coarse)
        })
        .reduce(
            || (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
    let pre = Complex64::new(2.0, 0.0) / (Complex64::new(0.0, 2.0 * PI).powi(2));
    let fine = pre * fine;
    let coarse = pre * coarse;
    let heat = heat_term(t, x, s, y);
    let est = ContourEstimate {
        value: fine.re - heat,
        imag_residue: fine.im,
        error_estimate: (fine - coarse).norm(),
    };
    if !(est.error_estimate <= cp.tolerance) {
        return Err(Error::Quadrature {
            estimate: est.error_estimate,
            tolerance: cp.tolerance,
        });
    }
    Ok(est)
}

/// `n` non-colliding Brownian walkers on `[0, T]`, observed at times
/// `0 < tau_1 < ... < T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianSpec {
    n: usize,
    t_horizon: f64,
    times: Vec<f64>,
}

impl BrownianSpec {
    pub fn new(n: usize, t_horizon: f64, times: Vec<f64>) -> Result<Self> {
        if n == 0 || !(t_horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1 and T > 0, got n = {n}, T = {t_horizon}"
            )));
        }
        let increasing = times.windows(2).all(|w| w[0] < w[1]);
        let inside = times.iter().all(|&t| t > 0.0 && t < t_horizon);
        if !increasing || !inside {
            return Err(Error::InvalidParameter(format!(
                "times must increase strictly inside (0, {t_horizon}): {times:?}"
            )));
        }
        Ok(BrownianSpec {
            n,
            t_horizon,
            times,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `d_r = sqrt(T / (2 tau_r (T - tau_r)))`.
    pub fn d(&self, r: usize) -> f64 {
        scale_d(self.t_horizon, self.times[r])
    }
}

fn scale_d(t_horizon: f64, tau: f64) -> f64 {
    (t_horizon / (2.0 * tau * (t_horizon - tau))).sqrt()
}

/// Brownian kernel at time indices `r`, `s` (0-based into `spec.times()`).
pub fn kbm(spec: &BrownianSpec, r: usize, x: f64, s: usize, y: f64) -> Result<f64> {
    let m = spec.times.len();
    if r >= m || s >= m {
        return Err(Error::InvalidParameter(format!(
            "time index out of range: ({r}, {s}) with {m} times"
        )));
    }
    Ok(kbm_at(spec.n, spec.t_horizon, spec.times[r], x, spec.times[s], y))
}

/// Brownian kernel at explicit times `tau_r`, `tau_s` in `(0, T)`.
pub fn kbm_at(n: usize, t_horizon: f64, tau_r: f64, x: f64, tau_s: f64, y: f64) -> f64 {
    let tt = t_horizon;
    let (dr, ds) = (scale_d(tt, tau_r), scale_d(tt, tau_s));
    let ratio = (tau_r * (tt - tau_s) / (tau_s * (tt - tau_r))).sqrt();
    let pre = (tt / (2.0 * tau_s * (tt - tau_r))).sqrt()
        * (-x * x / (2.0 * (tt - tau_r)) - y * y / (2.0 * tau_s)).exp();
    let sum: f64 = HermiteIter::new(x * dr)
        .zip(HermiteIter::new(y * ds))
        .take(n)
        .enumerate()
        .map(|(j, (px, py))| ratio.powi(j as i32) * px * py)
        .sum();
    let heat = if tau_r < tau_s {
        let dt = tau_s - tau_r;
        (2.0 * PI * dt).powf(-0.5) * (-(x - y).powi(2) / (2.0 * dt)).exp()
    } else {
        0.0
    };
    pre * sum - heat
}

/// Time change `tau = T / (1 + e^{-2t})`.
pub fn tau_of(t_horizon: f64, t: f64) -> f64 {
    t_horizon / (1.0 + (-2.0 * t).exp())
}

/// Brownian kernel pulled back to the extended Hermite kernel's
/// coordinates. Equals `ext_hermite(n, t_r, x, t_s, y)`.
pub fn kbm_transformed(n: usize, t_horizon: f64, t_r: f64, x: f64, t_s: f64, y: f64) -> f64 {
    let tt = t_horizon;
    let (tau_r, tau_s) = (tau_of(tt, t_r), tau_of(tt, t_s));
    let (dr, ds) = (scale_d(tt, tau_r), scale_d(tt, tau_s));
    kbm_at(n, tt, tau_r, x / dr, tau_s, y / ds) / (dr * ds).sqrt()
        * (x * x * tau_r / tt - y * y * tau_s / tt).exp()
        * ((tt / tau_r - 1.0) / (tt / tau_s - 1.0)).powf(0.25)
}

/// Composite trapezoid rule for a rapidly decaying `f` on `[lo, hi]`,
/// halving the step until two successive values agree to `tol`.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mut pieces = 64usize;
    let mut h = (hi - lo) / pieces as f64;
    let mut sum = (f(lo) + f(hi)) / 2.0 + (1..pieces).map(|i| f(lo + i as f64 * h)).sum::<f64>();
    let mut prev = sum * h;
    loop {
        // add the midpoints of the current panels
        sum += (0..pieces).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>();
        pieces *= 2;
        h /= 2.0;
        let cur = sum * h;
        let est = (cur - prev).abs();
        if est <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        if pieces > 1 << 22 {
            return Err(Error::Quadrature {
                estimate: est,
                tolerance: tol,
            });
        }
        prev = cur;
    }
}

/// Both sides of `∫ e^{-(x-y)^2} p_n(alpha x) dx
/// = sqrt(pi) (1-alpha^2)^{n/2} p_n(alpha y / sqrt(1-alpha^2))`.
pub fn hermite_integral_identity_check(alpha: f64, n: usize, y: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    let half_width = 12.0 + (2.0 * n as f64).sqrt();
    let lhs = trapezoid(
        |x| (-(x - y).powi(2)).exp() * hermite_p(n, alpha * x),
        y - half_width,
        y + half_width,
        1e-13,
    )?;
    let b = 1.0 - alpha * alpha;
    let rhs = PI.sqrt() * b.powf(n as f64 / 2.0) * hermite_p(n, alpha * y / b.sqrt());
    Ok((lhs, rhs))
}

/// One evaluation point `(t, x; s, y)` of a continuum kernel.
pub type ContinuumPoint = (f64, f64, f64, f64);

/// Writes `ext_hermite` on the given points as CSV, using the kernel grid
/// header with real-valued coordinates. Returns the number of data rows.
pub fn write_ext_hermite_grid_csv<W: Write>(
    n: usize,
    points: &[ContinuumPoint],
    mut out: W,
) -> Result<usize> {
    writeln!(out, "r,x_hahn,s,y_hahn,value")?;
    for &(t, x, s, y) in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            sig17(t),
            sig17(x),
            sig17(s),
            sig17(y),
            sig17(ext_hermite(n, t, x, s, y))
        )?;
    }
    Ok(points.len())
}
