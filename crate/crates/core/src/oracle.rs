//! Brute-force ground truth: every configuration of a small hexagon,
//! exact partition counts and exact correlation functions.
//!
//! Shares no code with the kernel machinery beyond the geometry in
//! [`crate::model`].

use num_traits::{Signed, Zero};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{to_f64, ExactScalar};
use crate::kernel::{corr_det, corr_det_exact, GenericKernel, KernelContext};
use crate::model::{interior_points, HexagonSpec, LinePoint};
use crate::sampler::SeededRng;

/// Cap on the number of configurations an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_configs: u64,
}

impl EnumerationBudget {
    pub const DEFAULT_MAX: u64 = 1_000_000;

    pub fn new(max_configs: u64) -> Result<Self> {
        if max_configs == 0 {
            return Err(Error::InvalidParameter("budget must be positive".into()));
        }
        Ok(EnumerationBudget { max_configs })
    }

    pub fn max_configs(&self) -> u64 {
        self.max_configs
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_configs: Self::DEFAULT_MAX,
        }
    }
}

struct Dfs<'a, F> {
    m: i64,
    fin: Vec<i64>,
    lines: Vec<Vec<i64>>,
    count: u64,
    budget: u64,
    visitor: &'a mut F,
}

impl<F: FnMut(&[Vec<i64>])> Dfs<'_, F> {
    fn reachable(&self, r: i64, z: &[i64]) -> bool {
        let left = self.m - r;
        z.iter().zip(&self.fin).all(|(&u, &f)| (f - u).abs() <= left)
    }

    fn extend(&mut self, r: i64) -> Result<()> {
        if r == self.m {
            self.count += 1;
            if self.count > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            (self.visitor)(&self.lines);
            return Ok(());
        }
        let prev = self.lines[r as usize].clone();
        let a = prev.len();
        // iterate sign vectors in lexicographic order, -1 before +1
        for mask in 0..1u64 << a {
            let next: Vec<i64> = (0..a)
                .map(|i| prev[i] + if mask >> (a - 1 - i) & 1 == 1 { 1 } else { -1 })
                .collect();
            if next.windows(2).any(|w| w[0] >= w[1]) || !self.reachable(r + 1, &next) {
                continue;
            }
            self.lines.push(next);
            self.extend(r + 1)?;
            self.lines.pop();
        }
        Ok(())
    }
}

/// Visits every configuration once, depth first, and returns the count.
/// Fails with `BudgetExceeded` as soon as the count would pass the cap.
pub fn enumerate<F>(spec: &HexagonSpec, budget: EnumerationBudget, mut visitor: F) -> Result<u64>
where
    F: FnMut(&[Vec<i64>]),
{
    enumerate_from(spec, budget, vec![spec.initial_line()], &mut visitor)
}

fn enumerate_from<F>(
    spec: &HexagonSpec,
    budget: EnumerationBudget,
    prefix: Vec<Vec<i64>>,
    visitor: &mut F,
) -> Result<u64>
where
    F: FnMut(&[Vec<i64>]),
{
    let r = prefix.len() as i64 - 1;
    let mut dfs = Dfs {
        m: spec.last_line(),
        fin: spec.final_line(),
        lines: prefix,
        count: 0,
        budget: budget.max_configs,
        visitor,
    };
    dfs.extend(r)?;
    Ok(dfs.count)
}

/// Configuration count, split across threads on the first interior line.
pub fn count_parallel(spec: &HexagonSpec, budget: EnumerationBudget) -> Result<u64> {
    let mut firsts = Vec::new();
    let init = spec.initial_line();
    let a = init.len();
    for mask in 0..1u64 << a {
        let next: Vec<i64> = (0..a)
            .map(|i| init[i] + if mask >> (a - 1 - i) & 1 == 1 { 1 } else { -1 })
            .collect();
        if next.windows(2).all(|w| w[0] < w[1]) {
            firsts.push(next);
        }
    }
    let total: u64 = firsts
        .into_par_iter()
        .map(|first| {
            enumerate_from(spec, budget, vec![init.clone(), first], &mut |_: &[Vec<i64>]| {})
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    if total > budget.max_configs {
        return Err(Error::BudgetExceeded(budget.max_configs));
    }
    Ok(total)
}

/// All configurations of a spec held in memory, for repeated correlation
/// queries.
#[derive(Debug, Clone)]
pub struct ConfigurationTable {
    spec: HexagonSpec,
    configs: Vec<Vec<Vec<i64>>>,
}

impl ConfigurationTable {
    pub fn new(spec: &HexagonSpec, budget: EnumerationBudget) -> Result<Self> {
        let mut configs = Vec::new();
        enumerate(spec, budget, |lines| configs.push(lines.to_vec()))?;
        Ok(ConfigurationTable {
            spec: *spec,
            configs,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Vec<Vec<i64>>] {
        &self.configs
    }

    /// Fraction of configurations occupying every given point.
    pub fn correlation(&self, points: &[LinePoint]) -> Result<ExactScalar> {
        let walk: Vec<(usize, i64)> = points
            .iter()
            .map(|p| {
                LinePoint::new(&self.spec, p.r, p.x_hahn)?;
                Ok((p.r as usize, p.walk(&self.spec)))
            })
            .collect::<Result<_>>()?;
        let hits = self
            .configs
            .iter()
            .filter(|c| walk.iter().all(|&(r, z)| c[r].binary_search(&z).is_ok()))
            .count();
        Ok(ExactScalar::new(hits.into(), self.configs.len().into()))
    }
}

/// `P(all points occupied)`, exact.
pub fn exact_correlation(
    spec: &HexagonSpec,
    points: &[LinePoint],
    budget: EnumerationBudget,
) -> Result<ExactScalar> {
    ConfigurationTable::new(spec, budget)?.correlation(points)
}

/// Subsets above this count are sampled rather than exhausted.
pub const SUBSET_SAMPLE_THRESHOLD: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub spec: HexagonSpec,
    pub subsets_checked: u64,
    pub max_abs_error_hahn: f64,
    pub max_abs_error_generic: f64,
    pub worst_point_set: Vec<LinePoint>,
}

fn binom_u64(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn all_subsets(n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(start: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, max, cur, out);
            cur.pop();
        }
    }
    rec(0, n, max, &mut Vec::new(), out);
}

/// Point sets to check: every subset of size `1..=max_points`, or a
/// uniform sample of `SUBSET_SAMPLE_THRESHOLD` of them.
fn point_subsets(n: usize, max_points: usize, seed: u64) -> Vec<Vec<usize>> {
    let max_points = max_points.min(n);
    let sizes: Vec<u64> = (1..=max_points as u64).map(|k| binom_u64(n as u64, k)).collect();
    let total = sizes.iter().fold(0u64, |a, &s| a.saturating_add(s));
    if total <= SUBSET_SAMPLE_THRESHOLD {
        let mut out = Vec::new();
        all_subsets(n, max_points, &mut out);
        return out;
    }
    let mut rng = SeededRng::new(seed);
    (0..SUBSET_SAMPLE_THRESHOLD)
        .map(|_| {
            // size weighted by the number of subsets of that size
            let mut u = rng.random_range(0..total);
            let mut k = 1;
            for &s in &sizes {
                if u < s {
                    break;
                }
                u -= s;
                k += 1;
            }
            let mut idx = sample_indices(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx
        })
        .collect()
}

/// Checks both kernels against exact correlations on point subsets of
/// size up to `max_points`.
pub fn kernel_report(
    spec: &HexagonSpec,
    max_points: usize,
    budget: EnumerationBudget,
    seed: u64,
) -> Result<KernelReport> {
    let table = ConfigurationTable::new(spec, budget)?;
    let ctx = KernelContext::new(*spec);
    let generic = GenericKernel::new(*spec)?;
    let pts = interior_points(spec);
    let subsets = point_subsets(pts.len(), max_points, seed);
    let rows: Vec<(f64, ExactScalar, Vec<LinePoint>)> = subsets
        .par_iter()
        .map(|idx| {
            let set: Vec<LinePoint> = idx.iter().map(|&i| pts[i]).collect();
            let truth = table.correlation(&set)?;
            let h = corr_det(|u, v| ctx.eval(u, v), &set)?;
            let g = corr_det_exact(|u, v| generic.eval(u, v), &set)?;
            Ok(((h - to_f64(&truth)).abs(), (g - truth).abs(), set))
        })
        .collect::<Result<_>>()?;
    let mut report = KernelReport {
        spec: *spec,
        subsets_checked: rows.len() as u64,
        max_abs_error_hahn: 0.0,
        max_abs_error_generic: 0.0,
        worst_point_set: Vec::new(),
    };
    let mut worst_generic = ExactScalar::zero();
    for (h, g, set) in rows {
        if h > report.max_abs_error_hahn || report.worst_point_set.is_empty() {
            report.max_abs_error_hahn = report.max_abs_error_hahn.max(h);
            report.worst_point_set = set;
        }
        if g > worst_generic {
            worst_generic = g;
        }
    }
    report.max_abs_error_generic = to_f64(&worst_generic);
    debug_assert!(!worst_generic.is_negative());
    Ok(report)
}
