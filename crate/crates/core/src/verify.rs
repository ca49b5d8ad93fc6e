//! Invariant suites run by `hexwalk verify`, each producing a JSON report.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::continuum::{
    ext_hermite, ext_hermite_contour, ext_hermite_series, hermite_integral_identity_check,
    kbm_transformed, ContourParams,
};
use crate::error::{Error, Result};
use crate::exactnum::{int, ExactScalar};
use crate::hahn::{eval_unnorm, norm_sq, weight, HahnParams};
use crate::kernel::{corr_det, corr_det_exact, Coefficient, GenericKernel, KernelContext};
use crate::limits::{
    default_diagonal_points, default_product_points, kernel_limit_report, polynomial_limit_report,
    ArgumentScale, LimitDiagnostic,
};
use crate::model::{from_walk, lgv_partition, macmahon, HexagonSpec, LinePoint, PathConfiguration};
use crate::oracle::{enumerate, kernel_report, ConfigurationTable, EnumerationBudget};
use crate::report::SCHEMA_VERSION;
use crate::sampler::{
    chi_squared, configuration_probability, max_abs_z, one_point_stats, to_lozenges, Sampler,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Orthogonality,
    Macmahon,
    Kernel,
    Hermite,
    Limits,
    Sampler,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Orthogonality,
        Suite::Macmahon,
        Suite::Kernel,
        Suite::Hermite,
        Suite::Limits,
        Suite::Sampler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orthogonality => "orthogonality",
            Suite::Macmahon => "macmahon",
            Suite::Kernel => "kernel",
            Suite::Hermite => "hermite",
            Suite::Limits => "limits",
            Suite::Sampler => "sampler",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Run settings shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Replaces every floating-point tolerance except the limit
    /// diagnostics' terminal threshold.
    pub tol: Option<f64>,
    pub budget: EnumerationBudget,
    pub seed: u64,
    /// Samples per empirical sampler test.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: None,
            budget: EnumerationBudget::default(),
            seed: 2024,
            samples: 100_000,
        }
    }
}

impl VerifyOptions {
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>, notes: Vec<String>) -> Self {
        SuiteReport {
            schema: SCHEMA_VERSION,
            suite: suite.name().to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            notes,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs one suite, or all of them concatenated for [`Suite::All`].
pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let (checks, notes) = match suite {
        Suite::Orthogonality => (vec![orthogonality()?], Vec::new()),
        Suite::Macmahon => macmahon_suite(opts)?,
        Suite::Kernel => kernel_suite(opts)?,
        Suite::Hermite => hermite_suite(opts)?,
        Suite::Limits => limits_suite()?,
        Suite::Sampler => sampler_suite(opts)?,
        Suite::All => {
            let mut checks = Vec::new();
            let mut notes = Vec::new();
            for s in Suite::ALL {
                let r = run(s, opts)?;
                checks.extend(r.checks.into_iter().map(|mut c| {
                    c.name = format!("{}/{}", s.name(), c.name);
                    c
                }));
                notes.extend(r.notes);
            }
            (checks, notes)
        }
    };
    Ok(SuiteReport::new(suite, checks, notes))
}

/// Normalized specs with every side in `1..=max`, in a fixed order.
pub fn specs_up_to(max: i64) -> Vec<HexagonSpec> {
    let mut out = Vec::new();
    for a in 1..=max {
        for b in 1..=max {
            for c in b..=max {
                out.push(HexagonSpec::new(a, b, c).expect("c >= b >= 1"));
            }
        }
    }
    out
}

fn spec_json(s: &HexagonSpec) -> Value {
    json!([s.a(), s.b(), s.c()])
}

// --- orthogonality --------------------------------------------------------

pub const ORTHOGONALITY_MAX_N: u32 = 15;
pub const ORTHOGONALITY_MAX_PARAM: u32 = 4;

/// Exact `sum_x q_n q_m w = d_n^2 delta_nm` for one parameter set.
/// Returns the first failing `(n, m)`, if any.
pub fn orthogonality_failure(p: HahnParams) -> Result<Option<(u32, u32)>> {
    let big_n = p.big_n;
    let xs: Vec<i64> = (0..=big_n as i64).collect();
    let w: Vec<ExactScalar> = xs.iter().map(|&x| weight(p, x)).collect();
    let q: Vec<Vec<ExactScalar>> = (0..=big_n)
        .map(|n| xs.iter().map(|&x| eval_unnorm(p, n, x)).collect())
        .collect::<Result<_>>()?;
    for n in 0..=big_n {
        let want = norm_sq(p, n)?;
        for m in n..=big_n {
            let mut s = ExactScalar::zero();
            for i in 0..xs.len() {
                s += &q[n as usize][i] * &q[m as usize][i] * &w[i];
            }
            let ok = if n == m { s == want } else { s.is_zero() };
            if !ok {
                return Ok(Some((n, m)));
            }
        }
    }
    Ok(None)
}

fn orthogonality() -> Result<Check> {
    let mut params = Vec::new();
    for alpha in 0..=ORTHOGONALITY_MAX_PARAM {
        for beta in 0..=ORTHOGONALITY_MAX_PARAM {
            for big_n in 0..=ORTHOGONALITY_MAX_N {
                params.push(HahnParams::new(alpha, beta, big_n));
            }
        }
    }
    let results: Vec<(HahnParams, Option<(u32, u32)>)> = params
        .par_iter()
        .map(|&p| Ok((p, orthogonality_failure(p)?)))
        .collect::<Result<_>>()?;
    let failures: Vec<Value> = results
        .iter()
        .filter_map(|(p, f)| {
            f.map(|(n, m)| json!({"alpha": p.alpha, "beta": p.beta, "N": p.big_n, "n": n, "m": m}))
        })
        .collect();
    Ok(Check::new(
        "hahn orthogonality",
        failures.is_empty(),
        json!({
            "parameter_sets": results.len(),
            "max_N": ORTHOGONALITY_MAX_N,
            "max_alpha_beta": ORTHOGONALITY_MAX_PARAM,
            "failures": failures,
        }),
    ))
}

// --- partition function ---------------------------------------------------

/// The partition function by every available route for one spec.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRoutes {
    pub spec: HexagonSpec,
    pub product: String,
    pub determinant: String,
    pub kernel: String,
    /// `None` when enumeration was skipped or over budget.
    pub enumeration: Option<u64>,
    pub agree: bool,
}

/// Product formula, LGV determinant, kernel route and (optionally)
/// enumeration. Enumeration over budget is reported as `None`.
pub fn partition_routes(
    spec: &HexagonSpec,
    budget: Option<EnumerationBudget>,
) -> Result<PartitionRoutes> {
    let product = macmahon(spec.a(), spec.b(), spec.c());
    let determinant = lgv_partition(spec);
    let kernel = KernelContext::new(*spec).partition_via_gram(1)?;
    let enumeration = match budget {
        Some(b) => match enumerate(spec, b, |_| {}) {
            Ok(n) => Some(n),
            Err(Error::BudgetExceeded(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let agree = product == determinant
        && product == kernel
        && enumeration.is_none_or(|n| product == int(n as i64));
    Ok(PartitionRoutes {
        spec: *spec,
        product: product.to_string(),
        determinant: determinant.to_string(),
        kernel: kernel.to_string(),
        enumeration,
        agree,
    })
}

fn macmahon_suite(opts: &VerifyOptions) -> Result<(Vec<Check>, Vec<String>)> {
    let small: Vec<PartitionRoutes> = specs_up_to(4)
        .par_iter()
        .map(|s| partition_routes(s, Some(opts.budget)))
        .collect::<Result<_>>()?;
    let skipped: Vec<Value> = small
        .iter()
        .filter(|r| r.enumeration.is_none())
        .map(|r| spec_json(&r.spec))
        .collect();
    let bad: Vec<&PartitionRoutes> = small.iter().filter(|r| !r.agree).collect();
    let mut notes = Vec::new();
    if !skipped.is_empty() {
        notes.push(format!(
            "enumeration skipped for {} specs over the budget of {} configurations",
            skipped.len(),
            opts.budget.max_configs()
        ));
    }
    let four_way = Check::new(
        "four-way partition function, sides <= 4",
        bad.is_empty(),
        json!({"specs": small.len(), "enumeration_skipped": skipped, "mismatches": bad}),
    );
    let large: Vec<PartitionRoutes> = specs_up_to(6)
        .par_iter()
        .map(|s| partition_routes(s, None))
        .collect::<Result<_>>()?;
    let bad: Vec<&PartitionRoutes> = large.iter().filter(|r| !r.agree).collect();
    let three_way = Check::new(
        "three-way partition function, sides <= 6",
        bad.is_empty(),
        json!({
            "specs": large.len(),
            "largest": large.last().map(|r| r.product.clone()),
            "mismatches": bad,
        }),
    );
    Ok((vec![four_way, three_way], notes))
}

// --- kernel ----------------------------------------------------------------

pub const KERNEL_ORACLE_SPECS: [(i64, i64, i64); 6] =
    [(1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 2, 2), (2, 2, 3), (3, 2, 2)];

/// Default absolute tolerance for the extended Hahn kernel against exact
/// correlations.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

fn gram_check() -> Result<Check> {
    let failures: Vec<Value> = specs_up_to(5)
        .par_iter()
        .map(|spec| {
            let ctx = KernelContext::new(*spec);
            let inv_c: Vec<ExactScalar> = (0..spec.a())
                .map(|n| Ok(ctx.c_n(n)?.recip()))
                .collect::<Result<_>>()?;
            let mut bad = Vec::new();
            for r in spec.interior_lines() {
                let g = ctx.gram_matrix(r)?;
                let diagonal = g.iter().enumerate().all(|(n, row)| {
                    row.iter().enumerate().all(|(m, v)| {
                        if n == m {
                            *v == inv_c[n]
                        } else {
                            v.is_zero()
                        }
                    })
                });
                if !diagonal {
                    bad.push(json!({"spec": spec_json(spec), "r": r}));
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Check::new(
        "gram matrix diagonal on every interior line, sides <= 5",
        failures.is_empty(),
        json!({"specs": specs_up_to(5).len(), "failures": failures}),
    ))
}

fn oracle_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let tol = opts.tol_or(KERNEL_TOLERANCE);
    KERNEL_ORACLE_SPECS
        .iter()
        .map(|&(a, b, c)| {
            let spec = HexagonSpec::new(a, b, c)?;
            let rep = kernel_report(&spec, 3, opts.budget, opts.seed)?;
            let passed = rep.max_abs_error_hahn < tol && rep.max_abs_error_generic == 0.0;
            Ok(Check::new(
                format!("correlations vs enumeration ({a},{b},{c})"),
                passed,
                json!({"tolerance": tol, "report": rep}),
            ))
        })
        .collect()
}

fn anchor_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let tol = opts.tol_or(KERNEL_TOLERANCE);
    let s111 = HexagonSpec::new(1, 1, 1)?;
    let rho1 = KernelContext::new(s111).hahn_kernel(1, 0, 1, 0)?;
    let rho1_ok = rho1.exact_part == Some(ExactScalar::new(1.into(), 2.into()));

    let s112 = HexagonSpec::new(1, 1, 2)?;
    let pts = [
        LinePoint::new(&s112, 1, from_walk(&s112, 1, 1)?)?,
        LinePoint::new(&s112, 2, from_walk(&s112, 2, 0)?)?,
    ];
    let ctx = KernelContext::new(s112);
    let hahn = corr_det(|u, v| ctx.eval(u, v), &pts)?;
    let generic = GenericKernel::new(s112)?;
    let exact = corr_det_exact(|u, v| generic.eval(u, v), &pts)?;
    let third = ExactScalar::new(1.into(), 3.into());
    let rho2_ok = (hahn - 1.0 / 3.0).abs() < tol && exact == third;
    Ok(vec![
        Check::new(
            "one-point anchor (1,1,1) r=1",
            rho1_ok,
            json!({"value": rho1.value, "expected": 0.5}),
        ),
        Check::new(
            "two-point anchor (1,1,2) (1,z=1),(2,z=0)",
            rho2_ok,
            json!({"hahn": hahn, "generic": exact.to_string(), "expected": "1/3"}),
        ),
    ])
}

/// `kappa_n(r, r) = 1` for every `n` and interior `r`, plus the unnormalized
/// coefficient's value on the (1,1,1) diagonal.
fn coefficient_checks(opts: &VerifyOptions) -> Result<(Vec<Check>, String)> {
    let mut bad = Vec::new();
    let specs = specs_up_to(4);
    for spec in &specs {
        let ctx = KernelContext::new(*spec);
        for r in spec.interior_lines() {
            for n in 0..spec.a() {
                if ctx.coefficient_sq(Coefficient::Derived, r, r, n) != ExactScalar::one() {
                    bad.push(json!({"spec": spec_json(spec), "r": r, "n": n}));
                }
            }
        }
    }
    let ctx = KernelContext::new(HexagonSpec::new(1, 1, 1)?);
    let derived = ctx.hahn_kernel_with(Coefficient::Derived, 1, 0, 1, 0)?.value;
    let unnormalized = ctx.hahn_kernel_with(Coefficient::Unnormalized, 1, 0, 1, 0)?.value;
    let expected_unnormalized = 1.0 / (2.0 * 2f64.sqrt());
    let tol = opts.tol_or(KERNEL_TOLERANCE);
    let note = format!(
        "the unnormalized kernel coefficient carries an extra factor sqrt((a+b+c-s-1-n)!/(a+b+c-1-n)!); \
         on the (1,1,1) diagonal it gives {unnormalized:.17} against the exact one-point density 0.5, \
         so the kernel uses kappa_n(r,s) = sqrt((a+s-1-n)!(a+b+c-r-1-n)!/((a+r-1-n)!(a+b+c-s-1-n)!))"
    );
    Ok((
        vec![
            Check::new(
                "kappa_n(r,r) = 1, sides <= 4",
                bad.is_empty(),
                json!({"specs": specs.len(), "failures": bad}),
            ),
            Check::new(
                "unnormalized coefficient deviation on (1,1,1)",
                derived == 0.5 && (unnormalized - expected_unnormalized).abs() < tol,
                json!({"derived": derived, "unnormalized": unnormalized, "ground_truth": 0.5}),
            ),
        ],
        note,
    ))
}

fn kernel_suite(opts: &VerifyOptions) -> Result<(Vec<Check>, Vec<String>)> {
    let mut checks = vec![gram_check()?];
    checks.extend(oracle_checks(opts)?);
    checks.extend(anchor_checks(opts)?);
    let (coeff, note) = coefficient_checks(opts)?;
    checks.extend(coeff);
    Ok((checks, vec![note]))
}

// --- hermite -----------------------------------------------------------------

pub const HERMITE_TOLERANCE: f64 = 1e-6;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Largest pairwise difference between the finite-sum, series and contour
/// forms of the extended Hermite kernel at one point.
pub fn three_way_spread(n: usize, t: f64, x: f64, s: f64, y: f64, tol: f64) -> Result<f64> {
    let a = ext_hermite(n, t, x, s, y);
    let b = ext_hermite_series(n, t, x, s, y, tol / 10.0)?;
    let cp = ContourParams {
        tolerance: tol,
        ..ContourParams::default()
    };
    let c = ext_hermite_contour(n, t, x, s, y, &cp)?.value;
    Ok((a - b).abs().max((a - c).abs()).max((b - c).abs()))
}

fn hermite_suite(opts: &VerifyOptions) -> Result<(Vec<Check>, Vec<String>)> {
    let tol = opts.tol_or(HERMITE_TOLERANCE);
    let mut grid = Vec::new();
    for n in [1usize, 2, 5] {
        for dt in [-1.0, -0.3, 0.0, 0.5] {
            for x in [-1.0, 0.0, 0.7] {
                for y in [-1.0, 0.0, 0.7] {
                    grid.push((n, dt, x, y));
                }
            }
        }
    }
    let spreads: Vec<f64> = grid
        .iter()
        .map(|&(n, dt, x, y)| three_way_spread(n, dt, x, 0.0, y, tol))
        .collect::<Result<_>>()?;
    let max_spread = spreads.iter().copied().fold(0.0, f64::max);
    let three_way = Check::new(
        "extended hermite kernel: sum, series and contour agree",
        max_spread < tol,
        json!({"points": grid.len(), "max_spread": max_spread, "tolerance": tol}),
    );

    let id_tol = opts.tol_or(IDENTITY_TOLERANCE);
    let ts = [-0.5, 0.0, 0.8];
    let xs = [-1.0, 0.0, 1.3];
    let mut max_err: f64 = 0.0;
    let mut count = 0;
    for t_horizon in [1.0, 2.0] {
        for n in [1usize, 3] {
            for &tr in &ts {
                for &tsn in &ts {
                    for &x in &xs {
                        for &y in &xs {
                            let l = kbm_transformed(n, t_horizon, tr, x, tsn, y);
                            let r = ext_hermite(n, tr, x, tsn, y);
                            max_err = max_err.max((l - r).abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    let identity = Check::new(
        "brownian kernel transforms into the extended hermite kernel",
        max_err < id_tol,
        json!({"points": count, "max_abs_error": max_err, "tolerance": id_tol}),
    );

    let mut max_int: f64 = 0.0;
    for alpha in [0.3, 0.6, 0.9] {
        for n in [0usize, 1, 4] {
            for y in [-1.0, 0.5] {
                let (l, r) = hermite_integral_identity_check(alpha, n, y)?;
                max_int = max_int.max((l - r).abs());
            }
        }
    }
    let integral = Check::new(
        "gaussian integral of scaled hermite functions",
        max_int < id_tol,
        json!({"max_abs_error": max_int, "tolerance": id_tol}),
    );
    Ok((vec![three_way, identity, integral], Vec::new()))
}

// --- limits ------------------------------------------------------------------

pub const POLY_SCALES: [u32; 4] = [200, 400, 800, 1600];
pub const KERNEL_SCALES: [i64; 4] = [25, 50, 100, 200];
pub const LIMIT_ZS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

fn limit_check(d: LimitDiagnostic) -> Check {
    Check::new(d.label.clone(), d.passes(), json!(d))
}

/// All limit diagnostics at their default parameters.
pub fn limit_diagnostics() -> Result<Vec<LimitDiagnostic>> {
    let mut jobs: Vec<Box<dyn Fn() -> Result<LimitDiagnostic> + Send + Sync>> = Vec::new();
    for n in 1..=3u32 {
        for t in [0.0, 0.5] {
            jobs.push(Box::new(move || {
                polynomial_limit_report(ArgumentScale::Half, n, t, &POLY_SCALES, &LIMIT_ZS)
            }));
        }
    }
    for a in [1i64, 2] {
        jobs.push(Box::new(move || {
            kernel_limit_report("diagonal", a, &KERNEL_SCALES, 1.0, &default_diagonal_points())
        }));
        jobs.push(Box::new(move || {
            kernel_limit_report("product", a, &KERNEL_SCALES, 1.0, &default_product_points())
        }));
    }
    jobs.par_iter().map(|j| j()).collect()
}

fn limits_suite() -> Result<(Vec<Check>, Vec<String>)> {
    let checks = limit_diagnostics()?.into_iter().map(limit_check).collect();
    // informational: argument constant 2
    let alt = polynomial_limit_report(ArgumentScale::Two, 1, 0.0, &POLY_SCALES, &LIMIT_ZS)?;
    let note = format!(
        "with argument constant 2 the scaled degree-1 polynomial converges to H_1(4z): \
         terminal relative error {:.17}, fitted rescale {}; the diagnostics use constant 1/2",
        alt.terminal_relative_error,
        alt
            .report
            .fitted_rescale
            .map_or("none".to_string(), |l| format!("{l:.17}"))
    );
    Ok((checks, vec![note]))
}

// --- sampler -----------------------------------------------------------------

pub const Z_SCORE_LIMIT: f64 = 4.0;
pub const CHI_SQUARED_P_MIN: f64 = 1e-3;

fn sampler_suite(opts: &VerifyOptions) -> Result<(Vec<Check>, Vec<String>)> {
    let mut checks = Vec::new();

    let s222 = HexagonSpec::new(2, 2, 2)?;
    let table = ConfigurationTable::new(&s222, opts.budget)?;
    let inv_z = macmahon(2, 2, 2).recip();
    let mut wrong = 0usize;
    for lines in table.configs() {
        let cfg = PathConfiguration::new(&s222, lines.clone());
        if configuration_probability(&s222, &cfg)? != inv_z {
            wrong += 1;
        }
    }
    checks.push(Check::new(
        "sequential probabilities equal 1/Z on (2,2,2)",
        wrong == 0,
        json!({"configurations": table.len(), "mismatches": wrong}),
    ));

    let s112 = HexagonSpec::new(1, 1, 2)?;
    let configs = ConfigurationTable::new(&s112, opts.budget)?;
    let index: HashMap<&Vec<Vec<i64>>, usize> =
        configs.configs().iter().enumerate().map(|(i, c)| (c, i)).collect();
    let samples = Sampler::new(s112).sample_many(opts.seed, opts.samples)?;
    let mut observed = vec![0u64; configs.len()];
    for cfg in &samples {
        observed[index[&cfg.lines]] += 1;
    }
    let expected = vec![1.0 / configs.len() as f64; configs.len()];
    let (stat, p) = chi_squared(&observed, &expected)?;
    checks.push(Check::new(
        "chi-squared uniformity on (1,1,2)",
        p > CHI_SQUARED_P_MIN,
        json!({"samples": opts.samples, "observed": observed, "statistic": stat, "p_value": p}),
    ));

    let samples = Sampler::new(s222).sample_many(opts.seed.wrapping_add(1), opts.samples)?;
    let stats = one_point_stats(&s222, &samples)?;
    let z = max_abs_z(&stats);
    checks.push(Check::new(
        "one-point frequencies vs kernel diagonal on (2,2,2)",
        z < Z_SCORE_LIMIT,
        json!({"samples": opts.samples, "sites": stats.len(), "max_abs_z": z}),
    ));

    let mut kinds = BTreeSet::new();
    for cfg in &samples {
        kinds.insert(to_lozenges(&s222, cfg)?.counts());
    }
    let want = (4usize, 4usize, 4usize);
    checks.push(Check::new(
        "lozenge counts (ac, ab, bc) on (2,2,2)",
        kinds.len() == 1 && kinds.contains(&want),
        json!({"observed": kinds.iter().map(|k| [k.0, k.1, k.2]).collect::<Vec<_>>()}),
    ));
    Ok((checks, Vec::new()))
}
