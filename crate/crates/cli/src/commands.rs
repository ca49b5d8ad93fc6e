use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use hexwalk::exactnum::to_f64;
use hexwalk::kernel::{corr_det, corr_det_exact, kernel_grid_rows, write_kernel_grid_csv};
use hexwalk::oracle::{kernel_report, ConfigurationTable, EnumerationBudget, KernelReport};
use hexwalk::report::{to_json, SCHEMA_VERSION};
use hexwalk::sampler::{max_abs_z, one_point_stats, to_lozenges, to_svg, Sampler};
use hexwalk::verify::{self, partition_routes, Suite, VerifyOptions, KERNEL_TOLERANCE, Z_SCORE_LIMIT};
use hexwalk::{GenericKernel, HexagonSpec, KernelContext, LinePoint};

use crate::{Cli, Command, Common, Failure, Format, EXIT_FAILURE};

type Outcome = Result<u8, Failure>;

pub fn dispatch(cli: &Cli) -> Outcome {
    let c = &cli.common;
    if let Some(t) = c.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::usage(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Partition => partition(c),
        Command::Kernel { points, grid } => kernel(c, points, *grid),
        Command::Sample { count, stats } => sample(c, *count, *stats),
        Command::Verify { suite, samples } => run_verify(c, suite, *samples),
    }
}

fn require_spec(c: &Common) -> Result<HexagonSpec, Failure> {
    let (a, b, c) = c.abc.ok_or_else(|| Failure::usage("--abc A,B,C is required"))?;
    Ok(HexagonSpec::new(a, b, c)?)
}

fn budget(c: &Common) -> Result<EnumerationBudget, Failure> {
    Ok(EnumerationBudget::new(c.budget)?)
}

fn format_or(c: &Common, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = c.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::usage(format!("format {f:?} is not available for this subcommand")))
    }
}

/// Writes `text` to `--out`, or to standard output.
fn emit(c: &Common, text: &str) -> Result<(), Failure> {
    match &c.out {
        Some(p) => write_file(p, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    fs::write(p, text).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("cannot write {}: {e}", p.display()),
    })
}

fn json_text(v: &impl serde::Serialize) -> Result<String, Failure> {
    let mut s = to_json(v)?;
    s.push('\n');
    Ok(s)
}

fn spec_value(s: &HexagonSpec) -> Value {
    json!({"a": s.a(), "b": s.b(), "c": s.c()})
}

fn partition(c: &Common) -> Outcome {
    format_or(c, Format::Json, &[Format::Json])?;
    let (a, b, cc) = c.abc.ok_or_else(|| Failure::usage("--abc A,B,C is required"))?;
    let spec = HexagonSpec::normalized(a, b, cc)?;
    let routes = partition_routes(&spec, Some(budget(c)?))?;
    let mut notes = Vec::new();
    if routes.enumeration.is_none() {
        notes.push(format!("enumeration skipped: more than {} configurations", c.budget));
    }
    let report = json!({
        "schema": SCHEMA_VERSION,
        "spec": spec_value(&spec),
        "product": routes.product,
        "determinant": routes.determinant,
        "kernel": routes.kernel,
        "enumeration": routes.enumeration,
        "agree": routes.agree,
        "notes": notes,
    });
    emit(c, &json_text(&report)?)?;
    Ok(if routes.agree { 0 } else { EXIT_FAILURE })
}

fn oracle_ok(rep: &KernelReport, tol: f64) -> bool {
    rep.max_abs_error_hahn < tol && rep.max_abs_error_generic == 0.0
}

fn kernel(c: &Common, raw: &[(i64, i64)], grid: bool) -> Outcome {
    let spec = require_spec(c)?;
    let tol = c.tol.unwrap_or(KERNEL_TOLERANCE);
    let ctx = KernelContext::new(spec);
    let oracle = if c.with_oracle {
        Some(kernel_report(&spec, 3, budget(c)?, c.seed)?)
    } else {
        None
    };
    let mut ok = oracle.as_ref().is_none_or(|r| oracle_ok(r, tol));

    if grid {
        let lines: Vec<i64> = spec.interior_lines().collect();
        let pairs: Vec<(i64, i64)> = lines
            .iter()
            .flat_map(|&r| lines.iter().map(move |&s| (r, s)))
            .collect();
        match format_or(c, Format::Csv, &[Format::Csv, Format::Json])? {
            Format::Csv => {
                let mut buf = Vec::new();
                write_kernel_grid_csv(&ctx, &pairs, &mut buf)?;
                emit(c, &String::from_utf8(buf).expect("ascii csv"))?;
                if let Some(r) = &oracle {
                    eprint!("{}", json_text(&json!({"schema": SCHEMA_VERSION, "oracle": r}))?);
                }
            }
            _ => {
                let report = json!({
                    "schema": SCHEMA_VERSION,
                    "spec": spec_value(&spec),
                    "rows": kernel_grid_rows(&ctx, &pairs)?,
                    "oracle": oracle,
                });
                emit(c, &json_text(&report)?)?;
            }
        }
        return Ok(if ok { 0 } else { EXIT_FAILURE });
    }

    if raw.is_empty() {
        return Err(Failure::usage("give at least one --point R,X or --grid"));
    }
    let mut points = Vec::new();
    let mut bad = Vec::new();
    for &(r, x) in raw {
        match LinePoint::new(&spec, r, x) {
            Ok(p) => points.push(p),
            Err(e) => bad.push(format!("point ({r},{x}): {e}")),
        }
    }
    if !bad.is_empty() {
        return Err(Failure::usage(bad.join("\n")));
    }

    let generic = if c.with_oracle {
        Some(GenericKernel::new(spec)?)
    } else {
        None
    };
    let mut entries = Vec::new();
    let mut csv = String::from("r,x_hahn,s,y_hahn,value\n");
    let mut max_pointwise: f64 = 0.0;
    for u in &points {
        for v in &points {
            let h = ctx.eval(*u, *v)?;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                u.r,
                u.x_hahn,
                v.r,
                v.x_hahn,
                hexwalk::report::sig17(h)
            ));
            let mut e = json!({"u": u, "v": v, "hahn": h});
            if let Some(g) = &generic {
                let gv = to_f64(&g.eval(*u, *v)?);
                max_pointwise = max_pointwise.max((gv - h).abs());
                e["generic"] = json!(gv);
            }
            entries.push(e);
        }
    }

    let distinct: Vec<LinePoint> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut correlation = json!({"hahn": corr_det(|u, v| ctx.eval(u, v), &distinct)?});
    if let Some(g) = &generic {
        let exact = ConfigurationTable::new(&spec, budget(c)?)?.correlation(&distinct)?;
        let gen = corr_det_exact(|u, v| g.eval(u, v), &distinct)?;
        let hahn = correlation["hahn"].as_f64().unwrap_or(f64::NAN);
        let err = (hahn - to_f64(&exact)).abs();
        ok &= err < tol && gen == exact;
        correlation["generic"] = json!(gen.to_string());
        correlation["exact"] = json!(exact.to_string());
        correlation["max_abs_error"] = json!(err);
    }

    match format_or(c, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => {
            emit(c, &csv)?;
            if let Some(r) = &oracle {
                eprint!("{}", json_text(&json!({"schema": SCHEMA_VERSION, "oracle": r}))?);
            }
        }
        _ => {
            let mut report = json!({
                "schema": SCHEMA_VERSION,
                "spec": spec_value(&spec),
                "points": distinct,
                "entries": entries,
                "correlation": correlation,
            });
            if let Some(r) = &oracle {
                report["oracle"] = json!(r);
                report["max_abs_error_pointwise"] = json!(max_pointwise);
            }
            emit(c, &json_text(&report)?)?;
        }
    }
    Ok(if ok { 0 } else { EXIT_FAILURE })
}

/// `dir/name.ext` becomes `dir/name_i.ext`.
fn indexed_path(p: &Path, i: usize) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    p.with_file_name(name)
}

fn sample(c: &Common, count: usize, stats: bool) -> Outcome {
    let spec = require_spec(c)?;
    if count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    let format = format_or(c, Format::Json, &[Format::Json, Format::Svg])?;
    let samples = Sampler::new(spec).sample_many(c.seed, count)?;

    let render = |cfg: &hexwalk::PathConfiguration| -> Result<String, Failure> {
        Ok(match format {
            Format::Svg => to_svg(&to_lozenges(&spec, cfg)?),
            _ => format!("{}\n", cfg.to_json()),
        })
    };
    match &c.out {
        Some(p) if count == 1 => write_file(p, &render(&samples[0])?)?,
        Some(p) => {
            for (i, cfg) in samples.iter().enumerate() {
                write_file(&indexed_path(p, i), &render(cfg)?)?;
            }
        }
        None if stats => {}
        None => match format {
            Format::Svg if count > 1 => {
                return Err(Failure::usage("several SVG samples need --out"));
            }
            Format::Svg => emit(c, &render(&samples[0])?)?,
            _ => {
                let text: String = samples.iter().map(|cfg| format!("{}\n", cfg.to_json())).collect();
                emit(c, &text)?;
            }
        },
    }

    if !stats {
        return Ok(0);
    }
    let table = one_point_stats(&spec, &samples)?;
    let z = max_abs_z(&table);
    let report = json!({
        "schema": SCHEMA_VERSION,
        "spec": spec_value(&spec),
        "count": count,
        "seed": c.seed,
        "max_abs_z": z,
        "z_limit": Z_SCORE_LIMIT,
        "sites": table,
    });
    let mut so = std::io::stdout().lock();
    so.write_all(json_text(&report)?.as_bytes())?;
    Ok(if z < Z_SCORE_LIMIT { 0 } else { EXIT_FAILURE })
}

fn run_verify(c: &Common, suite: &str, samples: usize) -> Outcome {
    format_or(c, Format::Json, &[Format::Json])?;
    let suite: Suite = suite.parse()?;
    if samples < 2 {
        return Err(Failure::usage("--samples must be at least 2"));
    }
    let opts = VerifyOptions {
        tol: c.tol,
        budget: budget(c)?,
        seed: c.seed,
        samples,
    };
    let report = verify::run(suite, &opts)?;
    emit(c, &json_text(&report)?)?;
    for f in report.failed_checks() {
        eprintln!("FAILED {}", f.name);
    }
    Ok(if report.passed { 0 } else { EXIT_FAILURE })
}
