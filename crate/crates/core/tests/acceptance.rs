//! One line per acceptance criterion, at the default tolerances.

use std::time::{Duration, Instant};

use hexwalk::verify::{run, Check, Suite, SuiteReport, VerifyOptions};

struct Line {
    id: u32,
    title: &'static str,
    passed: bool,
    elapsed: Duration,
    limit: Duration,
    detail: String,
}

fn timed(suite: Suite, opts: &VerifyOptions) -> (SuiteReport, Duration) {
    let start = Instant::now();
    let r = run(suite, opts).unwrap_or_else(|e| panic!("suite {suite}: {e}"));
    (r, start.elapsed())
}

fn select(r: &SuiteReport, f: impl Fn(&Check) -> bool) -> Vec<&Check> {
    let out: Vec<&Check> = r.checks.iter().filter(|c| f(c)).collect();
    assert!(!out.is_empty(), "no checks selected from {}", r.suite);
    out
}

fn line(id: u32, title: &'static str, checks: &[&Check], elapsed: Duration, limit_s: u64) -> Line {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Line {
        id,
        title,
        passed: failed.is_empty(),
        elapsed,
        limit: Duration::from_secs(limit_s),
        detail: if failed.is_empty() {
            format!("{} checks", checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
    }
}

#[test]
fn acceptance() {
    let opts = VerifyOptions::default();
    let mut lines = Vec::new();

    let (r, t) = timed(Suite::Macmahon, &opts);
    lines.push(line(1, "partition function routes agree", &select(&r, |_| true), t, 60));

    let (r, t) = timed(Suite::Orthogonality, &opts);
    lines.push(line(2, "hahn orthogonality", &select(&r, |_| true), t, 30));

    let (r, t) = timed(Suite::Kernel, &opts);
    lines.push(line(3, "gram diagonality", &select(&r, |c| c.name.starts_with("gram")), t, 60));
    lines.push(line(
        4,
        "determinantal ground truth",
        &select(&r, |c| c.name.starts_with("correlations") || c.name.contains("anchor")),
        t,
        300,
    ));
    lines.push(line(
        5,
        "kernel coefficient regression",
        &select(&r, |c| c.name.starts_with("kappa") || c.name.starts_with("unnormalized") || c.name.starts_with("correlations")),
        t,
        300,
    ));

    let (r, t) = timed(Suite::Hermite, &opts);
    lines.push(line(6, "continuum kernel three-way agreement", &select(&r, |c| c.name.contains("series")), t, 30));
    lines.push(line(7, "brownian transformation identity", &select(&r, |c| c.name.starts_with("brownian")), t, 30));

    let (r, t) = timed(Suite::Sampler, &opts);
    lines.push(line(8, "sampler exactness", &select(&r, |_| true), t, 120));

    let (r, t) = timed(Suite::Limits, &opts);
    lines.push(line(9, "limit diagnostics", &select(&r, |_| true), t, 180));

    let mut all = true;
    for l in &lines {
        let ok = l.passed && l.elapsed <= l.limit;
        all &= ok;
        println!(
            "criterion {}: {} - {} ({:.2}s, limit {}s) {}",
            l.id,
            if ok { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed.as_secs_f64(),
            l.limit.as_secs(),
            l.detail
        );
    }
    assert!(all, "acceptance criteria failed");
}
