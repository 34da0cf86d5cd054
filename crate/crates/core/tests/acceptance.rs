//! One line per acceptance criterion; the test fails if any criterion does.

use std::time::{Duration, Instant};

use sclab::experiments::{run, ExperimentConfig, ExperimentReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_reports(reports: &[ExperimentReport]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failed_checks().map(move |c| format!("{}/{}", r.experiment, c.name)))
        .collect();
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    Outcome {
        pass: failed.is_empty() && total > 0,
        detail: if failed.is_empty() {
            format!("{total} checks")
        } else {
            format!("{} of {total} checks failed: {}", failed.len(), failed.join(", "))
        },
    }
}

fn experiments(ids: &[&str], budget: Option<Duration>) -> Outcome {
    let cfg = ExperimentConfig::default();
    let start = Instant::now();
    let reports: Vec<ExperimentReport> = ids
        .iter()
        .map(|id| run(id, &cfg).expect("experiment runs"))
        .collect();
    let elapsed = start.elapsed();
    let mut out = from_reports(&reports);
    if let Some(b) = budget {
        out.detail = format!("{}, {:.3} s", out.detail, elapsed.as_secs_f64());
        if elapsed >= b {
            out.pass = false;
            out.detail.push_str(&format!(" (budget {:.1} s)", b.as_secs_f64()));
        }
    }
    out
}

#[test]
fn acceptance() {
    let one_second = Some(Duration::from_secs(1));
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("sequence-model discontinuity", Box::new(move || experiments(&["seq-discontinuity"], one_second))),
        ("tail and projection estimates", Box::new(move || experiments(&["seq-tail-bounds"], one_second))),
        ("tangent formula for rho_k", Box::new(|| experiments(&["seq-tangent-check"], None))),
        ("retract image gap", Box::new(|| experiments(&["retract-image-gap"], None))),
        ("inverse blow-up", Box::new(|| experiments(&["inverse-blowup"], None))),
        ("g0-smoothness limits", Box::new(|| experiments(&["g0-smoothness"], None))),
        ("non-compactness witness", Box::new(|| experiments(&["noncompact-zeroset"], None))),
        (
            "branching zero set",
            Box::new(|| experiments(&["branching-zeroset", "transversality-witness"], None)),
        ),
        ("operator-norm dichotomy", Box::new(|| experiments(&["opnorm-dichotomy"], None))),
        ("basic-germ continuity", Box::new(|| experiments(&["germ-continuity"], None))),
        ("openness probe", Box::new(|| experiments(&["germ-openness"], None))),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "criterion {:>2} {:<32} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
