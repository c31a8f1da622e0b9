//! Acceptance criteria, one `criterion N ...: PASS|FAIL` line each, with
//! details on failure. Runs without the libtest harness so the lines are
//! never captured; the process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use isoineq::suite::{
    arccos_poincare_limit, ellipticity_certification, erti_cancellation, houdre_kagan_sandwich,
    inequality_outcome, pointwise_inequalities, reconstruction_oracle, semigroup_interpolation,
    verification_suite, CriterionOutcome, SuiteConfig,
};

fn judge(budget: Option<Duration>, run: impl FnOnce() -> CriterionOutcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = outcome.pass && in_time;
    let budget_text = budget.map_or(String::new(), |b| {
        format!(" (budget {:.0} s)", b.as_secs_f64())
    });
    println!(
        "criterion {} [PRIMARY] {}: {} in {:.2} s{budget_text}",
        outcome.id,
        outcome.title,
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    if !in_time {
        println!("    exceeded the runtime budget");
    }
    if !outcome.pass {
        for line in &outcome.details {
            println!("    {line}");
        }
    }
    pass
}

fn main() -> ExitCode {
    let seed = SuiteConfig::default().seed;
    let results = [
        judge(Some(Duration::from_secs(5)), || {
            ellipticity_certification(1e-9)
        }),
        judge(Some(Duration::from_secs(10)), reconstruction_oracle),
        judge(Some(Duration::from_secs(60)), || {
            match verification_suite(&SuiteConfig::default()) {
                Ok(suite) => inequality_outcome(&suite),
                Err(e) => CriterionOutcome {
                    id: 3,
                    title: "inequality suite".into(),
                    pass: false,
                    details: vec![e.to_string()],
                },
            }
        }),
        judge(Some(Duration::from_secs(30)), || {
            semigroup_interpolation(64)
        }),
        judge(None, || houdre_kagan_sandwich(64)),
        judge(None, || erti_cancellation(seed)),
        judge(None, pointwise_inequalities),
        judge(None, arccos_poincare_limit),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
