//! Human-readable tables, written to stderr under `--pretty`.

use crate::commands::{ChannelReport, QecReport, UsdReport};
use crate::exec::ResultReport;
use crate::plan::ValidationSummary;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

pub fn run_report(r: &ResultReport) {
    eprintln!("{} qubits, mode {}", r.qubits, r.mode);
    for s in &r.stages {
        if s.outcomes.is_empty() {
            eprintln!("[{}] {}", s.stage, s.kind);
            continue;
        }
        let flag = if s.diverged { "  DIVERGED" } else { "" };
        eprintln!("[{}] {}{flag}", s.stage, s.kind);
        eprintln!("  {:>10} {:>12} {:>12} {:>10}", "outcome", "exact", "sampled", "count");
        for o in &s.outcomes {
            let count = o.count.map_or_else(|| "-".into(), |c| c.to_string());
            eprintln!(
                "  {:>10} {:>12} {:>12} {:>10}",
                o.label,
                opt(o.probability),
                opt(o.frequency),
                count
            );
        }
        if let Some(e) = &s.expectation {
            eprintln!(
                "  <{}> exact {} sampled {} +/- {}",
                e.observable,
                opt(e.exact),
                opt(e.estimate),
                opt(e.standard_error)
            );
        }
    }
    if let Some(f) = &r.final_state {
        eprintln!("final purity {:.6}", f.purity);
    }
}

pub fn validation(v: &ValidationSummary) {
    for c in &v.checks {
        let devs: Vec<String> = c.deviations.iter().map(|(k, d)| format!("{k} {d:.2e}")).collect();
        let status = if c.failures.is_empty() { "ok" } else { "FAIL" };
        eprintln!("{:<12} {:<14} {:<5} {}", c.stage, c.kind, status, devs.join(", "));
    }
}

pub fn qec(r: &QecReport) {
    eprintln!("{:<8} {:>8} {:>12} {:>12}", "error", "syndrome", "projective", "circuit");
    for row in &r.table {
        eprintln!(
            "{:<8} {:>8} {:>12.10} {:>12.10}",
            row.error, row.syndrome, row.fidelity_projective, row.fidelity_circuit
        );
    }
    for m in &r.monte_carlo {
        eprintln!(
            "p = {:<8} logical error rate {:.5} +/- {:.5} (predicted {:.5})",
            m.p, m.logical_error_rate, m.standard_error, m.predicted
        );
    }
}

pub fn usd(r: &UsdReport) {
    eprintln!("overlap {:.6}, predicted {:?}", r.overlap, r.predicted);
    run_report(&r.result);
}

pub fn channel(r: &ChannelReport) {
    eprintln!("output density (purity {:.6})", r.purity);
    eprint!("{}", r.output);
}
