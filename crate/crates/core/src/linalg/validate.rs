use std::fmt;

use serde::Serialize;

use super::eigen::min_eigenvalue;
use super::matrix::{ComplexMatrix, ONE};

/// Default tolerance for structural checks.
pub const STRUCTURAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationKind {
    Unitary,
    Hermitian,
    Psd,
    Projector,
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Square,
    Unitary,
    Hermitian,
    Idempotent,
    Psd,
    Trace,
    Completeness,
    Orthogonality,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationFailure {
    pub predicate: Predicate,
    pub deviation: f64,
}

/// Outcome of a structural check; passing reports carry no failures.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn deviation(&self, predicate: Predicate) -> Option<f64> {
        self.failures
            .iter()
            .find(|f| f.predicate == predicate)
            .map(|f| f.deviation)
    }

    /// Records a failure when `deviation > tol`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&mut self, predicate: Predicate, deviation: f64, tol: f64) {
        // NaN fails too
        if !(deviation <= tol) {
            self.failures.push(ValidationFailure {
                predicate,
                deviation,
            });
        }
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.failures.extend(other.failures);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("pass");
        }
        let parts: Vec<String> = self
            .failures
            .iter()
            .map(|x| format!("{:?} deviation {:.3e}", x.predicate, x.deviation))
            .collect();
        write!(f, "fail: {}", parts.join("; "))
    }
}

pub fn unitary_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (&m.dagger() * m).max_abs_diff(&ComplexMatrix::identity(m.rows()))
}

/// Checks `m` against the predicates implied by `kind`.
pub fn validate(m: &ComplexMatrix, kind: ValidationKind, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !m.is_square() {
        report.check(Predicate::Square, m.rows().abs_diff(m.cols()) as f64, 0.0);
        return report;
    }
    match kind {
        ValidationKind::Unitary => {
            report.check(Predicate::Unitary, unitary_deviation(m), tol);
        }
        ValidationKind::Hermitian => {
            report.check(Predicate::Hermitian, m.hermitian_deviation(), tol);
        }
        ValidationKind::Psd => {
            report.check(Predicate::Hermitian, m.hermitian_deviation(), tol);
            report.check(Predicate::Psd, psd_deviation(m), tol);
        }
        ValidationKind::Projector => {
            report.check(Predicate::Hermitian, m.hermitian_deviation(), tol);
            report.check(Predicate::Idempotent, (m * m).max_abs_diff(m), tol);
        }
        ValidationKind::Density => {
            report.check(Predicate::Hermitian, m.hermitian_deviation(), tol);
            report.check(Predicate::Psd, psd_deviation(m), tol);
            let tr = m.trace().expect("square");
            report.check(Predicate::Trace, (tr - ONE).norm(), tol);
        }
    }
    report
}

/// `max(0, -λ_min)` of the Hermitian part.
pub fn psd_deviation(m: &ComplexMatrix) -> f64 {
    match min_eigenvalue(m) {
        Ok(l) => (-l).max(0.0),
        Err(_) => f64::INFINITY,
    }
}
