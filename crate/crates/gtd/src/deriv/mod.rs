//! Scalar-field jets: value, gradient, Hessian, and third derivatives.
//!
//! Every geometric quantity in this crate reduces to derivatives of a scalar
//! potential. Fields that can, supply analytic jets through [`Jet3`]
//! arithmetic; [`evaluate_jet`] falls back to central finite differences for
//! fields that cannot, and [`crosscheck_jet`] compares the two paths.

mod fd;
mod jet;

pub use fd::{fd_gradient, fd_hessian, fd_jet, fd_third, FdSteps};
pub use jet::{Jet3, Sym3};

use crate::error::{GtdError, Result};
use std::fmt;
use std::sync::Arc;

/// A scalar function of `n` real variables, optionally with analytic jets.
pub trait ScalarField: Send + Sync {
    /// Number of variables.
    fn dim(&self) -> usize;

    /// Function value at `x`.
    fn eval(&self, x: &[f64]) -> f64;

    /// Analytic jet at `x` when the field supplies closed-form derivatives.
    fn analytic_jet(&self, x: &[f64]) -> Option<Jet3> {
        let _ = x;
        None
    }
}

/// A field defined by an expression over [`Jet3`] values.
///
/// The same closure serves plain evaluation and analytic jets, so the two can
/// never drift apart.
#[derive(Clone)]
pub struct ExprField {
    n: usize,
    expr: Arc<dyn Fn(&[Jet3]) -> Jet3 + Send + Sync>,
}

impl ExprField {
    /// Build a field of `n` variables from a jet expression.
    pub fn new<F>(n: usize, expr: F) -> Self
    where
        F: Fn(&[Jet3]) -> Jet3 + Send + Sync + 'static,
    {
        ExprField { n, expr: Arc::new(expr) }
    }
}

impl fmt::Debug for ExprField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExprField").field("n", &self.n).finish()
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.expr)(&Jet3::variables(x)).value
    }

    fn analytic_jet(&self, x: &[f64]) -> Option<Jet3> {
        Some((self.expr)(&Jet3::variables(x)))
    }
}

/// Open-box domain with an optional extra guard predicate.
///
/// Membership requires every coordinate strictly inside its interval and the
/// guard (when present) to hold.
#[derive(Clone)]
pub struct Domain {
    intervals: Vec<(f64, f64)>,
    guard: Option<Arc<dyn Fn(&[f64]) -> bool + Send + Sync>>,
}

impl Domain {
    /// All of R^n.
    pub fn whole(n: usize) -> Self {
        Domain { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY); n], guard: None }
    }

    /// The open positive orthant.
    pub fn positive(n: usize) -> Self {
        Domain { intervals: vec![(0.0, f64::INFINITY); n], guard: None }
    }

    /// Explicit open intervals per coordinate.
    pub fn from_intervals(intervals: Vec<(f64, f64)>) -> Self {
        Domain { intervals, guard: None }
    }

    /// Attach a guard predicate that must hold in addition to the intervals.
    pub fn with_guard<F>(mut self, guard: F) -> Self
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(guard));
        self
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    /// Open interval for coordinate `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        self.intervals[i]
    }

    /// Strict membership test; non-finite points are always outside.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.intervals.len() {
            return false;
        }
        for (xi, (lo, hi)) in x.iter().zip(self.intervals.iter()) {
            if !xi.is_finite() || xi <= lo || xi >= hi {
                return false;
            }
        }
        match &self.guard {
            Some(g) => g(x),
            None => true,
        }
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("intervals", &self.intervals)
            .field("guard", &self.guard.is_some())
            .finish()
    }
}

fn check_order(order: u8) -> Result<()> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(GtdError::Param(format!("jet order must be 1, 2, or 3, got {order}")))
    }
}

fn check_finite(jet: &Jet3, what: &str) -> Result<()> {
    if jet.is_finite() {
        Ok(())
    } else {
        Err(GtdError::NonFinite(format!("derivatives of {what}")))
    }
}

/// Jet of `field` at `point` up to `order`.
///
/// Uses the analytic path when the field provides one, otherwise central
/// finite differences with one Richardson level ([`FdSteps::default`]).
/// Orders above the requested one are zeroed.
///
/// # Errors
/// `Param` for an invalid order, `NonFinite` when any derivative is NaN or
/// infinite.
pub fn evaluate_jet(field: &dyn ScalarField, point: &[f64], order: u8) -> Result<Jet3> {
    check_order(order)?;
    let jet = match field.analytic_jet(point) {
        Some(j) => j.truncated(order),
        None => evaluate_jet_fd(field, point, order, &FdSteps::default())?,
    };
    check_finite(&jet, "field")?;
    Ok(jet)
}

/// Finite-difference jet regardless of whether the field has analytic
/// derivatives; the test-suite oracle and the fallback path of
/// [`evaluate_jet`].
pub fn evaluate_jet_fd(
    field: &dyn ScalarField,
    point: &[f64],
    order: u8,
    steps: &FdSteps,
) -> Result<Jet3> {
    check_order(order)?;
    let f = |x: &[f64]| field.eval(x);
    let jet = fd_jet(&f, point, order, steps);
    check_finite(&jet, "finite-difference field")?;
    Ok(jet)
}

/// Maximum relative discrepancy between the analytic and finite-difference
/// jets of `field` at `point`, over all orders.
///
/// Each order is compared in the max norm, normalized by one plus the max
/// norm of the analytic tensor of that order.
///
/// # Errors
/// `Param` when the field has no analytic jet.
pub fn crosscheck_jet(field: &dyn ScalarField, point: &[f64]) -> Result<f64> {
    let analytic = field
        .analytic_jet(point)
        .ok_or_else(|| GtdError::Param("crosscheck_jet needs a field with analytic jets".into()))?;
    check_finite(&analytic, "analytic jet")?;
    let numeric = evaluate_jet_fd(field, point, 3, &FdSteps::default())?;

    let n = field.dim();
    let mut worst = (analytic.value - numeric.value).abs() / (1.0 + analytic.value.abs());

    let gdiff = (&analytic.grad - &numeric.grad).abs().max();
    worst = worst.max(gdiff / (1.0 + analytic.grad.abs().max()));

    let hdiff = (&analytic.hess - &numeric.hess).abs().max();
    worst = worst.max(hdiff / (1.0 + analytic.hess.abs().max()));

    let mut tdiff = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                tdiff = tdiff.max((analytic.third.get(i, j, k) - numeric.third.get(i, j, k)).abs());
            }
        }
    }
    worst = worst.max(tdiff / (1.0 + analytic.third.max_abs()));
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square_field() -> ExprField {
        ExprField::new(1, |z| z[0].powi(2))
    }

    fn entropy_like_field() -> ExprField {
        ExprField::new(2, |z| z[0].ln().scale(1.5) + z[1].ln())
    }

    #[test]
    fn evaluate_jet_square() {
        let f = square_field();
        let j = evaluate_jet(&f, &[2.0], 2).unwrap();
        assert_eq!(j.value, 4.0);
        assert_eq!(j.grad[0], 4.0);
        assert_eq!(j.hess[(0, 0)], 2.0);
        assert_eq!(j.third.get(0, 0, 0), 0.0);
    }

    #[test]
    fn evaluate_jet_entropy_gradient() {
        let f = entropy_like_field();
        let j = evaluate_jet(&f, &[1.0, 1.0], 1).unwrap();
        assert_eq!(j.value, 0.0);
        assert_relative_eq!(j.grad[0], 1.5, max_relative = 1e-15);
        assert_relative_eq!(j.grad[1], 1.0, max_relative = 1e-15);
        assert_eq!(j.hess[(0, 0)], 0.0, "order 1 leaves the Hessian zeroed");
    }

    #[test]
    fn crosscheck_quadratic_is_tight() {
        let f = square_field();
        assert!(crosscheck_jet(&f, &[3.0]).unwrap() < 1e-7);
    }

    #[test]
    fn crosscheck_entropy_form() {
        let f = entropy_like_field();
        assert!(crosscheck_jet(&f, &[2.0, 3.0]).unwrap() < 1e-6);
    }

    #[test]
    fn fd_fallback_used_without_analytic_path() {
        struct Opaque;
        impl ScalarField for Opaque {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> f64 {
                x[0].sin()
            }
        }
        let j = evaluate_jet(&Opaque, &[0.3], 3).unwrap();
        assert_relative_eq!(j.grad[0], 0.3f64.cos(), max_relative = 1e-9);
        assert_relative_eq!(j.hess[(0, 0)], -0.3f64.sin(), max_relative = 1e-7);
        assert_relative_eq!(j.third.get(0, 0, 0), -0.3f64.cos(), max_relative = 1e-6);
    }

    #[test]
    fn invalid_order_is_rejected() {
        let f = square_field();
        assert!(matches!(evaluate_jet(&f, &[1.0], 0), Err(GtdError::Param(_))));
        assert!(matches!(evaluate_jet(&f, &[1.0], 4), Err(GtdError::Param(_))));
    }

    #[test]
    fn nonfinite_jets_are_reported() {
        let f = ExprField::new(1, |z| z[0].ln());
        assert!(matches!(evaluate_jet(&f, &[-1.0], 3), Err(GtdError::NonFinite(_))));
    }

    #[test]
    fn domain_membership_is_strict_with_guard() {
        let d = Domain::from_intervals(vec![(f64::NEG_INFINITY, f64::INFINITY), (0.05, f64::INFINITY)])
            .with_guard(|x| x[0] + 0.1 / x[1] > 0.0);
        assert!(d.contains(&[1.0, 2.0]));
        assert!(!d.contains(&[1.0, 0.05]), "boundary is outside");
        assert!(!d.contains(&[-1.0, 2.0]), "guard rejects");
        assert!(!d.contains(&[f64::NAN, 2.0]));
        assert!(!d.contains(&[1.0]));
    }
}
