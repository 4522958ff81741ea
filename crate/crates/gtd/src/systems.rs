//! Catalog of fundamental equations and thermodynamic-law checks.
//!
//! A fundamental equation gives one potential (internal energy or entropy) as
//! a function of the extensive coordinates; everything else in the crate
//! derives from its jets. The catalog covers the ideal gas, the van der Waals
//! gas, a generalized ideal gas, power-law and logarithmic families, and
//! separable sums of one-variable parts. User systems plug in through the
//! same type.

use crate::deriv::{evaluate_jet, Domain, ExprField, Jet3, ScalarField};
use crate::error::{GtdError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Which variable plays the potential role.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Potential U as a function of (S, V, ...); convex for stable systems.
    Energy,
    /// Potential S as a function of (U, V, ...); concave for stable systems.
    Entropy,
}

/// One thermodynamic system: a potential with domain, parameters, and metadata.
#[derive(Clone)]
pub struct FundamentalEquation {
    name: String,
    representation: Representation,
    coords: Vec<String>,
    params: BTreeMap<String, f64>,
    homogeneity_degree: Option<f64>,
    potential: Arc<dyn ScalarField>,
    domain: Domain,
}

impl std::fmt::Debug for FundamentalEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FundamentalEquation")
            .field("name", &self.name)
            .field("representation", &self.representation)
            .field("coords", &self.coords)
            .field("params", &self.params)
            .field("homogeneity_degree", &self.homogeneity_degree)
            .finish()
    }
}

impl FundamentalEquation {
    /// Assemble a system from parts; the catalog constructors below cover the
    /// built-in families.
    pub fn new(
        name: impl Into<String>,
        representation: Representation,
        coords: Vec<String>,
        params: BTreeMap<String, f64>,
        potential: Arc<dyn ScalarField>,
        domain: Domain,
    ) -> Result<Self> {
        let coords_n = coords.len();
        if coords_n == 0 {
            return Err(GtdError::Param("a system needs at least one coordinate".into()));
        }
        if potential.dim() != coords_n || domain.dim() != coords_n {
            return Err(GtdError::Param(format!(
                "coordinate count mismatch: {} names, potential dim {}, domain dim {}",
                coords_n,
                potential.dim(),
                domain.dim()
            )));
        }
        Ok(FundamentalEquation {
            name: name.into(),
            representation,
            coords,
            params,
            homogeneity_degree: None,
            potential,
            domain,
        })
    }

    /// Set the degree used by [`check_euler`].
    pub fn with_homogeneity_degree(mut self, beta: f64) -> Self {
        self.homogeneity_degree = Some(beta);
        self
    }

    /// Catalog name, e.g. `"ideal-gas"`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Energy or entropy representation.
    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Number of degrees of freedom.
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate names in order.
    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    /// Named parameters.
    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Homogeneity degree when declared.
    pub fn homogeneity_degree(&self) -> Option<f64> {
        self.homogeneity_degree
    }

    /// The potential as a scalar field.
    pub fn potential(&self) -> &dyn ScalarField {
        self.potential.as_ref()
    }

    /// Domain of validity.
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Error unless `e` lies strictly inside the domain.
    pub fn check_domain(&self, e: &[f64]) -> Result<()> {
        if self.domain.contains(e) {
            Ok(())
        } else {
            Err(GtdError::Domain(format!("{:?} for system {}", e, self.name)))
        }
    }

    /// Potential value at `e`.
    ///
    /// # Errors
    /// `Domain` outside the declared domain.
    pub fn value(&self, e: &[f64]) -> Result<f64> {
        self.check_domain(e)?;
        let v = self.potential.eval(e);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GtdError::NonFinite(format!("potential of {} at {:?}", self.name, e)))
        }
    }

    /// Jet of the potential at `e` up to `order`.
    ///
    /// # Errors
    /// `Domain` outside the declared domain; `NonFinite` on bad derivatives.
    pub fn jet(&self, e: &[f64], order: u8) -> Result<Jet3> {
        self.check_domain(e)?;
        evaluate_jet(self.potential.as_ref(), e, order)
    }

    /// The same system in the other representation, for the families that
    /// store one (ideal gas and generalized ideal gas).
    pub fn twin(&self) -> Option<FundamentalEquation> {
        let kappa = *self.params.get("kappa")?;
        match self.name.as_str() {
            "ideal-gas" => catalog_ideal_gas_energy(kappa).ok(),
            "ideal-gas-energy" => catalog_ideal_gas(kappa).ok(),
            "gen-ideal" => catalog_gen_ideal_energy(kappa, *self.params.get("c")?).ok(),
            "gen-ideal-energy" => catalog_gen_ideal(kappa, *self.params.get("c")?).ok(),
            _ => None,
        }
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GtdError::Param(format!("{name} must be positive, got {v}")))
    }
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GtdError::Param(format!("{name} must be nonnegative, got {v}")))
    }
}

fn params_of(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Monatomic ideal gas in entropy form: S(U, V) = (3 kappa / 2) ln U + kappa ln V.
///
/// Built as the a = b = 0 case of [`catalog_vdw`] so the reduction is exact to
/// the bit. The energy-form twin is available through
/// [`FundamentalEquation::twin`].
///
/// # Errors
/// `Param` unless kappa > 0.
pub fn catalog_ideal_gas(kappa: f64) -> Result<FundamentalEquation> {
    require_positive("kappa", kappa)?;
    let mut eq = catalog_vdw(kappa, 0.0, 0.0)?;
    eq.name = "ideal-gas".into();
    eq.params = params_of(&[("kappa", kappa)]);
    Ok(eq)
}

/// Monatomic ideal gas in energy form: U(S, V) = exp(2S / 3 kappa) V^(-2/3).
///
/// # Errors
/// `Param` unless kappa > 0.
pub fn catalog_ideal_gas_energy(kappa: f64) -> Result<FundamentalEquation> {
    require_positive("kappa", kappa)?;
    let mut eq = catalog_gen_ideal_energy(kappa, 1.0)?;
    eq.name = "ideal-gas-energy".into();
    eq.params = params_of(&[("kappa", kappa)]);
    Ok(eq)
}

/// Van der Waals gas: S(U, V) = (3 kappa / 2) ln(U + a/V) + kappa ln(V - b),
/// on V > b with U + a/V > 0.
///
/// # Errors
/// `Param` unless kappa > 0, a >= 0, b >= 0.
pub fn catalog_vdw(kappa: f64, a: f64, b: f64) -> Result<FundamentalEquation> {
    require_positive("kappa", kappa)?;
    require_nonnegative("a", a)?;
    require_nonnegative("b", b)?;
    let field = ExprField::new(2, move |z| {
        let inner = &z[0] + z[1].recip().scale(a);
        inner.ln().scale(1.5 * kappa) + (&z[1] - b).ln().scale(kappa)
    });
    let domain = Domain::from_intervals(vec![(f64::NEG_INFINITY, f64::INFINITY), (b, f64::INFINITY)])
        .with_guard(move |x| x[0] + a / x[1] > 0.0);
    FundamentalEquation::new(
        "vdw",
        Representation::Entropy,
        vec!["U".into(), "V".into()],
        params_of(&[("kappa", kappa), ("a", a), ("b", b)]),
        Arc::new(field),
        domain,
    )
}

/// Generalized ideal gas: S(U, V) = (3 kappa / 2) ln U + kappa c ln V.
///
/// c = 1 reduces to the ideal gas. The energy-form twin is available through
/// [`FundamentalEquation::twin`].
///
/// # Errors
/// `Param` unless kappa > 0 and c is finite.
pub fn catalog_gen_ideal(kappa: f64, c: f64) -> Result<FundamentalEquation> {
    require_positive("kappa", kappa)?;
    if !c.is_finite() {
        return Err(GtdError::Param(format!("c must be finite, got {c}")));
    }
    let field = ExprField::new(2, move |z| z[0].ln().scale(1.5 * kappa) + z[1].ln().scale(kappa * c));
    FundamentalEquation::new(
        "gen-ideal",
        Representation::Entropy,
        vec!["U".into(), "V".into()],
        params_of(&[("kappa", kappa), ("c", c)]),
        Arc::new(field),
        Domain::positive(2),
    )
}

/// Generalized ideal gas in energy form: U(S, V) = exp(2S / 3 kappa) V^(-2c/3).
///
/// # Errors
/// `Param` unless kappa > 0 and c is finite.
pub fn catalog_gen_ideal_energy(kappa: f64, c: f64) -> Result<FundamentalEquation> {
    require_positive("kappa", kappa)?;
    if !c.is_finite() {
        return Err(GtdError::Param(format!("c must be finite, got {c}")));
    }
    let field = ExprField::new(2, move |z| {
        z[0].scale(2.0 / (3.0 * kappa)).exp() * z[1].powf(-2.0 * c / 3.0)
    });
    let domain =
        Domain::from_intervals(vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY)]);
    FundamentalEquation::new(
        "gen-ideal-energy",
        Representation::Energy,
        vec!["S".into(), "V".into()],
        params_of(&[("kappa", kappa), ("c", c)]),
        Arc::new(field),
        domain,
    )
}

/// Selects one of the two closed families of [`catalog_power_log`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerLogKind {
    /// S = S0 U^alpha V^beta.
    Power,
    /// S = S0 ln(U^alpha + c V^beta).
    Log,
}

/// Power family S = S0 U^alpha V^beta, or log family S = S0 ln(U^alpha + c V^beta).
///
/// The power family is homogeneous of degree alpha + beta and has that degree
/// pre-set for [`check_euler`]; the log family is not homogeneous and has none.
///
/// # Errors
/// `Param` unless S0 != 0 and all parameters are finite.
pub fn catalog_power_log(
    kind: PowerLogKind,
    s0: f64,
    alpha: f64,
    beta: f64,
    c: f64,
) -> Result<FundamentalEquation> {
    for (name, v) in [("S0", s0), ("alpha", alpha), ("beta", beta), ("c", c)] {
        if !v.is_finite() {
            return Err(GtdError::Param(format!("{name} must be finite, got {v}")));
        }
    }
    if s0 == 0.0 {
        return Err(GtdError::Param("S0 must be nonzero".into()));
    }
    match kind {
        PowerLogKind::Power => {
            let field =
                ExprField::new(2, move |z| (z[0].powf(alpha) * z[1].powf(beta)).scale(s0));
            Ok(FundamentalEquation::new(
                "power",
                Representation::Entropy,
                vec!["U".into(), "V".into()],
                params_of(&[("S0", s0), ("alpha", alpha), ("beta", beta)]),
                Arc::new(field),
                Domain::positive(2),
            )?
            .with_homogeneity_degree(alpha + beta))
        }
        PowerLogKind::Log => {
            let field = ExprField::new(2, move |z| {
                (z[0].powf(alpha) + z[1].powf(beta).scale(c)).ln().scale(s0)
            });
            let domain = Domain::positive(2)
                .with_guard(move |x| x[0].powf(alpha) + c * x[1].powf(beta) > 0.0);
            FundamentalEquation::new(
                "log",
                Representation::Entropy,
                vec!["U".into(), "V".into()],
                params_of(&[("S0", s0), ("alpha", alpha), ("beta", beta), ("c", c)]),
                Arc::new(field),
                domain,
            )
        }
    }
}

/// One summand of a separable system: a smooth function of a single coordinate
/// on an open interval.
#[derive(Clone)]
pub struct Part1D {
    name: String,
    interval: (f64, f64),
    f: Arc<dyn Fn(&Jet3) -> Jet3 + Send + Sync>,
}

impl Part1D {
    /// Arbitrary smooth part from a jet expression.
    pub fn custom<F>(name: impl Into<String>, interval: (f64, f64), f: F) -> Self
    where
        F: Fn(&Jet3) -> Jet3 + Send + Sync + 'static,
    {
        Part1D { name: name.into(), interval, f: Arc::new(f) }
    }

    /// weight * ln(x) on x > 0.
    pub fn log_term(name: impl Into<String>, weight: f64) -> Self {
        Part1D::custom(name, (0.0, f64::INFINITY), move |x| x.ln().scale(weight))
    }

    /// slope * x on the whole line.
    pub fn linear(name: impl Into<String>, slope: f64) -> Self {
        Part1D::custom(name, (f64::NEG_INFINITY, f64::INFINITY), move |x| x.scale(slope))
    }

    /// coef * x^expo on x > 0.
    pub fn power(name: impl Into<String>, coef: f64, expo: f64) -> Self {
        Part1D::custom(name, (0.0, f64::INFINITY), move |x| x.powf(expo).scale(coef))
    }
}

/// Separable system S(E) = sum of the parts, one per coordinate.
///
/// # Errors
/// `Param` on an empty part list.
pub fn catalog_separable(parts: Vec<Part1D>) -> Result<FundamentalEquation> {
    if parts.is_empty() {
        return Err(GtdError::Param("separable system needs at least one part".into()));
    }
    let n = parts.len();
    let coords: Vec<String> = parts.iter().map(|p| p.name.clone()).collect();
    let intervals: Vec<(f64, f64)> = parts.iter().map(|p| p.interval).collect();
    let fs: Vec<Arc<dyn Fn(&Jet3) -> Jet3 + Send + Sync>> =
        parts.iter().map(|p| p.f.clone()).collect();
    let field = ExprField::new(n, move |z| {
        let mut acc = (fs[0])(&z[0]);
        for i in 1..n {
            acc = acc + (fs[i])(&z[i]);
        }
        acc
    });
    FundamentalEquation::new(
        "separable",
        Representation::Entropy,
        coords,
        BTreeMap::new(),
        Arc::new(field),
        Domain::from_intervals(intervals),
    )
}

/// Result of [`check_second_law`]: definiteness verdict plus the Hessian spectrum.
#[derive(Clone, Debug)]
pub struct SecondLawReport {
    /// True when the Hessian has the sign required by the representation.
    pub ok: bool,
    /// Hessian eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
}

/// Stability check at `e`: the potential Hessian must be positive
/// semidefinite in the energy representation and negative semidefinite in the
/// entropy representation.
///
/// # Errors
/// `Domain` outside the system domain.
pub fn check_second_law(eq: &FundamentalEquation, e: &[f64]) -> Result<SecondLawReport> {
    let jet = eq.jet(e, 2)?;
    let eig = nalgebra::SymmetricEigen::new(jet.hess.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let scale = 1.0 + jet.hess.abs().max();
    let tol = 1e-9 * scale;
    let ok = match eq.representation() {
        Representation::Energy => eigenvalues.iter().all(|l| *l >= -tol),
        Representation::Entropy => eigenvalues.iter().all(|l| *l <= tol),
    };
    Ok(SecondLawReport { ok, eigenvalues })
}

/// Residual of the homogeneity identity: degree * potential - E^a dPotential/dE^a.
///
/// Zero (up to roundoff) exactly when the potential is homogeneous of the
/// declared degree.
///
/// # Errors
/// `MissingDegree` when no degree is declared; `Domain` outside the domain.
pub fn check_euler(eq: &FundamentalEquation, e: &[f64]) -> Result<f64> {
    let beta = eq.homogeneity_degree().ok_or(GtdError::MissingDegree)?;
    let jet = eq.jet(e, 1)?;
    let mut r = beta * jet.value;
    for (a, ea) in e.iter().enumerate() {
        r -= ea * jet.grad[a];
    }
    Ok(r)
}

/// Conjugate intensive values I_a = dPotential/dE^a with physical labels.
#[derive(Clone, Debug)]
pub struct EquationsOfState {
    /// Intensive values in coordinate order.
    pub values: Vec<f64>,
    /// Physical label per entry, e.g. `T` and `-P` in the energy
    /// representation or `1/T` and `P/T` in the entropy representation.
    pub labels: Vec<String>,
}

fn intensive_label(rep: Representation, coord: &str) -> String {
    match rep {
        Representation::Energy => match coord {
            "S" => "T".into(),
            "V" => "-P".into(),
            c if c.starts_with('N') => format!("mu_{}", &c[1..]),
            c => format!("I({c})"),
        },
        Representation::Entropy => match coord {
            "U" => "1/T".into(),
            "V" => "P/T".into(),
            c => format!("I({c})"),
        },
    }
}

/// Equations of state at `e`: the gradient of the potential, labeled by
/// representation.
///
/// # Errors
/// `Domain` outside the system domain.
pub fn equations_of_state(eq: &FundamentalEquation, e: &[f64]) -> Result<EquationsOfState> {
    let jet = eq.jet(e, 1)?;
    let values: Vec<f64> = jet.grad.iter().copied().collect();
    let labels =
        eq.coords().iter().map(|c| intensive_label(eq.representation(), c)).collect();
    Ok(EquationsOfState { values, labels })
}

/// Hessian of the potential at `e`, a convenience over [`FundamentalEquation::jet`].
pub fn potential_hessian(eq: &FundamentalEquation, e: &[f64]) -> Result<DMatrix<f64>> {
    Ok(eq.jet(e, 2)?.hess)
}
