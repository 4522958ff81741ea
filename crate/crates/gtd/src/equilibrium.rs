//! The equilibrium manifold: the image of E -> (Phi(E), E, dPhi(E)) inside
//! phase space, the metric it inherits, and its curvature.
//!
//! The induced metric is available through two independent routes, a direct
//! pullback through the embedding Jacobian and a closed form in the potential
//! Hessian; their agreement is a strong end-to-end check and both are exposed.

use crate::deriv::FdSteps;
use crate::error::{GtdError, Result};
use crate::phasespace::{PhaseMetricSpec, PhasePoint};
use crate::systems::FundamentalEquation;
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// Lift an equilibrium state E to its phase-space image
/// Z = (Phi(E), E, dPhi(E)).
///
/// # Errors
/// `Domain` when E lies outside the equation's domain; `NonFinite` when the
/// potential or its gradient fail to evaluate.
pub fn embed(eq: &FundamentalEquation, e: &[f64]) -> Result<PhasePoint> {
    eq.check_domain(e)?;
    let jet = eq.jet(e, 1)?;
    let n = eq.n();
    let mut z = Vec::with_capacity(2 * n + 1);
    z.push(jet.value);
    z.extend_from_slice(e);
    for a in 0..n {
        z.push(jet.grad[a]);
    }
    PhasePoint::new(eq.representation(), z)
}

/// First and second derivatives of every phase coordinate of the embedding
/// with respect to the equilibrium coordinates.
#[derive(Clone, Debug)]
pub struct EmbeddingJets {
    /// Embedded point, length 2n+1.
    pub z: DVector<f64>,
    /// Jacobian dZ^A/dE^a, (2n+1) by n.
    pub jac: DMatrix<f64>,
    /// Hessians d2 Z^A / dE^a dE^b, one n-by-n matrix per phase coordinate.
    pub hess: Vec<DMatrix<f64>>,
}

/// Embedding derivatives through second order, from one third-order jet of
/// the potential.
pub fn embedding_jets(eq: &FundamentalEquation, e: &[f64]) -> Result<EmbeddingJets> {
    eq.check_domain(e)?;
    let jet = eq.jet(e, 3)?;
    let n = eq.n();
    let dim = 2 * n + 1;
    let mut z = DVector::zeros(dim);
    let mut jac = DMatrix::zeros(dim, n);
    let mut hess = Vec::with_capacity(dim);

    z[0] = jet.value;
    for a in 0..n {
        jac[(0, a)] = jet.grad[a];
    }
    hess.push(jet.hess.clone());

    for b in 0..n {
        z[1 + b] = e[b];
        jac[(1 + b, b)] = 1.0;
        hess.push(DMatrix::zeros(n, n));
    }

    for b in 0..n {
        z[1 + n + b] = jet.grad[b];
        let mut h = DMatrix::zeros(n, n);
        for a in 0..n {
            jac[(1 + n + b, a)] = jet.hess[(b, a)];
            for c in 0..n {
                h[(a, c)] = jet.third.get(b, a, c);
            }
        }
        hess.push(h);
    }

    Ok(EmbeddingJets { z, jac, hess })
}

fn spec_matches(spec: &PhaseMetricSpec, eq: &FundamentalEquation) -> Result<()> {
    if spec.representation != eq.representation() {
        return Err(GtdError::Param(format!(
            "metric is declared in the {:?} representation but the equation {:?} uses {:?}",
            spec.representation,
            eq.name(),
            eq.representation()
        )));
    }
    Ok(())
}

/// Induced metric by direct pullback: J^T G(Z(E)) J with the full phase-space
/// metric and the embedding Jacobian.
///
/// # Errors
/// Domain and singularity errors from the embedding and from the phase-space
/// metric at the image point.
pub fn pullback_metric(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    e: &[f64],
) -> Result<DMatrix<f64>> {
    spec_matches(spec, eq)?;
    let jets = embedding_jets(eq, e)?;
    let zp = PhasePoint { z: jets.z.clone(), representation: eq.representation() };
    let g = crate::phasespace::metric_g(spec, &zp)?;
    Ok(jets.jac.transpose() * g * &jets.jac)
}

fn conformal_weights(
    spec: &PhaseMetricSpec,
    e: &[f64],
    grad: &DVector<f64>,
) -> Result<Vec<f64>> {
    let m = spec.exponent();
    let mut q = Vec::with_capacity(e.len());
    for a in 0..e.len() {
        let p = e[a] * grad[a];
        if m < 0 && p == 0.0 {
            return Err(GtdError::SingularProduct { index: a + 1 });
        }
        q.push(p.powi(m));
    }
    Ok(q)
}

/// Induced metric in closed form:
/// g_ab = (q_a + q_b)/2 * Lambda * Phi_ab with q_a = (E^a Phi_a)^(2k+1).
///
/// Agrees with [`pullback_metric`] identically; the contact part of the
/// phase metric pulls back to zero on the equilibrium manifold.
pub fn closed_form_metric(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    e: &[f64],
) -> Result<DMatrix<f64>> {
    let (g, _) = closed_form_metric_with_partials(spec, eq, e, false)?;
    Ok(g)
}

/// Closed-form induced metric and, when requested, its analytic coordinate
/// partials d g_ab / d E^c assembled from the third-order jet of the
/// potential.
pub fn closed_form_metric_with_partials(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    e: &[f64],
    with_partials: bool,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    spec_matches(spec, eq)?;
    eq.check_domain(e)?;
    let n = eq.n();
    let jet = eq.jet(e, 3)?;
    let q = conformal_weights(spec, e, &jet.grad)?;

    // Lambda and its chain-rule derivative along the embedding.
    let zp = embed(eq, e)?;
    let zs: Vec<f64> = zp.z.iter().copied().collect();
    let lam = spec.lambda.value(&zs);
    if lam == 0.0 || !lam.is_finite() {
        return Err(GtdError::DegenerateMetric(format!("Lambda = {lam} on the manifold")));
    }

    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            g[(a, b)] = 0.5 * (q[a] + q[b]) * lam * jet.hess[(a, b)];
        }
    }
    if !g.iter().all(|v| v.is_finite()) {
        return Err(GtdError::NonFinite("induced metric entries".into()));
    }

    let mut partials = Vec::new();
    if with_partials {
        let m = spec.exponent();
        // dq_a/dE^c = (2k+1) (E^a Phi_a)^(2k) (delta_ac Phi_a + E^a Phi_ac)
        let mut dq = DMatrix::zeros(n, n);
        for a in 0..n {
            let p = e[a] * jet.grad[a];
            for c in 0..n {
                let dp = if a == c { jet.grad[a] } else { 0.0 } + e[a] * jet.hess[(a, c)];
                dq[(a, c)] = f64::from(m) * p.powi(m - 1) * dp;
            }
        }
        // dLambda/dE^c through the embedding Jacobian for a custom field.
        let dlam_e: DVector<f64> = match &spec.lambda {
            crate::phasespace::LambdaField::Constant(_) => DVector::zeros(n),
            custom => spec_grad_along_embedding(custom, &zs, eq, e)?,
        };
        for c in 0..n {
            let mut d = DMatrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    d[(a, b)] = 0.5 * (dq[(a, c)] + dq[(b, c)]) * lam * jet.hess[(a, b)]
                        + 0.5
                            * (q[a] + q[b])
                            * (dlam_e[c] * jet.hess[(a, b)] + lam * jet.third.get(a, b, c));
                }
            }
            partials.push(d);
        }
    }
    Ok((g, partials))
}

fn spec_grad_along_embedding(
    lambda: &crate::phasespace::LambdaField,
    zs: &[f64],
    eq: &FundamentalEquation,
    e: &[f64],
) -> Result<DVector<f64>> {
    let dz = lambda.gradient(zs)?;
    let jets = embedding_jets(eq, e)?;
    Ok(jets.jac.transpose() * dz)
}

/// How a metric field was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Pullback of the phase-space metric through the embedding.
    Pullback,
    /// Closed-form induced metric.
    ClosedForm,
    /// Supplied by the caller.
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Pullback => write!(f, "pullback"),
            Provenance::ClosedForm => write!(f, "closed-form"),
            Provenance::User => write!(f, "user"),
        }
    }
}

type CompFn = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync;
type DerivFn = dyn Fn(&[f64]) -> Result<Vec<DMatrix<f64>>> + Send + Sync;

/// A Riemannian metric on an n-dimensional chart: a component evaluator, a
/// derivative evaluator, and the provenance of both.
#[derive(Clone)]
pub struct MetricField {
    dimension: usize,
    provenance: Provenance,
    comp: Arc<CompFn>,
    deriv: Arc<DerivFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dimension", &self.dimension)
            .field("provenance", &self.provenance)
            .finish()
    }
}

fn fd_matrix_derivatives(
    comp: &Arc<CompFn>,
    e: &[f64],
    step: f64,
) -> Result<Vec<DMatrix<f64>>> {
    let n = e.len();
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let h = step * e[c].abs().max(1.0);
        let diff = |s: f64| -> Result<DMatrix<f64>> {
            let mut ep = e.to_vec();
            ep[c] += s;
            let mut em = e.to_vec();
            em[c] -= s;
            Ok((comp(&ep)? - comp(&em)?) / (2.0 * s))
        };
        let full = diff(h)?;
        let half = diff(h / 2.0)?;
        out.push((half * 4.0 - full) / 3.0);
    }
    Ok(out)
}

impl MetricField {
    /// The induced metric of `(spec, eq)` in closed form with analytic
    /// derivatives. The preferred field for curvature and geodesics.
    pub fn induced(spec: &PhaseMetricSpec, eq: &FundamentalEquation) -> Result<Self> {
        spec_matches(spec, eq)?;
        let n = eq.n();
        let (s1, e1) = (spec.clone(), eq.clone());
        let (s2, e2) = (spec.clone(), eq.clone());
        Ok(MetricField {
            dimension: n,
            provenance: Provenance::ClosedForm,
            comp: Arc::new(move |e| closed_form_metric(&s1, &e1, e)),
            deriv: Arc::new(move |e| {
                closed_form_metric_with_partials(&s2, &e2, e, true).map(|(_, d)| d)
            }),
        })
    }

    /// The induced metric evaluated by pullback, with finite-difference
    /// derivatives. Slower and less accurate than [`MetricField::induced`];
    /// kept as an independent route for cross-checks.
    pub fn from_pullback(spec: &PhaseMetricSpec, eq: &FundamentalEquation) -> Result<Self> {
        spec_matches(spec, eq)?;
        let n = eq.n();
        let (s1, e1) = (spec.clone(), eq.clone());
        let comp: Arc<CompFn> = Arc::new(move |e| pullback_metric(&s1, &e1, e));
        let comp_for_deriv = comp.clone();
        let step = FdSteps::default().grad;
        Ok(MetricField {
            dimension: n,
            provenance: Provenance::Pullback,
            comp,
            deriv: Arc::new(move |e| fd_matrix_derivatives(&comp_for_deriv, e, step)),
        })
    }

    /// A caller-supplied metric with finite-difference derivatives.
    pub fn from_fn<F>(dimension: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        let comp: Arc<CompFn> = Arc::new(f);
        let comp_for_deriv = comp.clone();
        let step = FdSteps::default().grad;
        MetricField {
            dimension,
            provenance: Provenance::User,
            comp,
            deriv: Arc::new(move |e| fd_matrix_derivatives(&comp_for_deriv, e, step)),
        }
    }

    /// A constant metric; derivatives vanish identically.
    pub fn constant(g: DMatrix<f64>) -> Self {
        let n = g.nrows();
        let comp: Arc<CompFn> = Arc::new(move |_| Ok(g.clone()));
        MetricField {
            dimension: n,
            provenance: Provenance::User,
            comp,
            deriv: Arc::new(move |_| Ok(vec![DMatrix::zeros(n, n); n])),
        }
    }

    /// Chart dimension n.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// How the field was built.
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Metric components at `e`.
    pub fn components(&self, e: &[f64]) -> Result<DMatrix<f64>> {
        if e.len() != self.dimension {
            return Err(GtdError::Param(format!(
                "metric field of dimension {} evaluated at a point of length {}",
                self.dimension,
                e.len()
            )));
        }
        (self.comp)(e)
    }

    /// Coordinate partials of the components at `e`, one matrix per
    /// direction.
    pub fn derivatives(&self, e: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        if e.len() != self.dimension {
            return Err(GtdError::Param(format!(
                "metric field of dimension {} differentiated at a point of length {}",
                self.dimension,
                e.len()
            )));
        }
        (self.deriv)(e)
    }
}

/// Christoffel symbols of a metric field at `e`, one matrix per upper index,
/// symmetric in the lower pair.
///
/// # Errors
/// `DegenerateMetric` when the metric cannot be inverted at `e`.
pub fn christoffel(field: &MetricField, e: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let g = field.components(e)?;
    let dg = field.derivatives(e)?;
    let n = field.dimension();
    let ginv = g
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("induced metric not invertible".into()))?;
    let mut gamma = Vec::with_capacity(n);
    for a in 0..n {
        let mut m = DMatrix::zeros(n, n);
        for b in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                m[(b, c)] = 0.5 * s;
            }
        }
        gamma.push(m);
    }
    Ok(gamma)
}

/// Curvature data of a metric field at one point.
///
/// Index conventions: `riemann(a, b, c, d)` is R^a_bcd =
/// d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db minus
/// Gamma^a_de Gamma^e_cb; the Ricci tensor contracts the first and third
/// slots, and the scalar contracts Ricci with the inverse metric.
///
/// Structural invariants: the Christoffel matrices are symmetric, the Riemann
/// tensor is antisymmetric in its last two indices exactly (the assembly is
/// manifestly antisymmetric), and the first Bianchi sum is reported as a
/// residual rather than assumed.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    /// Evaluation point.
    pub point: Vec<f64>,
    /// Christoffel symbols, one matrix per upper index.
    pub christoffel: Vec<DMatrix<f64>>,
    /// Riemann components R^a_bcd, flattened row-major over (a, b, c, d).
    pub riemann: Vec<f64>,
    /// Ricci tensor R_bd = R^c_bcd.
    pub ricci: DMatrix<f64>,
    /// Scalar curvature.
    pub scalar: f64,
    /// Determinant of the metric at the point.
    pub det_g: f64,
    /// Max-norm of the first Bianchi cyclic sum, a numerical diagnostic.
    pub bianchi_residual: f64,
}

impl CurvatureReport {
    /// Riemann component R^a_bcd.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.ricci.nrows();
        self.riemann[((a * n + b) * n + c) * n + d]
    }
}

/// Curvature with the default derivative step for the Christoffel
/// differentiation.
pub fn curvature(field: &MetricField, e: &[f64]) -> Result<CurvatureReport> {
    curvature_with_step(field, e, 1.0)
}

/// Curvature of `field` at `e`; Christoffel symbols come from the field's
/// derivative evaluator and are differentiated by central differences with
/// one Richardson extrapolation level, using the default second-order step
/// scaled by `step_scale`.
pub fn curvature_with_step(
    field: &MetricField,
    e: &[f64],
    step_scale: f64,
) -> Result<CurvatureReport> {
    if step_scale <= 0.0 || !step_scale.is_finite() {
        return Err(GtdError::Param("curvature step scale must be positive".into()));
    }
    let n = field.dimension();
    let gamma = christoffel(field, e)?;
    let base = FdSteps::default().hess * step_scale;

    // dGamma[c][a][(b, d)] approximates d_c Gamma^a_bd.
    let mut dgamma: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n);
    for c in 0..n {
        let h = base * e[c].abs().max(1.0);
        let diff = |s: f64| -> Result<Vec<DMatrix<f64>>> {
            let mut ep = e.to_vec();
            ep[c] += s;
            let mut em = e.to_vec();
            em[c] -= s;
            let gp = christoffel(field, &ep)?;
            let gm = christoffel(field, &em)?;
            Ok((0..n).map(|a| (&gp[a] - &gm[a]) / (2.0 * s)).collect())
        };
        let full = diff(h)?;
        let half = diff(h / 2.0)?;
        dgamma.push((0..n).map(|a| (&half[a] * 4.0 - &full[a]) / 3.0).collect());
    }

    let mut riemann = vec![0.0; n * n * n * n];
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
                    for ee in 0..n {
                        r += gamma[a][(c, ee)] * gamma[ee][(d, b)]
                            - gamma[a][(d, ee)] * gamma[ee][(c, b)];
                    }
                    riemann[idx(a, b, c, d)] = r;
                }
            }
        }
    }

    let mut ricci = DMatrix::zeros(n, n);
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for c in 0..n {
                s += riemann[idx(c, b, c, d)];
            }
            ricci[(b, d)] = s;
        }
    }

    let g = field.components(e)?;
    let det_g = g.clone().lu().determinant();
    let ginv = g
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("induced metric not invertible".into()))?;
    let mut scalar = 0.0;
    for a in 0..n {
        for b in 0..n {
            scalar += ginv[(a, b)] * ricci[(a, b)];
        }
    }

    let mut bianchi = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let s = riemann[idx(a, b, c, d)]
                        + riemann[idx(a, c, d, b)]
                        + riemann[idx(a, d, b, c)];
                    bianchi = bianchi.max(s.abs());
                }
            }
        }
    }

    if !scalar.is_finite() {
        return Err(GtdError::NonFinite("scalar curvature".into()));
    }
    Ok(CurvatureReport {
        point: e.to_vec(),
        christoffel: gamma,
        riemann,
        ricci,
        scalar,
        det_g,
        bianchi_residual: bianchi,
    })
}

/// First-law residual at `e` along the displacement `de`: the difference
/// between a finite-difference directional derivative of the potential and
/// the pairing of the conjugate intensives with `de`. Small values confirm
/// that the embedding identifies dPhi with sum_a I_a dE^a.
pub fn check_first_law(eq: &FundamentalEquation, e: &[f64], de: &[f64]) -> Result<f64> {
    if de.len() != eq.n() {
        return Err(GtdError::Param("displacement length must match the system".into()));
    }
    eq.check_domain(e)?;
    let z = embed(eq, e)?;
    let n = eq.n();
    let scale = de.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let h = FdSteps::default().grad / scale;
    let val = |s: f64| -> Result<f64> {
        let shifted: Vec<f64> = e.iter().zip(de).map(|(x, d)| x + s * d).collect();
        eq.value(&shifted)
    };
    let diff = |s: f64| -> Result<f64> { Ok((val(s)? - val(-s)?) / (2.0 * s)) };
    let full = diff(h)?;
    let half = diff(h / 2.0)?;
    let dphi = (4.0 * half - full) / 3.0;
    let mut pairing = 0.0;
    for a in 0..n {
        pairing += z.i(a) * de[a];
    }
    Ok((dphi - pairing).abs())
}
