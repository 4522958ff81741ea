//! The (2n+1)-dimensional phase space: contact structure, Legendre
//! transformations, and the Legendre-invariant metric family.
//!
//! Coordinates are ordered Z = (Phi, E^1..E^n, I^1..I^n): the potential, the
//! extensive variables, then their conjugate intensive variables. The metric
//! family is parametrized by an integer k and a conformal field Lambda; its
//! defining property, invariance under all partial Legendre transformations,
//! is checked numerically by [`check_legendre_invariance`].

use crate::deriv::{evaluate_jet, FdSteps, ScalarField};
use crate::error::{GtdError, Result};
use crate::systems::Representation;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A point of phase space with the fixed layout (Phi, E^a, I^a).
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    /// Coordinates, length 2n+1.
    pub z: DVector<f64>,
    /// Representation tag carried along from the generating system.
    pub representation: Representation,
}

impl PhasePoint {
    /// Build from raw coordinates; the length must be odd and entries finite.
    pub fn new(representation: Representation, z: Vec<f64>) -> Result<Self> {
        if z.len() % 2 == 0 || z.is_empty() {
            return Err(GtdError::Param(format!(
                "phase point needs 2n+1 coordinates, got {}",
                z.len()
            )));
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(GtdError::NonFinite("phase point coordinates".into()));
        }
        Ok(PhasePoint { z: DVector::from_vec(z), representation })
    }

    /// Degrees of freedom n.
    pub fn n(&self) -> usize {
        (self.z.len() - 1) / 2
    }

    /// Potential coordinate Phi.
    pub fn phi(&self) -> f64 {
        self.z[0]
    }

    /// Extensive coordinate E^a, 0-based.
    pub fn e(&self, a: usize) -> f64 {
        self.z[1 + a]
    }

    /// Intensive coordinate I^a, 0-based.
    pub fn i(&self, a: usize) -> f64 {
        self.z[1 + self.n() + a]
    }
}

/// The conformal factor of the phase-space metric.
#[derive(Clone)]
pub enum LambdaField {
    /// A nonzero constant, the default and the only case with certified
    /// Legendre invariance.
    Constant(f64),
    /// A user field of all 2n+1 phase coordinates.
    Custom(Arc<dyn ScalarField>),
}

impl fmt::Debug for LambdaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaField::Constant(c) => write!(f, "LambdaField::Constant({c})"),
            LambdaField::Custom(field) => {
                write!(f, "LambdaField::Custom(dim {})", field.dim())
            }
        }
    }
}

impl LambdaField {
    /// Value at a phase point.
    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            LambdaField::Constant(c) => *c,
            LambdaField::Custom(f) => f.eval(z),
        }
    }

    /// Gradient with respect to all phase coordinates.
    pub fn gradient(&self, z: &[f64]) -> Result<DVector<f64>> {
        match self {
            LambdaField::Constant(_) => Ok(DVector::zeros(z.len())),
            LambdaField::Custom(f) => Ok(evaluate_jet(f.as_ref(), z, 1)?.grad),
        }
    }

    /// Parse the serialized form `"const:<value>"`.
    pub fn parse(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix("const:")
            .ok_or_else(|| GtdError::Config(format!("unsupported Lambda spec {s:?}, expected \"const:<value>\"")))?;
        let v: f64 = rest
            .trim()
            .parse()
            .map_err(|_| GtdError::Config(format!("cannot parse Lambda constant {rest:?}")))?;
        if v == 0.0 || !v.is_finite() {
            return Err(GtdError::Config("Lambda constant must be finite and nonzero".into()));
        }
        Ok(LambdaField::Constant(v))
    }
}

impl fmt::Display for LambdaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaField::Constant(c) => write!(f, "const:{c}"),
            LambdaField::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Free data of the phase-space metric family: integer k, conformal factor
/// Lambda, and the representation the coordinates refer to.
#[derive(Clone, Debug)]
pub struct PhaseMetricSpec {
    /// Integer exponent parameter; the power on each E^a I^a product is 2k+1.
    pub k: i32,
    /// Conformal factor.
    pub lambda: LambdaField,
    /// Representation tag.
    pub representation: Representation,
}

impl PhaseMetricSpec {
    /// Spec with a constant conformal factor.
    ///
    /// # Errors
    /// `Param` when the constant is zero or not finite.
    pub fn constant(k: i32, lambda: f64, representation: Representation) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(GtdError::Param("constant Lambda must be finite and nonzero".into()));
        }
        Ok(PhaseMetricSpec { k, lambda: LambdaField::Constant(lambda), representation })
    }

    /// Exponent 2k+1 on the coordinate products.
    pub fn exponent(&self) -> i32 {
        2 * self.k + 1
    }
}

/// The contact 1-form evaluated on a tangent vector `v` at `z`:
/// v_Phi - sum_a I^a v_{E^a}.
pub fn gibbs_form(z: &PhasePoint, v: &[f64]) -> f64 {
    let n = z.n();
    let mut out = v[0];
    for a in 0..n {
        out -= z.i(a) * v[1 + a];
    }
    out
}

/// Coefficient of the top-degree form Theta wedge (dTheta)^n in canonical
/// coordinates, computed by brute-force antisymmetrized expansion. Nonzero
/// for every n, which is what makes Theta a contact form.
pub fn contact_coefficient(n: usize) -> f64 {
    let dim = 2 * n + 1;
    type Form = BTreeMap<Vec<usize>, f64>;

    fn wedge(a: &Form, b: &Form) -> Form {
        let mut out: Form = BTreeMap::new();
        for (ta, ca) in a {
            'next: for (tb, cb) in b {
                let mut merged: Vec<usize> = Vec::with_capacity(ta.len() + tb.len());
                merged.extend_from_slice(ta);
                merged.extend_from_slice(tb);
                for i in 0..merged.len() {
                    for j in (i + 1)..merged.len() {
                        if merged[i] == merged[j] {
                            continue 'next;
                        }
                    }
                }
                let mut inversions = 0usize;
                for i in 0..merged.len() {
                    for j in (i + 1)..merged.len() {
                        if merged[i] > merged[j] {
                            inversions += 1;
                        }
                    }
                }
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                merged.sort_unstable();
                *out.entry(merged).or_insert(0.0) += sign * ca * cb;
            }
        }
        out.retain(|_, c| *c != 0.0);
        out
    }

    // theta = dZ^0 - sum I_a dZ^(1+a), with arbitrary nonzero I values; the
    // I-dependent terms cancel by antisymmetry, so the coefficient is
    // point-independent.
    let mut theta: Form = BTreeMap::new();
    theta.insert(vec![0], 1.0);
    for a in 0..n {
        theta.insert(vec![1 + a], -(1.5 + a as f64));
    }
    // dtheta = sum_a dZ^(1+a) wedge dZ^(n+1+a)
    let mut dtheta: Form = BTreeMap::new();
    for a in 0..n {
        dtheta.insert(vec![1 + a, n + 1 + a], 1.0);
    }

    let mut acc = theta;
    for _ in 0..n {
        acc = wedge(&acc, &dtheta);
    }
    let full: Vec<usize> = (0..dim).collect();
    *acc.get(&full).unwrap_or(&0.0)
}

fn theta_components(z: &PhasePoint) -> DVector<f64> {
    let n = z.n();
    let dim = 2 * n + 1;
    let mut th = DVector::zeros(dim);
    th[0] = 1.0;
    for a in 0..n {
        th[1 + a] = -z.i(a);
    }
    th
}

fn singular_product_check(spec: &PhaseMetricSpec, z: &PhasePoint) -> Result<()> {
    if spec.exponent() < 0 {
        for a in 0..z.n() {
            if z.e(a) * z.i(a) == 0.0 {
                return Err(GtdError::SingularProduct { index: a + 1 });
            }
        }
    }
    Ok(())
}

/// The phase-space metric at `z`: the square of the contact form plus the
/// symmetrized Lambda (E^a I^a)^(2k+1) dE^a dI^a blocks.
///
/// # Errors
/// `SingularProduct` when some E^a I^a = 0 with 2k+1 < 0;
/// `DegenerateMetric` when the determinant vanishes (for instance Lambda = 0).
pub fn metric_g(spec: &PhaseMetricSpec, z: &PhasePoint) -> Result<DMatrix<f64>> {
    let (g, _) = metric_g_with_partials(spec, z, false)?;
    Ok(g)
}

/// The phase-space metric together with its coordinate partials
/// dG/dZ^C (one matrix per C) when `with_partials` is set.
///
/// The dependence of G on Z is explicit (polynomial in the coordinates times
/// Lambda), so the partials are assembled in closed form; a custom Lambda
/// contributes through its gradient.
pub fn metric_g_with_partials(
    spec: &PhaseMetricSpec,
    z: &PhasePoint,
    with_partials: bool,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    singular_product_check(spec, z)?;
    let n = z.n();
    let dim = 2 * n + 1;
    let zs: Vec<f64> = z.z.iter().copied().collect();
    let lam = spec.lambda.value(&zs);
    if lam == 0.0 || !lam.is_finite() {
        return Err(GtdError::DegenerateMetric(format!("Lambda = {lam} at this point")));
    }
    let m = spec.exponent();

    let th = theta_components(z);
    let mut g = &th * th.transpose();
    for a in 0..n {
        let w = 0.5 * lam * (z.e(a) * z.i(a)).powi(m);
        g[(1 + a, n + 1 + a)] += w;
        g[(n + 1 + a, 1 + a)] += w;
    }
    if !g.iter().all(|v| v.is_finite()) {
        return Err(GtdError::NonFinite("phase-space metric entries".into()));
    }
    let det = g.clone().lu().determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(GtdError::DegenerateMetric(format!("det G = {det}")));
    }

    let mut partials = Vec::new();
    if with_partials {
        let dlam = spec.lambda.gradient(&zs)?;
        for c in 0..dim {
            let mut d = DMatrix::zeros(dim, dim);
            // theta part: d(theta theta^T)/dZ^C is nonzero only for C in the
            // intensive block, where dtheta_{1+a}/dZ^{n+1+a} = -1.
            if c > n {
                let a = c - n - 1;
                for b in 0..dim {
                    d[(1 + a, b)] -= th[b];
                    d[(b, 1 + a)] -= th[b];
                }
            }
            // conformal blocks
            for a in 0..n {
                let p = z.e(a) * z.i(a);
                let mut dw = dlam[c] * 0.5 * p.powi(m);
                let dp = if c == 1 + a {
                    z.i(a)
                } else if c == n + 1 + a {
                    z.e(a)
                } else {
                    0.0
                };
                if dp != 0.0 {
                    dw += 0.5 * lam * f64::from(m) * p.powi(m - 1) * dp;
                }
                d[(1 + a, n + 1 + a)] += dw;
                d[(n + 1 + a, 1 + a)] += dw;
            }
            partials.push(d);
        }
    }
    Ok((g, partials))
}

/// Christoffel symbols of the phase-space metric, one matrix per upper index,
/// symmetric in the lower pair.
///
/// # Errors
/// As [`metric_g`], plus `DegenerateMetric` when G cannot be inverted.
pub fn christoffel_g(spec: &PhaseMetricSpec, z: &PhasePoint) -> Result<Vec<DMatrix<f64>>> {
    let (g, dg) = metric_g_with_partials(spec, z, true)?;
    let dim = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("phase-space metric not invertible".into()))?;
    let mut gamma = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for c in 0..dim {
                let mut s = 0.0;
                for d in 0..dim {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                m[(b, c)] = 0.5 * s;
            }
        }
        gamma.push(m);
    }
    Ok(gamma)
}

fn validate_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s: Vec<usize> = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != subset.len() {
        return Err(GtdError::Param("transform subset has repeated indices".into()));
    }
    if s.iter().any(|i| *i >= n) {
        return Err(GtdError::Param(format!("transform subset index out of range for n = {n}")));
    }
    Ok(s)
}

/// Partial Legendre transformation on the chosen coordinate pairs (0-based):
/// maps tilde coordinates to plain ones via
/// Phi = tPhi - sum_{a in subset} tE^a tI^a, E^a = -tI^a, I^a = tE^a,
/// and the identity on the remaining pairs.
///
/// # Errors
/// `Param` on an invalid subset.
pub fn legendre_transform(zt: &PhasePoint, subset: &[usize]) -> Result<PhasePoint> {
    let n = zt.n();
    let s = validate_subset(n, subset)?;
    let mut z = zt.z.clone();
    for &a in &s {
        z[0] -= zt.e(a) * zt.i(a);
        z[1 + a] = -zt.i(a);
        z[1 + n + a] = zt.e(a);
    }
    Ok(PhasePoint { z, representation: zt.representation })
}

/// Inverse of [`legendre_transform`]: maps plain coordinates to tilde ones via
/// tPhi = Phi - sum_{a in subset} E^a I^a, tE^a = I^a, tI^a = -E^a.
///
/// # Errors
/// `Param` on an invalid subset.
pub fn legendre_transform_inverse(z: &PhasePoint, subset: &[usize]) -> Result<PhasePoint> {
    let n = z.n();
    let s = validate_subset(n, subset)?;
    let mut zt = z.z.clone();
    for &a in &s {
        zt[0] -= z.e(a) * z.i(a);
        zt[1 + a] = z.i(a);
        zt[1 + n + a] = -z.e(a);
    }
    Ok(PhasePoint { z: zt, representation: z.representation })
}

/// Jacobian dZ/dtZ of [`legendre_transform`] at the tilde point `zt`.
pub fn legendre_jacobian(zt: &PhasePoint, subset: &[usize]) -> Result<DMatrix<f64>> {
    let n = zt.n();
    let s = validate_subset(n, subset)?;
    let dim = 2 * n + 1;
    let mut j = DMatrix::identity(dim, dim);
    for &a in &s {
        // Phi row
        j[(0, 1 + a)] = -zt.i(a);
        j[(0, 1 + n + a)] = -zt.e(a);
        // E^a and I^a rows swap with a sign
        j[(1 + a, 1 + a)] = 0.0;
        j[(1 + a, 1 + n + a)] = -1.0;
        j[(1 + n + a, 1 + n + a)] = 0.0;
        j[(1 + n + a, 1 + a)] = 1.0;
    }
    Ok(j)
}

/// Invariance defect of an arbitrary phase metric under the Legendre
/// transformation on `subset`: the max-norm difference between the
/// Jacobian-transformed metric at `z` and the metric function evaluated at
/// the transformed point. Zero certifies invariance at `z`.
pub fn check_invariance_of<F>(metric: F, z: &PhasePoint, subset: &[usize]) -> Result<f64>
where
    F: Fn(&PhasePoint) -> Result<DMatrix<f64>>,
{
    let zt = legendre_transform_inverse(z, subset)?;
    let j = legendre_jacobian(&zt, subset)?;
    let g_plain = metric(z)?;
    let transformed = j.transpose() * g_plain * &j;
    let g_tilde = metric(&zt)?;
    Ok((transformed - g_tilde).abs().max())
}

/// Invariance defect of the metric family [`metric_g`] at `z` for one index
/// subset. Near zero for constant Lambda; a custom Lambda is the caller's
/// responsibility.
///
/// # Errors
/// `SingularProduct` when a coordinate product vanishes at either point.
pub fn check_legendre_invariance(
    spec: &PhaseMetricSpec,
    z: &PhasePoint,
    subset: &[usize],
) -> Result<f64> {
    check_invariance_of(|p| metric_g(spec, p), z, subset)
}

/// All subsets of {0, .., n-1} in ascending bitmask order, the scan order used
/// by the invariance checks.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut s = Vec::new();
        for a in 0..n {
            if mask & (1 << a) != 0 {
                s.push(a);
            }
        }
        out.push(s);
    }
    out
}

/// Finite-difference Christoffel symbols of [`metric_g`], the test oracle for
/// [`christoffel_g`].
pub fn christoffel_g_fd(spec: &PhaseMetricSpec, z: &PhasePoint) -> Result<Vec<DMatrix<f64>>> {
    let dim = z.z.len();
    let steps = FdSteps::default();
    let zs: Vec<f64> = z.z.iter().copied().collect();
    let entry = |p: &[f64]| -> Result<DMatrix<f64>> {
        metric_g(spec, &PhasePoint { z: DVector::from_column_slice(p), representation: z.representation })
    };
    // Central differences with one Richardson level on each metric entry.
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let h = steps.grad * zs[c].abs().max(1.0);
        let diff = |step: f64| -> Result<DMatrix<f64>> {
            let mut zp = zs.clone();
            zp[c] += step;
            let mut zm = zs.clone();
            zm[c] -= step;
            Ok((entry(&zp)? - entry(&zm)?) / (2.0 * step))
        };
        let full = diff(h)?;
        let half = diff(h / 2.0)?;
        dg.push((half * 4.0 - full) / 3.0);
    }
    let g = metric_g(spec, z)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("phase-space metric not invertible".into()))?;
    let mut gamma = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for c in 0..dim {
                let mut s = 0.0;
                for d in 0..dim {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                m[(b, c)] = 0.5 * s;
            }
        }
        gamma.push(m);
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn point(z: Vec<f64>) -> PhasePoint {
        PhasePoint::new(Representation::Entropy, z).unwrap()
    }

    #[test]
    fn gibbs_form_components() {
        let z = point(vec![0.0, 0.0, 5.0]);
        assert_eq!(gibbs_form(&z, &[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(gibbs_form(&z, &[0.0, 1.0, 0.0]), -5.0);
        assert_eq!(gibbs_form(&z, &[0.0, 0.0, 1.0]), 0.0);
    }

    #[test]
    fn contact_coefficient_is_nonzero_with_factorial_magnitude() {
        let c1 = contact_coefficient(1);
        let c2 = contact_coefficient(2);
        let c3 = contact_coefficient(3);
        assert_eq!(c1.abs(), 1.0);
        assert_eq!(c2.abs(), 2.0);
        assert_eq!(c3.abs(), 6.0);
    }

    #[test]
    fn metric_matches_hand_expansion() {
        // n=1, k=0, Lambda=1 at Z=(0,1,1).
        let spec = PhaseMetricSpec::constant(0, 1.0, Representation::Entropy).unwrap();
        let g = metric_g(&spec, &point(vec![0.0, 1.0, 1.0])).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 1.0, 0.5, 0.0, 0.5, 0.0]);
        assert_eq!(g, expect);
    }

    #[test]
    fn metric_is_exactly_symmetric() {
        let spec = PhaseMetricSpec::constant(1, -0.7, Representation::Entropy).unwrap();
        let g = metric_g(&spec, &point(vec![0.3, 1.2, 2.1, 0.8, 1.7])).unwrap();
        assert_eq!(g, g.transpose());
    }

    #[test]
    fn negative_exponent_off_diagonal_blocks() {
        // k = -1: off-diagonal block is Lambda / (2 E I).
        let spec = PhaseMetricSpec::constant(-1, -1.0, Representation::Entropy).unwrap();
        let z = point(vec![0.0, 2.0, 3.0, 1.5, 1.0]);
        let g = metric_g(&spec, &z).unwrap();
        assert_relative_eq!(g[(1, 3)], -0.5 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(g[(2, 4)], -0.5 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn singular_product_is_flagged_only_for_negative_exponent() {
        let z = point(vec![0.0, 0.0, 1.0]);
        let neg = PhaseMetricSpec::constant(-1, 1.0, Representation::Entropy).unwrap();
        assert!(matches!(metric_g(&neg, &z), Err(GtdError::SingularProduct { index: 1 })));
        let pos = PhaseMetricSpec::constant(0, 1.0, Representation::Entropy).unwrap();
        // Exponent 1: no singularity, but the metric degenerates at E I = 0.
        assert!(matches!(metric_g(&pos, &z), Err(GtdError::DegenerateMetric(_))));
    }

    #[test]
    fn christoffel_matches_fd_oracle() {
        let spec = PhaseMetricSpec::constant(0, 1.0, Representation::Entropy).unwrap();
        let z = point(vec![0.4, 1.3, 0.9]);
        let analytic = christoffel_g(&spec, &z).unwrap();
        let fd = christoffel_g_fd(&spec, &z).unwrap();
        for a in 0..3 {
            assert!((&analytic[a] - &fd[a]).abs().max() < 1e-6, "component {a}");
            assert!((&analytic[a] - &analytic[a].transpose()).abs().max() == 0.0);
        }
    }

    #[test]
    fn christoffel_larger_system_matches_fd_oracle() {
        let spec = PhaseMetricSpec::constant(-1, -1.0, Representation::Entropy).unwrap();
        let z = point(vec![0.2, 1.1, 2.3, 0.7, 1.9]);
        let analytic = christoffel_g(&spec, &z).unwrap();
        let fd = christoffel_g_fd(&spec, &z).unwrap();
        for a in 0..5 {
            assert!((&analytic[a] - &fd[a]).abs().max() < 1e-6, "component {a}");
        }
    }

    #[test]
    fn total_transform_example() {
        let z = point(vec![1.0, 2.0, 3.0]);
        let zt = legendre_transform_inverse(&z, &[0]).unwrap();
        assert_eq!(zt.z.as_slice(), &[-5.0, 3.0, -2.0]);
        let back = legendre_transform(&zt, &[0]).unwrap();
        assert_eq!(back.z, z.z);
    }

    #[test]
    fn inverse_has_period_four() {
        let z = point(vec![0.7, 1.4, -0.6, 2.2, 0.9]);
        let mut w = z.clone();
        for _ in 0..4 {
            w = legendre_transform_inverse(&w, &[0, 1]).unwrap();
        }
        for i in 0..5 {
            assert_relative_eq!(w.z[i], z.z[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn invariance_holds_for_the_family() {
        let z = point(vec![0.3, 1.2, 0.8, 0.9, 1.6]);
        for k in [-1, 0, 1] {
            let spec = PhaseMetricSpec::constant(k, -1.0, Representation::Entropy).unwrap();
            for subset in all_subsets(2) {
                let r = check_legendre_invariance(&spec, &z, &subset).unwrap();
                assert!(r < 1e-10, "k={k} subset={subset:?} residual={r}");
            }
        }
    }

    #[test]
    fn euclidean_metric_fails_invariance() {
        let z = point(vec![0.3, 1.2, 0.8, 0.9, 1.6]);
        let euclid = |p: &PhasePoint| Ok(DMatrix::identity(p.z.len(), p.z.len()));
        let r = check_invariance_of(euclid, &z, &[0, 1]).unwrap();
        assert!(r > 1e-2, "Euclidean defect {r}");
    }

    #[test]
    fn lambda_parsing_round_trips() {
        let l = LambdaField::parse("const:-1").unwrap();
        assert_eq!(l.to_string(), "const:-1");
        assert!(LambdaField::parse("const:0").is_err());
        assert!(LambdaField::parse("linear:1").is_err());
    }

    proptest! {
        #[test]
        fn prop_transform_round_trip(
            phi in -2.0f64..2.0,
            e1 in 0.3f64..2.0, e2 in 0.3f64..2.0,
            i1 in 0.3f64..2.0, i2 in 0.3f64..2.0,
            mask in 0usize..4,
        ) {
            let z = point(vec![phi, e1, e2, i1, i2]);
            let subset = all_subsets(2)[mask].clone();
            let zt = legendre_transform_inverse(&z, &subset).unwrap();
            let back = legendre_transform(&zt, &subset).unwrap();
            for i in 0..5 {
                prop_assert!((back.z[i] - z.z[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_family_is_invariant_and_euclidean_is_not(
            phi in -2.0f64..2.0,
            e1 in 0.4f64..2.0, e2 in 0.4f64..2.0,
            i1 in 0.4f64..2.0, i2 in 0.4f64..2.0,
            k in -1i32..2,
            mask in 1usize..4,
        ) {
            let z = point(vec![phi, e1, e2, i1, i2]);
            let subset = all_subsets(2)[mask].clone();
            let spec = PhaseMetricSpec::constant(k, -1.0, Representation::Entropy).unwrap();
            prop_assert!(check_legendre_invariance(&spec, &z, &subset).unwrap() < 1e-9);
            let euclid = |p: &PhasePoint| Ok(DMatrix::identity(p.z.len(), p.z.len()));
            prop_assert!(check_invariance_of(euclid, &z, &subset).unwrap() > 1e-2);
        }
    }
}
