//! Extremal-surface diagnostics for the embedded equilibrium manifold: the
//! tension field of the embedding as a map into phase space, the induced
//! area functional, and the constraint tensor that compares a reference
//! worldvolume metric with the induced one.
//!
//! The tension field combines the chart Laplacian of each phase coordinate
//! with a phase-space Christoffel term; when the reference metric is the
//! induced metric itself, the residual measures how far the embedding is
//! from extremizing the induced volume.

use crate::deriv::FdSteps;
use crate::equilibrium::{embedding_jets, MetricField};
use crate::error::{GtdError, Result};
use crate::phasespace::{christoffel_g, PhaseMetricSpec, PhasePoint};
use crate::systems::FundamentalEquation;
use nalgebra::DMatrix;

/// Residual of the area-extremality equations at one state.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Equilibrium coordinates of the evaluation point.
    pub point: Vec<f64>,
    /// Tension-field components, one per phase coordinate.
    pub ng_residual: Vec<f64>,
    /// Largest absolute component.
    pub max_norm: f64,
    /// Laplace-Beltrami part of each component.
    pub divergence: Vec<f64>,
    /// Phase-space Christoffel part of each component.
    pub christoffel_term: Vec<f64>,
}

fn tension_components(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    h: &MetricField,
    e: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = eq.n();
    if h.dimension() != n {
        return Err(GtdError::Param(format!(
            "reference metric dimension {} does not match the {}-variable system",
            h.dimension(),
            n
        )));
    }
    let dim = 2 * n + 1;
    let jets = embedding_jets(eq, e)?;
    let hm = h.components(e)?;
    let dh = h.derivatives(e)?;
    let hinv = hm
        .clone()
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("reference metric not invertible".into()))?;

    // d_b h^{-1} = -h^{-1} (d_b h) h^{-1}; d_b ln|det h| = tr(h^{-1} d_b h).
    let mut dhinv = Vec::with_capacity(n);
    let mut dlndet = vec![0.0; n];
    for b in 0..n {
        dhinv.push(-(&hinv * &dh[b] * &hinv));
        dlndet[b] = (&hinv * &dh[b]).trace();
    }

    let mut divergence = vec![0.0; dim];
    for big_a in 0..dim {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += hinv[(a, b)] * jets.hess[big_a][(a, b)]
                    + dhinv[b][(a, b)] * jets.jac[(big_a, a)]
                    + 0.5 * hinv[(a, b)] * jets.jac[(big_a, a)] * dlndet[b];
            }
        }
        divergence[big_a] = s;
    }

    // Second fundamental form contraction: M = P h^{-1} P^T with
    // P[A][a] = dZ^A/dE^a, contracted against the phase Christoffels.
    let zp = PhasePoint { z: jets.z.clone(), representation: eq.representation() };
    let gamma = christoffel_g(spec, &zp)?;
    let m = &jets.jac * &hinv * jets.jac.transpose();
    let mut christoffel_term = vec![0.0; dim];
    for big_a in 0..dim {
        let mut s = 0.0;
        for big_b in 0..dim {
            for big_c in 0..dim {
                s += gamma[big_a][(big_b, big_c)] * m[(big_b, big_c)];
            }
        }
        christoffel_term[big_a] = s;
    }

    let residual: Vec<f64> = divergence
        .iter()
        .zip(&christoffel_term)
        .map(|(d, c)| d + c)
        .collect();
    if !residual.iter().all(|v| v.is_finite()) {
        return Err(GtdError::NonFinite("tension-field components".into()));
    }
    Ok((residual, divergence, christoffel_term))
}

/// Tension field of the embedding with an arbitrary reference metric on the
/// chart; returns one component per phase coordinate.
pub fn harmonic_residual(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    h: &MetricField,
    e: &[f64],
) -> Result<Vec<f64>> {
    tension_components(spec, eq, h, e).map(|(r, _, _)| r)
}

/// Tension field with the induced metric as reference, the area-extremality
/// residual, reported with its divergence and Christoffel breakdown.
pub fn ng_residual(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    e: &[f64],
) -> Result<ResidualReport> {
    let h = MetricField::induced(spec, eq)?;
    let (residual, divergence, christoffel_term) = tension_components(spec, eq, &h, e)?;
    let max_norm = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ResidualReport {
        point: e.to_vec(),
        ng_residual: residual,
        max_norm,
        divergence,
        christoffel_term,
    })
}

/// Finite-difference oracle for the divergence part: differentiates the flux
/// F^b_A = sqrt|det h| h^{ab} dZ^A/dE^a directly and divides by the volume
/// factor.
pub fn divergence_fd(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    h: &MetricField,
    e: &[f64],
) -> Result<Vec<f64>> {
    let _ = spec;
    let n = eq.n();
    let dim = 2 * n + 1;
    let flux = |x: &[f64]| -> Result<DMatrix<f64>> {
        let jets = embedding_jets(eq, x)?;
        let hm = h.components(x)?;
        let det = hm.clone().lu().determinant();
        let hinv = hm
            .try_inverse()
            .ok_or_else(|| GtdError::DegenerateMetric("reference metric not invertible".into()))?;
        // F[(A, b)] = sqrt|det| sum_a h^{ab} dZ^A/dE^a
        Ok(&jets.jac * &hinv * det.abs().sqrt())
    };
    let hm = h.components(e)?;
    let det = hm.lu().determinant();
    let vol = det.abs().sqrt();
    let steps = FdSteps::default();
    let mut out = vec![0.0; dim];
    for b in 0..n {
        let hstep = steps.grad * e[b].abs().max(1.0);
        let diff = |s: f64| -> Result<DMatrix<f64>> {
            let mut ep = e.to_vec();
            ep[b] += s;
            let mut em = e.to_vec();
            em[b] -= s;
            Ok((flux(&ep)? - flux(&em)?) / (2.0 * s))
        };
        let full = diff(hstep)?;
        let half = diff(hstep / 2.0)?;
        let d = (half * 4.0 - full) / 3.0;
        for big_a in 0..dim {
            out[big_a] += d[(big_a, b)] / vol;
        }
    }
    Ok(out)
}

/// Constraint tensor g - (1/2) h tr(h^{-1} g) comparing a reference metric
/// `h` with the induced metric `g` on the same chart. Vanishes identically
/// when h = g on a two-dimensional chart.
///
/// # Errors
/// `Param` on a dimension mismatch, `DegenerateMetric` when `h` is singular.
pub fn constraint_t(h: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if h.nrows() != g.nrows() || h.ncols() != g.ncols() || h.nrows() != h.ncols() {
        return Err(GtdError::Param("constraint tensor needs square matrices of equal size".into()));
    }
    let n = h.nrows();
    // h == g makes tr(h^{-1} g) = n exactly; take that branch without a
    // solve so the coincident case is exact in floating point.
    let trace = if h == g {
        n as f64
    } else {
        let hinv = h
            .clone()
            .try_inverse()
            .ok_or_else(|| GtdError::DegenerateMetric("reference metric not invertible".into()))?;
        (hinv * g).trace()
    };
    Ok(g - h * (0.5 * trace))
}

/// Scalar check relating trace and determinants on a two-dimensional chart:
/// |tr(h^{-1} g) - 2 sqrt(|det g| / |det h|)|, which vanishes whenever h and
/// g are conformally related.
///
/// # Errors
/// `Param` unless both matrices are 2 by 2.
pub fn trace_relation_residual(h: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<f64> {
    if h.nrows() != 2 || h.ncols() != 2 || g.nrows() != 2 || g.ncols() != 2 {
        return Err(GtdError::Param("trace relation is specific to two-dimensional charts".into()));
    }
    let det_h = h.clone().lu().determinant();
    let det_g = g.clone().lu().determinant();
    if det_h == 0.0 {
        return Err(GtdError::DegenerateMetric("reference metric has zero determinant".into()));
    }
    let hinv = h
        .clone()
        .try_inverse()
        .ok_or_else(|| GtdError::DegenerateMetric("reference metric not invertible".into()))?;
    let trace = (hinv * g).trace();
    Ok((trace - 2.0 * (det_g.abs() / det_h.abs()).sqrt()).abs())
}

/// Induced volume of a coordinate box, 2 integral sqrt|det g| by the
/// midpoint rule on the given per-axis grid.
///
/// # Errors
/// `SignChange` when det g changes sign anywhere on the sample grid, since
/// the area functional is then ill-defined on the box; `Param` on malformed
/// region or grid input.
pub fn volume_action(
    spec: &PhaseMetricSpec,
    eq: &FundamentalEquation,
    region: &[(f64, f64)],
    grid: &[usize],
) -> Result<f64> {
    let field = MetricField::induced(spec, eq)?;
    volume_action_of(&field, region, grid)
}

/// [`volume_action`] for an arbitrary metric field.
pub fn volume_action_of(
    field: &MetricField,
    region: &[(f64, f64)],
    grid: &[usize],
) -> Result<f64> {
    let n = field.dimension();
    if region.len() != n || grid.len() != n {
        return Err(GtdError::Param(format!(
            "region and grid must both have {n} axes"
        )));
    }
    for (lo, hi) in region {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(GtdError::Param(format!("degenerate region axis [{lo}, {hi}]")));
        }
    }
    if grid.contains(&0) {
        return Err(GtdError::Param("grid must have at least one cell per axis".into()));
    }

    let widths: Vec<f64> = region.iter().zip(grid).map(|((lo, hi), m)| (hi - lo) / *m as f64).collect();
    let cell: f64 = widths.iter().product();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    let mut sign = 0.0f64;
    loop {
        let point: Vec<f64> = (0..n)
            .map(|i| region[i].0 + (idx[i] as f64 + 0.5) * widths[i])
            .collect();
        let g = field.components(&point)?;
        let det = g.lu().determinant();
        if det != 0.0 {
            let s = det.signum();
            if sign == 0.0 {
                sign = s;
            } else if s != sign {
                return Err(GtdError::SignChange(format!(
                    "metric determinant changes sign near {point:?}"
                )));
            }
        }
        total += det.abs().sqrt() * cell;

        // odometer increment over the multi-index
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(2.0 * total);
            }
            idx[axis] += 1;
            if idx[axis] < grid[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{catalog_gen_ideal, catalog_ideal_gas, catalog_vdw, Representation};
    use approx::assert_relative_eq;

    fn entropy_spec(k: i32, lambda: f64) -> PhaseMetricSpec {
        PhaseMetricSpec::constant(k, lambda, Representation::Entropy).unwrap()
    }

    #[test]
    fn ideal_gas_is_extremal_at_the_conformal_exponent() {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(-1, -1.0);
        for e in [[1.0, 1.0], [2.0, 3.0], [0.7, 4.2]] {
            let rep = ng_residual(&spec, &eq, &e).unwrap();
            assert!(rep.max_norm < 1e-9, "at {e:?}: {}", rep.max_norm);
        }
    }

    #[test]
    fn ideal_gas_tension_closed_forms_at_zero_exponent_parameter() {
        // k = 0, kappa = 1, Lambda = -1 at (U, V): components are
        // (10/3, 8U/9, 2V, 4/(3U), 2/V) divided by -Lambda.
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(0, -1.0);
        let (u, v) = (1.2, 0.9);
        let rep = ng_residual(&spec, &eq, &[u, v]).unwrap();
        let expect = [10.0 / 3.0, 8.0 * u / 9.0, 2.0 * v, 4.0 / (3.0 * u), 2.0 / v];
        for (i, want) in expect.iter().enumerate() {
            assert_relative_eq!(rep.ng_residual[i], *want, max_relative = 1e-8);
        }
    }

    #[test]
    fn ideal_gas_tension_closed_forms_at_unit_exponent_parameter() {
        // k = 1, kappa = 1, Lambda = -1: components are
        // (140/27, 64U/81, 4V, 32/(27U), 4/V).
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(1, -1.0);
        let (u, v) = (1.2, 0.9);
        let rep = ng_residual(&spec, &eq, &[u, v]).unwrap();
        let expect = [140.0 / 27.0, 64.0 * u / 81.0, 4.0 * v, 32.0 / (27.0 * u), 4.0 / v];
        for (i, want) in expect.iter().enumerate() {
            assert_relative_eq!(rep.ng_residual[i], *want, max_relative = 1e-8);
        }
    }

    #[test]
    fn vdw_embedding_is_not_extremal() {
        let eq = catalog_vdw(1.0, 0.1, 0.05).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let rep = ng_residual(&spec, &eq, &[1.0, 2.0]).unwrap();
        assert!(rep.max_norm > 1e-3, "max norm {}", rep.max_norm);
    }

    #[test]
    fn harmonic_with_induced_reference_reproduces_area_residual() {
        let eq = catalog_vdw(1.0, 0.1, 0.05).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let h = MetricField::induced(&spec, &eq).unwrap();
        let e = [1.3, 1.8];
        let hr = harmonic_residual(&spec, &eq, &h, &e).unwrap();
        let ng = ng_residual(&spec, &eq, &e).unwrap();
        for (a, b) in hr.iter().zip(&ng.ng_residual) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn divergence_breakdown_matches_fd_oracle() {
        let eq = catalog_vdw(1.0, 0.1, 0.05).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let h = MetricField::induced(&spec, &eq).unwrap();
        let e = [1.1, 1.7];
        let fd = divergence_fd(&spec, &eq, &h, &e).unwrap();
        let (_, div, _) = tension_components(&spec, &eq, &h, &e).unwrap();
        for i in 0..5 {
            assert_relative_eq!(div[i], fd[i], epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn flat_reference_changes_the_residual() {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let flat = MetricField::constant(DMatrix::identity(2, 2));
        let r = harmonic_residual(&spec, &eq, &flat, &[2.0, 3.0]).unwrap();
        let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max > 1e-3, "flat-reference residual {max}");
    }

    #[test]
    fn coincident_constraint_tensor_vanishes_exactly() {
        let eq = catalog_vdw(1.0, 0.1, 0.05).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let g = crate::equilibrium::closed_form_metric(&spec, &eq, &[1.0, 2.0]).unwrap();
        let t = constraint_t(&g, &g).unwrap();
        assert_eq!(t.abs().max(), 0.0);
    }

    #[test]
    fn conformal_pairs_satisfy_the_trace_relation() {
        let eq = catalog_gen_ideal(1.0, 2.0).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let g = crate::equilibrium::closed_form_metric(&spec, &eq, &[1.4, 0.8]).unwrap();
        let h = &g * 3.0;
        assert!(trace_relation_residual(&h, &g).unwrap() < 1e-12);
        // A non-conformal pair leaves a visible residual.
        let mut skew = g.clone();
        skew[(0, 0)] *= 4.0;
        assert!(trace_relation_residual(&skew, &g).unwrap() > 1e-3);
    }

    #[test]
    fn volume_action_of_log_flat_metric() {
        // sqrt(det g) = 1/(UV): the integral over [1,2]^2 is (ln 2)^2.
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(-1, -1.0);
        let a = volume_action(&spec, &eq, &[(1.0, 2.0), (1.0, 2.0)], &[50, 50]).unwrap();
        let expect = 2.0 * 2.0f64.ln().powi(2);
        assert_relative_eq!(a, expect, max_relative = 1e-4);
    }

    #[test]
    fn sign_change_is_detected() {
        let field = MetricField::from_fn(2, |e| {
            Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e[0] - 1.5, 1.0])))
        });
        let err = volume_action_of(&field, &[(1.0, 2.0), (0.0, 1.0)], &[10, 4]).unwrap_err();
        assert!(matches!(err, GtdError::SignChange(_)));
    }

    #[test]
    fn malformed_regions_are_rejected() {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = entropy_spec(-1, -1.0);
        assert!(volume_action(&spec, &eq, &[(1.0, 2.0)], &[10]).is_err());
        assert!(volume_action(&spec, &eq, &[(2.0, 1.0), (1.0, 2.0)], &[10, 10]).is_err());
        assert!(volume_action(&spec, &eq, &[(1.0, 2.0), (1.0, 2.0)], &[0, 10]).is_err());
    }
}
