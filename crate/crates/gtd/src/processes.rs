//! Quasi-static processes as geodesics of a metric field on the equilibrium
//! chart: fixed-step integration, thermodynamic length, a second-law
//! admissibility filter, and two-point boundary solving.

use crate::equilibrium::{christoffel, MetricField};
use crate::error::{GtdError, Result};
use crate::systems::{FundamentalEquation, Representation};
use nalgebra::{DMatrix, DVector};

/// Internal step for the boundary-value solver.
const SHOOT_STEP: f64 = 1e-3;

/// One state along an integrated process.
#[derive(Clone, Debug)]
pub struct PathSample {
    /// Affine parameter.
    pub tau: f64,
    /// Equilibrium coordinates.
    pub e: Vec<f64>,
    /// Coordinate velocities.
    pub de: Vec<f64>,
}

/// An integrated geodesic with its diagnostics.
///
/// `admissible`, `violation_tau`, and `entropy_trace` stay empty until the
/// path is annotated against a fundamental equation by
/// [`annotate_second_law`] or checked by [`second_law_filter`].
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    /// Equally spaced samples, starting at tau = 0.
    pub samples: Vec<PathSample>,
    /// Total thermodynamic length of the sampled path.
    pub length: f64,
    /// Running length at each sample (trapezoid accumulation).
    pub cumulative_length: Vec<f64>,
    /// Entropy at each sample, filled by the second-law annotation.
    pub entropy_trace: Vec<f64>,
    /// Whether every step raises the entropy within slack; None before
    /// annotation.
    pub admissible: Option<bool>,
    /// First parameter value at which the entropy decreased, if any.
    pub violation_tau: Option<f64>,
    /// True when integration stopped early because a step left the domain
    /// of the metric field.
    pub exited_domain: bool,
    /// Largest relative deviation of the squared speed from its initial
    /// value; near zero certifies the affine parametrization.
    pub speed_drift: f64,
}

/// First-order form of the geodesic equation: returns (E', E'') at the given
/// state, with E''^a = -Gamma^a_bc E'^b E'^c.
pub fn geodesic_rhs(
    field: &MetricField,
    e: &[f64],
    de: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = field.dimension();
    if e.len() != n || de.len() != n {
        return Err(GtdError::Param("state length must match the metric dimension".into()));
    }
    let gamma = christoffel(field, e)?;
    let mut acc = vec![0.0; n];
    for a in 0..n {
        let mut s = 0.0;
        for b in 0..n {
            for c in 0..n {
                s += gamma[a][(b, c)] * de[b] * de[c];
            }
        }
        acc[a] = -s;
    }
    Ok((de.to_vec(), acc))
}

fn is_domain_exit(err: &GtdError) -> bool {
    matches!(
        err,
        GtdError::Domain(_)
            | GtdError::SingularProduct { .. }
            | GtdError::DegenerateMetric(_)
            | GtdError::NonFinite(_)
    )
}

fn squared_speed(field: &MetricField, e: &[f64], de: &[f64]) -> Result<f64> {
    let g = field.components(e)?;
    let v = DVector::from_column_slice(de);
    Ok((v.transpose() * g * &v)[(0, 0)])
}

/// Integrate the geodesic equation from `(e0, de0)` with the classical
/// fourth-order Runge-Kutta scheme at a uniform step.
///
/// The step is `tau_max / ceil(tau_max / step)`, so the final sample lands
/// exactly on `tau_max`. If any stage leaves the domain of the field, the
/// path is truncated at the last valid sample and flagged; the starting
/// state itself must be valid.
pub fn integrate_geodesic(
    field: &MetricField,
    e0: &[f64],
    de0: &[f64],
    tau_max: f64,
    step: f64,
) -> Result<GeodesicPath> {
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(GtdError::Param("tau_max must be positive and finite".into()));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(GtdError::Param("step must be positive and finite".into()));
    }
    let n = field.dimension();
    let m = (tau_max / step).ceil().max(1.0) as usize;
    let h = tau_max / m as f64;

    let mut e = e0.to_vec();
    let mut de = de0.to_vec();
    // The initial state must evaluate; a failure here is a hard error.
    let v0 = squared_speed(field, &e, &de)?;
    let mut samples = vec![PathSample { tau: 0.0, e: e.clone(), de: de.clone() }];
    let mut speeds = vec![v0];
    let mut exited = false;

    'steps: for i in 0..m {
        let stage = |ex: &[f64], dx: &[f64]| geodesic_rhs(field, ex, dx);
        let combine = |e: &[f64], de: &[f64], k: &(Vec<f64>, Vec<f64>), s: f64| {
            let en: Vec<f64> = e.iter().zip(&k.0).map(|(x, d)| x + s * d).collect();
            let den: Vec<f64> = de.iter().zip(&k.1).map(|(x, d)| x + s * d).collect();
            (en, den)
        };
        let result = (|| -> Result<(Vec<f64>, Vec<f64>)> {
            let k1 = stage(&e, &de)?;
            let (e2, de2) = combine(&e, &de, &k1, 0.5 * h);
            let k2 = stage(&e2, &de2)?;
            let (e3, de3) = combine(&e, &de, &k2, 0.5 * h);
            let k3 = stage(&e3, &de3)?;
            let (e4, de4) = combine(&e, &de, &k3, h);
            let k4 = stage(&e4, &de4)?;
            let mut en = e.clone();
            let mut den = de.clone();
            for a in 0..n {
                en[a] += h / 6.0 * (k1.0[a] + 2.0 * k2.0[a] + 2.0 * k3.0[a] + k4.0[a]);
                den[a] += h / 6.0 * (k1.1[a] + 2.0 * k2.1[a] + 2.0 * k3.1[a] + k4.1[a]);
            }
            // The new sample must itself be a valid state.
            let _ = squared_speed(field, &en, &den)?;
            Ok((en, den))
        })();
        match result {
            Ok((en, den)) => {
                e = en;
                de = den;
                let tau = (i + 1) as f64 * h;
                speeds.push(squared_speed(field, &e, &de)?);
                samples.push(PathSample { tau, e: e.clone(), de: de.clone() });
            }
            Err(err) if is_domain_exit(&err) => {
                exited = true;
                break 'steps;
            }
            Err(err) => return Err(err),
        }
    }

    let scale = v0.abs().max(1e-300);
    let speed_drift = speeds.iter().fold(0.0f64, |w, v| w.max((v - v0).abs() / scale));
    let length = thermodynamic_length_of_samples(&samples, &speeds)?;
    let cumulative_length = cumulative_lengths(&samples, &speeds);
    Ok(GeodesicPath {
        samples,
        length,
        cumulative_length,
        entropy_trace: Vec::new(),
        admissible: None,
        violation_tau: None,
        exited_domain: exited,
        speed_drift,
    })
}

fn sample_speeds(field: &MetricField, samples: &[PathSample]) -> Result<Vec<f64>> {
    let mut speeds = Vec::with_capacity(samples.len());
    for s in samples {
        speeds.push(squared_speed(field, &s.e, &s.de)?);
    }
    Ok(speeds)
}

fn speed_values(squared: &[f64]) -> Result<Vec<f64>> {
    let scale = squared.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * (1.0 + scale);
    let mut out = Vec::with_capacity(squared.len());
    for q in squared {
        if *q < -tol {
            return Err(GtdError::DegenerateMetric(format!(
                "negative squared speed {q}; the metric is indefinite along the path"
            )));
        }
        out.push(q.max(0.0).sqrt());
    }
    Ok(out)
}

fn check_uniform(samples: &[PathSample]) -> Result<f64> {
    let m = samples.len() - 1;
    let h = (samples[m].tau - samples[0].tau) / m as f64;
    for i in 0..m {
        let d = samples[i + 1].tau - samples[i].tau;
        if (d - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(GtdError::Param("length quadrature needs uniformly spaced samples".into()));
        }
    }
    Ok(h)
}

fn thermodynamic_length_of_samples(samples: &[PathSample], squared: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Ok(0.0);
    }
    let v = speed_values(squared)?;
    let h = check_uniform(samples)?;
    let m = samples.len() - 1;
    // Composite Simpson when the interval count is even; an odd count >= 3
    // closes with a 3/8 block; one interval falls back to the trapezoid.
    let mut w = vec![0.0; m + 1];
    match m {
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        m if m % 2 == 0 => {
            w[0] = h / 3.0;
            w[m] = h / 3.0;
            for (i, wi) in w.iter_mut().enumerate().take(m).skip(1) {
                *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
            }
        }
        _ => {
            let head = m - 3;
            if head == 0 {
                for (i, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[i] = 3.0 * h / 8.0 * c;
                }
            } else {
                w[0] = h / 3.0;
                for (i, wi) in w.iter_mut().enumerate().take(head).skip(1) {
                    *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
                }
                w[head] = h / 3.0;
                for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[head + j] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    Ok(w.iter().zip(&v).map(|(wi, vi)| wi * vi).sum())
}

fn cumulative_lengths(samples: &[PathSample], squared: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; samples.len()];
    if samples.len() < 2 {
        return out;
    }
    let v: Vec<f64> = squared.iter().map(|q| q.max(0.0).sqrt()).collect();
    for i in 1..samples.len() {
        let dt = samples[i].tau - samples[i - 1].tau;
        out[i] = out[i - 1] + 0.5 * dt * (v[i] + v[i - 1]);
    }
    out
}

/// Thermodynamic length of a sampled path under `field`: the integral of
/// sqrt(g_ab E'^a E'^b) by composite Simpson quadrature on the uniform
/// sample grid.
pub fn thermodynamic_length(field: &MetricField, path: &GeodesicPath) -> Result<f64> {
    let squared = sample_speeds(field, &path.samples)?;
    thermodynamic_length_of_samples(&path.samples, &squared)
}

fn entropy_at(eq: &FundamentalEquation, e: &[f64]) -> Result<f64> {
    match eq.representation() {
        Representation::Entropy => eq.value(e),
        Representation::Energy => {
            let idx = eq
                .coords()
                .iter()
                .position(|c| c == "S")
                .ok_or_else(|| {
                    GtdError::Param(
                        "energy-representation second-law check needs an S coordinate".into(),
                    )
                })?;
            Ok(e[idx])
        }
    }
}

/// Absolute slack allowed on each entropy increment.
const SECOND_LAW_SLACK: f64 = 1e-10;

/// Entropy monotonicity along the path: admissible when every increment is
/// at least -1e-10, together with the first violating parameter value.
pub fn second_law_filter(
    eq: &FundamentalEquation,
    path: &GeodesicPath,
) -> Result<(bool, Option<f64>)> {
    let mut prev: Option<f64> = None;
    for s in &path.samples {
        let val = entropy_at(eq, &s.e)?;
        if let Some(p) = prev {
            if val - p < -SECOND_LAW_SLACK {
                return Ok((false, Some(s.tau)));
            }
        }
        prev = Some(val);
    }
    Ok((true, None))
}

/// Fill `entropy_trace`, `admissible`, and `violation_tau` on the path from
/// the given fundamental equation.
pub fn annotate_second_law(eq: &FundamentalEquation, path: &mut GeodesicPath) -> Result<()> {
    let mut trace = Vec::with_capacity(path.samples.len());
    for s in &path.samples {
        trace.push(entropy_at(eq, &s.e)?);
    }
    let (ok, violation) = second_law_filter(eq, path)?;
    path.entropy_trace = trace;
    path.admissible = Some(ok);
    path.violation_tau = violation;
    Ok(())
}

/// Solve the two-point boundary problem between `e_start` and `e_end` with
/// parameter normalized to [0, 1]: a damped Newton iteration on the initial
/// velocity, with the miss measured in the metric norm at the target.
///
/// # Errors
/// `NoConvergence` with the iteration count and best miss when the solver
/// stalls or exceeds its iteration budget.
pub fn shoot_between(
    field: &MetricField,
    e_start: &[f64],
    e_end: &[f64],
    tol: f64,
) -> Result<GeodesicPath> {
    let n = field.dimension();
    if e_start.len() != n || e_end.len() != n {
        return Err(GtdError::Param("endpoint length must match the metric dimension".into()));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(GtdError::Param("tolerance must be positive and finite".into()));
    }
    let g_end = field.components(e_end)?;

    let miss = |v: &DVector<f64>| -> Result<(DVector<f64>, f64)> {
        let path = integrate_geodesic(field, e_start, v.as_slice(), 1.0, SHOOT_STEP)?;
        if path.exited_domain {
            return Err(GtdError::Domain("trial geodesic left the domain".into()));
        }
        let last = &path.samples[path.samples.len() - 1];
        let d = DVector::from_iterator(n, last.e.iter().zip(e_end).map(|(a, b)| a - b));
        let err = (d.transpose() * &g_end * &d)[(0, 0)].max(0.0).sqrt();
        Ok((d, err))
    };

    let mut v = DVector::from_iterator(n, e_start.iter().zip(e_end).map(|(a, b)| b - a));
    let (mut d, mut err) = miss(&v)?;
    let mut best = err;
    let max_iter = 50usize;
    for iter in 0..max_iter {
        if err < tol {
            let path = integrate_geodesic(field, e_start, v.as_slice(), 1.0, SHOOT_STEP)?;
            return Ok(path);
        }
        // Central-difference Jacobian of the miss vector in the velocity.
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let hv = 1e-6 * v[j].abs().max(1.0);
            let mut vp = v.clone();
            vp[j] += hv;
            let mut vm = v.clone();
            vm[j] -= hv;
            let (dp, _) = miss(&vp).map_err(|_| GtdError::NoConvergence {
                iterations: iter,
                best_error: best,
            })?;
            let (dm, _) = miss(&vm).map_err(|_| GtdError::NoConvergence {
                iterations: iter,
                best_error: best,
            })?;
            for i in 0..n {
                jac[(i, j)] = (dp[i] - dm[i]) / (2.0 * hv);
            }
        }
        let delta = jac
            .lu()
            .solve(&(-&d))
            .ok_or(GtdError::NoConvergence { iterations: iter, best_error: best })?;
        // Backtracking damping: accept the largest halved step that improves
        // the miss.
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..7 {
            let trial = &v + &delta * alpha;
            if let Ok((dt, et)) = miss(&trial) {
                if et < err {
                    v = trial;
                    d = dt;
                    err = et;
                    best = best.min(err);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(GtdError::NoConvergence { iterations: iter + 1, best_error: best });
        }
    }
    if err < tol {
        return integrate_geodesic(field, e_start, v.as_slice(), 1.0, SHOOT_STEP);
    }
    Err(GtdError::NoConvergence { iterations: max_iter, best_error: best })
}

/// Chart in which the conformally flat metric of the primary two-variable
/// catalog system becomes Euclidean: componentwise logarithms.
///
/// # Errors
/// `Domain` unless both coordinates are positive.
pub fn flat_chart_ideal_gas(e: &[f64]) -> Result<(f64, f64)> {
    if e.len() != 2 {
        return Err(GtdError::Param("the flat chart is two-dimensional".into()));
    }
    if e[0] <= 0.0 || e[1] <= 0.0 {
        return Err(GtdError::Domain(format!("flat chart needs positive coordinates, got {e:?}")));
    }
    Ok((e[0].ln(), e[1].ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhaseMetricSpec;
    use crate::systems::{catalog_gen_ideal_energy, catalog_ideal_gas};
    use approx::assert_relative_eq;

    fn log_flat_field() -> MetricField {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let spec = PhaseMetricSpec::constant(-1, -1.0, Representation::Entropy).unwrap();
        MetricField::induced(&spec, &eq).unwrap()
    }

    #[test]
    fn rhs_matches_hand_computed_symbols() {
        // g = diag(1/U^2, 1/V^2): Gamma^U_UU = -1/U, so E''^U = E'^2/U.
        let field = log_flat_field();
        let (de, acc) = geodesic_rhs(&field, &[2.0, 3.0], &[1.0, 0.0]).unwrap();
        assert_eq!(de, vec![1.0, 0.0]);
        assert_relative_eq!(acc[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(acc[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exponential_geodesic_reaches_e_with_unit_drift() {
        let field = log_flat_field();
        let path = integrate_geodesic(&field, &[1.0, 1.0], &[1.0, 1.0], 1.0, 1e-3).unwrap();
        let last = path.samples.last().unwrap();
        assert_relative_eq!(last.e[0], std::f64::consts::E, max_relative = 1e-9);
        assert_relative_eq!(last.e[1], std::f64::consts::E, max_relative = 1e-9);
        assert!(path.speed_drift < 1e-10, "drift {}", path.speed_drift);
        assert_relative_eq!(path.length, std::f64::consts::SQRT_2, max_relative = 1e-9);
        assert!(!path.exited_domain);
        // Cumulative length grows linearly for this constant-speed path.
        let mid = path.samples.len() / 2;
        assert_relative_eq!(
            path.cumulative_length[mid],
            std::f64::consts::SQRT_2 * path.samples[mid].tau,
            max_relative = 1e-9
        );
    }

    #[test]
    fn entropy_trace_is_linear_and_admissible() {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let field = log_flat_field();
        let mut path = integrate_geodesic(&field, &[1.0, 1.0], &[1.0, 1.0], 1.0, 1e-2).unwrap();
        annotate_second_law(&eq, &mut path).unwrap();
        assert_eq!(path.admissible, Some(true));
        assert_eq!(path.violation_tau, None);
        for (s, val) in path.samples.iter().zip(&path.entropy_trace) {
            assert_relative_eq!(*val, 2.5 * s.tau, epsilon = 1e-9);
        }
    }

    #[test]
    fn reversed_path_is_rejected_by_the_filter() {
        let eq = catalog_ideal_gas(1.0).unwrap();
        let field = log_flat_field();
        let mut path =
            integrate_geodesic(&field, &[3.0, 3.0], &[-1.0, -1.0], 1.0, 1e-2).unwrap();
        annotate_second_law(&eq, &mut path).unwrap();
        assert_eq!(path.admissible, Some(false));
        let v = path.violation_tau.unwrap();
        assert_relative_eq!(v, path.samples[1].tau, epsilon = 1e-15);
    }

    #[test]
    fn energy_representation_reads_entropy_from_the_chart() {
        let eq = catalog_gen_ideal_energy(1.0, 1.0).unwrap();
        let mk = |svals: &[f64]| GeodesicPath {
            samples: svals
                .iter()
                .enumerate()
                .map(|(i, s)| PathSample { tau: i as f64, e: vec![*s, 1.0], de: vec![0.0, 0.0] })
                .collect(),
            length: 0.0,
            cumulative_length: vec![0.0; svals.len()],
            entropy_trace: Vec::new(),
            admissible: None,
            violation_tau: None,
            exited_domain: false,
            speed_drift: 0.0,
        };
        assert_eq!(second_law_filter(&eq, &mk(&[0.0, 0.5, 1.0])).unwrap(), (true, None));
        assert_eq!(second_law_filter(&eq, &mk(&[0.0, -0.5])).unwrap(), (false, Some(1.0)));
    }

    #[test]
    fn step_is_snapped_to_divide_the_interval() {
        let field = log_flat_field();
        let path = integrate_geodesic(&field, &[1.0, 1.0], &[0.1, 0.1], 1.0, 0.3).unwrap();
        assert_eq!(path.samples.len(), 5);
        assert_eq!(path.samples.last().unwrap().tau, 1.0);
    }

    #[test]
    fn domain_exit_truncates_with_flag() {
        let field = MetricField::from_fn(2, |e| {
            if e[0] <= 0.05 {
                Err(GtdError::Domain(format!("U = {}", e[0])))
            } else {
                Ok(DMatrix::identity(2, 2))
            }
        });
        let path = integrate_geodesic(&field, &[1.0, 1.0], &[-2.0, 0.0], 1.0, 0.01).unwrap();
        assert!(path.exited_domain);
        let last = path.samples.last().unwrap();
        assert!(last.e[0] > 0.05);
        assert!(path.samples.len() < 60);
    }

    #[test]
    fn straight_line_length_is_exact_for_odd_interval_counts() {
        let field = MetricField::constant(DMatrix::identity(2, 2));
        // Three intervals exercise the 3/8 closing block.
        let path = integrate_geodesic(&field, &[0.0, 0.0], &[3.0, 4.0], 0.9, 0.3).unwrap();
        assert_eq!(path.samples.len(), 4);
        assert_relative_eq!(path.length, 5.0 * 0.9, max_relative = 1e-13);
        let again = thermodynamic_length(&field, &path).unwrap();
        assert_relative_eq!(again, path.length, max_relative = 1e-15);
    }

    #[test]
    fn non_uniform_samples_are_rejected_by_the_quadrature() {
        let field = MetricField::constant(DMatrix::identity(1, 1));
        let path = GeodesicPath {
            samples: vec![
                PathSample { tau: 0.0, e: vec![0.0], de: vec![1.0] },
                PathSample { tau: 0.1, e: vec![0.1], de: vec![1.0] },
                PathSample { tau: 0.5, e: vec![0.5], de: vec![1.0] },
            ],
            length: 0.0,
            cumulative_length: vec![0.0; 3],
            entropy_trace: Vec::new(),
            admissible: None,
            violation_tau: None,
            exited_domain: false,
            speed_drift: 0.0,
        };
        assert!(matches!(thermodynamic_length(&field, &path), Err(GtdError::Param(_))));
    }

    #[test]
    fn integrator_error_falls_at_fourth_order()  {
        let field = log_flat_field();
        let target = std::f64::consts::E;
        let endpoint_err = |step: f64| -> f64 {
            let path = integrate_geodesic(&field, &[1.0, 1.0], &[1.0, 1.0], 1.0, step).unwrap();
            let last = path.samples.last().unwrap();
            ((last.e[0] - target).powi(2) + (last.e[1] - target).powi(2)).sqrt()
        };
        let ratio = endpoint_err(0.1) / endpoint_err(0.05);
        assert!((10.0..22.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn shooting_recovers_the_exponential_family() {
        let field = log_flat_field();
        let target = [std::f64::consts::E, std::f64::consts::E.powi(2)];
        let path = shoot_between(&field, &[1.0, 1.0], &target, 1e-8).unwrap();
        let first = &path.samples[0];
        assert_relative_eq!(first.de[0], 1.0, max_relative = 1e-6);
        assert_relative_eq!(first.de[1], 2.0, max_relative = 1e-6);
        let last = path.samples.last().unwrap();
        assert_relative_eq!(last.e[0], target[0], max_relative = 1e-7);
        assert_relative_eq!(last.e[1], target[1], max_relative = 1e-7);
        assert_eq!(last.tau, 1.0);
    }

    #[test]
    fn shooting_reports_no_convergence_on_unreachable_targets() {
        // A target outside the positive quadrant cannot be reached without
        // leaving the domain.
        let field = log_flat_field();
        let err = shoot_between(&field, &[1.0, 1.0], &[1.0, 1.0e9], 1e-12);
        match err {
            Err(GtdError::NoConvergence { best_error, .. }) => {
                assert!(best_error.is_finite());
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn flat_chart_straightens_geodesics() {
        let field = log_flat_field();
        let path = integrate_geodesic(&field, &[1.0, 1.0], &[1.0, 2.0], 1.0, 1e-2).unwrap();
        // In the log chart the path must be a straight segment.
        let pts: Vec<(f64, f64)> = path
            .samples
            .iter()
            .map(|s| flat_chart_ideal_gas(&s.e).unwrap())
            .collect();
        let (x0, y0) = pts[0];
        let (x1, y1) = *pts.last().unwrap();
        let mut worst = 0.0f64;
        for (x, y) in &pts {
            // Distance from the chord through the endpoints.
            let t = ((x - x0) * (x1 - x0) + (y - y0) * (y1 - y0))
                / ((x1 - x0).powi(2) + (y1 - y0).powi(2));
            let px = x0 + t * (x1 - x0);
            let py = y0 + t * (y1 - y0);
            worst = worst.max(((x - px).powi(2) + (y - py).powi(2)).sqrt());
        }
        assert!(worst < 1e-8, "deviation {worst}");
    }
}
