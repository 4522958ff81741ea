//! Central finite differences with one Richardson extrapolation level.
//!
//! Base steps are scaled per coordinate by `max(1, |x_i|)`. The gradient step
//! is the cube root of machine epsilon; second- and third-order stencils use
//! larger exponents because their roundoff error grows as 1/h^2 and 1/h^3.

use super::jet::{Jet3, Sym3};
use nalgebra::{DMatrix, DVector};

/// Base step sizes per derivative order, before the `max(1, |x_i|)` scaling.
#[derive(Clone, Copy, Debug)]
pub struct FdSteps {
    /// Gradient step, default eps^(1/3).
    pub grad: f64,
    /// Hessian step, default eps^(1/6).
    pub hess: f64,
    /// Third-derivative step, default eps^(1/7).
    pub third: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        let eps = f64::EPSILON;
        FdSteps { grad: eps.powf(1.0 / 3.0), hess: eps.powf(1.0 / 6.0), third: eps.powf(1.0 / 7.0) }
    }
}

impl FdSteps {
    /// Uniformly scale all base steps (used by the CLI override).
    pub fn scaled(self, factor: f64) -> Self {
        FdSteps { grad: self.grad * factor, hess: self.hess * factor, third: self.third * factor }
    }
}

fn coord_steps(x: &[f64], base: f64) -> Vec<f64> {
    x.iter().map(|xi| base * xi.abs().max(1.0)).collect()
}

fn eval_shifted<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], shifts: &[(usize, f64)]) -> f64 {
    let mut y = x.to_vec();
    for &(i, d) in shifts {
        y[i] += d;
    }
    f(&y)
}

/// One Richardson level for an O(h^2) estimator: combine A(h) and A(h/2).
fn richardson(full: f64, half: f64) -> f64 {
    (4.0 * half - full) / 3.0
}

fn grad_at<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64]) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(n, |i, _| {
        (eval_shifted(f, x, &[(i, h[i])]) - eval_shifted(f, x, &[(i, -h[i])])) / (2.0 * h[i])
    })
}

/// Central-difference gradient with one Richardson level.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &FdSteps) -> DVector<f64> {
    let h = coord_steps(x, steps.grad);
    let h2: Vec<f64> = h.iter().map(|v| v / 2.0).collect();
    let full = grad_at(f, x, &h);
    let half = grad_at(f, x, &h2);
    DVector::from_fn(x.len(), |i, _| richardson(full[i], half[i]))
}

fn hess_at<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = h[i];
        m[(i, i)] = (eval_shifted(f, x, &[(i, hi)]) - 2.0 * f0 + eval_shifted(f, x, &[(i, -hi)]))
            / (hi * hi);
        for j in (i + 1)..n {
            let hj = h[j];
            let v = (eval_shifted(f, x, &[(i, hi), (j, hj)])
                - eval_shifted(f, x, &[(i, hi), (j, -hj)])
                - eval_shifted(f, x, &[(i, -hi), (j, hj)])
                + eval_shifted(f, x, &[(i, -hi), (j, -hj)]))
                / (4.0 * hi * hj);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Central-difference Hessian with one Richardson level.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &FdSteps) -> DMatrix<f64> {
    let h = coord_steps(x, steps.hess);
    let h2: Vec<f64> = h.iter().map(|v| v / 2.0).collect();
    let full = hess_at(f, x, &h);
    let half = hess_at(f, x, &h2);
    DMatrix::from_fn(x.len(), x.len(), |i, j| richardson(full[(i, j)], half[(i, j)]))
}

fn third_at<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: &[f64]) -> Sym3 {
    let n = x.len();
    let mut t = Sym3::zeros(n);
    // Second difference along i evaluated at an offset point.
    let d2 = |i: usize, extra: &[(usize, f64)]| -> f64 {
        let mut plus = extra.to_vec();
        plus.push((i, h[i]));
        let mut minus = extra.to_vec();
        minus.push((i, -h[i]));
        (eval_shifted(f, x, &plus) - 2.0 * eval_shifted(f, x, extra)
            + eval_shifted(f, x, &minus))
            / (h[i] * h[i])
    };
    for i in 0..n {
        let hi = h[i];
        let tiii = (eval_shifted(f, x, &[(i, 2.0 * hi)]) - 2.0 * eval_shifted(f, x, &[(i, hi)])
            + 2.0 * eval_shifted(f, x, &[(i, -hi)])
            - eval_shifted(f, x, &[(i, -2.0 * hi)]))
            / (2.0 * hi * hi * hi);
        t.set(i, i, i, tiii);
        for j in 0..n {
            if j == i {
                continue;
            }
            let hj = h[j];
            let tiij = (d2(i, &[(j, hj)]) - d2(i, &[(j, -hj)])) / (2.0 * hj);
            t.set(i, i, j, tiij);
            t.set(i, j, i, tiij);
            t.set(j, i, i, tiij);
            for k in (j + 1)..n {
                if k == i {
                    continue;
                }
                let hk = h[k];
                let mut v = 0.0;
                for si in [1.0, -1.0] {
                    for sj in [1.0, -1.0] {
                        for sk in [1.0, -1.0] {
                            v += si
                                * sj
                                * sk
                                * eval_shifted(f, x, &[(i, si * hi), (j, sj * hj), (k, sk * hk)]);
                        }
                    }
                }
                v /= 8.0 * hi * hj * hk;
                for (a, b, c) in
                    [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
                {
                    t.set(a, b, c, v);
                }
            }
        }
    }
    t
}

/// Central-difference third derivatives with one Richardson level.
pub fn fd_third<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &FdSteps) -> Sym3 {
    let h = coord_steps(x, steps.third);
    let h2: Vec<f64> = h.iter().map(|v| v / 2.0).collect();
    let full = third_at(f, x, &h);
    let half = third_at(f, x, &h2);
    let n = x.len();
    let mut t = Sym3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                t.set(i, j, k, richardson(full.get(i, j, k), half.get(i, j, k)));
            }
        }
    }
    t
}

/// Full finite-difference jet up to `order` (1, 2, or 3); omitted orders stay zero.
pub fn fd_jet<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], order: u8, steps: &FdSteps) -> Jet3 {
    let n = x.len();
    let mut jet = Jet3::constant(n, f(x));
    jet.grad = fd_gradient(f, x, steps);
    if order >= 2 {
        jet.hess = fd_hessian(f, x, steps);
    }
    if order >= 3 {
        jet.third = fd_third(f, x, steps);
    }
    jet
}
