//! Third-order jets with forward-propagating arithmetic.
//!
//! A [`Jet3`] carries the value, gradient, Hessian, and third derivatives of a
//! scalar function of `n` variables at one point. Arithmetic on jets applies
//! the product and chain rules through third order, so any expression built
//! from seeded variables yields exact derivatives (up to roundoff) without
//! finite differencing.

use nalgebra::{DMatrix, DVector};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Dense totally symmetric rank-3 array of size n^3.
///
/// Accessors sort the index triple, so all permutations of (i, j, k) share
/// one slot and symmetry is exact by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Sym3 {
    n: usize,
    data: Vec<f64>,
}

impl Sym3 {
    /// Zero array for `n` variables.
    pub fn zeros(n: usize) -> Self {
        Sym3 { n, data: vec![0.0; n * n * n] }
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize, k: usize) -> usize {
        let mut t = [i, j, k];
        t.sort_unstable();
        (t[0] * self.n + t[1]) * self.n + t[2]
    }

    /// Entry (i, j, k), invariant under index permutation.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.slot(i, j, k)]
    }

    /// Overwrite entry (i, j, k) and all its permutations.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let s = self.slot(i, j, k);
        self.data[s] = v;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when all entries are finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest violation of total symmetry over all index permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    for (a, b, c) in [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        worst = worst.max((v - self.get(a, b, c)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Value and derivatives to third order of a scalar function of `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet3 {
    /// Function value.
    pub value: f64,
    /// Gradient, length n.
    pub grad: DVector<f64>,
    /// Hessian, n by n, symmetric.
    pub hess: DMatrix<f64>,
    /// Third derivatives, totally symmetric.
    pub third: Sym3,
}

impl Jet3 {
    /// Constant jet: value `c`, all derivatives zero.
    pub fn constant(n: usize, c: f64) -> Self {
        Jet3 {
            value: c,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
            third: Sym3::zeros(n),
        }
    }

    /// Seed for variable `i` at value `x`: unit gradient slot, higher orders zero.
    pub fn variable(n: usize, i: usize, x: f64) -> Self {
        let mut j = Jet3::constant(n, x);
        j.grad[i] = 1.0;
        j
    }

    /// Seeds for all `n` variables at the point `x`.
    pub fn variables(x: &[f64]) -> Vec<Jet3> {
        (0..x.len()).map(|i| Jet3::variable(x.len(), i, x[i])).collect()
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// True when every stored entry is finite.
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
            && self.third.is_finite()
    }

    /// Zero out derivatives above `order` (1, 2, or 3).
    pub fn truncated(mut self, order: u8) -> Self {
        if order < 3 {
            self.third = Sym3::zeros(self.dim());
        }
        if order < 2 {
            self.hess = DMatrix::zeros(self.dim(), self.dim());
        }
        self
    }

    /// Multiply by a plain scalar.
    pub fn scale(&self, c: f64) -> Jet3 {
        let mut out = self.clone();
        out.value *= c;
        out.grad *= c;
        out.hess *= c;
        for v in &mut out.third.data {
            *v *= c;
        }
        out
    }

    /// Chain rule through a univariate map with derivatives `d = [f(u), f'(u), f''(u), f'''(u)]`
    /// evaluated at `u = self.value`.
    pub fn compose(&self, d: [f64; 4]) -> Jet3 {
        let n = self.dim();
        let g = &self.grad;
        let mut out = Jet3::constant(n, d[0]);
        for i in 0..n {
            out.grad[i] = d[1] * g[i];
        }
        for i in 0..n {
            for j in 0..n {
                out.hess[(i, j)] = d[2] * g[i] * g[j] + d[1] * self.hess[(i, j)];
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = d[3] * g[i] * g[j] * g[k]
                        + d[2]
                            * (self.hess[(i, j)] * g[k]
                                + self.hess[(i, k)] * g[j]
                                + self.hess[(j, k)] * g[i])
                        + d[1] * self.third.get(i, j, k);
                    out.third.set(i, j, k, t);
                }
            }
        }
        out
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Jet3 {
        let v = self.value;
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    /// Exponential.
    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.compose([e, e, e, e])
    }

    /// Reciprocal.
    pub fn recip(&self) -> Jet3 {
        let v = self.value;
        let v2 = v * v;
        self.compose([1.0 / v, -1.0 / v2, 2.0 / (v2 * v), -6.0 / (v2 * v2)])
    }

    /// Real power with arbitrary exponent; requires a positive base for non-integer `p`.
    pub fn powf(&self, p: f64) -> Jet3 {
        let v = self.value;
        self.compose([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ])
    }

    /// Integer power; valid for negative bases.
    pub fn powi(&self, m: i32) -> Jet3 {
        let v = self.value;
        let c1 = f64::from(m);
        let c2 = c1 * f64::from(m - 1);
        let c3 = c2 * f64::from(m - 2);
        self.compose([v.powi(m), c1 * v.powi(m - 1), c2 * v.powi(m - 2), c3 * v.powi(m - 3)])
    }

    /// Square root of a positive value.
    pub fn sqrt(&self) -> Jet3 {
        let v = self.value;
        let s = v.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)])
    }

    fn add_ref(&self, rhs: &Jet3) -> Jet3 {
        let mut out = self.clone();
        out.value += rhs.value;
        out.grad += &rhs.grad;
        out.hess += &rhs.hess;
        for (a, b) in out.third.data.iter_mut().zip(rhs.third.data.iter()) {
            *a += *b;
        }
        out
    }

    fn sub_ref(&self, rhs: &Jet3) -> Jet3 {
        self.add_ref(&rhs.neg_ref())
    }

    fn neg_ref(&self) -> Jet3 {
        self.scale(-1.0)
    }

    fn mul_ref(&self, rhs: &Jet3) -> Jet3 {
        let n = self.dim();
        let (a, b) = (self, rhs);
        let mut out = Jet3::constant(n, a.value * b.value);
        for i in 0..n {
            out.grad[i] = a.grad[i] * b.value + b.grad[i] * a.value;
        }
        for i in 0..n {
            for j in 0..n {
                out.hess[(i, j)] = a.hess[(i, j)] * b.value
                    + b.hess[(i, j)] * a.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i];
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = a.third.get(i, j, k) * b.value
                        + b.third.get(i, j, k) * a.value
                        + a.hess[(i, j)] * b.grad[k]
                        + a.hess[(i, k)] * b.grad[j]
                        + a.hess[(j, k)] * b.grad[i]
                        + b.hess[(i, j)] * a.grad[k]
                        + b.hess[(i, k)] * a.grad[j]
                        + b.hess[(j, k)] * a.grad[i];
                    out.third.set(i, j, k, t);
                }
            }
        }
        out
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $delegate:ident) => {
        impl $trait<&Jet3> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: &Jet3) -> Jet3 {
                self.$delegate(rhs)
            }
        }
        impl $trait<Jet3> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                self.$delegate(&rhs)
            }
        }
        impl $trait<&Jet3> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: &Jet3) -> Jet3 {
                self.$delegate(rhs)
            }
        }
        impl $trait<Jet3> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                self.$delegate(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, add_ref);
jet_binop!(Sub, sub, sub_ref);
jet_binop!(Mul, mul, mul_ref);

impl Div<&Jet3> for &Jet3 {
    type Output = Jet3;
    fn div(self, rhs: &Jet3) -> Jet3 {
        self.mul_ref(&rhs.recip())
    }
}
impl Div<Jet3> for Jet3 {
    type Output = Jet3;
    fn div(self, rhs: Jet3) -> Jet3 {
        self.mul_ref(&rhs.recip())
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.neg_ref()
    }
}
impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.neg_ref()
    }
}

impl Add<f64> for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        let mut out = self.clone();
        out.value += rhs;
        out
    }
}
impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        &self + rhs
    }
}
impl Sub<f64> for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self + (-rhs)
    }
}
impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        &self + (-rhs)
    }
}
impl Mul<f64> for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}
impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}
