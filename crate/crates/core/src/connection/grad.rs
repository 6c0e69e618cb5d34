use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalarfn::Real;

/// Capacity of the gradient; the tangent bundle of an `n`-manifold needs `2n`.
pub const MAX_VARS: usize = 16;

/// A value with its gradient with respect to up to [`MAX_VARS`] coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grad {
    pub v: f64,
    pub d: [f64; MAX_VARS],
}

impl Grad {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; MAX_VARS],
        }
    }

    /// Coordinate number `k` with value `v`.
    pub fn variable(v: f64, k: usize) -> Self {
        let mut g = Self::constant(v);
        g.d[k] = 1.0;
        g
    }

    pub fn with_gradient(v: f64, grad: &[f64]) -> Self {
        let mut g = Self::constant(v);
        g.d[..grad.len()].copy_from_slice(grad);
        g
    }

    /// `f(self)` given `f` and `f'` at `self.v`.
    pub fn chain(self, value: f64, slope: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= slope;
        }
        Self { v: value, d }
    }

    fn zip(self, o: Self, f: impl Fn(f64, f64) -> f64) -> [f64; MAX_VARS] {
        let mut d = [0.0; MAX_VARS];
        for k in 0..MAX_VARS {
            d[k] = f(self.d[k], o.d[k]);
        }
        d
    }
}

impl Add for Grad {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: self.zip(o, |a, b| a + b),
        }
    }
}

impl Sub for Grad {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: self.zip(o, |a, b| a - b),
        }
    }
}

impl Mul for Grad {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (u, w) = (self.v, o.v);
        Self {
            v: u * w,
            d: self.zip(o, |a, b| a * w + u * b),
        }
    }
}

impl Div for Grad {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let (u, w) = (self.v, o.v);
        let q = u / w;
        Self {
            v: q,
            d: self.zip(o, |a, b| (a - q * b) / w),
        }
    }
}

impl Neg for Grad {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.v, -1.0)
    }
}

impl Add<f64> for Grad {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl Sub<f64> for Grad {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.v -= o;
        self
    }
}

impl Mul<f64> for Grad {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        self.chain(self.v * o, o)
    }
}

impl Div<f64> for Grad {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self.chain(self.v / o, 1.0 / o)
    }
}

impl Real for Grad {
    fn cst(v: f64) -> Self {
        Grad::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Grad::constant(1.0);
        }
        self.chain(self.v.powi(k), k as f64 * self.v.powi(k - 1))
    }
    fn powf(self, p: f64) -> Self {
        self.chain(self.v.powf(p), p * self.v.powf(p - 1.0))
    }
}
