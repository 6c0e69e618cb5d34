//! First-order jets and the scalar trait shared by every numeric layer.
//!
//! `Jet1<f64>` carries a value and its derivative with respect to the energy
//! density. Nesting (`Jet1<Jet1<f64>>`) yields second derivatives, which the
//! coefficient formulas need whenever they contain a primed input.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::ScalarError;

/// Scalars the expression evaluator, the coefficient formulas and the
/// tangent-bundle assembly are generic over.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Smallest denominator magnitude accepted by [`checked_div`].
pub const DIV_EPS: f64 = 1e-12;

/// Division that refuses near-zero denominators instead of producing
/// infinities. `what` names the denominator in the error.
pub fn checked_div<R: Real>(num: R, den: R, what: &str) -> Result<R, ScalarError> {
    let d = den.value();
    if !d.is_finite() || d.abs() < DIV_EPS {
        return Err(ScalarError::SmallDenominator {
            what: what.to_string(),
            value: d,
        });
    }
    Ok(num / den)
}

/// Value and first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1<T = f64> {
    pub value: T,
    pub deriv: T,
}

/// Second-order jet used when a formula needs the derivative of a primed input.
pub type Jet2 = Jet1<Jet1<f64>>;

impl<T: Real> Jet1<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Self { value, deriv }
    }

    /// The independent variable itself, seeded at `t`.
    pub fn variable(t: T) -> Self {
        Self::new(t, T::one())
    }

    pub fn constant(v: T) -> Self {
        Self::new(v, T::zero())
    }
}

impl Jet1<Jet1<f64>> {
    /// Seeds the independent variable for second-order evaluation.
    pub fn variable2(t: f64) -> Self {
        Jet1::new(Jet1::new(t, 1.0), Jet1::new(1.0, 0.0))
    }

    /// The function as a first-order jet.
    pub fn lower(&self) -> Jet1 {
        self.value
    }

    /// The derivative as a first-order jet `(f', f'')`.
    pub fn derivative(&self) -> Jet1 {
        self.deriv
    }

    pub fn second(&self) -> f64 {
        self.deriv.deriv
    }
}

impl<T: Real> Add for Jet1<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl<T: Real> Sub for Jet1<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl<T: Real> Mul for Jet1<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.value * o.value,
            self.deriv * o.value + self.value * o.deriv,
        )
    }
}

impl<T: Real> Div for Jet1<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        Self::new(q, (self.deriv - q * o.deriv) / o.value)
    }
}

impl<T: Real> Neg for Jet1<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl<T: Real> Add<f64> for Jet1<T> {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Self::new(self.value + o, self.deriv)
    }
}

impl<T: Real> Sub<f64> for Jet1<T> {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Self::new(self.value - o, self.deriv)
    }
}

impl<T: Real> Mul<f64> for Jet1<T> {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Self::new(self.value * o, self.deriv * o)
    }
}

impl<T: Real> Div<f64> for Jet1<T> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        Self::new(self.value / o, self.deriv / o)
    }
}

impl<T: Real> Real for Jet1<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(&self) -> f64 {
        self.value.value()
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Self::new(r, self.deriv / (r * 2.0))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.deriv * e)
    }
    fn ln(self) -> Self {
        Self::new(self.value.ln(), self.deriv / self.value)
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::one(),
            _ => Self::new(
                self.value.powi(k),
                self.deriv * self.value.powi(k - 1) * k as f64,
            ),
        }
    }
    fn powf(self, p: f64) -> Self {
        Self::new(
            self.value.powf(p),
            self.deriv * self.value.powf(p - 1.0) * p,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let f = Jet1::new(3.0, 2.0);
        let g = Jet1::new(-1.5, 0.25);
        let p = f * g;
        assert_eq!(p.value, -4.5);
        assert_eq!(p.deriv, 2.0 * -1.5 + 3.0 * 0.25);
        let q = f / g;
        assert!((q.deriv - (2.0 * -1.5 - 3.0 * 0.25) / 2.25).abs() < 1e-15);
    }

    #[test]
    fn nested_jets_give_second_derivative() {
        // t^3 at t = 2: f' = 12, f'' = 12
        let t = Jet2::variable2(2.0);
        let f = t * t * t;
        assert_eq!(f.value.value, 8.0);
        assert_eq!(f.value.deriv, 12.0);
        assert_eq!(f.deriv.value, 12.0);
        assert_eq!(f.second(), 12.0);
        let s = (t * 2.0 + 1.0).sqrt();
        // d2/dt2 sqrt(1+2t) = -(1+2t)^{-3/2}
        assert!((s.second() + 5f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn checked_div_rejects_tiny_denominators() {
        let err = checked_div(1.0, 1e-13, "a1").unwrap_err();
        assert!(matches!(err, ScalarError::SmallDenominator { .. }));
        assert_eq!(checked_div(1.0, 4.0, "a1").unwrap(), 0.25);
    }

    #[test]
    fn powi_zero_base() {
        let t = Jet1::variable(0.0);
        let f = t.powi(2);
        assert_eq!((f.value, f.deriv), (0.0, 0.0));
        let g = t.powi(1);
        assert_eq!((g.value, g.deriv), (0.0, 1.0));
    }
}
