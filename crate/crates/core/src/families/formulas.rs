//! Closed-form relations between the coefficients and their derivatives.
//!
//! Every function takes the coefficient values `k` and first derivatives
//! `dk` at energy density `t` on a base of curvature `c`; entries a formula
//! does not use are ignored. Generic over [`Real`] so the same code yields
//! values (`f64`) or values with their `t`-derivative (`Jet1`).

use crate::lift::Coeffs;
use crate::scalarfn::{checked_div, Real, ScalarError};

#[derive(Debug, Clone, Copy)]
pub struct Args<R> {
    pub t: R,
    pub c: f64,
    pub k: Coeffs<R>,
    pub dk: Coeffs<R>,
}

fn one<R: Real>() -> R {
    R::one()
}

/// Denominator of the integrability relations,
/// `a1 - 2t a1' - 2ct a2 - 4ct² a2'`.
pub fn integrability_denominator<R: Real>(a: &Args<R>) -> R {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    k.a1 - t * dk.a1 * 2.0 - t * k.a2 * (2.0 * c) - t * t * dk.a2 * (4.0 * c)
}

/// `(b1, b2, b3)` making `J` integrable on a space form.
pub fn integrability_b<R: Real>(a: &Args<R>) -> Result<[R; 3], ScalarError> {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    let den = integrability_denominator(a);
    let what = "a1 - 2t a1' - 2ct a2 - 4ct^2 a2'";
    let b1 = t * k.a2 * k.a2 * (2.0 * c * c) + t * k.a1 * dk.a2 * (2.0 * c) + k.a1 * dk.a1 - c
        + k.a3 * k.a3 * (3.0 * c);
    let b2 = t * dk.a3 * dk.a3 * 2.0 - t * dk.a1 * dk.a2 * 2.0
        + k.a2 * k.a2 * c
        + t * k.a2 * dk.a2 * (2.0 * c)
        + k.a1 * dk.a2;
    let b3 = k.a1 * dk.a3 + k.a2 * k.a3 * (2.0 * c) + t * dk.a2 * k.a3 * (4.0 * c)
        - t * k.a2 * dk.a3 * (2.0 * c);
    Ok([
        checked_div(b1, den, what)?,
        checked_div(b2, den, what)?,
        checked_div(b3, den, what)?,
    ])
}

/// `a1⁴ + 4a1²(a3²-1)ct + 4(1+a3²)²c²t²`, the denominator of the
/// anti-Kähler and special-complex rate formulas.
pub fn anti_kahler_denominator<R: Real>(a: &Args<R>) -> R {
    let (t, c, k) = (a.t, a.c, &a.k);
    let s = k.a3 * k.a3 + 1.0;
    let a1s = k.a1 * k.a1;
    a1s * a1s + a1s * (k.a3 * k.a3 - 1.0) * t * (4.0 * c) + s * s * t * t * (4.0 * c * c)
}

/// `(c1', c3')` for which `F = 0`.
pub fn anti_kahler_rates<R: Real>(a: &Args<R>) -> Result<[R; 2], ScalarError> {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    let (a1, a3, c1, c3) = (k.a1, k.a3, k.c1, k.c3);
    let (a1p, a3p) = (dk.a1, dk.a3);
    let s = a3 * a3 + 1.0;
    let d4 = anti_kahler_denominator(a);
    let d5 = a1 * d4;
    let what = "a1^4 + 4a1^2(a3^2-1)ct + 4(1+a3^2)^2c^2t^2";

    let n1 =
        a1 * a1 * (c3 * (a1 * (a3 + a3p * t) - a1p * a3 * t * 2.0) * 2.0 - c1 * s) * (-2.0 * c);
    let n2 = s
        * (c1 * t * (a1 * (s + a3 * a3p * t * 4.0) * 2.0 - a1p * s * t * 4.0) * c
            + a1 * a1 * t * (a1p * c1 - a3p * c3 * t * (2.0 * c)) * 2.0)
        * (-2.0 * c);
    let c1p = checked_div(n1, d4, what)? + checked_div(n2, d5, what)?;

    let m1 = a1
        * (c3 * (a1 + a3 * ((a1p * a3 - a1 * a3p) * t * 4.0 - a1 * a3 * 3.0))
            + a3 * c1 * (s + a3 * a3p * t * 2.0) * 2.0)
        * (2.0 * c);
    let a1s = a1 * a1;
    let m2 = (a3p * c1 - a1p * c3) * (a1s * a1s - s * s * t * t * (4.0 * c * c))
        - a1 * s * (a1p * a3 * c1 * 2.0 + s * c3 * c) * t * (4.0 * c);
    let c3p = checked_div(m1, d4, what)? + checked_div(m2, d5, what)?;
    Ok([c1p, c3p])
}

/// `d3 = (a3' c1 - a1' c3) / a1`.
pub fn anti_kahler_d3<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    checked_div(a.dk.a3 * a.k.c1 - a.dk.a1 * a.k.c3, a.k.a1, "a1")
}

/// `d1 = c c2 = c (2 a3 c3 - a2 c1) / a1` with `a2 = (1 + a3²)/a1`.
pub fn anti_kahler_d1<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let k = &a.k;
    let a2 = checked_div(k.a3 * k.a3 + 1.0, k.a1, "a1")?;
    Ok(checked_div(k.a3 * k.c3 * 2.0 - a2 * k.c1, k.a1, "a1")? * a.c)
}

/// `d1 = c (2 a1 a3 c3 - c1 (1 + a3²)) / a1²`.
pub fn conformal_d1<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let k = &a.k;
    let num = (k.a1 * k.a3 * k.c3 * 2.0 - k.c1 * (k.a3 * k.a3 + 1.0)) * a.c;
    checked_div(num, k.a1 * k.a1, "a1^2")
}

/// `(c1', d1')` forced by the cyclic identity on horizontal triples.
pub fn quasi_c1_d1_rates<R: Real>(a: &Args<R>) -> Result<[R; 2], ScalarError> {
    let (t, c, k) = (a.t, a.c, &a.k);
    let den = k.a1 + k.b1 * t * 2.0;
    let what = "a1 + 2t b1";
    let c1p = checked_div(
        (k.a1 * k.d1 + k.b3 * k.c3 * t * (2.0 * c)) * -2.0,
        den,
        what,
    )?;
    let d1p = checked_div((k.b3 * k.c3 * c - k.b1 * k.d1) * 2.0, den, what)?;
    Ok([c1p, d1p])
}

/// `c3'` of the quasi-anti-Kähler characterization (needs no other rate).
pub fn quasi_c3_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, c, k) = (a.t, a.c, &a.k);
    let s = k.a3 * k.a3 + 1.0;
    let shifted = k.a1 + k.b1 * t * 2.0;
    let first = checked_div(
        s * k.b3 * k.c1 * t * (2.0 * c),
        k.a1 * k.a1 * shifted,
        "a1^2 (a1 + 2t b1)",
    )?;
    let second = checked_div(
        k.a1 * (k.b3 * k.c1 - k.b1 * k.c3 - k.a3 * k.d1 * 2.0)
            + k.c3 * (s - k.a3 * k.b3 * t * 4.0) * c,
        k.a1 * shifted,
        "a1 (a1 + 2t b1)",
    )?;
    Ok(first + second)
}

/// `[(1 + a3²) c1² - a1 c3 (2 a3 c1 + a1 c3)] (a1 + 2 b1 t)`.
fn a3_rate_denominator<R: Real>(a: &Args<R>) -> R {
    let k = &a.k;
    ((k.a3 * k.a3 + 1.0) * k.c1 * k.c1 - k.a1 * k.c3 * (k.a3 * k.c1 * 2.0 + k.a1 * k.c3))
        * (k.a1 + k.b1 * a.t * 2.0)
}

/// `[c1 (1 + a3²) - a1 a3 c3] (a1 + 2 b1 t)`.
fn a1_rate_denominator<R: Real>(a: &Args<R>) -> R {
    let k = &a.k;
    (k.c1 * (k.a3 * k.a3 + 1.0) - k.a1 * k.a3 * k.c3) * (k.a1 + k.b1 * a.t * 2.0)
}

/// `a3'` of the quasi-anti-Kähler characterization.
pub fn quasi_a3_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, c, k) = (a.t, a.c, &a.k);
    let s = k.a3 * k.a3 + 1.0;
    let p = a3_rate_denominator(a);
    let what = "[(1+a3^2)c1^2 - a1c3(2a3c1 + a1c3)](a1 + 2b1t)";
    let n1 = -(k.a1
        * s
        * (k.b3 * (k.c1 * k.c1 + k.c3 * k.c3 * t * (2.0 * c) + k.c1 * k.d1 * t * 4.0)
            + k.c1 * (k.a3 * k.d1 - k.b1 * (k.c3 + k.d3 * t * 2.0)) * 2.0));
    let n2 = k.a1
        * k.a1
        * (k.c1 * k.d3 - k.c3 * k.d1 + k.a3 * k.a3 * (k.c3 * k.d1 + k.c1 * k.d3)
            - k.a3 * k.c3 * (k.b1 * (k.c3 + k.d3 * t * 2.0) - k.b3 * k.d1 * t * 2.0))
        * 2.0;
    let a1s = k.a1 * k.a1;
    let n3 = a1s * a1s * k.c3 * (k.b3 * k.c3 - k.a3 * k.d3 * 2.0)
        - s * k.b3 * k.c1 * t * (k.c1 * s + k.a1 * k.a3 * k.c3 * 2.0) * (2.0 * c);
    Ok(checked_div(n1 + n2, p, what)? + checked_div(n3, k.a1 * p, what)?)
}

/// `a1'` of the quasi-anti-Kähler characterization; reads `a3'` and `c3'`
/// from `dk`.
pub fn quasi_a1_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    let s = k.a3 * k.a3 + 1.0;
    let q = a1_rate_denominator(a);
    let what = "[c1(1+a3^2) - a1a3c3](a1 + 2b1t)";
    let n1 = k.a1
        * (k.b1 * k.c1 * (s + k.a3 * dk.a3 * t * 2.0) + s * k.c3 * (k.a3 - k.b3 * t) * (2.0 * c));
    let n2 = s * s * k.c1 * c + k.a1 * k.a1 * k.a1 * ((dk.a3 - k.b3) * k.c3 + k.a3 * dk.c3);
    let n3 = k.a1
        * k.a1
        * (k.d1 * 2.0
            + k.a3 * (k.b1 * k.c3 * 2.0 + k.a3 * k.d1 * 2.0 - dk.a3 * k.c1)
            + k.b1 * (dk.a3 * k.c3 + k.a3 * dk.c3) * t * 2.0);
    checked_div(n1 - n2 - n3, q, what)
}

/// Denominator `a1 c3 (a3 + 2 b3 t) - c1 (1 + a3² + 2 a3 b3 t)` of the
/// semi-anti-Kähler `c3'` formula.
pub fn semi_denominator<R: Real>(a: &Args<R>) -> R {
    let (t, k) = (a.t, &a.k);
    k.a1 * k.c3 * (k.a3 + k.b3 * t * 2.0) - k.c1 * (k.a3 * k.a3 + 1.0 + k.a3 * k.b3 * t * 2.0)
}

/// `c3'` necessary for `Φ = 0`; reads `a1'`, `a3'`, `c1'` from `dk`.
pub fn semi_c3_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, k, dk) = (a.t, &a.k, &a.dk);
    let s = k.a3 * k.a3 + 1.0;
    let den = semi_denominator(a);
    let what = "a1c3(a3 + 2b3t) - c1(1 + a3^2 + 2a3b3t)";
    let brace = dk.c1 * (one::<R>() - k.a3 * k.a3) - dk.a3 * k.b3 * k.c1 * t * 2.0
        + k.a3 * (dk.a3 * k.c1 + dk.a1 * k.c3 - k.b3 * (k.c1 + dk.c1 * t) * 2.0)
        - k.a1 * k.c3 * (dk.a3 - k.b3);
    let n1 = dk.a1 * s * k.b3 * k.c1 * k.c1 * t * 2.0 - k.a1 * k.a1 * k.c3 * brace;
    let first = checked_div(n1, k.a1 * k.a1 * den, what)?;
    let n2 = s * (k.b3 * k.c1 + k.a3 * dk.c1 - dk.a1 * k.c3)
        + k.b3 * (dk.c1 + k.a3 * (dk.a3 * k.c1 + k.a3 * dk.c1 + dk.a1 * k.c3)) * t * 2.0;
    let second = checked_div(k.c1 * n2, k.a1 * den, what)?;
    Ok(first - second)
}

/// `a1'` necessary for `Φ = 0` over a Ricci-flat base; reads `a3'`, `c1'`.
pub fn ricci_flat_a1_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, k, dk) = (a.t, &a.k, &a.dk);
    let q = a1_rate_denominator(a);
    let what = "[c1(1+a3^2) - a1a3c3](a1 + 2b1t)";
    let n1 = k.a1
        * k.a1
        * (k.a3 * (k.c1 * (dk.a3 - k.b3) - k.b1 * k.c3) + dk.c1 - dk.a3 * k.b1 * k.c3 * t * 2.0
            + k.c3 * (k.b3 - dk.a3));
    let n2 = k.b1 * (dk.c1 * t * 2.0 + k.c1 * (k.a3 * k.a3 + 1.0 + k.a3 * dk.a3 * t * 2.0));
    checked_div(n1 + n2, q, what)
}

/// `c1'` necessary for the special complex class, as printed.
pub fn special_c1_rate<R: Real>(a: &Args<R>) -> Result<R, ScalarError> {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    let (a1, a3, c1, c3, a1p, a3p) = (k.a1, k.a3, k.c1, k.c3, dk.a1, dk.a3);
    let s = a3 * a3 + 1.0;
    let d4 = anti_kahler_denominator(a);
    let what = "a1^4 + 4a1^2(a3^2-1)ct + 4(1+a3^2)^2c^2t^2";
    let n1 = (a1 * a1 * a1 * (a1 * c3 * (a3 + a3p * t) * 2.0 - c1 * s - a1p * a3 * c3 * t * 4.0)
        - a1p * s * s * c1 * t * t * (4.0 * c))
        * (2.0 * c);
    let n2 = s
        * (c1 * (s + a3 * a3p * t * 4.0) * c + a1 * (a1p * c1 - a3p * c3 * t * (2.0 * c)))
        * t
        * (4.0 * c);
    Ok(checked_div(n1, a1 * d4, what)? - checked_div(n2, d4, what)?)
}

/// `(a1', a3')` necessary for the class `ω₁ ⊕ ω₃`.
pub fn w1w3_rates<R: Real>(a: &Args<R>) -> Result<[R; 2], ScalarError> {
    let (t, c, k, dk) = (a.t, a.c, &a.k, &a.dk);
    let s = k.a3 * k.a3 + 1.0;
    let q = a1_rate_denominator(a);
    let what_q = "[c1(1+a3^2) - a1a3c3](a1 + 2b1t)";
    let n1 =
        k.a1 * k.a1 * k.a1 * (k.b3 - dk.a3) * k.c3 - s * k.c1 * (s + k.a3 * k.b3 * t * 2.0) * c;
    let n2 = k.a1
        * k.a1
        * (k.a3 * (k.c1 * (dk.a3 - k.b3) - k.b1 * k.c3) - (k.d1 + dk.a3 * k.b1 * k.c3 * t) * 2.0);
    let n3 = k.a1
        * (k.b1 * k.c1 * (s + k.a3 * dk.a3 * t * 2.0)
            + k.c3 * (k.a3 * s - k.b3 * t * (one::<R>() - k.a3 * k.a3) * 2.0) * c);
    let a1p = checked_div(n1 + n2 + n3, q, what_q)?;

    let p = k.a1 * a3_rate_denominator(a);
    let what_p = "a1[(1+a3^2)c1^2 - a1c3(2a3c1 + a1c3)](a1 + 2b1t)";
    let a1s = k.a1 * k.a1;
    let m1 = a1s * a1s * k.c3 * (k.b3 * k.c3 - k.a3 * k.d3 * 2.0)
        - s * k.b3 * k.c1 * t * (s * k.c1 + k.a1 * k.a3 * k.c3 * 4.0) * (2.0 * c);
    let m2 = a1s
        * s
        * (k.b3 * (k.c1 * k.c1 + k.c3 * k.c3 * t * (2.0 * c) + k.c1 * k.d1 * t * 4.0)
            + k.c1 * (k.a3 * k.d1 - k.b1 * (k.c3 + k.d3 * t * 2.0)) * 2.0);
    let m3 = a1s
        * k.a1
        * (k.c1 * k.d3 - k.c3 * k.d1 + k.a3 * k.a3 * (k.c3 * k.d1 + k.c1 * k.d3)
            - k.a3 * k.c3 * (k.b1 * (k.c3 + k.d3 * t * 2.0) - k.b3 * k.d1 * t * 2.0))
        * 2.0;
    let a3p = checked_div(m1 - m2 + m3, p, what_p)?;
    Ok([a1p, a3p])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(t: f64, c: f64, f: impl Fn(&mut Coeffs<f64>, &mut Coeffs<f64>)) -> Args<f64> {
        let mut k = Coeffs::from_fn(|_| 0.0);
        let mut dk = Coeffs::from_fn(|_| 0.0);
        f(&mut k, &mut dk);
        Args { t, c, k, dk }
    }

    /// Diagonal anti-Kähler data `a1 = √(1+2ct)`, `c1 = 1+2ct`.
    fn diagonal(t: f64, c: f64) -> Args<f64> {
        args(t, c, |k, dk| {
            let a1 = (1.0 + 2.0 * c * t).sqrt();
            k.a1 = a1;
            dk.a1 = c / a1;
            k.a2 = 1.0 / a1;
            dk.a2 = -c / (a1 * a1 * a1);
            k.c1 = 1.0 + 2.0 * c * t;
            dk.c1 = 2.0 * c;
        })
    }

    #[test]
    fn integrable_b_vanishes_on_diagonal_closed_form() {
        for &(t, c) in &[(0.0, 1.0), (0.7, 1.0), (0.3, -1.0)] {
            let [b1, _, b3] = integrability_b(&diagonal(t, c)).unwrap();
            assert!(b1.abs() < 1e-14, "{b1}");
            assert_eq!(b3, 0.0);
        }
    }

    #[test]
    fn anti_kahler_rates_on_diagonal_closed_form() {
        // c1 = 1 + 2ct has c1' = 2c, and c3 = 0 stays 0
        let a = diagonal(0.4, 1.0);
        let [c1p, c3p] = anti_kahler_rates(&a).unwrap();
        assert!((c1p - 2.0).abs() < 1e-13, "{c1p}");
        assert!(c3p.abs() < 1e-15);
    }

    #[test]
    fn flat_rates_vanish_for_constant_data() {
        let a = args(0.5, 0.0, |k, _| {
            k.a1 = 1.0;
            k.a2 = 1.0;
            k.c1 = 1.0;
            k.c2 = -1.0;
        });
        assert_eq!(anti_kahler_rates(&a).unwrap(), [0.0, 0.0]);
        assert_eq!(quasi_c1_d1_rates(&a).unwrap(), [0.0, 0.0]);
        assert_eq!(quasi_c3_rate(&a).unwrap(), 0.0);
        assert_eq!(quasi_a3_rate(&a).unwrap(), 0.0);
        assert_eq!(quasi_a1_rate(&a).unwrap(), 0.0);
        assert_eq!(semi_c3_rate(&a).unwrap(), 0.0);
        assert_eq!(ricci_flat_a1_rate(&a).unwrap(), 0.0);
        assert_eq!(special_c1_rate(&a).unwrap(), 0.0);
        assert_eq!(w1w3_rates(&a).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn d_coefficients() {
        let a = diagonal(1.5, 1.0);
        assert!((anti_kahler_d1(&a).unwrap() + 1.0).abs() < 1e-15);
        assert!((conformal_d1(&a).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(anti_kahler_d3(&a).unwrap(), 0.0);
    }
}
