//! Coefficient families with prescribed structure: integrable `J`,
//! anti-Kähler (closed form and ODE), conformally anti-Kähler and
//! quasi-anti-Kähler, plus necessary-condition checks for the classes whose
//! sufficient conditions are not available in closed form.

pub mod formulas;
mod necessary;
mod quasi;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use necessary::{check_necessary, Necessary, NecessaryCheck, NecessaryReport};
pub use quasi::{quasi_ak_family, QuasiFamily, QuasiSeed, PROBE_T_FLOOR};

use crate::error::{Error, Result};
use crate::lift::{complete_norden, find_zero, Coeff, CoefficientFamily, Coeffs, NordenInputs};
use crate::scalarfn::{
    checked_div, integrate_ode, Domain, Expr, Func, Jet1, Rhs, ScalarError, ScalarFn,
};
use formulas::Args;

const ZERO_SCAN_STEPS: usize = 2000;

/// `a + b t` as an expression.
pub fn affine(a: f64, b: f64) -> ScalarFn {
    ScalarFn::expression(affine_expr(a, b))
}

fn affine_expr(a: f64, b: f64) -> Expr {
    Expr::Add(
        Box::new(Expr::Const(a)),
        Box::new(Expr::Mul(Box::new(Expr::Const(b)), Box::new(Expr::Var))),
    )
}

fn zero_args(t: f64, c: f64) -> Args<Jet1> {
    let z = Jet1::constant(0.0);
    Args {
        t: Jet1::variable(t),
        c,
        k: Coeffs::from_fn(|_| z),
        dk: Coeffs::from_fn(|_| z),
    }
}

/// Formula arguments with value-and-slope jets at `t`. Closed-form inputs
/// also supply the slope of their derivative; for other kinds that slope is
/// NaN, so a formula that needs it fails the finiteness check instead of
/// returning a wrong number.
pub(crate) fn jet_args(
    t: f64,
    c: f64,
    items: &[(Coeff, &ScalarFn)],
) -> Result<Args<Jet1>, ScalarError> {
    let mut a = zero_args(t, c);
    for &(coeff, f) in items {
        let (k, dk) = match f.eval_jet2(t) {
            Ok(j2) => (j2.lower(), j2.derivative()),
            Err(ScalarError::OrderUnavailable(_)) => {
                let j = f.eval_jet(t)?;
                (j, Jet1::new(j.deriv, f64::NAN))
            }
            Err(e) => return Err(e),
        };
        *a.k.get_mut(coeff) = k;
        *a.dk.get_mut(coeff) = dk;
    }
    Ok(a)
}

fn domain_of(fns: &[&ScalarFn], t_max: f64) -> Domain {
    fns.iter()
        .fold(Domain::open(t_max), |d, f| d.intersect(&f.domain()))
}

/// `a1 = a2 = 1`, `c1 = 1`, `c2 = -1`, all else zero.
pub fn trivial_flat() -> CoefficientFamily {
    let fns = Coeffs::from_fn(|c| match c {
        Coeff::A1 | Coeff::A2 | Coeff::C1 => ScalarFn::constant(1.0),
        Coeff::C2 => ScalarFn::constant(-1.0),
        _ => ScalarFn::constant(0.0),
    });
    CoefficientFamily::new("trivial", fns, false)
}

/// The `J` part of an integrable structure.
#[derive(Debug, Clone)]
pub struct IntegrableJ {
    pub a1: ScalarFn,
    pub a3: ScalarFn,
    pub b1: ScalarFn,
    pub b3: ScalarFn,
    /// `b2` from the integrability relations; [`complete_norden`] derives
    /// the same function from the almost-complex relation.
    pub b2: ScalarFn,
    pub c: f64,
    pub t_max: f64,
}

/// `b1, b2, b3` making `J` integrable over a base of curvature `c`, with
/// `a2 = (1 + a3²)/a1`. `a1` and `a3` must be closed forms.
pub fn integrable_family(a1: &ScalarFn, a3: &ScalarFn, c: f64, t_max: f64) -> Result<IntegrableJ> {
    let domain = domain_of(&[a1, a3], t_max);
    let (f1, f3) = (a1.clone(), a3.clone());
    let eval = move |t: f64| -> Result<(Jet1, [Jet1; 3]), ScalarError> {
        let x1 = f1.eval_jet2(t)?;
        let x3 = f3.eval_jet2(t)?;
        let a2 = checked_div(x3 * x3 + 1.0, x1, "a1")?;
        let mut a = zero_args(t, c);
        a.k.a1 = x1.lower();
        a.dk.a1 = x1.derivative();
        a.k.a3 = x3.lower();
        a.dk.a3 = x3.derivative();
        a.k.a2 = a2.lower();
        a.dk.a2 = a2.derivative();
        Ok((
            formulas::integrability_denominator(&a),
            formulas::integrability_b(&a)?,
        ))
    };
    let den = |t: f64| -> Result<f64, ScalarError> {
        let x1 = a1.eval_jet2(t)?;
        let x3 = a3.eval_jet2(t)?;
        let a2 = checked_div(x3 * x3 + 1.0, x1, "a1")?;
        let mut a = zero_args(t, c);
        a.k.a1 = x1.lower();
        a.dk.a1 = x1.derivative();
        a.k.a2 = a2.lower();
        a.dk.a2 = a2.derivative();
        Ok(formulas::integrability_denominator(&a).value)
    };
    if let Some(t) = find_zero(den, domain.t_max, ZERO_SCAN_STEPS)? {
        return Err(Error::DenominatorZero {
            what: "a1 - 2t a1' - 2ct a2 - 4ct^2 a2'".into(),
            t,
        });
    }
    let eval = Arc::new(eval);
    let b = |idx: usize, name: &'static str| {
        let e = eval.clone();
        ScalarFn::derived(name, domain, move |t| Ok(e(t)?.1[idx]))
    };
    Ok(IntegrableJ {
        a1: a1.clone(),
        a3: a3.clone(),
        b1: b(0, "b1"),
        b2: b(1, "b2"),
        b3: b(2, "b3"),
        c,
        t_max: domain.t_max,
    })
}

/// Integrable `J` with freely chosen `c1, c3, d1, d3`; `c2, d2` from the
/// Norden relations.
pub fn integrable_norden(
    j: &IntegrableJ,
    c1: ScalarFn,
    c3: ScalarFn,
    d1: ScalarFn,
    d3: ScalarFn,
) -> Result<CoefficientFamily> {
    let fam = complete_norden(&NordenInputs {
        a1: j.a1.clone(),
        a3: j.a3.clone(),
        b1: j.b1.clone(),
        b3: j.b3.clone(),
        c1,
        c3,
        d1,
        d3,
        t_max: j.t_max,
    })?;
    Ok(fam.with_label("integrable"))
}

/// Working domain of the diagonal family: the tube `t < -B/(2c)` when
/// `c < 0`, else `[0, t_max)`.
pub fn diagonal_domain(b: f64, c: f64, t_max: f64) -> Domain {
    if c < 0.0 {
        Domain::open(t_max.min(-b / (2.0 * c)))
    } else {
        Domain::open(t_max)
    }
}

/// `a1 = √(B + 2ct)`, `b1 = 0`, `c1 = A(B + 2ct)`, `d1 = -cA`, all
/// off-diagonal coefficients zero.
pub fn diagonal_ak(a: f64, b: f64, c: f64, t_max: f64) -> Result<CoefficientFamily> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Invalid(format!(
            "A must be a nonzero constant, got {a}"
        )));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Invalid(format!("B must be positive, got {b}")));
    }
    let domain = diagonal_domain(b, c, t_max);
    let zero = ScalarFn::constant(0.0);
    let a1 = ScalarFn::expression(Expr::Call(Func::Sqrt, Box::new(affine_expr(b, 2.0 * c))));
    let c1 = ScalarFn::expression(Expr::Mul(
        Box::new(Expr::Const(a)),
        Box::new(affine_expr(b, 2.0 * c)),
    ));
    let fam = complete_norden(&NordenInputs {
        a1,
        a3: zero.clone(),
        b1: zero.clone(),
        b3: zero.clone(),
        c1,
        c3: zero.clone(),
        d1: ScalarFn::constant(-c * a),
        d3: zero,
        t_max: domain.t_max,
    })?;
    Ok(fam.with_label(format!("diagonal anti-Kähler (A={a}, B={b}, c={c})")))
}

fn rate_error(what: &str, t: f64, e: ScalarError) -> ScalarError {
    ScalarError::Domain {
        what: format!("{what}: {e}"),
        t,
    }
}

/// `d3 = (a3' c1 - a1' c3)/a1` as a function, given `a1, a3` closed forms.
fn d3_function(
    a1: &ScalarFn,
    a3: &ScalarFn,
    c1: &ScalarFn,
    c3: &ScalarFn,
    domain: Domain,
) -> ScalarFn {
    let (a1, a3, c1, c3) = (a1.clone(), a3.clone(), c1.clone(), c3.clone());
    ScalarFn::derived("d3", domain, move |t| {
        let a = jet_args(
            t,
            0.0,
            &[
                (Coeff::A1, &a1),
                (Coeff::A3, &a3),
                (Coeff::C1, &c1),
                (Coeff::C3, &c3),
            ],
        )?;
        formulas::anti_kahler_d3(&a)
    })
}

/// Anti-Kähler family: `J` integrable, `c1, c3` integrated from their rate
/// formulas starting at `(c1_0, c3_0)`, `d1 = c c2`, `d3 = (a3'c1 - a1'c3)/a1`.
#[allow(clippy::too_many_arguments)]
pub fn ak_family(
    a1: &ScalarFn,
    a3: &ScalarFn,
    c1_0: f64,
    c3_0: f64,
    c: f64,
    t_max: f64,
    step: f64,
) -> Result<CoefficientFamily> {
    let j = integrable_family(a1, a3, c, t_max)?;
    let (f1, f3) = (a1.clone(), a3.clone());
    let rhs: Rhs = Arc::new(move |t, y: &[f64]| {
        let x1 = f1.eval_jet(t)?;
        let x3 = f3.eval_jet(t)?;
        let mut k = Coeffs::from_fn(|_| 0.0);
        let mut dk = Coeffs::from_fn(|_| 0.0);
        k.a1 = x1.value;
        dk.a1 = x1.deriv;
        k.a3 = x3.value;
        dk.a3 = x3.deriv;
        k.c1 = y[0];
        k.c3 = y[1];
        let [p, q] = formulas::anti_kahler_rates(&Args { t, c, k, dk })
            .map_err(|e| rate_error("anti-Kähler rate denominator", t, e))?;
        Ok(vec![p, q])
    });
    let tabs = integrate_ode(rhs, &[c1_0, c3_0], j.t_max, step)?;
    let (c1, c3) = (
        tabs[0].clone().with_label("c1"),
        tabs[1].clone().with_label("c3"),
    );
    let domain = domain_of(&[a1, a3, &c1, &c3], j.t_max);

    let (g1, g3, h1, h3) = (a1.clone(), a3.clone(), c1.clone(), c3.clone());
    let d1 = ScalarFn::derived("d1", domain, move |t| {
        let a = jet_args(
            t,
            c,
            &[
                (Coeff::A1, &g1),
                (Coeff::A3, &g3),
                (Coeff::C1, &h1),
                (Coeff::C3, &h3),
            ],
        )?;
        formulas::anti_kahler_d1(&a)
    });
    let d3 = d3_function(a1, a3, &c1, &c3, domain);
    let fam = complete_norden(&NordenInputs {
        a1: a1.clone(),
        a3: a3.clone(),
        b1: j.b1,
        b3: j.b3,
        c1,
        c3,
        d1,
        d3,
        t_max: domain.t_max,
    })?;
    Ok(fam.with_label("anti-Kähler (integrated)").mark_tabulated())
}

/// Conformally anti-Kähler family: `J` integrable,
/// `d1 = c(2a1a3c3 - c1(1+a3²))/a1²`, `d3 = (a3'c1 - a1'c3)/a1`.
pub fn conformal_ak_family(
    a1: &ScalarFn,
    a3: &ScalarFn,
    c1: &ScalarFn,
    c3: &ScalarFn,
    c: f64,
    t_max: f64,
) -> Result<CoefficientFamily> {
    let j = integrable_family(a1, a3, c, t_max)?;
    let domain = domain_of(&[a1, a3, c1, c3], j.t_max);
    let (g1, g3, h1, h3) = (a1.clone(), a3.clone(), c1.clone(), c3.clone());
    let d1 = ScalarFn::derived("d1", domain, move |t| {
        let a = jet_args(
            t,
            c,
            &[
                (Coeff::A1, &g1),
                (Coeff::A3, &g3),
                (Coeff::C1, &h1),
                (Coeff::C3, &h3),
            ],
        )?;
        formulas::conformal_d1(&a)
    });
    let d3 = d3_function(a1, a3, c1, c3, domain);
    let fam = complete_norden(&NordenInputs {
        a1: a1.clone(),
        a3: a3.clone(),
        b1: j.b1,
        b3: j.b3,
        c1: c1.clone(),
        c3: c3.clone(),
        d1,
        d3,
        t_max: domain.t_max,
    })?;
    let tabulated = fam.is_tabulated();
    let fam = fam.with_label("conformally anti-Kähler");
    Ok(if tabulated { fam.mark_tabulated() } else { fam })
}

/// A fixed Norden family with every free coefficient nonzero and no
/// integrability or class structure: `a1 = 1 + t`, `a3 = t/2`, `b1 = 0.3`,
/// `b3 = 0.1 t`, `c1 = 2 + t`, `c3 = 0.1`, `d1 = 0.2`, `d3 = -0.1 t`.
pub fn generic_norden(t_max: f64) -> Result<CoefficientFamily> {
    let fam = complete_norden(&NordenInputs {
        a1: affine(1.0, 1.0),
        a3: affine(0.0, 0.5),
        b1: ScalarFn::constant(0.3),
        b3: affine(0.0, 0.1),
        c1: affine(2.0, 1.0),
        c3: ScalarFn::constant(0.1),
        d1: ScalarFn::constant(0.2),
        d3: affine(0.0, -0.1),
        t_max,
    })?;
    Ok(fam.with_label("generic Norden"))
}

/// User-supplied coefficients: all twelve (taken as given), or the eight
/// free ones `a1, a3, b1, b3, c1, c3, d1, d3` (completed to a Norden pair).
pub fn custom(fns: &BTreeMap<Coeff, ScalarFn>, t_max: f64) -> Result<CoefficientFamily> {
    if fns.len() == Coeff::ALL.len() {
        let all = Coeffs::from_fn(|c| {
            fns[&c]
                .clone()
                .with_domain(fns[&c].domain().intersect(&Domain::open(t_max)))
        });
        let tabulated = fns.values().any(ScalarFn::is_table);
        return Ok(CoefficientFamily::new("custom", all, tabulated));
    }
    let free = [
        Coeff::A1,
        Coeff::A3,
        Coeff::B1,
        Coeff::B3,
        Coeff::C1,
        Coeff::C3,
        Coeff::D1,
        Coeff::D3,
    ];
    let missing: Vec<&str> = free
        .iter()
        .filter(|c| !fns.contains_key(c))
        .map(|c| c.name())
        .collect();
    let extra: Vec<&str> = fns
        .keys()
        .filter(|c| !free.contains(c))
        .map(|c| c.name())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::Invalid(format!(
            "custom family needs all twelve coefficients or exactly a1, a3, b1, b3, c1, c3, d1, d3 \
             (missing: [{}], unexpected: [{}])",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let get = |c: Coeff| fns[&c].clone();
    let fam = complete_norden(&NordenInputs {
        a1: get(Coeff::A1),
        a3: get(Coeff::A3),
        b1: get(Coeff::B1),
        b3: get(Coeff::B3),
        c1: get(Coeff::C1),
        c3: get(Coeff::C3),
        d1: get(Coeff::D1),
        d3: get(Coeff::D3),
        t_max,
    })?;
    Ok(fam.with_label("custom"))
}
