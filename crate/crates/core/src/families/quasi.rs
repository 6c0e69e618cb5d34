//! Quasi-anti-Kähler family: `a1, a3, c1, c3, d1, d3` integrated from
//! their rate formulas, with `a3'` and `d3'` fitted pointwise.
//!
//! The printed rates for `c1, d1, c3` and `a1` (given `a3'`) are used as
//! they stand. No usable closed form is available for `d3'`, and the printed
//! `a3'` disagrees with anti-Kähler families, which must satisfy it. At each
//! evaluation the cyclic defect `F(X,Y,Z) + F(Y,Z,X) + F(Z,X,Y)` at a probe
//! point is affine in `(a3', d3')`, so one linear least-squares solve gives
//! the best pair there. The achieved defect is reported, not assumed.

use std::sync::Arc;

use serde::Serialize;

use super::formulas::{self, Args};
use crate::classify::cyclic_sum;
use crate::connection::analyze_with_jets;
use crate::error::{Error, Result};
use crate::lift::{
    complete_norden, norden_completion, CoefficientFamily, Coeffs, NordenInputs, TangentPoint,
};
use crate::scalarfn::{integrate_ode, Jet1, Rhs, ScalarError, ScalarFn};
use crate::spaceform::SpaceForm;

/// Smallest energy density used for the probe point; below it the `d3'`
/// column of the defect vanishes to rounding level.
pub const PROBE_T_FLOOR: f64 = 1e-6;

/// Integration stops once `|a1 + 2t b1|` drops below this fraction of
/// `|a1| + 2t|b1|`; past that point `G` degenerates before the zero is hit.
pub const DENOMINATOR_FLOOR: f64 = 1e-2;

const DENOMINATOR: &str = "a1 + 2t b1";

/// Initial values of the integrated coefficients and the free `b1, b3`.
#[derive(Debug, Clone)]
pub struct QuasiSeed {
    pub a1: f64,
    pub a3: f64,
    pub c1: f64,
    pub c3: f64,
    pub d1: f64,
    pub d3: f64,
    pub b1: ScalarFn,
    pub b3: ScalarFn,
}

#[derive(Debug, Clone)]
pub struct QuasiFamily {
    pub family: CoefficientFamily,
    pub fit: QuasiFit,
}

/// Quality of the pointwise `(a3', d3')` fit, sampled at the integration nodes.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiFit {
    /// Max over nodes of the relative cyclic defect left after the fit.
    pub max_residual: f64,
    pub worst_t: f64,
    pub nodes: usize,
    /// Max `|a3'_printed - a3'_fitted|`.
    pub max_printed_a3_gap: f64,
}

struct Probe {
    sf: SpaceForm,
    b1: ScalarFn,
    b3: ScalarFn,
    /// Sign of `a1 + 2t b1` at `t = 0`.
    sign: f64,
}

/// Rates of the state `(a1, a3, c1, c3, d1, d3)` except `d3'`.
struct Rates {
    a1: f64,
    a3: f64,
    c1: f64,
    c3: f64,
    d1: f64,
}

impl Probe {
    fn c(&self) -> f64 {
        self.sf.curvature_constant()
    }

    /// Formula arguments at state `y`, plus the `b1, b3` jets.
    fn args(&self, t: f64, y: &[f64]) -> Result<(Args<f64>, Jet1, Jet1), ScalarError> {
        let b1 = self.b1.eval_jet(t)?;
        let b3 = self.b3.eval_jet(t)?;
        let den = y[0] + 2.0 * t * b1.value;
        if !(den.abs() > DENOMINATOR_FLOOR * (y[0].abs() + 2.0 * t * b1.value.abs()))
            || den * self.sign <= 0.0
        {
            return Err(ScalarError::Domain {
                what: DENOMINATOR.into(),
                t,
            });
        }
        let mut k = Coeffs::from_fn(|_| 0.0);
        k.a1 = y[0];
        k.a3 = y[1];
        k.c1 = y[2];
        k.c3 = y[3];
        k.d1 = y[4];
        k.d3 = y[5];
        k.b1 = b1.value;
        k.b3 = b3.value;
        let a = Args {
            t,
            c: self.c(),
            k,
            dk: Coeffs::from_fn(|_| 0.0),
        };
        Ok((a, b1, b3))
    }

    /// Printed rates with `a3'` given; also returns the printed `a3'`.
    fn rates(&self, a: &mut Args<f64>, a3p: f64) -> Result<(Rates, f64), ScalarError> {
        let t = a.t;
        let wrap = |e: ScalarError| ScalarError::Domain {
            what: format!("quasi-anti-Kähler rate: {e}"),
            t,
        };
        let [c1p, d1p] = formulas::quasi_c1_d1_rates(a).map_err(wrap)?;
        let c3p = formulas::quasi_c3_rate(a).map_err(wrap)?;
        let printed = formulas::quasi_a3_rate(a).map_err(wrap)?;
        a.dk.a3 = a3p;
        a.dk.c3 = c3p;
        let a1p = formulas::quasi_a1_rate(a).map_err(wrap)?;
        Ok((
            Rates {
                a1: a1p,
                a3: a3p,
                c1: c1p,
                c3: c3p,
                d1: d1p,
            },
            printed,
        ))
    }

    fn jets(
        &self,
        t: f64,
        y: &[f64],
        r: &Rates,
        b1: Jet1,
        b3: Jet1,
        d3p: f64,
    ) -> Result<Coeffs<Jet1>, ScalarError> {
        let (a1, a3) = (Jet1::new(y[0], r.a1), Jet1::new(y[1], r.a3));
        let (c1, c3) = (Jet1::new(y[2], r.c1), Jet1::new(y[3], r.c3));
        let (d1, d3) = (Jet1::new(y[4], r.d1), Jet1::new(y[5], d3p));
        let [a2, b2, c2, d2] =
            norden_completion(Jet1::variable(t), a1, a3, b1, b3, c1, c3, d1, d3)?;
        Ok(Coeffs {
            a1,
            a2,
            a3,
            b1,
            b2,
            b3,
            c1,
            c2,
            c3,
            d1,
            d2,
            d3,
        })
    }

    /// Cyclic defect at the probe point for a trial `d3'`, and `1 + max|F|`.
    fn defect(&self, t: f64, jets: &Coeffs<Jet1>) -> Result<(Vec<f64>, f64)> {
        let n = self.sf.dim();
        let tp = t.max(PROBE_T_FLOOR);
        let mut y = vec![0.0; n];
        y[0] = (2.0 * tp).sqrt();
        // x = 0 where g is the identity, so t(y) = tp
        let p = TangentPoint {
            x: vec![0.0; n],
            y,
            t: tp,
        };
        let pa = analyze_with_jets(&self.sf, &p, jets)?;
        Ok((cyclic_sum(&pa.f), 1.0 + pa.f.max_abs()))
    }

    /// Least-squares `(a3', d3')`, the rates, and the relative defect left.
    fn solve(&self, t: f64, y: &[f64]) -> Result<Solved> {
        let (mut a, b1, b3) = self.args(t, y)?;
        let mut trial = |a3p: f64, d3p: f64| -> Result<(Rates, f64, Vec<f64>, f64)> {
            let (r, printed) = self.rates(&mut a, a3p)?;
            let (v, scale) = self.defect(t, &self.jets(t, y, &r, b1, b3, d3p)?)?;
            Ok((r, printed, v, scale))
        };
        let (_, printed, r0, scale) = trial(0.0, 0.0)?;
        let (_, _, ra, _) = trial(1.0, 0.0)?;
        let (_, _, rd, _) = trial(0.0, 1.0)?;
        let u: Vec<f64> = ra.iter().zip(&r0).map(|(x, y)| x - y).collect();
        let v: Vec<f64> = rd.iter().zip(&r0).map(|(x, y)| x - y).collect();
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
        let m = nalgebra::Matrix2::new(dot(&u, &u), dot(&u, &v), dot(&v, &u), dot(&v, &v));
        let rhs = nalgebra::Vector2::new(-dot(&u, &r0), -dot(&v, &r0));
        let floor = 1e-28 * scale * scale;
        if m[(0, 0)] < floor
            || m[(1, 1)] < floor
            || m.determinant().abs() < 1e-12 * m[(0, 0)] * m[(1, 1)]
        {
            return Err(Error::RankDeficient { t });
        }
        let x = m.lu().solve(&rhs).ok_or(Error::RankDeficient { t })?;
        let (a3p, d3p) = (x[0], x[1]);
        let left = r0
            .iter()
            .zip(u.iter().zip(&v))
            .fold(0.0f64, |w, (r, (p, q))| {
                w.max((r + a3p * p + d3p * q).abs())
            });
        let (rates, _) = self.rates(&mut a, a3p)?;
        Ok(Solved {
            rates,
            d3: d3p,
            printed_a3: printed,
            residual: left / scale,
        })
    }
}

struct Solved {
    rates: Rates,
    d3: f64,
    printed_a3: f64,
    residual: f64,
}

fn to_scalar(e: Error, t: f64) -> ScalarError {
    match e {
        Error::Scalar(s) => s,
        other => ScalarError::Domain {
            what: other.to_string(),
            t,
        },
    }
}

/// Integrates the quasi-anti-Kähler rates from `seed` on `[0, t_max]`.
pub fn quasi_ak_family(
    seed: &QuasiSeed,
    sf: &SpaceForm,
    t_max: f64,
    step: f64,
) -> Result<QuasiFamily> {
    let probe = Arc::new(Probe {
        sf: *sf,
        b1: seed.b1.clone(),
        b3: seed.b3.clone(),
        sign: seed.a1.signum(),
    });
    if seed.a1 == 0.0 {
        return Err(Error::DenominatorZero {
            what: DENOMINATOR.into(),
            t: 0.0,
        });
    }
    let pr = probe.clone();
    let rhs: Rhs = Arc::new(move |t, y: &[f64]| {
        let sol = pr.solve(t, y).map_err(|e| to_scalar(e, t))?;
        let r = sol.rates;
        Ok(vec![r.a1, r.a3, r.c1, r.c3, r.d1, sol.d3])
    });
    let state0 = [seed.a1, seed.a3, seed.c1, seed.c3, seed.d1, seed.d3];
    let tabs = integrate_ode(rhs, &state0, t_max, step).map_err(|e| match e {
        ScalarError::Domain { what, t } if what == DENOMINATOR => {
            Error::DenominatorZero { what, t }
        }
        other => other.into(),
    })?;
    let names = ["a1", "a3", "c1", "c3", "d1", "d3"];
    let tabs: Vec<ScalarFn> = tabs
        .into_iter()
        .zip(names)
        .map(|(f, n)| f.with_label(n))
        .collect();

    let mut fit = QuasiFit {
        max_residual: 0.0,
        worst_t: 0.0,
        nodes: 0,
        max_printed_a3_gap: 0.0,
    };
    if let crate::scalarfn::Kind::Table { solution, .. } = tabs[0].kind() {
        let stride = (solution.nodes().len() / 50).max(1);
        for (i, &t) in solution.nodes().iter().enumerate().step_by(stride) {
            let sol = probe.solve(t, solution.node_state(i))?;
            fit.nodes += 1;
            fit.max_printed_a3_gap = fit
                .max_printed_a3_gap
                .max((sol.printed_a3 - sol.rates.a3).abs());
            if sol.residual > fit.max_residual {
                fit.max_residual = sol.residual;
                fit.worst_t = t;
            }
        }
    }

    let fam = complete_norden(&NordenInputs {
        a1: tabs[0].clone(),
        a3: tabs[1].clone(),
        b1: seed.b1.clone(),
        b3: seed.b3.clone(),
        c1: tabs[2].clone(),
        c3: tabs[3].clone(),
        d1: tabs[4].clone(),
        d3: tabs[5].clone(),
        t_max,
    })?;
    Ok(QuasiFamily {
        family: fam
            .with_label("quasi-anti-Kähler (integrated)")
            .mark_tabulated(),
        fit,
    })
}
