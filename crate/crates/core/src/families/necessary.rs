use serde::Serialize;

use super::formulas::{self, Args};
use crate::error::{Error, Result};
use crate::lift::CoefficientFamily;
use crate::scalarfn::ScalarError;

/// Printed necessary conditions for classes without closed-form sufficient
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Necessary {
    /// `c3'` when `Φ = 0`.
    SemiAntiKahler,
    /// `a1'` when `Φ = 0` over a Ricci-flat base.
    RicciFlat,
    /// `c1'` for the special complex class.
    SpecialComplex,
    /// `a1'` and `a3'` for `ω₁ ⊕ ω₃`.
    W1W3,
}

impl Necessary {
    pub const ALL: [Necessary; 4] = [
        Necessary::SemiAntiKahler,
        Necessary::RicciFlat,
        Necessary::SpecialComplex,
        Necessary::W1W3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Necessary::SemiAntiKahler => "semi_anti_kahler_c3_rate",
            Necessary::RicciFlat => "ricci_flat_a1_rate",
            Necessary::SpecialComplex => "special_complex_c1_rate",
            Necessary::W1W3 => "w1w3_rates",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryCheck {
    pub name: &'static str,
    /// Max over samples of `|lhs' - rhs| / (1 + |rhs|)`.
    pub max_residual: f64,
    pub worst_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryReport {
    pub condition: Necessary,
    pub checks: Vec<NecessaryCheck>,
    pub max_residual: f64,
    pub samples: usize,
}

fn args_at(fam: &CoefficientFamily, c: f64, t: f64) -> Result<Args<f64>, ScalarError> {
    let jets = fam.jets(t)?;
    Ok(Args {
        t,
        c,
        k: jets.map(|j| j.value),
        dk: jets.map(|j| j.deriv),
    })
}

/// Evaluates the printed rate formulas of `which` along `fam` and compares
/// them with the family's own derivatives.
pub fn check_necessary(
    which: Necessary,
    fam: &CoefficientFamily,
    c: f64,
    samples: &[f64],
) -> Result<NecessaryReport> {
    type Eval = fn(&Args<f64>) -> Result<Vec<(&'static str, f64, f64)>, ScalarError>;
    let eval: Eval = match which {
        Necessary::SemiAntiKahler => |a| Ok(vec![("c3_rate", a.dk.c3, formulas::semi_c3_rate(a)?)]),
        Necessary::RicciFlat => {
            |a| Ok(vec![("a1_rate", a.dk.a1, formulas::ricci_flat_a1_rate(a)?)])
        }
        Necessary::SpecialComplex => {
            |a| Ok(vec![("c1_rate", a.dk.c1, formulas::special_c1_rate(a)?)])
        }
        Necessary::W1W3 => |a| {
            let [a1p, a3p] = formulas::w1w3_rates(a)?;
            Ok(vec![("a1_rate", a.dk.a1, a1p), ("a3_rate", a.dk.a3, a3p)])
        },
    };
    let mut checks: Vec<NecessaryCheck> = Vec::new();
    for &t in samples {
        let a = args_at(fam, c, t)?;
        let rows = eval(&a).map_err(|e| match e {
            ScalarError::SmallDenominator { what, .. } => Error::DenominatorZero { what, t },
            other => other.into(),
        })?;
        for (i, (name, lhs, rhs)) in rows.into_iter().enumerate() {
            let r = (lhs - rhs).abs() / (1.0 + rhs.abs());
            if checks.len() <= i {
                checks.push(NecessaryCheck {
                    name,
                    max_residual: r,
                    worst_t: t,
                });
            } else if r > checks[i].max_residual || r.is_nan() {
                checks[i].max_residual = r;
                checks[i].worst_t = t;
            }
        }
    }
    let max_residual = checks.iter().fold(0.0f64, |m, c| m.max(c.max_residual));
    Ok(NecessaryReport {
        condition: which,
        checks,
        max_residual,
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::trivial_flat;

    #[test]
    fn trivial_flat_satisfies_everything() {
        let fam = trivial_flat();
        for which in Necessary::ALL {
            let r = check_necessary(which, &fam, 0.0, &[0.0, 0.3, 0.9]).unwrap();
            assert_eq!(r.max_residual, 0.0, "{which:?}");
        }
    }
}
