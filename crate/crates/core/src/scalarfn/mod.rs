//! Smooth real functions of the energy density, evaluated as jets.

mod expr;
mod jet;
mod ode;

use std::io::Write;
use std::sync::Arc;

use thiserror::Error;

pub use expr::{Expr, Func};
pub use jet::{checked_div, Jet1, Jet2, Real, DIV_EPS};
pub use ode::{integrate_ode, tables, OdeSolution, Rhs};

#[derive(Debug, Error)]
pub enum ScalarError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {found}")]
    Arity {
        offset: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("t = {t} is outside the domain [0, {t_max}]")]
    OutOfDomain { t: f64, t_max: f64 },
    #[error("{what} at t = {t}")]
    Domain { what: String, t: f64 },
    #[error("denominator `{what}` is too small ({value:e})")]
    SmallDenominator { what: String, value: f64 },
    #[error("non-finite right-hand side at t = {t}: {what}")]
    NonFinite { t: f64, what: String },
    #[error("second derivative unavailable for {0}")]
    OrderUnavailable(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Upper end of the evaluation domain; the lower end is always 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub t_max: f64,
    pub open: bool,
}

impl Domain {
    pub const UNBOUNDED: Domain = Domain {
        t_max: f64::INFINITY,
        open: true,
    };

    pub fn open(t_max: f64) -> Self {
        Self { t_max, open: true }
    }

    pub fn closed(t_max: f64) -> Self {
        Self { t_max, open: false }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0
            && if self.open {
                t < self.t_max
            } else {
                t <= self.t_max
            }
    }

    pub fn intersect(&self, other: &Domain) -> Domain {
        match self.t_max.partial_cmp(&other.t_max) {
            Some(std::cmp::Ordering::Less) => *self,
            Some(std::cmp::Ordering::Greater) => *other,
            _ => Domain {
                t_max: self.t_max,
                open: self.open || other.open,
            },
        }
    }

    fn check(&self, t: f64) -> Result<(), ScalarError> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(ScalarError::OutOfDomain {
                t,
                t_max: self.t_max,
            })
        }
    }
}

pub type DerivedEval = Arc<dyn Fn(f64) -> Result<Jet1, ScalarError> + Send + Sync>;

#[derive(Clone)]
pub enum Kind {
    Expression(Arc<Expr>),
    Constant(f64),
    Table {
        solution: Arc<OdeSolution>,
        component: usize,
    },
    Derived(DerivedEval),
}

/// A function of `t` on `[0, t_max)`, immutable once built.
#[derive(Clone)]
pub struct ScalarFn {
    kind: Kind,
    domain: Domain,
    label: Arc<str>,
}

impl std::fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Expression(_) => "expression",
            Kind::Constant(_) => "constant",
            Kind::Table { .. } => "ode-table",
            Kind::Derived(_) => "derived",
        };
        f.debug_struct("ScalarFn")
            .field("kind", &kind)
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Parses an expression in `t`.
pub fn parse_expr(src: &str) -> Result<ScalarFn, ScalarError> {
    let e = Expr::parse(src)?;
    Ok(ScalarFn {
        kind: Kind::Expression(Arc::new(e)),
        domain: Domain::UNBOUNDED,
        label: src.trim().into(),
    })
}

impl ScalarFn {
    pub fn constant(v: f64) -> Self {
        Self {
            kind: Kind::Constant(v),
            domain: Domain::UNBOUNDED,
            label: format!("{v}").into(),
        }
    }

    pub fn expression(e: Expr) -> Self {
        Self {
            label: e.to_string().into(),
            kind: Kind::Expression(Arc::new(e)),
            domain: Domain::UNBOUNDED,
        }
    }

    pub fn table(solution: Arc<OdeSolution>, component: usize, domain: Domain) -> Self {
        Self {
            kind: Kind::Table {
                solution,
                component,
            },
            domain,
            label: format!("ode[{component}]").into(),
        }
    }

    pub fn derived(
        label: impl Into<Arc<str>>,
        domain: Domain,
        f: impl Fn(f64) -> Result<Jet1, ScalarError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: Kind::Derived(Arc::new(f)),
            domain,
            label: label.into(),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_label(mut self, label: impl Into<Arc<str>>) -> Self {
        self.label = label.into();
        self
    }

    /// True when the value comes from (or depends on) an integrated table.
    /// Derived functions report what they were declared with.
    pub fn is_table(&self) -> bool {
        matches!(self.kind, Kind::Table { .. })
    }

    pub fn eval(&self, t: f64) -> Result<f64, ScalarError> {
        Ok(self.eval_jet(t)?.value)
    }

    pub fn eval_jet(&self, t: f64) -> Result<Jet1, ScalarError> {
        self.domain.check(t)?;
        let j = match &self.kind {
            Kind::Expression(e) => e.eval(Jet1::variable(t))?,
            Kind::Constant(v) => Jet1::constant(*v),
            Kind::Table {
                solution,
                component,
            } => solution.eval_jet(*component, t)?,
            Kind::Derived(f) => f(t)?,
        };
        if !j.value.is_finite() || !j.deriv.is_finite() {
            return Err(ScalarError::Domain {
                what: format!("non-finite value of `{}`", self.label),
                t,
            });
        }
        Ok(j)
    }

    /// Value, first and second derivative. Only closed-form kinds support it.
    pub fn eval_jet2(&self, t: f64) -> Result<Jet2, ScalarError> {
        self.domain.check(t)?;
        match &self.kind {
            Kind::Expression(e) => e.eval(Jet2::variable2(t)),
            Kind::Constant(v) => Ok(Jet2::cst(*v)),
            Kind::Table { .. } => Err(ScalarError::OrderUnavailable("ode tables")),
            Kind::Derived(_) => Err(ScalarError::OrderUnavailable("derived functions")),
        }
    }

    /// `self + delta`, keeping the domain.
    pub fn offset(&self, delta: f64) -> ScalarFn {
        let inner = self.clone();
        ScalarFn::derived(format!("{} + {delta}", self.label), self.domain, move |t| {
            Ok(inner.eval_jet(t)? + delta)
        })
    }

    /// `self * factor`, keeping the domain.
    pub fn scaled(&self, factor: f64) -> ScalarFn {
        let inner = self.clone();
        ScalarFn::derived(
            format!("{factor} * {}", self.label),
            self.domain,
            move |t| Ok(inner.eval_jet(t)? * factor),
        )
    }
}

/// Tabulates named functions on `grid` as CSV (`t, f, f_deriv, ...`).
pub fn write_functions_csv<W: Write>(
    out: W,
    fns: &[(&str, &ScalarFn)],
    grid: &[f64],
) -> Result<(), ScalarError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for (n, _) in fns {
        header.push(n.to_string());
        header.push(format!("{n}_deriv"));
    }
    w.write_record(&header)?;
    for &t in grid {
        let mut rec = vec![format!("{t:.17e}")];
        for (_, f) in fns {
            let j = f.eval_jet(t)?;
            rec.push(format!("{:.17e}", j.value));
            rec.push(format!("{:.17e}", j.deriv));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_at_zero() {
        let j = ScalarFn::constant(1.0).eval_jet(0.0).unwrap();
        assert_eq!((j.value, j.deriv), (1.0, 0.0));
    }

    #[test]
    fn domain_is_enforced() {
        let f = parse_expr("t").unwrap().with_domain(Domain::open(0.5));
        assert!(f.eval_jet(0.49).is_ok());
        assert!(matches!(
            f.eval_jet(0.5),
            Err(ScalarError::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.eval_jet(-0.1),
            Err(ScalarError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn offset_and_scale() {
        let f = parse_expr("t^2").unwrap();
        let g = f.offset(0.1).scaled(-2.0);
        let j = g.eval_jet(1.0).unwrap();
        assert!((j.value + 2.2).abs() < 1e-15);
        assert_eq!(j.deriv, -4.0);
    }

    #[test]
    fn second_order_only_for_closed_forms() {
        let f = parse_expr("exp(2*t)").unwrap();
        let j = f.eval_jet2(0.0).unwrap();
        assert_eq!(j.second(), 4.0);
        let d = ScalarFn::derived("x", Domain::UNBOUNDED, |t| Ok(Jet1::variable(t)));
        assert!(d.eval_jet2(0.0).is_err());
    }

    #[test]
    fn sqrt_at_zero_is_rejected_for_jets() {
        let f = parse_expr("sqrt(t)").unwrap();
        assert!(f.eval_jet(0.0).is_err());
        assert_eq!(f.eval_jet(4.0).unwrap().deriv, 0.25);
    }

    #[test]
    fn functions_csv() {
        let f = parse_expr("sqrt(1+2*t)").unwrap();
        let mut buf = Vec::new();
        write_functions_csv(&mut buf, &[("a1", &f)], &[0.0, 1.5]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<_> = text.lines().collect();
        assert_eq!(rows[0], "t,a1,a1_deriv");
        let last: Vec<f64> = rows[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![1.5, 2.0, 0.5]);
    }
}
