//! The JSON run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, QuasiSeed};
use crate::lift::{Coeff, CoefficientFamily};
use crate::sampling::SamplingConfig;
use crate::scalarfn::{parse_expr, ScalarFn};
use crate::spaceform::SpaceForm;

pub const SCHEMA_VERSION: u32 = 1;

fn default_t_max() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1e-3
}

/// A coefficient given as a number or as an expression in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Number(f64),
    Expr(String),
}

impl FnSpec {
    pub fn build(&self) -> Result<ScalarFn> {
        Ok(match self {
            FnSpec::Number(v) => ScalarFn::constant(*v),
            FnSpec::Expr(s) => parse_expr(s)?,
        })
    }
}

impl From<&str> for FnSpec {
    fn from(s: &str) -> Self {
        FnSpec::Expr(s.to_string())
    }
}

impl From<f64> for FnSpec {
    fn from(v: f64) -> Self {
        FnSpec::Number(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub n: usize,
    pub c: f64,
}

impl Default for BaseSpec {
    fn default() -> Self {
        Self { n: 2, c: 1.0 }
    }
}

impl BaseSpec {
    pub fn space_form(&self) -> Result<SpaceForm> {
        Ok(SpaceForm::new(self.n, self.c)?)
    }
}

/// Which family to build. The base curvature comes from [`BaseSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    TrivialFlat,
    /// Integrable `J` from `a1, a3`; `c1, c3, d1, d3` free.
    Integrable {
        a1: FnSpec,
        a3: FnSpec,
        c1: FnSpec,
        c3: FnSpec,
        d1: FnSpec,
        d3: FnSpec,
        #[serde(default = "default_t_max")]
        t_max: f64,
    },
    DiagonalAk {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        #[serde(default = "default_t_max")]
        t_max: f64,
    },
    GeneralAk {
        a1: FnSpec,
        a3: FnSpec,
        c1_0: f64,
        c3_0: f64,
        #[serde(default = "default_t_max")]
        t_max: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
    ConformalAk {
        a1: FnSpec,
        a3: FnSpec,
        c1: FnSpec,
        c3: FnSpec,
        #[serde(default = "default_t_max")]
        t_max: f64,
    },
    QuasiAk {
        a1_0: f64,
        a3_0: f64,
        c1_0: f64,
        c3_0: f64,
        d1_0: f64,
        d3_0: f64,
        b1: FnSpec,
        b3: FnSpec,
        #[serde(default = "default_t_max")]
        t_max: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
    /// Either all twelve coefficients, or the eight free ones.
    Custom {
        coefficients: BTreeMap<Coeff, FnSpec>,
        #[serde(default = "default_t_max")]
        t_max: f64,
    },
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec::DiagonalAk {
            a: 1.0,
            b: 1.0,
            t_max: default_t_max(),
        }
    }
}

/// One coefficient offset applied after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub coeff: Coeff,
    pub delta: f64,
    /// Offset in place instead of re-completing the Norden relations.
    #[serde(default)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Membership tolerance; defaults by family kind.
    pub member: Option<f64>,
    /// Rejection threshold; defaults to `1e-3`.
    pub reject: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub base: BaseSpec,
    #[serde(default)]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturb: Vec<Perturbation>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            base: BaseSpec::default(),
            family: FamilySpec::default(),
            perturb: Vec::new(),
            sampling: SamplingConfig::default(),
            tolerances: ToleranceSpec::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.sampling.num_points == 0 {
            return Err(Error::Invalid(
                "sampling.num_points must be positive".into(),
            ));
        }
        if let Some(m) = self.tolerances.member {
            if !(m > 0.0) {
                return Err(Error::Invalid(format!(
                    "tolerances.member must be positive, got {m}"
                )));
            }
        }
        Ok(())
    }

    /// Builds the configured family and applies the perturbations in order.
    pub fn build_family(&self) -> Result<CoefficientFamily> {
        let mut fam = build(&self.family, self.base.c, self.base.n)?;
        for p in &self.perturb {
            fam = if p.raw {
                fam.offset_raw(p.coeff, p.delta)
            } else {
                fam.perturbed(p.coeff, p.delta)?
            };
        }
        Ok(fam)
    }
}

fn build(spec: &FamilySpec, c: f64, n: usize) -> Result<CoefficientFamily> {
    Ok(match spec {
        FamilySpec::TrivialFlat => {
            if c != 0.0 {
                return Err(Error::Invalid(
                    "trivial-flat needs a flat base (c = 0)".into(),
                ));
            }
            families::trivial_flat()
        }
        FamilySpec::Integrable {
            a1,
            a3,
            c1,
            c3,
            d1,
            d3,
            t_max,
        } => {
            let j = families::integrable_family(&a1.build()?, &a3.build()?, c, *t_max)?;
            families::integrable_norden(&j, c1.build()?, c3.build()?, d1.build()?, d3.build()?)?
        }
        FamilySpec::DiagonalAk { a, b, t_max } => families::diagonal_ak(*a, *b, c, *t_max)?,
        FamilySpec::GeneralAk {
            a1,
            a3,
            c1_0,
            c3_0,
            t_max,
            step,
        } => families::ak_family(&a1.build()?, &a3.build()?, *c1_0, *c3_0, c, *t_max, *step)?,
        FamilySpec::ConformalAk {
            a1,
            a3,
            c1,
            c3,
            t_max,
        } => families::conformal_ak_family(
            &a1.build()?,
            &a3.build()?,
            &c1.build()?,
            &c3.build()?,
            c,
            *t_max,
        )?,
        FamilySpec::QuasiAk {
            a1_0,
            a3_0,
            c1_0,
            c3_0,
            d1_0,
            d3_0,
            b1,
            b3,
            t_max,
            step,
        } => {
            let seed = QuasiSeed {
                a1: *a1_0,
                a3: *a3_0,
                c1: *c1_0,
                c3: *c3_0,
                d1: *d1_0,
                d3: *d3_0,
                b1: b1.build()?,
                b3: b3.build()?,
            };
            let sf = SpaceForm::new(n, c)?;
            families::quasi_ak_family(&seed, &sf, *t_max, *step)?.family
        }
        FamilySpec::Custom {
            coefficients,
            t_max,
        } => {
            let fns = coefficients
                .iter()
                .map(|(k, v)| Ok((*k, v.build()?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            families::custom(&fns, *t_max)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = RunConfig::from_json(r#"{"schema": 1}"#).unwrap();
        assert_eq!(cfg.base, BaseSpec { n: 2, c: 1.0 });
        assert_eq!(
            cfg.family,
            FamilySpec::DiagonalAk {
                a: 1.0,
                b: 1.0,
                t_max: 1.0
            }
        );
        assert!(cfg.build_family().is_ok());
        assert_eq!(cfg.sampling, SamplingConfig::default());
    }

    #[test]
    fn family_kinds_parse() {
        let cfg = RunConfig::from_json(
            r#"{"schema": 1, "base": {"n": 3, "c": -1},
                "family": {"kind": "diagonal-ak", "A": 1, "B": 1},
                "perturb": [{"coeff": "d1", "delta": 0.05}]}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.family,
            FamilySpec::DiagonalAk {
                a: 1.0,
                b: 1.0,
                t_max: 1.0
            }
        );
        let fam = cfg.build_family().unwrap();
        assert!(fam.domain().t_max <= 0.5);

        let cfg = RunConfig::from_json(
            r#"{"schema": 1, "family": {"kind": "custom", "t_max": 2,
                "coefficients": {"a1": "1+t", "a3": 0, "b1": 0, "b3": 0,
                                 "c1": 1, "c3": 0, "d1": 0, "d3": 0}}}"#,
        )
        .unwrap();
        assert!(cfg.build_family().is_ok());
    }

    #[test]
    fn schema_and_fields_are_checked() {
        assert!(RunConfig::from_json(r#"{"schema": 2}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema": 1, "colour": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema": 1, "family": {"kind": "nope"}}"#).is_err());
        let bad = RunConfig::from_json(r#"{"schema": 1, "family": {"kind": "conformal-ak", "a1": "1+", "a3": 0, "c1": 1, "c3": 0}}"#).unwrap();
        assert!(bad.build_family().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig {
            family: FamilySpec::GeneralAk {
                a1: "1+t".into(),
                a3: "t/2".into(),
                c1_0: 2.0,
                c3_0: 0.1,
                t_max: 0.5,
                step: 1e-3,
            },
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
