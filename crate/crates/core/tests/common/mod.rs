//! Families and sampling shared by the integration suites.
#![allow(dead_code)]

use norden::families::{self, QuasiSeed};
use norden::lift::{CoefficientFamily, TangentPoint};
use norden::sampling::{sample_points, SamplingConfig};
use norden::scalarfn::{parse_expr, ScalarFn};
use norden::spaceform::SpaceForm;

pub fn expr(s: &str) -> ScalarFn {
    parse_expr(s).unwrap()
}

pub fn points(
    sf: &SpaceForm,
    fam: &CoefficientFamily,
    num_points: usize,
    seed: u64,
) -> Vec<TangentPoint> {
    let cfg = SamplingConfig {
        num_points,
        seed,
        ..Default::default()
    };
    sample_points(sf, &fam.domain(), &cfg).unwrap()
}

pub fn general_ak(c: f64, step: f64) -> CoefficientFamily {
    families::ak_family(&expr("1+t"), &expr("t/2"), 2.0, 0.1, c, 0.5, step).unwrap()
}

pub fn conformal(c: f64) -> CoefficientFamily {
    families::conformal_ak_family(&expr("1+t"), &expr("t/2"), &expr("2+t"), &expr("0"), c, 0.5)
        .unwrap()
}

pub fn integrable(c: f64) -> CoefficientFamily {
    let j = families::integrable_family(&expr("1+t"), &expr("t/2"), c, 0.5).unwrap();
    families::integrable_norden(
        &j,
        expr("2+t"),
        expr("0.1+t*t"),
        expr("0.3-t"),
        expr("0.2*t"),
    )
    .unwrap()
}

pub fn quasi_seed() -> QuasiSeed {
    QuasiSeed {
        a1: 1.0,
        a3: 0.2,
        c1: 1.5,
        c3: 0.1,
        d1: 0.2,
        d3: 0.1,
        b1: ScalarFn::constant(0.1),
        b3: ScalarFn::constant(0.05),
    }
}

pub fn quasi(sf: &SpaceForm) -> CoefficientFamily {
    families::quasi_ak_family(&quasi_seed(), sf, 0.4, 1e-2)
        .unwrap()
        .family
}

/// Every valid family available over a base of curvature `c`.
pub fn all_families(sf: &SpaceForm) -> Vec<CoefficientFamily> {
    let c = sf.curvature_constant();
    let mut out = vec![
        families::diagonal_ak(1.0, 1.0, c, 1.0).unwrap(),
        general_ak(c, 1e-3),
        conformal(c),
        families::generic_norden(1.0).unwrap(),
        integrable(c),
        quasi(sf),
    ];
    if c == 0.0 {
        out.push(families::trivial_flat());
    }
    out
}
