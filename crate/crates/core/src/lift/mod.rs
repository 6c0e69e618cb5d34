//! The lifted pair `(J, G)` on `TM` in the adapted frame `(δ_1..δ_n, ∂_1..∂_n)`.
//!
//! `J` acts on horizontal and vertical lifts through the coefficients
//! `a_α, b_α` (with `a_4 = -a_3`, `b_4 = -b_3`) and `G` pairs them through
//! `c_α, d_α`, each multiplying either `g_ij` or `g_0i g_0j`, `g_0i = y^h g_hi`.

mod coeffs;
mod frame;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

pub use coeffs::{Coeff, Coeffs};
pub use frame::{
    endomorphism_to_coordinates, form_to_coordinates, frame_matrix, matmul, nonlinear_connection,
    transpose, FrameChange,
};

use crate::error::{Error, Result};
use crate::scalarfn::{checked_div, Domain, Jet1, Real, ScalarError, ScalarFn};
use crate::spaceform::SpaceForm;

/// Constraint tolerance for closed-form families.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Constraint tolerance for families containing integrated tables.
pub const TABLE_TOL: f64 = 1e-6;
/// `|c1 c2 - c3^2|` (and its `2t`-shifted analogue) must exceed this.
pub const NONDEGENERACY_EPS: f64 = 1e-12;

/// The eight free coefficients from which [`complete_norden`] derives
/// `a2, b2, c2, d2`.
#[derive(Debug, Clone)]
pub struct NordenInputs {
    pub a1: ScalarFn,
    pub a3: ScalarFn,
    pub b1: ScalarFn,
    pub b3: ScalarFn,
    pub c1: ScalarFn,
    pub c3: ScalarFn,
    pub d1: ScalarFn,
    pub d3: ScalarFn,
    /// Working domain `[0, t_max)` scanned for vanishing denominators.
    pub t_max: f64,
}

impl NordenInputs {
    fn slot(&mut self, c: Coeff) -> Option<&mut ScalarFn> {
        Some(match c {
            Coeff::A1 => &mut self.a1,
            Coeff::A3 => &mut self.a3,
            Coeff::B1 => &mut self.b1,
            Coeff::B3 => &mut self.b3,
            Coeff::C1 => &mut self.c1,
            Coeff::C3 => &mut self.c3,
            Coeff::D1 => &mut self.d1,
            Coeff::D3 => &mut self.d3,
            _ => return None,
        })
    }
}

/// Twelve coefficient functions defining `(J, G)`.
#[derive(Debug, Clone)]
pub struct CoefficientFamily {
    pub fns: Coeffs<ScalarFn>,
    label: String,
    tabulated: bool,
    domain: Domain,
    inputs: Option<NordenInputs>,
}

impl CoefficientFamily {
    pub fn new(label: impl Into<String>, fns: Coeffs<ScalarFn>, tabulated: bool) -> Self {
        let domain = fns
            .iter()
            .fold(Domain::UNBOUNDED, |d, (_, f)| d.intersect(&f.domain()));
        Self {
            fns,
            label: label.into(),
            tabulated,
            domain,
            inputs: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Restricts the working domain (e.g. to a validity tube).
    pub fn restricted(mut self, domain: Domain) -> Self {
        self.domain = self.domain.intersect(&domain);
        self
    }

    pub fn is_tabulated(&self) -> bool {
        self.tabulated
    }

    pub fn mark_tabulated(mut self) -> Self {
        self.tabulated = true;
        self
    }

    pub fn norden_inputs(&self) -> Option<&NordenInputs> {
        self.inputs.as_ref()
    }

    pub fn constraint_tolerance(&self) -> f64 {
        if self.tabulated {
            TABLE_TOL
        } else {
            ANALYTIC_TOL
        }
    }

    fn check_t(&self, t: f64) -> Result<(), ScalarError> {
        if self.domain.contains(t) {
            Ok(())
        } else {
            Err(ScalarError::OutOfDomain {
                t,
                t_max: self.domain.t_max,
            })
        }
    }

    pub fn jets(&self, t: f64) -> Result<Coeffs<Jet1>, ScalarError> {
        self.check_t(t)?;
        Coeffs::try_from_fn(|c| self.fns.get(c).eval_jet(t))
    }

    pub fn values(&self, t: f64) -> Result<Coeffs<f64>, ScalarError> {
        Ok(self.jets(t)?.map(|j| j.value))
    }

    /// Adds `delta` to one coefficient. When the family was completed from
    /// free inputs and `coeff` is one of them, the dependent coefficients are
    /// re-derived so the result stays an almost Norden structure; otherwise the
    /// coefficient is shifted in place.
    pub fn perturbed(&self, coeff: Coeff, delta: f64) -> Result<CoefficientFamily> {
        let label = format!("{} [{coeff} + {delta}]", self.label);
        if let Some(mut inputs) = self.inputs.clone() {
            if let Some(slot) = inputs.slot(coeff) {
                *slot = slot.offset(delta);
                let fam = complete_norden(&inputs)?;
                return Ok(CoefficientFamily {
                    label,
                    tabulated: self.tabulated,
                    domain: fam.domain.intersect(&self.domain),
                    ..fam
                });
            }
        }
        Ok(self.map_one(coeff, |f| f.offset(delta), label))
    }

    /// Adds `delta` to one coefficient in place, without re-deriving
    /// anything; generally breaks the algebraic constraints.
    pub fn offset_raw(&self, coeff: Coeff, delta: f64) -> CoefficientFamily {
        let label = format!("{} [{coeff} + {delta}, raw]", self.label);
        self.map_one(coeff, |f| f.offset(delta), label)
    }

    /// Multiplies one coefficient in place, without re-deriving anything.
    pub fn scaled(&self, coeff: Coeff, factor: f64) -> CoefficientFamily {
        let label = format!("{} [{coeff} * {factor}]", self.label);
        self.map_one(coeff, |f| f.scaled(factor), label)
    }

    fn map_one(&self, coeff: Coeff, f: impl FnOnce(&ScalarFn) -> ScalarFn, label: String) -> Self {
        let mut fns = self.fns.clone();
        *fns.get_mut(coeff) = f(self.fns.get(coeff));
        CoefficientFamily {
            fns,
            label,
            tabulated: self.tabulated,
            domain: self.domain,
            inputs: None,
        }
    }
}

/// A tangent vector `y` at base point `x`, with energy density `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl TangentPoint {
    pub fn new(sf: &SpaceForm, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if y.len() != sf.dim() {
            return Err(Error::Invalid(format!(
                "fiber has {} coordinates, base dimension is {}",
                y.len(),
                sf.dim()
            )));
        }
        let b = sf.metric_at(&x)?;
        let t = energy(&b.g, &y);
        Ok(Self { x, y, t })
    }
}

/// `t = ½ g_ik y^i y^k`.
pub fn energy<R: Real>(g: &[R], y: &[R]) -> R {
    let n = y.len();
    let mut s = R::zero();
    for i in 0..n {
        for k in 0..n {
            s = s + g[i * n + k] * y[i] * y[k];
        }
    }
    s * 0.5
}

/// `g_0i = y^h g_hi`.
pub fn lowered<R: Real>(g: &[R], y: &[R]) -> Vec<R> {
    let n = y.len();
    (0..n)
        .map(|i| (0..n).fold(R::zero(), |s, h| s + y[h] * g[h * n + i]))
        .collect()
}

/// Adapted-frame components of `J` (column = argument) and `G`, both
/// `2n × 2n` row-major.
pub fn adapted_tensors<R: Real>(g: &[R], y: &[R], k: &Coeffs<R>) -> (Vec<R>, Vec<R>) {
    let n = y.len();
    let m = 2 * n;
    let g0 = lowered(g, y);
    let mut j = vec![R::zero(); m * m];
    let mut gg = vec![R::zero(); m * m];
    for h in 0..n {
        for i in 0..n {
            let d = if h == i { R::one() } else { R::zero() };
            let yg = y[h] * g0[i];
            j[h * m + i] = -(k.a3 * d + k.b3 * yg);
            j[(n + h) * m + i] = k.a1 * d + k.b1 * yg;
            j[h * m + n + i] = -(k.a2 * d + k.b2 * yg);
            j[(n + h) * m + n + i] = k.a3 * d + k.b3 * yg;

            let gij = g[h * n + i];
            let gg0 = g0[h] * g0[i];
            gg[h * m + i] = k.c1 * gij + k.d1 * gg0;
            gg[(n + h) * m + n + i] = k.c2 * gij + k.d2 * gg0;
            let mixed = k.c3 * gij + k.d3 * gg0;
            gg[(n + h) * m + i] = mixed;
            gg[h * m + n + i] = mixed;
        }
    }
    (j, gg)
}

/// `J`, `G` and `H = G⁻¹` at one tangent point.
#[derive(Debug, Clone)]
pub struct AdaptedFrameData {
    pub n: usize,
    pub t: f64,
    pub j: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

impl AdaptedFrameData {
    pub fn from_parts(n: usize, t: f64, j: DMatrix<f64>, g: DMatrix<f64>) -> Result<Self> {
        let h = invert_metric(&g, t)?;
        Ok(Self { n, t, j, g, h })
    }

    /// Horizontal-horizontal block of `H`.
    pub fn h1(&self) -> DMatrix<f64> {
        self.h.view((0, 0), (self.n, self.n)).into_owned()
    }

    /// Vertical-vertical block of `H`.
    pub fn h2(&self) -> DMatrix<f64> {
        self.h.view((self.n, self.n), (self.n, self.n)).into_owned()
    }

    /// Horizontal-vertical block of `H`.
    pub fn h3(&self) -> DMatrix<f64> {
        self.h.view((0, self.n), (self.n, self.n)).into_owned()
    }

    /// `max |J² + I|`.
    pub fn complex_residual(&self) -> f64 {
        let m = 2 * self.n;
        (&self.j * &self.j + DMatrix::identity(m, m)).amax()
    }

    /// `max |Jᵀ G J + G|`.
    pub fn norden_residual(&self) -> f64 {
        (self.j.transpose() * &self.g * &self.j + &self.g).amax()
    }

    /// `max |G H - I|`.
    pub fn inverse_residual(&self) -> f64 {
        let m = 2 * self.n;
        (&self.g * &self.h - DMatrix::identity(m, m)).amax()
    }
}

pub(crate) fn invert_metric(g: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let m = g.nrows();
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let lu = g.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < NONDEGENERACY_EPS * scale.powi(m as i32) {
        return Err(Error::Degenerate { t, det, scale });
    }
    lu.try_inverse().ok_or(Error::Degenerate { t, det, scale })
}

pub fn frame_at(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
) -> Result<AdaptedFrameData> {
    let n = sf.dim();
    let base = sf.metric_at(&p.x)?;
    let k = fam.values(p.t)?;
    let (j, g) = adapted_tensors(&base.g, &p.y, &k);
    AdaptedFrameData::from_parts(
        n,
        p.t,
        DMatrix::from_row_slice(2 * n, 2 * n, &j),
        DMatrix::from_row_slice(2 * n, 2 * n, &g),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Max absolute residual of an identity; passes below the tolerance.
    Identity,
    /// Min absolute value of a quantity that must not vanish.
    NonVanishing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub kind: CheckKind,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl ConstraintReport {
    pub fn get(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Algebraic constraint residuals at one `t`, in the order reported by
/// [`check_family`].
pub fn constraint_residuals(t: f64, k: &Coeffs<f64>) -> [f64; 6] {
    let (a1s, a2s, a3s) = (
        k.a1 + 2.0 * t * k.b1,
        k.a2 + 2.0 * t * k.b2,
        k.a3 + 2.0 * t * k.b3,
    );
    let (c1s, c2s, c3s) = (
        k.c1 + 2.0 * t * k.d1,
        k.c2 + 2.0 * t * k.d2,
        k.c3 + 2.0 * t * k.d3,
    );
    [
        k.a1 * k.a2 - 1.0 - k.a3 * k.a3,
        a1s * a2s - 1.0 - a3s * a3s,
        k.a2 * k.c1 + k.a1 * k.c2 - 2.0 * k.a3 * k.c3,
        a2s * c1s + a1s * c2s - 2.0 * a3s * c3s,
        k.c1 * k.c2 - k.c3 * k.c3,
        c1s * c2s - c3s * c3s,
    ]
}

const CHECK_NAMES: [(&str, CheckKind); 6] = [
    ("almost_complex", CheckKind::Identity),
    ("almost_complex_shifted", CheckKind::Identity),
    ("norden", CheckKind::Identity),
    ("norden_shifted", CheckKind::Identity),
    ("nondegenerate", CheckKind::NonVanishing),
    ("nondegenerate_shifted", CheckKind::NonVanishing),
];

/// Samples the almost-complex, Norden and nondegeneracy conditions.
pub fn check_family(fam: &CoefficientFamily, samples: &[f64]) -> Result<ConstraintReport> {
    let tol = fam.constraint_tolerance();
    let mut worst = [0.0f64; 4];
    let mut least = [f64::INFINITY; 2];
    for &t in samples {
        let r = constraint_residuals(t, &fam.values(t)?);
        for i in 0..4 {
            worst[i] = worst[i].max(r[i].abs());
        }
        for i in 0..2 {
            least[i] = least[i].min(r[4 + i].abs());
        }
    }
    let checks: Vec<_> = CHECK_NAMES
        .iter()
        .enumerate()
        .map(|(i, &(name, kind))| {
            let (value, pass) = match kind {
                CheckKind::Identity => (worst[i], worst[i] < tol),
                CheckKind::NonVanishing => (least[i - 4], least[i - 4] > NONDEGENERACY_EPS),
            };
            ConstraintCheck {
                name,
                kind,
                value,
                pass,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(ConstraintReport {
        checks,
        tolerance: tol,
        samples: samples.len(),
        pass,
    })
}

/// `(a2, b2, c2, d2)` from the almost-complex and Norden relations.
///
/// The divisions by `2t` implicit in those relations cancel once
/// `a1 a2 = 1 + a3²` and `a2 c1 + a1 c2 = 2 a3 c3` are substituted, which
/// leaves denominators `a1` and `a1 + 2t b1` only.
#[allow(clippy::too_many_arguments)]
pub fn norden_completion<R: Real>(
    t: R,
    a1: R,
    a3: R,
    b1: R,
    b3: R,
    c1: R,
    c3: R,
    d1: R,
    d3: R,
) -> Result<[R; 4], ScalarError> {
    let a2 = checked_div(a3 * a3 + 1.0, a1, "a1")?;
    let shifted = a1 + t * b1 * 2.0;
    let b2 = checked_div(
        a3 * b3 * 2.0 + t * b3 * b3 * 2.0 - a2 * b1,
        shifted,
        "a1 + 2t b1",
    )?;
    let c2 = checked_div(a3 * c3 * 2.0 - a2 * c1, a1, "a1")?;
    let p1 = a3 * d3 * 2.0 + b3 * c3 * 2.0 - a2 * d1 - b2 * c1;
    let p2 = b3 * d3 * 2.0 - b2 * d1;
    let d2 = checked_div(p1 + t * p2 * 2.0 - b1 * c2, shifted, "a1 + 2t b1")?;
    Ok([a2, b2, c2, d2])
}

/// Locates a zero of `f` on `[0, t_max)`, scanning `steps` cells and bisecting
/// sign changes.
pub(crate) fn find_zero(
    f: impl Fn(f64) -> Result<f64, ScalarError>,
    t_max: f64,
    steps: usize,
) -> Result<Option<f64>, ScalarError> {
    let hi = t_max * (1.0 - 1e-9);
    let mut prev_t = 0.0;
    let mut prev = f(0.0)?;
    if prev.abs() < crate::scalarfn::DIV_EPS {
        return Ok(Some(0.0));
    }
    for k in 1..=steps {
        let t = hi * k as f64 / steps as f64;
        let v = f(t)?;
        if v.abs() < crate::scalarfn::DIV_EPS {
            return Ok(Some(t));
        }
        if v.signum() != prev.signum() {
            let (mut lo, mut up, mut flo) = (prev_t, t, prev);
            for _ in 0..80 {
                let mid = 0.5 * (lo + up);
                let fm = f(mid)?;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    up = mid;
                }
            }
            return Ok(Some(0.5 * (lo + up)));
        }
        prev_t = t;
        prev = v;
    }
    Ok(None)
}

const ZERO_SCAN_STEPS: usize = 2000;

/// Derives `a2, b2, c2, d2` so that `J² = -I` and `G(J·, J·) = -G`.
pub fn complete_norden(inputs: &NordenInputs) -> Result<CoefficientFamily> {
    let t_max = inputs.t_max;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Invalid(format!(
            "working domain must be finite, got {t_max}"
        )));
    }
    let free = [
        &inputs.a1, &inputs.a3, &inputs.b1, &inputs.b3, &inputs.c1, &inputs.c3, &inputs.d1,
        &inputs.d3,
    ];
    let domain = free
        .iter()
        .fold(Domain::open(t_max), |d, f| d.intersect(&f.domain()));
    let scan_max = domain.t_max;

    if let Some(t) = find_zero(|t| inputs.a1.eval(t), scan_max, ZERO_SCAN_STEPS)? {
        return Err(Error::DenominatorZero {
            what: "a1".into(),
            t,
        });
    }
    let shifted = |t: f64| -> Result<f64, ScalarError> {
        Ok(inputs.a1.eval(t)? + 2.0 * t * inputs.b1.eval(t)?)
    };
    if let Some(t) = find_zero(shifted, scan_max, ZERO_SCAN_STEPS)? {
        return Err(Error::DenominatorZero {
            what: "a1 + 2t b1".into(),
            t,
        });
    }

    let src = Arc::new(inputs.clone());
    let completion = move |t: f64| -> Result<[Jet1; 4], ScalarError> {
        let j = |f: &ScalarFn| f.eval_jet(t);
        norden_completion(
            Jet1::variable(t),
            j(&src.a1)?,
            j(&src.a3)?,
            j(&src.b1)?,
            j(&src.b3)?,
            j(&src.c1)?,
            j(&src.c3)?,
            j(&src.d1)?,
            j(&src.d3)?,
        )
    };
    let completion = Arc::new(completion);
    let derived = |idx: usize, name: &'static str| {
        let c = completion.clone();
        ScalarFn::derived(name, domain, move |t| Ok(c(t)?[idx]))
    };
    let fns = Coeffs {
        a1: inputs.a1.clone(),
        a2: derived(0, "a2"),
        a3: inputs.a3.clone(),
        b1: inputs.b1.clone(),
        b2: derived(1, "b2"),
        b3: inputs.b3.clone(),
        c1: inputs.c1.clone(),
        c2: derived(2, "c2"),
        c3: inputs.c3.clone(),
        d1: inputs.d1.clone(),
        d2: derived(3, "d2"),
        d3: inputs.d3.clone(),
    };
    let tabulated = free.iter().any(|f| f.is_table());
    let mut fam = CoefficientFamily::new("norden completion", fns, tabulated).restricted(domain);
    fam.inputs = Some(inputs.clone());
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfn::parse_expr;

    fn cst(v: f64) -> ScalarFn {
        ScalarFn::constant(v)
    }

    pub(crate) fn trivial() -> CoefficientFamily {
        let fns = Coeffs::from_fn(|c| match c {
            Coeff::A1 | Coeff::A2 | Coeff::C1 => cst(1.0),
            Coeff::C2 => cst(-1.0),
            _ => cst(0.0),
        });
        CoefficientFamily::new("trivial", fns, false)
    }

    #[test]
    fn trivial_family_passes() {
        let r = check_family(&trivial(), &[0.0, 0.3, 1.0]).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn flipped_c2_fails_norden_by_two() {
        let fam = trivial().scaled(Coeff::C2, -1.0);
        let r = check_family(&fam, &[0.0, 0.5]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.get("norden").unwrap().value, 2.0);
        assert!(!r.get("norden").unwrap().pass);
    }

    #[test]
    fn trivial_frame_blocks() {
        let sf = SpaceForm::new(2, 1.0).unwrap();
        let p = TangentPoint::new(&sf, vec![0.2, -0.1], vec![0.4, 0.3]).unwrap();
        let fr = frame_at(&trivial(), &sf, &p).unwrap();
        let b = sf.metric_at(&p.x).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let d = if i == k { 1.0 } else { 0.0 };
                assert_eq!(fr.j[(i, 2 + k)], -d);
                assert_eq!(fr.j[(2 + i, k)], d);
                assert_eq!(fr.j[(i, k)], 0.0);
                assert_eq!(fr.g[(i, k)], b.g(i, k));
                assert_eq!(fr.g[(2 + i, 2 + k)], -b.g(i, k));
                assert!((fr.h[(i, k)] - b.g_inv(i, k)).abs() < 1e-12);
                assert!((fr.h[(2 + i, 2 + k)] + b.g_inv(i, k)).abs() < 1e-12);
                assert_eq!(fr.h3()[(i, k)], 0.0);
            }
        }
        assert!(fr.complex_residual() < 1e-15);
        assert!(fr.norden_residual() < 1e-15);
    }

    fn diagonal_inputs() -> NordenInputs {
        NordenInputs {
            a1: parse_expr("sqrt(1+2*t)").unwrap(),
            a3: cst(0.0),
            b1: cst(0.0),
            b3: cst(0.0),
            c1: parse_expr("1+2*t").unwrap(),
            c3: cst(0.0),
            d1: parse_expr("-1").unwrap(),
            d3: cst(0.0),
            t_max: 2.0,
        }
    }

    #[test]
    fn completion_matches_hand_elimination() {
        // a1 = 2, c1 = 4, d1 = -1 at t = 1.5: a2 = 1/2, b2 = 0, c2 = -1, d2 = 1/4
        let fam = complete_norden(&diagonal_inputs()).unwrap();
        let k = fam.values(1.5).unwrap();
        assert!((k.a2 - 0.5).abs() < 1e-15);
        assert!(k.b2.abs() < 1e-15);
        assert!((k.c2 + 1.0).abs() < 1e-15);
        assert!((k.d2 - 0.25).abs() < 1e-15);
        let r = check_family(&fam, &[0.0, 0.5, 1.5]).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn completion_of_trivial_inputs() {
        let inputs = NordenInputs {
            a1: cst(1.0),
            a3: cst(0.0),
            b1: cst(0.0),
            b3: cst(0.0),
            c1: cst(3.0),
            c3: cst(0.0),
            d1: cst(0.0),
            d3: cst(0.0),
            t_max: 1.0,
        };
        let k = complete_norden(&inputs).unwrap().values(0.0).unwrap();
        assert_eq!((k.a2, k.b2, k.c2, k.d2), (1.0, 0.0, -3.0, 0.0));
    }

    #[test]
    fn completion_reports_zero_of_a1() {
        let mut inputs = diagonal_inputs();
        inputs.a1 = parse_expr("1 - t").unwrap();
        match complete_norden(&inputs).unwrap_err() {
            Error::DenominatorZero { what, t } => {
                assert_eq!(what, "a1");
                assert!((t - 1.0).abs() < 1e-9, "{t}");
            }
            e => panic!("{e:?}"),
        }
        let mut inputs = diagonal_inputs();
        inputs.b1 = parse_expr("-1").unwrap();
        // a1 + 2t b1 = sqrt(1+2t) - 2t vanishes at t = (1+sqrt(5))/4
        match complete_norden(&inputs).unwrap_err() {
            Error::DenominatorZero { t, .. } => {
                assert!((t - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-9)
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn perturbation_of_input_stays_norden() {
        let fam = complete_norden(&diagonal_inputs()).unwrap();
        let p = fam.perturbed(Coeff::B1, 0.1).unwrap();
        let r = check_family(&p, &[0.0, 0.7]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((p.values(0.7).unwrap().b1 - 0.1).abs() < 1e-15);
        // a derived coefficient cannot be re-derived, so the shift breaks the relations
        let q = fam.perturbed(Coeff::D2, 0.1).unwrap();
        assert!(!check_family(&q, &[0.7]).unwrap().pass);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let fam = trivial().scaled(Coeff::C1, 0.0).scaled(Coeff::C2, 0.0);
        let sf = SpaceForm::new(2, 0.0).unwrap();
        let p = TangentPoint::new(&sf, vec![0.0, 0.0], vec![0.1, 0.0]).unwrap();
        assert!(matches!(
            frame_at(&fam, &sf, &p),
            Err(Error::Degenerate { .. })
        ));
    }
}
