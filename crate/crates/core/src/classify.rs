//! Membership in the eight classes of almost-Norden structures, decided by
//! the defect of each defining identity over sampled points and all triples
//! of adapted basis vectors.
//!
//! Every defect is made relative as `defect / (1 + max|F|)` at its point.
//! Identities with an explicit dimension factor are divided by it first, so
//! `2n F = ...` is tested as `F = (...) / 2n`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::connection::{analyze_point, fit_proportional, PointAnalysis};
use crate::error::{Error, Result};
use crate::lift::{CoefficientFamily, TangentPoint};
use crate::spaceform::SpaceForm;

/// Default membership tolerance for closed-form families.
pub const MEMBER_TOL_ANALYTIC: f64 = 1e-6;
/// Default membership tolerance for families with integrated coefficients.
pub const MEMBER_TOL_TABLE: f64 = 1e-4;
/// Above this a class is definitely rejected.
pub const REJECT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Class {
    #[serde(rename = "AK")]
    AntiKahler,
    #[serde(rename = "w1")]
    W1,
    #[serde(rename = "w2")]
    W2,
    #[serde(rename = "w3")]
    W3,
    #[serde(rename = "w1+w2")]
    W1W2,
    #[serde(rename = "w1+w3")]
    W1W3,
    #[serde(rename = "w2+w3")]
    W2W3,
    #[serde(rename = "w1+w2+w3")]
    W1W2W3,
}

impl Class {
    pub const ALL: [Class; 8] = [
        Class::AntiKahler,
        Class::W1,
        Class::W2,
        Class::W3,
        Class::W1W2,
        Class::W1W3,
        Class::W2W3,
        Class::W1W2W3,
    ];

    /// Basic classes contained in the direct sum, as bits `ω₁ = 1, ω₂ = 2, ω₃ = 4`.
    fn mask(self) -> u8 {
        match self {
            Class::AntiKahler => 0,
            Class::W1 => 1,
            Class::W2 => 2,
            Class::W3 => 4,
            Class::W1W2 => 3,
            Class::W1W3 => 5,
            Class::W2W3 => 6,
            Class::W1W2W3 => 7,
        }
    }

    /// `self ⊆ other`.
    pub fn is_subclass_of(self, other: Class) -> bool {
        self.mask() & !other.mask() == 0
    }

    pub fn key(self) -> &'static str {
        match self {
            Class::AntiKahler => "AK",
            Class::W1 => "w1",
            Class::W2 => "w2",
            Class::W3 => "w3",
            Class::W1W2 => "w1+w2",
            Class::W1W3 => "w1+w3",
            Class::W2W3 => "w2+w3",
            Class::W1W2W3 => "w1+w2+w3",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Class::AntiKahler => "anti-Kähler",
            Class::W1 => "ω₁",
            Class::W2 => "ω₂",
            Class::W3 => "ω₃",
            Class::W1W2 => "ω₁⊕ω₂",
            Class::W1W3 => "ω₁⊕ω₃",
            Class::W2W3 => "ω₂⊕ω₃",
            Class::W1W2W3 => "ω₁⊕ω₂⊕ω₃",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Member,
    Inconclusive,
    Rejected,
}

impl Verdict {
    pub fn from_residual(r: f64, member_tol: f64, reject_tol: f64) -> Verdict {
        if r <= member_tol {
            Verdict::Member
        } else if r > reject_tol || r.is_nan() {
            Verdict::Rejected
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub member: f64,
    pub reject: f64,
}

impl Tolerances {
    /// Defaults for `fam`: looser membership when coefficients are integrated.
    pub fn for_family(fam: &CoefficientFamily) -> Self {
        Self {
            member: if fam.is_tabulated() {
                MEMBER_TOL_TABLE
            } else {
                MEMBER_TOL_ANALYTIC
            },
            reject: REJECT_TOL,
        }
    }
}

// ---- per-point identity defects -------------------------------------------

fn scale(pa: &PointAnalysis) -> f64 {
    1.0 + pa.f.max_abs()
}

/// `F(X,Y,Z) + F(Y,Z,X) + F(Z,X,Y)` over all basis triples.
pub fn cyclic_sum(f: &crate::connection::FTensor) -> Vec<f64> {
    let m = 2 * f.n;
    let mut out = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out.push(f.get(a, b, c) + f.get(b, c, a) + f.get(c, a, b));
            }
        }
    }
    out
}

/// `F(X, Y, JZ)` over basis triples.
fn third_slot_j(pa: &PointAnalysis) -> Vec<f64> {
    let m = 2 * pa.f.n;
    let j = &pa.frame.j;
    let mut out = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out[(a * m + b) * m + c] = (0..m).map(|r| j[(r, c)] * pa.f.get(a, b, r)).sum();
            }
        }
    }
    out
}

struct Ingredients {
    m: usize,
    g: Vec<f64>,
    gj: Vec<f64>,
    phi: Vec<f64>,
    phij: Vec<f64>,
}

fn ingredients(pa: &PointAnalysis) -> Ingredients {
    let m = 2 * pa.f.n;
    let (g, j) = (&pa.frame.g, &pa.frame.j);
    let phi = pa.phi.components();
    let mut gj = vec![0.0; m * m];
    for x in 0..m {
        for y in 0..m {
            gj[x * m + y] = (0..m).map(|k| g[(x, k)] * j[(k, y)]).sum();
        }
    }
    let phij = (0..m)
        .map(|z| (0..m).map(|k| phi[k] * j[(k, z)]).sum())
        .collect();
    Ingredients {
        m,
        g: g.iter().copied().collect::<Vec<_>>(),
        gj,
        phi,
        phij,
    }
}

impl Ingredients {
    fn g(&self, a: usize, b: usize) -> f64 {
        // nalgebra storage is column-major
        self.g[b * self.m + a]
    }
}

/// `max |F|`, relative.
pub fn point_ak(pa: &PointAnalysis) -> f64 {
    let m = pa.f.max_abs();
    m / (1.0 + m)
}

/// `2n F(X,Y,Z) = G(X,JY)Φ(JZ) + G(X,JZ)Φ(JY) + G(X,Y)Φ(Z) + G(X,Z)Φ(Y)`.
pub fn point_w1(pa: &PointAnalysis) -> f64 {
    let n = pa.f.n as f64;
    let q = ingredients(pa);
    let m = q.m;
    let mut worst: f64 = 0.0;
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let rhs = q.gj[x * m + y] * q.phij[z]
                    + q.gj[x * m + z] * q.phij[y]
                    + q.g(x, y) * q.phi[z]
                    + q.g(x, z) * q.phi[y];
                worst = worst.max((pa.f.get(x, y, z) - rhs / (2.0 * n)).abs());
            }
        }
    }
    worst / scale(pa)
}

/// `F(X,Y,JZ) + F(Y,Z,JX) + F(Z,X,JY) = 0`.
pub fn point_w1w2(pa: &PointAnalysis) -> f64 {
    let m = 2 * pa.f.n;
    let fj = third_slot_j(pa);
    let at = |a: usize, b: usize, c: usize| fj[(a * m + b) * m + c];
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                worst = worst.max((at(a, b, c) + at(b, c, a) + at(c, a, b)).abs());
            }
        }
    }
    worst / scale(pa)
}

/// `F(X,Y,Z) + F(Y,Z,X) + F(Z,X,Y) = 0`.
pub fn point_w3(pa: &PointAnalysis) -> f64 {
    cyclic_sum(&pa.f).iter().fold(0.0f64, |w, v| w.max(v.abs())) / scale(pa)
}

/// `Φ = 0`.
pub fn point_w2w3(pa: &PointAnalysis) -> f64 {
    pa.phi.max_abs() / scale(pa)
}

/// `Φ = 0` together with the `ω₁⊕ω₂` identity.
pub fn point_w2(pa: &PointAnalysis) -> f64 {
    point_w2w3(pa).max(point_w1w2(pa))
}

/// `n[F(X,Y,Z) + F(Y,Z,X) + F(Z,X,Y)] = G(X,Y)Φ(Z) + G(Z,X)Φ(Y) + G(Y,Z)Φ(X)
/// + G(X,JY)Φ(JZ) + G(Y,JZ)Φ(JX) + G(Z,JX)Φ(JY)`.
pub fn point_w1w3(pa: &PointAnalysis) -> f64 {
    let n = pa.f.n as f64;
    let q = ingredients(pa);
    let m = q.m;
    let mut worst: f64 = 0.0;
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let cyc = pa.f.get(x, y, z) + pa.f.get(y, z, x) + pa.f.get(z, x, y);
                let rhs = q.g(x, y) * q.phi[z]
                    + q.g(z, x) * q.phi[y]
                    + q.g(y, z) * q.phi[x]
                    + q.gj[x * m + y] * q.phij[z]
                    + q.gj[y * m + z] * q.phij[x]
                    + q.gj[z * m + x] * q.phij[y];
                worst = worst.max((cyc - rhs / n).abs());
            }
        }
    }
    worst / scale(pa)
}

/// Norden validity: `J² = -I` and `G(JX, JY) = -G(X, Y)`.
pub fn point_norden(pa: &PointAnalysis) -> f64 {
    let gmax = pa.frame.g.iter().fold(0.0f64, |w, v| w.max(v.abs()));
    pa.frame
        .complex_residual()
        .max(pa.frame.norden_residual() / (1.0 + gmax))
}

pub fn point_residual(class: Class, pa: &PointAnalysis) -> f64 {
    match class {
        Class::AntiKahler => point_ak(pa),
        Class::W1 => point_w1(pa),
        Class::W2 => point_w2(pa),
        Class::W3 => point_w3(pa),
        Class::W1W2 => point_w1w2(pa),
        Class::W1W3 => point_w1w3(pa),
        Class::W2W3 => point_w2w3(pa),
        Class::W1W2W3 => point_norden(pa),
    }
}

/// Auxiliary identities reported alongside the class residuals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `F(X,Y,Z) = F(X,Z,Y)`, relative.
    pub f_swap: f64,
    /// `F(X,Y,Z) = F(X,JY,JZ)`, relative.
    pub f_j_invariance: f64,
    /// `max |N|` relative to `1 + max |∂J|`.
    pub nijenhuis: f64,
    /// Off-`g₀` part of `Φ δ_k` and `Φ ∂_k`, relative to `1 + max|Φ|`.
    pub phi_shape: f64,
    /// Range of the measured factor `Φ δ_k = ρ g₀_k` over the points.
    pub phi_factor_min: f64,
    pub phi_factor_max: f64,
}

pub fn point_diagnostics(pa: &PointAnalysis) -> Diagnostics {
    let s = scale(pa);
    let djmax = pa.coords.dj.iter().fold(0.0f64, |w, v| w.max(v.abs()));
    let hfit = fit_proportional(&pa.phi.horizontal, &pa.g0);
    let vfit = fit_proportional(&pa.phi.vertical, &pa.g0);
    let shape = hfit.residual.max(vfit.residual) / (1.0 + pa.phi.max_abs());
    Diagnostics {
        f_swap: pa.f.swap_residual() / s,
        f_j_invariance: pa.f.j_invariance_residual(&pa.frame.j) / s,
        nijenhuis: pa.nijenhuis.max_abs() / (1.0 + djmax),
        phi_shape: shape,
        phi_factor_min: hfit.factor,
        phi_factor_max: hfit.factor,
    }
}

// ---- aggregation ----------------------------------------------------------

fn analyses(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<Vec<PointAnalysis>> {
    points
        .par_iter()
        .map(|p| analyze_point(fam, sf, p))
        .collect()
}

fn max_over(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
    f: fn(&PointAnalysis) -> f64,
) -> Result<f64> {
    let v = analyses(fam, sf, points)?;
    Ok(v.iter().map(f).fold(0.0, f64::max))
}

pub fn residual_ak(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_ak)
}

pub fn residual_w1(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w1)
}

pub fn residual_w2(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w2)
}

pub fn residual_w3(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w3)
}

pub fn residual_w1w2(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w1w2)
}

pub fn residual_w1w3(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w1w3)
}

pub fn residual_w2w3(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_w2w3)
}

pub fn residual_norden(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
) -> Result<f64> {
    max_over(fam, sf, points, point_norden)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassEntry {
    pub class: Class,
    pub symbol: &'static str,
    pub residual: f64,
    pub verdict: Verdict,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub classes: Vec<ClassEntry>,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub diagnostics: Diagnostics,
    pub summary: String,
}

impl ClassReport {
    pub fn entry(&self, class: Class) -> &ClassEntry {
        self.classes
            .iter()
            .find(|e| e.class == class)
            .expect("all classes present")
    }

    pub fn verdict(&self, class: Class) -> Verdict {
        self.entry(class).verdict
    }

    pub fn residual(&self, class: Class) -> f64 {
        self.entry(class).residual
    }

    /// Residuals keyed by class key.
    pub fn residual_map(&self) -> BTreeMap<&'static str, f64> {
        self.classes
            .iter()
            .map(|e| (e.class.key(), e.residual))
            .collect()
    }

    /// Pairs `(sub, sup)` with `sub ⊆ sup`, `sub` a member and `sup` rejected.
    pub fn lattice_violations(&self) -> Vec<(Class, Class)> {
        let mut out = Vec::new();
        for a in &self.classes {
            for b in &self.classes {
                if a.class != b.class
                    && a.class.is_subclass_of(b.class)
                    && a.verdict == Verdict::Member
                    && b.verdict == Verdict::Rejected
                {
                    out.push((a.class, b.class));
                }
            }
        }
        out
    }
}

fn summarize(entries: &[ClassEntry]) -> String {
    let verdict = |c: Class| entries.iter().find(|e| e.class == c).unwrap().verdict;
    if verdict(Class::W1W2W3) != Verdict::Member {
        return "not a Norden structure".into();
    }
    if verdict(Class::AntiKahler) == Verdict::Member {
        return "anti-Kähler".into();
    }
    let members: Vec<Class> = Class::ALL
        .into_iter()
        .filter(|&c| verdict(c) == Verdict::Member)
        .collect();
    let minimal: Vec<Class> = members
        .iter()
        .copied()
        .filter(|&c| !members.iter().any(|&d| d != c && d.is_subclass_of(c)))
        .collect();
    let all_sub_rejected = |c: Class| {
        Class::ALL
            .into_iter()
            .filter(|&d| d != c && d.is_subclass_of(c))
            .all(|d| verdict(d) == Verdict::Rejected)
    };
    match minimal.as_slice() {
        [Class::W1W2W3] if all_sub_rejected(Class::W1W2W3) => {
            "generic Norden (ω₁⊕ω₂⊕ω₃ only)".into()
        }
        [c] if all_sub_rejected(*c) => format!("strictly {}", c.symbol()),
        [c] => format!("{} (smaller classes inconclusive)", c.symbol()),
        many => {
            let names: Vec<&str> = many.iter().map(|c| c.symbol()).collect();
            format!("member of {}", names.join(" and "))
        }
    }
}

/// Evaluates all eight identities at `points` and assembles the verdicts.
///
/// Fails with [`Error::Inconsistent`] when a class is accepted while one of
/// its superclasses is definitely rejected.
pub fn classify(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    points: &[TangentPoint],
    tol: Tolerances,
) -> Result<ClassReport> {
    let per_point: Vec<([f64; 8], Diagnostics)> = points
        .par_iter()
        .map(|p| {
            let pa = analyze_point(fam, sf, p)?;
            let r = Class::ALL.map(|c| point_residual(c, &pa));
            Ok((r, point_diagnostics(&pa)))
        })
        .collect::<Result<_>>()?;

    let mut worst = [0.0f64; 8];
    let mut diag = Diagnostics {
        phi_factor_min: f64::INFINITY,
        phi_factor_max: f64::NEG_INFINITY,
        ..Default::default()
    };
    for (r, d) in &per_point {
        for (w, v) in worst.iter_mut().zip(r) {
            *w = if v.is_nan() { f64::NAN } else { w.max(*v) };
        }
        diag.f_swap = diag.f_swap.max(d.f_swap);
        diag.f_j_invariance = diag.f_j_invariance.max(d.f_j_invariance);
        diag.nijenhuis = diag.nijenhuis.max(d.nijenhuis);
        diag.phi_shape = diag.phi_shape.max(d.phi_shape);
        diag.phi_factor_min = diag.phi_factor_min.min(d.phi_factor_min);
        diag.phi_factor_max = diag.phi_factor_max.max(d.phi_factor_max);
    }
    if per_point.is_empty() {
        diag.phi_factor_min = 0.0;
        diag.phi_factor_max = 0.0;
    }

    let classes: Vec<ClassEntry> = Class::ALL
        .into_iter()
        .zip(worst)
        .map(|(class, residual)| ClassEntry {
            class,
            symbol: class.symbol(),
            residual,
            verdict: Verdict::from_residual(residual, tol.member, tol.reject),
            samples: points.len(),
        })
        .collect();
    let summary = summarize(&classes);
    let report = ClassReport {
        classes,
        tolerances: tol,
        samples: points.len(),
        diagnostics: diag,
        summary,
    };
    let bad = report.lattice_violations();
    if !bad.is_empty() {
        let list: Vec<String> = bad
            .iter()
            .map(|(a, b)| {
                format!(
                    "{} accepted ({:.3e}) but {} rejected ({:.3e})",
                    a,
                    report.residual(*a),
                    b,
                    report.residual(*b)
                )
            })
            .collect();
        return Err(Error::Inconsistent(list.join("; ")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::trivial_flat;
    use crate::sampling::{sample_points, SamplingConfig};

    #[test]
    fn inclusion_order() {
        assert!(Class::AntiKahler.is_subclass_of(Class::W2));
        assert!(Class::W1.is_subclass_of(Class::W1W3));
        assert!(!Class::W1.is_subclass_of(Class::W2W3));
        for c in Class::ALL {
            assert!(c.is_subclass_of(Class::W1W2W3));
            assert!(c.is_subclass_of(c));
        }
    }

    #[test]
    fn three_way_verdicts() {
        assert_eq!(Verdict::from_residual(1e-7, 1e-6, 1e-3), Verdict::Member);
        assert_eq!(
            Verdict::from_residual(1e-5, 1e-6, 1e-3),
            Verdict::Inconclusive
        );
        assert_eq!(Verdict::from_residual(1e-2, 1e-6, 1e-3), Verdict::Rejected);
        assert_eq!(
            Verdict::from_residual(f64::NAN, 1e-6, 1e-3),
            Verdict::Rejected
        );
    }

    #[test]
    fn trivial_family_is_anti_kahler() {
        let sf = SpaceForm::new(2, 0.0).unwrap();
        let fam = trivial_flat();
        let pts = sample_points(&sf, &fam.domain(), &SamplingConfig::default()).unwrap();
        let r = classify(&fam, &sf, &pts, Tolerances::for_family(&fam)).unwrap();
        for e in &r.classes {
            assert!(e.residual <= 1e-10, "{:?} {}", e.class, e.residual);
            assert_eq!(e.verdict, Verdict::Member);
        }
        assert_eq!(r.summary, "anti-Kähler");
    }

    #[test]
    fn summary_labels() {
        let mk = |v: [Verdict; 8]| -> Vec<ClassEntry> {
            Class::ALL
                .into_iter()
                .zip(v)
                .map(|(class, verdict)| ClassEntry {
                    class,
                    symbol: class.symbol(),
                    residual: 0.0,
                    verdict,
                    samples: 1,
                })
                .collect()
        };
        use Verdict::*;
        assert_eq!(
            summarize(&mk([
                Rejected, Member, Rejected, Rejected, Member, Member, Rejected, Member
            ])),
            "strictly ω₁"
        );
        assert_eq!(
            summarize(&mk([
                Rejected, Rejected, Rejected, Rejected, Rejected, Rejected, Rejected, Member
            ])),
            "generic Norden (ω₁⊕ω₂⊕ω₃ only)"
        );
    }
}
