//! Levi-Civita connection of `G`, the tensor `F = G((∇J)·,·)`, the trace form
//! `Φ` and the Nijenhuis tensor of `J`.
//!
//! Coordinate components of `G` and `J` on `TM` (coordinates `(x, y)`) are
//! assembled with [`Grad`] numbers, which carry exact first derivatives in
//! all `2n` coordinates; the coefficient functions enter through the chain
//! rule `∂k(t) = k'(t) ∂t`. A central-difference assembly of the same
//! components is kept as an oracle.

mod grad;

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

pub use grad::{Grad, MAX_VARS};

use crate::error::{Error, Result};
use crate::lift::{
    adapted_tensors, endomorphism_to_coordinates, energy, form_to_coordinates, invert_metric,
    lowered, nonlinear_connection, AdaptedFrameData, CoefficientFamily, Coeffs, FrameChange,
    TangentPoint,
};
use crate::scalarfn::{Jet1, Real};
use crate::spaceform::{BasePointData, SpaceForm};

/// Step of the central-difference oracle.
pub const FD_STEP: f64 = 1e-5;

/// `defect / (1 + scale)`.
pub fn relative(defect: f64, scale: f64) -> f64 {
    defect / (1.0 + scale)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Coordinate components of `G` and `J` and their first coordinate
/// derivatives, `dg[c][a][b] = ∂_c G_ab`, `dj[c][a][b] = ∂_c J^a_b`.
#[derive(Debug, Clone)]
pub struct CoordinateTensors {
    pub n: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub j: Vec<f64>,
    pub dj: Vec<f64>,
}

impl CoordinateTensors {
    fn dim(&self) -> usize {
        2 * self.n
    }

    /// Largest deviation between two derivative sets, split as
    /// `(metric, endomorphism)`.
    pub fn derivative_deviation(&self, other: &CoordinateTensors) -> (f64, f64) {
        let dev = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        (dev(&self.dg, &other.dg), dev(&self.dj, &other.dj))
    }
}

struct Assembly<R> {
    gc: Vec<R>,
    jc: Vec<R>,
    ga: Vec<R>,
    ja: Vec<R>,
}

fn assemble<R: Real>(n: usize, g: &[R], gamma: &[R], y: &[R], k: &Coeffs<R>) -> Assembly<R> {
    let (ja, ga) = adapted_tensors(g, y, k);
    let nl = nonlinear_connection(n, gamma, y);
    Assembly {
        gc: form_to_coordinates(n, &nl, &ga),
        jc: endomorphism_to_coordinates(n, &nl, &ja),
        ga,
        ja,
    }
}

fn check_dim(n: usize) -> Result<()> {
    if 2 * n > MAX_VARS {
        return Err(Error::Dimension {
            n,
            max: MAX_VARS / 2,
        });
    }
    Ok(())
}

/// Seeds base data and fiber coordinates as [`Grad`] numbers.
fn seeded(base: &BasePointData, y: &[f64]) -> (Vec<Grad>, Vec<Grad>, Vec<Grad>) {
    let n = base.n;
    let g = (0..n * n)
        .map(|ij| {
            let grad: Vec<f64> = (0..n).map(|k| base.dg[k * n * n + ij]).collect();
            Grad::with_gradient(base.g[ij], &grad)
        })
        .collect();
    let gamma = (0..n * n * n)
        .map(|hij| {
            let grad: Vec<f64> = (0..n).map(|l| base.dgamma[l * n * n * n + hij]).collect();
            Grad::with_gradient(base.gamma[hij], &grad)
        })
        .collect();
    let yv = (0..n).map(|i| Grad::variable(y[i], n + i)).collect();
    (g, gamma, yv)
}

/// Everything computed at one tangent point.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub point: TangentPoint,
    pub frame: AdaptedFrameData,
    pub coords: CoordinateTensors,
    pub connection: ConnectionData,
    pub f: FTensor,
    pub phi: PhiForm,
    pub nijenhuis: Nijenhuis,
    /// `g_0i = y^h g_hi`.
    pub g0: Vec<f64>,
}

/// Coordinate components with analytic derivatives, from coefficient jets
/// evaluated at `p.t`.
pub fn coordinate_tensors_from_jets(
    sf: &SpaceForm,
    p: &TangentPoint,
    jets: &Coeffs<Jet1>,
) -> Result<(CoordinateTensors, Vec<f64>, Vec<f64>)> {
    let n = sf.dim();
    check_dim(n)?;
    let m = 2 * n;
    let base = sf.metric_at(&p.x)?;
    let (g, gamma, y) = seeded(&base, &p.y);
    let t = energy(&g, &y);
    let k = jets.map(|j| t.chain(j.value, j.deriv));
    let a = assemble(n, &g, &gamma, &y, &k);
    let split = |v: &[Grad]| -> (Vec<f64>, Vec<f64>) {
        let vals = v.iter().map(|x| x.v).collect();
        let mut d = vec![0.0; m * m * m];
        for c in 0..m {
            for ab in 0..m * m {
                d[c * m * m + ab] = v[ab].d[c];
            }
        }
        (vals, d)
    };
    let (gc, dg) = split(&a.gc);
    let (jc, dj) = split(&a.jc);
    let ga = a.ga.iter().map(|x| x.v).collect();
    let ja = a.ja.iter().map(|x| x.v).collect();
    Ok((
        CoordinateTensors {
            n,
            g: gc,
            dg,
            j: jc,
            dj,
        },
        ga,
        ja,
    ))
}

/// Coordinate components with central-difference derivatives of step `h`.
pub fn coordinate_tensors_fd(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
    h: f64,
) -> Result<CoordinateTensors> {
    let n = sf.dim();
    let m = 2 * n;
    let at = |z: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let base = sf.metric_at(&z[..n])?;
        let y = &z[n..];
        let k = fam.values(energy(&base.g, y))?;
        let a = assemble(n, &base.g, &base.gamma, y, &k);
        Ok((a.gc, a.jc))
    };
    let z0: Vec<f64> = p.x.iter().chain(&p.y).copied().collect();
    let (g, j) = at(&z0)?;
    let mut dg = vec![0.0; m * m * m];
    let mut dj = vec![0.0; m * m * m];
    for c in 0..m {
        let mut zp = z0.clone();
        let mut zm = z0.clone();
        zp[c] += h;
        zm[c] -= h;
        let (gp, jp) = at(&zp)?;
        let (gm, jm) = at(&zm)?;
        for ab in 0..m * m {
            dg[c * m * m + ab] = (gp[ab] - gm[ab]) / (2.0 * h);
            dj[c * m * m + ab] = (jp[ab] - jm[ab]) / (2.0 * h);
        }
    }
    Ok(CoordinateTensors { n, g, dg, j, dj })
}

/// Levi-Civita connection of `G` in the coordinates `(x, y)`.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// `∂_c G_ab` at `[c][a][b]`.
    pub dg: Vec<f64>,
    /// `Γ^a_bc` at `[a][b][c]`.
    pub christoffel: Vec<f64>,
}

impl ConnectionData {
    pub fn from_tensors(ct: &CoordinateTensors, t: f64) -> Result<Self> {
        let m = ct.dim();
        let g = DMatrix::from_row_slice(m, m, &ct.g);
        let h = invert_metric(&g, t)?;
        let dg = |c: usize, a: usize, b: usize| ct.dg[(c * m + a) * m + b];
        let mut gam = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for c in b..m {
                    let mut s = 0.0;
                    for d in 0..m {
                        s += h[(a, d)] * (dg(b, d, c) + dg(c, b, d) - dg(d, b, c));
                    }
                    gam[(a * m + b) * m + c] = 0.5 * s;
                    gam[(a * m + c) * m + b] = 0.5 * s;
                }
            }
        }
        Ok(Self {
            n: ct.n,
            g,
            h,
            dg: ct.dg.clone(),
            christoffel: gam,
        })
    }

    fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn christoffel(&self, a: usize, b: usize, c: usize) -> f64 {
        let m = self.dim();
        self.christoffel[(a * m + b) * m + c]
    }

    /// Max of `|∂_c G_ab - Γ^d_ca G_db - Γ^d_cb G_ad|`.
    pub fn metricity_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = self.dg[(c * m + a) * m + b];
                    for d in 0..m {
                        s -= self.christoffel(d, c, a) * self.g[(d, b)]
                            + self.christoffel(d, c, b) * self.g[(a, d)];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    /// `(∇_c J)^a_b` at `[c][a][b]`.
    pub fn covariant_derivative(&self, ct: &CoordinateTensors) -> Vec<f64> {
        let m = self.dim();
        let j = |a: usize, b: usize| ct.j[a * m + b];
        let mut out = vec![0.0; m * m * m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = ct.dj[(c * m + a) * m + b];
                    for d in 0..m {
                        s += self.christoffel(a, c, d) * j(d, b)
                            - self.christoffel(d, c, b) * j(a, d);
                    }
                    out[(c * m + a) * m + b] = s;
                }
            }
        }
        out
    }
}

/// Slot type in the component naming `FABC`: `X` horizontal, `Y` vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    X,
    Y,
}

/// `F(e_a, e_b, e_c)` in the adapted frame `(δ_1..δ_n, ∂_1..∂_n)`.
#[derive(Debug, Clone)]
pub struct FTensor {
    pub n: usize,
    pub components: Vec<f64>,
}

impl FTensor {
    fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let m = self.dim();
        self.components[(a * m + b) * m + c]
    }

    /// `FABC_ijk = F(A_i, B_j, C_k)`, e.g. `named([Y, X, X], i, j, k)` is
    /// `F(∂_i, δ_j, δ_k)`.
    pub fn named(&self, slots: [Slot; 3], i: usize, j: usize, k: usize) -> f64 {
        let idx = |s: Slot, i: usize| if s == Slot::X { i } else { self.n + i };
        self.get(idx(slots[0], i), idx(slots[1], j), idx(slots[2], k))
    }

    /// Parses a block name such as `"YXX"`.
    pub fn block(&self, name: &str, i: usize, j: usize, k: usize) -> Option<f64> {
        let mut slots = [Slot::X; 3];
        let chars: Vec<char> = name.trim_start_matches('F').chars().collect();
        if chars.len() != 3 {
            return None;
        }
        for (s, ch) in slots.iter_mut().zip(chars) {
            *s = match ch {
                'X' => Slot::X,
                'Y' => Slot::Y,
                _ => return None,
            };
        }
        Some(self.named(slots, i, j, k))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.components)
    }

    /// `max |F(X,Y,Z) - F(X,Z,Y)|`.
    pub fn swap_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    worst = worst.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        worst
    }

    /// `F(X, JY, JZ)` for basis arguments, with `J` in adapted components.
    pub fn with_j_applied(&self, j: &DMatrix<f64>) -> Vec<f64> {
        let m = self.dim();
        // contract the third slot first, then the second
        let mut half = vec![0.0; m * m * m];
        for a in 0..m {
            for q in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for r in 0..m {
                        s += j[(r, c)] * self.get(a, q, r);
                    }
                    half[(a * m + q) * m + c] = s;
                }
            }
        }
        let mut out = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for q in 0..m {
                        s += j[(q, b)] * half[(a * m + q) * m + c];
                    }
                    out[(a * m + b) * m + c] = s;
                }
            }
        }
        out
    }

    /// `max |F(X,Y,Z) - F(X,JY,JZ)|`.
    pub fn j_invariance_residual(&self, j: &DMatrix<f64>) -> f64 {
        let fj = self.with_j_applied(j);
        self.components
            .iter()
            .zip(&fj)
            .fold(0.0, |w, (a, b)| w.max((a - b).abs()))
    }
}

/// Linear least-squares fit `v ≈ factor · g0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionalFit {
    pub factor: f64,
    /// Max absolute deviation `|v - factor · g0|`.
    pub residual: f64,
}

pub fn fit_proportional(v: &[f64], g0: &[f64]) -> ProportionalFit {
    let norm2: f64 = g0.iter().map(|x| x * x).sum();
    let factor = if norm2 > 0.0 {
        v.iter().zip(g0).map(|(a, b)| a * b).sum::<f64>() / norm2
    } else {
        0.0
    };
    let residual = v
        .iter()
        .zip(g0)
        .fold(0.0f64, |w, (a, b)| w.max((a - factor * b).abs()));
    ProportionalFit { factor, residual }
}

/// `Φ(δ_k)` and `Φ(∂_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiForm {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
}

impl PhiForm {
    /// `Φ(X) = H1^ij F(δ_i,δ_j,X) + H3^ij F(δ_i,∂_j,X) + H3^ij F(∂_i,δ_j,X)
    /// + H2^ij F(∂_i,∂_j,X)`, with `H1`, `H2`, `H3` the horizontal,
    /// vertical and mixed blocks of `G⁻¹`.
    pub fn from_f(f: &FTensor, frame: &AdaptedFrameData) -> Self {
        let n = f.n;
        let (h1, h2, h3) = (frame.h1(), frame.h2(), frame.h3());
        let value = |z: usize| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += h1[(i, j)] * f.get(i, j, z)
                        + h3[(i, j)] * (f.get(i, n + j, z) + f.get(n + i, j, z))
                        + h2[(i, j)] * f.get(n + i, n + j, z);
                }
            }
            s
        };
        Self {
            horizontal: (0..n).map(value).collect(),
            vertical: (n..2 * n).map(value).collect(),
        }
    }

    /// Full trace `H^ab F(e_a, e_b, ·)`; equals [`PhiForm::from_f`] whenever
    /// the mixed block of `H` is symmetric.
    pub fn full_trace(f: &FTensor, h: &DMatrix<f64>) -> Vec<f64> {
        let m = 2 * f.n;
        (0..m)
            .map(|z| {
                let mut s = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        s += h[(a, b)] * f.get(a, b, z);
                    }
                }
                s
            })
            .collect()
    }

    /// Components over the whole adapted basis.
    pub fn components(&self) -> Vec<f64> {
        self.horizontal
            .iter()
            .chain(&self.vertical)
            .copied()
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.components())
    }

    /// `Φ(v)` for `v` in adapted components.
    pub fn apply(&self, v: &[f64]) -> f64 {
        self.components().iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// `N^a_bc` in coordinates, at `[a][b][c]`.
#[derive(Debug, Clone)]
pub struct Nijenhuis {
    pub n: usize,
    pub components: Vec<f64>,
}

impl Nijenhuis {
    /// `N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]` on coordinate fields.
    pub fn from_tensors(ct: &CoordinateTensors) -> Self {
        let m = ct.dim();
        let j = |a: usize, b: usize| ct.j[a * m + b];
        let dj = |c: usize, a: usize, b: usize| ct.dj[(c * m + a) * m + b];
        let mut out = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for d in 0..m {
                        s += j(d, b) * dj(d, a, c) - j(d, c) * dj(d, a, b) - j(a, d) * dj(b, d, c)
                            + j(a, d) * dj(c, d, b);
                    }
                    out[(a * m + b) * m + c] = s;
                }
            }
        }
        Self {
            n: ct.n,
            components: out,
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.components)
    }
}

fn finish(
    sf: &SpaceForm,
    p: &TangentPoint,
    ct: CoordinateTensors,
    ga: Vec<f64>,
    ja: Vec<f64>,
) -> Result<PointAnalysis> {
    let n = sf.dim();
    let m = 2 * n;
    let base = sf.metric_at(&p.x)?;
    let frame = AdaptedFrameData::from_parts(
        n,
        p.t,
        DMatrix::from_row_slice(m, m, &ja),
        DMatrix::from_row_slice(m, m, &ga),
    )?;
    let connection = ConnectionData::from_tensors(&ct, p.t)?;
    let nabla_j = connection.covariant_derivative(&ct);
    // F(∂_c, ∂_b, ∂_e) = G_ae (∇_c J)^a_b
    let mut fc = vec![0.0; m * m * m];
    for c in 0..m {
        for b in 0..m {
            for e in 0..m {
                let mut s = 0.0;
                for a in 0..m {
                    s += connection.g[(a, e)] * nabla_j[(c * m + a) * m + b];
                }
                fc[(c * m + b) * m + e] = s;
            }
        }
    }
    let change = FrameChange::new(&base, &p.y);
    let f = FTensor {
        n,
        components: change.covariant_to_adapted(3, &fc),
    };
    let phi = PhiForm::from_f(&f, &frame);
    let nijenhuis = Nijenhuis::from_tensors(&ct);
    Ok(PointAnalysis {
        point: p.clone(),
        g0: lowered(&base.g, &p.y),
        frame,
        coords: ct,
        connection,
        f,
        phi,
        nijenhuis,
    })
}

/// Full analysis at `p` from explicit coefficient jets at `p.t`.
pub fn analyze_with_jets(
    sf: &SpaceForm,
    p: &TangentPoint,
    jets: &Coeffs<Jet1>,
) -> Result<PointAnalysis> {
    let (ct, ga, ja) = coordinate_tensors_from_jets(sf, p, jets)?;
    finish(sf, p, ct, ga, ja)
}

pub fn analyze_point(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
) -> Result<PointAnalysis> {
    analyze_with_jets(sf, p, &fam.jets(p.t)?)
}

/// Same downstream computation with central-difference derivatives.
pub fn analyze_point_fd(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
    h: f64,
) -> Result<PointAnalysis> {
    let ct = coordinate_tensors_fd(fam, sf, p, h)?;
    let base = sf.metric_at(&p.x)?;
    let (ja, ga) = adapted_tensors(&base.g, &p.y, &fam.values(p.t)?);
    finish(sf, p, ct, ga, ja)
}

pub fn christoffels_of_g(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
) -> Result<ConnectionData> {
    let (ct, _, _) = coordinate_tensors_from_jets(sf, p, &fam.jets(p.t)?)?;
    ConnectionData::from_tensors(&ct, p.t)
}

pub fn f_tensor_at(fam: &CoefficientFamily, sf: &SpaceForm, p: &TangentPoint) -> Result<FTensor> {
    Ok(analyze_point(fam, sf, p)?.f)
}

pub fn phi_at(fam: &CoefficientFamily, sf: &SpaceForm, p: &TangentPoint) -> Result<PhiForm> {
    Ok(analyze_point(fam, sf, p)?.phi)
}

pub fn nijenhuis_at(
    fam: &CoefficientFamily,
    sf: &SpaceForm,
    p: &TangentPoint,
) -> Result<Nijenhuis> {
    Ok(analyze_point(fam, sf, p)?.nijenhuis)
}

/// Writes adapted components of `F` as CSV rows
/// `point, t, block, i, j, k, value` (indices from 1).
pub fn write_f_csv<W: Write>(out: W, items: &[(usize, &PointAnalysis)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["point", "t", "block", "i", "j", "k", "value"])
        .map_err(io)?;
    for (idx, pa) in items {
        let n = pa.f.n;
        let m = 2 * n;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let name: String = [a, b, c]
                        .iter()
                        .map(|&s| if s < n { 'X' } else { 'Y' })
                        .collect();
                    w.write_record([
                        idx.to_string(),
                        format!("{:.17e}", pa.point.t),
                        format!("F{name}"),
                        (a % n + 1).to_string(),
                        (b % n + 1).to_string(),
                        (c % n + 1).to_string(),
                        format!("{:.17e}", pa.f.get(a, b, c)),
                    ])
                    .map_err(io)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
