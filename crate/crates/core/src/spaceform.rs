//! Constant-curvature base manifolds in the conformal chart
//! `g_ij = δ_ij / φ(x)²`, `φ = 1 + (c/4)|x|²`.
//!
//! Metric, Christoffel symbols and their first derivatives are closed forms in
//! `σ = -ln φ`: `Γ^h_ij = δ^h_i σ_j + δ^h_j σ_i - δ_ij σ_h`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceFormError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("curvature must be finite")]
    Curvature,
    #[error("expected {expected} coordinates, got {found}")]
    Coordinates { expected: usize, found: usize },
    #[error("x = {x:?} is outside the chart (1 + c|x|²/4 = {factor})")]
    OutsideChart { x: Vec<f64>, factor: f64 },
}

/// Smallest conformal factor accepted inside the chart.
const CHART_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    n: usize,
    c: f64,
}

/// Base metric data at one chart point. Flat row-major storage:
/// `dg[k][i][j] = ∂_k g_ij`, `gamma[h][i][j] = Γ^h_ij`,
/// `dgamma[l][h][i][j] = ∂_l Γ^h_ij`.
#[derive(Debug, Clone)]
pub struct BasePointData {
    pub n: usize,
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub dg: Vec<f64>,
    pub gamma: Vec<f64>,
    pub dgamma: Vec<f64>,
}

impl BasePointData {
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn g_inv(&self, i: usize, j: usize) -> f64 {
        self.g_inv[i * self.n + j]
    }

    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dg[(k * self.n + i) * self.n + j]
    }

    pub fn gamma(&self, h: usize, i: usize, j: usize) -> f64 {
        self.gamma[(h * self.n + i) * self.n + j]
    }

    pub fn dgamma(&self, l: usize, h: usize, i: usize, j: usize) -> f64 {
        let n = self.n;
        self.dgamma[((l * n + h) * n + i) * n + j]
    }

    /// Max of `|∂_k g_ij - Γ^l_ki g_lj - Γ^l_kj g_il|`.
    pub fn metricity_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = self.dg(k, i, j);
                    for l in 0..n {
                        r -=
                            self.gamma(l, k, i) * self.g(l, j) + self.gamma(l, k, j) * self.g(i, l);
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// Curvature components `R^h_kij` stored as `r[h][k][i][j]`, with
/// `R(∂_i, ∂_j)∂_k = R^h_kij ∂_h`.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub n: usize,
    pub r: Vec<f64>,
}

impl Curvature {
    pub fn get(&self, h: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.n;
        self.r[((h * n + k) * n + i) * n + j]
    }

    /// Max deviation from `c(δ^h_i g_kj - δ^h_j g_ki)`.
    pub fn space_form_residual(&self, c: f64, base: &BasePointData) -> f64 {
        let n = self.n;
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut worst: f64 = 0.0;
        for h in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let exact = c * (delta(h, i) * base.g(k, j) - delta(h, j) * base.g(k, i));
                        worst = worst.max((self.get(h, k, i, j) - exact).abs());
                    }
                }
            }
        }
        worst
    }

    /// Max deviation from the first Bianchi identity `R^h_kij + R^h_ijk + R^h_jki = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for h in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let s = self.get(h, k, i, j) + self.get(h, i, j, k) + self.get(h, j, k, i);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

impl SpaceForm {
    pub fn new(n: usize, c: f64) -> Result<Self, SpaceFormError> {
        if n < 2 {
            return Err(SpaceFormError::Dimension(n));
        }
        if !c.is_finite() {
            return Err(SpaceFormError::Curvature);
        }
        Ok(Self { n, c })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn curvature_constant(&self) -> f64 {
        self.c
    }

    /// `1 + (c/4)|x|²`.
    pub fn conformal_factor(&self, x: &[f64]) -> f64 {
        1.0 + 0.25 * self.c * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn check(&self, x: &[f64]) -> Result<f64, SpaceFormError> {
        if x.len() != self.n {
            return Err(SpaceFormError::Coordinates {
                expected: self.n,
                found: x.len(),
            });
        }
        let phi = self.conformal_factor(x);
        if !(phi > CHART_MARGIN) || x.iter().any(|v| !v.is_finite()) {
            return Err(SpaceFormError::OutsideChart {
                x: x.to_vec(),
                factor: phi,
            });
        }
        Ok(phi)
    }

    pub fn in_chart(&self, x: &[f64]) -> bool {
        self.check(x).is_ok()
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<BasePointData, SpaceFormError> {
        let phi = self.check(x)?;
        let n = self.n;
        let c = self.c;
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

        let lambda2 = 1.0 / (phi * phi);
        // first and second derivatives of sigma = -ln(phi)
        let s1: Vec<f64> = x.iter().map(|xi| -0.5 * c * xi / phi).collect();
        let s2 = |i: usize, l: usize| {
            -0.5 * c * (delta(i, l) / phi - 0.5 * c * x[i] * x[l] / (phi * phi))
        };

        let mut g = vec![0.0; n * n];
        let mut g_inv = vec![0.0; n * n];
        for i in 0..n {
            g[i * n + i] = lambda2;
            g_inv[i * n + i] = phi * phi;
        }
        let mut dg = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                dg[(k * n + i) * n + i] = 2.0 * s1[k] * lambda2;
            }
        }
        let mut gamma = vec![0.0; n * n * n];
        for h in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma[(h * n + i) * n + j] =
                        delta(h, i) * s1[j] + delta(h, j) * s1[i] - delta(i, j) * s1[h];
                }
            }
        }
        let mut dgamma = vec![0.0; n * n * n * n];
        for l in 0..n {
            for h in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        dgamma[((l * n + h) * n + i) * n + j] = delta(h, i) * s2(j, l)
                            + delta(h, j) * s2(i, l)
                            - delta(i, j) * s2(h, l);
                    }
                }
            }
        }
        Ok(BasePointData {
            n,
            x: x.to_vec(),
            g,
            g_inv,
            dg,
            gamma,
            dgamma,
        })
    }

    /// `R^h_kij = ∂_i Γ^h_jk - ∂_j Γ^h_ik + Γ^h_il Γ^l_jk - Γ^h_jl Γ^l_ik`.
    pub fn curvature_at(&self, x: &[f64]) -> Result<Curvature, SpaceFormError> {
        let b = self.metric_at(x)?;
        Ok(curvature_from(&b))
    }

    /// `Ric_kj = R^h_khj`.
    pub fn ricci_at(&self, x: &[f64]) -> Result<Vec<f64>, SpaceFormError> {
        let r = self.curvature_at(x)?;
        let n = self.n;
        let mut ric = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                ric[k * n + j] = (0..n).map(|h| r.get(h, k, h, j)).sum();
            }
        }
        Ok(ric)
    }
}

pub fn curvature_from(b: &BasePointData) -> Curvature {
    let n = b.n;
    let mut r = vec![0.0; n * n * n * n];
    for h in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = b.dgamma(i, h, j, k) - b.dgamma(j, h, i, k);
                    for l in 0..n {
                        v += b.gamma(h, i, l) * b.gamma(l, j, k)
                            - b.gamma(h, j, l) * b.gamma(l, i, k);
                    }
                    r[((h * n + k) * n + i) * n + j] = v;
                }
            }
        }
    }
    Curvature { n, r }
}
