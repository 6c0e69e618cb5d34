use nalgebra::DMatrix;

use crate::scalarfn::Real;
use crate::spaceform::BasePointData;

/// Change between the adapted frame `(δ_i, ∂_i)` and the coordinate frame
/// `(∂/∂x^i, ∂/∂y^i)`, where `δ_i = ∂/∂x^i - N^h_i ∂/∂y^h` and
/// `N^h_i = y^k Γ^h_ki`.
///
/// Adapted components `v_A` and coordinate components `v_C` of a vector are
/// related by `v_C = E v_A` with `E = [[I, 0], [-N, I]]`.
#[derive(Debug, Clone)]
pub struct FrameChange {
    n: usize,
    /// `N^h_i`, row `h`, column `i`.
    nl: Vec<f64>,
}

/// `N^h_i = y^k Γ^h_ki` as a row-major `n × n` array; `gamma` is indexed
/// `[h][k][i]`.
pub fn nonlinear_connection<R: Real>(n: usize, gamma: &[R], y: &[R]) -> Vec<R> {
    let mut nl = vec![R::zero(); n * n];
    for h in 0..n {
        for i in 0..n {
            let mut s = R::zero();
            for k in 0..n {
                s = s + y[k] * gamma[(h * n + k) * n + i];
            }
            nl[h * n + i] = s;
        }
    }
    nl
}

/// `E` (or `E⁻¹` when `inverse`) as a row-major `2n × 2n` array.
pub fn frame_matrix<R: Real>(n: usize, nl: &[R], inverse: bool) -> Vec<R> {
    let m = 2 * n;
    let mut e = vec![R::zero(); m * m];
    for a in 0..m {
        e[a * m + a] = R::one();
    }
    for h in 0..n {
        for i in 0..n {
            e[(n + h) * m + i] = if inverse {
                nl[h * n + i]
            } else {
                -nl[h * n + i]
            };
        }
    }
    e
}

/// Row-major product of two `m × m` arrays.
pub fn matmul<R: Real>(m: usize, a: &[R], b: &[R]) -> Vec<R> {
    let mut c = vec![R::zero(); m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            for j in 0..m {
                c[i * m + j] = c[i * m + j] + aik * b[k * m + j];
            }
        }
    }
    c
}

pub fn transpose<R: Real>(m: usize, a: &[R]) -> Vec<R> {
    let mut t = a.to_vec();
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = a[i * m + j];
        }
    }
    t
}

/// Coordinate components `E^{-T} G_A E^{-1}` of a bilinear form.
pub fn form_to_coordinates<R: Real>(n: usize, nl: &[R], ga: &[R]) -> Vec<R> {
    let m = 2 * n;
    let ei = frame_matrix(n, nl, true);
    matmul(m, &transpose(m, &ei), &matmul(m, ga, &ei))
}

/// Coordinate components `E J_A E^{-1}` of an endomorphism.
pub fn endomorphism_to_coordinates<R: Real>(n: usize, nl: &[R], ja: &[R]) -> Vec<R> {
    let m = 2 * n;
    matmul(
        m,
        &frame_matrix(n, nl, false),
        &matmul(m, ja, &frame_matrix(n, nl, true)),
    )
}

impl FrameChange {
    pub fn new(base: &BasePointData, y: &[f64]) -> Self {
        Self {
            n: base.n,
            nl: nonlinear_connection(base.n, &base.gamma, y),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `N^h_i`.
    pub fn nonlinear(&self, h: usize, i: usize) -> f64 {
        self.nl[h * self.n + i]
    }

    pub fn e(&self) -> DMatrix<f64> {
        let m = 2 * self.n;
        DMatrix::from_row_slice(m, m, &frame_matrix(self.n, &self.nl, false))
    }

    pub fn e_inv(&self) -> DMatrix<f64> {
        let m = 2 * self.n;
        DMatrix::from_row_slice(m, m, &frame_matrix(self.n, &self.nl, true))
    }

    pub fn vector_to_coordinates(&self, v: &[f64]) -> Vec<f64> {
        (self.e() * nalgebra::DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }

    pub fn vector_to_adapted(&self, v: &[f64]) -> Vec<f64> {
        (self.e_inv() * nalgebra::DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }

    pub fn form_to_coordinates(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let ei = self.e_inv();
        ei.transpose() * g * ei
    }

    pub fn form_to_adapted(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let e = self.e();
        e.transpose() * g * e
    }

    pub fn endomorphism_to_coordinates(&self, j: &DMatrix<f64>) -> DMatrix<f64> {
        self.e() * j * self.e_inv()
    }

    pub fn endomorphism_to_adapted(&self, j: &DMatrix<f64>) -> DMatrix<f64> {
        self.e_inv() * j * self.e()
    }

    /// Converts a covariant tensor of rank `k` (components in row-major
    /// order, each index running over `2n`) from coordinate to adapted
    /// components.
    pub fn covariant_to_adapted(&self, rank: usize, f: &[f64]) -> Vec<f64> {
        self.transform_covariant(rank, f, &self.e())
    }

    pub fn covariant_to_coordinates(&self, rank: usize, f: &[f64]) -> Vec<f64> {
        self.transform_covariant(rank, f, &self.e_inv())
    }

    fn transform_covariant(&self, rank: usize, f: &[f64], e: &DMatrix<f64>) -> Vec<f64> {
        let m = 2 * self.n;
        assert_eq!(
            f.len(),
            m.pow(rank as u32),
            "component count does not match rank"
        );
        // contract one slot at a time: out[.., a, ..] = Σ_p e[p][a] in[.., p, ..]
        let mut cur = f.to_vec();
        for slot in 0..rank {
            let stride = m.pow((rank - 1 - slot) as u32);
            let mut next = vec![0.0; cur.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let a = (idx / stride) % m;
                let base = idx - a * stride;
                let mut s = 0.0;
                for p in 0..m {
                    let w = e[(p, a)];
                    if w != 0.0 {
                        s += w * cur[base + p * stride];
                    }
                }
                *out = s;
            }
            cur = next;
        }
        cur
    }
}
