//! Minkowski index gymnastics in the `(+,-,-,-)` signature.
//!
//! Upper indices are the storage convention. `ε^{0123} = +1`, hence
//! `ε_{0123} = -1`.

use std::sync::OnceLock;

use crate::{Mat4, Vec4};

/// Diagonal of the Minkowski metric.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Independent index pairs `(i, j)`, `i < j`, of an antisymmetric tensor.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn eta() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(1.0, -1.0, -1.0, -1.0))
}

/// Lower (or raise, the metric is its own inverse) a vector index.
pub fn lower(v: &Vec4) -> Vec4 {
    Vec4::new(v[0], -v[1], -v[2], -v[3])
}

/// Minkowski inner product of two contravariant vectors.
/// Raise the index of a covector (same matrix as lowering).
pub fn raise(v: &Vec4) -> Vec4 {
    lower(v)
}

pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// Lower (or raise) both indices of a rank-2 tensor.
pub fn lower2(t: &Mat4) -> Mat4 {
    let mut out = *t;
    for a in 0..4 {
        for b in 0..4 {
            out[(a, b)] *= METRIC[a] * METRIC[b];
        }
    }
    out
}

/// Euclidean norm of the independent components of an antisymmetric tensor.
pub fn antisym_norm(t: &Mat4) -> f64 {
    PAIRS.iter().map(|&(i, j)| t[(i, j)].powi(2)).sum::<f64>().sqrt()
}

fn permutation_parity(p: [usize; 4]) -> i32 {
    let mut sign = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// The 24 non-vanishing entries of `ε^{abcd}` as `(indices, sign)`.
pub fn epsilon_terms() -> &'static [([usize; 4], f64)] {
    static TERMS: OnceLock<Vec<([usize; 4], f64)>> = OnceLock::new();
    TERMS.get_or_init(|| {
        let mut out = Vec::with_capacity(24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let s = permutation_parity([a, b, c, d]);
                        if s != 0 {
                            out.push(([a, b, c, d], s as f64));
                        }
                    }
                }
            }
        }
        out
    })
}

/// `ε^{abcd}` with all indices up.
pub fn eps_upper(a: usize, b: usize, c: usize, d: usize) -> f64 {
    permutation_parity([a, b, c, d]) as f64
}

/// `ε_{abcd}` with all indices down.
pub fn eps_lower(a: usize, b: usize, c: usize, d: usize) -> f64 {
    -eps_upper(a, b, c, d)
}

/// Rank-3 tensor `T^{ijμ}` stored with all indices up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rank3(pub [[[f64; 4]; 4]; 4]);

impl Rank3 {
    pub fn zeros() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, mu: usize) -> f64 {
        self.0[i][j][mu]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, mu: usize, value: f64) {
        self.0[i][j][mu] = value;
    }

    /// Lower (or raise) all three indices.
    pub fn lowered(&self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                for mu in 0..4 {
                    out.0[i][j][mu] *= METRIC[i] * METRIC[j] * METRIC[mu];
                }
            }
        }
        out
    }

    /// `T'^{ijμ} = Λ^i_a Λ^j_b Λ^μ_c T^{abc}`.
    pub fn transformed(&self, lambda: &Mat4) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                for mu in 0..4 {
                    let mut acc = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            let lab = lambda[(i, a)] * lambda[(j, b)];
                            if lab == 0.0 {
                                continue;
                            }
                            for c in 0..4 {
                                acc += lab * lambda[(mu, c)] * self.0[a][b][c];
                            }
                        }
                    }
                    out.0[i][j][mu] = acc;
                }
            }
        }
        out
    }

    /// Largest violation of antisymmetry in the first index pair.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for mu in 0..4 {
                    worst = worst.max((self.0[i][j][mu] + self.0[j][i][mu]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for mu in 0..4 {
                    worst = worst.max((self.0[i][j][mu] - other.0[i][j][mu]).abs());
                }
            }
        }
        worst
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}
