//! Clifford algebra of Minkowski space in a chiral representation, and the
//! double cover relating real Lorentz transformations to spinor matrices.

use std::sync::OnceLock;

use nalgebra::SMatrix;

use crate::tensor::{self, epsilon_terms, METRIC};
use crate::{Mat4, Mat4c, Vec4, C64};

const BUILD_TOL: f64 = 1e-14;

/// The sixteen-element basis `(𝕀, γᵃ, σᵃᵇ, γᵃπ, π)`.
#[derive(Debug, Clone)]
pub struct CliffordBasis {
    gamma: [Mat4c; 4],
    gamma_lower: [Mat4c; 4],
    sigma: [[Mat4c; 4]; 4],
    sigma_lower: [[Mat4c; 4]; 4],
    pi: Mat4c,
}

/// Worst absolute deviation of each defining relation of the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisResiduals {
    pub anticommutator: f64,
    pub sigma_commutator: f64,
    pub duality: f64,
    pub triple_product: f64,
    /// Rank of the 16×16 Gram matrix `tr(A†B)`.
    pub gram_rank: usize,
}

impl BasisResiduals {
    pub fn max_residual(&self) -> f64 {
        self.anticommutator
            .max(self.sigma_commutator)
            .max(self.duality)
            .max(self.triple_product)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(m: &Mat4c) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl CliffordBasis {
    /// Shared basis instance.
    pub fn get() -> &'static CliffordBasis {
        static BASIS: OnceLock<CliffordBasis> = OnceLock::new();
        BASIS.get_or_init(CliffordBasis::build)
    }

    /// Build the chiral basis and check every defining relation.
    ///
    /// `γ⁰` swaps the chiral blocks and `γᵏ` carries `±σ̄ₖ` off-diagonal, with
    /// the sign of `σ_y` chosen so that the rest template `(1,0,1,0)` has its
    /// spin along `+e₃`. The phase of `π ∝ γ⁰γ¹γ²γ³` is fixed by the duality
    /// `2iσ_ab = ε_abcd π σᶜᵈ`.
    pub fn build() -> Self {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        // Pauli blocks, σ_y sign flipped.
        let paulis: [[[C64; 2]; 2]; 3] = [
            [[z, one], [one, z]],
            [[z, i], [-i, z]],
            [[one, z], [z, -one]],
        ];
        let mut gamma = [Mat4c::zeros(); 4];
        for k in 0..2 {
            gamma[0][(k, k + 2)] = one;
            gamma[0][(k + 2, k)] = one;
        }
        for (n, p) in paulis.iter().enumerate() {
            let g = &mut gamma[n + 1];
            for r in 0..2 {
                for col in 0..2 {
                    g[(r, col + 2)] = p[r][col];
                    g[(r + 2, col)] = -p[r][col];
                }
            }
        }
        let gamma_lower = [gamma[0], -gamma[1], -gamma[2], -gamma[3]];
        let mut sigma = [[Mat4c::zeros(); 4]; 4];
        let mut sigma_lower = [[Mat4c::zeros(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                sigma[a][b] = (gamma[a] * gamma[b] - gamma[b] * gamma[a]) * c(0.25, 0.0);
                sigma_lower[a][b] = sigma[a][b] * c(METRIC[a] * METRIC[b], 0.0);
            }
        }
        let product = gamma[0] * gamma[1] * gamma[2] * gamma[3];
        let mut basis = CliffordBasis {
            gamma,
            gamma_lower,
            sigma,
            sigma_lower,
            pi: product * i,
        };
        if basis.duality_residual(1.0) > BUILD_TOL {
            basis.pi = -basis.pi;
        }
        let res = basis.residuals(1.0);
        assert!(
            res.max_residual() <= BUILD_TOL && res.gram_rank == 16,
            "Clifford basis convention bug: {res:?}"
        );
        basis
    }

    /// `γᵃ` (upper index).
    #[inline]
    pub fn gamma(&self, a: usize) -> &Mat4c {
        &self.gamma[a]
    }

    /// `γ_a` (lower index).
    #[inline]
    pub fn gamma_lower(&self, a: usize) -> &Mat4c {
        &self.gamma_lower[a]
    }

    /// `σᵃᵇ = ¼[γᵃ, γᵇ]`.
    #[inline]
    pub fn sigma(&self, a: usize, b: usize) -> &Mat4c {
        &self.sigma[a][b]
    }

    #[inline]
    pub fn sigma_lower(&self, a: usize, b: usize) -> &Mat4c {
        &self.sigma_lower[a][b]
    }

    #[inline]
    pub fn pi(&self) -> &Mat4c {
        &self.pi
    }

    /// `(𝕀, γᵃ, σᵃᵇ (a<b), γᵃπ, π)`.
    pub fn elements(&self) -> Vec<Mat4c> {
        let mut out = vec![Mat4c::identity()];
        out.extend(self.gamma.iter().copied());
        out.extend(tensor::PAIRS.iter().map(|&(a, b)| self.sigma[a][b]));
        out.extend(self.gamma.iter().map(|g| g * self.pi));
        out.push(self.pi);
        out
    }

    /// Worst deviation of `2iσ_ab = ε_abcd π σᶜᵈ`, with `eps_sign` scaling the
    /// Levi-Civita convention (`+1` is the library convention).
    pub fn duality_residual(&self, eps_sign: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut rhs = Mat4c::zeros();
                for &(idx, s) in epsilon_terms() {
                    if idx[0] == a && idx[1] == b {
                        // ε_abcd = -ε^abcd
                        let e = -s * eps_sign;
                        rhs += self.pi * self.sigma[idx[2]][idx[3]] * c(e, 0.0);
                    }
                }
                let lhs = self.sigma_lower[a][b] * c(0.0, 2.0);
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        worst
    }

    /// Worst deviation of `γᵢγⱼγₖ = γᵢη_jk − γⱼη_ik + γₖη_ij + iε_ijkq πγᑫ`.
    pub fn triple_product_residual(&self, eps_sign: f64) -> f64 {
        let eta = |a: usize, b: usize| if a == b { METRIC[a] } else { 0.0 };
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let lhs = self.gamma_lower[i] * self.gamma_lower[j] * self.gamma_lower[k];
                    let mut rhs = self.gamma_lower[i] * c(eta(j, k), 0.0)
                        - self.gamma_lower[j] * c(eta(i, k), 0.0)
                        + self.gamma_lower[k] * c(eta(i, j), 0.0);
                    for q in 0..4 {
                        let e = eps_sign * tensor::eps_lower(i, j, k, q);
                        if e != 0.0 {
                            rhs += self.pi * self.gamma[q] * c(0.0, e);
                        }
                    }
                    worst = worst.max(max_abs(&(lhs - rhs)));
                }
            }
        }
        worst
    }

    pub fn anticommutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let ac = self.gamma_lower[a] * self.gamma_lower[b]
                    + self.gamma_lower[b] * self.gamma_lower[a];
                let target = if a == b { 2.0 * METRIC[a] } else { 0.0 };
                worst = worst.max(max_abs(&(ac - Mat4c::identity() * c(target, 0.0))));
            }
        }
        worst
    }

    fn sigma_commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let comm = (self.gamma_lower[a] * self.gamma_lower[b]
                    - self.gamma_lower[b] * self.gamma_lower[a])
                    * c(0.25, 0.0);
                worst = worst.max(max_abs(&(comm - self.sigma_lower[a][b])));
            }
        }
        worst
    }

    /// Rank of the Gram matrix `⟨A,B⟩ = tr(A†B)` over the sixteen elements.
    pub fn gram_rank(&self) -> usize {
        let els = self.elements();
        let gram = SMatrix::<C64, 16, 16>::from_fn(|r, col| (els[r].adjoint() * els[col]).trace());
        gram.svd(false, false)
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10)
            .count()
    }

    pub fn residuals(&self, eps_sign: f64) -> BasisResiduals {
        BasisResiduals {
            anticommutator: self.anticommutator_residual(),
            sigma_commutator: self.sigma_commutator_residual(),
            duality: self.duality_residual(eps_sign),
            triple_product: self.triple_product_residual(eps_sign),
            gram_rank: self.gram_rank(),
        }
    }
}

/// `ε^{abcd}` with `ε^{0123} = +1`.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> i32 {
    tensor::eps_upper(a, b, c, d) as i32
}

/// A real Lorentz transformation paired with its spinorial lift and a phase.
///
/// The full spinor transformation is `spin · e^{i charge_phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzPair {
    pub vector: Mat4,
    pub spin: Mat4c,
    pub charge_phase: f64,
}

impl LorentzPair {
    pub fn identity() -> Self {
        Self {
            vector: Mat4::identity(),
            spin: Mat4c::identity(),
            charge_phase: 0.0,
        }
    }

    /// Apply `other` first, then `self`.
    pub fn compose(&self, other: &LorentzPair) -> LorentzPair {
        LorentzPair {
            vector: self.vector * other.vector,
            spin: self.spin * other.spin,
            charge_phase: self.charge_phase + other.charge_phase,
        }
    }

    /// `spin · e^{i charge_phase}`.
    pub fn spinorial(&self) -> Mat4c {
        self.spin * C64::from_polar(1.0, self.charge_phase)
    }

    pub fn inverse(&self) -> LorentzPair {
        let eta = tensor::eta();
        // Λ⁻¹ = η Λᵀ η for Lorentz matrices.
        let vector = eta * self.vector.transpose() * eta;
        let spin = self
            .spin
            .try_inverse()
            .expect("spinorial lift is always invertible");
        LorentzPair {
            vector,
            spin,
            charge_phase: -self.charge_phase,
        }
    }

    /// Worst entry of `ΛᵀηΛ − η`.
    pub fn metric_residual(&self) -> f64 {
        let eta = tensor::eta();
        (self.vector.transpose() * eta * self.vector - eta).amax()
    }

    /// Worst entry of `spin γᵇ spin⁻¹ Λᵃ_b − γᵃ` over `a`.
    pub fn compatibility_residual(&self) -> f64 {
        let basis = CliffordBasis::get();
        let Some(inv) = self.spin.try_inverse() else {
            return f64::INFINITY;
        };
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            let mut acc = Mat4c::zeros();
            for b in 0..4 {
                acc += self.spin * basis.gamma(b) * inv * c(self.vector[(a, b)], 0.0);
            }
            worst = worst.max(max_abs(&(acc - basis.gamma(a))));
        }
        worst
    }

    pub fn apply_vector(&self, v: &Vec4) -> Vec4 {
        self.vector * v
    }
}

/// Pure boost with rapidity vector `ζ`: `e₀ ↦ (cosh|ζ|, sinh|ζ| ζ̂)`.
pub fn boost_lift(rapidity: [f64; 3]) -> LorentzPair {
    let w = (rapidity[0].powi(2) + rapidity[1].powi(2) + rapidity[2].powi(2)).sqrt();
    if w == 0.0 {
        return LorentzPair::identity();
    }
    let n = [rapidity[0] / w, rapidity[1] / w, rapidity[2] / w];
    let mut k = Mat4::zeros();
    for a in 0..3 {
        k[(0, a + 1)] = n[a];
        k[(a + 1, 0)] = n[a];
    }
    // K̂³ = K̂, so exp(wK̂) = 𝕀 + sinh w K̂ + (cosh w − 1) K̂².
    let vector = Mat4::identity() + k * w.sinh() + k * k * (w.cosh() - 1.0);
    let basis = CliffordBasis::get();
    let mut gen = Mat4c::zeros();
    for a in 0..3 {
        gen += basis.sigma(0, a + 1) * c(n[a], 0.0);
    }
    // (n·σ⁰ᵏ)² = ¼𝕀.
    let spin = Mat4c::identity() * c((w / 2.0).cosh(), 0.0) + gen * c(2.0 * (w / 2.0).sinh(), 0.0);
    LorentzPair {
        vector,
        spin,
        charge_phase: 0.0,
    }
}

/// Proper rotation by `|θ|` about `θ̂`, right-handed.
pub fn rotation_lift(axis_angle: [f64; 3]) -> LorentzPair {
    let th = (axis_angle[0].powi(2) + axis_angle[1].powi(2) + axis_angle[2].powi(2)).sqrt();
    if th == 0.0 {
        return LorentzPair::identity();
    }
    let n = [axis_angle[0] / th, axis_angle[1] / th, axis_angle[2] / th];
    let mut j = Mat4::zeros();
    // generator of rotations about n: v ↦ n × v on the spatial block
    j[(1, 2)] = -n[2];
    j[(2, 1)] = n[2];
    j[(2, 3)] = -n[0];
    j[(3, 2)] = n[0];
    j[(3, 1)] = -n[1];
    j[(1, 3)] = n[1];
    let vector = Mat4::identity() + j * th.sin() + j * j * (1.0 - th.cos());
    let basis = CliffordBasis::get();
    let gen = basis.sigma(2, 3) * c(n[0], 0.0)
        + basis.sigma(3, 1) * c(n[1], 0.0)
        + basis.sigma(1, 2) * c(n[2], 0.0);
    // (n·σ)² = −¼𝕀.
    let spin = Mat4c::identity() * c((th / 2.0).cos(), 0.0) + gen * c(2.0 * (th / 2.0).sin(), 0.0);
    LorentzPair {
        vector,
        spin,
        charge_phase: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> &'static CliffordBasis {
        CliffordBasis::get()
    }

    #[test]
    fn gamma0_squares_to_identity() {
        let g0 = basis().gamma(0);
        assert!(max_abs(&(g0 * g0 - Mat4c::identity())) == 0.0);
    }

    #[test]
    fn gamma0_gamma1_gamma0_is_minus_gamma1() {
        let b = basis();
        let lhs = b.gamma(0) * b.gamma(1) * b.gamma(0);
        assert!(max_abs(&(lhs + b.gamma(1))) == 0.0);
    }

    #[test]
    fn trace_of_gamma_products_is_four_eta() {
        let b = basis();
        for a in 0..4 {
            for bb in 0..4 {
                let tr = (b.gamma(a) * b.gamma(bb)).trace();
                let expect = if a == bb { 4.0 * METRIC[a] } else { 0.0 };
                assert!((tr - c(expect, 0.0)).norm() < 1e-15, "a={a} b={bb}");
            }
        }
    }

    #[test]
    fn entries_are_units_or_zero() {
        for g in &basis().gamma {
            for z in g.iter() {
                let ok = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]
                    .contains(z);
                assert!(ok, "unexpected entry {z}");
            }
        }
    }

    #[test]
    fn all_basis_relations_hold() {
        let r = basis().residuals(1.0);
        assert!(r.max_residual() <= 1e-14, "{r:?}");
        assert_eq!(r.gram_rank, 16);
    }

    #[test]
    fn flipped_epsilon_breaks_duality() {
        let r = basis().residuals(-1.0);
        assert!(r.duality > 0.5);
        assert!(r.triple_product > 0.5);
    }

    #[test]
    fn pi_squares_to_identity_and_anticommutes() {
        let b = basis();
        assert!(max_abs(&(b.pi() * b.pi() - Mat4c::identity())) < 1e-15);
        for a in 0..4 {
            assert!(max_abs(&(b.pi() * b.gamma(a) + b.gamma(a) * b.pi())) < 1e-15);
        }
    }

    #[test]
    fn levi_civita_examples() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1);
        assert_eq!(levi_civita(1, 0, 2, 3), -1);
        assert_eq!(levi_civita(0, 1, 2, 2), 0);
    }

    #[test]
    fn zero_lifts_are_identity() {
        assert_eq!(boost_lift([0.0; 3]), LorentzPair::identity());
        assert_eq!(rotation_lift([0.0; 3]), LorentzPair::identity());
    }

    #[test]
    fn z_boost_acts_on_time_axis() {
        let w = 0.8;
        let pair = boost_lift([0.0, 0.0, w]);
        let v = pair.apply_vector(&Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert!((v - Vec4::new(w.cosh(), 0.0, 0.0, w.sinh())).amax() < 1e-15);
    }

    #[test]
    fn half_turn_about_z_flips_x() {
        let pair = rotation_lift([0.0, 0.0, std::f64::consts::PI]);
        let v = pair.apply_vector(&Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert!((v - Vec4::new(0.0, -1.0, 0.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn lifts_satisfy_compatibility() {
        let pairs = [
            boost_lift([0.3, -0.5, 0.7]),
            rotation_lift([1.1, 0.2, -0.4]),
            boost_lift([2.0, 0.1, 0.0]).compose(&rotation_lift([0.0, 3.0, 1.0])),
        ];
        for p in pairs {
            assert!(p.metric_residual() < 1e-12);
            assert!(p.compatibility_residual() < 1e-12);
            let inv = p.inverse();
            assert!((p.compose(&inv).vector - Mat4::identity()).amax() < 1e-12);
        }
    }
}
