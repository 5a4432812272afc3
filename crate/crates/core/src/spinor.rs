//! Bilinear covariants and the polar decomposition of single Dirac spinors.

use std::f64::consts::PI;

use nalgebra::{RowVector4, Vector4};

use crate::clifford::{boost_lift, rotation_lift, CliffordBasis, LorentzPair};
use crate::error::{Error, Result};
use crate::tensor::{self, epsilon_terms, lower, lower2};
use crate::{Mat4, Mat4c, Vec4, C64};

/// Below this value of `Φ²+Θ²` the polar form is undefined.
pub const SINGULAR_THRESHOLD: f64 = 1e-20;

/// Tolerance on `u·u = 1`, `s·s = −1`, `u·s = 0` for frame construction.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// A Dirac spinor as a complex column of four components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor(pub Vector4<C64>);

impl Spinor {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Spinor(Vector4::new(a, b, c, d))
    }

    pub fn from_real(v: [f64; 4]) -> Self {
        Spinor(Vector4::new(
            C64::new(v[0], 0.0),
            C64::new(v[1], 0.0),
            C64::new(v[2], 0.0),
            C64::new(v[3], 0.0),
        ))
    }

    /// Rest-frame spin eigenstate `(1,0,1,0)ᵀ`.
    pub fn template() -> Self {
        Self::from_real([1.0, 0.0, 1.0, 0.0])
    }

    pub fn zeros() -> Self {
        Spinor(Vector4::zeros())
    }

    /// `ψ̄ = ψ†γ⁰`.
    pub fn adjoint(&self) -> RowVector4<C64> {
        self.0.adjoint() * CliffordBasis::get().gamma(0)
    }

    /// `ψ̄ Γ ψ`.
    pub fn sandwich(&self, gamma: &Mat4c) -> C64 {
        (self.adjoint() * gamma * self.0)[(0, 0)]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transformed(&self, m: &Mat4c) -> Spinor {
        Spinor(m * self.0)
    }

    pub fn scale(&self, k: C64) -> Spinor {
        Spinor(self.0 * k)
    }
}

impl std::ops::Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor(self.0 - rhs.0)
    }
}

/// The real bilinear covariants of a spinor, upper indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinears {
    /// `Θ = iψ̄πψ`
    pub theta: f64,
    /// `Φ = ψ̄ψ`
    pub phi: f64,
    /// `Uᵃ = ψ̄γᵃψ`
    pub u: Vec4,
    /// `Sᵃ = ψ̄γᵃπψ`
    pub s: Vec4,
    /// `Mᵃᵇ = 2iψ̄σᵃᵇψ`
    pub m: Mat4,
    /// `Σᵃᵇ = 2ψ̄σᵃᵇπψ`
    pub sigma: Mat4,
    /// Largest imaginary part discarded while forming the above.
    pub max_imaginary: f64,
}

/// Residuals of the algebraic relations among bilinears, relative to `Φ²+Θ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FierzResiduals {
    pub hodge: f64,
    pub norm_u: f64,
    pub norm_s: f64,
    pub orthogonal: f64,
    pub m_reconstruction: f64,
}

impl FierzResiduals {
    pub fn max(&self) -> f64 {
        self.hodge
            .max(self.norm_u)
            .max(self.norm_s)
            .max(self.orthogonal)
            .max(self.m_reconstruction)
    }
}

pub fn bilinears(psi: &Spinor) -> Bilinears {
    let b = CliffordBasis::get();
    let bar = psi.adjoint();
    let sw = |m: &Mat4c| (bar * m * psi.0)[(0, 0)];
    let mut max_im: f64 = 0.0;
    let mut take = |z: C64| {
        max_im = max_im.max(z.im.abs());
        z.re
    };
    let theta = take(sw(b.pi()) * C64::i());
    let phi = take(sw(&Mat4c::identity()));
    let mut u = Vec4::zeros();
    let mut s = Vec4::zeros();
    for a in 0..4 {
        u[a] = take(sw(b.gamma(a)));
        s[a] = take(sw(&(b.gamma(a) * b.pi())));
    }
    let mut m = Mat4::zeros();
    let mut sigma = Mat4::zeros();
    for &(i, j) in &tensor::PAIRS {
        let mij = take(sw(b.sigma(i, j)) * C64::new(0.0, 2.0));
        let sij = take(sw(&(b.sigma(i, j) * b.pi())) * 2.0);
        m[(i, j)] = mij;
        m[(j, i)] = -mij;
        sigma[(i, j)] = sij;
        sigma[(j, i)] = -sij;
    }
    Bilinears {
        theta,
        phi,
        u,
        s,
        m,
        sigma,
        max_imaginary: max_im,
    }
}

impl Bilinears {
    /// `Φ² + Θ²`.
    pub fn scalar_norm(&self) -> f64 {
        self.phi * self.phi + self.theta * self.theta
    }

    pub fn fierz_residuals(&self) -> FierzResiduals {
        let n2 = self.scalar_norm();
        let scale = n2.max(f64::MIN_POSITIVE);
        let m_low = lower2(&self.m);
        let u_low = lower(&self.u);
        let s_low = lower(&self.s);

        // Σ^{ij} = −½ ε^{abij} M_ab
        let mut hodge: f64 = 0.0;
        let mut dual = Mat4::zeros();
        for &(idx, e) in epsilon_terms() {
            dual[(idx[2], idx[3])] += -0.5 * e * m_low[(idx[0], idx[1])];
        }
        for i in 0..4 {
            for j in 0..4 {
                hodge = hodge.max((dual[(i, j)] - self.sigma[(i, j)]).abs());
            }
        }

        // M_ab(Φ²+Θ²) = Φ Uʲ Sᵏ ε_jkab + Θ U_[a S_b]
        let mut rebuilt = Mat4::zeros();
        for &(idx, e) in epsilon_terms() {
            let e_low = -e;
            rebuilt[(idx[2], idx[3])] += self.phi * self.u[idx[0]] * self.s[idx[1]] * e_low;
        }
        let mut recon: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let wedge = u_low[a] * s_low[b] - u_low[b] * s_low[a];
                let rhs = rebuilt[(a, b)] + self.theta * wedge;
                recon = recon.max((m_low[(a, b)] * n2 - rhs).abs());
            }
        }

        FierzResiduals {
            hodge: hodge / scale.sqrt(),
            norm_u: (tensor::dot(&self.u, &self.u) - n2).abs() / scale,
            norm_s: (tensor::dot(&self.s, &self.s) + n2).abs() / scale,
            orthogonal: tensor::dot(&self.u, &self.s).abs() / scale,
            m_reconstruction: recon / (scale * scale.sqrt()),
        }
    }
}

/// Polar variables `(φ, β, u, s, L)` of a non-singular spinor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarData {
    pub phi: f64,
    pub beta: f64,
    pub u: Vec4,
    pub s: Vec4,
    /// Maps the spinor to its rest frame with spin along `+e₃`.
    pub frame: LorentzPair,
}

fn check_frame_constraints(u: &Vec4, s: &Vec4) -> Result<()> {
    let uu = tensor::dot(u, u) - 1.0;
    let ss = tensor::dot(s, s) + 1.0;
    let us = tensor::dot(u, s);
    if uu.abs() > CONSTRAINT_TOL || ss.abs() > CONSTRAINT_TOL || us.abs() > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation(format!(
            "u·u−1 = {uu:e}, s·s+1 = {ss:e}, u·s = {us:e}"
        )));
    }
    if u[0] <= 0.0 {
        return Err(Error::ConstraintViolation(
            "velocity is not future-pointing".into(),
        ));
    }
    Ok(())
}

/// Boost along `u` followed by the rotation taking the boosted spin to `+e₃`.
pub fn rest_frame_map(u: &Vec4, s: &Vec4) -> Result<LorentzPair> {
    check_frame_constraints(u, s)?;
    let speed = (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]).sqrt();
    let boost = if speed > 0.0 {
        // rapidity magnitude asinh|u⃗|, pointing against u⃗
        let w = speed.asinh() / speed;
        boost_lift([-w * u[1], -w * u[2], -w * u[3]])
    } else {
        LorentzPair::identity()
    };
    let sb = boost.vector * s;
    let ns = (sb[1] * sb[1] + sb[2] * sb[2] + sb[3] * sb[3]).sqrt();
    let n = [sb[1] / ns, sb[2] / ns, sb[3] / ns];
    // axis = n × e₃
    let axis = [n[1], -n[0], 0.0];
    let sin = (axis[0] * axis[0] + axis[1] * axis[1]).sqrt();
    let rotation = if sin > 1e-15 {
        let angle = sin.atan2(n[2]);
        rotation_lift([angle * axis[0] / sin, angle * axis[1] / sin, 0.0])
    } else if n[2] > 0.0 {
        LorentzPair::identity()
    } else {
        rotation_lift([PI, 0.0, 0.0])
    };
    Ok(rotation.compose(&boost))
}

/// `e^{−iβπ/2} = cos(β/2)𝕀 − i sin(β/2)π` (π² = 𝕀).
pub fn chiral_rotation(beta: f64) -> Mat4c {
    let pi = CliffordBasis::get().pi();
    Mat4c::identity() * C64::new((beta / 2.0).cos(), 0.0) - pi * C64::new(0.0, (beta / 2.0).sin())
}

pub fn polar_decompose(psi: &Spinor) -> Result<PolarData> {
    polar_decompose_with(psi, SINGULAR_THRESHOLD)
}

pub fn polar_decompose_with(psi: &Spinor, singular_threshold: f64) -> Result<PolarData> {
    let bil = bilinears(psi);
    let n2 = bil.scalar_norm();
    if !(n2 >= singular_threshold) {
        return Err(Error::SingularSpinor { norm: n2 });
    }
    let two_phi2 = n2.sqrt();
    let phi = (two_phi2 / 2.0).sqrt();
    let beta = bil.theta.atan2(bil.phi);
    let u = bil.u / two_phi2;
    let s = bil.s / two_phi2;
    let mut frame = rest_frame_map(&u, &s)?;
    // The rest-frame spinor equals target up to a phase; fold it into L.
    let chi = frame.spin * psi.0;
    let target = chiral_rotation(beta) * Spinor::template().0 * C64::new(phi, 0.0);
    let overlap = chi.dotc(&target);
    frame.charge_phase = overlap.arg();
    Ok(PolarData {
        phi,
        beta,
        u,
        s,
        frame,
    })
}

impl PolarData {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0) {
            return Err(Error::InvalidPolarData(format!("φ = {} ≤ 0", self.phi)));
        }
        check_frame_constraints(&self.u, &self.s)
            .map_err(|e| Error::InvalidPolarData(e.to_string()))
    }

    /// `φ² `, the density.
    pub fn phi2(&self) -> f64 {
        self.phi * self.phi
    }
}

/// `ψ = φ e^{−iβπ/2} L⁻¹ (1,0,1,0)ᵀ`.
pub fn polar_reconstruct(data: &PolarData) -> Result<Spinor> {
    data.validate()?;
    let l = data.frame.spinorial();
    let inv = l
        .try_inverse()
        .ok_or_else(|| Error::InvalidPolarData("frame is not invertible".into()))?;
    let v = chiral_rotation(data.beta) * inv * Spinor::template().0 * C64::new(data.phi, 0.0);
    Ok(Spinor(v))
}

/// Norms of `2σ^{μν}u_μ s_ν πψ + ψ` and `i s_μγ^μψ sinβ + s_μγ^μπψ cosβ + ψ`,
/// relative to `‖ψ‖`.
pub fn auxiliary_identities(psi: &Spinor) -> Result<(f64, f64)> {
    let pd = polar_decompose(psi)?;
    let b = CliffordBasis::get();
    let ul = lower(&pd.u);
    let sl = lower(&pd.s);
    let mut first = Mat4c::zeros();
    let mut slash = Mat4c::zeros();
    for mu in 0..4 {
        slash += b.gamma(mu) * C64::new(sl[mu], 0.0);
        for nu in 0..4 {
            let w = 2.0 * ul[mu] * sl[nu];
            if w != 0.0 {
                first += b.sigma(mu, nu) * C64::new(w, 0.0);
            }
        }
    }
    let first = first * b.pi() * psi.0 + psi.0;
    let second = slash * psi.0 * C64::new(0.0, pd.beta.sin())
        + slash * b.pi() * psi.0 * C64::new(pd.beta.cos(), 0.0)
        + psi.0;
    let n = psi.norm();
    Ok((first.norm() / n, second.norm() / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_spinor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn template_bilinears() {
        let b = bilinears(&Spinor::template());
        assert!((b.phi - 2.0).abs() < 1e-15);
        assert!(b.theta.abs() < 1e-15);
        assert!((b.u - Vec4::new(2.0, 0.0, 0.0, 0.0)).amax() < 1e-15);
        assert!((b.s - Vec4::new(0.0, 0.0, 0.0, 2.0)).amax() < 1e-15);
    }

    #[test]
    fn adjoint_sandwich_of_template_is_two() {
        let psi = Spinor::template();
        let v = psi.sandwich(&Mat4c::identity());
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_bilinear_is_real_and_adjoint_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let boost = boost_lift([0.4, -0.2, 0.9]);
        let inv = boost.spin.try_inverse().unwrap();
        for _ in 0..50 {
            let psi = random_spinor(&mut rng);
            assert!(psi.sandwich(&Mat4c::identity()).im.abs() < 1e-13);
            let lhs = psi.transformed(&boost.spin).adjoint();
            let rhs = psi.adjoint() * inv;
            assert!((lhs - rhs).camax() < 1e-12);
        }
    }

    #[test]
    fn template_decomposes_to_identity_frame() {
        let pd = polar_decompose(&Spinor::template()).unwrap();
        assert!((pd.phi - 1.0).abs() < 1e-15);
        assert!(pd.beta.abs() < 1e-15);
        assert!((pd.u - Vec4::new(1.0, 0.0, 0.0, 0.0)).amax() < 1e-15);
        assert!((pd.s - Vec4::new(0.0, 0.0, 0.0, 1.0)).amax() < 1e-15);
        assert!((pd.frame.vector - Mat4::identity()).amax() < 1e-15);
        assert!((pd.frame.spinorial() - Mat4c::identity()).camax() < 1e-15);
    }

    #[test]
    fn chiral_phase_is_recovered() {
        for beta0 in [0.3, -1.2, 2.9, -3.0] {
            let psi = Spinor(chiral_rotation(beta0) * Spinor::template().0);
            let pd = polar_decompose(&psi).unwrap();
            assert!((pd.beta - beta0).abs() < 1e-14, "{beta0} vs {}", pd.beta);
            assert!((pd.phi - 1.0).abs() < 1e-14);
            assert!((pd.s - Vec4::new(0.0, 0.0, 0.0, 1.0)).amax() < 1e-14);
        }
    }

    #[test]
    fn reconstruct_template_and_linearity_in_phi() {
        let mut pd = polar_decompose(&Spinor::template()).unwrap();
        let psi = polar_reconstruct(&pd).unwrap();
        assert!((psi.0 - Spinor::template().0).camax() < 1e-15);
        pd.phi *= 2.0;
        let doubled = polar_reconstruct(&pd).unwrap();
        assert!((doubled.0 - psi.0 * C64::new(2.0, 0.0)).camax() < 1e-14);
    }

    #[test]
    fn boosted_template_velocity_follows_boost() {
        let boost = boost_lift([0.2, 0.5, -0.3]);
        let psi = Spinor::template().transformed(&boost.spin);
        let pd = polar_decompose(&psi).unwrap();
        let expect = boost.vector * Vec4::new(1.0, 0.0, 0.0, 0.0);
        assert!((pd.u - expect).amax() < 1e-12);
    }

    #[test]
    fn singular_spinor_rejected() {
        // Left-handed Weyl spinor: Φ = Θ = 0.
        let psi = Spinor::from_real([1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            polar_decompose(&psi),
            Err(Error::SingularSpinor { .. })
        ));
        assert!(auxiliary_identities(&psi).is_err());
    }

    #[test]
    fn rest_frame_map_examples() {
        let e0 = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let e3 = Vec4::new(0.0, 0.0, 0.0, 1.0);
        let id = rest_frame_map(&e0, &e3).unwrap();
        assert!((id.vector - Mat4::identity()).amax() < 1e-15);

        let w: f64 = 0.7;
        let u = Vec4::new(w.cosh(), 0.0, 0.0, w.sinh());
        let s = Vec4::new(w.sinh(), 0.0, 0.0, w.cosh());
        let l = rest_frame_map(&u, &s).unwrap();
        let expect = boost_lift([0.0, 0.0, -w]);
        assert!((l.vector - expect.vector).amax() < 1e-12);
        assert!((l.spin - expect.spin).camax() < 1e-12);

        assert!(matches!(
            rest_frame_map(&e0, &e0),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn antiparallel_spin_is_handled() {
        let e0 = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let down = Vec4::new(0.0, 0.0, 0.0, -1.0);
        let l = rest_frame_map(&e0, &down).unwrap();
        assert!((l.vector * down - Vec4::new(0.0, 0.0, 0.0, 1.0)).amax() < 1e-15);
    }

    #[test]
    fn template_auxiliary_identities_vanish() {
        let (a, b) = auxiliary_identities(&Spinor::template()).unwrap();
        assert!(a < 1e-15 && b < 1e-15, "{a} {b}");
    }

    #[test]
    fn invalid_polar_data_rejected() {
        let mut pd = polar_decompose(&Spinor::template()).unwrap();
        pd.s = Vec4::new(0.0, 0.0, 0.0, 1.1);
        assert!(matches!(
            polar_reconstruct(&pd),
            Err(Error::InvalidPolarData(_))
        ));
    }
}
