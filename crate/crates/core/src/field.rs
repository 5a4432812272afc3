//! Spinor fields on flat spacetime, their derivatives, the Dirac residual and
//! the tensorial connections `P_μ`, `R_ijμ`.

use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector, SymmetricEigen, Matrix2};

use crate::clifford::{CliffordBasis, LorentzPair};
use crate::error::{Error, Result};
use crate::spinor::{bilinears, Bilinears, Spinor, SINGULAR_THRESHOLD};
use crate::tensor::{self, epsilon_terms, lower, Rank3, METRIC, PAIRS};
use crate::{Mat4, Mat4c, Point, Vec4, C64};

/// Default finite-difference step, in units where `m = 1`.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Gauge potential `A^μ(x) = offset^μ + slope^μ_ν x^ν`.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugePotential {
    Constant(Vec4),
    Affine { offset: Vec4, slope: Mat4 },
}

impl GaugePotential {
    pub fn at(&self, x: &Point) -> Vec4 {
        match self {
            GaugePotential::Constant(a) => *a,
            GaugePotential::Affine { offset, slope } => offset + slope * x,
        }
    }

    pub fn as_constant(&self) -> Option<Vec4> {
        match self {
            GaugePotential::Constant(a) => Some(*a),
            GaugePotential::Affine { offset, slope } if slope.amax() == 0.0 => Some(*offset),
            GaugePotential::Affine { .. } => None,
        }
    }

    fn parts(&self) -> (Vec4, Mat4) {
        match self {
            GaugePotential::Constant(a) => (*a, Mat4::zeros()),
            GaugePotential::Affine { offset, slope } => (*offset, *slope),
        }
    }
}

/// Fixed external fields and couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub mass: f64,
    pub charge: f64,
    pub potential: GaugePotential,
    /// Constant axial torsion `W^μ`.
    pub torsion: Vec4,
    /// Torsion-spin coupling `X`.
    pub coupling: f64,
}

impl Background {
    pub fn free(mass: f64) -> Self {
        Background {
            mass,
            charge: 0.0,
            potential: GaugePotential::Constant(Vec4::zeros()),
            torsion: Vec4::zeros(),
            coupling: 0.0,
        }
    }

    pub fn with_potential(mut self, charge: f64, potential: Vec4) -> Self {
        self.charge = charge;
        self.potential = GaugePotential::Constant(potential);
        self
    }

    pub fn with_torsion(mut self, torsion: Vec4, coupling: f64) -> Self {
        self.torsion = torsion;
        self.coupling = coupling;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }
}

/// A spinor-valued function of spacetime together with its background.
///
/// Implementations must be callable from several threads at once.
pub trait SpinorField: Send + Sync {
    fn value(&self, x: &Point) -> Spinor;

    fn background(&self) -> &Background;

    /// Closed-form partial derivatives `∂_μψ`, if available.
    fn gradient(&self, _x: &Point) -> Option<[Spinor; 4]> {
        None
    }
}

impl<F: SpinorField + ?Sized> SpinorField for &F {
    fn value(&self, x: &Point) -> Spinor {
        (**self).value(x)
    }
    fn background(&self) -> &Background {
        (**self).background()
    }
    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        (**self).gradient(x)
    }
}

impl<F: SpinorField + ?Sized> SpinorField for Box<F> {
    fn value(&self, x: &Point) -> Spinor {
        (**self).value(x)
    }
    fn background(&self) -> &Background {
        (**self).background()
    }
    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        (**self).gradient(x)
    }
}

/// How spacetime derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    /// Fourth-order central differences, optionally Richardson-extrapolated
    /// from steps `h` and `h/2`.
    FiniteDifference { step: f64, richardson: bool },
    /// Closed-form gradient; falls back to default finite differences when the
    /// field has none.
    Exact,
}

impl Default for Derivative {
    fn default() -> Self {
        Derivative::FiniteDifference {
            step: DEFAULT_STEP,
            richardson: false,
        }
    }
}

impl Derivative {
    pub fn fd(step: f64) -> Self {
        Derivative::FiniteDifference {
            step,
            richardson: false,
        }
    }
}

fn unit(mu: usize) -> Point {
    let mut e = Point::zeros();
    e[mu] = 1.0;
    e
}

/// Fourth-order central difference of `f` along coordinate `mu`.
fn central4<T, F>(f: F, x: &Point, mu: usize, h: f64) -> T
where
    F: Fn(&Point) -> T,
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let e = unit(mu) * h;
    let m2 = f(&(x - e * 2.0));
    let m1 = f(&(x - e));
    let p1 = f(&(x + e));
    let p2 = f(&(x + e * 2.0));
    (m2 - p2 + (p1 - m1) * 8.0) * (1.0 / (12.0 * h))
}

impl std::ops::Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, k: f64) -> Spinor {
        Spinor(self.0 * C64::new(k, 0.0))
    }
}

/// `∂_μψ` by fourth-order central differences with step `h`.
pub fn derivative<F: SpinorField + ?Sized>(field: &F, x: &Point, mu: usize, h: f64) -> Spinor {
    central4(|p| field.value(p), x, mu, h)
}

/// Richardson combination `(16 D(h/2) − D(h)) / 15`.
pub fn derivative_richardson<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    mu: usize,
    h: f64,
) -> Spinor {
    let coarse = derivative(field, x, mu, h);
    let fine = derivative(field, x, mu, h / 2.0);
    (fine * 16.0 - coarse) * (1.0 / 15.0)
}

/// Partial derivatives `∂_μψ`, `μ = 0..3`.
pub fn partial_gradient<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> [Spinor; 4] {
    match method {
        Derivative::Exact => field
            .gradient(x)
            .unwrap_or_else(|| partial_gradient(field, x, Derivative::default())),
        Derivative::FiniteDifference { step, richardson } => std::array::from_fn(|mu| {
            if richardson {
                derivative_richardson(field, x, mu, step)
            } else {
                derivative(field, x, mu, step)
            }
        }),
    }
}

/// `∇_μψ = ∂_μψ + iqA_μψ` (flat space, no spin connection).
pub fn covariant_derivative<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    mu: usize,
    method: Derivative,
) -> Spinor {
    covariant_gradient(field, x, method)[mu]
}

pub fn covariant_gradient<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> [Spinor; 4] {
    let bg = field.background();
    let psi = field.value(x);
    let partial = partial_gradient(field, x, method);
    let a = lower(&bg.potential.at(x));
    std::array::from_fn(|mu| partial[mu] + psi.scale(C64::new(0.0, bg.charge * a[mu])))
}

/// Residual spinor of `iγ^μ∇_μψ − XW_μγ^μπψ − mψ` and its size relative to `m‖ψ‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracResidual {
    pub residual: Spinor,
    pub normalized: f64,
}

pub fn dirac_residual_from(psi: &Spinor, grad: &[Spinor; 4], bg: &Background) -> DiracResidual {
    let b = CliffordBasis::get();
    let w = lower(&bg.torsion);
    let mut acc = psi.0 * C64::new(-bg.mass, 0.0);
    for mu in 0..4 {
        acc += b.gamma(mu) * grad[mu].0 * C64::i();
        acc -= b.gamma(mu) * b.pi() * psi.0 * C64::new(bg.coupling * w[mu], 0.0);
    }
    let scale = if bg.mass > 0.0 { bg.mass } else { 1.0 } * psi.norm();
    DiracResidual {
        residual: Spinor(acc),
        normalized: acc.norm() / scale,
    }
}

pub fn dirac_residual<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> DiracResidual {
    let psi = field.value(x);
    let grad = covariant_gradient(field, x, method);
    dirac_residual_from(&psi, &grad, field.background())
}

/// `γ^μ(k_μ − qA_μ) − XW_μγ^μπ − m𝕀` for a constant potential.
pub fn dirac_matrix(k: &Vec4, bg: &Background, potential: &Vec4) -> Mat4c {
    let b = CliffordBasis::get();
    let kin = lower(&(k - potential * bg.charge));
    let w = lower(&bg.torsion);
    let mut m = Mat4c::identity() * C64::new(-bg.mass, 0.0);
    for mu in 0..4 {
        m += b.gamma(mu) * C64::new(kin[mu], 0.0);
        m -= b.gamma(mu) * b.pi() * C64::new(bg.coupling * w[mu], 0.0);
    }
    m
}

/// Positive-energy branch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    SpinUp,
    SpinDown,
}

/// Exact solution `ψ(x) = e^{−ik·x} w` of the Dirac equation with constant
/// background fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    momentum: Vec4,
    amplitude: Spinor,
    background: Background,
    nullity: usize,
    ambiguous: bool,
    nullspace_residual: f64,
}

impl PlaneWave {
    /// Canonical momentum `k^μ`.
    pub fn momentum(&self) -> Vec4 {
        self.momentum
    }

    pub fn amplitude(&self) -> Spinor {
        self.amplitude
    }

    /// Dimension of the nullspace the amplitude was chosen from.
    pub fn nullity(&self) -> usize {
        self.nullity
    }

    /// Set when the spin projection could not separate a degenerate nullspace.
    pub fn is_ambiguous(&self) -> bool {
        self.ambiguous
    }

    /// `‖M(k) w‖ / ‖w‖`.
    pub fn nullspace_residual(&self) -> f64 {
        self.nullspace_residual
    }

    /// Same wave paired with a different background: generally off-shell.
    pub fn detuned(&self, background: Background) -> PlaneWave {
        PlaneWave {
            background,
            ..self.clone()
        }
    }

    pub fn from_parts(momentum: Vec4, amplitude: Spinor, background: Background) -> Self {
        PlaneWave {
            momentum,
            amplitude,
            background,
            nullity: 1,
            ambiguous: false,
            nullspace_residual: f64::NAN,
        }
    }

    fn phase(&self, x: &Point) -> C64 {
        C64::from_polar(1.0, -tensor::dot(&self.momentum, x))
    }
}

impl SpinorField for PlaneWave {
    fn value(&self, x: &Point) -> Spinor {
        self.amplitude.scale(self.phase(x))
    }

    fn background(&self) -> &Background {
        &self.background
    }

    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        let psi = self.value(x);
        let k = lower(&self.momentum);
        Some(std::array::from_fn(|mu| psi.scale(C64::new(0.0, -k[mu]))))
    }
}

/// Fix the global phase so the first largest component is real and positive,
/// and scale to `‖w‖² = 2`.
fn normalize_amplitude(w: &nalgebra::Vector4<C64>) -> Spinor {
    let max = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = w
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = w[pivot].conj() / w[pivot].norm();
    Spinor(w * phase * C64::new(2f64.sqrt() / w.norm(), 0.0))
}

/// Build the positive-energy plane wave with spatial canonical momentum `p`.
///
/// The energies are the roots `p⁰` of `det M(p) = 0`; since `γ⁰M` is
/// Hermitian they are the eigenvalues of the corresponding Dirac Hamiltonian,
/// which also yields the nullspace directly. Within the positive-energy pair
/// the branch is selected by the spin projection `γ⁰γ³π`.
pub fn plane_wave(p: [f64; 3], branch: Branch, bg: &Background) -> Result<PlaneWave> {
    if !(bg.mass > 0.0) {
        return Err(Error::UnsupportedBackground(
            "plane waves need a positive mass".into(),
        ));
    }
    let a = bg.potential.as_constant().ok_or_else(|| {
        Error::UnsupportedBackground("plane waves need a constant gauge potential".into())
    })?;
    let b = CliffordBasis::get();
    // γ⁰M(p⁰) = (p⁰ − qA⁰)𝕀 − H
    let k_spatial = Vec4::new(0.0, p[0], p[1], p[2]);
    let h = -(b.gamma(0) * dirac_matrix(&k_spatial, bg, &Vec4::new(0.0, a[1], a[2], a[3])));
    let h = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let (hi, lo) = (order[0], order[1]);
    let (e_hi, e_lo) = (eig.eigenvalues[hi], eig.eigenvalues[lo]);
    let v_hi = eig.eigenvectors.column(hi).into_owned();
    let v_lo = eig.eigenvectors.column(lo).into_owned();

    let spin_op = b.gamma(0) * b.gamma(3) * b.pi();
    let expect = |v: &nalgebra::Vector4<C64>| (v.adjoint() * spin_op * v)[(0, 0)].re;
    let scale = 1.0 + e_hi.abs();
    let degenerate = (e_hi - e_lo).abs() <= 1e-10 * scale;

    let (energy, w, nullity, ambiguous) = if degenerate {
        // Diagonalise the spin projection inside the two-dimensional eigenspace.
        let o = |x: &nalgebra::Vector4<C64>, y: &nalgebra::Vector4<C64>| {
            (x.adjoint() * spin_op * y)[(0, 0)]
        };
        let restricted = Matrix2::new(o(&v_hi, &v_hi), o(&v_hi, &v_lo), o(&v_lo, &v_hi), o(&v_lo, &v_lo));
        let re = SymmetricEigen::new((restricted + restricted.adjoint()) * C64::new(0.5, 0.0));
        let (up, down) = if re.eigenvalues[0] >= re.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        let ambiguous = (re.eigenvalues[0] - re.eigenvalues[1]).abs() <= 1e-10;
        let pick = match branch {
            Branch::SpinUp => up,
            Branch::SpinDown => down,
        };
        let coef = re.eigenvectors.column(pick);
        let w = v_hi * coef[0] + v_lo * coef[1];
        (0.5 * (e_hi + e_lo), w, 2, ambiguous)
    } else {
        let hi_is_up = expect(&v_hi) >= expect(&v_lo);
        let choose_hi = matches!(branch, Branch::SpinUp) == hi_is_up;
        if choose_hi {
            (e_hi, v_hi, 1, false)
        } else {
            (e_lo, v_lo, 1, false)
        }
    };
    if !(energy > 1e-12 * scale) {
        return Err(Error::NoRealRoot(format!(
            "selected branch has energy {energy:e} (spectrum top {e_hi:e}, {e_lo:e})"
        )));
    }
    let k = Vec4::new(energy + bg.charge * a[0], p[0], p[1], p[2]);
    let amplitude = normalize_amplitude(&w);
    let nullspace_residual =
        (dirac_matrix(&k, bg, &a) * amplitude.0).norm() / amplitude.norm();
    Ok(PlaneWave {
        momentum: k,
        amplitude,
        background: bg.clone(),
        nullity,
        ambiguous,
        nullspace_residual,
    })
}

/// Like [`plane_wave`] but refuses a degenerate nullspace whose branch could
/// not be resolved by the spin projection.
pub fn plane_wave_strict(p: [f64; 3], branch: Branch, bg: &Background) -> Result<PlaneWave> {
    let wave = plane_wave(p, branch, bg)?;
    if wave.ambiguous {
        return Err(Error::DegenerateNullspace {
            nullity: wave.nullity,
        });
    }
    Ok(wave)
}

/// Pointwise linear combination of fields sharing one background.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition<F = PlaneWave> {
    terms: Vec<(C64, F)>,
    background: Background,
}

pub fn superpose<F: SpinorField>(fields: Vec<F>, coeffs: &[C64]) -> Result<Superposition<F>> {
    if fields.is_empty() || fields.len() != coeffs.len() {
        return Err(Error::Config(format!(
            "superposition needs matching, non-empty fields ({}) and coefficients ({})",
            fields.len(),
            coeffs.len()
        )));
    }
    let background = fields[0].background().clone();
    if fields.iter().any(|f| *f.background() != background) {
        return Err(Error::MixedBackgrounds);
    }
    Ok(Superposition {
        terms: coeffs.iter().copied().zip(fields).collect(),
        background,
    })
}

impl<F> Superposition<F> {
    pub fn terms(&self) -> &[(C64, F)] {
        &self.terms
    }
}

impl<F: SpinorField> SpinorField for Superposition<F> {
    fn value(&self, x: &Point) -> Spinor {
        self.terms
            .iter()
            .fold(Spinor::zeros(), |acc, (c, f)| acc + f.value(x).scale(*c))
    }

    fn background(&self) -> &Background {
        &self.background
    }

    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        let mut out = [Spinor::zeros(); 4];
        for (c, f) in &self.terms {
            let g = f.gradient(x)?;
            for mu in 0..4 {
                out[mu] = out[mu] + g[mu].scale(*c);
            }
        }
        Some(out)
    }
}

/// A field re-paired with a different background (values untouched).
#[derive(Debug, Clone)]
pub struct WithBackground<F> {
    pub inner: F,
    pub background: Background,
}

impl<F: SpinorField> SpinorField for WithBackground<F> {
    fn value(&self, x: &Point) -> Spinor {
        self.inner.value(x)
    }
    fn background(&self) -> &Background {
        &self.background
    }
    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        self.inner.gradient(x)
    }
}

/// Local U(1) transform `ψ → e^{iqα}ψ`, `A^μ → A^μ − ∂^μα` with
/// `α(x) = k_μx^μ + ½ x^μQ_μνx^ν`.
#[derive(Debug, Clone)]
pub struct GaugeTransformed<F> {
    inner: F,
    linear: Vec4,
    quadratic: Mat4,
    background: Background,
}

impl<F: SpinorField> GaugeTransformed<F> {
    /// `linear` holds `k_μ` (lower index), `quadratic` the symmetric `Q_μν`.
    pub fn new(inner: F, linear: Vec4, quadratic: Mat4) -> Self {
        let quadratic = (quadratic + quadratic.transpose()) * 0.5;
        let mut background = inner.background().clone();
        let (offset, slope) = background.potential.parts();
        let eta = tensor::eta();
        background.potential = GaugePotential::Affine {
            offset: offset - eta * linear,
            slope: slope - eta * quadratic,
        };
        GaugeTransformed {
            inner,
            linear,
            quadratic,
            background,
        }
    }

    fn alpha(&self, x: &Point) -> f64 {
        self.linear.dot(x) + 0.5 * x.dot(&(self.quadratic * x))
    }
}

impl<F: SpinorField> SpinorField for GaugeTransformed<F> {
    fn value(&self, x: &Point) -> Spinor {
        let q = self.background.charge;
        self.inner
            .value(x)
            .scale(C64::from_polar(1.0, q * self.alpha(x)))
    }

    fn background(&self) -> &Background {
        &self.background
    }

    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        let q = self.background.charge;
        let phase = C64::from_polar(1.0, q * self.alpha(x));
        let psi = self.inner.value(x);
        let g = self.inner.gradient(x)?;
        let dalpha = self.linear + self.quadratic * x;
        Some(std::array::from_fn(|mu| {
            (g[mu] + psi.scale(C64::new(0.0, q * dalpha[mu]))).scale(phase)
        }))
    }
}

/// Global Lorentz transform `ψ'(x) = S ψ(Λ⁻¹x)` with backgrounds carried along.
#[derive(Debug, Clone)]
pub struct LorentzTransformed<F> {
    inner: F,
    pair: LorentzPair,
    inverse: Mat4,
    background: Background,
}

impl<F: SpinorField> LorentzTransformed<F> {
    pub fn new(inner: F, pair: LorentzPair) -> Self {
        let inverse = pair.inverse().vector;
        let mut background = inner.background().clone();
        background.torsion = pair.vector * background.torsion;
        background.potential = match &background.potential {
            GaugePotential::Constant(a) => GaugePotential::Constant(pair.vector * a),
            GaugePotential::Affine { offset, slope } => GaugePotential::Affine {
                offset: pair.vector * offset,
                slope: pair.vector * slope * inverse,
            },
        };
        LorentzTransformed {
            inner,
            pair,
            inverse,
            background,
        }
    }
}

impl<F: SpinorField> SpinorField for LorentzTransformed<F> {
    fn value(&self, x: &Point) -> Spinor {
        self.inner
            .value(&(self.inverse * x))
            .transformed(&self.pair.spinorial())
    }

    fn background(&self) -> &Background {
        &self.background
    }

    fn gradient(&self, x: &Point) -> Option<[Spinor; 4]> {
        let g = self.inner.gradient(&(self.inverse * x))?;
        let s = self.pair.spinorial();
        Some(std::array::from_fn(|mu| {
            let mut acc = Spinor::zeros();
            for nu in 0..4 {
                acc = acc + g[nu] * self.inverse[(nu, mu)];
            }
            acc.transformed(&s)
        }))
    }
}

/// Polar variables at a point and their gradients (all indices up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub phi2: f64,
    pub beta: f64,
    pub u: Vec4,
    pub s: Vec4,
    /// `∇^μβ`
    pub grad_beta: Vec4,
    /// `∇^μ ln φ²`
    pub grad_log_phi2: Vec4,
    /// `[(μ, a)] = ∇^μ u^a`
    pub grad_u: Mat4,
    /// `[(μ, a)] = ∇^μ s^a`
    pub grad_s: Mat4,
}

#[derive(Debug, Clone, Copy)]
struct PointwisePolar {
    beta: f64,
    log_phi2: f64,
    u: Vec4,
    s: Vec4,
}

fn pointwise(bil: &Bilinears) -> Result<PointwisePolar> {
    let n2 = bil.scalar_norm();
    if !(n2 >= SINGULAR_THRESHOLD) {
        return Err(Error::SingularSpinor { norm: n2 });
    }
    let two_phi2 = n2.sqrt();
    Ok(PointwisePolar {
        beta: bil.theta.atan2(bil.phi),
        log_phi2: (two_phi2 / 2.0).ln(),
        u: bil.u / two_phi2,
        s: bil.s / two_phi2,
    })
}

/// Derivatives of the bilinears from `ψ` and `∂ψ`: `(∂Φ, ∂Θ, ∂U, ∂S)`.
fn bilinear_derivatives(psi: &Spinor, grad: &[Spinor; 4]) -> ([f64; 4], [f64; 4], Mat4, Mat4) {
    let b = CliffordBasis::get();
    let bar = psi.adjoint();
    let mut dphi = [0.0; 4];
    let mut dtheta = [0.0; 4];
    let mut du = Mat4::zeros();
    let mut ds = Mat4::zeros();
    for mu in 0..4 {
        let dbar = grad[mu].adjoint();
        let d = |m: &Mat4c| ((dbar * m * psi.0)[(0, 0)] + (bar * m * grad[mu].0)[(0, 0)]).re;
        dphi[mu] = d(&Mat4c::identity());
        dtheta[mu] = -((dbar * b.pi() * psi.0)[(0, 0)] + (bar * b.pi() * grad[mu].0)[(0, 0)]).im;
        for a in 0..4 {
            du[(mu, a)] = d(b.gamma(a));
            ds[(mu, a)] = d(&(b.gamma(a) * b.pi()));
        }
    }
    (dphi, dtheta, du, ds)
}

/// Polar variables and gradients from `ψ` and its (gauge-covariant or
/// partial, the polar variables are gauge invariant) derivatives.
pub fn polar_point_from(psi: &Spinor, grad: &[Spinor; 4]) -> Result<PolarPoint> {
    let bil = bilinears(psi);
    let n2 = bil.scalar_norm();
    if !(n2 >= SINGULAR_THRESHOLD) {
        return Err(Error::SingularSpinor { norm: n2 });
    }
    let two_phi2 = n2.sqrt();
    let (dphi, dtheta, du_raw, ds_raw) = bilinear_derivatives(psi, grad);
    let mut grad_beta = Vec4::zeros();
    let mut grad_log_phi2 = Vec4::zeros();
    let mut grad_u = Mat4::zeros();
    let mut grad_s = Mat4::zeros();
    for mu in 0..4 {
        let g = METRIC[mu];
        grad_beta[mu] = g * (bil.phi * dtheta[mu] - bil.theta * dphi[mu]) / n2;
        // ∂ ln(2φ²) = ½ ∂ ln(Φ²+Θ²)
        let dlog_two_phi2 = (bil.phi * dphi[mu] + bil.theta * dtheta[mu]) / n2;
        grad_log_phi2[mu] = g * dlog_two_phi2;
        for a in 0..4 {
            grad_u[(mu, a)] = g * (du_raw[(mu, a)] / two_phi2 - bil.u[a] / two_phi2 * dlog_two_phi2);
            grad_s[(mu, a)] = g * (ds_raw[(mu, a)] / two_phi2 - bil.s[a] / two_phi2 * dlog_two_phi2);
        }
    }
    Ok(PolarPoint {
        phi2: two_phi2 / 2.0,
        beta: bil.theta.atan2(bil.phi),
        u: bil.u / two_phi2,
        s: bil.s / two_phi2,
        grad_beta,
        grad_log_phi2,
        grad_u,
        grad_s,
    })
}

/// Polar variables at `x` with gradients.
///
/// With finite differences the pointwise decomposition itself is
/// differentiated; `β` is continued to the branch nearest the centre value
/// across the stencil. With [`Derivative::Exact`] the gradients follow in
/// closed form from `ψ` and `∂ψ`.
pub fn extract_polar_fields<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> Result<PolarPoint> {
    let (step, richardson) = match method {
        Derivative::Exact => {
            if let Some(grad) = field.gradient(x) {
                return polar_point_from(&field.value(x), &grad).map_err(|e| e.at(x));
            }
            (DEFAULT_STEP, false)
        }
        Derivative::FiniteDifference { step, richardson } => (step, richardson),
    };
    let centre = pointwise(&bilinears(&field.value(x))).map_err(|e| e.at(x))?;
    let stencil = |h: f64| -> Result<[[f64; 10]; 4]> {
        let mut out = [[0.0; 10]; 4];
        for (mu, row) in out.iter_mut().enumerate() {
            let mut samples = [[0.0; 10]; 4];
            for (slot, k) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
                let p = x + unit(mu) * (k * h);
                let pw = pointwise(&bilinears(&field.value(&p))).map_err(|e| e.at(&p))?;
                let mut beta = pw.beta;
                beta -= 2.0 * PI * ((beta - centre.beta) / (2.0 * PI)).round();
                let jump = (beta - centre.beta).abs();
                if jump > PI / 2.0 {
                    return Err(Error::BranchJump { jump });
                }
                let s = &mut samples[slot];
                s[0] = beta;
                s[1] = pw.log_phi2;
                for a in 0..4 {
                    s[2 + a] = pw.u[a];
                    s[6 + a] = pw.s[a];
                }
            }
            for c in 0..10 {
                row[c] = (samples[0][c] - samples[3][c] + 8.0 * (samples[2][c] - samples[1][c]))
                    / (12.0 * h);
            }
        }
        Ok(out)
    };
    let mut d = stencil(step)?;
    if richardson {
        let fine = stencil(step / 2.0)?;
        for mu in 0..4 {
            for c in 0..10 {
                d[mu][c] = (16.0 * fine[mu][c] - d[mu][c]) / 15.0;
            }
        }
    }
    let mut p = PolarPoint {
        phi2: centre.log_phi2.exp(),
        beta: centre.beta,
        u: centre.u,
        s: centre.s,
        grad_beta: Vec4::zeros(),
        grad_log_phi2: Vec4::zeros(),
        grad_u: Mat4::zeros(),
        grad_s: Mat4::zeros(),
    };
    for mu in 0..4 {
        let g = METRIC[mu];
        p.grad_beta[mu] = g * d[mu][0];
        p.grad_log_phi2[mu] = g * d[mu][1];
        for a in 0..4 {
            p.grad_u[(mu, a)] = g * d[mu][2 + a];
            p.grad_s[(mu, a)] = g * d[mu][6 + a];
        }
    }
    Ok(p)
}

/// Tensorial connections at a point, all indices up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorialConnection {
    /// `P^μ`
    pub p: Vec4,
    /// `R^{ijμ}`, antisymmetric in `ij`.
    pub r: Rank3,
    /// Unit null direction of the extraction system in the coordinates
    /// `(P_μ, R_01μ, R_02μ, R_03μ, R_12μ, R_13μ, R_23μ)`.
    pub kernel_direction: [f64; 7],
    /// `B^ν = ½ε^ν_{απι}R^{απι}`
    pub b: Vec4,
    /// `R^ν = R^{νa}_a`
    pub rtrace: Vec4,
    /// `V^μ = ¼R_ij^μ ε^{ijcd}u_c s_d`
    pub v: Vec4,
    /// Velocity and spin the connection was extracted against.
    pub u: Vec4,
    pub s: Vec4,
    /// Relative least-squares residual of the extraction.
    pub residual: f64,
}

/// `(B, Rtrace, V)` from `R^{ijμ}` and the frame.
pub fn connection_contractions(r: &Rank3, u: &Vec4, s: &Vec4) -> (Vec4, Vec4, Vec4) {
    let rl = r.lowered();
    let ul = lower(u);
    let sl = lower(s);
    let mut b = Vec4::zeros();
    let mut v = Vec4::zeros();
    for &(idx, e) in epsilon_terms() {
        let [n, a, p, i] = idx;
        // B_n = ½ ε_{napi} R^{api}
        b[n] += 0.5 * (-e) * r.get(a, p, i) * METRIC[n];
        // V^μ = ¼ R_{ij}^μ ε^{ijcd} u_c s_d
        let [i2, j2, c2, d2] = idx;
        for mu in 0..4 {
            v[mu] += 0.25 * rl.get(i2, j2, mu) * METRIC[mu] * e * ul[c2] * sl[d2];
        }
    }
    let mut rtrace = Vec4::zeros();
    for nu in 0..4 {
        for a in 0..4 {
            // R^{νa}_a = R^{νaa} η_aa
            rtrace[nu] += r.get(nu, a, a) * METRIC[a];
        }
    }
    (b, rtrace, v)
}

impl TensorialConnection {
    /// Build from per-`μ` solutions in lower-index coordinates.
    pub fn from_lower_solution(
        sol: &[[f64; 7]; 4],
        kernel_direction: [f64; 7],
        u: Vec4,
        s: Vec4,
        residual: f64,
    ) -> Self {
        let mut p = Vec4::zeros();
        let mut r = Rank3::zeros();
        for mu in 0..4 {
            p[mu] = sol[mu][0] * METRIC[mu];
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                let up = sol[mu][k + 1] * METRIC[i] * METRIC[j] * METRIC[mu];
                r.set(i, j, mu, up);
                r.set(j, i, mu, -up);
            }
        }
        let (b, rtrace, v) = connection_contractions(&r, &u, &s);
        TensorialConnection {
            p,
            r,
            kernel_direction,
            b,
            rtrace,
            v,
            u,
            s,
            residual,
        }
    }

    pub fn lower_solution(&self) -> [[f64; 7]; 4] {
        let pl = lower(&self.p);
        let rl = self.r.lowered();
        std::array::from_fn(|mu| {
            let mut row = [0.0; 7];
            row[0] = pl[mu];
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                row[k + 1] = rl.get(i, j, mu);
            }
            row
        })
    }

    /// Move along the null line by `t[μ]` for each derivative direction.
    pub fn shifted(&self, t: [f64; 4]) -> Self {
        let mut sol = self.lower_solution();
        for mu in 0..4 {
            for k in 0..7 {
                sol[mu][k] += t[mu] * self.kernel_direction[k];
            }
        }
        Self::from_lower_solution(&sol, self.kernel_direction, self.u, self.s, self.residual)
    }

    /// Apply a global Lorentz transformation to every stored tensor.
    pub fn transformed(&self, lambda: &Mat4) -> Self {
        let r = self.r.transformed(lambda);
        let u = lambda * self.u;
        let s = lambda * self.s;
        let (b, rtrace, v) = connection_contractions(&r, &u, &s);
        // kernel: (δP_μ, δR_{ij μ}) per unit shift; δP is a scalar multiple,
        // δR_ij a covariant 2-tensor.
        let eta = tensor::eta();
        let lambda_cov = eta * lambda * eta; // acts on lower indices
        let mut k2 = Mat4::zeros();
        for (n, &(i, j)) in PAIRS.iter().enumerate() {
            k2[(i, j)] = self.kernel_direction[n + 1];
            k2[(j, i)] = -self.kernel_direction[n + 1];
        }
        let k2 = lambda_cov * k2 * lambda_cov.transpose();
        let mut kernel = [0.0; 7];
        kernel[0] = self.kernel_direction[0];
        for (n, &(i, j)) in PAIRS.iter().enumerate() {
            kernel[n + 1] = k2[(i, j)];
        }
        let norm = kernel.iter().map(|x| x * x).sum::<f64>().sqrt();
        kernel.iter_mut().for_each(|x| *x /= norm);
        TensorialConnection {
            p: lambda * self.p,
            r,
            kernel_direction: kernel,
            b,
            rtrace,
            v,
            u,
            s,
            residual: self.residual,
        }
    }

    /// Worst of `|∇^μ s^i − R^{jiμ}s_j|` and the same for `u`.
    pub fn ds_du_residual(&self, polar: &PolarPoint) -> f64 {
        let ul = lower(&polar.u);
        let sl = lower(&polar.s);
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for i in 0..4 {
                let mut ru = 0.0;
                let mut rs = 0.0;
                for j in 0..4 {
                    ru += self.r.get(j, i, mu) * ul[j];
                    rs += self.r.get(j, i, mu) * sl[j];
                }
                worst = worst
                    .max((polar.grad_u[(mu, i)] - ru).abs())
                    .max((polar.grad_s[(mu, i)] - rs).abs());
            }
        }
        worst
    }

    /// `R` rebuilt from `u`, `s`, their gradients and `V`.
    pub fn reconstruct_from_frame(&self, polar: &PolarPoint) -> Rank3 {
        let (u, s) = (polar.u, polar.s);
        let ul = lower(&u);
        let sl = lower(&s);
        let mut out = Rank3::zeros();
        let mut eus = Mat4::zeros();
        for &(idx, e) in epsilon_terms() {
            // ε^{abij} u_i s_j
            eus[(idx[0], idx[1])] += e * ul[idx[2]] * sl[idx[3]];
        }
        for mu in 0..4 {
            let du_s: f64 = (0..4).map(|k| polar.grad_u[(mu, k)] * sl[k]).sum();
            for a in 0..4 {
                for b in 0..4 {
                    let val = u[a] * polar.grad_u[(mu, b)] - u[b] * polar.grad_u[(mu, a)]
                        + s[b] * polar.grad_s[(mu, a)]
                        - s[a] * polar.grad_s[(mu, b)]
                        + (u[a] * s[b] - u[b] * s[a]) * du_s
                        + 2.0 * eus[(a, b)] * self.v[mu];
                    out.set(a, b, mu, val);
                }
            }
        }
        out
    }
}

/// Columns `−iψ, −σ^{ij}ψ (i<j)` stacked as real and imaginary parts.
fn extraction_matrix(psi: &Spinor) -> SMatrix<f64, 8, 7> {
    let b = CliffordBasis::get();
    let mut cols: [nalgebra::Vector4<C64>; 7] = [psi.0 * C64::new(0.0, -1.0); 7];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        cols[k + 1] = -(b.sigma(i, j) * psi.0);
    }
    SMatrix::<f64, 8, 7>::from_fn(|r, c| {
        if r < 4 {
            cols[c][r].re
        } else {
            cols[c][r - 4].im
        }
    })
}

/// Solve `∇_μψ − (−(i/2)∇_μβ π + ∇_μ lnφ)ψ = (−iP_μ − ½R_ijμσ^{ij})ψ` for
/// `(P_μ, R_ijμ)` in the minimum-norm sense.
pub fn connection_from(
    psi: &Spinor,
    cov_grad: &[Spinor; 4],
    polar: &PolarPoint,
) -> Result<TensorialConnection> {
    let b = CliffordBasis::get();
    let a = extraction_matrix(psi);
    let svd = a.svd(true, true);
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let kernel_idx = order[6];
    let ratio = sv[order[5]] / sv[order[0]];
    if !(ratio >= 1e-6) {
        return Err(Error::IllConditioned { ratio });
    }
    let u_mat = svd.u.as_ref().expect("computed");
    let vt = svd.v_t.as_ref().expect("computed");
    let mut kernel = [0.0; 7];
    for k in 0..7 {
        kernel[k] = vt[(kernel_idx, k)];
    }
    let pivot = (0..7)
        .max_by(|&i, &j| kernel[i].abs().total_cmp(&kernel[j].abs()))
        .unwrap_or(0);
    if kernel[pivot] < 0.0 {
        kernel.iter_mut().for_each(|x| *x = -*x);
    }

    let mut sol = [[0.0; 7]; 4];
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        let g = METRIC[mu];
        // covariant components of the scalar gradients
        let dbeta = g * polar.grad_beta[mu];
        let dlogphi = 0.5 * g * polar.grad_log_phi2[mu];
        let polar_part = (b.pi() * C64::new(0.0, -0.5 * dbeta)
            + Mat4c::identity() * C64::new(dlogphi, 0.0))
            * psi.0;
        let lhs = cov_grad[mu].0 - polar_part;
        let rhs = SVector::<f64, 8>::from_fn(|r, _| if r < 4 { lhs[r].re } else { lhs[r - 4].im });
        let mut x = SVector::<f64, 7>::zeros();
        for &k in order.iter().take(6) {
            let coef = u_mat.column(k).dot(&rhs) / sv[k];
            x += vt.row(k).transpose() * coef;
        }
        let res = (a * x - rhs).norm();
        worst = worst.max(res);
        for k in 0..7 {
            sol[mu][k] = x[k];
        }
    }
    let scale = psi.norm() * (1.0 + cov_grad.iter().map(|g| g.norm()).fold(0.0, f64::max) / psi.norm());
    Ok(TensorialConnection::from_lower_solution(
        &sol,
        kernel,
        polar.u,
        polar.s,
        worst / scale,
    ))
}

/// Everything extracted at one sample point.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub point: Point,
    pub psi: Spinor,
    /// `∇_μψ`
    pub cov_grad: [Spinor; 4],
    pub polar: PolarPoint,
    pub conn: TensorialConnection,
    pub background: Background,
}

pub fn sample<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> Result<FieldSample> {
    let psi = field.value(x);
    let cov_grad = covariant_gradient(field, x, method);
    let polar = extract_polar_fields(field, x, method)?;
    let conn = connection_from(&psi, &cov_grad, &polar).map_err(|e| e.at(x))?;
    Ok(FieldSample {
        point: *x,
        psi,
        cov_grad,
        polar,
        conn,
        background: field.background().clone(),
    })
}

pub fn extract_connections<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> Result<TensorialConnection> {
    Ok(sample(field, x, method)?.conn)
}
