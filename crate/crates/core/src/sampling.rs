//! Seeded random batteries: spinors, sample points, frames.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::clifford::{boost_lift, rotation_lift, LorentzPair};
use crate::spinor::{bilinears, Spinor, SINGULAR_THRESHOLD};
use crate::{Point, Vec4, C64};

/// Gaussian spinor, components with unit-variance real and imaginary parts.
pub fn random_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    let mut z = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    Spinor::new(z(), z(), z(), z())
}

/// Gaussian spinor conditioned on `Φ²+Θ²` being comfortably non-zero.
pub fn random_regular_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    loop {
        let psi = random_spinor(rng);
        let n = bilinears(&psi).scalar_norm();
        if n > 1e6 * SINGULAR_THRESHOLD && n > 1e-3 * psi.norm().powi(4) {
            return psi;
        }
    }
}

/// Uniform point in the box `[-extent, extent]⁴`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, extent: f64) -> Point {
    Point::from_fn(|_, _| rng.random_range(-extent..=extent))
}

pub fn random_points<R: Rng + ?Sized>(rng: &mut R, count: usize, extent: f64) -> Vec<Point> {
    (0..count).map(|_| random_point(rng, extent)).collect()
}

/// Random boost (rapidity up to `max_rapidity`) composed with a random rotation.
pub fn random_lorentz<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> LorentzPair {
    let mut v = |scale: f64| -> [f64; 3] {
        let raw: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        let mag = rng.random_range(0.0..scale);
        [raw[0] / n * mag, raw[1] / n * mag, raw[2] / n * mag]
    };
    let b = v(max_rapidity);
    let r = v(std::f64::consts::PI);
    boost_lift(b).compose(&rotation_lift(r))
}

/// Random `(u, s)` pair obeying `u·u = 1`, `s·s = −1`, `u·s = 0`.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> (Vec4, Vec4) {
    let l = random_lorentz(rng, max_rapidity);
    (
        l.vector * Vec4::new(1.0, 0.0, 0.0, 0.0),
        l.vector * Vec4::new(0.0, 0.0, 0.0, 1.0),
    )
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vec4 {
    Vec4::from_fn(|_, _| scale * rng.sample::<f64, _>(StandardNormal))
}
