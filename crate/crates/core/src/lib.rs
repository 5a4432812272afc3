//! Polar (hydrodynamic) form of the Dirac equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`] builds the chiral Clifford basis, the Levi-Civita symbol and
//!   the spinorial lifts of boosts and rotations.
//! * [`spinor`] computes bilinear covariants and the polar decomposition
//!   `ψ = φ e^{-iβπ/2} L⁻¹ (1,0,1,0)ᵀ` of single spinors.
//! * [`field`] holds spinor fields on flat spacetime (exact plane waves and
//!   their superpositions), finite differences, the Dirac residual and the
//!   extraction of the tensorial connections `P_μ`, `R_ijμ`.
//! * [`hydro`] evaluates the Gordon decompositions and the ten covariant
//!   hydrodynamic equations built on the vectors `E_μ`, `F_μ`.
//! * [`gauge`] reduces everything to the rest frame with spin along the third
//!   axis, where the ten equations collapse onto eight scalars, and enumerates
//!   the minimal covering equation sets.
//! * [`report`] drives scenario runs and produces CSV/JSON reports.
//!
//! All vectors and tensors are stored with upper (contravariant) indices in the
//! `(+,-,-,-)` signature; lowering is always explicit.

// Index loops mirror the tensor notation; `!(x > y)` is used on purpose to reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod clifford;
pub mod error;
pub mod field;
pub mod gauge;
pub mod hydro;
pub mod identities;
pub mod par;
pub mod report;
pub mod sampling;
pub mod spinor;
pub mod tensor;

pub use clifford::{boost_lift, levi_civita, rotation_lift, CliffordBasis, LorentzPair};
pub use error::{Error, Result};
pub use field::{
    Background, Branch, Derivative, GaugePotential, PlaneWave, SpinorField, Superposition,
    TensorialConnection,
};
pub use gauge::{CanonicalScalars, EquationSet, Scalar};
pub use hydro::{Equation, HydroPointState, ResidualSet};
pub use spinor::{Bilinears, PolarData, Spinor};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Complex 4×4 matrix acting on Dirac spinors.
pub type Mat4c = nalgebra::Matrix4<C64>;
/// Real four-vector, contravariant components `(v⁰, v¹, v², v³)`.
pub type Vec4 = nalgebra::Vector4<f64>;
/// Real 4×4 matrix: Lorentz transformations and rank-2 tensors.
pub type Mat4 = nalgebra::Matrix4<f64>;
/// Spacetime point `(t, x, y, z)`.
pub type Point = nalgebra::Vector4<f64>;
