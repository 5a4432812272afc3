//! Seeded battery of algebraic identities: Clifford relations, Fierz-type
//! bilinear relations, the polar round trip and its covariance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::CliffordBasis;
use crate::par;
use crate::sampling::{random_lorentz, random_regular_spinor};
use crate::spinor::{auxiliary_identities, bilinears, polar_decompose, polar_reconstruct};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub battery: usize,
    /// Sign applied to the Levi-Civita symbol in the basis checks; `-1` is a
    /// deliberately wrong convention used as a negative control.
    pub eps_sign: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            battery: 1000,
            eps_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        IdentityCheck {
            name,
            worst,
            tolerance,
            pass: worst <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub battery: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const BASIS_TOL: f64 = 1e-14;
pub const BATTERY_TOL: f64 = 1e-10;
const LIFT_TOL: f64 = 1e-12;

#[derive(Default, Clone, Copy)]
struct Worst {
    hodge: f64,
    norm_u: f64,
    norm_s: f64,
    orthogonal: f64,
    m_rec: f64,
    aux1: f64,
    aux2: f64,
    roundtrip: f64,
    covariance: f64,
    compat: f64,
}

impl Worst {
    fn merge(self, o: Worst) -> Worst {
        Worst {
            hodge: self.hodge.max(o.hodge),
            norm_u: self.norm_u.max(o.norm_u),
            norm_s: self.norm_s.max(o.norm_s),
            orthogonal: self.orthogonal.max(o.orthogonal),
            m_rec: self.m_rec.max(o.m_rec),
            aux1: self.aux1.max(o.aux1),
            aux2: self.aux2.max(o.aux2),
            roundtrip: self.roundtrip.max(o.roundtrip),
            covariance: self.covariance.max(o.covariance),
            compat: self.compat.max(o.compat),
        }
    }
}

pub fn run_suite(opts: &SuiteOptions) -> IdentityReport {
    let basis = CliffordBasis::get();
    let res = basis.residuals(opts.eps_sign);
    let mut checks = vec![
        IdentityCheck::new("anticommutator", res.anticommutator, BASIS_TOL),
        IdentityCheck::new("sigma_commutator", res.sigma_commutator, BASIS_TOL),
        IdentityCheck::new("duality", res.duality, BASIS_TOL),
        IdentityCheck::new("triple_product", res.triple_product, BASIS_TOL),
        IdentityCheck::new("basis_rank", (16 - res.gram_rank as i64).abs() as f64, 0.0),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let inputs: Vec<_> = (0..opts.battery)
        .map(|_| (random_regular_spinor(&mut rng), random_lorentz(&mut rng, 1.5)))
        .collect();
    let worst = par::map(&inputs, |(psi, pair)| {
        let fz = bilinears(psi).fierz_residuals();
        let (aux1, aux2) = auxiliary_identities(psi).unwrap_or((f64::INFINITY, f64::INFINITY));
        let roundtrip = polar_decompose(psi)
            .and_then(|pd| polar_reconstruct(&pd))
            .map(|r| (r - *psi).norm() / psi.norm())
            .unwrap_or(f64::INFINITY);
        let covariance = match (polar_decompose(psi), polar_decompose(&psi.transformed(&pair.spinorial()))) {
            (Ok(a), Ok(b)) => (pair.vector * a.u - b.u)
                .amax()
                .max((pair.vector * a.s - b.s).amax())
                / (1.0 + (pair.vector * a.u).amax()),
            _ => f64::INFINITY,
        };
        Worst {
            hodge: fz.hodge,
            norm_u: fz.norm_u,
            norm_s: fz.norm_s,
            orthogonal: fz.orthogonal,
            m_rec: fz.m_reconstruction,
            aux1,
            aux2,
            roundtrip,
            covariance,
            compat: pair.compatibility_residual().max(pair.metric_residual()),
        }
    })
    .into_iter()
    .fold(Worst::default(), Worst::merge);

    checks.extend([
        IdentityCheck::new("hodge_duality", worst.hodge, BATTERY_TOL),
        IdentityCheck::new("norm_u", worst.norm_u, BATTERY_TOL),
        IdentityCheck::new("norm_s", worst.norm_s, BATTERY_TOL),
        IdentityCheck::new("u_dot_s", worst.orthogonal, BATTERY_TOL),
        IdentityCheck::new("m_reconstruction", worst.m_rec, BATTERY_TOL),
        IdentityCheck::new("auxiliary_sigma", worst.aux1, BATTERY_TOL),
        IdentityCheck::new("auxiliary_gamma", worst.aux2, BATTERY_TOL),
        IdentityCheck::new("polar_roundtrip", worst.roundtrip, BATTERY_TOL),
        IdentityCheck::new("polar_covariance", worst.covariance, BATTERY_TOL),
        IdentityCheck::new("lift_compatibility", worst.compat, LIFT_TOL),
    ]);
    IdentityReport {
        seed: opts.seed,
        battery: opts.battery,
        checks,
    }
}
