//! The auxiliary vectors `E_μ`, `F_μ`, the Gordon decompositions in spinorial
//! and polar form, and the ten covariant hydrodynamic equations.

use std::fmt;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordBasis;
use crate::error::{Error, Result};
use crate::field::{sample, Background, Derivative, FieldSample, PolarPoint, SpinorField, TensorialConnection};
use crate::spinor::{bilinears, Spinor};
use crate::tensor::{epsilon_terms, lower, Rank3, METRIC, PAIRS};
use crate::{Mat4, Mat4c, Point, Vec4, C64};

/// The ten covariant equations, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Equation {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
    FM,
    CM,
    XF,
    XE,
}

impl Equation {
    pub const ALL: [Equation; 10] = [
        Equation::A1,
        Equation::A2,
        Equation::A3,
        Equation::B1,
        Equation::B2,
        Equation::B3,
        Equation::FM,
        Equation::CM,
        Equation::XF,
        Equation::XE,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Equation::A1 => "A1",
            Equation::A2 => "A2",
            Equation::A3 => "A3",
            Equation::B1 => "B1",
            Equation::B2 => "B2",
            Equation::B3 => "B3",
            Equation::FM => "FM",
            Equation::CM => "CM",
            Equation::XF => "XF",
            Equation::XE => "XE",
        }
    }

    /// Number of independent components.
    pub fn dim(self) -> usize {
        match self {
            Equation::A1 | Equation::A2 | Equation::B1 | Equation::B2 => 1,
            Equation::A3 | Equation::B3 => 6,
            _ => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Equation> {
        Equation::ALL.into_iter().find(|e| e.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything the hydrodynamic equations need at one point. Vectors are
/// stored with upper indices.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroPointState {
    pub phi2: f64,
    pub beta: f64,
    pub u: Vec4,
    pub s: Vec4,
    pub grad_beta: Vec4,
    pub grad_log_phi2: Vec4,
    pub conn: TensorialConnection,
    pub e: Vec4,
    pub f: Vec4,
    pub background: Background,
}

impl HydroPointState {
    pub fn assemble(polar: &PolarPoint, conn: TensorialConnection, bg: &Background) -> Self {
        let (e, f) = ef_vectors(polar, &conn, bg);
        HydroPointState {
            phi2: polar.phi2,
            beta: polar.beta,
            u: polar.u,
            s: polar.s,
            grad_beta: polar.grad_beta,
            grad_log_phi2: polar.grad_log_phi2,
            conn,
            e,
            f,
            background: bg.clone(),
        }
    }

    pub fn from_sample(smp: &FieldSample) -> Self {
        Self::assemble(&smp.polar, smp.conn, &smp.background)
    }

    pub fn at<F: SpinorField + ?Sized>(field: &F, x: &Point, method: Derivative) -> Result<Self> {
        Ok(Self::from_sample(&sample(field, x, method)?))
    }

    /// Same point with a different (equivalent) connection; `E`, `F` recomputed.
    pub fn with_connection(&self, conn: TensorialConnection) -> Self {
        let mut out = self.clone();
        out.conn = conn;
        let (e, f) = ef_from(
            self.beta,
            &self.s,
            &self.grad_beta,
            &self.grad_log_phi2,
            &conn,
            &self.background,
        );
        out.e = e;
        out.f = f;
        out
    }

    /// Apply a global Lorentz transformation to every vector and tensor.
    pub fn transformed(&self, lambda: &Mat4) -> Self {
        let mut bg = self.background.clone();
        bg.torsion = lambda * bg.torsion;
        HydroPointState {
            phi2: self.phi2,
            beta: self.beta,
            u: lambda * self.u,
            s: lambda * self.s,
            grad_beta: lambda * self.grad_beta,
            grad_log_phi2: lambda * self.grad_log_phi2,
            conn: self.conn.transformed(lambda),
            e: lambda * self.e,
            f: lambda * self.f,
            background: bg,
        }
    }

    fn scale(&self) -> f64 {
        self.background.mass.max(1.0) * (1.0 + self.conn.p.norm())
    }
}

fn ef_from(
    beta: f64,
    s: &Vec4,
    grad_beta: &Vec4,
    grad_log_phi2: &Vec4,
    conn: &TensorialConnection,
    bg: &Background,
) -> (Vec4, Vec4) {
    let m = bg.mass;
    let e = (conn.b - bg.torsion * (2.0 * bg.coupling) + grad_beta + s * (2.0 * m * beta.cos())) * 0.5;
    let f = (conn.rtrace + grad_log_phi2 + s * (2.0 * m * beta.sin())) * 0.5;
    (e, f)
}

/// `2E = B − 2XW + ∇β + 2ms cosβ`, `2F = R + ∇lnφ² + 2ms sinβ` (upper indices).
pub fn ef_vectors(polar: &PolarPoint, conn: &TensorialConnection, bg: &Background) -> (Vec4, Vec4) {
    ef_from(polar.beta, &polar.s, &polar.grad_beta, &polar.grad_log_phi2, conn, bg)
}

/// One named residual: raw independent components and a normalised size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub components: Vec<f64>,
    pub norm: f64,
}

impl Residual {
    fn new(name: &'static str, components: Vec<f64>, scale: f64) -> Self {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt() / scale;
        Residual {
            name,
            components,
            norm,
        }
    }
}

fn upper_pairs(t: &Mat4) -> Vec<f64> {
    PAIRS.iter().map(|&(i, j)| t[(i, j)]).collect()
}

/// The ten covariant equations at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSet {
    entries: Vec<Residual>,
}

impl ResidualSet {
    pub fn get(&self, eq: Equation) -> &Residual {
        &self.entries[eq.index()]
    }

    pub fn norm(&self, eq: Equation) -> f64 {
        self.get(eq).norm
    }

    pub fn iter(&self) -> impl Iterator<Item = (Equation, &Residual)> {
        Equation::ALL.into_iter().zip(self.entries.iter())
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|r| r.norm).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ResidualSet) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .flat_map(|(a, b)| a.components.iter().zip(&b.components).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Evaluate the ten equations from `(E, F, P, u, s)` alone.
pub fn ten_equations(e: &Vec4, f: &Vec4, p: &Vec4, u: &Vec4, s: &Vec4) -> [Vec<f64>; 10] {
    let (el, fl, pl) = (lower(e), lower(f), lower(p));
    let (ul, sl) = (lower(u), lower(s));
    let fu = fl.dot(u);
    let eu = el.dot(u);
    let fs = fl.dot(s);
    let es = el.dot(s);
    let pu = pl.dot(u);
    let ps = pl.dot(s);

    // ε^{anmr} X_m Y_r
    let eps_xy = |x: &Vec4, y: &Vec4| {
        let mut t = Mat4::zeros();
        for &([a, n, m, r], sign) in epsilon_terms() {
            t[(a, n)] += sign * x[m] * y[r];
        }
        t
    };
    let wedge = |x: &Vec4, y: &Vec4| x * y.transpose() - y * x.transpose();

    let a3 = eps_xy(&el, &ul) + wedge(f, u) + eps_xy(&pl, &sl);
    let b3 = eps_xy(&el, &sl) + wedge(f, s) + eps_xy(&pl, &ul);

    // ε^{jkma} X_m u_j s_k
    let eps_us = |x: &Vec4| {
        let mut v = Vec4::zeros();
        for &([j, k, m, a], sign) in epsilon_terms() {
            v[a] += sign * x[m] * ul[j] * sl[k];
        }
        v
    };
    let fm = eps_us(&fl) + s * eu - u * es - p;
    let cm = s * fu - u * fs - eps_us(&el);
    // F_m − ε_{mrna} P^r u^n s^a
    let mut xf = fl;
    for &([m, r, n, a], sign) in epsilon_terms() {
        xf[m] -= -sign * p[r] * u[n] * s[a];
    }
    let xe = el - (sl * pu - ul * ps);

    [
        vec![fu],
        vec![eu + ps],
        upper_pairs(&a3),
        vec![fs],
        vec![es + pu],
        upper_pairs(&b3),
        fm.iter().copied().collect(),
        cm.iter().copied().collect(),
        xf.iter().copied().collect(),
        xe.iter().copied().collect(),
    ]
}

/// All ten equations, normalised by `max(1, m)(1 + ‖P‖)`.
pub fn equation_residuals(state: &HydroPointState) -> ResidualSet {
    let raw = ten_equations(&state.e, &state.f, &state.conn.p, &state.u, &state.s);
    let scale = state.scale();
    ResidualSet {
        entries: Equation::ALL
            .into_iter()
            .zip(raw)
            .map(|(eq, c)| Residual::new(eq.name(), c, scale))
            .collect(),
    }
}

/// The diagonalised pair (lower index); on shell equal to `2·XE` and `2·XF`.
pub fn diagonalized_residuals(state: &HydroPointState) -> (Vec4, Vec4) {
    let bg = &state.background;
    let m = bg.mass;
    let (ul, sl) = (lower(&state.u), lower(&state.s));
    let p = state.conn.p;
    let pl = lower(&p);
    let kd = sl * pl.dot(&state.u) - ul * pl.dot(&state.s);
    let d1 = lower(&state.grad_beta) - lower(&bg.torsion) * (2.0 * bg.coupling) + lower(&state.conn.b)
        - kd * 2.0
        + sl * (2.0 * m * state.beta.cos());
    let mut eps_pus = Vec4::zeros();
    for &([mm, r, n, a], sign) in epsilon_terms() {
        eps_pus[mm] += -sign * p[r] * state.u[n] * state.s[a];
    }
    let d2 = lower(&state.grad_log_phi2) + lower(&state.conn.rtrace) - eps_pus * 2.0
        + sl * (2.0 * m * state.beta.sin());
    (d1, d2)
}

/// Normalised sizes of the diagonalised pair.
pub fn diagonalized_norms(state: &HydroPointState) -> (f64, f64) {
    let (d1, d2) = diagonalized_residuals(state);
    let scale = state.scale();
    (d1.norm() / scale, d2.norm() / scale)
}

/// Given `(u, s, P)`, solve the forward-momentum and complementary equations
/// for `(E, F)` (upper indices).
pub fn implication_solver(u: &Vec4, s: &Vec4, p: &Vec4) -> Result<(Vec4, Vec4)> {
    let tol = 1e-9;
    let uu = crate::tensor::dot(u, u);
    let ss = crate::tensor::dot(s, s);
    let us = crate::tensor::dot(u, s);
    if (uu - 1.0).abs() > tol || (ss + 1.0).abs() > tol || us.abs() > tol {
        return Err(Error::SingularSystem(format!(
            "frame constraints violated: u·u={uu}, s·s={ss}, u·s={us}"
        )));
    }
    let (ul, sl) = (lower(u), lower(s));
    // unknowns x = (E_0..E_3, F_0..F_3)
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut rhs = SVector::<f64, 8>::zeros();
    for &([j, k, m, row], sign) in epsilon_terms() {
        let w = sign * ul[j] * sl[k];
        a[(row, 4 + m)] += w; // FM: ε F u s
        a[(4 + row, m)] -= w; // CM: −ε E u s
    }
    for row in 0..4 {
        for m in 0..4 {
            a[(row, m)] += s[row] * u[m] - u[row] * s[m];
            a[(4 + row, 4 + m)] += s[row] * u[m] - u[row] * s[m];
        }
        rhs[row] = p[row];
    }
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("forward/complementary system is singular".into()))?;
    let e = Vec4::new(x[0], x[1], x[2], x[3]);
    let f = Vec4::new(x[4], x[5], x[6], x[7]);
    Ok((crate::tensor::raise(&e), crate::tensor::raise(&f)))
}

/// Which rendering of the Gordon decompositions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GordonForm {
    Spinorial,
    Polar,
}

/// Names of the ten Gordon decompositions.
pub const GORDON_NAMES: [&str; 10] = [
    "div_u", "l_odd", "curl_u", "div_s", "l_even", "curl_s", "vr", "ai", "vi", "ar",
];

/// The ten Gordon decompositions at one point, normalised by `m·2φ²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GordonResiduals {
    pub entries: Vec<Residual>,
}

impl GordonResiduals {
    fn build(raw: [Vec<f64>; 10], scale: f64) -> Self {
        GordonResiduals {
            entries: GORDON_NAMES
                .iter()
                .zip(raw)
                .map(|(n, c)| Residual::new(n, c, scale))
                .collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|r| r.norm).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.name == name)
    }

    /// Largest componentwise difference, normalised like the entries.
    pub fn max_diff(&self, other: &GordonResiduals) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let d: f64 = a
                    .components
                    .iter()
                    .zip(&b.components)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                let scale = if a.norm > 0.0 {
                    a.components.iter().map(|c| c * c).sum::<f64>().sqrt() / a.norm
                } else if b.norm > 0.0 {
                    b.components.iter().map(|c| c * c).sum::<f64>().sqrt() / b.norm
                } else {
                    1.0
                };
                d.sqrt() / scale
            })
            .fold(0.0, f64::max)
    }
}

fn gordon_scale(bg: &Background, phi2: f64) -> f64 {
    let m = if bg.mass > 0.0 { bg.mass } else { 1.0 };
    m * 2.0 * phi2
}

fn vec4(v: Vec4) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Gordon decompositions straight from `ψ` and `∇_μψ`.
pub fn gordon_spinorial(psi: &Spinor, grad: &[Spinor; 4], bg: &Background) -> Result<GordonResiduals> {
    let basis = CliffordBasis::get();
    let bil = bilinears(psi);
    let n2 = bil.scalar_norm();
    if !(n2 >= crate::spinor::SINGULAR_THRESHOLD) {
        return Err(Error::SingularSpinor { norm: n2 });
    }
    let (m, x) = (bg.mass, bg.coupling);
    let wl = lower(&bg.torsion);
    let pi = basis.pi();
    let pb = psi.adjoint();
    let db: [_; 4] = std::array::from_fn(|mu| grad[mu].adjoint());
    // ∇^μψ
    let gu: [_; 4] = std::array::from_fn(|mu| grad[mu].0 * C64::new(METRIC[mu], 0.0));
    let dbu: [_; 4] = std::array::from_fn(|mu| db[mu] * C64::new(METRIC[mu], 0.0));
    let sw = |l: &nalgebra::RowVector4<C64>, mat: &Mat4c, r: &nalgebra::Vector4<C64>| (l * mat * r)[(0, 0)];
    let id = Mat4c::identity();
    // ∇_μ of a bilinear ψ̄Γψ
    let d = |mu: usize, g: &Mat4c| sw(&db[mu], g, &psi.0) + sw(&pb, g, &grad[mu].0);

    let (u, s, mm) = (bil.u, bil.s, bil.m);
    let (ul, sl) = (lower(&u), lower(&s));
    let ml = crate::tensor::lower2(&mm);

    let mut du = Mat4::zeros(); // [μ, a] = ∇_μ U^a
    let mut ds = Mat4::zeros();
    let mut dm = Rank3::zeros(); // (a, b, μ) = ∇_μ M^{ab}
    let mut dphi = Vec4::zeros();
    let mut dtheta = Vec4::zeros();
    for mu in 0..4 {
        for a in 0..4 {
            du[(mu, a)] = d(mu, basis.gamma(a)).re;
            ds[(mu, a)] = d(mu, &(basis.gamma(a) * pi)).re;
            for b in 0..4 {
                dm.set(a, b, mu, (d(mu, basis.sigma(a, b)) * C64::new(0.0, 2.0)).re);
            }
        }
        dphi[mu] = d(mu, &id).re;
        dtheta[mu] = (d(mu, pi) * C64::i()).re;
    }
    let raise_first = |t: &Mat4| Mat4::from_fn(|i, j| METRIC[i] * t[(i, j)]);
    let du_up = raise_first(&du);
    let ds_up = raise_first(&ds);

    let div_u = du.trace();
    let mut l_odd = 0.0;
    let mut l_even = 0.0;
    for mu in 0..4 {
        let g = basis.gamma(mu);
        l_odd += (C64::new(0.0, 0.5) * (sw(&pb, &(g * pi), &grad[mu].0) - sw(&db[mu], &(g * pi), &psi.0))).re;
        l_even += (C64::new(0.0, 0.5) * (sw(&pb, g, &grad[mu].0) - sw(&db[mu], g, &psi.0))).re;
    }
    l_odd -= wl.dot(&u);
    l_even -= wl.dot(&s) + m * bil.phi;

    // T[μ, ρ] = ψ̄γ_ρπ∇_μψ − ∇_μψ̄γ_ρπψ
    let t = nalgebra::Matrix4::<C64>::from_fn(|mu, rho| {
        let g = basis.gamma_lower(rho) * pi;
        sw(&pb, &g, &grad[mu].0) - sw(&db[mu], &g, &psi.0)
    });
    let mut curl_u = du_up - du_up.transpose() - mm * (2.0 * m);
    let mut curl_s = Mat4::zeros();
    for &([a, n, mu, r], e) in epsilon_terms() {
        curl_u[(a, n)] += (C64::i() * t[(mu, r)]).re * e - 2.0 * x * e * wl[mu] * ul[r];
        // ε_{μran}∇^μS^r
        curl_s[(a, n)] += -e * ds_up[(mu, r)];
    }
    for a in 0..4 {
        for n in 0..4 {
            let (ga, gn) = (basis.gamma_lower(a), basis.gamma_lower(n));
            let tc = sw(&pb, ga, &grad[n].0) - sw(&pb, gn, &grad[a].0)
                - (sw(&db[n], ga, &psi.0) - sw(&db[a], gn, &psi.0));
            curl_s[(a, n)] += (C64::i() * tc).re + 2.0 * x * (wl[a] * sl[n] - wl[n] * sl[a]);
        }
    }
    let div_s = ds.trace() - 2.0 * m * bil.theta;

    let mut vr = Vec4::zeros();
    let mut ai = Vec4::zeros();
    let mut vi = Vec4::zeros();
    let mut ar = Vec4::zeros();
    for a in 0..4 {
        vr[a] = (C64::i() * (sw(&pb, &id, &gu[a]) - sw(&dbu[a], &id, &psi.0))).re - 2.0 * m * u[a];
        ai[a] = (sw(&db[a], pi, &psi.0) - sw(&pb, pi, &grad[a].0)).re;
        vi[a] = dphi[a] + 2.0 * x * bil.theta * wl[a];
        ar[a] = dtheta[a] - 2.0 * x * bil.phi * wl[a] + 2.0 * m * sl[a];
        for mu in 0..4 {
            vr[a] -= dm.get(mu, a, mu);
            ai[a] += 2.0 * x * bg.torsion[mu] * ml[(mu, a)];
            let sig = basis.sigma_lower(mu, a);
            vi[a] -= 2.0 * (sw(&pb, sig, &gu[mu]) - sw(&dbu[mu], sig, &psi.0)).re;
            let sp = sig * pi;
            ar[a] -= (C64::new(0.0, 2.0) * (sw(&pb, &sp, &gu[mu]) - sw(&dbu[mu], &sp, &psi.0))).re;
        }
    }
    for &([mu, nn, sg, a], e) in epsilon_terms() {
        vr[a] -= x * wl[sg] * ml[(mu, nn)] * e;
    }
    for &([r, sg, mu, a], e) in epsilon_terms() {
        // −½ ε_{rsμa} ∇^μ M^{rs}
        ai[a] -= 0.5 * (-e) * METRIC[mu] * dm.get(r, sg, mu);
    }

    Ok(GordonResiduals::build(
        [
            vec![div_u],
            vec![l_odd],
            upper_pairs(&curl_u),
            vec![div_s],
            vec![l_even],
            upper_pairs(&curl_s),
            vec4(vr),
            vec4(ai),
            vec4(vi),
            vec4(ar),
        ],
        gordon_scale(bg, bil.scalar_norm().sqrt() / 2.0),
    ))
}

/// Gordon decompositions rewritten in the polar variables, with frame
/// derivatives taken through `∇_μ s_i = R_{jiμ}s^j` (and likewise for `u`).
pub fn gordon_polar(state: &HydroPointState) -> GordonResiduals {
    let bg = &state.background;
    let (m, x) = (bg.mass, bg.coupling);
    let wl = lower(&bg.torsion);
    let (u, s) = (state.u, state.s);
    let (ul, sl) = (lower(&u), lower(&s));
    let two_phi2 = 2.0 * state.phi2;
    let (c, sn) = (state.beta.cos(), state.beta.sin());
    let (ph, th) = (two_phi2 * c, two_phi2 * sn);
    let (uu, ss) = (u * two_phi2, s * two_phi2);
    let (uul, ssl) = (ul * two_phi2, sl * two_phi2);
    let gb = lower(&state.grad_beta);
    let glp = lower(&state.grad_log_phi2);
    let p = state.conn.p;
    let pl = lower(&p);
    let ru = &state.conn.r;
    let rl = ru.lowered();
    let b_l = lower(&state.conn.b);
    let rt_l = lower(&state.conn.rtrace);

    // [μ, i] = ∇_μ u_i, ∇_μ s_i
    let mut du_l = Mat4::zeros();
    let mut ds_l = Mat4::zeros();
    for mu in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                du_l[(mu, i)] += rl.get(j, i, mu) * u[j];
                ds_l[(mu, i)] += rl.get(j, i, mu) * s[j];
            }
        }
    }
    let raise_second = |t: &Mat4| Mat4::from_fn(|i, j| t[(i, j)] * METRIC[j]);
    let raise_both = |t: &Mat4| Mat4::from_fn(|i, j| METRIC[i] * t[(i, j)] * METRIC[j]);
    let du_u = raise_second(&du_l);
    let ds_u = raise_second(&ds_l);
    // ∇_μ U^a, ∇_μ S^a
    let d_uu = Mat4::from_fn(|mu, a| two_phi2 * (glp[mu] * u[a] + du_u[(mu, a)]));
    let d_ss = Mat4::from_fn(|mu, a| two_phi2 * (glp[mu] * s[a] + ds_u[(mu, a)]));

    // N_ab = ε_{jkab}u^j s^k, K_ab = u_[a s_b]
    let mut n_l = Mat4::zeros();
    let mut dn = [Mat4::zeros(); 4];
    for &([j, k, a, b], e) in epsilon_terms() {
        let e = -e;
        n_l[(a, b)] += e * u[j] * s[k];
        for mu in 0..4 {
            dn[mu][(a, b)] += e * (du_u[(mu, j)] * s[k] + u[j] * ds_u[(mu, k)]);
        }
    }
    let k_l = ul * sl.transpose() - sl * ul.transpose();
    let dph = glp * ph - gb * th;
    let dth = glp * th + gb * ph;
    let ml = n_l * ph + k_l * th;
    let mu_up = raise_both(&ml);
    let dml: [Mat4; 4] = std::array::from_fn(|mu| {
        let dk = du_l.row(mu).transpose() * sl.transpose() + ul * ds_l.row(mu);
        let dk = dk - dk.transpose();
        n_l * dph[mu] + dn[mu] * ph + k_l * dth[mu] + dk * th
    });
    let dmu: [Mat4; 4] = std::array::from_fn(|mu| raise_both(&dml[mu]));
    // Σ^{ij} = −½ ε^{abij}M_ab and its derivative in lower form
    let mut sg_u = Mat4::zeros();
    let mut dsg_l = [Mat4::zeros(); 4];
    for &([a, b, i, j], e) in epsilon_terms() {
        sg_u[(i, j)] += -0.5 * e * ml[(a, b)];
        for mu in 0..4 {
            dsg_l[mu][(i, j)] += -0.5 * (-e) * dmu[mu][(a, b)];
        }
    }
    let sg_l = raise_both(&sg_u); // η applied twice lowers as well

    let cvec = gb - wl * (2.0 * x) + b_l;
    let div_u = d_uu.trace();
    let l_odd = cvec.dot(&uu) + 2.0 * pl.dot(&ss);
    let div_s = d_ss.trace() - 2.0 * m * th;
    let l_even = 0.5 * (cvec.dot(&ss) + 2.0 * pl.dot(&uu) - 2.0 * m * ph);

    let raise_first = |t: &Mat4| Mat4::from_fn(|i, j| METRIC[i] * t[(i, j)]);
    let du_up = raise_first(&d_uu);
    let ds_up = raise_first(&d_ss);
    let gw = gb - wl * (2.0 * x);
    // Q_{m r}(V) = R^{ij}_m ε_{ijrk} V^k
    let q = |v: &Vec4| {
        let mut out = Mat4::zeros();
        for &([i, j, r, k], e) in epsilon_terms() {
            for mm in 0..4 {
                out[(mm, r)] += rl.get(i, j, mm) * METRIC[i] * METRIC[j] * (-e) * v[k];
            }
        }
        out
    };
    let (qu, qs) = (q(&uu), q(&ss));
    let mut curl_u = du_up - du_up.transpose() - mu_up * (2.0 * m);
    let mut curl_s = ds_up - ds_up.transpose();
    for &([a, n, mm, r], e) in epsilon_terms() {
        curl_u[(a, n)] += e * (gw[mm] * uul[r] - 0.5 * qu[(mm, r)] + 2.0 * pl[mm] * ssl[r]);
        curl_s[(a, n)] += e * (gw[mm] * ssl[r] - 0.5 * qs[(mm, r)] + 2.0 * pl[mm] * uul[r]);
    }

    let mut vr = Vec4::zeros();
    let mut ai = Vec4::zeros();
    let mut vi = Vec4::zeros();
    let mut ar = Vec4::zeros();
    for a in 0..4 {
        vr[a] = -2.0 * p[a] * ph + 2.0 * m * uu[a];
        ai[a] = 2.0 * pl[a] * th;
        vi[a] = dph[a] + (2.0 * x * wl[a] - b_l[a]) * th + rt_l[a] * ph;
        ar[a] = dth[a] - (2.0 * x * wl[a] - b_l[a]) * ph + rt_l[a] * th + 2.0 * m * ssl[a];
        for mm in 0..4 {
            vr[a] += dmu[mm][(mm, a)] - 2.0 * x * wl[mm] * sg_u[(mm, a)];
            ai[a] += METRIC[mm] * dsg_l[mm][(mm, a)] + 2.0 * x * bg.torsion[mm] * ml[(mm, a)];
            vi[a] += 2.0 * p[mm] * ml[(mm, a)];
            ar[a] -= 2.0 * p[mm] * sg_l[(mm, a)];
            for j in 0..4 {
                vr[a] += 0.5 * ru.get(mm, j, a) * ml[(mm, j)];
                ai[a] += 0.5 * rl.get(mm, j, a) * sg_u[(mm, j)];
            }
        }
    }
    let vr = -vr;

    GordonResiduals::build(
        [
            vec![div_u],
            vec![l_odd],
            upper_pairs(&curl_u),
            vec![div_s],
            vec![l_even],
            upper_pairs(&curl_s),
            vec4(vr),
            vec4(ai),
            vec4(vi),
            vec4(ar),
        ],
        gordon_scale(bg, state.phi2),
    )
}

/// Both Gordon renderings at `x`.
pub fn gordon_residuals<F: SpinorField + ?Sized>(
    field: &F,
    x: &Point,
    form: GordonForm,
    method: Derivative,
) -> Result<GordonResiduals> {
    let smp = sample(field, x, method)?;
    Ok(match form {
        GordonForm::Spinorial => gordon_spinorial(&smp.psi, &smp.cov_grad, &smp.background)?,
        GordonForm::Polar => gordon_polar(&HydroPointState::from_sample(&smp)),
    })
}

/// Everything hydrodynamic evaluated at one sample.
#[derive(Debug, Clone)]
pub struct HydroReport {
    pub state: HydroPointState,
    pub spinorial: GordonResiduals,
    pub polar: GordonResiduals,
    pub diagonal: (f64, f64),
    pub equations: ResidualSet,
}

pub fn evaluate(smp: &FieldSample) -> Result<HydroReport> {
    let state = HydroPointState::from_sample(smp);
    let spinorial = gordon_spinorial(&smp.psi, &smp.cov_grad, &smp.background).map_err(|e| e.at(&smp.point))?;
    let polar = gordon_polar(&state);
    let diagonal = diagonalized_norms(&state);
    let equations = equation_residuals(&state);
    Ok(HydroReport {
        state,
        spinorial,
        polar,
        diagonal,
        equations,
    })
}
