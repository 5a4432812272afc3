//! Reduction to the unitary gauge (`u = e₀`, `s = e₃`), the eight canonical
//! scalar equations, and the combinatorics of minimal covering equation sets.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hydro::{equation_residuals, ten_equations, HydroPointState};
pub use crate::hydro::Equation;
use crate::spinor::rest_frame_map;
use crate::tensor::lower;
use crate::Vec4;

/// The eight scalar combinations the ten equations reduce to in the unitary gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scalar {
    F0,
    F1p2,
    F2m1,
    F3,
    E0p3,
    E1,
    E2,
    E3p0,
}

impl Scalar {
    pub const ALL: [Scalar; 8] = [
        Scalar::F0,
        Scalar::F1p2,
        Scalar::F2m1,
        Scalar::F3,
        Scalar::E0p3,
        Scalar::E1,
        Scalar::E2,
        Scalar::E3p0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scalar::F0 => "f0",
            Scalar::F1p2 => "f1p2",
            Scalar::F2m1 => "f2m1",
            Scalar::F3 => "f3",
            Scalar::E0p3 => "e0p3",
            Scalar::E1 => "e1",
            Scalar::E2 => "e2",
            Scalar::E3p0 => "e3p0",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const FULL_COVER: u8 = 0xff;

fn mask(scalars: &[Scalar]) -> u8 {
    scalars.iter().fold(0, |m, s| m | s.bit())
}

/// Canonical scalars touched by each equation in the unitary gauge.
pub fn footprint(eq: Equation) -> &'static [Scalar] {
    use Scalar::*;
    match eq {
        Equation::A1 => &[F0],
        Equation::A2 => &[E0p3],
        Equation::A3 => &[F1p2, F2m1, F3, E3p0, E2, E1],
        Equation::B1 => &[F3],
        Equation::B2 => &[E3p0],
        Equation::B3 => &[E2, E1, F0, E0p3, F1p2, F2m1],
        Equation::FM => &[E3p0, F2m1, F1p2, E0p3],
        Equation::CM => &[F3, E2, E1, F0],
        Equation::XF => &[F0, F1p2, F2m1, F3],
        Equation::XE => &[E0p3, E1, E2, E3p0],
    }
}

fn footprint_mask(eq: Equation) -> u8 {
    mask(footprint(eq))
}

/// A sub-collection of the ten equations, as a bitmask over [`Equation::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EquationSet(u16);

impl EquationSet {
    pub fn new(members: &[Equation]) -> Self {
        EquationSet(members.iter().fold(0, |m, e| m | (1 << e.index())))
    }

    pub fn from_bits(bits: u16) -> Self {
        EquationSet(bits & 0x3ff)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, eq: Equation) -> bool {
        self.0 & (1 << eq.index()) != 0
    }

    pub fn members(self) -> Vec<Equation> {
        Equation::ALL.into_iter().filter(|e| self.contains(*e)).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn without(self, eq: Equation) -> Self {
        EquationSet(self.0 & !(1 << eq.index()))
    }

    pub fn coverage(self) -> u8 {
        self.members().into_iter().fold(0, |m, e| m | footprint_mask(e))
    }

    pub fn covered(self) -> Vec<Scalar> {
        let c = self.coverage();
        Scalar::ALL.into_iter().filter(|s| c & s.bit() != 0).collect()
    }

    pub fn covers_all(self) -> bool {
        self.coverage() == FULL_COVER
    }

    /// Covers everything, and no member can be dropped without losing that.
    pub fn is_minimal(self) -> bool {
        self.covers_all() && self.members().into_iter().all(|e| !self.without(e).covers_all())
    }

    /// Total scalar components minus the eight needed.
    pub fn redundancy(self) -> Result<usize> {
        if !self.covers_all() {
            return Err(Error::NotACover(self.to_string()));
        }
        Ok(self.members().iter().map(|e| footprint(*e).len()).sum::<usize>() - 8)
    }
}

impl Ord for EquationSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members().cmp(&other.members())
    }
}

impl PartialOrd for EquationSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EquationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.members().iter().map(|e| e.name()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

impl FromStr for EquationSet {
    type Err = Error;

    /// Accepts `{A1,A2,A3}`, `A1,A2,A3`, `A1-A2-A3` or `A1+A2+A3`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut members = Vec::new();
        for tok in inner.split([',', '-', '+', ' ']).filter(|t| !t.is_empty()) {
            members.push(Equation::parse(tok).ok_or_else(|| Error::UnknownSet(s.to_string()))?);
        }
        if members.is_empty() {
            return Err(Error::UnknownSet(s.to_string()));
        }
        Ok(EquationSet::new(&members))
    }
}

impl Serialize for EquationSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.members().iter().map(|e| e.name()))
    }
}

/// The nineteen minimal sets as listed in the source, in that order.
pub fn catalog() -> &'static [EquationSet] {
    use std::sync::OnceLock;
    use Equation::*;
    static CATALOG: OnceLock<Vec<EquationSet>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let lists: [&[Equation]; 19] = [
            // exact groups
            &[A1, A2, A3],
            &[B1, B2, B3],
            &[FM, CM],
            &[XF, XE],
            // three redundant components
            &[A1, A3, FM],
            &[A2, A3, CM],
            &[A2, A3, XF],
            &[A1, A3, XE],
            &[B1, B3, FM],
            &[B2, B3, CM],
            &[B2, B3, XF],
            &[B1, B3, XE],
            // six
            &[A3, FM, XF],
            &[A3, CM, XE],
            &[B3, FM, XF],
            &[B3, CM, XE],
            // two
            &[A1, B1, FM, XE],
            &[A2, B2, CM, XF],
            // four
            &[A3, B3],
        ];
        lists.iter().map(|l| EquationSet::new(l)).collect()
    })
}

/// Look a set up in the catalog.
pub fn catalog_set(name: &str) -> Result<EquationSet> {
    let set: EquationSet = name.parse()?;
    if catalog().contains(&set) {
        Ok(set)
    } else {
        Err(Error::UnknownSet(name.to_string()))
    }
}

/// Redundancy of a catalog set given by name.
pub fn redundancy(name: &str) -> Result<usize> {
    catalog_set(name)?.redundancy()
}

/// All minimal covers among the 1023 non-empty sub-collections, sorted.
pub fn enumerate_minimal_sets() -> Vec<EquationSet> {
    let mut out: Vec<_> = (1u16..1 << 10)
        .map(EquationSet::from_bits)
        .filter(|s| s.is_minimal())
        .collect();
    out.sort();
    out
}

/// Histogram of redundancies, indexed by redundancy value.
pub fn redundancy_histogram(sets: &[EquationSet]) -> std::collections::BTreeMap<usize, usize> {
    let mut h = std::collections::BTreeMap::new();
    for s in sets {
        if let Ok(r) = s.redundancy() {
            *h.entry(r).or_insert(0) += 1;
        }
    }
    h
}

/// Transform every tensor of the state into the frame where `u = e₀`, `s = e₃`.
pub fn unitary_gauge(state: &HydroPointState) -> Result<HydroPointState> {
    let pair = rest_frame_map(&state.u, &state.s)?;
    Ok(state.transformed(&pair.vector))
}

/// The eight canonical scalars (covariant components).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalScalars {
    pub f0: f64,
    pub f1p2: f64,
    pub f2m1: f64,
    pub f3: f64,
    pub e0p3: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3p0: f64,
}

impl CanonicalScalars {
    fn from_vectors(e: &Vec4, f: &Vec4, p: &Vec4) -> Self {
        let (el, fl, pl) = (lower(e), lower(f), lower(p));
        CanonicalScalars {
            f0: fl[0],
            f1p2: fl[1] - pl[2],
            f2m1: fl[2] + pl[1],
            f3: fl[3],
            e0p3: el[0] + pl[3],
            e1: el[1],
            e2: el[2],
            e3p0: el[3] + pl[0],
        }
    }

    pub fn get(&self, s: Scalar) -> f64 {
        match s {
            Scalar::F0 => self.f0,
            Scalar::F1p2 => self.f1p2,
            Scalar::F2m1 => self.f2m1,
            Scalar::F3 => self.f3,
            Scalar::E0p3 => self.e0p3,
            Scalar::E1 => self.e1,
            Scalar::E2 => self.e2,
            Scalar::E3p0 => self.e3p0,
        }
    }

    pub fn values(&self) -> [f64; 8] {
        Scalar::ALL.map(|s| self.get(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Scalars whose size exceeds `tol · scale`.
    pub fn violated(&self, tol: f64, scale: f64) -> Vec<Scalar> {
        Scalar::ALL
            .into_iter()
            .filter(|s| self.get(*s).abs() > tol * scale)
            .collect()
    }
}

const GAUGE_TOL: f64 = 1e-6;

/// Evaluate the canonical scalars of a state already in the unitary gauge.
pub fn canonical_scalars(state: &HydroPointState) -> Result<CanonicalScalars> {
    let deviation = (state.u - Vec4::new(1.0, 0.0, 0.0, 0.0))
        .amax()
        .max((state.s - Vec4::new(0.0, 0.0, 0.0, 1.0)).amax());
    if deviation > GAUGE_TOL {
        return Err(Error::NotGauged { deviation });
    }
    Ok(CanonicalScalars::from_vectors(&state.e, &state.f, &state.conn.p))
}

/// Normalisation shared with the covariant residuals.
pub fn scalar_scale(state: &HydroPointState) -> f64 {
    state.background.mass.max(1.0) * (1.0 + state.conn.p.norm())
}

/// Outcome of checking one equation set at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetVerdict {
    pub set: EquationSet,
    pub pass: bool,
    pub norms: Vec<(Equation, f64)>,
    /// Canonical scalars in the set's footprint found violated.
    pub detected: Vec<Scalar>,
}

/// Evaluate only the members of `set`; pass iff every normalised norm ≤ `tol`.
pub fn verify_set(set: EquationSet, state: &HydroPointState, tol: f64) -> Result<SetVerdict> {
    if set.is_empty() {
        return Err(Error::UnknownSet(set.to_string()));
    }
    let res = equation_residuals(state);
    let norms: Vec<_> = set.members().into_iter().map(|e| (e, res.norm(e))).collect();
    let pass = norms.iter().all(|(_, n)| *n <= tol);
    let gauged = unitary_gauge(state)?;
    let scalars = canonical_scalars(&gauged)?;
    let coverage = set.coverage();
    let detected = scalars
        .violated(tol, scalar_scale(state))
        .into_iter()
        .filter(|s| coverage & s.bit() != 0)
        .collect();
    Ok(SetVerdict {
        set,
        pass,
        norms,
        detected,
    })
}

/// Look the set up by name first.
pub fn verify_named_set(name: &str, state: &HydroPointState, tol: f64) -> Result<SetVerdict> {
    verify_set(catalog_set(name)?, state, tol)
}

/// Footprints recovered numerically: in the unitary gauge, switch on one
/// canonical scalar at a time and record which equations respond. Also
/// returns the largest response to combinations that leave every canonical
/// scalar at zero (should vanish).
pub fn derive_footprints() -> ([u8; 10], f64) {
    let u = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let s = Vec4::new(0.0, 0.0, 0.0, 1.0);
    let mut fp = [0u8; 10];
    let basis = |k: usize| {
        let mut v = Vec4::zeros();
        v[k] = 1.0;
        crate::tensor::raise(&v)
    };
    for sc in Scalar::ALL {
        let (mut e, mut f) = (Vec4::zeros(), Vec4::zeros());
        match sc {
            Scalar::F0 => f = basis(0),
            Scalar::F1p2 => f = basis(1),
            Scalar::F2m1 => f = basis(2),
            Scalar::F3 => f = basis(3),
            Scalar::E0p3 => e = basis(0),
            Scalar::E1 => e = basis(1),
            Scalar::E2 => e = basis(2),
            Scalar::E3p0 => e = basis(3),
        }
        let r = ten_equations(&e, &f, &Vec4::zeros(), &u, &s);
        for eq in Equation::ALL {
            if r[eq.index()].iter().any(|c| c.abs() > 1e-12) {
                fp[eq.index()] |= sc.bit();
            }
        }
    }
    // P_μ together with the compensating E/F component: every scalar is zero.
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let p = basis(k);
        let (mut e, mut f) = (Vec4::zeros(), Vec4::zeros());
        match k {
            0 => e = -basis(3),
            1 => f = -basis(2),
            2 => f = basis(1),
            _ => e = -basis(0),
        }
        debug_assert!(CanonicalScalars::from_vectors(&e, &f, &p).max_abs() < 1e-15);
        for c in ten_equations(&e, &f, &p, &u, &s).iter().flatten() {
            worst = worst.max(c.abs());
        }
    }
    (fp, worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{plane_wave, superpose, Background, Branch, Derivative, WithBackground};
    use crate::{Point, C64};
    use Equation::*;

    fn state(mass_factor: f64) -> HydroPointState {
        let bg = Background::free(1.0)
            .with_potential(0.5, Vec4::new(0.1, 0.2, -0.1, 0.0))
            .with_torsion(Vec4::new(0.05, -0.1, 0.2, 0.1), 1.0);
        let a = plane_wave([0.3, 0.1, -0.2], Branch::SpinUp, &bg).unwrap();
        let b = plane_wave([-0.2, 0.4, 0.3], Branch::SpinDown, &bg).unwrap();
        let f = WithBackground {
            inner: superpose(vec![a, b], &[C64::new(1.0, 0.0), C64::new(0.4, -0.5)]).unwrap(),
            background: bg.clone().with_mass(mass_factor),
        };
        HydroPointState::at(&f, &Point::new(0.2, -0.3, 0.4, 0.1), Derivative::Exact).unwrap()
    }

    #[test]
    fn redundancy_examples() {
        assert_eq!(redundancy("{A1,A2,A3}").unwrap(), 0);
        assert_eq!(redundancy("A1,B1,FM,XE").unwrap(), 2);
        assert_eq!(redundancy("A3-B3").unwrap(), 4);
        assert_eq!(redundancy("A3+FM+XF").unwrap(), 6);
        assert!(matches!(EquationSet::new(&[A1, A2]).redundancy(), Err(Error::NotACover(_))));
        assert!(matches!(redundancy("A1,B1,A3,B3"), Err(Error::UnknownSet(_))));
        assert!(matches!(redundancy("Q7"), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn enumeration_matches_catalog() {
        let found = enumerate_minimal_sets();
        let mut cat = catalog().to_vec();
        cat.sort();
        assert_eq!(found, cat);
        let pairs: Vec<_> = found.iter().filter(|s| s.len() == 2).copied().collect();
        assert_eq!(
            pairs,
            vec![EquationSet::new(&[A3, B3]), EquationSet::new(&[FM, CM]), EquationSet::new(&[XF, XE])]
        );
        let hist = redundancy_histogram(&found);
        assert_eq!(hist.into_iter().collect::<Vec<_>>(), vec![(0, 4), (2, 2), (3, 8), (4, 1), (6, 4)]);
        let non_minimal = EquationSet::new(&[A1, B1, A3, B3]);
        assert!(non_minimal.covers_all() && !non_minimal.is_minimal());
    }

    #[test]
    fn sets_sort_lexicographically() {
        let a = EquationSet::new(&[A1, A2, A3]);
        let b = EquationSet::new(&[A1, A3, FM]);
        let c = EquationSet::new(&[A3, B3]);
        assert!(a < b && b < c);
        assert_eq!(a.to_string(), "{A1,A2,A3}");
    }

    #[test]
    fn numerical_footprints_agree_with_table() {
        let (fp, leak) = derive_footprints();
        for eq in Equation::ALL {
            assert_eq!(fp[eq.index()], footprint_mask(eq), "{eq}");
        }
        assert!(leak < 1e-15);
    }

    #[test]
    fn unitary_gauge_is_canonical() {
        let st = state(1.0);
        let g = unitary_gauge(&st).unwrap();
        assert!((g.u - Vec4::new(1.0, 0.0, 0.0, 0.0)).amax() < 1e-10);
        assert!((g.s - Vec4::new(0.0, 0.0, 0.0, 1.0)).amax() < 1e-10);
        assert_eq!((g.phi2, g.beta), (st.phi2, st.beta));
        let sc = canonical_scalars(&g).unwrap();
        assert!(sc.max_abs() < 1e-10);
        assert!(matches!(canonical_scalars(&st), Err(Error::NotGauged { .. })));
    }

    #[test]
    fn off_shell_scalars() {
        let st = state(1.1);
        let g = unitary_gauge(&st).unwrap();
        let sc = canonical_scalars(&g).unwrap();
        let a1 = equation_residuals(&g).get(A1).components[0];
        assert!((sc.f0 - a1).abs() < 1e-10);
        assert_eq!(sc.violated(1e-3, scalar_scale(&st)), vec![Scalar::F3, Scalar::E3p0]);
    }

    #[test]
    fn verdicts_on_and_off_shell() {
        let on = state(1.0);
        let off = state(1.1);
        for &set in catalog() {
            assert!(verify_set(set, &on, 1e-5).unwrap().pass, "{set}");
            let v = verify_set(set, &off, 1e-3).unwrap();
            assert!(!v.pass && !v.detected.is_empty(), "{set}");
        }
        // a non-covering set misses violations outside its footprint
        let lone = verify_set(EquationSet::new(&[A1]), &off, 1e-3).unwrap();
        assert!(lone.pass && lone.detected.is_empty());
        assert!(matches!(verify_named_set("A1", &off, 1e-3), Err(Error::UnknownSet(_))));
    }
}
