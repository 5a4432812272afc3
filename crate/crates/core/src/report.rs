//! Scenario-driven verification runs and their CSV/JSON reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{
    dirac_residual_from, plane_wave, sample, superpose, Background, Branch, Derivative, PlaneWave,
    Superposition, WithBackground, DEFAULT_STEP,
};
use crate::gauge::{
    canonical_scalars, catalog, enumerate_minimal_sets, footprint, redundancy_histogram,
    scalar_scale, unitary_gauge, Equation, EquationSet, Scalar,
};
use crate::hydro::{evaluate, GORDON_NAMES};
use crate::identities::{run_suite, IdentityReport, SuiteOptions};
use crate::sampling::random_points;
use crate::{par, Point, Vec4, C64};

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    IdentityFailure = 1,
    ConfigError = 2,
    NumericalFailure = 3,
}

impl Outcome {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of(err: &Error) -> Outcome {
        if err.is_numerical() {
            Outcome::NumericalFailure
        } else {
            Outcome::ConfigError
        }
    }
}

/// Output selection for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Both,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSpec {
    #[serde(alias = "up", alias = "spin_up")]
    Up,
    #[serde(alias = "down", alias = "spin_down")]
    Down,
}

impl From<BranchSpec> for Branch {
    fn from(b: BranchSpec) -> Branch {
        match b {
            BranchSpec::Up => Branch::SpinUp,
            BranchSpec::Down => Branch::SpinDown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub momentum: [f64; 3],
    #[serde(default = "default_branch")]
    pub branch: BranchSpec,
    /// `[re, im]`
    #[serde(default = "unit_coefficient")]
    pub coefficient: [f64; 2],
}

fn default_branch() -> BranchSpec {
    BranchSpec::Up
}

fn unit_coefficient() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionSpec {
    PlaneWave {
        momentum: [f64; 3],
        #[serde(default = "default_branch")]
        branch: BranchSpec,
    },
    Superposition {
        waves: Vec<WaveSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub mass: f64,
    #[serde(default)]
    pub charge: f64,
    #[serde(default)]
    pub potential: [f64; 4],
    #[serde(default)]
    pub torsion: [f64; 4],
    #[serde(default)]
    pub coupling: f64,
}

impl BackgroundSpec {
    pub fn build(&self) -> Background {
        Background::free(self.mass)
            .with_potential(self.charge, Vec4::from(self.potential))
            .with_torsion(Vec4::from(self.torsion), self.coupling)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSpec {
    List(Vec<[f64; 4]>),
    Random {
        count: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_extent")]
        extent: f64,
    },
}

fn default_extent() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub mass_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_on_shell")]
    pub on_shell_tol: f64,
    #[serde(default = "default_detect")]
    pub detect_tol: f64,
}

fn default_on_shell() -> f64 {
    1e-5
}

fn default_detect() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            on_shell_tol: default_on_shell(),
            detect_tol: default_detect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSpec {
    #[default]
    FiniteDifference,
    Richardson,
    Exact,
}

/// A verification scenario as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub solution: SolutionSpec,
    pub background: BackgroundSpec,
    pub points: PointsSpec,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub derivative: DerivativeSpec,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(t.on_shell_tol > 0.0 && t.detect_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad("fd_step must be positive");
        }
        if !(self.background.mass > 0.0) {
            return bad("mass must be positive");
        }
        if let Some(p) = &self.perturbation {
            if !(p.mass_scale > 0.0 && p.mass_scale.is_finite()) {
                return bad("perturbation.mass_scale must be positive");
            }
        }
        match &self.points {
            PointsSpec::List(l) if l.is_empty() => bad("empty point list"),
            PointsSpec::Random { count: 0, .. } => bad("point count must be positive"),
            PointsSpec::Random { extent, .. } if !(*extent > 0.0) => bad("extent must be positive"),
            _ => match &self.solution {
                SolutionSpec::Superposition { waves } if waves.is_empty() => bad("superposition without waves"),
                _ => Ok(()),
            },
        }
    }

    /// The scenario expects violations rather than a clean pass.
    pub fn is_off_shell(&self) -> bool {
        self.perturbation.as_ref().is_some_and(|p| p.mass_scale != 1.0)
    }

    pub fn method(&self) -> Derivative {
        match self.derivative {
            DerivativeSpec::FiniteDifference => Derivative::fd(self.fd_step),
            DerivativeSpec::Richardson => Derivative::FiniteDifference {
                step: self.fd_step,
                richardson: true,
            },
            DerivativeSpec::Exact => Derivative::Exact,
        }
    }

    pub fn sample_points(&self) -> Vec<Point> {
        match &self.points {
            PointsSpec::List(l) => l.iter().map(|p| Point::from(*p)).collect(),
            PointsSpec::Random { count, seed, extent } => {
                random_points(&mut ChaCha8Rng::seed_from_u64(*seed), *count, *extent)
            }
        }
    }

    /// Construct the field; off-shell runs pair it with the scaled mass.
    pub fn build_field(&self) -> Result<WithBackground<Superposition<PlaneWave>>> {
        let bg = self.background.build();
        let waves: Vec<(PlaneWave, C64)> = match &self.solution {
            SolutionSpec::PlaneWave { momentum, branch } => {
                vec![(plane_wave(*momentum, (*branch).into(), &bg)?, C64::new(1.0, 0.0))]
            }
            SolutionSpec::Superposition { waves } => waves
                .iter()
                .map(|w| {
                    plane_wave(w.momentum, w.branch.into(), &bg)
                        .map(|p| (p, C64::new(w.coefficient[0], w.coefficient[1])))
                })
                .collect::<Result<_>>()?,
        };
        let (fields, coeffs): (Vec<_>, Vec<_>) = waves.into_iter().unzip();
        let scale = self.perturbation.as_ref().map_or(1.0, |p| p.mass_scale);
        Ok(WithBackground {
            inner: superpose(fields, &coeffs)?,
            background: bg.clone().with_mass(bg.mass * scale),
        })
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: Option<u64>,
    pub fd_step: Option<f64>,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl VerifyOptions {
    pub fn apply(&self, sc: &mut Scenario) -> Result<()> {
        if let Some(seed) = self.seed {
            if let PointsSpec::Random { seed: s, .. } = &mut sc.points {
                *s = seed;
            }
        }
        if let Some(h) = self.fd_step {
            sc.fd_step = h;
        }
        sc.validate()
    }
}

/// Everything measured at one point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: Point,
    /// `(row id, normalised norm)` in CSV order.
    pub rows: Vec<(String, f64)>,
    /// Per catalog set: largest member norm.
    pub set_max: Vec<f64>,
}

fn evaluate_point<F: crate::field::SpinorField>(
    field: &F,
    x: &Point,
    method: Derivative,
) -> Result<PointResult> {
    let smp = sample(field, x, method)?;
    let rep = evaluate(&smp)?;
    let mut rows = Vec::with_capacity(48);
    rows.push((
        "dirac".to_string(),
        dirac_residual_from(&smp.psi, &smp.cov_grad, &smp.background).normalized,
    ));
    for (form, g) in [("spinorial", &rep.spinorial), ("polar", &rep.polar)] {
        for r in &g.entries {
            rows.push((format!("gordon.{form}.{}", r.name), r.norm));
        }
    }
    rows.push(("diagonal.beta".to_string(), rep.diagonal.0));
    rows.push(("diagonal.log_phi2".to_string(), rep.diagonal.1));
    for (eq, r) in rep.equations.iter() {
        rows.push((eq.name().to_string(), r.norm));
    }
    let gauged = unitary_gauge(&rep.state).map_err(|e| e.at(x))?;
    let scalars = canonical_scalars(&gauged)?;
    let scale = scalar_scale(&rep.state);
    for s in Scalar::ALL {
        rows.push((format!("scalar.{}", s.name()), scalars.get(s).abs() / scale));
    }
    let set_max = catalog()
        .iter()
        .map(|set| {
            set.members()
                .into_iter()
                .map(|e| rep.equations.norm(e))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(PointResult {
        point: *x,
        rows,
        set_max,
    })
}

/// Row ids in the order they appear per point.
pub fn row_ids() -> Vec<String> {
    let mut ids = vec!["dirac".to_string()];
    for form in ["spinorial", "polar"] {
        ids.extend(GORDON_NAMES.iter().map(|n| format!("gordon.{form}.{n}")));
    }
    ids.push("diagonal.beta".into());
    ids.push("diagonal.log_phi2".into());
    ids.extend(Equation::ALL.iter().map(|e| e.name().to_string()));
    ids.extend(Scalar::ALL.iter().map(|s| format!("scalar.{}", s.name())));
    ids
}

/// Float formatting used in every report: 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct Sig17<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(Default::default()));
    v.serialize(&mut ser).expect("in-memory JSON serialisation");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let io = |e: std::io::Error| Error::Config(format!("writing {}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

/// CSV with columns `t,x,y,z,equation,norm,pass`.
pub fn render_csv(results: &[PointResult], tol: f64) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(["t", "x", "y", "z", "equation", "norm", "pass"]).map_err(err)?;
    for r in results {
        let coords: Vec<String> = r.point.iter().map(|c| fmt17(*c)).collect();
        for (id, norm) in &r.rows {
            let pass = if *norm <= tol { "true" } else { "false" };
            w.write_record([&coords[0], &coords[1], &coords[2], &coords[3], id, &fmt17(*norm), pass])
                .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

/// Summary of a verify run.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub results: Vec<PointResult>,
    pub summary: Value,
    pub outcome: Outcome,
    pub written: Vec<PathBuf>,
}

/// Evaluate a scenario at every sample point (in parallel) and judge it.
pub fn evaluate_scenario(sc: &Scenario) -> Result<(Vec<PointResult>, Value, bool)> {
    let field = sc.build_field()?;
    let points = sc.sample_points();
    let method = sc.method();
    let results = par::try_map(&points, |x| evaluate_point(&field, x, method).map_err(|e| e.at(x)))?;

    let tol = sc.tolerances;
    let off = sc.is_off_shell();
    let ids = row_ids();
    let mut max_norms = serde_json::Map::new();
    for (k, id) in ids.iter().enumerate() {
        let m = results.iter().map(|r| r.rows[k].1).fold(0.0, f64::max);
        max_norms.insert(id.clone(), json!(m));
    }
    let mut sets = Vec::new();
    let mut all_ok = true;
    for (k, set) in catalog().iter().enumerate() {
        let worst = results.iter().map(|r| r.set_max[k]).fold(0.0, f64::max);
        let passing = results.iter().filter(|r| r.set_max[k] <= tol.on_shell_tol).count();
        let detecting = results.iter().filter(|r| r.set_max[k] >= tol.detect_tol).count();
        let ok = if off { detecting == results.len() } else { passing == results.len() };
        all_ok &= ok;
        sets.push(json!({
            "set": set,
            "redundancy": set.redundancy()?,
            "points_passing": passing,
            "points_detecting": detecting,
            "max_norm": worst,
            "verdict": if off {
                if ok { "detected" } else { "missed" }
            } else if ok { "pass" } else { "fail" },
        }));
    }
    if !off {
        // every measured residual must be within tolerance on shell
        all_ok &= results
            .iter()
            .all(|r| r.rows.iter().all(|(_, n)| *n <= tol.on_shell_tol));
    }
    let passing_sets = sets
        .iter()
        .filter(|s| matches!(s["verdict"].as_str(), Some("pass" | "detected")))
        .count();
    let summary = json!({
        "expectation": if off { "off_shell" } else { "on_shell" },
        "points": results.len(),
        "derivative": sc.derivative,
        "fd_step": sc.fd_step,
        "tolerances": sc.tolerances,
        "max_norms": max_norms,
        "sets": sets,
        "sets_meeting_expectation": passing_sets,
        "set_count": catalog().len(),
        "pass": all_ok,
        "catalog": catalog_json(),
    });
    Ok((results, summary, all_ok))
}

/// Run a scenario and write reports into `opts.out_dir`.
pub fn run_verify(sc: &Scenario, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut sc = sc.clone();
    opts.apply(&mut sc)?;
    let (results, summary, ok) = evaluate_scenario(&sc)?;
    let mut written = Vec::new();
    if matches!(opts.format, Format::Both | Format::Csv) {
        let csv = render_csv(&results, sc.tolerances.on_shell_tol)?;
        written.push(write_atomic(&opts.out_dir, "report.csv", &csv)?);
    }
    if matches!(opts.format, Format::Both | Format::Json) {
        written.push(write_atomic(&opts.out_dir, "summary.json", to_json_string(&summary).as_bytes())?);
    }
    Ok(VerifyReport {
        results,
        summary,
        outcome: if ok { Outcome::Pass } else { Outcome::IdentityFailure },
        written,
    })
}

/// The equations with their footprints and the catalog with redundancies.
pub fn catalog_json() -> Value {
    let equations: Vec<Value> = Equation::ALL
        .iter()
        .map(|e| {
            json!({
                "id": e.name(),
                "components": e.dim(),
                "footprint": footprint(*e).iter().map(|s| s.name()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let sets: Vec<Value> = catalog()
        .iter()
        .map(|s| json!({ "set": s, "redundancy": s.redundancy().ok() }))
        .collect();
    let histogram: BTreeMap<String, usize> = redundancy_histogram(catalog())
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    json!({
        "equations": equations,
        "sets": sets,
        "set_count": catalog().len(),
        "redundancy_histogram": histogram,
    })
}

/// Catalog plus the exhaustive enumeration and whether the two agree.
pub fn run_catalog() -> Value {
    let found = enumerate_minimal_sets();
    let mut cat: Vec<EquationSet> = catalog().to_vec();
    cat.sort();
    let mut v = catalog_json();
    v["enumeration"] = json!(found);
    v["enumeration_count"] = json!(found.len());
    v["enumeration_match"] = json!(found == cat);
    v
}

/// Catalog as CSV: `set,size,redundancy`.
pub fn catalog_csv() -> String {
    let mut out = String::from("set,size,redundancy\n");
    for s in catalog() {
        let members: Vec<_> = s.members().iter().map(|e| e.name()).collect();
        out += &format!("{},{},{}\n", members.join("+"), s.len(), s.redundancy().unwrap_or(0));
    }
    out
}

/// Run the identity battery; exit code 1 on any failure.
pub fn run_identities(opts: &SuiteOptions) -> (IdentityReport, Outcome) {
    let rep = run_suite(opts);
    let outcome = if rep.passed() {
        Outcome::Pass
    } else {
        Outcome::IdentityFailure
    };
    (rep, outcome)
}

/// Plain-text pass/fail table.
pub fn identity_table(rep: &IdentityReport) -> String {
    let mut out = format!("{:<20} {:>24} {:>24}  result\n", "identity", "worst", "tolerance");
    for c in &rep.checks {
        out += &format!(
            "{:<20} {:>24} {:>24}  {}\n",
            c.name,
            fmt17(c.worst),
            fmt17(c.tolerance),
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(extra: &str) -> String {
        format!(
            r#"{{
                "solution": {{"kind": "superposition", "waves": [
                    {{"momentum": [0.3, -0.2, 0.5], "branch": "up"}},
                    {{"momentum": [-0.4, 0.1, 0.2], "branch": "down", "coefficient": [0.6, 0.3]}}
                ]}},
                "background": {{"mass": 1.0, "charge": 0.5, "potential": [0.1, 0.0, 0.2, 0.0],
                                "torsion": [0.05, 0.1, 0.0, -0.1], "coupling": 1.0}},
                "points": {{"count": 6, "seed": 4}}{extra}
            }}"#
        )
    }

    #[test]
    fn parses_defaults() {
        let sc = Scenario::from_json(&scenario("")).unwrap();
        assert_eq!(sc.tolerances, Tolerances::default());
        assert_eq!(sc.fd_step, 1e-3);
        assert!(!sc.is_off_shell());
        assert_eq!(sc.sample_points().len(), 6);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "{}",
            &scenario(r#", "tolerances": {"on_shell_tol": -1}"#),
            &scenario(r#", "fd_step": 0"#),
            &scenario(r#", "colour": "red""#),
        ] {
            assert!(matches!(Scenario::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn on_and_off_shell_expectations() {
        let on = Scenario::from_json(&scenario("")).unwrap();
        let (_, summary, ok) = evaluate_scenario(&on).unwrap();
        assert!(ok, "{}", to_json_string(&summary));
        assert_eq!(summary["sets_meeting_expectation"], 19);

        let off = Scenario::from_json(&scenario(r#", "perturbation": {"mass_scale": 1.1}"#)).unwrap();
        let (_, summary, ok) = evaluate_scenario(&off).unwrap();
        assert!(ok, "{}", to_json_string(&summary));
        assert_eq!(summary["expectation"], "off_shell");
    }

    #[test]
    fn csv_layout_and_precision() {
        let sc = Scenario::from_json(&scenario("")).unwrap();
        let (results, _, _) = evaluate_scenario(&sc).unwrap();
        let csv = String::from_utf8(render_csv(&results, 1e-5).unwrap()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,y,z,equation,norm,pass"));
        assert_eq!(csv.lines().count(), 1 + 6 * row_ids().len());
        let first: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[4], "dirac");
        let mantissa = first[0].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17);
    }

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json_string(&json!({"x": 0.1, "n": 3}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
    }

    #[test]
    fn catalog_report() {
        let v = run_catalog();
        assert_eq!(v["set_count"], 19);
        assert_eq!(v["enumeration_match"], true);
        assert_eq!(v["redundancy_histogram"], json!({"0": 4, "2": 2, "3": 8, "4": 1, "6": 4}));
        assert_eq!(catalog_csv().lines().count(), 20);
    }
}
