//! Acceptance battery: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::{Duration, Instant};

use polar_dirac::clifford::CliffordBasis;
use polar_dirac::field::{
    dirac_residual, extract_connections, plane_wave, sample, superpose, Background, Branch,
    Derivative, PlaneWave, Superposition,
};
use polar_dirac::gauge::{catalog, enumerate_minimal_sets, redundancy_histogram, EquationSet};
use polar_dirac::hydro::{equation_residuals, implication_solver, ten_equations, Equation, HydroPointState};
use polar_dirac::report::{evaluate_scenario, Scenario};
use polar_dirac::sampling::{random_frame, random_lorentz, random_point, random_regular_spinor, random_vector};
use polar_dirac::spinor::{auxiliary_identities, bilinears, polar_decompose, polar_reconstruct};
use polar_dirac::tensor::lower;
use polar_dirac::{Point, Vec4, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(start: Instant, limit: Duration) -> (bool, f64) {
    let t = start.elapsed();
    (t <= limit, t.as_secs_f64())
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let r = CliffordBasis::build().residuals(1.0);
    let worst = r.anticommutator.max(r.duality).max(r.triple_product).max(r.sigma_commutator);
    let (fast, secs) = within(start, Duration::from_secs(1));
    check(
        worst <= 1e-14 && r.gram_rank == 16 && fast,
        format!("worst {worst:.2e}, rank {}, {secs:.3}s", r.gram_rank),
    )
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let psi = random_regular_spinor(&mut rng);
        worst = worst.max(bilinears(&psi).fierz_residuals().max());
        let (a, b) = auxiliary_identities(&psi).unwrap();
        worst = worst.max(a).max(b);
    }
    let (fast, secs) = within(start, Duration::from_secs(5));
    check(worst <= 1e-10 && fast, format!("worst relative {worst:.2e} over 1000 spinors, {secs:.3}s"))
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut round, mut cov): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let psi = random_regular_spinor(&mut rng);
        let pd = polar_decompose(&psi).unwrap();
        round = round.max((polar_reconstruct(&pd).unwrap() - psi).norm() / psi.norm());
        let pair = random_lorentz(&mut rng, 1.5);
        let moved = polar_decompose(&psi.transformed(&pair.spinorial())).unwrap();
        cov = cov
            .max((pair.vector * pd.u - moved.u).amax())
            .max((pair.vector * pd.s - moved.s).amax());
    }
    check(round <= 1e-10 && cov <= 1e-10, format!("roundtrip {round:.2e}, covariance {cov:.2e}"))
}

fn ac4() -> Outcome {
    let bg = Background::free(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut disp, mut null, mut fd): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let p = random_vector(&mut rng, 1.0);
        let w = plane_wave([p[1], p[2], p[3]], Branch::SpinUp, &bg).unwrap();
        let p2 = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
        disp = disp.max((w.momentum()[0] - (p2 + 1.0).sqrt()).abs());
        null = null.max(w.nullspace_residual());
        let x = random_point(&mut rng, 3.0);
        fd = fd.max(dirac_residual(&w, &x, Derivative::fd(1e-3)).normalized);
    }
    // convergence order needs truncation error well above round-off
    let fast = plane_wave([8.0, -6.0, 9.0], Branch::SpinDown, &bg).unwrap();
    let x = Point::new(0.1, 0.2, -0.3, 0.4);
    let e1 = dirac_residual(&fast, &x, Derivative::fd(1e-3)).normalized;
    let e2 = dirac_residual(&fast, &x, Derivative::fd(5e-4)).normalized;
    let ratio = e1 / e2;
    check(
        disp <= 1e-12 && null <= 1e-12 && fd <= 1e-6 && (12.0..=20.0).contains(&ratio),
        format!("dispersion {disp:.2e}, nullspace {null:.2e}, FD residual {fd:.2e}, halving ratio {ratio:.2}"),
    )
}

fn mixed(bg: &Background) -> Superposition<PlaneWave> {
    let a = plane_wave([0.3, -0.2, 0.5], Branch::SpinUp, bg).unwrap();
    let b = plane_wave([-0.4, 0.1, 0.2], Branch::SpinDown, bg).unwrap();
    superpose(vec![a, b], &[C64::new(1.0, 0.0), C64::new(0.6, 0.3)]).unwrap()
}

fn charged_torsion() -> Background {
    Background::free(1.3)
        .with_potential(0.7, Vec4::new(0.2, -0.1, 0.05, 0.3))
        .with_torsion(Vec4::new(0.1, 0.2, -0.15, 0.05), 1.0)
}

/// Distance from `sol` to the line `target + t·kernel`, per direction.
fn line_distance(sol: &[[f64; 7]; 4], target: &[[f64; 7]; 4], kernel: &[f64; 7]) -> f64 {
    (0..4)
        .map(|mu| {
            let d: Vec<f64> = (0..7).map(|k| sol[mu][k] - target[mu][k]).collect();
            let t: f64 = d.iter().zip(kernel).map(|(a, b)| a * b).sum();
            d.iter().zip(kernel).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

fn ac5() -> Outcome {
    let bg = charged_torsion();
    let a = bg.potential.as_constant().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut line: f64 = 0.0;
    for _ in 0..10 {
        let p = random_vector(&mut rng, 0.8);
        let w = plane_wave([p[1], p[2], p[3]], Branch::SpinUp, &bg).unwrap();
        let x = random_point(&mut rng, 3.0);
        let conn = extract_connections(&w, &x, Derivative::default()).unwrap();
        let kin = lower(&(w.momentum() - a * bg.charge));
        let target: [[f64; 7]; 4] = std::array::from_fn(|mu| {
            let mut row = [0.0; 7];
            row[0] = kin[mu];
            row
        });
        line = line.max(line_distance(&conn.lower_solution(), &target, &conn.kernel_direction));
    }
    let f = mixed(&bg);
    let (mut frame, mut rfull, mut shift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let x = random_point(&mut rng, 3.0);
        let smp = sample(&f, &x, Derivative::default()).unwrap();
        frame = frame.max(smp.conn.ds_du_residual(&smp.polar));
        rfull = rfull.max(smp.conn.reconstruct_from_frame(&smp.polar).max_abs_diff(&smp.conn.r));
        let state = HydroPointState::from_sample(&smp);
        let base = equation_residuals(&state);
        for t in [[-10.0, 4.0, 10.0, -2.5], [3.0, -7.0, 0.5, 9.0]] {
            let moved = state.with_connection(state.conn.shifted(t));
            shift = shift.max(equation_residuals(&moved).max_abs_diff(&base));
        }
    }
    check(
        line <= 1e-6 && frame <= 1e-6 && rfull <= 1e-6 && shift <= 1e-12,
        format!("kernel-line distance {line:.2e}, ds/du {frame:.2e}, R rebuild {rfull:.2e}, shift {shift:.2e}"),
    )
}

fn scenario(solution: &str, background: &str, seed: u64, extra: &str) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{"solution": {solution}, "background": {background},
            "points": {{"count": 50, "seed": {seed}}}{extra}}}"#
    ))
    .unwrap()
}

const PLANE: &str = r#"{"kind": "plane_wave", "momentum": [0.4, -0.3, 0.8], "branch": "up"}"#;
const SUPER: &str = r#"{"kind": "superposition", "waves": [
    {"momentum": [0.3, -0.2, 0.5], "branch": "up"},
    {"momentum": [-0.4, 0.1, 0.2], "branch": "down", "coefficient": [0.6, 0.3]},
    {"momentum": [0.1, 0.6, -0.3], "branch": "up", "coefficient": [-0.2, 0.5]}]}"#;
const BACKGROUNDS: [&str; 4] = [
    r#"{"mass": 1.0}"#,
    r#"{"mass": 1.0, "charge": 0.7, "potential": [0.2, -0.1, 0.05, 0.3]}"#,
    r#"{"mass": 1.0, "torsion": [0.1, 0.2, -0.15, 0.05], "coupling": 1.0}"#,
    r#"{"mass": 1.3, "charge": 0.7, "potential": [0.2, -0.1, 0.05, 0.3], "torsion": [0.1, 0.2, -0.15, 0.05], "coupling": 1.0}"#,
];

fn ac6() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut runs = 0;
    for (k, bg) in BACKGROUNDS.iter().enumerate() {
        for sol in [PLANE, SUPER] {
            let (results, summary, pass) = evaluate_scenario(&scenario(sol, bg, 60 + k as u64, "")).unwrap();
            ok &= pass && summary["sets_meeting_expectation"] == 19 && results.len() >= 50;
            worst = results
                .iter()
                .flat_map(|r| r.rows.iter().map(|(_, n)| *n))
                .fold(worst, f64::max);
            runs += 1;
        }
    }
    let (fast, secs) = within(start, Duration::from_secs(30));
    check(
        ok && worst <= 1e-5 && fast,
        format!("{runs} scenarios × 50 points, worst normalised residual {worst:.2e}, 19/19 sets, {secs:.2}s"),
    )
}

fn ac7() -> Outcome {
    let mut ok = true;
    let mut weakest = f64::INFINITY;
    for (k, bg) in BACKGROUNDS.iter().enumerate() {
        for sol in [PLANE, SUPER] {
            let sc = scenario(sol, bg, 70 + k as u64, r#", "perturbation": {"mass_scale": 1.1}"#);
            let (results, summary, pass) = evaluate_scenario(&sc).unwrap();
            ok &= pass && summary["sets_meeting_expectation"] == 19;
            for r in &results {
                weakest = r.set_max.iter().copied().fold(weakest, f64::min);
            }
        }
    }
    check(
        ok && weakest >= 1e-3,
        format!("every set detects at every point; weakest set signal {weakest:.2e}"),
    )
}

fn ac8() -> Outcome {
    let start = Instant::now();
    let found = enumerate_minimal_sets();
    let mut cat = catalog().to_vec();
    cat.sort();
    let hist: Vec<_> = redundancy_histogram(&found).into_iter().collect();
    let pairs: Vec<String> = found.iter().filter(|s| s.len() == 2).map(|s| s.to_string()).collect();
    let example = EquationSet::new(&[Equation::A1, Equation::B1, Equation::A3, Equation::B3]);
    let (fast, secs) = within(start, Duration::from_secs(1));
    check(
        found.len() == 19
            && found == cat
            && hist == [(0, 4), (2, 2), (3, 8), (4, 1), (6, 4)]
            && pairs == ["{A3,B3}", "{FM,CM}", "{XF,XE}"]
            && example.covers_all()
            && !example.is_minimal()
            && fast,
        format!("{} minimal sets, histogram {hist:?}, pairs {pairs:?}, {secs:.3}s", found.len()),
    )
}

fn ac9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (u, s) = random_frame(&mut rng, 2.0);
        let p = random_vector(&mut rng, 2.0);
        let (e, f) = implication_solver(&u, &s, &p).unwrap();
        let r = ten_equations(&e, &f, &p, &u, &s);
        for eq in [Equation::XF, Equation::XE] {
            worst = r[eq.index()].iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    check(worst <= 1e-9, format!("worst XF/XE residual {worst:.2e} over 1000 frames"))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1", "Clifford identities", ac1),
        ("AC2", "bilinear identities", ac2),
        ("AC3", "polar round trip and covariance", ac3),
        ("AC4", "plane-wave factory", ac4),
        ("AC5", "connection extraction", ac5),
        ("AC6", "on-shell equivalence", ac6),
        ("AC7", "off-shell detection", ac7),
        ("AC8", "minimal-set enumeration", ac8),
        ("AC9", "implication property", ac9),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let out = run();
        println!("{id} {} {title}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
