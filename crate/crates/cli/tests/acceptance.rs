//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion failed.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use groundstate::asymptotics::{
    compute_b_coefficient, pair_specific_model, zeta_half, AsymptoticModel,
};
use groundstate::audit::{brute_force_prop1_check, monotonicity_audit, Tolerance};
use groundstate::geometry::{random_configuration, retract, tangent_project, Point};
use groundstate::optimizer::{build_table, multistart, OptimizerSettings};
use groundstate::potentials::{energy_gradient, total_energy};
use groundstate::table::{parse_table, read_table, write_table};
use groundstate::{Configuration, DomainSpec, EnergyTable, PotentialSpec, Vec3};

fn fixture(name: &str) -> EnergyTable {
    parse_table(fixture_path(name)).unwrap()
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_1() -> Outcome {
    let r = monotonicity_audit(&fixture("log-sphere-97-100.tsv"), Tolerance::default()).unwrap();
    let [v] = r.violations[..] else {
        return check(false, format!("{} violations", r.violations.len()));
    };
    let b = r.improved_bounds[&97];
    check(
        (v.n, v.order) == (97, 3)
            && within(v.delta_eps, -0.013678811, 1e-9)
            && within(b.bound, -1019.030349, 1e-5),
        format!(
            "N=97 n={} delta_eps={:.12} bound={:.8}",
            v.order, v.delta_eps, b.bound
        ),
    )
}

fn criterion_2() -> Outcome {
    let r = monotonicity_audit(&fixture("log-sphere-2000-4212.tsv"), Tolerance::default()).unwrap();
    let [v] = r.violations[..] else {
        return check(false, format!("{} violations", r.violations.len()));
    };
    let b = r.improved_bounds[&2000];
    check(
        (v.n, v.order) == (2000, 2212)
            && b.witness_order == 2212
            && within(v.delta_eps, -0.000503199, 1e-9)
            && within(b.bound, -388198.8687, 1e-3),
        format!(
            "N=2000 n={} delta_eps={:.12} bound={:.6}",
            v.order, v.delta_eps, b.bound
        ),
    )
}

fn criterion_3() -> Outcome {
    let r = monotonicity_audit(&fixture("thomson-sphere-large.tsv"), Tolerance::default()).unwrap();
    let flagged: Vec<(usize, usize)> = r.violations.iter().map(|v| (v.n, v.order)).collect();
    let Some(v) = r.violations.iter().find(|v| (v.n, v.order) == (1801, 1)) else {
        return check(false, format!("N=1801 not flagged; {flagged:?}"));
    };
    check(
        within(v.delta_eps, -0.0000044325, 1e-10) && flagged == [(1801, 1), (2002, 10), (2002, 20)],
        format!("delta_eps={:.13}; flagged {flagged:?}", v.delta_eps),
    )
}

/// Unit-sphere icosahedron built from the golden-ratio rectangles.
fn icosahedron_energy() -> f64 {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut pts: Vec<Vec3> = Vec::new();
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            pts.push(Vec3::new(0.0, a, b) / norm);
            pts.push(Vec3::new(a, b, 0.0) / norm);
            pts.push(Vec3::new(b, 0.0, a) / norm);
        }
    }
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            e += 1.0 / (pts[i] - pts[j]).norm();
        }
    }
    e
}

fn criterion_4() -> Outcome {
    let s = OptimizerSettings {
        restarts: 200,
        ..OptimizerSettings::default()
    };
    let pot = PotentialSpec::Riesz(-1.0);
    let e = |n| multistart(DomainSpec::Sphere2, pot, n, &s).unwrap().energy;
    let (e2, e3, e4, e12) = (e(2), e(3), e(4), e(12));
    let ico = icosahedron_energy();
    check(
        within(e2, 0.5, 1e-12)
            && within(e3, 3f64.sqrt(), 1e-9)
            && within(e4, 3.674234614, 1e-8)
            && within(e12, 49.165253058, 1e-6)
            && within(e12, ico, 1e-6),
        format!("E(2)={e2} E(3)={e3} E(4)={e4} E(12)={e12} (icosahedron {ico})"),
    )
}

fn criterion_5() -> Outcome {
    let s = OptimizerSettings {
        restarts: 600,
        ..OptimizerSettings::default()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for pot in [PotentialSpec::Riesz(-1.0), PotentialSpec::LogCoulomb] {
        let r = brute_force_prop1_check(DomainSpec::Sphere2, pot, 6, &s).unwrap();
        ok &= r.eps_monotone() && r.proof_chain_holds();
        let eps: Vec<String> = r.rows.iter().map(|row| format!("{:.5}", row.eps)).collect();
        detail.push(format!(
            "{pot}: eps [{}] monotone={} per-step={}",
            eps.join(", "),
            r.eps_monotone(),
            r.proof_chain_holds()
        ));
    }
    check(ok, detail.join("; "))
}

/// Euler-Maclaurin zeta, independent of the accelerated series in the library.
fn zeta_direct(s: f64) -> f64 {
    const M: usize = 20;
    const B2J: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let m = M as f64;
    let mut sum: f64 = (1..M).map(|k| (k as f64).powf(-s)).sum();
    sum += m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
    let mut rising = s;
    let mut factorial = 2.0;
    for (j, b) in B2J.iter().enumerate() {
        let j = j + 1;
        sum += b / factorial * rising * m.powf(-s - (2 * j - 1) as f64);
        rising *= (s + (2 * j - 1) as f64) * (s + (2 * j) as f64);
        factorial *= ((2 * j + 1) * (2 * j + 2)) as f64;
    }
    sum
}

fn criterion_6() -> Outcome {
    let b = compute_b_coefficient(1e-5).unwrap();
    let z = zeta_half();
    let oracle = zeta_direct(0.5);
    check(
        within(b, -0.55305, 1e-4) && within(z, -1.4603545, 1e-6) && within(z, oracle, 1e-6),
        format!("b={b:.10} zeta(1/2)={z:.13} oracle={oracle:.13}"),
    )
}

fn criterion_7() -> Outcome {
    let s = OptimizerSettings {
        restarts: 4,
        ..OptimizerSettings::default()
    };
    let sizes: Vec<usize> = (51..=80).collect();
    let t = build_table(DomainSpec::Sphere2, PotentialSpec::LogCoulomb, &sizes, &s).unwrap();
    let model = AsymptoticModel::log_sphere();
    let worst = t
        .iter()
        .map(|(n, e)| {
            let eps = e.energy / (n as f64 * (n - 1) as f64);
            (n, (eps - pair_specific_model(&model, n).unwrap()).abs())
        })
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    check(
        t.len() == 30 && worst.1 < 0.01,
        format!(
            "{} rows; largest |eps - model| = {:.3e} at N={}",
            t.len(),
            worst.1,
            worst.0
        ),
    )
}

/// Largest relative mismatch between the analytic gradient and central
/// differences of the energy along retracted tangent directions.
fn gradient_mismatch(c: &Configuration, pot: &PotentialSpec) -> f64 {
    const H: f64 = 1e-6;
    let d = c.domain();
    let g = energy_gradient(c, pot).unwrap();
    let scale = g.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-3);
    let mut worst: f64 = 0.0;
    for i in 0..c.len() {
        let p = c.points()[i];
        for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
            let t = tangent_project(&p, &axis, &d);
            if t.norm() < 1e-3 {
                continue;
            }
            let moved = |sign: f64| {
                let mut pts: Vec<Point> = c.points().to_vec();
                pts[i] = retract(&p, &(t * (sign * H)), &d).unwrap();
                total_energy(&Configuration::new(d, pts).unwrap(), pot).unwrap()
            };
            let fd = (moved(1.0) - moved(-1.0)) / (2.0 * H);
            worst = worst.max((fd - g[i].dot(&t)).abs() / scale);
        }
    }
    worst
}

fn criterion_8() -> Outcome {
    let domains = [
        DomainSpec::Sphere2,
        DomainSpec::torus(2.5).unwrap(),
        DomainSpec::Free3,
    ];
    let kernels = [
        PotentialSpec::LogCoulomb,
        PotentialSpec::Riesz(-1.0),
        PotentialSpec::Riesz(0.5),
        PotentialSpec::CoulombDim(4),
        PotentialSpec::LennardJones,
    ];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in domains {
        for pot in kernels {
            if pot.check_domain(&d).is_err() {
                continue;
            }
            for seed in 0..20 {
                let c = random_configuration(d, 8, 1000 + seed).unwrap();
                worst = worst.max(gradient_mismatch(&c, &pot));
                cases += 1;
            }
        }
    }
    check(
        worst < 1e-6,
        format!("{cases} configurations; worst relative mismatch {worst:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let output = Command::new(env!("CARGO_BIN_EXE_groundstate"))
            .args([
                "optimize",
                "--domain",
                "torus:2",
                "--potential",
                "riesz:-1",
                "--n",
                "2-7",
                "--restarts",
                "12",
            ])
            .args(["--seed", "3", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.tsv"), run("b.tsv"));
    let identical = a == b;

    let mut round_trips = 0;
    let mut exact = true;
    for name in [
        "log-sphere-97-100.tsv",
        "log-sphere-2000-4212.tsv",
        "thomson-sphere-large.tsv",
        "thomson-sphere-exact.tsv",
    ] {
        let t = fixture(name);
        let text = write_table(&t);
        let back = read_table(&text).unwrap().table;
        exact &= back == t && write_table(&back) == text;
        round_trips += 1;
    }
    let generated = read_table(std::str::from_utf8(&a).unwrap()).unwrap().table;
    exact &= write_table(&generated).as_bytes() == a.as_slice();
    check(
        identical && exact,
        format!("optimize outputs identical: {identical}; {round_trips} fixtures + generated table round-trip exactly: {exact}"),
    )
}

/// Name, runtime limit, check.
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "log-sphere N=97 audit fixture",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            "log-sphere N=2000 audit fixture",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            "Thomson N=1801 audit fixture",
            Duration::from_secs(1),
            criterion_3,
        ),
        (
            "small-N optimizer exactness",
            Duration::from_secs(60),
            criterion_4,
        ),
        (
            "brute-force monotonicity, N=2..6",
            Duration::from_secs(120),
            criterion_5,
        ),
        ("coefficient series", Duration::from_secs(5), criterion_6),
        (
            "log-sphere asymptotic agreement, N=51..80",
            Duration::from_secs(600),
            criterion_7,
        ),
        ("gradient correctness", Duration::from_secs(30), criterion_8),
        (
            "determinism and round-trip",
            Duration::from_secs(60),
            criterion_9,
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let ok = outcome.ok && elapsed <= *limit;
        println!(
            "{} criterion {}: {name} ({:.2?}, limit {:?}): {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed,
            limit,
            outcome.detail
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
