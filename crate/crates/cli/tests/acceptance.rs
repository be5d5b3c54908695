//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};
use std::process::Command;
use std::time::{Duration, Instant};

use grassgeo::coherent::{self, check_diastasis_relation};
use grassgeo::grassmann::{self, block_diagonal, classify_plane, exp_map, geodesic, log_map, z_from_plane, ChartMembership};
use grassgeo::loci::{self, classify_conjugate, compare_with_prediction, random_generic_direction, Family, ScanOptions};
use grassgeo::oracle;
use grassgeo::sampling::SampleStream;
use grassgeo::topology::{self, EnergyWeights};
use grassgeo::{ChartZ, Complex64, Plane, Shape, TangentB};

const SEED: u64 = 20_240_611;
const SHAPES: [(usize, usize); 4] = [(1, 1), (1, 2), (2, 2), (2, 3)];

fn shapes() -> Vec<Shape> {
    SHAPES.iter().map(|&(n, m)| Shape::new(n, m).unwrap()).collect()
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn roundtrip() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for shape in shapes() {
        for i in 0..200 {
            let mut rng = SampleStream::new(SEED, 1_000 + i);
            let b = TangentB(rng.bounded_matrix(shape.n(), shape.m(), FRAC_PI_2 - 0.1));
            let err = match exp_map(&b) {
                Ok(z) => (log_map(&z).0 - &b.0).norm(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(err);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("max error {worst:.3e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn chart_consistency() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut worst_relative: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut checked = 0;
    let mut over = 0;
    for shape in shapes() {
        for i in 0..200 {
            let mut rng = SampleStream::new(SEED, 2_000 + i);
            let b = TangentB(rng.complex_matrix(shape.n(), shape.m()));
            let t = rng.uniform_in(0.0, 2.0);
            // Outside the chart domain there is nothing to compare.
            let Ok(expected) = exp_map(&b.scaled(t)) else { continue };
            let Ok(z) = geodesic(&b, t).and_then(|p| z_from_plane(&p)) else {
                worst = f64::INFINITY;
                continue;
            };
            let err = (z.0 - &expected.0).norm();
            let norm = expected.0.norm();
            if err > 1e-9 {
                over += 1;
            }
            if err > worst {
                worst = err;
                worst_norm = norm;
            }
            worst_relative = worst_relative.max(err / norm.max(1.0));
            checked += 1;
        }
    }
    verdict(
        worst <= 1e-9,
        format!(
            "{checked} samples in chart, {over} above 1e-9, max error {worst:.3e} at |Z| = {worst_norm:.3e}, max relative error {worst_relative:.3e}"
        ),
    )
}

fn diastasis_relation() -> Verdict {
    let mut worst: f64 = 0.0;
    for shape in shapes() {
        for i in 0..200 {
            let mut rng = SampleStream::new(SEED, 3_000 + i);
            let z1 = ChartZ(rng.complex_matrix(shape.n(), shape.m()));
            let z2 = ChartZ(rng.complex_matrix(shape.n(), shape.m()));
            let residual = check_diastasis_relation(&z1, &z2).map_or(f64::INFINITY, |c| c.residual);
            worst = worst.max(residual);
        }
    }
    let scalar = |x: f64| ChartZ(grassgeo::CMat::from_element(1, 1, Complex64::new(x, 0.0)));
    let anchor = check_diastasis_relation(&scalar(1.0), &scalar(0.0)).unwrap();
    let anchor_ok = (anchor.diastasis - LN_2).abs() <= 1e-15 && (anchor.theta - FRAC_PI_4).abs() <= 1e-15;
    verdict(
        worst <= 1e-9 && anchor_ok,
        format!(
            "max residual {worst:.3e}; anchor D = {}, θ = {}",
            anchor.diastasis, anchor.theta
        ),
    )
}

/// Criteria 4 and 5 share their random directions.
fn conjugate_agreement_and_classification() -> (Verdict, Verdict) {
    let start = Instant::now();
    let opts = ScanOptions::default();
    let mut failures = Vec::new();
    let mut max_dt: f64 = 0.0;
    let mut predicted = 0;
    let mut spurious = 0;
    let mut class_failures = Vec::new();
    let mut classified = 0;
    for shape in shapes() {
        let mut rng = SampleStream::new(SEED, 4_000 + shape.total() as u64 * 10 + shape.n() as u64);
        for trial in 0..20 {
            let (h, t_max) = random_generic_direction(shape, &mut rng);
            let cmp = compare_with_prediction(shape, &h, t_max, &opts).unwrap();
            predicted += cmp.predicted.len();
            spurious += cmp.spurious;
            for (p, m) in cmp.predicted.iter().zip(&cmp.matches) {
                match m {
                    Some(i) => max_dt = max_dt.max((cmp.detected[*i].t - p.t).abs()),
                    None => max_dt = f64::INFINITY,
                }
            }
            if !cmp.agreement {
                failures.push(format!("{shape} trial {trial}"));
            }

            let k = block_diagonal(&rng.unitary(shape.n()), &rng.unitary(shape.m()));
            for record in loci::conjugate_records(shape, &h, t_max).unwrap() {
                for frame in [None, Some(&k)] {
                    let plane = loci::direction_plane(shape, &h, record.t, frame).unwrap();
                    let class = classify_conjugate(&plane, loci::TOL_ANGLE).unwrap();
                    let ok = match record.family {
                        Family::T1Plus | Family::T1Minus => class.i_stratum,
                        Family::T2 | Family::T3 => class.w_stratum,
                    };
                    classified += 1;
                    if !ok {
                        class_failures.push(format!("{shape} {:?} t={}", record.family, record.t));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let agreement = verdict(
        failures.is_empty() && max_dt <= 1e-2 && spurious == 0 && elapsed < Duration::from_secs(120),
        format!(
            "{predicted} predicted times, max |Δt| {max_dt:.2e}, {spurious} spurious, {} disagreements, {:.1} s",
            failures.len(),
            elapsed.as_secs_f64()
        ),
    );
    let classification = verdict(
        class_failures.is_empty(),
        format!("{classified} conjugate points, {} misclassified", class_failures.len()),
    );
    (agreement, classification)
}

fn cut_locus() -> Verdict {
    let mut problems = 0;
    let mut worst_before: f64 = 0.0;
    let mut smallest_gap = f64::INFINITY;
    for shape in shapes() {
        for i in 0..1000 {
            let p = Plane::random(shape, &mut SampleStream::new(SEED, 6_000 + i));
            let in_chart = matches!(classify_plane(&p), ChartMembership::InChart(_));
            if in_chart == loci::is_cut_locus(&p, grassmann::CHART_TOL) {
                problems += 1;
            }
        }
        let o = Plane::base(shape);
        for i in 0..50 {
            let b = TangentB(SampleStream::new(SEED, 7_000 + i).unit_matrix(shape.n(), shape.m()));
            let t_cut = loci::cut_time(&b).unwrap();
            let before = 0.95 * t_cut;
            let after = 1.05 * t_cut;
            let d_before = grassmann::distance(&o, &geodesic(&b, before).unwrap()).unwrap();
            let d_after = grassmann::distance(&o, &geodesic(&b, after).unwrap()).unwrap();
            worst_before = worst_before.max((d_before - before).abs());
            smallest_gap = smallest_gap.min(after - d_after);
            if (d_before - before).abs() > 1e-6 || d_after >= after - 1e-4 {
                problems += 1;
            }
            if !loci::is_cut_locus(&geodesic(&b, t_cut).unwrap(), grassmann::CHART_TOL) {
                problems += 1;
            }
        }
    }
    verdict(
        problems == 0,
        format!("{problems} counterexamples; max |d - t| before cut {worst_before:.2e}, min gap after {smallest_gap:.3e}"),
    )
}

fn seven_numbers() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for (n, m, expected) in [(1, 1, 2), (1, 2, 3), (2, 2, 6), (2, 3, 10), (3, 3, 20)] {
        let shape = Shape::new(n, m).unwrap();
        let w = EnergyWeights::sequential(n + m);
        let report = topology::seven_numbers(shape, &w, SEED).unwrap();
        let check = topology::energy_critical_check(shape, &w, SEED).unwrap();
        let shape_ok = report.values() == [expected; 7]
            && report.all_equal
            && check.certified
            && check.max_critical_gradient < 1e-7
            && check.min_random_gradient > 1e-3;
        ok &= shape_ok;
        details.push(format!(
            "{shape}: {:?} grad {:.1e}/{:.2e}",
            report.values(),
            check.max_critical_gradient,
            check.min_random_gradient
        ));
    }
    verdict(ok, details.join("; "))
}

fn noncompact_disk() -> Verdict {
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        for i in 0..200 {
            let mut rng = SampleStream::new(SEED, 8_000 + 1_000 * m as u64 + i);
            let z1 = ChartZ(rng.bounded_matrix(1, m, 0.95));
            let z2 = ChartZ(rng.bounded_matrix(1, m, 0.95));
            let d = coherent::noncompact_diastasis(&z1, &z2).unwrap();
            let a: Vec<Complex64> = z1.0.iter().copied().collect();
            let z: Vec<Complex64> = z2.0.iter().copied().collect();
            let delta = oracle::ball_distance(&a, &z);
            worst = worst.max((delta.cosh() - (d / 2.0).exp()).abs());
        }
    }
    verdict(worst <= 1e-9, format!("600 pairs, max |cosh δ - e^(D/2)| {worst:.3e}"))
}

fn run_cli(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grassgeo"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("GRASSGEO_THREADS", t),
        None => cmd.env_remove("GRASSGEO_THREADS"),
    };
    cmd.output().expect("grassgeo binary runs")
}

fn cli_contract() -> Verdict {
    let runs: [&[&str]; 5] = [
        &["geodesic", "--n", "2", "--m", "2", "--random", "--seed", "7"],
        &["conjugate-scan", "--n", "2", "--m", "3", "--random", "--seed", "5"],
        &["seven", "--n", "2", "--m", "3", "--auto", "--seed", "5"],
        &["diastasis-sweep", "--n", "2", "--m", "3", "--samples", "200", "--seed", "5"],
        &["cut-test", "--n", "2", "--m", "2", "--samples", "50", "--seed", "5"],
    ];
    let mut mismatches = Vec::new();
    for args in runs {
        let first = run_cli(args, None);
        let again = run_cli(args, None);
        let single = run_cli(args, Some("1"));
        let many = run_cli(args, Some("4"));
        let same = [&again, &single, &many].iter().all(|o| o.stdout == first.stdout);
        if !same || first.status.code() != Some(0) {
            mismatches.push(args[0]);
        }
    }
    let forced = run_cli(&["cut-test", "--n", "1", "--m", "1", "--samples", "50", "--seed", "3", "--tol", "1e-18"], None);
    let usage = run_cli(&["geodesic", "--n", "0", "--m", "1", "--random"], None);
    let forced_code = forced.status.code();
    let usage_code = usage.status.code();
    verdict(
        mismatches.is_empty() && forced_code == Some(1) && usage_code == Some(2),
        format!(
            "non-reproducible: {mismatches:?}; forced failure exit {forced_code:?}; usage error exit {usage_code:?}"
        ),
    )
}

fn main() {
    let (agreement, classification) = conjugate_agreement_and_classification();
    let results = [
        ("exp/log roundtrip", roundtrip()),
        ("geodesic chart consistency", chart_consistency()),
        ("diastasis relation", diastasis_relation()),
        ("conjugate-time agreement", agreement),
        ("conjugate classification", classification),
        ("cut locus", cut_locus()),
        ("seven numbers", seven_numbers()),
        ("noncompact dual", noncompact_disk()),
        ("cli determinism and exit codes", cli_contract()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} ({})", i + 1, v.detail);
        failed += usize::from(!v.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
