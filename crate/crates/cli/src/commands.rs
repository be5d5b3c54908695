use std::f64::consts::{FRAC_PI_2, PI};

use grassgeo::coherent::{self, DiastasisCheck};
use grassgeo::grassmann::{self, classify_plane, ChartMembership, CHART_TOL};
use grassgeo::loci::{self, ConjugateTime, DetectedConjugate, DirectionH, Family, ScanOptions};
use grassgeo::matfun::SpectralFactorization;
use grassgeo::sampling::SampleStream;
use grassgeo::topology::{self, EnergyWeights, SevenNumbersReport};
use grassgeo::{ChartZ, GeoError, Plane, TangentB};
use rayon::prelude::*;
use serde::Serialize;

use crate::render::{self, matrix_json, num, real, MatrixJson};
use crate::{CliError, Format, Outcome, RunConfig, SCHEMA_VERSION};

/// Planes in `cut-test` use streams offset by this much from the tangents.
pub const PLANE_STREAM_OFFSET: u64 = 1 << 32;

fn math(e: GeoError) -> CliError {
    CliError::Math(e)
}

#[derive(Serialize)]
struct Header {
    schema_version: &'static str,
    command: &'static str,
    n: usize,
    m: usize,
    seed: u64,
    tol: f64,
}

impl Header {
    fn new(command: &'static str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            n: config.shape.n(),
            m: config.shape.m(),
            seed: config.seed,
            tol: config.tol,
        }
    }
}

#[derive(Serialize)]
struct GeodesicPoint {
    t: f64,
    z: Option<MatrixJson>,
    distance: f64,
}

#[derive(Serialize)]
struct GeodesicReport {
    #[serde(flatten)]
    header: Header,
    b: MatrixJson,
    t_max: f64,
    samples: usize,
    /// Length of the minimizing segment, `‖b‖ π / (2 σ_max)`.
    cut_time: Option<f64>,
    /// Curve parameter at which the cut locus is reached, `π / (2 σ_max)`.
    cut_parameter: Option<f64>,
    chart_escape_times: Vec<f64>,
    points: Vec<GeodesicPoint>,
}

/// Parameters in `(0, t_max]` where some `σ t` hits `π/2 + kπ`.
fn chart_escape_times(b: &TangentB, t_max: f64) -> Vec<f64> {
    let mut times: Vec<f64> = Vec::new();
    for &s in &SpectralFactorization::of(&b.0).singulars {
        if s <= f64::EPSILON {
            continue;
        }
        let mut k = 0.0;
        loop {
            let t = (FRAC_PI_2 + k * PI) / s;
            if t > t_max {
                break;
            }
            times.push(t);
            k += 1.0;
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.max(1.0));
    times
}

pub fn geodesic(config: &RunConfig, b_text: Option<&str>) -> Result<Outcome, CliError> {
    let shape = config.shape;
    let b = match b_text {
        Some(text) => TangentB(render::parse_matrix(text, shape.n(), shape.m())?),
        None => TangentB(SampleStream::new(config.seed, 0).unit_matrix(shape.n(), shape.m())),
    };
    let t_max = config.t_max.unwrap_or(2.0);
    let grid: Vec<f64> = match config.samples {
        1 => vec![t_max],
        k => (0..k).map(|i| t_max * i as f64 / (k - 1) as f64).collect(),
    };
    let o = Plane::base(shape);
    let points = grid
        .par_iter()
        .map(|&t| -> Result<GeodesicPoint, CliError> {
            let p = grassmann::geodesic(&b, t).map_err(math)?;
            let z = grassmann::z_from_plane(&p).ok().map(|z| matrix_json(&z.0));
            let distance = grassmann::distance(&o, &p).map_err(math)?;
            Ok(GeodesicPoint { t, z, distance })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cut_parameter = loci::cut_time(&b).ok();
    let report = GeodesicReport {
        header: Header::new("geodesic", config),
        b: matrix_json(&b.0),
        t_max,
        samples: config.samples,
        cut_time: cut_parameter.map(|t| t * b.norm()),
        cut_parameter,
        chart_escape_times: chart_escape_times(&b, t_max),
        points,
    };
    let body = match config.format {
        Format::Json => render::json(&report)?,
        Format::Csv => {
            let mut header = vec!["t".to_string(), "distance".to_string()];
            for i in 0..shape.n() {
                for j in 0..shape.m() {
                    header.push(format!("z{i}{j}_re"));
                    header.push(format!("z{i}{j}_im"));
                }
            }
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|p| {
                    let mut row = vec![real(p.t), real(p.distance)];
                    match &p.z {
                        Some(z) => row.extend(z.iter().flatten().flat_map(|[re, im]| [real(*re), real(*im)])),
                        None => row.extend(std::iter::repeat_n(String::new(), 2 * shape.n() * shape.m())),
                    }
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            render::csv_table(&header, &rows)?
        }
    };
    Ok(Outcome { body, passed: true })
}

#[derive(Serialize)]
struct ScanPoint {
    t: f64,
    multiplicity: usize,
    families: Vec<Family>,
    detected_t: Option<f64>,
    detected_multiplicity: Option<usize>,
    i_stratum: bool,
    w_stratum: bool,
    angles: Vec<f64>,
}

#[derive(Serialize)]
struct ScanReport {
    #[serde(flatten)]
    header: Header,
    h: Vec<f64>,
    t_max: f64,
    options: ScanOptions,
    tol_angle: f64,
    predicted: Vec<ConjugateTime>,
    detected: Vec<DetectedConjugate>,
    points: Vec<ScanPoint>,
    missed: usize,
    multiplicity_mismatches: usize,
    spurious: usize,
    agreement: bool,
    classification_consistent: bool,
}

pub fn conjugate_scan(
    config: &RunConfig,
    h_text: Option<&str>,
    rank_tol: f64,
    tol_angle: f64,
) -> Result<Outcome, CliError> {
    let shape = config.shape;
    let (h, default_t_max) = match h_text {
        Some(text) => {
            let values = render::parse_reals(text, "h")?;
            if values.len() != shape.r() {
                return Err(CliError::Parse(format!("h must have length min(n, m) = {}", shape.r())));
            }
            let h = DirectionH::new(values).map_err(|e| CliError::Parse(format!("h: {e}")))?;
            let t_max = loci::default_t_max(&h);
            (h, t_max)
        }
        None => loci::random_generic_direction(shape, &mut SampleStream::new(config.seed, 0)),
    };
    let t_max = config.t_max.unwrap_or(default_t_max);
    let options = ScanOptions {
        rank_tol,
        refine_tol: config.tol,
        ..ScanOptions::default()
    };
    let cmp = loci::compare_with_prediction(shape, &h, t_max, &options).map_err(math)?;
    let points = cmp
        .predicted
        .par_iter()
        .zip(cmp.matches.par_iter())
        .map(|(pred, m)| -> Result<ScanPoint, CliError> {
            let plane = loci::direction_plane(shape, &h, pred.t, None).map_err(math)?;
            let class = loci::classify_conjugate(&plane, tol_angle).map_err(math)?;
            let detected = m.map(|i| cmp.detected[i]);
            Ok(ScanPoint {
                t: pred.t,
                multiplicity: pred.multiplicity,
                families: pred.records.iter().map(|r| r.family).collect(),
                detected_t: detected.map(|d| d.t),
                detected_multiplicity: detected.map(|d| d.multiplicity),
                i_stratum: class.i_stratum,
                w_stratum: class.w_stratum,
                angles: class.angles,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let classification_consistent = points.iter().all(|p| {
        p.families.iter().all(|f| match f {
            Family::T1Plus | Family::T1Minus => p.i_stratum,
            Family::T2 | Family::T3 => p.w_stratum,
        })
    });
    let passed = cmp.agreement && classification_consistent;
    let report = ScanReport {
        header: Header::new("conjugate-scan", config),
        h: h.components().to_vec(),
        t_max,
        options,
        tol_angle,
        predicted: cmp.predicted,
        detected: cmp.detected,
        points,
        missed: cmp.missed,
        multiplicity_mismatches: cmp.multiplicity_mismatches,
        spurious: cmp.spurious,
        agreement: cmp.agreement,
        classification_consistent,
    };
    let body = match config.format {
        Format::Json => render::json(&report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|p| {
                    let families: Vec<&str> = p
                        .families
                        .iter()
                        .map(|f| match f {
                            Family::T1Plus => "T1_plus",
                            Family::T1Minus => "T1_minus",
                            Family::T2 => "T2",
                            Family::T3 => "T3",
                        })
                        .collect();
                    vec![
                        real(p.t),
                        p.multiplicity.to_string(),
                        families.join(";"),
                        num(p.detected_t),
                        p.detected_multiplicity.map(|d| d.to_string()).unwrap_or_default(),
                        p.i_stratum.to_string(),
                        p.w_stratum.to_string(),
                    ]
                })
                .collect();
            render::csv_table(
                &["t", "multiplicity", "families", "detected_t", "detected_multiplicity", "i_stratum", "w_stratum"],
                &rows,
            )?
        }
    };
    Ok(Outcome { body, passed })
}

#[derive(Serialize)]
struct SevenReport {
    #[serde(flatten)]
    header: Header,
    weights: Vec<f64>,
    #[serde(flatten)]
    numbers: SevenNumbersReport,
}

pub fn seven(config: &RunConfig, weights_text: Option<&str>) -> Result<Outcome, CliError> {
    let shape = config.shape;
    let weights = match weights_text {
        Some(text) => {
            let values = render::parse_reals(text, "weights")?;
            if values.len() != shape.total() {
                return Err(CliError::Parse(format!("weights must have length n + m = {}", shape.total())));
            }
            EnergyWeights::new(values).map_err(CliError::Input)?
        }
        None => EnergyWeights::sequential(shape.total()),
    };
    let numbers = topology::seven_numbers(shape, &weights, config.seed).map_err(|e| match e {
        GeoError::TooLarge { .. } | GeoError::Overflow { .. } => CliError::Input(e),
        other => CliError::Math(other),
    })?;
    let passed = numbers.all_equal && numbers.critical_certified;
    let report = SevenReport {
        header: Header::new("seven", config),
        weights: weights.values().to_vec(),
        numbers,
    };
    let body = match config.format {
        Format::Json => render::json(&report)?,
        Format::Csv => {
            let names = [
                "orthogonal_coherent_count",
                "sections_dim",
                "borel_weil_dim",
                "kodaira_n",
                "critical_point_count",
                "euler_characteristic",
                "cell_count",
            ];
            let mut rows: Vec<Vec<String>> = names
                .iter()
                .zip(report.numbers.values())
                .map(|(name, v)| vec![name.to_string(), v.to_string()])
                .collect();
            rows.push(vec!["all_equal".into(), report.numbers.all_equal.to_string()]);
            rows.push(vec!["critical_certified".into(), report.numbers.critical_certified.to_string()]);
            render::csv_table(&["invariant", "value"], &rows)?
        }
    };
    Ok(Outcome { body, passed })
}

#[derive(Serialize)]
struct SweepRow {
    pair_index: usize,
    diastasis: f64,
    theta: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SweepReport {
    #[serde(flatten)]
    header: Header,
    samples: usize,
    rows: Vec<SweepRow>,
    max_residual: f64,
    passed: bool,
}

pub fn diastasis_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let shape = config.shape;
    let rows = (0..config.samples)
        .into_par_iter()
        .map(|i| -> Result<SweepRow, CliError> {
            let mut rng = SampleStream::new(config.seed, i as u64);
            let z1 = ChartZ(rng.complex_matrix(shape.n(), shape.m()));
            let z2 = ChartZ(rng.complex_matrix(shape.n(), shape.m()));
            let DiastasisCheck {
                diastasis,
                theta,
                residual,
            } = coherent::check_diastasis_relation(&z1, &z2).map_err(math)?;
            Ok(SweepRow {
                pair_index: i,
                diastasis,
                theta,
                residual,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let passed = max_residual <= config.tol;
    let body = match config.format {
        Format::Json => render::json(&SweepReport {
            header: Header::new("diastasis-sweep", config),
            samples: config.samples,
            rows,
            max_residual,
            passed,
        })?,
        Format::Csv => {
            let mut table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.pair_index.to_string(),
                        real(r.diastasis),
                        real(r.theta),
                        real(r.residual),
                    ]
                })
                .collect();
            table.push(vec!["max".into(), String::new(), String::new(), real(max_residual)]);
            render::csv_table(&["pair_index", "diastasis", "theta", "residual"], &table)?
        }
    };
    Ok(Outcome { body, passed })
}

#[derive(Debug, Clone, Serialize)]
struct Counterexample {
    kind: &'static str,
    index: usize,
    t: Option<f64>,
    value: f64,
}

#[derive(Serialize)]
struct CutReport {
    #[serde(flatten)]
    header: Header,
    samples: usize,
    tangents_checked: usize,
    planes_checked: usize,
    in_chart: usize,
    on_polar_divisor: usize,
    max_distance_error: f64,
    min_post_cut_gap: f64,
    counterexamples: usize,
    failures: Vec<Counterexample>,
}

/// Fractions of the cut time at which the geodesic must still minimize.
const BEFORE_CUT: [f64; 4] = [0.25, 0.5, 0.75, 0.95];
const AFTER_CUT: f64 = 1.05;
const POST_CUT_GAP: f64 = 1e-4;

struct TangentOutcome {
    distance_error: f64,
    post_cut_gap: f64,
    failures: Vec<Counterexample>,
}

fn check_tangent(config: &RunConfig, index: usize) -> Result<TangentOutcome, CliError> {
    let shape = config.shape;
    let b = TangentB(SampleStream::new(config.seed, index as u64).unit_matrix(shape.n(), shape.m()));
    let o = Plane::base(shape);
    let t_cut = loci::cut_time(&b).map_err(math)?;
    let mut failures = Vec::new();
    let mut distance_error: f64 = 0.0;
    for frac in BEFORE_CUT {
        let t = frac * t_cut;
        let d = grassmann::distance(&o, &grassmann::geodesic(&b, t).map_err(math)?).map_err(math)?;
        let err = (d - t).abs();
        distance_error = distance_error.max(err);
        if err > config.tol {
            failures.push(Counterexample {
                kind: "distance_before_cut",
                index,
                t: Some(t),
                value: err,
            });
        }
    }
    let t = AFTER_CUT * t_cut;
    let d = grassmann::distance(&o, &grassmann::geodesic(&b, t).map_err(math)?).map_err(math)?;
    let post_cut_gap = t - d;
    if post_cut_gap <= POST_CUT_GAP {
        failures.push(Counterexample {
            kind: "distance_after_cut",
            index,
            t: Some(t),
            value: post_cut_gap,
        });
    }
    let endpoint = grassmann::geodesic(&b, t_cut).map_err(math)?;
    let smallest = SpectralFactorization::of(&endpoint.top_block()).smallest();
    if !loci::is_cut_locus(&endpoint, config.tol) {
        failures.push(Counterexample {
            kind: "endpoint_not_on_cut_locus",
            index,
            t: Some(t_cut),
            value: smallest,
        });
    }
    Ok(TangentOutcome {
        distance_error,
        post_cut_gap,
        failures,
    })
}

fn check_plane(config: &RunConfig, index: usize) -> (bool, Option<Counterexample>) {
    let mut rng = SampleStream::new(config.seed, PLANE_STREAM_OFFSET + index as u64);
    let p = Plane::random(config.shape, &mut rng);
    let cut = loci::is_cut_locus(&p, CHART_TOL);
    let in_chart = matches!(classify_plane(&p), ChartMembership::InChart(_));
    // Exactly one of the two pieces must claim the plane.
    let failure = (in_chart == cut).then(|| Counterexample {
        kind: "decomposition_not_exclusive",
        index,
        t: None,
        value: SpectralFactorization::of(&p.top_block()).smallest(),
    });
    (in_chart, failure)
}

pub fn cut_test(config: &RunConfig) -> Result<Outcome, CliError> {
    let tangents = (0..config.samples)
        .into_par_iter()
        .map(|i| check_tangent(config, i))
        .collect::<Result<Vec<_>, _>>()?;
    let planes: Vec<(bool, Option<Counterexample>)> =
        (0..config.samples).into_par_iter().map(|i| check_plane(config, i)).collect();

    let mut failures: Vec<Counterexample> = tangents.iter().flat_map(|t| t.failures.iter().cloned()).collect();
    failures.extend(planes.iter().filter_map(|(_, f)| f.clone()));
    let in_chart = planes.iter().filter(|(c, _)| *c).count();
    let report = CutReport {
        header: Header::new("cut-test", config),
        samples: config.samples,
        tangents_checked: tangents.len(),
        planes_checked: planes.len(),
        in_chart,
        on_polar_divisor: planes.len() - in_chart,
        max_distance_error: tangents.iter().map(|t| t.distance_error).fold(0.0, f64::max),
        min_post_cut_gap: tangents.iter().map(|t| t.post_cut_gap).fold(f64::INFINITY, f64::min),
        counterexamples: failures.len(),
        failures,
    };
    let passed = report.counterexamples == 0;
    let body = match config.format {
        Format::Json => render::json(&report)?,
        Format::Csv => render::csv_table(
            &[
                "tangents_checked",
                "planes_checked",
                "in_chart",
                "on_polar_divisor",
                "max_distance_error",
                "min_post_cut_gap",
                "counterexamples",
            ],
            &[vec![
                report.tangents_checked.to_string(),
                report.planes_checked.to_string(),
                report.in_chart.to_string(),
                report.on_polar_divisor.to_string(),
                real(report.max_distance_error),
                real(report.min_post_cut_gap),
                report.counterexamples.to_string(),
            ]],
        )?,
    };
    Ok(Outcome { body, passed })
}
