//! Conjugate and cut loci of the base plane.
//!
//! Along the geodesic generated by `H = Σ hᵢ D_{i,n+i}`, realized as the
//! tangent `b(h) = [diag(h) | 0]`, conjugate points occur at
//!
//! ```text
//! t1 = λπ / |h_p ± h_q|   multiplicity 2          (1 ≤ p < q ≤ r)
//! t2 = λπ / (2|h_p|)      multiplicity 1
//! t3 = λπ / |h_p|         multiplicity 2|m - n|   (only when m ≠ n)
//! ```
//!
//! for positive integers `λ`. Detection is chart-free: the differential of
//! `B ↦ frame(Exp(B)) · frame(Exp(B))†` loses rank exactly at those times.
//! The cut locus is the polar divisor, the planes whose top block is singular.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grassmann::{self, Plane, Shape, TangentB};
use crate::matfun::{self, RankReport, SpectralFactorization};
use crate::sampling::SampleStream;
use crate::{CMat, GeoError, Result};

pub const TOL_ANGLE: f64 = 1e-6;
pub const RANK_TOL: f64 = 1e-6;
/// Predicted times closer than this are merged into one record.
pub const MERGE_TOL: f64 = 1e-12;
/// Singular values of a frame block below this count as zero.
pub const INTERSECTION_TOL: f64 = 1e-8;

/// Unit direction `h ∈ R^r` in the maximal abelian subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionH(Vec<f64>);

impl DirectionH {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        let norm_sq: f64 = h.iter().map(|x| x * x).sum();
        if h.is_empty() || !norm_sq.is_finite() || (norm_sq - 1.0).abs() > 1e-12 {
            return Err(GeoError::NotNormalized { norm_sq });
        }
        Ok(Self(h))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(h: Vec<f64>) -> Result<Self> {
        let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeoError::NotNormalized { norm_sq: norm * norm });
        }
        Ok(Self(h.into_iter().map(|x| x / norm).collect()))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_abs(&self) -> f64 {
        self.0.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()))
    }

    /// `b(h) = [diag(h) | 0]` for `n ≤ m`, `[diag(h); 0]` for `n > m`.
    pub fn tangent(&self, shape: Shape) -> Result<TangentB> {
        if self.0.len() != shape.r() {
            return Err(GeoError::ShapeMismatch {
                expected: format!("direction of length {}", shape.r()),
                found: format!("length {}", self.0.len()),
            });
        }
        let mut b = CMat::zeros(shape.n(), shape.m());
        for (i, &h) in self.0.iter().enumerate() {
            b[(i, i)] = h.into();
        }
        Ok(TangentB(b))
    }
}

/// `1.1 π / min |hᵢ|`: long enough to see every family at least once.
pub fn default_t_max(h: &DirectionH) -> f64 {
    1.1 * std::f64::consts::PI / h.min_abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "T1_plus")]
    T1Plus,
    #[serde(rename = "T1_minus")]
    T1Minus,
    T2,
    T3,
}

/// One predicted conjugate time from a single family and index choice.
/// Indices `p`, `q` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateTimeRecord {
    pub t: f64,
    pub family: Family,
    pub multiplicity: usize,
    pub p: usize,
    pub q: Option<usize>,
    pub lambda: i64,
}

/// Records sharing a time, with their multiplicities summed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateTime {
    pub t: f64,
    pub multiplicity: usize,
    pub records: Vec<ConjugateTimeRecord>,
}

fn push_family(
    out: &mut Vec<ConjugateTimeRecord>,
    rate: f64,
    t_max: f64,
    family: Family,
    multiplicity: usize,
    p: usize,
    q: Option<usize>,
) {
    // A zero rate has no finite conjugate time.
    if rate <= f64::EPSILON {
        return;
    }
    let mut lambda = 1i64;
    loop {
        let t = lambda as f64 * std::f64::consts::PI / rate;
        if t > t_max {
            break;
        }
        out.push(ConjugateTimeRecord {
            t,
            family,
            multiplicity,
            p,
            q,
            lambda,
        });
        lambda += 1;
    }
}

/// Unmerged predicted records in `(0, t_max]`, sorted by time.
pub fn conjugate_records(shape: Shape, h: &DirectionH, t_max: f64) -> Result<Vec<ConjugateTimeRecord>> {
    if h.len() != shape.r() {
        return Err(GeoError::ShapeMismatch {
            expected: format!("direction of length {}", shape.r()),
            found: format!("length {}", h.len()),
        });
    }
    if !(t_max > 0.0) {
        return Err(GeoError::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let hs = h.components();
    let r = hs.len();
    let mut out = Vec::new();
    for p in 0..r {
        for q in p + 1..r {
            push_family(&mut out, (hs[p] + hs[q]).abs(), t_max, Family::T1Plus, 2, p + 1, Some(q + 1));
            push_family(&mut out, (hs[p] - hs[q]).abs(), t_max, Family::T1Minus, 2, p + 1, Some(q + 1));
        }
        push_family(&mut out, 2.0 * hs[p].abs(), t_max, Family::T2, 1, p + 1, None);
        if shape.n() != shape.m() {
            let mult = 2 * shape.n().abs_diff(shape.m());
            push_family(&mut out, hs[p].abs(), t_max, Family::T3, mult, p + 1, None);
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// Predicted conjugate times in `(0, t_max]`, coincident times merged.
pub fn conjugate_times(shape: Shape, h: &DirectionH, t_max: f64) -> Result<Vec<ConjugateTime>> {
    let mut merged: Vec<ConjugateTime> = Vec::new();
    for record in conjugate_records(shape, h, t_max)? {
        match merged.last_mut() {
            Some(last) if (record.t - last.t).abs() <= MERGE_TOL * record.t.max(1.0) => {
                last.multiplicity += record.multiplicity;
                last.records.push(record);
            }
            _ => merged.push(ConjugateTime {
                t: record.t,
                multiplicity: record.multiplicity,
                records: vec![record],
            }),
        }
    }
    Ok(merged)
}

/// `k · geodesic(b(h), t)`, with `k = diag(k1, k2)` when supplied.
pub fn direction_plane(shape: Shape, h: &DirectionH, t: f64, k: Option<&CMat>) -> Result<Plane> {
    let plane = grassmann::geodesic(&h.tangent(shape)?, t)?;
    match k {
        None => Ok(plane),
        Some(k) => {
            let (n, total) = (shape.n(), shape.total());
            if k.shape() != (total, total) {
                return Err(GeoError::ShapeMismatch {
                    expected: format!("{total}x{total}"),
                    found: format!("{}x{}", k.nrows(), k.ncols()),
                });
            }
            let upper = k.view((0, n), (n, total - n)).norm();
            let lower = k.view((n, 0), (total - n, n)).norm();
            let leak = upper.max(lower);
            if leak > 1e-10 {
                return Err(GeoError::KNotBlockDiagonal { leak });
            }
            plane.transformed(k)
        }
    }
}

/// Realified projector of the geodesic endpoint as a function of the
/// realified tangent.
fn projector_map(shape: Shape) -> impl Fn(&[f64]) -> Result<Vec<f64>> {
    move |x: &[f64]| {
        let b = matfun::complexify(x, shape.n(), shape.m())?;
        let plane = grassmann::geodesic(&TangentB(b), 1.0)?;
        Ok(matfun::realify(&plane.projector()))
    }
}

/// Jacobian of the projector embedding of `Exp` at the tangent `t · b`.
pub fn exp_jacobian(b: &TangentB, t: f64) -> Result<DMatrix<f64>> {
    let shape = b.shape()?;
    let point = matfun::realify(&b.scaled(t).0);
    let step = matfun::default_step(&point);
    matfun::jacobian_central(projector_map(shape), &point, step)
}

pub fn exp_rank(b: &TangentB, t: f64, rank_tol: f64) -> Result<RankReport> {
    Ok(matfun::rank_of(&exp_jacobian(b, t)?, rank_tol))
}

/// Kernel dimension of `d Exp` at `t · b`, read off the projector embedding.
pub fn conjugacy_multiplicity(b: &TangentB, t: f64) -> Result<usize> {
    conjugacy_multiplicity_with(b, t, RANK_TOL)
}

pub fn conjugacy_multiplicity_with(b: &TangentB, t: f64, rank_tol: f64) -> Result<usize> {
    Ok(exp_rank(b, t, rank_tol)?.kernel_dim())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Coarse grid spacing in `t`.
    pub step: f64,
    pub rank_tol: f64,
    /// Width of the final refinement bracket.
    pub refine_tol: f64,
    /// Detections must land within this distance of a prediction.
    pub match_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            step: 1e-2,
            rank_tol: RANK_TOL,
            refine_tol: 1e-9,
            match_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedConjugate {
    pub t: f64,
    pub multiplicity: usize,
    /// Smallest Jacobian singular value at the refined time.
    pub smallest_singular: f64,
}

fn smallest_singular(b: &TangentB, t: f64) -> Result<f64> {
    Ok(exp_rank(b, t, RANK_TOL)?.smallest())
}

/// Locates the minimum of the smallest Jacobian singular value inside
/// `[lo, hi]` by bisecting on the sign of its slope.
fn refine_minimum(b: &TangentB, mut lo: f64, mut hi: f64, refine_tol: f64) -> Result<f64> {
    let delta = 1e-7 * hi.max(1.0);
    let stop = refine_tol.max(4.0 * delta);
    while hi - lo > stop {
        let mid = 0.5 * (lo + hi);
        let left = smallest_singular(b, mid - delta)?;
        let right = smallest_singular(b, mid + delta)?;
        if left < right {
            hi = mid + delta;
        } else {
            lo = mid - delta;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `(0, t_max]` for rank drops of the projector-embedded `Exp`
/// along `t ↦ t b`.
///
/// Local minima of the smallest Jacobian singular value on the coarse grid
/// are refined; a candidate counts as a detection when the refined Jacobian
/// has a nontrivial kernel.
pub fn scan_conjugate_times(b: &TangentB, t_max: f64, opts: &ScanOptions) -> Result<Vec<DetectedConjugate>> {
    if !(t_max > 0.0) || !(opts.step > 0.0) {
        return Err(GeoError::InvalidArgument("t_max and step must be positive".into()));
    }
    // Two extra nodes so a time near t_max is still bracketed.
    let count = (t_max / opts.step).ceil() as usize + 2;
    let grid: Vec<f64> = (0..=count).map(|i| i as f64 * opts.step).collect();
    let profile: Vec<f64> = grid
        .par_iter()
        .map(|&t| smallest_singular(b, t))
        .collect::<Result<_>>()?;

    let candidates: Vec<usize> = (1..grid.len() - 1)
        .filter(|&i| profile[i] < profile[i - 1] && profile[i] <= profile[i + 1])
        .collect();

    let detections: Vec<Option<DetectedConjugate>> = candidates
        .par_iter()
        .map(|&i| -> Result<Option<DetectedConjugate>> {
            let t = refine_minimum(b, grid[i - 1], grid[i + 1], opts.refine_tol)?;
            let report = exp_rank(b, t, opts.rank_tol)?;
            let multiplicity = report.kernel_dim();
            Ok((multiplicity > 0).then(|| DetectedConjugate {
                t,
                multiplicity,
                smallest_singular: report.smallest(),
            }))
        })
        .collect::<Result<_>>()?;

    Ok(detections
        .into_iter()
        .flatten()
        .filter(|d| d.t <= t_max + opts.match_tol)
        .collect())
}

/// Prediction-versus-detection bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanComparison {
    pub predicted: Vec<ConjugateTime>,
    pub detected: Vec<DetectedConjugate>,
    /// For each prediction, the index of the matching detection.
    pub matches: Vec<Option<usize>>,
    pub missed: usize,
    pub multiplicity_mismatches: usize,
    pub spurious: usize,
    pub agreement: bool,
}

/// Runs the scan and checks it against [`conjugate_times`].
pub fn compare_with_prediction(
    shape: Shape,
    h: &DirectionH,
    t_max: f64,
    opts: &ScanOptions,
) -> Result<ScanComparison> {
    let b = h.tangent(shape)?;
    let predicted = conjugate_times(shape, h, t_max)?;
    // Predictions slightly past t_max may legitimately explain detections
    // at the edge of the window.
    let extended = conjugate_times(shape, h, t_max + 2.0 * opts.match_tol)?;
    let detected = scan_conjugate_times(&b, t_max, opts)?;

    let nearest = |t: f64| -> Option<usize> {
        detected
            .iter()
            .enumerate()
            .filter(|(_, d)| (d.t - t).abs() <= opts.match_tol)
            .min_by(|(_, a), (_, b)| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|(i, _)| i)
    };
    let matches: Vec<Option<usize>> = predicted.iter().map(|p| nearest(p.t)).collect();
    let missed = matches.iter().filter(|m| m.is_none()).count();
    let multiplicity_mismatches = predicted
        .iter()
        .zip(&matches)
        .filter(|(p, m)| m.is_some_and(|i| detected[i].multiplicity != p.multiplicity))
        .count();
    let spurious = detected
        .iter()
        .filter(|d| !extended.iter().any(|p| (p.t - d.t).abs() <= opts.match_tol))
        .count();
    let agreement = missed == 0 && multiplicity_mismatches == 0 && spurious == 0;
    Ok(ScanComparison {
        predicted,
        detected,
        matches,
        missed,
        multiplicity_mismatches,
        spurious,
        agreement,
    })
}

/// Membership of a conjugate point in the two families of the locus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateClass {
    /// Two nontrivial stationary angles coincide.
    pub i_stratum: bool,
    /// A nontrivial stationary angle is 0 or π/2.
    pub w_stratum: bool,
    /// The `r` nontrivial stationary angles with the base plane, ascending.
    pub angles: Vec<f64>,
}

impl ConjugateClass {
    pub fn is_empty(&self) -> bool {
        !self.i_stratum && !self.w_stratum
    }
}

/// Classifies `P` from its stationary angles with the base plane.
///
/// Only the `r = min(n, m)` largest angles are used; for `n > m` the other
/// `n - m` vanish for every plane.
pub fn classify_conjugate(p: &Plane, tol_angle: f64) -> Result<ConjugateClass> {
    let shape = p.shape();
    let all = p.angles_to(&Plane::base(shape))?;
    let angles = all[all.len() - shape.r()..].to_vec();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let i_stratum = angles.windows(2).any(|w| (w[1] - w[0]).abs() <= tol_angle);
    let w_stratum = angles
        .iter()
        .any(|&a| a <= tol_angle || (half_pi - a).abs() <= tol_angle);
    Ok(ConjugateClass {
        i_stratum,
        w_stratum,
        angles,
    })
}

fn rank_of_rows(p: &Plane, start: usize, len: usize) -> usize {
    if len == 0 {
        return 0;
    }
    let block = p.frame().rows(start, len).into_owned();
    SpectralFactorization::of(&block)
        .singulars
        .iter()
        .filter(|&&s| s > INTERSECTION_TOL)
        .count()
}

fn check_p(p: usize, total: usize) -> Result<()> {
    if p == 0 || p > total {
        return Err(GeoError::InvalidArgument(format!("p must lie in 1..={total}, got {p}")));
    }
    Ok(())
}

/// `dim(P ∩ span(e_1, .., e_p))`.
pub fn stratum_intersection_dim(plane: &Plane, p: usize) -> Result<usize> {
    let shape = plane.shape();
    check_p(p, shape.total())?;
    Ok(shape.n() - rank_of_rows(plane, p, shape.total() - p))
}

/// `dim(P ∩ span(e_{N-p+1}, .., e_N))` with `N = n + m`; for `p = m` this is
/// the intersection with the orthogonal complement of the base plane.
pub fn trailing_intersection_dim(plane: &Plane, p: usize) -> Result<usize> {
    let shape = plane.shape();
    check_p(p, shape.total())?;
    Ok(shape.n() - rank_of_rows(plane, 0, shape.total() - p))
}

/// `P ∈ V^p_l`, i.e. `dim(P ∩ C^p) ≥ l`.
pub fn in_v_stratum(plane: &Plane, p: usize, l: usize) -> Result<bool> {
    Ok(stratum_intersection_dim(plane, p)? >= l)
}

/// `P ∈ W^p_l = V^p_l \ V^p_{l+1}`.
pub fn in_w_stratum(plane: &Plane, p: usize, l: usize) -> Result<bool> {
    Ok(stratum_intersection_dim(plane, p)? == l)
}

/// `π / (2 σ_max(b))`: the largest stationary angle reaches π/2 there.
pub fn cut_time(b: &TangentB) -> Result<f64> {
    let sigma = b.largest_singular();
    if sigma == 0.0 {
        return Err(GeoError::ZeroTangent);
    }
    Ok(std::f64::consts::FRAC_PI_2 / sigma)
}

/// Polar-divisor test: the top block of the frame is singular at `tol`,
/// equivalently the largest stationary angle is within `tol` of π/2.
pub fn is_cut_locus(p: &Plane, tol: f64) -> bool {
    SpectralFactorization::of(&p.top_block()).smallest() < tol
}

/// Samples a direction whose predicted times in `(0, t_max]` are well
/// separated, together with its default `t_max`.
///
/// Rejection rules: every `|hᵢ| ≥ 0.25 / √r`; distinct unmerged times at
/// least `0.05` apart; no predicted time within `0.05` of `t_max`.
pub fn random_generic_direction(shape: Shape, rng: &mut SampleStream) -> (DirectionH, f64) {
    let r = shape.r();
    loop {
        let Ok(h) = DirectionH::normalized(rng.real_normals(r)) else {
            continue;
        };
        if h.min_abs() < 0.25 / (r as f64).sqrt() {
            continue;
        }
        let t_max = default_t_max(&h);
        if is_generic(shape, &h, t_max, 0.05) {
            return (h, t_max);
        }
    }
}

/// True when no two predicted times are accidentally close and none sits
/// near the end of the window.
pub fn is_generic(shape: Shape, h: &DirectionH, t_max: f64, separation: f64) -> bool {
    let Ok(times) = conjugate_times(shape, h, t_max + separation) else {
        return false;
    };
    let spaced = times.windows(2).all(|w| w[1].t - w[0].t >= separation);
    let clear_of_end = times.iter().all(|c| (c.t - t_max).abs() >= separation);
    spaced && clear_of_end
}
