//! Dense complex matrix functions evaluated through the singular value
//! decomposition.
//!
//! For `B = U Σ V†` and an odd-type kernel `g`, the expression
//! `B · g(√(B†B))` equals `U · diag(σ g(σ)) · V†`, which is how every
//! chart/normal-coordinate conversion in the crate is computed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CMat, GeoError, Result};

/// Distance to a pole of the kernel below which evaluation is refused.
pub const TOL_POLE: f64 = 1e-9;

/// Below this singular value the stored analytic limit replaces `f(σ)/σ`.
pub const SMALL_SIGMA: f64 = 1e-7;

/// Thin SVD `B = U · diag(σ) · V†` with singular values sorted descending.
///
/// `left` is `n × r` and `right` is `m × r` with `r = min(n, m)`; both have
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralFactorization {
    pub left: CMat,
    pub singulars: Vec<f64>,
    pub right: CMat,
}

impl SpectralFactorization {
    pub fn of(b: &CMat) -> Self {
        let (n, m) = b.shape();
        let r = n.min(m);
        if r == 0 {
            return Self {
                left: CMat::zeros(n, 0),
                singulars: Vec::new(),
                right: CMat::zeros(m, 0),
            };
        }
        let svd = b.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v = svd.v_t.expect("right singular vectors requested").adjoint();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

        let mut left = CMat::zeros(n, r);
        let mut right = CMat::zeros(m, r);
        let mut singulars = Vec::with_capacity(r);
        for (dst, &src) in order.iter().enumerate() {
            left.set_column(dst, &u.column(src));
            right.set_column(dst, &v.column(src));
            singulars.push(svd.singular_values[src].max(0.0));
        }
        Self {
            left,
            singulars,
            right,
        }
    }

    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    pub fn largest(&self) -> f64 {
        self.singulars.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singulars.last().copied().unwrap_or(0.0)
    }

    /// `U · diag(values) · V†`.
    pub fn compose(&self, values: &[f64]) -> CMat {
        debug_assert_eq!(values.len(), self.rank());
        let mut scaled = self.left.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        scaled * self.right.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.compose(&self.singulars)
    }
}

/// Real scalar kernels applied to singular values.
///
/// The `*c` variants are the "divided" kernels `f(σ)/σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKernel {
    Tan,
    Arctan,
    Sin,
    Cos,
    Sinc,
    Tanc,
    Arctanc,
}

impl ScalarKernel {
    /// The analytic value of the kernel at `σ = 0`.
    pub fn value_at_zero(self) -> f64 {
        match self {
            Self::Tan | Self::Arctan | Self::Sin => 0.0,
            Self::Cos | Self::Sinc | Self::Tanc | Self::Arctanc => 1.0,
        }
    }

    fn is_divided(self) -> bool {
        matches!(self, Self::Sinc | Self::Tanc | Self::Arctanc)
    }

    pub fn has_poles(self) -> bool {
        matches!(self, Self::Tan | Self::Tanc)
    }

    /// Distance from `sigma` to the nearest pole, `+∞` for entire kernels.
    pub fn pole_distance(self, sigma: f64) -> f64 {
        if !self.has_poles() {
            return f64::INFINITY;
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        let k = ((sigma - half_pi) / std::f64::consts::PI).round();
        (sigma - (half_pi + k * std::f64::consts::PI)).abs()
    }

    pub fn eval(self, sigma: f64) -> f64 {
        if self.is_divided() && sigma.abs() < SMALL_SIGMA {
            return self.value_at_zero();
        }
        match self {
            Self::Tan => sigma.tan(),
            Self::Arctan => sigma.atan(),
            Self::Sin => sigma.sin(),
            Self::Cos => sigma.cos(),
            Self::Sinc => sigma.sin() / sigma,
            Self::Tanc => sigma.tan() / sigma,
            Self::Arctanc => sigma.atan() / sigma,
        }
    }
}

/// Computes `B · f(√(B†B))` as `U · diag(σᵢ f(σᵢ)) · V†`.
pub fn apply_odd_kernel(b: &CMat, kernel: ScalarKernel) -> Result<CMat> {
    let svd = SpectralFactorization::of(b);
    for &sigma in &svd.singulars {
        if kernel.pole_distance(sigma) < TOL_POLE {
            return Err(GeoError::KernelPole { sigma });
        }
    }
    let values: Vec<f64> = svd.singulars.iter().map(|&s| s * kernel.eval(s)).collect();
    Ok(svd.compose(&values))
}

fn frames_shape_check(p: &CMat, q: &CMat) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(GeoError::ShapeMismatch {
            expected: format!("{:?}", p.shape()),
            found: format!("{:?}", q.shape()),
        });
    }
    Ok(())
}

/// Principal angles between the column spans of two orthonormal frames,
/// sorted nondecreasing in `[0, π/2]`.
pub fn principal_angles(p: &CMat, q: &CMat) -> Result<Vec<f64>> {
    frames_shape_check(p, q)?;
    let cross = p.adjoint() * q;
    let svd = SpectralFactorization::of(&cross);
    let mut angles: Vec<f64> = svd
        .singulars
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect();
    // n×n cross-Gram: r = n, so every angle is present.
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Result of a numeric rank analysis of a Jacobian.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    /// All Jacobian singular values, descending.
    pub singulars: Vec<f64>,
    /// Domain dimension of the map.
    pub domain_dim: usize,
}

impl RankReport {
    pub fn kernel_dim(&self) -> usize {
        self.domain_dim - self.rank
    }

    /// The `k` smallest singular values, ascending. Directions beyond the
    /// codomain dimension count as zero singular values.
    pub fn smallest_singulars(&self, k: usize) -> Vec<f64> {
        let mut all = self.singulars.clone();
        all.resize(self.domain_dim.max(all.len()), 0.0);
        all.sort_by(f64::total_cmp);
        all.truncate(k);
        all
    }

    pub fn smallest(&self) -> f64 {
        self.smallest_singulars(1).first().copied().unwrap_or(0.0)
    }
}

/// Default central-difference step at `point`.
pub fn default_step(point: &[f64]) -> f64 {
    let norm = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    1e-5 * norm.max(1.0)
}

/// Central-difference Jacobian, `codomain × domain`.
pub fn jacobian_central<F>(map: F, point: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let dim = point.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut probe = point.to_vec();
    for j in 0..dim {
        probe[j] = point[j] + step;
        let plus = map(&probe)?;
        probe[j] = point[j] - step;
        let minus = map(&probe)?;
        probe[j] = point[j];
        if plus.len() != minus.len() {
            return Err(GeoError::EvaluationFailure(
                "map returned outputs of varying length".into(),
            ));
        }
        columns.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect(),
        );
    }
    let rows = columns.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows, dim, |i, j| columns[j][i]))
}

/// Numeric rank of the differential of `map` at `point`.
///
/// Singular values above `tol · σ_max` count toward the rank. `step`
/// defaults to [`default_step`].
pub fn differential_rank<F>(map: F, point: &[f64], step: Option<f64>, tol: f64) -> Result<RankReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let step = step.unwrap_or_else(|| default_step(point));
    let jac = jacobian_central(map, point, step)?;
    Ok(rank_of(&jac, tol))
}

pub fn rank_of(jac: &DMatrix<f64>, tol: f64) -> RankReport {
    let domain_dim = jac.ncols();
    let mut singulars: Vec<f64> = if jac.nrows() == 0 || jac.ncols() == 0 {
        Vec::new()
    } else {
        jac.singular_values().iter().copied().collect()
    };
    singulars.sort_by(|a, b| b.total_cmp(a));
    let largest = singulars.first().copied().unwrap_or(0.0);
    let rank = if largest == 0.0 {
        0
    } else {
        singulars.iter().filter(|&&s| s > tol * largest).count()
    };
    RankReport {
        rank,
        singulars,
        domain_dim,
    }
}

/// Flattens a complex matrix row-major into `[re, im, re, im, ...]`.
pub fn realify(mat: &CMat) -> Vec<f64> {
    let (rows, cols) = mat.shape();
    let mut out = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let z = mat[(i, j)];
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// Inverse of [`realify`].
pub fn complexify(values: &[f64], rows: usize, cols: usize) -> Result<CMat> {
    if values.len() != 2 * rows * cols {
        return Err(GeoError::ShapeMismatch {
            expected: format!("{} reals", 2 * rows * cols),
            found: format!("{} reals", values.len()),
        });
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(values[k], values[k + 1])
    }))
}
