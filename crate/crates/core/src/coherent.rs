//! Coherent-state overlap kernel, Calabi diastasis and the Plücker embedding.
//!
//! For chart points `Z1, Z2` of `G_n(C^{n+m})` the normalized overlap of the
//! coherent vectors is
//!
//! ```text
//! (e_{Z1}, e_{Z2}) = det(I + Z1 Z2†) / (det(I + Z1 Z1†)^{1/2} det(I + Z2 Z2†)^{1/2})
//! ```
//!
//! and the diastasis is `D = -2 log |(e_{Z1}, e_{Z2})|`. The noncompact dual
//! lives on the bounded domain `σ_max(Z) < 1` with the kernel
//! `det(I - Z1 Z2†)`.

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::grassmann::{self, ChartZ, Plane};
use crate::matfun::SpectralFactorization;
use crate::{CMat, GeoError, Result};

/// Overlap modulus below which the diastasis is undefined.
pub const DIASTASIS_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub value: Complex64,
}

impl Overlap {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// A representative of a ray in `P(Λⁿ C^{n+m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveVector {
    pub coords: Vec<Complex64>,
}

impl ProjectiveVector {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().all(|c| c.norm() == 0.0) {
            return Err(GeoError::ZeroVector);
        }
        Ok(Self { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian product `Σ conj(self_i) · other_i`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn same_block_shape(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(GeoError::ShapeMismatch {
            expected: format!("{:?}", a.shape()),
            found: format!("{:?}", b.shape()),
        });
    }
    Ok(())
}

fn gram_det(a: &CMat, b: &CMat, sign: f64) -> Complex64 {
    let n = a.nrows();
    (CMat::identity(n, n) + a * b.adjoint() * Complex64::new(sign, 0.0)).determinant()
}

fn normalized_kernel(z1: &ChartZ, z2: &ChartZ, sign: f64) -> Result<Overlap> {
    same_block_shape(&z1.0, &z2.0)?;
    let cross = gram_det(&z1.0, &z2.0, sign);
    // det(I ± Z Z†) is real and positive on the relevant domains.
    let self1 = gram_det(&z1.0, &z1.0, sign).re;
    let self2 = gram_det(&z2.0, &z2.0, sign).re;
    Ok(Overlap {
        value: cross / (self1 * self2).sqrt(),
    })
}

/// Normalized coherent-state overlap on the compact Grassmannian.
pub fn overlap(z1: &ChartZ, z2: &ChartZ) -> Result<Overlap> {
    normalized_kernel(z1, z2, 1.0)
}

/// `D(Z1, Z2) = -2 log |overlap|`.
pub fn diastasis(z1: &ChartZ, z2: &ChartZ) -> Result<f64> {
    let modulus = overlap(z1, z2)?.modulus();
    if modulus < DIASTASIS_FLOOR {
        return Err(GeoError::DiastasisUndefined { modulus });
    }
    // Rounding can push the modulus a hair above 1 for coincident points.
    Ok((-2.0 * modulus.ln()).max(0.0))
}

/// Fubini–Study (elliptic Cayley) distance between two rays.
pub fn cayley_distance(v1: &ProjectiveVector, v2: &ProjectiveVector) -> Result<f64> {
    let (n1, n2) = (v1.norm(), v2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(GeoError::ZeroVector);
    }
    if v1.len() != v2.len() {
        return Err(GeoError::ShapeMismatch {
            expected: v1.len().to_string(),
            found: v2.len().to_string(),
        });
    }
    let cos = (v1.inner(v2).norm() / (n1 * n2)).clamp(0.0, 1.0);
    Ok(cos.acos())
}

/// Row subsets of size `n` out of `0..n+m`, in lexicographic order.
pub fn row_subsets(n: usize, total: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..total).combinations(n)
}

/// Plücker coordinates: all `n × n` minors of the frame, rows taken in
/// lexicographic subset order.
pub fn plucker(p: &Plane) -> ProjectiveVector {
    let shape = p.shape();
    let frame = p.frame();
    let coords = row_subsets(shape.n(), shape.total())
        .map(|rows| frame.select_rows(rows.iter()).determinant())
        .collect();
    ProjectiveVector { coords }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiastasisCheck {
    pub diastasis: f64,
    pub theta: f64,
    pub residual: f64,
}

/// Compares the kernel diastasis with `-2 log cos θ`, where `θ` is the
/// Cayley distance between the Plücker images of the two chart points.
pub fn check_diastasis_relation(z1: &ChartZ, z2: &ChartZ) -> Result<DiastasisCheck> {
    let d = diastasis(z1, z2)?;
    let v1 = plucker(&grassmann::frame_from_z(z1)?);
    let v2 = plucker(&grassmann::frame_from_z(z2)?);
    let theta = cayley_distance(&v1, &v2)?;
    let residual = (d + 2.0 * theta.cos().ln()).abs();
    Ok(DiastasisCheck {
        diastasis: d,
        theta,
        residual,
    })
}

/// Normalized kernel of the noncompact dual on `{σ_max(Z) < 1}`; its modulus
/// is at least one.
pub fn noncompact_overlap(z1: &ChartZ, z2: &ChartZ) -> Result<Overlap> {
    for z in [z1, z2] {
        let sigma_max = SpectralFactorization::of(&z.0).largest();
        if sigma_max >= 1.0 {
            return Err(GeoError::OutsideDomain { sigma_max });
        }
    }
    normalized_kernel(z1, z2, -1.0)
}

/// Noncompact diastasis `D = 2 log |kernel|`.
pub fn noncompact_diastasis(z1: &ChartZ, z2: &ChartZ) -> Result<f64> {
    Ok((2.0 * noncompact_overlap(z1, z2)?.modulus().ln()).max(0.0))
}
