//! The Grassmannian `G_n(C^{n+m})` in its defining matrix realization.
//!
//! Conventions shared by every module:
//! - the base plane is `O = span(e_1, .., e_n)`, frame `(I_n; 0)`;
//! - a tangent (normal coordinate) `B ∈ C^{n×m}` generates the
//!   antihermitian block `(0 B; -B† 0)` and the geodesic is the first `n`
//!   columns of `exp(t (0 B; -B† 0))`;
//! - the chart point `Z ∈ C^{n×m}` is the span of `(I_n; -Z†)`;
//! - the metric makes a unit-Frobenius `B` a unit-speed geodesic, so the
//!   distance between planes is the 2-norm of their principal angles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matfun::{self, ScalarKernel, SpectralFactorization, TOL_POLE};
use crate::sampling::SampleStream;
use crate::{CMat, GeoError, Result};

/// Tolerance on `frame† frame = I` accepted by [`Plane::from_frame`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Principal-angle tolerance for plane equality.
pub const PLANE_EQ_TOL: f64 = 1e-8;
/// Smallest admissible singular value of the top block in the chart.
pub const CHART_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    n: usize,
    m: usize,
}

impl Shape {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(GeoError::InvalidShape { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `min(n, m)`, the number of nontrivial principal angles.
    pub fn r(&self) -> usize {
        self.n.min(self.m)
    }

    /// Ambient dimension `n + m`.
    pub fn total(&self) -> usize {
        self.n + self.m
    }

    /// Real dimension of the Grassmannian, `2nm`.
    pub fn real_dim(&self) -> usize {
        2 * self.n * self.m
    }

    pub fn transposed(&self) -> Self {
        Self { n: self.m, m: self.n }
    }

    /// Checks that `mat` is `n × m`.
    pub fn check_block(&self, mat: &CMat) -> Result<()> {
        if mat.shape() != (self.n, self.m) {
            return Err(GeoError::ShapeMismatch {
                expected: format!("{}x{}", self.n, self.m),
                found: format!("{}x{}", mat.nrows(), mat.ncols()),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "G_{}(C^{})", self.n, self.n + self.m)
    }
}

/// An `n`-plane in `C^{n+m}`, represented by an orthonormal frame.
///
/// The frame is one representative of the plane; compare planes with
/// [`Plane::same_as`], never by frame entries.
#[derive(Debug, Clone)]
pub struct Plane {
    frame: CMat,
    shape: Shape,
}

impl Plane {
    pub fn from_frame(frame: CMat, shape: Shape) -> Result<Self> {
        if frame.shape() != (shape.total(), shape.n()) {
            return Err(GeoError::ShapeMismatch {
                expected: format!("{}x{}", shape.total(), shape.n()),
                found: format!("{}x{}", frame.nrows(), frame.ncols()),
            });
        }
        let defect = (frame.adjoint() * &frame - CMat::identity(shape.n(), shape.n())).norm();
        if defect > ORTHONORMAL_TOL {
            return Err(GeoError::NotOrthonormal { defect });
        }
        Ok(Self { frame, shape })
    }

    /// Column span of an arbitrary full-rank `(n+m) × n` matrix.
    pub fn span_of(columns: CMat, shape: Shape) -> Result<Self> {
        if columns.shape() != (shape.total(), shape.n()) {
            return Err(GeoError::ShapeMismatch {
                expected: format!("{}x{}", shape.total(), shape.n()),
                found: format!("{}x{}", columns.nrows(), columns.ncols()),
            });
        }
        let svd = SpectralFactorization::of(&columns);
        if svd.smallest() < 1e-12 * svd.largest().max(1.0) {
            return Err(GeoError::InvalidArgument("columns are rank deficient".into()));
        }
        // Polar factor: the closest orthonormal frame with the same span.
        let ones = vec![1.0; svd.rank()];
        Self::from_frame(svd.compose(&ones), shape)
    }

    /// The base plane `O = span(e_1, .., e_n)`.
    pub fn base(shape: Shape) -> Self {
        Self {
            frame: CMat::identity(shape.total(), shape.n()),
            shape,
        }
    }

    /// Span of the standard basis vectors with the given (0-based) indices.
    pub fn coordinate(shape: Shape, rows: &[usize]) -> Result<Self> {
        if rows.len() != shape.n() || rows.iter().any(|&r| r >= shape.total()) {
            return Err(GeoError::InvalidArgument(format!(
                "coordinate plane needs {} distinct indices below {}",
                shape.n(),
                shape.total()
            )));
        }
        let mut frame = CMat::zeros(shape.total(), shape.n());
        for (col, &row) in rows.iter().enumerate() {
            frame[(row, col)] = Complex64::new(1.0, 0.0);
        }
        Self::from_frame(frame, shape)
    }

    /// Haar-random plane.
    pub fn random(shape: Shape, rng: &mut SampleStream) -> Self {
        let g = rng.complex_matrix(shape.total(), shape.n());
        let frame = g.qr().q();
        Self { frame, shape }
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Orthogonal projector `frame · frame†`.
    pub fn projector(&self) -> CMat {
        &self.frame * self.frame.adjoint()
    }

    /// Top `n × n` block of the frame.
    pub fn top_block(&self) -> CMat {
        self.frame.rows(0, self.shape.n()).into_owned()
    }

    pub fn bottom_block(&self) -> CMat {
        self.frame.rows(self.shape.n(), self.shape.m()).into_owned()
    }

    pub fn angles_to(&self, other: &Plane) -> Result<Vec<f64>> {
        principal_angles(self, other)
    }

    pub fn same_as(&self, other: &Plane) -> bool {
        self.angles_to(other)
            .map(|a| a.iter().all(|&x| x <= PLANE_EQ_TOL))
            .unwrap_or(false)
    }

    /// Image under an ambient unitary `k`.
    pub fn transformed(&self, k: &CMat) -> Result<Self> {
        if k.shape() != (self.shape.total(), self.shape.total()) {
            return Err(GeoError::ShapeMismatch {
                expected: format!("{0}x{0}", self.shape.total()),
                found: format!("{}x{}", k.nrows(), k.ncols()),
            });
        }
        Self::from_frame(k * &self.frame, self.shape)
    }
}

/// Normal coordinates `B ∈ C^{n×m}` at the base plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentB(pub CMat);

/// Chart coordinates `Z ∈ C^{n×m}` on the dense cell around the base plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartZ(pub CMat);

impl TangentB {
    pub fn zeros(shape: Shape) -> Self {
        Self(CMat::zeros(shape.n(), shape.m()))
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.0.nrows(), self.0.ncols())
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(&self.0 * Complex64::new(t, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn largest_singular(&self) -> f64 {
        SpectralFactorization::of(&self.0).largest()
    }
}

impl ChartZ {
    pub fn zeros(shape: Shape) -> Self {
        Self(CMat::zeros(shape.n(), shape.m()))
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.0.nrows(), self.0.ncols())
    }
}

pub fn principal_angles(p: &Plane, q: &Plane) -> Result<Vec<f64>> {
    if p.shape != q.shape {
        return Err(GeoError::ShapeMismatch {
            expected: p.shape.to_string(),
            found: q.shape.to_string(),
        });
    }
    matfun::principal_angles(&p.frame, &q.frame)
}

/// `Z = B tan√(B†B) / √(B†B)`.
pub fn exp_map(b: &TangentB) -> Result<ChartZ> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let sigma = b.largest_singular();
    if sigma >= half_pi - TOL_POLE {
        return Err(GeoError::ChartEscape { sigma });
    }
    Ok(ChartZ(matfun::apply_odd_kernel(&b.0, ScalarKernel::Tanc)?))
}

/// `B = Z arctan√(Z†Z) / √(Z†Z)`, the inverse of [`exp_map`].
pub fn log_map(z: &ChartZ) -> TangentB {
    TangentB(
        matfun::apply_odd_kernel(&z.0, ScalarKernel::Arctanc)
            .expect("arctan has no poles on the real line"),
    )
}

/// Orthonormal frame `(I; -Z†)(I + Z Z†)^{-1/2}` of the chart point `Z`.
pub fn frame_from_z(z: &ChartZ) -> Result<Plane> {
    let shape = z.shape()?;
    let (n, m) = (shape.n(), shape.m());
    let svd = SpectralFactorization::of(&z.0);
    // (I + Z Z†)^{-1/2} = I + U diag(1/√(1+σ²) - 1) U†
    let mut inv_sqrt = CMat::identity(n, n);
    for (j, &s) in svd.singulars.iter().enumerate() {
        let w = 1.0 / (1.0 + s * s).sqrt() - 1.0;
        let u = svd.left.column(j);
        inv_sqrt += (&u * u.adjoint()) * Complex64::new(w, 0.0);
    }
    let mut stacked = CMat::zeros(n + m, n);
    stacked.rows_mut(0, n).copy_from(&inv_sqrt);
    // -Z† (I + Z Z†)^{-1/2} = -V diag(σ/√(1+σ²)) U†, kept in factored form
    // so that large σ does not cancel.
    let sines: Vec<f64> = svd.singulars.iter().map(|s| s.atan().sin()).collect();
    stacked.rows_mut(n, m).copy_from(&(-svd.compose(&sines).adjoint()));
    Plane::from_frame(stacked, shape)
}

/// Chart coordinates of a plane, `Z = -(bottom · top⁻¹)†`.
pub fn z_from_plane(p: &Plane) -> Result<ChartZ> {
    let top = p.top_block();
    let smallest = SpectralFactorization::of(&top).smallest();
    if smallest <= CHART_TOL {
        return Err(GeoError::OnPolarDivisor { smallest });
    }
    let rhs = p.bottom_block().adjoint();
    let solved = top
        .adjoint()
        .lu()
        .solve(&rhs)
        .ok_or(GeoError::OnPolarDivisor { smallest })?;
    Ok(ChartZ(-solved))
}

/// Where a plane sits in the decomposition `M = V_0 ⊔ Σ_0`.
#[derive(Debug, Clone)]
pub enum ChartMembership {
    InChart(ChartZ),
    OnPolarDivisor,
}

pub fn classify_plane(p: &Plane) -> ChartMembership {
    match z_from_plane(p) {
        Ok(z) => ChartMembership::InChart(z),
        Err(_) => ChartMembership::OnPolarDivisor,
    }
}

/// Geodesic from the base plane with initial velocity `b`, evaluated at `t`.
///
/// With `t b = U Σ V†` the frame is `(I + U (cos Σ - I) U†; -V sin Σ U†)`,
/// the first `n` columns of `exp(t (0 b; -b† 0))`.
pub fn geodesic(b: &TangentB, t: f64) -> Result<Plane> {
    let shape = b.shape()?;
    let (n, m) = (shape.n(), shape.m());
    let svd = SpectralFactorization::of(&(&b.0 * Complex64::new(t, 0.0)));
    let cos_minus_one: Vec<f64> = svd.singulars.iter().map(|s| s.cos() - 1.0).collect();
    let sin: Vec<f64> = svd.singulars.iter().map(|s| s.sin()).collect();

    let mut top = CMat::identity(n, n);
    let mut bottom = CMat::zeros(m, n);
    for j in 0..svd.rank() {
        let u = svd.left.column(j);
        let v = svd.right.column(j);
        top += (&u * u.adjoint()) * Complex64::new(cos_minus_one[j], 0.0);
        bottom -= (&v * u.adjoint()) * Complex64::new(sin[j], 0.0);
    }
    let mut frame = CMat::zeros(n + m, n);
    frame.rows_mut(0, n).copy_from(&top);
    frame.rows_mut(n, m).copy_from(&bottom);
    Plane::from_frame(frame, shape)
}

/// Geodesic distance `√(Σ θᵢ²)` over principal angles.
pub fn distance(p: &Plane, q: &Plane) -> Result<f64> {
    let angles = principal_angles(p, q)?;
    Ok(angles.iter().map(|a| a * a).sum::<f64>().sqrt())
}

/// Block-diagonal unitary `diag(k1, k2)` acting on `C^{n+m}`.
pub fn block_diagonal(k1: &CMat, k2: &CMat) -> CMat {
    let (n, m) = (k1.nrows(), k2.nrows());
    let mut k = CMat::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(k1);
    k.view_mut((n, n), (m, m)).copy_from(k2);
    k
}
