//! Seven invariants of `G_n(C^{n+m})` that all equal `C(n+m, n)`.
//!
//! Each count has its own route: Weyl-group orders, partitions in a box,
//! the Weyl dimension product, the length of the Plücker vector, pairwise
//! orthogonality of coordinate coherent states, and the critical points of
//! a height function. Routes share nothing beyond integer arithmetic.

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::coherent;
use crate::grassmann::{self, ChartZ, Plane, Shape};
use crate::matfun;
use crate::sampling::SampleStream;
use crate::{CMat, GeoError, Result};

/// Largest `n + m` for which counts are returned as `u64`.
pub const MAX_EXACT_TOTAL: usize = 60;
/// Largest `n + m` for enumerations over coordinate planes.
pub const MAX_ENUM_TOTAL: usize = 20;
pub const CRITICAL_GRAD_TOL: f64 = 1e-7;
pub const NONCRITICAL_GRAD_MIN: f64 = 1e-3;
pub const RANDOM_PLANE_PROBES: usize = 50;

/// Distinct coefficients `a_1, .., a_{n+m}` of the diagonal Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyWeights(Vec<f64>);

impl EnergyWeights {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        let mut sorted = a.clone();
        sorted.sort_by(f64::total_cmp);
        let gap = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if gap <= 1e-9 || a.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::DegenerateWeights { gap });
        }
        Ok(Self(a))
    }

    /// `a_k = k`.
    pub fn sequential(total: usize) -> Self {
        Self((1..=total).map(|k| k as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn check_exact(shape: Shape) -> Result<()> {
    if shape.total() > MAX_EXACT_TOTAL {
        return Err(GeoError::Overflow { total: shape.total() });
    }
    Ok(())
}

fn factorial(k: usize) -> BigUint {
    (1..=k as u64).map(BigUint::from).product()
}

/// `|W_G| / |W_K| = (n+m)! / (n! m!)`.
pub fn euler_characteristic(shape: Shape) -> Result<u64> {
    check_exact(shape)?;
    let ratio = factorial(shape.total()) / (factorial(shape.n()) * factorial(shape.m()));
    ratio.to_u64().ok_or(GeoError::Overflow { total: shape.total() })
}

/// Number of Schubert cells: partitions whose Young diagram fits in an
/// `n × m` box, counted row by row.
pub fn cell_count(shape: Shape) -> Result<u64> {
    check_exact(shape)?;
    let overflow = GeoError::Overflow { total: shape.total() };
    // ways[j]: partial partitions whose last part is exactly j. Before the
    // first row the bound is the box width.
    let mut ways = vec![0u64; shape.m() + 1];
    ways[shape.m()] = 1;
    for _ in 0..shape.n() {
        // The next part may be any value not exceeding the previous one.
        let mut next = vec![0u64; shape.m() + 1];
        let mut running = 0u64;
        for j in (0..=shape.m()).rev() {
            running = running.checked_add(ways[j]).ok_or(overflow.clone())?;
            next[j] = running;
        }
        ways = next;
    }
    ways.iter()
        .try_fold(0u64, |acc, &w| acc.checked_add(w))
        .ok_or(overflow)
}

/// Weyl dimension formula for `SU(n+m)` at the `n`-th fundamental weight,
/// `Π_{i<j} (λ_i - λ_j + j - i) / (j - i)` with `λ = (1^n, 0^m)`.
pub fn borel_weil_dim(shape: Shape) -> Result<u64> {
    check_exact(shape)?;
    let total = shape.total();
    let weight = |i: usize| -> i64 { i64::from(i < shape.n()) };
    let mut product = BigRational::one();
    for i in 0..total {
        for j in i + 1..total {
            let gap = (j - i) as i64;
            product *= BigRational::new(BigInt::from(weight(i) - weight(j) + gap), BigInt::from(gap));
        }
    }
    if !product.is_integer() {
        return Err(GeoError::InvalidArgument("Weyl product is not an integer".into()));
    }
    product
        .to_integer()
        .to_u64()
        .ok_or(GeoError::Overflow { total })
}

/// Coordinate planes `span(e_i : i ∈ S)` for every `n`-subset `S`, in
/// lexicographic order.
pub fn coordinate_planes(shape: Shape) -> Result<Vec<Plane>> {
    if shape.total() > MAX_ENUM_TOTAL {
        return Err(GeoError::TooLarge { total: shape.total() });
    }
    (0..shape.total())
        .combinations(shape.n())
        .map(|rows| Plane::coordinate(shape, &rows))
        .collect()
}

/// Maximal number of mutually orthogonal coherent vectors: the coordinate
/// planes, after checking that their Plücker images are orthonormal.
pub fn orthogonal_coherent_count(shape: Shape) -> Result<u64> {
    let vectors: Vec<coherent::ProjectiveVector> = coordinate_planes(shape)?
        .iter()
        .map(coherent::plucker)
        .collect();
    for (i, v) in vectors.iter().enumerate() {
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(GeoError::InvalidArgument(format!("coordinate state {i} is not normalized")));
        }
        for w in &vectors[i + 1..] {
            let modulus = v.inner(w).norm();
            if modulus >= 1e-12 {
                return Err(GeoError::InvalidArgument(format!(
                    "coordinate states overlap with modulus {modulus}"
                )));
            }
        }
    }
    Ok(vectors.len() as u64)
}

/// Length of the Plücker vector, the smallest `N` with `M ↪ CP^{N-1}`.
pub fn kodaira_dimension(shape: Shape) -> Result<u64> {
    if shape.total() > MAX_ENUM_TOTAL {
        return Err(GeoError::TooLarge { total: shape.total() });
    }
    Ok(coherent::plucker(&Plane::base(shape)).len() as u64)
}

/// Energy `f(P) = tr(diag(a) · frame · frame†)`.
pub fn energy(p: &Plane, w: &EnergyWeights) -> f64 {
    let frame = p.frame();
    w.values()
        .iter()
        .enumerate()
        .map(|(i, a)| a * frame.row(i).norm_squared())
        .sum()
}

/// Unitary whose first `n` columns span `p`.
fn centered_basis(p: &Plane) -> CMat {
    let shape = p.shape();
    let total = shape.total();
    let mut stacked = CMat::zeros(total, shape.n() + total);
    stacked.columns_mut(0, shape.n()).copy_from(p.frame());
    stacked
        .columns_mut(shape.n(), total)
        .copy_from(&CMat::identity(total, total));
    stacked.qr().q()
}

/// Euclidean norm of the realified gradient of `f` in the chart centered at
/// `p`, by central differences.
pub fn energy_gradient_norm(p: &Plane, w: &EnergyWeights) -> Result<f64> {
    let shape = p.shape();
    let basis = centered_basis(p);
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let z = ChartZ(matfun::complexify(x, shape.n(), shape.m())?);
        let local = grassmann::frame_from_z(&z)?;
        Ok(vec![energy(&local.transformed(&basis)?, w)])
    };
    let origin = vec![0.0; shape.real_dim()];
    let jac = matfun::jacobian_central(f, &origin, matfun::default_step(&origin))?;
    Ok(jac.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCheck {
    pub count: u64,
    pub certified: bool,
    pub max_critical_gradient: f64,
    pub min_random_gradient: f64,
}

/// Certifies the coordinate planes as critical points of the energy and
/// rejects [`RANDOM_PLANE_PROBES`] random planes.
pub fn energy_critical_check(shape: Shape, w: &EnergyWeights, seed: u64) -> Result<CriticalCheck> {
    if w.values().len() != shape.total() {
        return Err(GeoError::InvalidArgument(format!(
            "expected {} weights, got {}",
            shape.total(),
            w.values().len()
        )));
    }
    let mut count = 0u64;
    let mut max_critical_gradient = 0.0f64;
    for plane in coordinate_planes(shape)? {
        let g = energy_gradient_norm(&plane, w)?;
        max_critical_gradient = max_critical_gradient.max(g);
        if g < CRITICAL_GRAD_TOL {
            count += 1;
        }
    }
    let mut min_random_gradient = f64::INFINITY;
    for i in 0..RANDOM_PLANE_PROBES {
        let plane = Plane::random(shape, &mut SampleStream::new(seed, i as u64));
        min_random_gradient = min_random_gradient.min(energy_gradient_norm(&plane, w)?);
    }
    let certified = max_critical_gradient < CRITICAL_GRAD_TOL && min_random_gradient > NONCRITICAL_GRAD_MIN;
    Ok(CriticalCheck {
        count,
        certified,
        max_critical_gradient,
        min_random_gradient,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SevenNumbersReport {
    pub orthogonal_coherent_count: u64,
    pub sections_dim: u64,
    pub borel_weil_dim: u64,
    pub kodaira_n: u64,
    pub critical_point_count: u64,
    pub euler_characteristic: u64,
    pub cell_count: u64,
    pub critical_certified: bool,
    pub all_equal: bool,
}

impl SevenNumbersReport {
    pub fn values(&self) -> [u64; 7] {
        [
            self.orthogonal_coherent_count,
            self.sections_dim,
            self.borel_weil_dim,
            self.kodaira_n,
            self.critical_point_count,
            self.euler_characteristic,
            self.cell_count,
        ]
    }
}

/// Assembles the seven counts. The number of holomorphic sections is
/// reported as the Borel–Weil dimension.
pub fn seven_numbers(shape: Shape, w: &EnergyWeights, seed: u64) -> Result<SevenNumbersReport> {
    let borel_weil = borel_weil_dim(shape)?;
    let critical = energy_critical_check(shape, w, seed)?;
    let mut report = SevenNumbersReport {
        orthogonal_coherent_count: orthogonal_coherent_count(shape)?,
        sections_dim: borel_weil,
        borel_weil_dim: borel_weil,
        kodaira_n: kodaira_dimension(shape)?,
        critical_point_count: critical.count,
        euler_characteristic: euler_characteristic(shape)?,
        cell_count: cell_count(shape)?,
        critical_certified: critical.certified,
        all_equal: false,
    };
    let values = report.values();
    report.all_equal = values.iter().all(|&v| v == values[0]);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: usize, m: usize) -> Shape {
        Shape::new(n, m).unwrap()
    }

    #[test]
    fn euler_values() {
        assert_eq!(euler_characteristic(shape(1, 1)).unwrap(), 2);
        assert_eq!(euler_characteristic(shape(2, 2)).unwrap(), 6);
        assert_eq!(euler_characteristic(shape(2, 3)).unwrap(), 10);
        assert_eq!(euler_characteristic(shape(30, 30)).unwrap(), 118_264_581_564_861_424);
        assert!(matches!(euler_characteristic(shape(31, 30)), Err(GeoError::Overflow { .. })));
    }

    #[test]
    fn cell_values() {
        assert_eq!(cell_count(shape(1, 1)).unwrap(), 2);
        for m in 1..8 {
            assert_eq!(cell_count(shape(1, m)).unwrap(), m as u64 + 1);
        }
        assert_eq!(cell_count(shape(2, 2)).unwrap(), 6);
    }

    #[test]
    fn weyl_values() {
        assert_eq!(borel_weil_dim(shape(1, 1)).unwrap(), 2);
        assert_eq!(borel_weil_dim(shape(2, 2)).unwrap(), 6);
        assert_eq!(borel_weil_dim(shape(2, 3)).unwrap(), 10);
    }

    #[test]
    fn orthogonal_counts() {
        assert_eq!(orthogonal_coherent_count(shape(1, 1)).unwrap(), 2);
        assert_eq!(orthogonal_coherent_count(shape(1, 2)).unwrap(), 3);
        assert_eq!(orthogonal_coherent_count(shape(2, 2)).unwrap(), 6);
        assert!(matches!(orthogonal_coherent_count(shape(11, 10)), Err(GeoError::TooLarge { .. })));
    }

    #[test]
    fn degenerate_weights_rejected() {
        assert!(matches!(
            EnergyWeights::new(vec![1.0, 1.0, 2.0, 3.0]),
            Err(GeoError::DegenerateWeights { .. })
        ));
    }

    #[test]
    fn energy_on_cp1() {
        let w = EnergyWeights::new(vec![0.0, 1.0]).unwrap();
        let check = energy_critical_check(shape(1, 1), &w, 0).unwrap();
        assert_eq!(check.count, 2);
        assert!(check.certified);
    }

    #[test]
    fn energy_on_g2_c4() {
        let w = EnergyWeights::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let check = energy_critical_check(shape(2, 2), &w, 1).unwrap();
        assert_eq!(check.count, 6);
        assert!(check.certified);
    }

    #[test]
    fn seven_numbers_small() {
        for (n, m, expected) in [(1, 1, 2), (2, 2, 6), (2, 3, 10)] {
            let s = shape(n, m);
            let report = seven_numbers(s, &EnergyWeights::sequential(s.total()), 0).unwrap();
            assert!(report.all_equal, "{report:?}");
            assert_eq!(report.values(), [expected; 7]);
        }
    }
}
