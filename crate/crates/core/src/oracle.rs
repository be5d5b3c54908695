//! Independent reference computations for the test suites.
//!
//! Nothing here reuses the SVD-driven kernels of the library: geodesics come
//! from a dense Taylor matrix exponential, angles from Hermitian
//! eigenvalues, hyperbolic distances from explicit ball automorphisms, and
//! counts from brute-force enumeration.

use num_complex::Complex64;

use crate::CMat;

/// `exp(a)` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn dense_expm(a: &CMat) -> CMat {
    let dim = a.nrows();
    let norm = a.norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = CMat::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// First `n` columns of `exp(t (0 b; -b† 0))`.
pub fn geodesic_frame_dense(b: &CMat, t: f64) -> CMat {
    let (n, m) = b.shape();
    let mut gen = CMat::zeros(n + m, n + m);
    gen.view_mut((0, n), (n, m)).copy_from(&(b * Complex64::new(t, 0.0)));
    gen.view_mut((n, 0), (m, n)).copy_from(&(-(b.adjoint() * Complex64::new(t, 0.0))));
    dense_expm(&gen).columns(0, n).into_owned()
}

/// Principal angles from the eigenvalues of `(P†Q)(P†Q)†`, ascending.
pub fn principal_angles_eig(p: &CMat, q: &CMat) -> Vec<f64> {
    let cross = p.adjoint() * q;
    let gram = &cross * cross.adjoint();
    let mut angles: Vec<f64> = gram
        .symmetric_eigenvalues()
        .iter()
        .map(|&c2| c2.clamp(0.0, 1.0).sqrt().acos())
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
}

/// `|det(P†Q)|`, the overlap of two planes through Cauchy–Binet.
pub fn frame_overlap(p: &CMat, q: &CMat) -> f64 {
    (p.adjoint() * q).determinant().norm()
}

fn inner(z: &[Complex64], a: &[Complex64]) -> Complex64 {
    z.iter().zip(a).map(|(x, y)| x * y.conj()).sum()
}

/// Hyperbolic distance on the unit ball of `C^m` (the `n = 1` noncompact
/// dual): `arctanh |φ_a(z)|` with the ball automorphism
/// `φ_a(z) = (a - P_a z - s_a Q_a z) / (1 - ⟨z, a⟩)`, `s_a = √(1 - |a|²)`.
pub fn ball_distance(a: &[Complex64], z: &[Complex64]) -> f64 {
    let aa = inner(a, a).re;
    let za = inner(z, a);
    let s = (1.0 - aa).sqrt();
    let denom = Complex64::new(1.0, 0.0) - za;
    let image: Vec<Complex64> = if aa == 0.0 {
        z.iter().map(|x| -x).collect()
    } else {
        a.iter()
            .zip(z)
            .map(|(&ai, &zi)| {
                let proj = ai * (za / aa);
                (ai - proj - (zi - proj) * s) / denom
            })
            .collect()
    };
    let rho = inner(&image, &image).re.sqrt();
    rho.atanh()
}

/// Partitions in an `n × m` box by brute force over `[0, m]^n`.
pub fn partitions_in_box(n: usize, m: usize) -> u64 {
    let mut count = 0u64;
    let mut parts = vec![0usize; n];
    loop {
        if parts.windows(2).all(|w| w[0] >= w[1]) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            parts[i] += 1;
            if parts[i] <= m {
                break;
            }
            parts[i] = 0;
            i += 1;
        }
    }
}

/// `C(total, k)` from Pascal's triangle.
pub fn pascal(total: usize, k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..total {
        let mut next = vec![1u64; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row[k]
}
