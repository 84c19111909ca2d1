//! Seeded random matrices and states for fixtures, optimizers and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator_core::{herm_part, identity, re, CMat, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for task `index` derived from a base seed.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17))
}

fn gauss(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

/// Ginibre matrix with standard complex Gaussian entries.
pub fn ginibre(d: usize, r: &mut impl Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(gauss(r), gauss(r)) * re(std::f64::consts::FRAC_1_SQRT_2))
}

pub fn hermitian(d: usize, r: &mut impl Rng) -> CMat {
    herm_part(&ginibre(d, r))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn unitary(d: usize, r: &mut impl Rng) -> CMat {
    let qr = ginibre(d, r).qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut u = q.clone();
    for k in 0..d {
        let z = rr[(k, k)];
        let ph = if z.norm() > 0.0 { z / re(z.norm()) } else { re(1.0) };
        u.column_mut(k).iter_mut().for_each(|x| *x *= ph);
    }
    u
}

/// Positive semidefinite G G†.
pub fn psd(d: usize, r: &mut impl Rng) -> CMat {
    let g = ginibre(d, r);
    &g * g.adjoint()
}

/// Hilbert–Schmidt random density matrix.
pub fn density(d: usize, r: &mut impl Rng) -> CMat {
    let p = psd(d, r);
    let t = p.trace();
    p / t
}

/// Density matrix whose smallest eigenvalue is at least `floor`·(1/d) by mixing with I/d.
pub fn full_rank_density(d: usize, floor: f64, r: &mut impl Rng) -> CMat {
    let rho = density(d, r);
    rho * re(1.0 - floor) + identity(d) * re(floor / d as f64)
}

/// Random pure state |ψ⟩⟨ψ|.
pub fn pure(d: usize, r: &mut impl Rng) -> CMat {
    let v = nalgebra::DVector::from_fn(d, |_, _| C64::new(gauss(r), gauss(r)));
    let n = v.norm();
    let v = v / re(n);
    &v * v.adjoint()
}

/// Full-rank state with eigenvalues bounded below by `min_weight/d` in a random basis.
pub fn reference_state(d: usize, min_weight: f64, r: &mut impl Rng) -> CMat {
    let raw: Vec<f64> = (0..d).map(|_| -r.random::<f64>().max(1e-12).ln()).collect();
    let s: f64 = raw.iter().sum();
    let vals: Vec<f64> = raw.iter().map(|x| (1.0 - min_weight) * x / s + min_weight / d as f64).collect();
    let u = unitary(d, r);
    &u * crate::operator_core::diag(&vals) * u.adjoint()
}
