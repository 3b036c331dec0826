#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use temporal_steering::qmat::{c, ComplexMatrix, DensityMatrix, C64};
use temporal_steering::steering::{Assemblage, MeasurementSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.random::<f64>().max(1e-300);
    let v: f64 = r.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_complex_vec(r: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(gaussian(r), gaussian(r))).collect()
}

/// Haar-ish random orthonormal basis by Gram-Schmidt.
pub fn random_basis(r: &mut impl Rng, d: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = random_complex_vec(r, d);
        for b in &basis {
            let proj: C64 = b.iter().zip(&v).map(|(p, q)| p.conj() * q).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

pub fn random_measurements(r: &mut impl Rng, d: usize, n: usize) -> MeasurementSet {
    MeasurementSet::from_bases((0..n).map(|_| random_basis(r, d)).collect()).unwrap()
}

pub fn random_state(r: &mut impl Rng, d: usize, rank: usize) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for _ in 0..rank {
        let v = random_complex_vec(r, d);
        m += &ComplexMatrix::outer(&v, &v);
    }
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
}

/// Member-wise depolarizing channel σ ↦ (1−p)σ + p·tr(σ)·I/d.
pub fn depolarize(asm: &Assemblage, p: f64) -> Assemblage {
    let d = asm.dim();
    let members = asm
        .members()
        .iter()
        .map(|m| &m.scale_real(1.0 - p) + &ComplexMatrix::identity(d).scale_real(p * m.trace().re / d as f64))
        .collect();
    Assemblage::new(asm.n_settings(), asm.n_outcomes(), members).unwrap()
}

/// p·A + (1−p)·B member-wise.
pub fn mix(a: &Assemblage, b: &Assemblage, p: f64) -> Assemblage {
    let members = a.members().iter().zip(b.members()).map(|(x, y)| &x.scale_real(p) + &y.scale_real(1.0 - p)).collect();
    Assemblage::new(a.n_settings(), a.n_outcomes(), members).unwrap()
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}
