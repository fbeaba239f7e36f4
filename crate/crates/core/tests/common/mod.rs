//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use gridsens::matrix::{spectral_radius, DenseMatrix};
use gridsens::nalgebra::DMatrix;
use gridsens::network::{network_from_directions, AssembledNetwork, Direction};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gaussian matrix rescaled to spectral radius `radius`.
pub fn stable_matrix(rng: &mut impl Rng, n: usize, radius: f64) -> DenseMatrix {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = DenseMatrix::new(m).unwrap();
        let r = spectral_radius(&m).unwrap();
        if r > 1e-3 {
            return DenseMatrix::new(m.as_matrix() * (radius / r)).unwrap();
        }
    }
}

/// Random symmetric PSD matrix with unit Frobenius norm.
pub fn psd_matrix(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let rank = rng.random_range(1..=n);
    let c = DMatrix::from_fn(rank, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = c.transpose() * c;
    let q = (&q + q.transpose()) * 0.5;
    let norm = q.norm();
    DenseMatrix::new(q / norm).unwrap()
}

/// Stable network of dimension `n` with `links` random directions.
pub fn random_network(rng: &mut impl Rng, n: usize, links: usize, radius: f64) -> AssembledNetwork {
    let a = stable_matrix(rng, n, radius);
    let dirs = (0..links)
        .map(|k| Direction::new(format!("L{}", k + 1), normal_vec(rng, n), normal_vec(rng, n), 0.0))
        .collect();
    network_from_directions(a, dirs).unwrap()
}
