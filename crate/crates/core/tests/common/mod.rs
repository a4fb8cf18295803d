#![allow(dead_code)]

use nalgebra::DMatrix;
use ncpm_core::{OpenMindedness, ProductConversionGraph, SocialNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus extra edges with probability `extra`.
pub fn random_connected(n: usize, extra: f64, rng: &mut ChaCha8Rng) -> SocialNetwork {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(extra) && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    SocialNetwork::from_edges(n, &edges).unwrap()
}

/// Entries uniform on (lo, hi).
pub fn random_alpha(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> OpenMindedness {
    OpenMindedness::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Strictly positive row-stochastic `k × k` matrix.
pub fn positive_stochastic(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(k, k, |_, _| rng.random_range(0.05..1.0));
    for mut row in m.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    m
}

/// Block-diagonal conversion matrix over positive blocks, optionally followed
/// by `transient` products that leak into every block.
pub fn structured_conversion(blocks: &[usize], transient: usize, rng: &mut ChaCha8Rng) -> ProductConversionGraph {
    let absorbing: usize = blocks.iter().sum();
    let r = absorbing + transient;
    let mut delta = DMatrix::zeros(r, r);
    let mut at = 0;
    for &k in blocks {
        let b = positive_stochastic(k, rng);
        delta.view_mut((at, at), (k, k)).copy_from(&b);
        at += k;
    }
    for t in 0..transient {
        let row: Vec<f64> = (0..r).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = row.iter().sum();
        for (c, v) in row.into_iter().enumerate() {
            delta[(absorbing + t, c)] = v / s;
        }
    }
    ProductConversionGraph::new(delta).unwrap()
}

/// Absorbing components `{0, 1}` and `{2}`; transient product 3 feeds only
/// product 1.
pub fn two_components_with_transient() -> ProductConversionGraph {
    ProductConversionGraph::from_rows(&[
        vec![0.6, 0.4, 0.0, 0.0],
        vec![0.3, 0.7, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.8, 0.0, 0.2],
    ])
    .unwrap()
}

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    ncpm_core::ncpm::inf_norm(m)
}
