#![allow(dead_code)]

use confsr::model::{ClusterParams, NodeVector, SpikeSignal};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c<G: Rng>(rng: &mut G) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// s nodes with pairwise wraparound distance at least `min_sep`.
pub fn spread_nodes<G: Rng>(rng: &mut G, s: usize, min_sep: f64) -> NodeVector {
    loop {
        let x: Vec<f64> = (0..s).map(|_| rng.random_range(-PI..PI)).collect();
        let ok = (0..s).all(|i| {
            (i + 1..s).all(|j| {
                let d = (x[i] - x[j]).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) >= min_sep
            })
        });
        if ok {
            return NodeVector::new(x).unwrap();
        }
    }
}

/// ℓ equispaced nodes at spacing Δ starting at `start`.
pub fn cluster(start: f64, ell: usize, delta: f64) -> NodeVector {
    NodeVector::new((0..ell).map(|k| start + k as f64 * delta).collect()).unwrap()
}

pub fn single_cluster_params(delta: f64, ell: usize) -> ClusterParams {
    ClusterParams {
        delta,
        rho: PI,
        s: ell,
        ell,
        tau: ell as f64 - 1.0,
    }
}

pub fn random_signal<G: Rng>(rng: &mut G, nodes: NodeVector) -> SpikeSignal {
    let s = nodes.len();
    let a = (0..s).map(|_| rand_c(rng)).collect();
    let b = (0..s).map(|_| rand_c(rng)).collect();
    SpikeSignal::new(nodes, a, b).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
