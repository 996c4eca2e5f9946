//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use lift_core::lift::BodySample;
use lift_core::{ConvexBody, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector<f64> {
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if c.iter().any(|x| *x != 0.0) {
            return Vector::new(c).unwrap();
        }
    }
}

fn point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Vector<f64> {
    Vector::new((0..dim).map(|_| rng.random_range(-spread..spread)).collect()).unwrap()
}

pub fn random_polytope(rng: &mut ChaCha8Rng, dim: usize) -> ConvexBody<f64> {
    let k = rng.random_range(1..=6);
    ConvexBody::polytope((0..k).map(|_| point(rng, dim, 3.0)).collect()).unwrap()
}

/// Any body kind in dimension `dim`.
pub fn random_body(rng: &mut ChaCha8Rng, dim: usize) -> ConvexBody<f64> {
    match rng.random_range(0..6) {
        0 => ConvexBody::ball(point(rng, dim, 2.0), rng.random_range(0.0..2.0)).unwrap(),
        1 => {
            let a: Vec<Vec<f64>> = (0..dim)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let q = (0..dim)
                .map(|i| (0..dim).map(|j| (0..dim).map(|k| a[i][k] * a[j][k]).sum()).collect())
                .collect();
            ConvexBody::ellipsoid(q).unwrap()
        }
        2 => ConvexBody::scaled_l1_ball((0..dim).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap(),
        3 => ConvexBody::segment(point(rng, dim, 2.0), point(rng, dim, 2.0)).unwrap(),
        4 => ConvexBody::singleton(point(rng, dim, 3.0)),
        _ => random_polytope(rng, dim),
    }
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn random_sample(rng: &mut ChaCha8Rng, dim: usize, max_n: usize) -> BodySample<f64> {
    let n = rng.random_range(1..=max_n);
    let bodies = (0..n).map(|_| random_body(rng, dim)).collect();
    BodySample::new(bodies, random_weights(rng, n)).unwrap()
}

/// Intervals with endpoints on the lattice `step * Z` inside `[0, top]`.
pub fn lattice_intervals(rng: &mut ChaCha8Rng, n: usize, step: f64, top: f64) -> Vec<(f64, f64)> {
    let cells = (top / step).round() as i64;
    (0..n)
        .map(|_| {
            let a = rng.random_range(0..=cells);
            let b = rng.random_range(0..=cells);
            (a.min(b) as f64 * step, a.max(b) as f64 * step)
        })
        .collect()
}
