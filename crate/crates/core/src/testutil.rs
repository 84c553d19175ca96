//! Random fixtures shared by unit tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{riemannian_norm, ManifoldKind, ManifoldPoint, TangentVector};
use crate::io::{random_tangent, NormalSampler};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_point(kind: ManifoldKind, rng: &mut ChaCha8Rng) -> ManifoldPoint<f64> {
    match kind {
        ManifoldKind::Euclidean(n) => {
            ManifoldPoint::euclidean(&(0..n).map(|_| normal(rng)).collect::<Vec<_>>()).unwrap()
        }
        ManifoldKind::Sphere1 => ManifoldPoint::from_angle(rng.gen_range(-PI..PI)),
        ManifoldKind::Sphere2 => loop {
            let v: Vec<f64> = (0..3).map(|_| normal(rng)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
                break ManifoldPoint::sphere_from(&v).unwrap();
            }
        },
        ManifoldKind::SO3 => {
            let axis: Vec<f64> = (0..3).map(|_| normal(rng)).collect();
            let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
            let angle = rng.gen_range(0.0..3.0);
            ManifoldPoint::rotation([axis[0] / n * angle, axis[1] / n * angle, axis[2] / n * angle])
        }
        ManifoldKind::Spd(n) => {
            let b = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| normal(rng));
            let m = &b * b.transpose() / n as f64 + nalgebra::DMatrix::identity(n, n) * 0.5;
            let data: Vec<f64> = (0..n * n).map(|i| m[(i / n, i % n)]).collect();
            ManifoldPoint::new(kind, data).unwrap()
        }
    }
}

/// A tangent at `p` with Riemannian norm exactly `norm` (up to rounding).
pub fn tangent_with_norm(p: &ManifoldPoint<f64>, norm: f64, seed: u64) -> TangentVector<f64> {
    let mut s = NormalSampler::new(seed);
    loop {
        let v = random_tangent(p, &mut s).unwrap();
        let n = riemannian_norm(&v);
        if n > 1e-6 {
            return v.scaled(norm / n);
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub const ALL_KINDS: [ManifoldKind; 6] = [
    ManifoldKind::Euclidean(3),
    ManifoldKind::Sphere1,
    ManifoldKind::Sphere2,
    ManifoldKind::SO3,
    ManifoldKind::Spd(2),
    ManifoldKind::Spd(3),
];
