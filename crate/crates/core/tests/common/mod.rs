#![allow(dead_code)]

pub mod reference;

use std::io::Write;
use std::sync::{Mutex, MutexGuard};

use mvseg::geometry::{exp_map, riemannian_norm, ManifoldKind, ManifoldPoint, TangentVector};
use mvseg::io::{random_tangent, NormalSampler};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

/// Runs acceptance checks one at a time so timings are not disturbed.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints a verdict line that bypasses the test harness output capture.
pub fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("{verdict} criterion {criterion}: {detail}\n");
    let mut err = std::io::stderr();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
    pass
}

/// Seeded normals (for tangents) and uniforms.
pub struct Draw {
    pub normal: NormalSampler,
    uniform: ChaCha8Rng,
}

impl Draw {
    pub fn new(seed: u64) -> Self {
        Self {
            normal: NormalSampler::new(seed),
            uniform: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.uniform.gen()
    }

    pub fn normal(&mut self) -> f64 {
        self.normal.sample()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.uniform.gen_range(0..n)
    }
}

pub fn random_point(kind: ManifoldKind, s: &mut Draw) -> ManifoldPoint<f64> {
    match kind {
        ManifoldKind::Euclidean(n) => {
            ManifoldPoint::euclidean(&(0..n).map(|_| s.normal()).collect::<Vec<_>>()).unwrap()
        }
        ManifoldKind::Sphere1 => ManifoldPoint::sphere_from(&[s.normal(), s.normal()]).unwrap(),
        ManifoldKind::Sphere2 => ManifoldPoint::sphere_from(&[s.normal(), s.normal(), s.normal()]).unwrap(),
        ManifoldKind::SO3 => {
            let v = [s.normal(), s.normal(), s.normal()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let angle = 3.0 * s.uniform();
            ManifoldPoint::rotation([v[0] / n * angle, v[1] / n * angle, v[2] / n * angle])
        }
        ManifoldKind::Spd(n) => {
            let id = ManifoldPoint::identity(kind).unwrap();
            let v = tangent_with_norm(&id, 0.3 * (n as f64).sqrt(), s);
            exp_map(&id, &v).unwrap()
        }
    }
}

pub fn tangent_with_norm(p: &ManifoldPoint<f64>, norm: f64, s: &mut Draw) -> TangentVector<f64> {
    let v = random_tangent(p, &mut s.normal).unwrap();
    let n = riemannian_norm(&v);
    v.scaled(norm / n)
}

/// Random point within geodesic distance `spread` of `center`.
pub fn near(center: &ManifoldPoint<f64>, spread: f64, s: &mut Draw) -> ManifoldPoint<f64> {
    let r = spread * s.uniform();
    exp_map(center, &tangent_with_norm(center, r, s)).unwrap()
}
