use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::geometry::spd::Whitening;
use crate::geometry::{exp_map, ManifoldKind, ManifoldPoint, TangentVector};
use crate::image::ManifoldImage;
use crate::levelset::{Mask, Shape};
use crate::scalar::Scalar;

/// Standard normal deviates from ChaCha8 (`seed_from_u64`).
///
/// Uniforms are `(next_u64 >> 11) * 2^-53`; pairs of normals come from the
/// Box-Muller transform `sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)`, cosine
/// branch first.
#[derive(Debug, Clone)]
pub struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }
}

/// A tangent vector at `base` whose coordinates in an orthonormal frame are
/// independent standard normals.
pub fn random_tangent<T: Scalar>(base: &ManifoldPoint<T>, rng: &mut NormalSampler) -> Result<TangentVector<T>> {
    let p = base.data();
    let data: Vec<T> = match base.kind() {
        ManifoldKind::Euclidean(n) => (0..n).map(|_| T::lit(rng.sample())).collect(),
        ManifoldKind::Sphere1 => {
            let z = T::lit(rng.sample());
            vec![-p[1] * z, p[0] * z]
        }
        ManifoldKind::Sphere2 => {
            let z: Vec<T> = (0..3).map(|_| T::lit(rng.sample())).collect();
            let d = z[0] * p[0] + z[1] * p[1] + z[2] * p[2];
            (0..3).map(|i| z[i] - d * p[i]).collect()
        }
        ManifoldKind::SO3 => (0..3).map(|_| T::lit(rng.sample())).collect(),
        ManifoldKind::Spd(n) => {
            let inv_sqrt2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
            let mut s = nalgebra::DMatrix::<T>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let z = T::lit(rng.sample());
                    if i == j {
                        s[(i, i)] = z;
                    } else {
                        s[(i, j)] = z * inv_sqrt2;
                        s[(j, i)] = z * inv_sqrt2;
                    }
                }
            }
            let c = Whitening::new(n, p)?.color(&s);
            crate::geometry::spd::row_major(&c)
        }
    };
    TangentVector::new(base.clone(), data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec<T> {
    pub height: usize,
    pub width: usize,
    pub region: Shape<T>,
    pub inside: ManifoldPoint<T>,
    pub outside: ManifoldPoint<T>,
    pub noise_sigma: T,
    pub seed: u64,
}

/// A two-region image: pixels inside `region` scatter around `inside`, the
/// rest around `outside`. Noise is drawn in row-major pixel order. With zero
/// noise the bases are copied unchanged.
pub fn generate_synthetic<T: Scalar>(kind: ManifoldKind, spec: &SyntheticSpec<T>) -> Result<(ManifoldImage<T>, Mask)> {
    kind.validate()?;
    for (name, p) in [("inside", &spec.inside), ("outside", &spec.outside)] {
        if p.kind() != kind {
            return Err(invalid(format!("{name} point lies on {}, expected {kind}", p.kind())));
        }
        p.validate().map_err(|e| invalid(format!("{name} point: {e}")))?;
    }
    spec.region.validate()?;
    if !(spec.noise_sigma >= T::zero()) || !spec.noise_sigma.is_finite() {
        return Err(invalid("noise sigma must be finite and >= 0"));
    }
    if spec.height == 0 || spec.width == 0 {
        return Err(invalid("image dimensions must be positive"));
    }
    let mask = Mask::from_fn(spec.height, spec.width, |r, c| {
        spec.region.contains(T::from_count(c), T::from_count(r))
    });
    let mut rng = NormalSampler::new(spec.seed);
    let mut pixels = Vec::with_capacity(spec.height * spec.width);
    for &m in mask.data() {
        let base = if m { &spec.inside } else { &spec.outside };
        if spec.noise_sigma == T::zero() {
            pixels.push(base.clone());
        } else {
            let v = random_tangent(base, &mut rng)?.scaled(spec.noise_sigma);
            pixels.push(exp_map(base, &v)?);
        }
    }
    let img = ManifoldImage::new(kind, spec.height, spec.width, pixels)?;
    Ok((img, mask))
}
