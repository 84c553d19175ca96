//! Unit spheres S^1 in R^2 and S^2 in R^3.

use super::euclidean::dot;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below this angle `theta / sin(theta)` is replaced by its limit 1.
const SMALL_ANGLE: f64 = 1e-7;

pub(super) fn norm<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

pub(super) fn validate_point<T: Scalar>(p: &[T]) -> std::result::Result<(), String> {
    let n = norm(p);
    if (n - T::one()).abs() > T::tolerance(1e-9) {
        return Err(format!("sphere point has norm {n}, expected 1"));
    }
    Ok(())
}

pub(super) fn validate_tangent<T: Scalar>(p: &[T], v: &[T]) -> std::result::Result<(), String> {
    let d = dot(p, v).abs();
    let scale = norm(v).max(T::one());
    if d > T::tolerance(1e-9) * scale {
        return Err(format!("sphere tangent not orthogonal to base (<p,v> = {d})"));
    }
    Ok(())
}

/// `sin(x) / x` with a series near zero.
fn sinc<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

pub(super) fn exp<T: Scalar>(p: &[T], v: &[T]) -> Vec<T> {
    let theta = norm(v);
    let c = theta.cos();
    let s = sinc(theta);
    let out: Vec<T> = p.iter().zip(v).map(|(&a, &b)| c * a + s * b).collect();
    let n = norm(&out);
    out.into_iter().map(|x| x / n).collect()
}

/// Log on S^2; antipodal points have no unique minimal geodesic.
pub(super) fn log<T: Scalar>(p: &[T], q: &[T]) -> Result<Vec<T>> {
    let c = dot(p, q).min(T::one()).max(-T::one());
    if c <= -T::one() + T::tolerance(1e-9) {
        return Err(Error::CutLocus(format!("antipodal sphere points (<p,q> = {c})")));
    }
    // component of q orthogonal to p; its length is sin(theta)
    let w: Vec<T> = q.iter().zip(p).map(|(&b, &a)| b - c * a).collect();
    let s = norm(&w);
    let theta = s.atan2(c);
    if theta < T::lit(SMALL_ANGLE) {
        return Ok(w);
    }
    let k = theta / s;
    Ok(w.into_iter().map(|x| x * k).collect())
}

/// Log on S^1: the signed angle difference wrapped to (-pi, pi] times the
/// unit tangent at `p`.
pub(super) fn log1<T: Scalar>(p: &[T], q: &[T]) -> Vec<T> {
    let cross = p[0] * q[1] - p[1] * q[0];
    let c = p[0] * q[0] + p[1] * q[1];
    let mut delta = cross.atan2(c);
    if delta <= -T::pi() {
        delta += T::two_pi();
    }
    vec![-p[1] * delta, p[0] * delta]
}
