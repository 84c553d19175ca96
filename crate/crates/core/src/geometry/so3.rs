//! Rotation group SO(3) with the bi-invariant metric.
//!
//! Tangent vectors are axis-angle 3-vectors `w` with
//! `hat(w) = [[0, -w3, w2], [w3, 0, -w1], [-w2, w1, 0]]`, expressed in the
//! body frame of the base rotation: `Exp_p(w) = p * exp(hat(w))`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SMALL_ANGLE: f64 = 1e-7;
/// Rotations closer than this to a half turn are treated as cut-locus points.
const HALF_TURN_MARGIN: f64 = 1e-6;

type Mat3<T> = [T; 9];

pub(super) fn validate_point<T: Scalar>(r: &[T]) -> std::result::Result<(), String> {
    let tol = T::tolerance(1e-8);
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s += r[k * 3 + i] * r[k * 3 + j];
            }
            let expect = if i == j { T::one() } else { T::zero() };
            if (s - expect).abs() > tol {
                return Err(format!("R^T R differs from identity at ({i},{j}) by {}", s - expect));
            }
        }
    }
    let det = det3(r);
    if (det - T::one()).abs() > tol {
        return Err(format!("rotation determinant {det}, expected 1"));
    }
    Ok(())
}

fn det3<T: Scalar>(r: &[T]) -> T {
    r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) + r[2] * (r[3] * r[7] - r[4] * r[6])
}

fn matmul<T: Scalar>(a: &[T], b: &[T]) -> Mat3<T> {
    let mut out = [T::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s += a[i * 3 + k] * b[k * 3 + j];
            }
            out[i * 3 + j] = s;
        }
    }
    out
}

fn transpose_mul<T: Scalar>(a: &[T], b: &[T]) -> Mat3<T> {
    let mut out = [T::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s += a[k * 3 + i] * b[k * 3 + j];
            }
            out[i * 3 + j] = s;
        }
    }
    out
}

/// Matrix exponential of `hat(w)` by the Rodrigues formula.
pub(super) fn rodrigues<T: Scalar>(w: &[T]) -> Mat3<T> {
    let theta2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let theta = theta2.sqrt();
    let (a, b) = if theta < T::lit(1e-4) {
        (T::one() - theta2 / T::lit(6.0), T::lit(0.5) - theta2 / T::lit(24.0))
    } else {
        (theta.sin() / theta, (T::one() - theta.cos()) / theta2)
    };
    let (x, y, z) = (w[0], w[1], w[2]);
    let k = [T::zero(), -z, y, z, T::zero(), -x, -y, x, T::zero()];
    let k2 = matmul(&k, &k);
    let mut r = [T::zero(); 9];
    for i in 0..9 {
        let id = if i % 4 == 0 { T::one() } else { T::zero() };
        r[i] = id + a * k[i] + b * k2[i];
    }
    r
}

pub(super) fn exp<T: Scalar>(p: &[T], w: &[T]) -> Vec<T> {
    matmul(p, &rodrigues(w)).to_vec()
}

pub(super) fn log<T: Scalar>(p: &[T], q: &[T]) -> Result<Vec<T>> {
    let r = transpose_mul(p, q);
    // half the skew part: sin(theta) * axis
    let half = T::lit(0.5);
    let w = [(r[7] - r[5]) * half, (r[2] - r[6]) * half, (r[3] - r[1]) * half];
    let s = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let c = (r[0] + r[4] + r[8] - T::one()) * half;
    let theta = s.atan2(c);
    if T::pi() - theta < T::lit(HALF_TURN_MARGIN) {
        return Err(Error::CutLocus(format!(
            "relative rotation angle {theta} is within {HALF_TURN_MARGIN} of pi"
        )));
    }
    if theta < T::lit(SMALL_ANGLE) {
        return Ok(w.to_vec());
    }
    let k = theta / s;
    Ok(w.iter().map(|&x| x * k).collect())
}
