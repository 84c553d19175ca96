//! Riemannian manifolds used as pixel value spaces.
//!
//! Points and tangent vectors are stored as flat coordinate vectors tagged
//! with a [`ManifoldKind`]:
//!
//! | kind          | point data                 | tangent data                    |
//! |---------------|----------------------------|---------------------------------|
//! | `Euclidean(n)`| `n` coordinates            | `n` coordinates                 |
//! | `Sphere1`     | unit vector in R^2         | vector in R^2 orthogonal to base|
//! | `Sphere2`     | unit vector in R^3         | vector in R^3 orthogonal to base|
//! | `SO3`         | row-major 3x3 rotation     | axis-angle 3-vector             |
//! | `Spd(n)`      | row-major symmetric n x n  | row-major symmetric n x n       |
//!
//! The SPD manifold carries the affine-invariant metric
//! `<X, Y>_P = tr(P^-1 X P^-1 Y)`; SO(3) carries the bi-invariant metric in
//! which the norm of a tangent is the rotation angle.

mod euclidean;
mod mean;
mod so3;
pub mod spd;
mod sphere;

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub use mean::{intrinsic_mean, intrinsic_mean_from, mean_log, MeanError, MeanSolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Euclidean(usize),
    Sphere1,
    Sphere2,
    SO3,
    Spd(usize),
}

impl ManifoldKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            ManifoldKind::Euclidean(0) => Err(invalid("Euclidean dimension must be >= 1")),
            ManifoldKind::Spd(0) => Err(invalid("SPD dimension must be >= 1")),
            k => Ok(k),
        }
    }

    /// Number of scalars stored per point.
    pub fn point_len(self) -> usize {
        match self {
            ManifoldKind::Euclidean(n) => n,
            ManifoldKind::Sphere1 => 2,
            ManifoldKind::Sphere2 => 3,
            ManifoldKind::SO3 => 9,
            ManifoldKind::Spd(n) => n * n,
        }
    }

    /// Number of scalars stored per tangent vector.
    pub fn tangent_len(self) -> usize {
        match self {
            ManifoldKind::SO3 => 3,
            k => k.point_len(),
        }
    }

    /// Intrinsic dimension of the manifold.
    pub fn dimension(self) -> usize {
        match self {
            ManifoldKind::Euclidean(n) => n,
            ManifoldKind::Sphere1 => 1,
            ManifoldKind::Sphere2 => 2,
            ManifoldKind::SO3 => 3,
            ManifoldKind::Spd(n) => n * (n + 1) / 2,
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Euclidean(n) => write!(f, "euclidean:{n}"),
            ManifoldKind::Sphere1 => f.write_str("s1"),
            ManifoldKind::Sphere2 => f.write_str("s2"),
            ManifoldKind::SO3 => f.write_str("so3"),
            ManifoldKind::Spd(n) => write!(f, "spd:{n}"),
        }
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    /// Parses `euclidean:N`, `s1`, `s2`, `so3` or `spd:N` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (lower.as_str(), None),
        };
        let dim = |arg: Option<&str>| -> Result<usize> {
            arg.ok_or_else(|| invalid(format!("manifold `{s}` needs a dimension, e.g. `{name}:3`")))?
                .parse::<usize>()
                .map_err(|_| invalid(format!("bad dimension in `{s}`")))
        };
        let kind = match name {
            "euclidean" | "r" => ManifoldKind::Euclidean(dim(arg)?),
            "s1" => ManifoldKind::Sphere1,
            "s2" => ManifoldKind::Sphere2,
            "so3" => ManifoldKind::SO3,
            "spd" | "pd" => ManifoldKind::Spd(dim(arg)?),
            _ => return Err(invalid(format!("unknown manifold `{s}`"))),
        };
        kind.validate()
    }
}

/// A point on a manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint<T> {
    kind: ManifoldKind,
    data: Vec<T>,
}

impl<T: Scalar> ManifoldPoint<T> {
    /// Builds a point, checking the invariants of `kind`.
    pub fn new(kind: ManifoldKind, data: Vec<T>) -> Result<Self> {
        let p = Self::new_unchecked(kind, data)?;
        p.validate().map_err(Error::InvalidArgument)?;
        Ok(p)
    }

    /// Builds a point checking only its length.
    pub fn new_unchecked(kind: ManifoldKind, data: Vec<T>) -> Result<Self> {
        kind.validate()?;
        if data.len() != kind.point_len() {
            return Err(invalid(format!(
                "{kind} point needs {} values, got {}",
                kind.point_len(),
                data.len()
            )));
        }
        Ok(Self { kind, data })
    }

    pub fn euclidean(coords: &[T]) -> Result<Self> {
        Self::new(ManifoldKind::Euclidean(coords.len()), coords.to_vec())
    }

    /// Projects a nonzero vector in R^2 or R^3 onto the unit sphere.
    pub fn sphere_from(coords: &[T]) -> Result<Self> {
        let kind = match coords.len() {
            2 => ManifoldKind::Sphere1,
            3 => ManifoldKind::Sphere2,
            n => return Err(invalid(format!("no sphere of ambient dimension {n}"))),
        };
        let norm = sphere::norm(coords);
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::new(kind, coords.iter().map(|&c| c / norm).collect())
    }

    /// The unit vector in R^2 at angle `theta`.
    pub fn from_angle(theta: T) -> Self {
        Self {
            kind: ManifoldKind::Sphere1,
            data: vec![theta.cos(), theta.sin()],
        }
    }

    /// The rotation `exp(hat(axis_angle))`.
    pub fn rotation(axis_angle: [T; 3]) -> Self {
        Self {
            kind: ManifoldKind::SO3,
            data: so3::rodrigues(&axis_angle).to_vec(),
        }
    }

    pub fn spd_diagonal(diag: &[T]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![T::zero(); n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(ManifoldKind::Spd(n), data)
    }

    pub fn identity(kind: ManifoldKind) -> Result<Self> {
        match kind {
            ManifoldKind::SO3 => Ok(Self::rotation([T::zero(); 3])),
            ManifoldKind::Spd(n) => Self::spd_diagonal(&vec![T::one(); n]),
            _ => Err(invalid(format!("{kind} has no identity element"))),
        }
    }

    #[inline]
    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Checks the invariants of the point's kind, returning a description of
    /// the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err("non-finite coordinate".into());
        }
        match self.kind {
            ManifoldKind::Euclidean(_) => Ok(()),
            ManifoldKind::Sphere1 | ManifoldKind::Sphere2 => sphere::validate_point(&self.data),
            ManifoldKind::SO3 => so3::validate_point(&self.data),
            ManifoldKind::Spd(n) => spd::validate_point(n, &self.data),
        }
    }
}

/// A tangent vector at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T> {
    base: ManifoldPoint<T>,
    data: Vec<T>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(base: ManifoldPoint<T>, data: Vec<T>) -> Result<Self> {
        let kind = base.kind;
        if data.len() != kind.tangent_len() {
            return Err(invalid(format!(
                "{kind} tangent needs {} values, got {}",
                kind.tangent_len(),
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite tangent coordinate"));
        }
        match kind {
            ManifoldKind::Sphere1 | ManifoldKind::Sphere2 => {
                sphere::validate_tangent(&base.data, &data).map_err(Error::InvalidArgument)?
            }
            ManifoldKind::Spd(n) => spd::validate_symmetric(n, &data).map_err(Error::InvalidArgument)?,
            _ => {}
        }
        Ok(Self { base, data })
    }

    pub(crate) fn from_parts(base: ManifoldPoint<T>, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), base.kind.tangent_len());
        Self { base, data }
    }

    pub fn zero(base: ManifoldPoint<T>) -> Self {
        let n = base.kind.tangent_len();
        Self {
            base,
            data: vec![T::zero(); n],
        }
    }

    #[inline]
    pub fn kind(&self) -> ManifoldKind {
        self.base.kind
    }

    #[inline]
    pub fn base(&self) -> &ManifoldPoint<T> {
        &self.base
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Multiplies the vector by `s`, keeping its base.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            base: self.base.clone(),
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `a * self + b * other`; both vectors must share a base.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        check_same_base(self, other)?;
        Ok(Self {
            base: self.base.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }
}

fn check_same_kind<T: Scalar>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<()> {
    if p.kind != q.kind {
        return Err(invalid(format!("manifold mismatch: {} vs {}", p.kind, q.kind)));
    }
    Ok(())
}

fn check_same_base<T: Scalar>(u: &TangentVector<T>, v: &TangentVector<T>) -> Result<()> {
    if u.base.kind != v.base.kind || u.base.data != v.base.data {
        return Err(invalid("tangent vectors live at different base points"));
    }
    Ok(())
}

/// Riemannian exponential map: follows the geodesic from `p` with initial
/// velocity `v` for unit time.
pub fn exp_map<T: Scalar>(p: &ManifoldPoint<T>, v: &TangentVector<T>) -> Result<ManifoldPoint<T>> {
    check_same_kind(p, &v.base)?;
    if v.data.len() != p.kind.tangent_len() {
        return Err(invalid("tangent length does not match manifold"));
    }
    let data = match p.kind {
        ManifoldKind::Euclidean(_) => euclidean::exp(&p.data, &v.data),
        ManifoldKind::Sphere1 | ManifoldKind::Sphere2 => sphere::exp(&p.data, &v.data),
        ManifoldKind::SO3 => so3::exp(&p.data, &v.data),
        ManifoldKind::Spd(n) => spd::exp(n, &p.data, &v.data)?,
    };
    Ok(ManifoldPoint { kind: p.kind, data })
}

/// Riemannian logarithm map: the initial velocity of the minimal geodesic
/// from `p` to `q`.
pub fn log_map<T: Scalar>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
    check_same_kind(p, q)?;
    let data = match p.kind {
        ManifoldKind::Euclidean(_) => euclidean::log(&p.data, &q.data),
        ManifoldKind::Sphere1 => sphere::log1(&p.data, &q.data),
        ManifoldKind::Sphere2 => sphere::log(&p.data, &q.data)?,
        ManifoldKind::SO3 => so3::log(&p.data, &q.data)?,
        ManifoldKind::Spd(n) => spd::log(n, &p.data, &q.data)?,
    };
    Ok(TangentVector::from_parts(p.clone(), data))
}

/// Metric inner product of two tangents at a common base point.
pub fn inner_product<T: Scalar>(u: &TangentVector<T>, v: &TangentVector<T>) -> Result<T> {
    check_same_base(u, v)?;
    Ok(inner_at(&u.base, &u.data, &v.data))
}

pub(crate) fn inner_at<T: Scalar>(base: &ManifoldPoint<T>, u: &[T], v: &[T]) -> T {
    match base.kind {
        ManifoldKind::Spd(n) => spd::inner(n, &base.data, u, v),
        _ => euclidean::dot(u, v),
    }
}

/// Gram entries `(<u,u>, <u,v>, <v,v>)` at `base`, whitening SPD bases once.
pub(crate) fn gram2<T: Scalar>(base: &ManifoldPoint<T>, u: &[T], v: &[T]) -> (T, T, T) {
    match base.kind {
        ManifoldKind::Spd(n) => match spd::Whitening::new(n, &base.data) {
            Ok(w) => {
                let a = w.whiten(&spd::matrix(n, u));
                let b = w.whiten(&spd::matrix(n, v));
                (
                    spd::frobenius_dot(&a, &a),
                    spd::frobenius_dot(&a, &b),
                    spd::frobenius_dot(&b, &b),
                )
            }
            Err(_) => {
                let nan = T::lit(f64::NAN);
                (nan, nan, nan)
            }
        },
        _ => (euclidean::dot(u, u), euclidean::dot(u, v), euclidean::dot(v, v)),
    }
}

pub fn riemannian_norm<T: Scalar>(v: &TangentVector<T>) -> T {
    inner_at(&v.base, &v.data, &v.data).max(T::zero()).sqrt()
}

/// Geodesic distance between two points.
pub fn geodesic_distance<T: Scalar>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<T> {
    Ok(squared_distance(p, q)?.sqrt())
}

/// Squared geodesic distance. On SPD this needs only the eigenvalues of the
/// whitened matrix.
pub fn squared_distance<T: Scalar>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<T> {
    check_same_kind(p, q)?;
    match p.kind {
        ManifoldKind::Euclidean(_) => Ok(euclidean::dist_sq(&p.data, &q.data)),
        ManifoldKind::Spd(n) => spd::dist_sq(n, &p.data, &q.data),
        _ => {
            let v = log_map(p, q)?;
            Ok(euclidean::dot(&v.data, &v.data))
        }
    }
}
