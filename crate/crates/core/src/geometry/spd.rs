//! Symmetric positive-definite matrices with the affine-invariant metric.
//!
//! Every operation goes through a *whitening* of the base point
//! `P = U diag(l) U^T`: with `G = U diag(sqrt(l))`, the map
//! `X -> G^-1 X G^-T` carries `P` to the identity, where Exp and Log reduce
//! to the symmetric matrix exponential and logarithm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues are clamped to this floor before square roots and logs.
pub const EIGEN_FLOOR: f64 = 1e-12;

pub(crate) fn matrix<T: Scalar>(n: usize, data: &[T]) -> DMatrix<T> {
    DMatrix::from_row_slice(n, n, data)
}

pub(crate) fn row_major<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * m.ncols());
    for i in 0..n {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn symmetrize<T: Scalar>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let a = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

fn check_finite<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry in eigendecomposition".into()));
    }
    Ok(())
}

/// Self-adjoint eigendecomposition.
pub(crate) fn eigh<T: Scalar>(m: DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    check_finite(&m)?;
    SymmetricEigen::try_new(m, T::default_epsilon(), 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))
}

pub(crate) fn eigenvalues<T: Scalar>(m: DMatrix<T>) -> Result<DVector<T>> {
    check_finite(&m)?;
    Ok(m.symmetric_eigenvalues())
}

/// `V f(S) V^T` for a symmetric matrix `V S V^T`.
pub fn map_symmetric<T: Scalar>(m: DMatrix<T>, f: impl Fn(T) -> T) -> Result<DMatrix<T>> {
    let eig = eigh(m)?;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let fl = f(l);
        scaled.column_mut(j).scale_mut(fl);
    }
    let mut out = scaled * v.transpose();
    symmetrize(&mut out);
    Ok(out)
}

fn floor<T: Scalar>(x: T) -> T {
    x.max(T::lit(EIGEN_FLOOR))
}

/// Whitening transform for a fixed base point.
#[derive(Debug, Clone)]
pub struct Whitening<T: Scalar> {
    g: DMatrix<T>,
    g_inv: DMatrix<T>,
}

impl<T: Scalar> Whitening<T> {
    pub fn new(n: usize, base: &[T]) -> Result<Self> {
        let mut p = matrix(n, base);
        symmetrize(&mut p);
        let eig = eigh(p)?;
        let u = eig.eigenvectors;
        let mut g = u.clone();
        let mut g_inv = u.transpose();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            let r = floor(l).sqrt();
            g.column_mut(j).scale_mut(r);
            g_inv.row_mut(j).scale_mut(T::one() / r);
        }
        Ok(Self { g, g_inv })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `G^-1 X G^-T`
    pub fn whiten(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let mut y = &self.g_inv * x * self.g_inv.transpose();
        symmetrize(&mut y);
        y
    }

    /// `G Y G^T`
    pub fn color(&self, y: &DMatrix<T>) -> DMatrix<T> {
        let mut x = &self.g * y * self.g.transpose();
        symmetrize(&mut x);
        x
    }

    /// Matrix log of the whitened point `q`; the Log map in whitened
    /// coordinates.
    pub fn log_whitened(&self, q: &[T]) -> Result<DMatrix<T>> {
        let y = self.whiten(&matrix(self.dim(), q));
        map_symmetric(y, |l| floor(l).ln())
    }

    /// Squared geodesic distance from the base point to `q`.
    pub fn dist_sq(&self, q: &[T]) -> Result<T> {
        let y = self.whiten(&matrix(self.dim(), q));
        let ev = eigenvalues(y)?;
        Ok(ev.iter().fold(T::zero(), |acc, &l| {
            let lg = floor(l).ln();
            acc + lg * lg
        }))
    }
}

pub(crate) fn frobenius_dot<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(super) fn exp<T: Scalar>(n: usize, p: &[T], v: &[T]) -> Result<Vec<T>> {
    let w = Whitening::new(n, p)?;
    let y = w.whiten(&matrix(n, v));
    let e = map_symmetric(y, |l| l.exp())?;
    Ok(row_major(&w.color(&e)))
}

pub(super) fn log<T: Scalar>(n: usize, p: &[T], q: &[T]) -> Result<Vec<T>> {
    let mut qm = matrix(n, q);
    symmetrize(&mut qm);
    let ev = eigenvalues(qm)?;
    if ev.iter().any(|&l| l <= T::zero()) {
        return Err(Error::InvalidArgument("log map target is not positive definite".into()));
    }
    let w = Whitening::new(n, p)?;
    let l = w.log_whitened(q)?;
    Ok(row_major(&w.color(&l)))
}

pub(super) fn inner<T: Scalar>(n: usize, p: &[T], u: &[T], v: &[T]) -> T {
    match Whitening::new(n, p) {
        Ok(w) => {
            let a = w.whiten(&matrix(n, u));
            let b = w.whiten(&matrix(n, v));
            frobenius_dot(&a, &b)
        }
        Err(_) => T::lit(f64::NAN),
    }
}

pub(super) fn dist_sq<T: Scalar>(n: usize, p: &[T], q: &[T]) -> Result<T> {
    Whitening::new(n, p)?.dist_sq(q)
}

pub(super) fn validate_symmetric<T: Scalar>(n: usize, a: &[T]) -> std::result::Result<(), String> {
    let scale = a.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let tol = T::tolerance(1e-9) * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (a[i * n + j] - a[j * n + i]).abs();
            if d > tol {
                return Err(format!("matrix not symmetric at ({i},{j}): asymmetry {d}"));
            }
        }
    }
    Ok(())
}

pub(super) fn validate_point<T: Scalar>(n: usize, a: &[T]) -> std::result::Result<(), String> {
    validate_symmetric(n, a)?;
    let mut m = matrix(n, a);
    symmetrize(&mut m);
    let ev = eigenvalues(m).map_err(|e| e.to_string())?;
    let min = ev.iter().skip(1).fold(ev[0], |m, &x| m.min(x));
    if !(min > T::zero()) {
        return Err(format!("matrix not positive definite (smallest eigenvalue {min})"));
    }
    Ok(())
}
