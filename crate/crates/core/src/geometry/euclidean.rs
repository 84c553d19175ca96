use crate::scalar::Scalar;

pub(super) fn exp<T: Scalar>(p: &[T], v: &[T]) -> Vec<T> {
    p.iter().zip(v).map(|(&a, &b)| a + b).collect()
}

pub(super) fn log<T: Scalar>(p: &[T], q: &[T]) -> Vec<T> {
    q.iter().zip(p).map(|(&a, &b)| a - b).collect()
}

pub(super) fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

pub(super) fn dist_sq<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
}
