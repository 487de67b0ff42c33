//! Scalar fields on `R^N` and their radial-harmonic factorization.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

/// A real-valued field on `R^N`.
pub trait Field<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[T]) -> T;

    /// Exponent `ν` with `|f(x)| <= C (1 + |x|)^{-ν}`, when known.
    fn decay_exponent(&self) -> Option<T> {
        None
    }
}

impl<T: Real, F: Field<T> + ?Sized> Field<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[T]) -> T {
        (**self).eval(x)
    }
    fn decay_exponent(&self) -> Option<T> {
        (**self).decay_exponent()
    }
}

type FieldFn<T> = dyn Fn(&[T]) -> T + Send + Sync;

/// Adapter turning a closure into a [`Field`].
#[derive(Clone)]
pub struct FnField<T: Real> {
    dim: usize,
    decay: Option<T>,
    f: Arc<FieldFn<T>>,
}

impl<T: Real> FnField<T> {
    pub fn new(dim: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            dim,
            decay: None,
            f: Arc::new(f),
        }
    }

    pub fn with_decay(mut self, nu: T) -> Self {
        self.decay = Some(nu);
        self
    }
}

impl<T: Real> fmt::Debug for FnField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("dim", &self.dim)
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Field<T> for FnField<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }
    fn decay_exponent(&self) -> Option<T> {
        self.decay
    }
}

pub(crate) fn norm_sq<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, v| acc + *v * *v)
}
