//! The extremal family `w_{μ,ξ}` and the `N + 1` generators of the kernel of
//! its linearization.

use crate::error::{Error, Result};
use crate::field::{norm_sq, Field};
use crate::scalar::{c, cu, Real};
use crate::special_fns::ln_gamma_positive;

/// A deliberate corruption of one constant, used to check that the
/// certificate can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Defect<T> {
    /// Multiply the bubble amplitude by the factor.
    AmplitudeScale(T),
    /// Multiply the Riesz constant by the factor.
    GammaScale(T),
    /// Add the shift to the Riesz kernel exponent `N - 2s`.
    KernelExponentShift(T),
}

/// Dimension, order, and every constant derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<T> {
    n: usize,
    s: T,
    p: T,
    two_star: T,
    funk_alpha: T,
    bubble_amplitude: T,
    riesz_gamma: T,
    kernel_exponent: T,
    defect: Option<Defect<T>>,
}

impl<T: Real> ProblemParams<T> {
    /// Validates `N >= 1`, `0 < s < 1`, `N > 2s` and derives the constants.
    pub fn new(n: usize, s: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension N must be at least 1".into()));
        }
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidParams(format!("order s = {s} must lie in (0, 1)")));
        }
        let nf = cu::<T>(n);
        let two = c::<T>(2.0);
        if !(nf > two * s) {
            return Err(Error::InvalidParams(format!(
                "N > 2s is required (N = {n}, 2s = {})",
                two * s
            )));
        }
        Ok(Self {
            n,
            s,
            p: (nf + two * s) / (nf - two * s),
            two_star: two * nf / (nf - two * s),
            funk_alpha: nf / two - s,
            bubble_amplitude: amplitude_for(n, s),
            riesz_gamma: riesz_gamma_for(n, s),
            kernel_exponent: nf - two * s,
            defect: None,
        })
    }

    /// Copy with one constant corrupted. The result no longer satisfies
    /// [`ProblemParams::is_consistent`].
    pub fn with_defect(mut self, defect: Defect<T>) -> Self {
        match defect {
            Defect::AmplitudeScale(f) => self.bubble_amplitude = self.bubble_amplitude * f,
            Defect::GammaScale(f) => self.riesz_gamma = self.riesz_gamma * f,
            Defect::KernelExponentShift(d) => self.kernel_exponent = self.kernel_exponent + d,
        }
        self.defect = Some(defect);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn s(&self) -> T {
        self.s
    }
    /// Critical exponent `(N + 2s) / (N - 2s)`.
    pub fn p(&self) -> T {
        self.p
    }
    /// `2* = 2N / (N - 2s) = p + 1`.
    pub fn two_star(&self) -> T {
        self.two_star
    }
    /// `N/2 - s`, the parameter of the sphere eigenvalue formula.
    pub fn funk_alpha(&self) -> T {
        self.funk_alpha
    }
    pub fn bubble_amplitude(&self) -> T {
        self.bubble_amplitude
    }
    pub fn riesz_gamma(&self) -> T {
        self.riesz_gamma
    }
    /// Exponent of the Riesz kernel `|x - y|^{-(N - 2s)}`.
    pub fn kernel_exponent(&self) -> T {
        self.kernel_exponent
    }
    pub fn defect(&self) -> Option<Defect<T>> {
        self.defect
    }
    /// Bubble decay exponent `N - 2s` (unaffected by defects).
    pub fn decay_exponent(&self) -> T {
        cu::<T>(self.n) - c::<T>(2.0) * self.s
    }

    /// Whether every stored constant matches a fresh derivation from `(N, s)`.
    pub fn is_consistent(&self) -> bool {
        let Ok(fresh) = Self::new(self.n, self.s) else {
            return false;
        };
        let tol = c::<T>(1e-15);
        let close = |a: T, b: T| (a - b).abs() <= tol * a.abs().max(b.abs()).max(T::one());
        self.defect.is_none()
            && close(self.p, fresh.p)
            && close(self.two_star, fresh.two_star)
            && close(self.funk_alpha, fresh.funk_alpha)
            && close(self.bubble_amplitude, fresh.bubble_amplitude)
            && close(self.riesz_gamma, fresh.riesz_gamma)
            && close(self.kernel_exponent, fresh.kernel_exponent)
    }
}

/// `α_{N,s} = λ^{(N - 2s)/(4s)}`, `λ = 2^{2s} Γ((N + 2s)/2) / Γ((N - 2s)/2)`.
///
/// Accepts `s = 1` so the classical constant can be recovered; runtime code
/// goes through [`ProblemParams`], which rejects it.
pub fn amplitude_for<T: Real>(n: usize, s: T) -> T {
    let nf = cu::<T>(n);
    let two = c::<T>(2.0);
    let ln_lambda =
        two * s * two.ln() + ln_gamma_positive((nf + two * s) / two) - ln_gamma_positive((nf - two * s) / two);
    ((nf - two * s) / (c::<T>(4.0) * s) * ln_lambda).exp()
}

/// Riesz constant `Γ((N - 2s)/2) / (2^{2s} π^{N/2} Γ(s))`.
pub fn riesz_gamma_for<T: Real>(n: usize, s: T) -> T {
    let nf = cu::<T>(n);
    let two = c::<T>(2.0);
    (ln_gamma_positive((nf - two * s) / two) - two * s * two.ln() - nf / two * T::PI().ln() - ln_gamma_positive(s))
        .exp()
}

/// Amplitude stored in the params (includes any injected defect).
pub fn bubble_amplitude<T: Real>(params: &ProblemParams<T>) -> T {
    params.bubble_amplitude()
}

/// `w_{μ,ξ}(x) = α (μ / (μ² + |x - ξ|²))^{(N - 2s)/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble<T> {
    pub params: ProblemParams<T>,
    pub mu: T,
    pub xi: Vec<T>,
    pub amplitude: T,
}

impl<T: Real> Bubble<T> {
    /// The standard bubble `μ = 1`, `ξ = 0`.
    pub fn standard(params: ProblemParams<T>) -> Self {
        Self {
            params,
            mu: T::one(),
            xi: vec![T::zero(); params.n()],
            amplitude: params.bubble_amplitude(),
        }
    }

    pub fn new(params: ProblemParams<T>, mu: T, xi: Vec<T>) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::Domain(format!("bubble scale must be positive, got {mu}")));
        }
        if xi.len() != params.n() {
            return Err(Error::Domain(format!(
                "center has {} coordinates, expected {}",
                xi.len(),
                params.n()
            )));
        }
        Ok(Self {
            params,
            mu,
            xi,
            amplitude: params.bubble_amplitude(),
        })
    }

    /// Bubble in scaling form `λ^{(N - 2s)/2} w(λ(x - ξ))`, i.e. `μ = 1/λ`.
    pub fn with_scaling(params: ProblemParams<T>, lambda: T, xi: Vec<T>) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::Domain(format!("scaling factor must be positive, got {lambda}")));
        }
        Self::new(params, lambda.recip(), xi)
    }

    /// Value as a function of `|x - ξ|`.
    pub fn radial(&self, r: T) -> T {
        let half_exp = self.params.decay_exponent() / c(2.0);
        self.amplitude * (self.mu / (self.mu * self.mu + r * r)).powf(half_exp)
    }

    pub fn eval(&self, x: &[T]) -> T {
        let d2 = x
            .iter()
            .zip(&self.xi)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b));
        self.radial(d2.sqrt())
    }
}

impl<T: Real> Field<T> for Bubble<T> {
    fn dim(&self) -> usize {
        self.params.n()
    }
    fn eval(&self, x: &[T]) -> T {
        Bubble::eval(self, x)
    }
    fn decay_exponent(&self) -> Option<T> {
        Some(self.params.decay_exponent())
    }
}

/// `bubble_eval` for the given bubble.
pub fn bubble_eval<T: Real>(b: &Bubble<T>, x: &[T]) -> T {
    b.eval(x)
}

/// One of the generators `Z_0 = (N-2s)/2 w + x·∇w` (index 0) or
/// `Z_i = ∂_{x_i} w` (index `i` in `1..=N`) for the standard bubble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelFunction<T> {
    pub params: ProblemParams<T>,
    pub index: usize,
}

impl<T: Real> KernelFunction<T> {
    pub fn new(params: ProblemParams<T>, index: usize) -> Result<Self> {
        if index > params.n() {
            return Err(Error::Domain(format!(
                "kernel index {index} out of range 0..={}",
                params.n()
            )));
        }
        Ok(Self { params, index })
    }

    /// All `N + 1` generators, dilation first.
    pub fn all(params: ProblemParams<T>) -> Vec<Self> {
        (0..=params.n()).map(|index| Self { params, index }).collect()
    }

    /// Degree of the spherical harmonic factor: 0 for dilation, 1 for translations.
    pub fn harmonic_degree(&self) -> usize {
        usize::from(self.index > 0)
    }

    /// Radial profile `g` with `Z(x) = g(|x|) Y(x/|x|)`, where `Y = 1` for the
    /// dilation and `Y = x_i/|x|` for translations.
    pub fn radial(&self, r: T) -> T {
        let a = self.params.bubble_amplitude();
        let d = self.params.decay_exponent();
        let two = c::<T>(2.0);
        let one = T::one();
        let q = one + r * r;
        let base = q.powf(-d / two - one);
        if self.index == 0 {
            a * d / two * (one - r * r) * base
        } else {
            -a * d * r * base
        }
    }

    pub fn eval(&self, x: &[T]) -> T {
        let a = self.params.bubble_amplitude();
        let d = self.params.decay_exponent();
        let two = c::<T>(2.0);
        let one = T::one();
        let r2 = norm_sq(x);
        let base = (one + r2).powf(-d / two - one);
        if self.index == 0 {
            a * d / two * (one - r2) * base
        } else {
            -a * d * x[self.index - 1] * base
        }
    }

    /// Decay exponent at infinity: `N - 2s` for the dilation, `N - 2s + 1`
    /// for translations.
    pub fn decay_hint(&self) -> T {
        self.params.decay_exponent() + cu::<T>(self.harmonic_degree())
    }
}

impl<T: Real> Field<T> for KernelFunction<T> {
    fn dim(&self) -> usize {
        self.params.n()
    }
    fn eval(&self, x: &[T]) -> T {
        KernelFunction::eval(self, x)
    }
    fn decay_exponent(&self) -> Option<T> {
        Some(self.decay_hint())
    }
}

/// `kernel_eval` for the given generator.
pub fn kernel_eval<T: Real>(z: &KernelFunction<T>, x: &[T]) -> T {
    z.eval(x)
}
