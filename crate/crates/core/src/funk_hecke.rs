//! Eigenvalues of the sphere operator `h ↦ ∫_{S^N} h(η) |ω - η|^{-(N-2s)} dη`
//! on the spaces `H_l` of degree-`l` spherical harmonics.

use crate::bubble::ProblemParams;
use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};
use crate::special_fns::{gauss_rule, gegenbauer_normalized, ln_gamma_positive, sphere_area, GaussFamily};

/// Where an eigenvalue table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSource {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueTable<T> {
    pub params: ProblemParams<T>,
    /// `e_0, ..., e_lmax`.
    pub values: Vec<T>,
    pub source: EigenSource,
    /// Factor relating this table to the quadrature values (1 for the
    /// quadrature table itself).
    pub normalization: T,
}

impl<T: Real> EigenvalueTable<T> {
    pub fn closed_form(params: &ProblemParams<T>, lmax: usize) -> Self {
        Self {
            params: *params,
            values: (0..=lmax).map(|l| eigenvalue_closed(params, l)).collect(),
            source: EigenSource::ClosedForm,
            normalization: T::one(),
        }
    }

    pub fn quadrature(params: &ProblemParams<T>, lmax: usize) -> Result<Self> {
        let n = default_rule_size(lmax);
        let values = (0..=lmax)
            .map(|l| eigenvalue_quadrature(params, l, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            values,
            source: EigenSource::Quadrature,
            normalization: T::one(),
        })
    }

    pub fn lmax(&self) -> usize {
        self.values.len() - 1
    }

    /// `e_{l+1} / e_l` for `l < lmax`.
    pub fn ratios(&self) -> Vec<T> {
        self.values.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    /// Values scaled by `normalization`.
    pub fn normalized(&self) -> Vec<T> {
        self.values.iter().map(|v| *v * self.normalization).collect()
    }
}

fn default_rule_size(lmax: usize) -> usize {
    lmax / 2 + 8
}

/// `κ_N`: `2 √π` for `N = 1`, otherwise
/// `2^{2(N-1)} π^{(N-1)/2} Γ((N-1)/2) Γ(N/2) / (N-2)!`.
pub fn kappa<T: Real>(n: usize) -> T {
    if n <= 1 {
        return c::<T>(2.0) * T::PI().sqrt();
    }
    let nf = cu::<T>(n);
    let two = c::<T>(2.0);
    let ln = c::<T>(2.0) * (nf - T::one()) * two.ln()
        + (nf - T::one()) / two * T::PI().ln()
        + ln_gamma_positive((nf - T::one()) / two)
        + ln_gamma_positive(nf / two)
        - ln_gamma_positive(nf - T::one());
    ln.exp()
}

/// `e_l = κ_N 2^α Γ(N/2 - α) Γ(l + α) / (Γ(α) Γ(l + N - α))` with `α = N/2 - s`.
pub fn eigenvalue_closed<T: Real>(params: &ProblemParams<T>, l: usize) -> T {
    let alpha = params.funk_alpha();
    let nf = cu::<T>(params.n());
    let lf = cu::<T>(l);
    let two = c::<T>(2.0);
    let ln = alpha * two.ln() + ln_gamma_positive(nf / two - alpha) + ln_gamma_positive(lf + alpha)
        - ln_gamma_positive(alpha)
        - ln_gamma_positive(lf + nf - alpha);
    kappa::<T>(params.n()) * ln.exp()
}

/// `(l + α) / (l + N - α)`.
pub fn ratio_closed<T: Real>(params: &ProblemParams<T>, l: usize) -> T {
    let alpha = params.funk_alpha();
    let lf = cu::<T>(l);
    (lf + alpha) / (lf + cu::<T>(params.n()) - alpha)
}

/// `|S^{N-1}| 2^{-e/2} ∫ (1-t)^{(N-2-e)/2} (1+t)^{(N-2)/2} P_l(t) dt` with
/// `e` the kernel exponent and `P_l` the normalized Gegenbauer polynomial of
/// index `(N-1)/2`, by an `n`-point Gauss-Jacobi rule.
pub fn eigenvalue_quadrature<T: Real>(params: &ProblemParams<T>, l: usize, n: usize) -> Result<T> {
    if n < l / 2 + 2 {
        return Err(Error::InvalidParams(format!(
            "rule size {n} too small for degree {l} (need n >= l/2 + 2)"
        )));
    }
    let nf = cu::<T>(params.n());
    let two = c::<T>(2.0);
    let e = params.kernel_exponent();
    let a = (nf - two - e) / two;
    let b = (nf - two) / two;
    let rule = gauss_rule(GaussFamily::Jacobi { a, b }, n)?;
    let lambda = (nf - T::one()) / two;
    let integral = rule.integrate(|t| gegenbauer_normalized(l, lambda, t));
    Ok(sphere_area::<T>(params.n() - 1) * two.powf(-e / two) * integral)
}

/// Outcome of comparing the quadrature eigenvalues with the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationAudit<T> {
    /// `κ_audit` with `quadrature ≈ κ_audit · closed`.
    pub factor: T,
    /// `|q_l / (κ_audit c_l) - 1|` for `l = 0..=lmax`.
    pub residuals: Vec<T>,
    pub max_residual: T,
}

/// Residual above which the two sources are declared structurally different.
const STRUCTURAL_LIMIT: f64 = 1e-6;

/// Fits one constant `κ_audit` (relative least squares, i.e. the mean of the
/// ratios) between the quadrature and closed-form eigenvalues for `l <= lmax`.
pub fn normalization_audit<T: Real>(params: &ProblemParams<T>, lmax: usize) -> Result<NormalizationAudit<T>> {
    if lmax < 3 {
        return Err(Error::InvalidParams(format!(
            "normalization audit needs lmax >= 3, got {lmax}"
        )));
    }
    let quad = EigenvalueTable::quadrature(params, lmax)?;
    let closed = EigenvalueTable::closed_form(params, lmax);
    let ratios: Vec<T> = quad.values.iter().zip(&closed.values).map(|(q, c)| *q / *c).collect();
    let factor = ratios.iter().copied().sum::<T>() / cu::<T>(ratios.len());
    let residuals: Vec<T> = ratios.iter().map(|r| (*r / factor - T::one()).abs()).collect();
    let max_residual = residuals.iter().fold(T::zero(), |m, r| m.max(*r));
    if !(max_residual <= c(STRUCTURAL_LIMIT)) {
        return Err(Error::StructuralMismatch(format!(
            "quadrature and closed-form eigenvalues differ by more than a constant \
             (max residual {max_residual:e} after normalization)"
        )));
    }
    Ok(NormalizationAudit {
        factor,
        residuals,
        max_residual,
    })
}

/// `a = 1 / (γ p α^{p-1} 2^{-2s})`, the eigenvalue that the lifted kernel
/// functions must have.
pub fn a_constant<T: Real>(params: &ProblemParams<T>) -> T {
    let p = params.p();
    let c_const = params.riesz_gamma()
        * p
        * params.bubble_amplitude().powf(p - T::one())
        * c::<T>(2.0).powf(-c::<T>(2.0) * params.s());
    c_const.recip()
}
