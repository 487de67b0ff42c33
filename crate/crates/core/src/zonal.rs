//! Zonal integrals of a shifted power kernel over a sphere,
//! `Z(ε) = ∫_{S^m} (ε + 1 - ⟨θ, e⟩)^{-k} P(⟨θ, e⟩) dθ`.
//!
//! This is the inner integral of every Riesz-type kernel below: with
//! `|x - y|^2 = 2 r ρ (ε + 1 - t)` the kernel is `(2rρ)^{-k} (ε + 1 - t)^{-k}`.
//! For small `ε` the integrand is sharply peaked at `t = 1`; the interval is
//! then split at `t = 0` and the right half is integrated in `u = 1 - t` on
//! geometrically growing panels starting at `u = ε`.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use crate::special_fns::{gauss_rule, sphere_area, GaussFamily};

/// Below this shift the split rule is used.
const SPLIT_BELOW: f64 = 0.25;
/// Ratio between consecutive panels in `u`.
const PANEL_RATIO: f64 = 4.0;
const PANEL_NODES: usize = 16;
const HALF_NODES: usize = 24;

#[derive(Debug, Clone)]
pub(crate) struct ZonalIntegrator<T> {
    m: usize,
    k: T,
    a: T,
    /// `|S^{m-1}|`.
    area: T,
    /// Jacobi(a, a) on `[-1, 1]`.
    full: Vec<(T, T)>,
    /// Jacobi(0, a) reference rule on `[-1, 1]`.
    half: Vec<(T, T)>,
    legendre: Vec<(T, T)>,
}

impl<T: Real> ZonalIntegrator<T> {
    /// `m` is the sphere dimension, `k` the kernel power, `n` the size of the
    /// unsplit rule used when `ε` is not small.
    pub fn new(m: usize, k: T, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParams(format!(
                "zonal rule needs at least 4 nodes, got {n}"
            )));
        }
        let a = if m >= 1 {
            (c::<T>(m as f64) - c(2.0)) / c(2.0)
        } else {
            T::zero()
        };
        let (area, full, half) = if m >= 1 {
            let full = gauss_rule(GaussFamily::Jacobi { a, b: a }, n)?;
            let half = gauss_rule(GaussFamily::Jacobi { a: T::zero(), b: a }, HALF_NODES)?;
            (sphere_area::<T>(m - 1), full.pairs().collect(), half.pairs().collect())
        } else {
            (T::one(), Vec::new(), Vec::new())
        };
        let legendre = gauss_rule::<T>(GaussFamily::Legendre, PANEL_NODES)?.pairs().collect();
        Ok(Self {
            m,
            k,
            a,
            area,
            full,
            half,
            legendre,
        })
    }

    /// `∫_{S^m} (ε + 1 - ⟨θ, e⟩)^{-k} P(⟨θ, e⟩) dθ` for `ε > 0`. Smaller
    /// shifts are clamped to the least positive normal number.
    pub fn eval(&self, eps: T, p: impl Fn(T) -> T) -> T {
        let eps = eps.max(T::min_positive_value());
        let one = T::one();
        let two = c::<T>(2.0);
        if self.m == 0 {
            return eps.powf(-self.k) * p(one) + (eps + two).powf(-self.k) * p(-one);
        }
        let k = self.k;
        let a = self.a;
        if eps >= c(SPLIT_BELOW) {
            let sum = self
                .full
                .iter()
                .fold(T::zero(), |acc, &(t, w)| acc + w * (eps + one - t).powf(-k) * p(t));
            return self.area * sum;
        }
        // t in [-1, 0]: t = (x - 1)/2, (1 + t)^a = 2^{-a} (1 + x)^a.
        let left_scale = two.powf(-a) / two;
        let left = self.half.iter().fold(T::zero(), |acc, &(x, w)| {
            let t = (x - one) / two;
            acc + w * (one - t).powf(a) * (eps + one - t).powf(-k) * p(t)
        });
        let right_factor = |u: T| (two - u).powf(a) * (eps + u).powf(-k) * p(one - u);
        // u in [0, ε]: u = ε (1 + x)/2.
        let half_eps = eps / two;
        let first = self
            .half
            .iter()
            .fold(T::zero(), |acc, &(x, w)| acc + w * right_factor(half_eps * (one + x)))
            * half_eps.powf(a + one);
        let mut rest = T::zero();
        let mut lo = eps;
        let ratio = c::<T>(PANEL_RATIO);
        while lo < one {
            let hi = (lo * ratio).min(one);
            let mid = (hi + lo) / two;
            let hw = (hi - lo) / two;
            let panel = self.legendre.iter().fold(T::zero(), |acc, &(x, w)| {
                let u = mid + hw * x;
                acc + w * u.powf(a) * right_factor(u)
            });
            rest = rest + panel * hw;
            lo = hi;
        }
        self.area * (left * left_scale + first + rest)
    }
}

#[cfg(test)]
// Reference values are quoted to the digits of the high-precision oracle.
#[allow(clippy::excessive_precision, clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::special_fns::gegenbauer_normalized;

    // (m, ε, k, l, λ, value) with P = normalized Gegenbauer C_l^λ.
    const REFERENCE: &[(usize, f64, f64, usize, f64, f64)] = &[
        (2, 0.5, 0.5, 0, 0.0, 10.98341065527546997484),
        (2, 1e-06, 1.0, 0, 0.0, 91.1605882711846504871),
        (2, 1e-09, 0.5, 3, 0.5, 2.538392897944168531245),
        (1, 1e-05, 0.5, 2, 0.0, 13.6408695851447394753),
        (1, 0.3, 0.75, 1, 0.0, 2.480645661081994743751),
        (3, 1e-12, 0.6, 5, 1.0, 0.8422308978207344921302),
        (2, 2.0, 1.0, 2, 0.5, 0.06857058327737710069033),
        (1, 0.001, 0.25, 0, 0.0, 8.216575408535097396776),
        (3, 0.01, 1.2, 4, 1.0, 8.011750814699284375059),
        (2, 1e-30, 0.75, 1, 0.5, 17.93282001846138996414),
    ];

    #[test]
    fn matches_reference_values() {
        for &(m, eps, k, l, lambda, want) in REFERENCE {
            let z = ZonalIntegrator::new(m, k, 64).unwrap();
            let got = z.eval(eps, |t| gegenbauer_normalized(l, lambda, t));
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "m={m} ε={eps} k={k} l={l}: {got} vs {want} ({rel:e})");
        }
    }

    #[test]
    fn zero_dimensional_sphere_is_two_point_sum() {
        let z = ZonalIntegrator::new(0, 0.5_f64, 8).unwrap();
        let got = z.eval(0.25, |t| 1.0 + t);
        assert!((got - 2.0 * 0.25_f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn constant_kernel_gives_sphere_area() {
        for m in 1..5 {
            let z = ZonalIntegrator::new(m, 0.0_f64, 16).unwrap();
            let want = sphere_area::<f64>(m);
            for eps in [1e-8, 0.1, 3.0] {
                let got = z.eval(eps, |_| 1.0);
                assert!(((got - want) / want).abs() < 1e-13, "m={m} ε={eps}");
            }
        }
    }

    #[test]
    fn continuous_across_split_threshold() {
        let z = ZonalIntegrator::new(2, 0.75_f64, 64).unwrap();
        let below = z.eval(SPLIT_BELOW * (1.0 - 1e-12), |t| t * t);
        let above = z.eval(SPLIT_BELOW, |t| t * t);
        assert!(((below - above) / above).abs() < 1e-12);
    }
}
