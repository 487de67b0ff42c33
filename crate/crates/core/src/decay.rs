//! Decay exponents of radial fields under the weighted Riesz operator
//! `v ↦ ∫ J(y)^{2s/N} v(y) |x - y|^{-(N-2s)} dy`, and the bootstrap that
//! iterates it.

use std::sync::Arc;

use crate::bubble::{KernelFunction, ProblemParams};
use crate::error::{Error, Result};
use crate::funk_hecke::a_constant;
use crate::riesz::{apply_linearized_profile, kernel_profile, RadialProfile, RieszConfig, RieszOperator};
use crate::scalar::{c, cu, Real};

/// Allowed distance between measured and predicted exponents.
pub const EXPONENT_TOL: f64 = 0.05;

/// Log-log least-squares fit of `|v(r)| ≈ C r^{-exponent}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit<T> {
    pub r_min: T,
    pub r_max: T,
    pub exponent: T,
    /// Coefficient of determination of the log-log fit.
    pub quality: T,
    pub samples: Vec<(T, T)>,
}

/// Slope fit of `ln |v|` against `ln r`.
pub fn fit_decay<T: Real>(samples: &[(T, T)]) -> Result<DecayFit<T>> {
    if samples.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 samples, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) || !(samples[0].0 > T::zero()) {
        return Err(Error::Fit("radii must be positive and increasing".into()));
    }
    let r_min = samples[0].0;
    let r_max = samples[samples.len() - 1].0;
    if !((r_max / r_min).log10() >= c(1.5)) {
        return Err(Error::Fit(format!(
            "window [{r_min}, {r_max}] spans less than 1.5 decades"
        )));
    }
    let sign = samples[0].1.signum();
    if samples
        .iter()
        .any(|(_, v)| *v == T::zero() || !v.is_finite() || v.signum() != sign)
    {
        return Err(Error::Fit(
            "values vanish or change sign in the window; choose a larger r_min".into(),
        ));
    }
    let pts: Vec<(T, T)> = samples.iter().map(|(r, v)| (r.ln(), v.abs().ln())).collect();
    let n = cu::<T>(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let syy = pts.iter().map(|p| (p.1 - my).powi(2)).sum::<T>();
    let slope = sxy / sxx;
    let quality = if syy == T::zero() {
        T::one()
    } else {
        (sxy * sxy / (sxx * syy)).min(T::one())
    };
    Ok(DecayFit {
        r_min,
        r_max,
        exponent: -slope,
        quality,
        samples: samples.to_vec(),
    })
}

/// Grid, windows and quadrature used by the decay measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig<T> {
    pub riesz: RieszConfig<T>,
    /// Log-spaced radial grid `[grid_min, grid_max]`.
    pub grid_min: T,
    pub grid_max: T,
    pub grid_points: usize,
    /// Window of the exponent fit.
    pub window: [T; 2],
    /// Window of the power law used beyond `grid_max`.
    pub extrapolation_window: [T; 2],
}

impl<T: Real> Default for DecayConfig<T> {
    fn default() -> Self {
        Self {
            riesz: RieszConfig {
                target_tol: c(1e-6),
                ..RieszConfig::default()
            },
            grid_min: c(1e-2),
            grid_max: c(1e4),
            grid_points: 160,
            window: [c(10.0), c(1e3)],
            extrapolation_window: [c(1e3), c(1e4)],
        }
    }
}

impl<T: Real> DecayConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.riesz.validate()?;
        if !(self.grid_min > T::zero() && self.grid_max > self.grid_min) || self.grid_points < 16 {
            return Err(Error::InvalidParams(
                "decay grid must be positive, increasing, >= 16 points".into(),
            ));
        }
        for [lo, hi] in [self.window, self.extrapolation_window] {
            if !(lo >= self.grid_min && hi <= self.grid_max && hi > lo) {
                return Err(Error::InvalidParams(format!(
                    "window [{lo}, {hi}] must lie inside the grid"
                )));
            }
        }
        Ok(())
    }

    /// Grid radii.
    pub fn grid(&self) -> Vec<T> {
        let a = self.grid_min.ln();
        let b = self.grid_max.ln();
        let m = cu::<T>(self.grid_points - 1);
        (0..self.grid_points)
            .map(|i| (a + (b - a) * cu::<T>(i) / m).exp())
            .collect()
    }
}

/// The constant `c = 1/a` that turns the weighted Riesz integral into the
/// right side of the sphere equation.
pub fn weighted_riesz_constant<T: Real>(params: &ProblemParams<T>) -> T {
    a_constant(params).recip()
}

/// `J^{2s/N} v` as a radial profile.
pub fn weighted_input<T: Real>(params: &ProblemParams<T>, v: &RadialProfile<T>) -> RadialProfile<T> {
    let q = c::<T>(2.0) * params.s();
    let v = v.clone();
    RadialProfile::new(v.decay_exponent + c::<T>(2.0) * q, move |r| {
        (c::<T>(2.0) / (T::one() + r * r)).powf(q) * v.eval(r)
    })
}

/// `∫ J(y)^{2s/N} v(|y|) |x - y|^{-(N-2s)} dy` at `|x| = r`, optionally times `c`.
pub fn apply_weighted_riesz<T: Real>(
    op: &RieszOperator<T>,
    v: &RadialProfile<T>,
    r: T,
    include_constant: bool,
) -> Result<T> {
    if !(v.decay_exponent >= T::zero()) {
        return Err(Error::InvalidParams(format!(
            "input must be bounded (decay exponent >= 0), got {}",
            v.decay_exponent
        )));
    }
    let params = op.params();
    let value = op.integral(&weighted_input(params, v), 0, r)?;
    Ok(if include_constant {
        weighted_riesz_constant(params) * value
    } else {
        value
    })
}

/// Positive radial field stored on a log grid: monotone cubic interpolation
/// of `ln v` in `ln r`, constant below the grid, power law above it.
#[derive(Debug, Clone)]
pub struct GridField<T> {
    ln_r: Vec<T>,
    ln_v: Vec<T>,
    slopes: Vec<T>,
    /// Exponent of the power law used beyond the grid.
    pub tail_exponent: T,
}

impl<T: Real> GridField<T> {
    /// `values` must be positive. The tail exponent is fitted on `tail_window`.
    pub fn new(radii: &[T], values: &[T], tail_window: [T; 2]) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 4 {
            return Err(Error::InvalidParams(
                "grid field needs matching radii and values".into(),
            ));
        }
        if values.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Fit("grid field values must be positive".into()));
        }
        let ln_r: Vec<T> = radii.iter().map(|r| r.ln()).collect();
        let ln_v: Vec<T> = values.iter().map(|v| v.ln()).collect();
        let slopes = pchip_slopes(&ln_r, &ln_v);
        let tail: Vec<(T, T)> = radii
            .iter()
            .zip(values)
            .filter(|(r, _)| **r >= tail_window[0] && **r <= tail_window[1])
            .map(|(r, v)| (*r, *v))
            .collect();
        let tail_exponent = fit_tail(&tail)?;
        Ok(Self {
            ln_r,
            ln_v,
            slopes,
            tail_exponent,
        })
    }

    pub fn eval(&self, r: T) -> T {
        let n = self.ln_r.len();
        if !(r > T::zero()) {
            return self.ln_v[0].exp();
        }
        let x = r.ln();
        if x <= self.ln_r[0] {
            return self.ln_v[0].exp();
        }
        if x >= self.ln_r[n - 1] {
            return (self.ln_v[n - 1] - self.tail_exponent * (x - self.ln_r[n - 1])).exp();
        }
        let i = match self
            .ln_r
            .binary_search_by(|p| p.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => return self.ln_v[i].exp(),
            Err(i) => i - 1,
        };
        let h = self.ln_r[i + 1] - self.ln_r[i];
        let t = (x - self.ln_r[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let two = c::<T>(2.0);
        let three = c::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        (h00 * self.ln_v[i] + h10 * h * self.slopes[i] + h01 * self.ln_v[i + 1] + h11 * h * self.slopes[i + 1]).exp()
    }

    pub fn into_profile(self) -> RadialProfile<T> {
        let nu = self.tail_exponent;
        let f = Arc::new(self);
        RadialProfile::new(nu, move |r| f.eval(r))
    }
}

fn fit_tail<T: Real>(tail: &[(T, T)]) -> Result<T> {
    if tail.len() < 2 {
        return Err(Error::Fit(
            "extrapolation window holds fewer than two grid points".into(),
        ));
    }
    let n = cu::<T>(tail.len());
    let pts: Vec<(T, T)> = tail.iter().map(|(r, v)| (r.ln(), v.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    Ok(-sxy / sxx)
}

/// Fritsch-Carlson derivative estimates for a monotone piecewise cubic.
fn pchip_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![T::zero(); n];
    let two = c::<T>(2.0);
    let three = c::<T>(3.0);
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > T::zero() {
            let w1 = two * h[i] + h[i - 1];
            let w2 = h[i] + two * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: T, h1: T, d0: T, d1: T| {
        let v = ((two * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if v.signum() != d0.signum() {
            T::zero()
        } else if d0.signum() != d1.signum() && v.abs() > (three * d0).abs() {
            three * d0
        } else {
            v
        }
    };
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    d
}

/// One application of the weighted operator, sampled on the decay grid.
pub fn apply_on_grid<T: Real>(
    op: &RieszOperator<T>,
    v: &RadialProfile<T>,
    cfg: &DecayConfig<T>,
) -> Result<Vec<(T, T)>> {
    cfg.grid()
        .into_iter()
        .map(|r| Ok((r, apply_weighted_riesz(op, v, r, false)?)))
        .collect()
}

fn window_samples<T: Real>(samples: &[(T, T)], window: [T; 2]) -> Vec<(T, T)> {
    samples
        .iter()
        .copied()
        .filter(|(r, _)| *r >= window[0] && *r <= window[1])
        .collect()
}

/// Starting field `(1 + r^2)^{-ν/2}`.
pub fn power_profile<T: Real>(nu: T) -> RadialProfile<T> {
    RadialProfile::new(nu, move |r| (T::one() + r * r).powf(-nu / c(2.0)))
}

/// `min(ν + 2s, N - 2s)`.
pub fn predicted_exponent<T: Real>(params: &ProblemParams<T>, nu: T) -> T {
    (nu + c::<T>(2.0) * params.s()).min(params.decay_exponent())
}

/// Measured decay exponent of one application to `(1 + r^2)^{-ν/2}`.
pub fn measure_exponent<T: Real>(params: &ProblemParams<T>, nu: T, cfg: &DecayConfig<T>) -> Result<DecayFit<T>> {
    cfg.validate()?;
    let op = RieszOperator::new(*params, cfg.riesz)?;
    let v = power_profile(nu);
    let radii: Vec<T> = cfg
        .grid()
        .into_iter()
        .filter(|r| *r >= cfg.window[0] && *r <= cfg.window[1])
        .collect();
    let samples = radii
        .into_iter()
        .map(|r| Ok((r, apply_weighted_riesz(&op, &v, r, false)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_decay(&samples)
}

/// Measured decay of the linearized operator applied to the kernel
/// generator `Z_index`, fitted over the decay window.
pub fn kernel_decay<T: Real>(params: &ProblemParams<T>, index: usize, cfg: &DecayConfig<T>) -> Result<DecayFit<T>> {
    cfg.validate()?;
    let z = KernelFunction::new(*params, index)?;
    let op = RieszOperator::new(*params, cfg.riesz)?;
    let phi = kernel_profile(&z);
    let samples = cfg
        .grid()
        .into_iter()
        .filter(|r| *r >= cfg.window[0] && *r <= cfg.window[1])
        .map(|r| Ok((r, apply_linearized_profile(&op, &phi, z.harmonic_degree(), r)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_decay(&samples)
}

/// One bootstrap step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapStep<T> {
    pub step: usize,
    pub measured: T,
    pub predicted: T,
    pub quality: T,
}

impl<T: Real> BootstrapStep<T> {
    pub fn within(&self, tol: T) -> bool {
        (self.measured - self.predicted).abs() <= tol
    }
}

/// Iterates the weighted operator from `(1 + r^2)^{-ν/2}`, refitting the
/// exponent after each application. The predicted sequence is
/// `ν_{k+1} = min(ν_k + 2s, N - 2s)`.
pub fn bootstrap_check<T: Real>(
    params: &ProblemParams<T>,
    nu: T,
    steps: usize,
    cfg: &DecayConfig<T>,
) -> Result<Vec<BootstrapStep<T>>> {
    if steps == 0 {
        return Err(Error::InvalidParams("bootstrap needs at least one step".into()));
    }
    if !(nu >= T::zero()) {
        return Err(Error::InvalidParams(format!("starting decay must be >= 0, got {nu}")));
    }
    cfg.validate()?;
    let op = RieszOperator::new(*params, cfg.riesz)?;
    let mut field = power_profile(nu);
    let mut predicted = nu;
    let mut out = Vec::with_capacity(steps);
    for step in 1..=steps {
        predicted = predicted_exponent(params, predicted);
        let samples = apply_on_grid(&op, &field, cfg)?;
        let fit = fit_decay(&window_samples(&samples, cfg.window))?;
        out.push(BootstrapStep {
            step,
            measured: fit.exponent,
            predicted,
            quality: fit.quality,
        });
        if step < steps {
            let (radii, values): (Vec<T>, Vec<T>) = samples.into_iter().unzip();
            field = GridField::new(&radii, &values, cfg.extrapolation_window)?.into_profile();
        }
    }
    Ok(out)
}

/// Number of steps the predicted recursion needs to reach `N - 2s`.
pub fn predicted_steps<T: Real>(params: &ProblemParams<T>, nu: T) -> usize {
    let target = params.decay_exponent();
    let mut v = nu;
    let mut k = 0;
    while v < target && k < 1000 {
        v = predicted_exponent(params, v);
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::Bubble;

    fn log_samples(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let r = (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp();
                (r, f(r))
            })
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_decay(&log_samples(10.0, 1e3, 20, |r| 3.0 * r.powi(-2))).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert!((fit.quality - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bubble_tail() {
        let w = Bubble::standard(ProblemParams::new(3, 0.5_f64).unwrap());
        let fit = fit_decay(&log_samples(10.0, 1e3, 30, |r| w.radial(r))).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.02);
    }

    #[test]
    fn noisy_power_law() {
        let mut state = 7u64;
        let mut noise = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.02
        };
        let samples: Vec<(f64, f64)> = log_samples(10.0, 1e3, 40, |r| r.powf(-1.5))
            .into_iter()
            .map(|(r, v)| (r, v * (1.0 + noise())))
            .collect();
        let fit = fit_decay(&samples).unwrap();
        assert!((fit.exponent - 1.5).abs() < 0.05);
    }

    #[test]
    fn fit_preconditions() {
        let few = log_samples(10.0, 1e3, 5, |r| r.recip());
        assert!(matches!(fit_decay(&few), Err(Error::Fit(_))));
        let narrow = log_samples(10.0, 100.0, 10, |r| r.recip());
        assert!(matches!(fit_decay(&narrow), Err(Error::Fit(_))));
        let flip = log_samples(0.1, 100.0, 10, |r| 1.0 - r);
        assert!(matches!(fit_decay(&flip), Err(Error::Fit(_))));
    }

    #[test]
    fn grid_field_reproduces_power_law() {
        let cfg = DecayConfig::<f64>::default();
        let radii = cfg.grid();
        let values: Vec<f64> = radii.iter().map(|r| (1.0 + r * r).powf(-0.75)).collect();
        let g = GridField::new(&radii, &values, cfg.extrapolation_window).unwrap();
        assert!((g.tail_exponent - 1.5).abs() < 1e-6);
        for r in [0.0, 0.003, 0.7, 3.3, 123.0, 5e4] {
            let want = (1.0_f64 + r * r).powf(-0.75);
            assert!((g.eval(r) / want - 1.0).abs() < 1e-4, "r={r}");
        }
    }

    #[test]
    fn zero_input_gives_zero() {
        let params = ProblemParams::new(3, 0.5_f64).unwrap();
        let op = RieszOperator::new(params, DecayConfig::default().riesz).unwrap();
        assert_eq!(
            apply_weighted_riesz(&op, &RadialProfile::zero(), 2.0, true).unwrap(),
            0.0
        );
    }

    #[test]
    fn predicted_sequence() {
        let p = ProblemParams::new(3, 0.5_f64).unwrap();
        assert_eq!(predicted_exponent(&p, 0.0), 1.0);
        assert_eq!(predicted_exponent(&p, 1.0), 2.0);
        assert_eq!(predicted_steps(&p, 0.0), 2);
        assert_eq!(predicted_steps(&p, 2.5), 0);
        let q = ProblemParams::new(2, 0.75_f64).unwrap();
        assert_eq!(predicted_exponent(&q, 0.0), 0.5);
    }

    #[test]
    fn kernel_generators_decay() {
        let p = ProblemParams::new(3, 0.5_f64).unwrap();
        let cfg = DecayConfig::default();
        let z0 = kernel_decay(&p, 0, &cfg).unwrap();
        assert!((z0.exponent - 2.0).abs() <= EXPONENT_TOL, "{}", z0.exponent);
        let z1 = kernel_decay(&p, 1, &cfg).unwrap();
        assert!(z1.exponent > 2.0 + EXPONENT_TOL, "{}", z1.exponent);
    }
}
