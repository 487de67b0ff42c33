//! The Riesz potential `(-Δ)^{-s} f = γ ∫ f(y) |x - y|^{-(N-2s)} dy` for
//! inputs `f(y) = g(|y|) Y_l(y/|y|)` with `Y_l` a degree-`l` spherical harmonic.
//!
//! The angular integral reduces to a zonal integral over `S^{N-1}` and the
//! radial integral is split into panels around the evaluation radius `r`:
//! `[0, r/2]`, `[r/2, r]`, `[r, 2r]`, `[2r, L]` and the tail `[L, ∞)` mapped
//! by `ρ = L/u`. The two panels touching `ρ = r` are graded towards it.

use std::fmt;
use std::sync::Arc;

use crate::bubble::{Bubble, KernelFunction, ProblemParams};
use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};
use crate::special_fns::{gauss_rule, gegenbauer_normalized, sphere_area, GaussFamily};
use crate::zonal::ZonalIntegrator;

/// A radial function `g(r)` with a known decay exponent `ν`,
/// `|g(r)| <= C (1 + r)^{-ν}`.
#[derive(Clone)]
pub struct RadialProfile<T: Real> {
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    pub decay_exponent: T,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(decay_exponent: T, eval: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            decay_exponent,
        }
    }

    /// The zero profile. Its decay exponent is infinite.
    pub fn zero() -> Self {
        Self::new(T::infinity(), |_| T::zero())
    }

    pub fn eval(&self, r: T) -> T {
        (self.eval)(r)
    }

    /// Whether `|g|` at `r = 10^2, 10^3, 10^4` stays within a factor of ten of
    /// `g(1) r^{-ν}`.
    pub fn decay_hint_consistent(&self) -> bool {
        let at_one = self.eval(T::one()).abs();
        if at_one == T::zero() || !self.decay_exponent.is_finite() {
            return true;
        }
        [1e2, 1e3, 1e4].iter().all(|&r| {
            let r = c::<T>(r);
            let ratio = self.eval(r).abs() / (at_one * r.powf(-self.decay_exponent));
            ratio.is_finite() && ratio <= c(10.0) && ratio >= c(0.1)
        })
    }
}

impl<T: Real> fmt::Debug for RadialProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("decay_exponent", &self.decay_exponent)
            .finish_non_exhaustive()
    }
}

/// Quadrature sizes and accuracy target for Riesz evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszConfig<T> {
    /// Size of the unsplit angular rule.
    pub n_angular: usize,
    /// Nodes on each panel touching `r`, on the first panel and on the tail.
    pub n_radial: usize,
    /// Nodes on each geometric (doubling) panel.
    pub panel_nodes: usize,
    /// Panel boundaries relative to `r`: `[r_split[0] r, r]` and `[r, r_split[1] r]`.
    pub r_split: [T; 2],
    /// The tail starts at `max(r_split[1] r, tail_start_min)`.
    pub tail_start_min: T,
    pub target_tol: T,
    /// Re-evaluate with halved radial rules and fail with an accuracy error
    /// if the two results differ by more than `10 target_tol`.
    pub check_accuracy: bool,
}

impl<T: Real> Default for RieszConfig<T> {
    fn default() -> Self {
        Self {
            n_angular: 64,
            n_radial: 96,
            panel_nodes: 32,
            r_split: [c(0.5), c(2.0)],
            tail_start_min: c(4.0),
            target_tol: c(1e-7),
            check_accuracy: true,
        }
    }
}

impl<T: Real> RieszConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_angular < 4 || self.n_radial < 4 || self.panel_nodes < 4 {
            return Err(Error::InvalidParams("quadrature sizes must be at least 4".into()));
        }
        if !(self.target_tol >= c(1e-12) && self.target_tol <= c(1e-2)) {
            return Err(Error::InvalidParams(format!(
                "target_tol {} outside [1e-12, 1e-2]",
                self.target_tol
            )));
        }
        let [lo, hi] = self.r_split;
        if !(lo > T::zero() && lo < T::one() && hi > T::one() && hi.is_finite()) {
            return Err(Error::InvalidParams("r_split must satisfy 0 < lo < 1 < hi".into()));
        }
        if !(self.tail_start_min > T::zero()) {
            return Err(Error::InvalidParams("tail_start_min must be positive".into()));
        }
        Ok(())
    }

    /// Same configuration with every quadrature size doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_angular: 2 * self.n_angular,
            n_radial: 2 * self.n_radial,
            panel_nodes: 2 * self.panel_nodes,
            ..*self
        }
    }
}

/// The Riesz constant `γ_{N,s}` stored in `params`.
pub fn riesz_gamma<T: Real>(params: &ProblemParams<T>) -> T {
    params.riesz_gamma()
}

/// Reference Gauss-Legendre rules at the fine and coarse sizes.
#[derive(Debug, Clone)]
struct RulePair<T> {
    fine: Vec<(T, T)>,
    coarse: Vec<(T, T)>,
}

impl<T: Real> RulePair<T> {
    fn legendre(n: usize) -> Result<Self> {
        Self::new(GaussFamily::Legendre, n)
    }

    fn new(family: GaussFamily<T>, n: usize) -> Result<Self> {
        Ok(Self {
            fine: gauss_rule(family, n)?.pairs().collect(),
            coarse: gauss_rule(family, n.div_ceil(2).max(2))?.pairs().collect(),
        })
    }

    fn get(&self, fine: bool) -> &[(T, T)] {
        if fine {
            &self.fine
        } else {
            &self.coarse
        }
    }
}

/// Riesz potential evaluator with all fixed rules prebuilt.
#[derive(Debug, Clone)]
pub struct RieszOperator<T> {
    params: ProblemParams<T>,
    cfg: RieszConfig<T>,
    zonal: ZonalIntegrator<T>,
    radial: RulePair<T>,
    panel: RulePair<T>,
    grading: T,
}

impl<T: Real> RieszOperator<T> {
    pub fn new(params: ProblemParams<T>, cfg: RieszConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let k = params.kernel_exponent() / c(2.0);
        let zonal = ZonalIntegrator::new(params.n() - 1, k, cfg.n_angular)?;
        let s = params.s().to_f64_lossy();
        let grading = c::<T>((2.0 / s).ceil().clamp(4.0, 24.0));
        Ok(Self {
            params,
            cfg,
            zonal,
            radial: RulePair::legendre(cfg.n_radial)?,
            panel: RulePair::legendre(cfg.panel_nodes)?,
            grading,
        })
    }

    pub fn params(&self) -> &ProblemParams<T> {
        &self.params
    }

    pub fn config(&self) -> &RieszConfig<T> {
        &self.cfg
    }

    /// Radial coefficient `h_l(r)` of `(-Δ)^{-s}(g Y_l) = h_l(|x|) Y_l(x/|x|)`,
    /// including the factor `γ`.
    pub fn radial(&self, g: &RadialProfile<T>, l: usize, r: T) -> Result<T> {
        Ok(self.params.riesz_gamma() * self.integral(g, l, r)?)
    }

    /// Same as [`RieszOperator::radial`] without the factor `γ`.
    pub fn integral(&self, g: &RadialProfile<T>, l: usize, r: T) -> Result<T> {
        let n = self.params.n();
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("radius must be finite and nonnegative, got {r}")));
        }
        if n == 1 && l > 1 {
            return Err(Error::Domain(format!("no spherical harmonics of degree {l} on S^0")));
        }
        if !g.decay_exponent.is_finite() && g.eval(T::one()) == T::zero() {
            // Only the zero profile is allowed an infinite decay hint.
            return Ok(T::zero());
        }
        let e = self.params.kernel_exponent();
        let nu = g.decay_exponent;
        if !(nu > cu::<T>(n) - e) {
            return Err(Error::Divergence(format!(
                "decay exponent {nu} must exceed {} for the Riesz integral to converge",
                cu::<T>(n) - e
            )));
        }
        let (value, l1) = self.sum(g, l, r, true)?;
        if self.cfg.check_accuracy {
            let (coarse, _) = self.sum(g, l, r, false)?;
            let floor = self.cfg.target_tol * l1;
            if (value - coarse).abs() > c::<T>(10.0) * floor.max(self.cfg.target_tol * value.abs()) {
                return Err(Error::Accuracy(format!(
                    "Riesz integral at r = {r} not converged: {value} vs {coarse} on halved rules"
                )));
            }
        }
        Ok(value)
    }

    /// Value and L1 norm of the integrand.
    fn sum(&self, g: &RadialProfile<T>, l: usize, r: T, fine: bool) -> Result<(T, T)> {
        let n = self.params.n();
        let e = self.params.kernel_exponent();
        let nf = cu::<T>(n);
        let one = T::one();
        let two = c::<T>(2.0);
        let mut acc = T::zero();
        let mut l1 = T::zero();
        let mut add = |w: T, v: T| {
            acc = acc + w * v;
            l1 = l1 + (w * v).abs();
        };

        if r == T::zero() {
            if l > 0 {
                return Ok((T::zero(), T::zero()));
            }
            // |x - y| = ρ: area · ∫ g(ρ) ρ^{N-1-e} dρ.
            let b = nf - one - e;
            if !(b > -one) {
                return Err(Error::Divergence(format!(
                    "kernel exponent {e} is not locally integrable in dimension {n}"
                )));
            }
            let area = sphere_area::<T>(n - 1);
            let size = if fine {
                self.cfg.n_radial
            } else {
                self.cfg.n_radial.div_ceil(2)
            };
            let rule = gauss_rule(GaussFamily::Jacobi { a: T::zero(), b }, size)?;
            let scale = two.powf(-b - one);
            for (x, w) in rule.pairs() {
                let rho = (one + x) / two;
                add(w * scale * area, g.eval(rho));
            }
            let tail_start = self.cfg.tail_start_min.max(one);
            for (rho, w) in self.geometric(one, tail_start, fine) {
                add(w * area, g.eval(rho) * rho.powf(b));
            }
            for (rho, w) in self.tail(tail_start, g.decay_exponent, fine)? {
                add(w * area, g.eval(rho) * rho.powf(b));
            }
            return Ok((acc, l1));
        }

        let lambda = (nf - two) / two;
        let poly = |t: T| -> T {
            if n == 1 {
                if l == 0 {
                    one
                } else {
                    t
                }
            } else {
                gegenbauer_normalized(l, lambda, t)
            }
        };
        let k = e / two;
        // `d = |r - ρ|` is passed separately so that graded nodes keep
        // their distance to `r` below the resolution of `ρ` itself.
        let near = |rho: T, d: T| -> T {
            let eps = d * d / (two * r * rho);
            g.eval(rho) * rho.powi(n as i32 - 1) * (two * r * rho).powf(-k) * self.zonal.eval(eps, poly)
        };
        let integrand = |rho: T| near(rho, (r - rho).abs());

        let [lo_frac, hi_frac] = self.cfg.r_split;
        let inner = r * lo_frac;
        let outer = r * hi_frac;
        // [0, inner]: one panel up to 1, doubling panels beyond.
        let first_end = inner.min(one);
        for (rho, w) in affine(self.radial.get(fine), T::zero(), first_end) {
            add(w, integrand(rho));
        }
        for (rho, w) in self.geometric(first_end, inner, fine) {
            add(w, integrand(rho));
        }
        // Graded panels on both sides of r.
        let q = self.grading;
        for (x, w) in affine(self.radial.get(fine), T::zero(), one) {
            let xq = x.powf(q);
            let jac = q * x.powf(q - one);
            let h_in = r - inner;
            add(w * h_in * jac, near(r - h_in * xq, h_in * xq));
            let h_out = outer - r;
            add(w * h_out * jac, near(r + h_out * xq, h_out * xq));
        }
        let tail_start = outer.max(self.cfg.tail_start_min);
        for (rho, w) in self.geometric(outer, tail_start, fine) {
            add(w, integrand(rho));
        }
        for (rho, w) in self.tail(tail_start, g.decay_exponent, fine)? {
            add(w, integrand(rho));
        }
        Ok((acc, l1))
    }

    /// Gauss-Legendre nodes on doubling panels covering `[lo, hi]`.
    fn geometric(&self, lo: T, hi: T, fine: bool) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut a = lo;
        let two = c::<T>(2.0);
        while a < hi {
            let b = (a * two).min(hi);
            // Avoid a sliver panel at the end.
            let b = if hi < b * c(1.25) { hi } else { b };
            out.extend(affine(self.panel.get(fine), a, b));
            a = b;
        }
        out
    }

    /// Nodes for `∫_L^∞` under `ρ = L/u`, with the algebraic decay of the
    /// integrand absorbed in a Jacobi weight in `u`.
    fn tail(&self, start: T, nu: T, fine: bool) -> Result<Vec<(T, T)>> {
        let n = self.params.n();
        let one = T::one();
        let two = c::<T>(2.0);
        let beta = nu + self.params.kernel_exponent() - cu::<T>(n) - one;
        if !(beta > -one) {
            return Err(Error::Divergence(format!(
                "tail of the Riesz integral diverges (exponent {beta})"
            )));
        }
        // Large exponents do not need the full weight.
        let beta = beta.min(c(8.0));
        let size = if fine {
            self.cfg.n_radial
        } else {
            self.cfg.n_radial.div_ceil(2)
        };
        let rule = gauss_rule(GaussFamily::Jacobi { a: T::zero(), b: beta }, size)?;
        let scale = two.powf(-beta - one);
        Ok(rule
            .pairs()
            .map(|(x, w)| {
                let u = (one + x) / two;
                (start / u, w * scale * start * u.powf(-two - beta))
            })
            .collect())
    }
}

fn affine<T: Real>(rule: &[(T, T)], lo: T, hi: T) -> Vec<(T, T)> {
    let two = c::<T>(2.0);
    let half = (hi - lo) / two;
    let mid = (hi + lo) / two;
    rule.iter().map(|&(x, w)| (mid + half * x, w * half)).collect()
}

/// Radial coefficient at `r` of `(-Δ)^{-s}(g Y_l)`.
pub fn riesz_radial<T: Real>(
    params: &ProblemParams<T>,
    g: &RadialProfile<T>,
    l: usize,
    r: T,
    cfg: &RieszConfig<T>,
) -> Result<T> {
    RieszOperator::new(*params, *cfg)?.radial(g, l, r)
}

/// `w^p` for the standard bubble of `params`.
pub fn bubble_power_profile<T: Real>(params: &ProblemParams<T>) -> RadialProfile<T> {
    let w = Bubble::standard(*params);
    let p = params.p();
    RadialProfile::new(params.decay_exponent() * p, move |r| w.radial(r).powf(p))
}

/// `max_r |(-Δ)^{-s}(w^p)(r) - w(r)| / w(r)` over `radii`.
pub fn bubble_residual<T: Real>(params: &ProblemParams<T>, radii: &[T], cfg: &RieszConfig<T>) -> Result<T> {
    let op = RieszOperator::new(*params, *cfg)?;
    let w = Bubble::standard(*params);
    let g = bubble_power_profile(params);
    let mut worst = T::zero();
    for &r in radii {
        let lhs = op.radial(&g, 0, r)?;
        let want = w.radial(r);
        worst = worst.max(((lhs - want) / want).abs());
    }
    Ok(worst)
}

/// `p w^{p-1} g` with the decay hint adjusted.
pub fn linearized_input<T: Real>(params: &ProblemParams<T>, phi: &RadialProfile<T>) -> RadialProfile<T> {
    let w = Bubble::standard(*params);
    let p = params.p();
    let phi = phi.clone();
    let nu = phi.decay_exponent + params.decay_exponent() * (p - T::one());
    RadialProfile::new(nu, move |r| p * w.radial(r).powf(p - T::one()) * phi.eval(r))
}

/// Right side of the linearized integral equation,
/// `γ ∫ p w(y)^{p-1} φ(y) |x - y|^{-(N-2s)} dy`, for `φ = g(|y|) Y_l`.
pub fn apply_linearized_profile<T: Real>(op: &RieszOperator<T>, phi: &RadialProfile<T>, l: usize, r: T) -> Result<T> {
    op.radial(&linearized_input(op.params(), phi), l, r)
}

/// The linearized operator applied to a kernel generator, as a radial
/// coefficient at `r` (harmonic degree 0 for `Z_0`, 1 for `Z_i`).
pub fn apply_linearized<T: Real>(
    params: &ProblemParams<T>,
    z: &KernelFunction<T>,
    r: T,
    cfg: &RieszConfig<T>,
) -> Result<T> {
    let op = RieszOperator::new(*params, *cfg)?;
    apply_linearized_profile(&op, &kernel_profile(z), z.harmonic_degree(), r)
}

/// Radial profile of a kernel generator.
pub fn kernel_profile<T: Real>(z: &KernelFunction<T>) -> RadialProfile<T> {
    let z = *z;
    RadialProfile::new(z.decay_hint(), move |r| z.radial(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, s: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, s).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = RieszConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.n_angular = 3;
        assert!(cfg.validate().is_err());
        let cfg = RieszConfig::<f64> {
            target_tol: 1e-13,
            ..RieszConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_input() {
        let p = params(3, 0.5);
        let cfg = RieszConfig::default();
        for r in [0.0, 1.0, 7.0] {
            assert_eq!(riesz_radial(&p, &RadialProfile::zero(), 0, r, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn slow_decay_is_rejected() {
        let p = params(3, 0.5);
        let g = RadialProfile::new(0.5, |r: f64| (1.0 + r * r).powf(-0.25));
        let err = riesz_radial(&p, &g, 0, 1.0, &RieszConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn bubble_residual_three_dimensions() {
        let p = params(3, 0.5);
        let res = bubble_residual(&p, &[0.0, 0.5, 1.0, 2.0, 10.0], &RieszConfig::default()).unwrap();
        assert!(res <= 1e-6, "residual {res:e}");
    }

    #[test]
    fn doubled_amplitude_breaks_residual() {
        let p = params(3, 0.5).with_defect(crate::bubble::Defect::AmplitudeScale(2.0));
        let res = bubble_residual(&p, &[0.0, 1.0], &RieszConfig::default()).unwrap();
        assert!(res >= 0.5);
    }

    #[test]
    fn gaussian_against_fourier_multiplier() {
        // N = 3: (-Δ)^{-s} e^{-|x|^2}(r) = (2π)^{-3} 4π ∫ k^{2-2s} π^{3/2} e^{-k²/4} sin(kr)/(kr) dk
        let s = 0.5;
        let p = params(3, s);
        let g = RadialProfile::new(40.0, |r: f64| (-r * r).exp());
        let cfg = RieszConfig::default();
        let gl = gauss_rule::<f64>(GaussFamily::Legendre, 60).unwrap();
        for r in [0.0_f64, 1.0, 2.0] {
            let mut fourier = 0.0;
            for j in 0..30 {
                let (a, b) = (j as f64, j as f64 + 1.0);
                fourier += gl.integrate(|x| {
                    let k = 0.5 * (a + b) + 0.5 * (b - a) * x;
                    let sinc = if r == 0.0 { 1.0 } else { (k * r).sin() / (k * r) };
                    0.5 * k.powf(2.0 - 2.0 * s) * (-k * k / 4.0).exp() * sinc
                });
            }
            fourier *=
                4.0 * std::f64::consts::PI * std::f64::consts::PI.powf(1.5) / (2.0 * std::f64::consts::PI).powi(3);
            let got = riesz_radial(&p, &g, 0, r, &cfg).unwrap();
            assert!(((got - fourier) / fourier).abs() < 1e-8, "r={r}: {got} vs {fourier}");
        }
    }

    #[test]
    fn linearity() {
        let p = params(3, 0.5);
        let op = RieszOperator::new(p, RieszConfig::default()).unwrap();
        let f1 = RadialProfile::new(3.0, |r: f64| (1.0 + r * r).powf(-1.5));
        let f2 = RadialProfile::new(3.0, |r: f64| (1.0 + r * r).powf(-2.0));
        let both = RadialProfile::new(3.0, |r: f64| {
            2.0 * (1.0 + r * r).powf(-1.5) - 0.5 * (1.0 + r * r).powf(-2.0)
        });
        for r in [0.3, 2.0] {
            let lhs = op.radial(&both, 1, r).unwrap();
            let rhs = 2.0 * op.radial(&f1, 1, r).unwrap() - 0.5 * op.radial(&f2, 1, r).unwrap();
            assert!(((lhs - rhs) / rhs).abs() < 1e-10);
        }
    }
}
