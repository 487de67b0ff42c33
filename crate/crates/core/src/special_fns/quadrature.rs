//! Gauss rules for Jacobi weights `(1 - t)^a (1 + t)^b` on `[-1, 1]`.
//!
//! Nodes come from the Golub-Welsch tridiagonal eigenproblem and are then
//! polished by Newton steps on the orthonormal recurrence; weights come from
//! the Christoffel function `μ0 / Σ_k p_k(x)^2`, which keeps full relative
//! accuracy even for tiny weights.

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;
use crate::scalar::{c, cu, Real};

use super::gamma::ln_gamma_positive;

/// Which weight function a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureFamily<T> {
    Legendre,
    Jacobi {
        a: T,
        b: T,
    },
    /// A Gauss rule pushed through a change of variables onto a radial interval;
    /// weights include the Jacobian and any extracted weight function.
    MappedRadial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub family: QuadratureFamily<T>,
    /// Highest polynomial degree (in the rule's underlying variable) integrated
    /// exactly against the family weight.
    pub exact_degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`, summed in ascending node order.
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (x, w)| acc + *w * f(*x))
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().fold(T::zero(), |acc, w| acc + *w)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Maps the nodes onto `[lo, hi]` and scales the weights by the Jacobian.
    /// A Jacobi weight stays expressed in the reference coordinate on `[-1, 1]`.
    pub fn affine(&self, lo: T, hi: T) -> Vec<(T, T)> {
        let half = c::<T>(0.5) * (hi - lo);
        let mid = c::<T>(0.5) * (hi + lo);
        self.pairs().map(|(x, w)| (mid + half * x, w * half)).collect()
    }
}

/// Three-term recurrence of the Jacobi polynomials for weight
/// `(1 - t)^a (1 + t)^b`: monic `p_{k+1} = (t - α_k) p_k - β_k p_{k-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiRecurrence<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> JacobiRecurrence<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > -T::one()) || !(b > -T::one()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!(
                "Jacobi exponents must exceed -1 (got a = {a}, b = {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn alpha(&self, k: usize) -> T {
        let (a, b) = (self.a, self.b);
        let two = c::<T>(2.0);
        if k == 0 {
            return (b - a) / (a + b + two);
        }
        let s = two * cu::<T>(k) + a + b;
        (b * b - a * a) / (s * (s + two))
    }

    /// `β_k` for `k >= 1` (the squared off-diagonal of the Jacobi matrix).
    pub fn beta(&self, k: usize) -> T {
        assert!(k >= 1);
        let (a, b) = (self.a, self.b);
        let one = T::one();
        let two = c::<T>(2.0);
        let four = c::<T>(4.0);
        if k == 1 {
            let s = two + a + b;
            return four * (one + a) * (one + b) / (s * s * (s + one));
        }
        let kf = cu::<T>(k);
        let s = two * kf + a + b;
        four * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + one) * (s - one))
    }

    /// `∫ (1 - t)^a (1 + t)^b dt = 2^{a+b+1} B(a + 1, b + 1)`.
    pub fn mu0(&self) -> T {
        let (a, b) = (self.a, self.b);
        let one = T::one();
        let two = c::<T>(2.0);
        ((a + b + one) * two.ln() + ln_gamma_positive(a + one) + ln_gamma_positive(b + one)
            - ln_gamma_positive(a + b + two))
        .exp()
    }

    /// Orthonormal polynomials `p_0 .. p_{n-1}` at `t` (normalized so that
    /// `∫ p_j p_k w = μ0 δ_jk`, i.e. `p_0 = 1`).
    pub fn orthonormal_values(&self, n: usize, t: T) -> Vec<T> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        out.push(T::one());
        if n == 1 {
            return out;
        }
        let mut sb_prev = T::zero();
        for k in 0..n - 1 {
            let sb = self.beta(k + 1).sqrt();
            let prev = if k == 0 { T::zero() } else { out[k - 1] };
            let next = ((t - self.alpha(k)) * out[k] - sb_prev * prev) / sb;
            out.push(next);
            sb_prev = sb;
        }
        out
    }

    /// `(p_n(t), p_n'(t))` for the orthonormal family, plus `Σ_{k<n} p_k(t)^2`.
    fn value_derivative_christoffel(&self, n: usize, t: T) -> (T, T, T) {
        let mut p_prev = T::zero();
        let mut p = T::one();
        let mut d_prev = T::zero();
        let mut d = T::zero();
        let mut sum_sq = T::zero();
        let mut sb_prev = T::zero();
        for k in 0..n {
            sum_sq = sum_sq + p * p;
            let sb = self.beta(k + 1).sqrt();
            let x = t - self.alpha(k);
            let p_next = (x * p - sb_prev * p_prev) / sb;
            let d_next = (p + x * d - sb_prev * d_prev) / sb;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            sb_prev = sb;
        }
        (p, d, sum_sq)
    }
}

/// Weight family requested from [`gauss_rule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussFamily<T> {
    Legendre,
    Jacobi { a: T, b: T },
}

/// n-point Gauss rule for the given family.
pub fn gauss_rule<T: Real>(family: GaussFamily<T>, n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(Error::Domain("a Gauss rule needs at least one node".into()));
    }
    let (a, b, fam) = match family {
        GaussFamily::Legendre => (T::zero(), T::zero(), QuadratureFamily::Legendre),
        GaussFamily::Jacobi { a, b } => (a, b, QuadratureFamily::Jacobi { a, b }),
    };
    let rec = JacobiRecurrence::new(a, b)?;
    let diag: Vec<T> = (0..n).map(|k| rec.alpha(k)).collect();
    let off: Vec<T> = (1..n).map(|k| rec.beta(k).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&diag, &off)?;

    let mu0 = rec.mu0();
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d, _) = rec.value_derivative_christoffel(n, *x);
            if d == T::zero() {
                break;
            }
            let step = p / d;
            let candidate = *x - step;
            if candidate.abs() >= T::one() {
                break;
            }
            *x = candidate;
            if step.abs() <= T::epsilon() * (T::one() + x.abs()) {
                break;
            }
        }
        let (_, _, sum_sq) = rec.value_derivative_christoffel(n, *x);
        weights.push(mu0 / sum_sq);
    }
    let mut pairs: Vec<(T, T)> = nodes.into_iter().zip(weights).collect();
    pairs.sort_by(|l, r| l.0.partial_cmp(&r.0).expect("finite nodes"));
    // Newton polish cannot merge distinct nodes, but guard the invariant anyway.
    for w in pairs.windows(2) {
        if !(w[0].0 < w[1].0) {
            return Err(Error::NonConvergence("Gauss nodes not strictly increasing".into()));
        }
    }
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule {
        nodes,
        weights,
        family: fam,
        exact_degree: 2 * n - 1,
    })
}

#[cfg(test)]
// Reference values are quoted to the digits of the high-precision oracle.
#[allow(clippy::excessive_precision, clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn one_point_legendre() {
        let rule = gauss_rule::<f64>(GaussFamily::Legendre, 1).unwrap();
        assert_eq!(rule.nodes.len(), 1);
        assert!(rule.nodes[0].abs() < 1e-16);
        assert!((rule.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_known_three_point() {
        let rule = gauss_rule::<f64>(GaussFamily::Legendre, 3).unwrap();
        let x = (0.6_f64).sqrt();
        assert!((rule.nodes[0] + x).abs() < 1e-15);
        assert!(rule.nodes[1].abs() < 1e-15);
        assert!((rule.weights[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn singular_weight_total_mass() {
        for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            for n in [1, 4, 17, 64] {
                let rule = gauss_rule(GaussFamily::Jacobi { a: s - 1.0, b: 0.0 }, n).unwrap();
                let want = 2.0_f64.powf(s) / s;
                let got = rule.total_weight();
                assert!((got - want).abs() < 1e-13 * want, "s={s} n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn jacobi_moments_against_reference() {
        // ∫ (1-t)^{-1/2} (1+t)^{1/2} t^k dt, k = 0..15, 25-digit reference
        const MOMENTS: [f64; 16] = [
            3.141592653589793238462445,
            1.570796326794896619231123,
            1.570796326794896619231123,
            1.178097245096172464423161,
            1.178097245096172464423161,
            0.9817477042468103870192455,
            0.9817477042468103870192455,
            0.8590292412159590886419307,
            0.8590292412159590886419307,
            0.7731263170943631797777178,
            0.7731263170943631797777178,
            0.7086991240031662481295581,
            0.7086991240031662481295581,
            0.6580777580029400875488612,
            0.6580777580029400875488612,
            0.616947898127756332077045,
        ];
        let rule = gauss_rule(GaussFamily::Jacobi { a: -0.5_f64, b: 0.5 }, 8).unwrap();
        for (k, want) in MOMENTS.iter().enumerate() {
            let got = rule.integrate(|t| t.powi(k as i32));
            assert!((got - want).abs() < 1e-14 * want, "k = {k}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_nonintegrable_weights() {
        assert!(gauss_rule::<f64>(GaussFamily::Jacobi { a: -1.0, b: 0.0 }, 4).is_err());
        assert!(gauss_rule::<f64>(GaussFamily::Jacobi { a: 0.0, b: -1.2 }, 4).is_err());
        assert!(gauss_rule::<f64>(GaussFamily::Legendre, 0).is_err());
    }

    #[test]
    fn large_rule_nodes_match_legendre_roots() {
        // Legendre P_n vanishes at every node; evaluate by the standard recurrence.
        let n = 96;
        let rule = gauss_rule::<f64>(GaussFamily::Legendre, n).unwrap();
        for &x in &rule.nodes {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            assert!(p1.abs() < 1e-13);
        }
        assert!((rule.total_weight() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision_rule() {
        let rule = gauss_rule::<f32>(GaussFamily::Legendre, 5).unwrap();
        let got = rule.integrate(|t| t.powi(8));
        assert!((got - 2.0 / 9.0).abs() < 1e-6);
    }
}
