//! Stereographic projection `S: R^N → S^N \ {south pole}` and the transforms
//! that move Euclidean fields onto the sphere.

use std::fmt;
use std::sync::Arc;

use crate::bubble::{KernelFunction, ProblemParams};
use crate::error::{Error, Result};
use crate::field::{norm_sq, Field};
use crate::linalg::least_squares;
use crate::scalar::{c, cu, Real};
use crate::special_fns::{gauss_rule, GaussFamily};

/// Samples closer than this to the south pole (in the last coordinate) are dropped.
pub const POLE_MARGIN: f64 = 1e-3;

/// A unit vector in `R^{N+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Checks `| |ω| - 1 | <= 1e-12`.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain("a sphere point needs at least two coordinates".into()));
        }
        let norm = norm_sq(&coords).sqrt();
        if !((norm - T::one()).abs() <= c(1e-12)) {
            return Err(Error::Domain(format!("point has norm {norm}, expected 1")));
        }
        Ok(Self { coords })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        let norm = norm_sq(&coords).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        for x in coords.iter_mut() {
            *x = *x / norm;
        }
        Self::new(coords)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Sphere dimension `N` (the point lives in `R^{N+1}`).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Last coordinate `ω_{N+1}`.
    pub fn height(&self) -> T {
        self.coords[self.coords.len() - 1]
    }

    pub fn chordal_distance(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
            .sqrt()
    }
}

/// `S(x) = (2x / (1 + |x|^2), (1 - |x|^2) / (1 + |x|^2))`.
pub fn stereo_project<T: Real>(x: &[T]) -> SpherePoint<T> {
    let r2 = norm_sq(x);
    let one = T::one();
    let denom = one + r2;
    let mut coords: Vec<T> = x.iter().map(|v| c::<T>(2.0) * *v / denom).collect();
    coords.push((one - r2) / denom);
    SpherePoint { coords }
}

/// `x_i = ω_i / (1 + ω_{N+1})`.
pub fn stereo_inverse<T: Real>(omega: &SpherePoint<T>) -> Result<Vec<T>> {
    let denom = T::one() + omega.height();
    if !(denom > T::zero()) {
        return Err(Error::Pole);
    }
    let n = omega.dim();
    Ok(omega.coords[..n].iter().map(|v| *v / denom).collect())
}

/// `J(x) = (2 / (1 + |x|^2))^N`.
pub fn jacobian<T: Real>(x: &[T]) -> T {
    (c::<T>(2.0) / (T::one() + norm_sq(x))).powi(x.len() as i32)
}

type SphereFn<T> = dyn Fn(&SpherePoint<T>) -> Result<T> + Send + Sync;

/// A function on the sphere minus the south pole.
#[derive(Clone)]
pub struct LiftedField<T: Real> {
    eval: Arc<SphereFn<T>>,
    /// Set when the Euclidean field decays fast enough for the lift to be bounded.
    pub bounded: bool,
    /// Short description of the field that was lifted.
    pub provenance: String,
}

impl<T: Real> LiftedField<T> {
    pub fn new(
        provenance: impl Into<String>,
        bounded: bool,
        eval: impl Fn(&SpherePoint<T>) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            bounded,
            provenance: provenance.into(),
        }
    }

    pub fn eval(&self, omega: &SpherePoint<T>) -> Result<T> {
        (self.eval)(omega)
    }

    /// `max |f|` over the samples.
    pub fn sampled_sup(&self, samples: &[SpherePoint<T>]) -> Result<T> {
        samples
            .iter()
            .try_fold(T::zero(), |m, p| Ok(m.max(self.eval(p)?.abs())))
    }
}

impl<T: Real> fmt::Debug for LiftedField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiftedField")
            .field("bounded", &self.bounded)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

/// Lift with weight `J^{-q}`: evaluates `J(x)^{-q} φ(x)` at `x = S^{-1}(ω)`.
fn lift_with_power<T: Real, F: Field<T> + Clone + 'static>(
    phi: F,
    power: T,
    bounded: bool,
    provenance: String,
) -> LiftedField<T> {
    LiftedField::new(provenance, bounded, move |omega: &SpherePoint<T>| {
        let x = stereo_inverse(omega)?;
        Ok(jacobian(&x).powf(-power) * phi.eval(&x))
    })
}

/// `tilde φ(ω) = J(x)^{-(N+2s)/(2N)} φ(x)`, `x = S^{-1}(ω)`.
pub fn lift<T: Real, F: Field<T> + Clone + 'static>(params: &ProblemParams<T>, phi: F) -> LiftedField<T> {
    let nf = cu::<T>(params.n());
    let two = c::<T>(2.0);
    let power = (nf + two * params.s()) / (two * nf);
    // J^{-(N+2s)/(2N)} grows like |x|^{N+2s}.
    let bounded = phi.decay_exponent().is_some_and(|nu| nu >= nf + two * params.s());
    lift_with_power(phi, power, bounded, "lift".into())
}

/// `h = J^{2s/N} tilde φ = J^{-(N-2s)/(2N)} φ`, transported to the sphere.
pub fn h_transform<T: Real, F: Field<T> + Clone + 'static>(params: &ProblemParams<T>, phi: F) -> LiftedField<T> {
    let nf = cu::<T>(params.n());
    let power = params.decay_exponent() / (c::<T>(2.0) * nf);
    let bounded = phi.decay_exponent().is_some_and(|nu| nu >= params.decay_exponent());
    lift_with_power(phi, power, bounded, "h".into())
}

/// Sampled sup on about `count` and `4 count` points. Returns both values;
/// a bounded field gives two finite values that agree to a few percent.
pub fn sampled_sup_pair<T: Real>(f: &LiftedField<T>, n: usize, count: usize) -> Result<(T, T)> {
    let coarse = f.sampled_sup(&sphere_samples(n, count)?)?;
    let fine = f.sampled_sup(&sphere_samples(n, 4 * count)?)?;
    Ok((coarse, fine))
}

/// `| |S(x) - S(y)|^2 - J(x)^{1/N} J(y)^{1/N} |x - y|^2 |`, relative.
pub fn conformal_distance_defect<T: Real>(x: &[T], y: &[T]) -> T {
    let n = cu::<T>(x.len());
    let lhs = stereo_project(x).chordal_distance(&stereo_project(y)).powi(2);
    let d2 = x
        .iter()
        .zip(y)
        .fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b));
    let rhs = jacobian(x).powf(n.recip()) * jacobian(y).powf(n.recip()) * d2;
    (lhs - rhs).abs() / lhs.max(rhs)
}

/// Quasi-uniform spiral points on `S^2`, dropping any within the pole margin.
pub fn fibonacci_sphere<T: Real>(n: usize) -> Vec<SpherePoint<T>> {
    let golden = T::PI() * (c::<T>(3.0) - c::<T>(5.0).sqrt());
    let nf = cu::<T>(n);
    let two = c::<T>(2.0);
    (0..n)
        .filter_map(|i| {
            let z = T::one() - (two * cu::<T>(i) + T::one()) / nf;
            if z < -T::one() + c(POLE_MARGIN) {
                return None;
            }
            let rho = (T::one() - z * z).sqrt();
            let phi = golden * cu::<T>(i);
            Some(SpherePoint {
                coords: vec![rho * phi.cos(), rho * phi.sin(), z],
            })
        })
        .collect()
}

/// Product grid on `S^N` in hyperspherical angles: `m` Gauss-Legendre polar
/// angles per nested level and `2m` uniform azimuths. The polar angle is
/// measured from the north pole `(0, ..., 0, 1)`.
pub fn product_grid<T: Real>(n: usize, m: usize) -> Result<Vec<SpherePoint<T>>> {
    if n == 0 || m < 2 {
        return Err(Error::Sampling("product grid needs N >= 1 and m >= 2".into()));
    }
    let gl = gauss_rule::<T>(GaussFamily::Legendre, m)?;
    let polar: Vec<T> = gl.nodes.iter().map(|x| T::PI() * (T::one() + *x) / c(2.0)).collect();
    let azimuth: Vec<T> = (0..2 * m)
        .map(|j| T::PI() * (c::<T>(2.0) * cu::<T>(j) + T::one()) / cu::<T>(2 * m))
        .collect();
    // Unit vectors of S^1 first, then extend one level at a time:
    // ω = (sin θ · v, cos θ) for v on the lower sphere.
    let mut level: Vec<Vec<T>> = azimuth.iter().map(|a| vec![a.cos(), a.sin()]).collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(level.len() * polar.len());
        for theta in &polar {
            let (st, ct) = theta.sin_cos();
            for v in &level {
                let mut w: Vec<T> = v.iter().map(|x| *x * st).collect();
                w.push(ct);
                next.push(w);
            }
        }
        level = next;
    }
    Ok(level
        .into_iter()
        .filter(|w| w[w.len() - 1] >= -T::one() + c(POLE_MARGIN))
        .map(|coords| SpherePoint { coords })
        .collect())
}

/// Default quasi-uniform sample set of roughly `count` points on `S^N`.
pub fn sphere_samples<T: Real>(n: usize, count: usize) -> Result<Vec<SpherePoint<T>>> {
    if n == 2 {
        return Ok(fibonacci_sphere(count));
    }
    // 2 m^N points in total.
    let m = ((count as f64 / 2.0).powf(1.0 / n as f64).ceil() as usize).max(2);
    product_grid(n, m)
}

/// Least-squares fit of a sphere function by the coordinate functions.
#[derive(Debug, Clone, PartialEq)]
pub struct H1Fit<T> {
    /// Coefficients of `ω_1, ..., ω_{N+1}`.
    pub coefficients: Vec<T>,
    /// `|h - Σ c_j ω_j| / |h|` in discrete L2 over the samples.
    pub residual: T,
}

impl<T: Real> H1Fit<T> {
    /// Index of the largest coefficient in absolute value.
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.coefficients.iter().enumerate() {
            if v.abs() > self.coefficients[best].abs() {
                best = j;
            }
        }
        best
    }

    /// Largest off-dominant coefficient relative to the dominant one.
    pub fn cross_ratio(&self) -> T {
        let d = self.dominant();
        let top = self.coefficients[d].abs();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != d)
            .fold(T::zero(), |m, (_, v)| m.max(v.abs() / top))
    }
}

/// Fits `h` by `Σ c_j ω_j` on `samples`.
pub fn fit_h1<T: Real>(h: &LiftedField<T>, samples: &[SpherePoint<T>]) -> Result<H1Fit<T>> {
    let rows: Vec<Vec<T>> = samples.iter().map(|p| p.coords.clone()).collect();
    let y = samples.iter().map(|p| h.eval(p)).collect::<Result<Vec<T>>>()?;
    let (coefficients, misfit) = least_squares(&rows, &y)?;
    let norm = y.iter().fold(T::zero(), |acc, v| acc.hypot(*v));
    if norm == T::zero() {
        return Err(Error::Sampling("sphere function vanishes on every sample".into()));
    }
    Ok(H1Fit {
        coefficients,
        residual: misfit / norm,
    })
}

/// `h` of the kernel generator `Z_k`, fitted by the coordinate functions.
pub fn lift_kernel_to_h1<T: Real>(params: &ProblemParams<T>, k: usize, samples: &[SpherePoint<T>]) -> Result<H1Fit<T>> {
    let z = KernelFunction::new(*params, k)?;
    fit_h1(&h_transform(params, z), samples)
}

/// Quadrature sizes for [`verify_id1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Id1Grid<T> {
    /// Euclidean truncation radius.
    pub radius: T,
    /// Outer (point `x` or `ω`) radial / polar nodes.
    pub n_outer: usize,
    /// Inner (distance) nodes.
    pub n_inner: usize,
    /// Nodes per full circle of directions (N = 2 only).
    pub n_angle: usize,
}

impl<T: Real> Default for Id1Grid<T> {
    fn default() -> Self {
        Self {
            radius: c(9.0),
            n_outer: 120,
            n_inner: 120,
            n_angle: 64,
        }
    }
}

/// Both sides of the bilinear identity and their relative difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Id1Result<T> {
    pub lhs: T,
    pub rhs: T,
    pub rel_diff: T,
}

/// Relative size below which a field counts as negligible at the truncation radius.
const NEGLIGIBLE: f64 = 1e-14;

/// `∫∫ φ(x) ψ(y) |x - y|^{-(N-2s)} dx dy` against the same integral of the
/// lifts over `S^N × S^N`, for `N ∈ {1, 2}`.
pub fn verify_id1<T: Real, F, G>(params: &ProblemParams<T>, phi: F, psi: G, grid: &Id1Grid<T>) -> Result<Id1Result<T>>
where
    F: Field<T> + Clone + 'static,
    G: Field<T> + Clone + 'static,
{
    let n = params.n();
    if n > 2 {
        return Err(Error::InvalidParams(format!(
            "the bilinear identity is only evaluated for N <= 2, got {n}"
        )));
    }
    let nf = cu::<T>(n);
    for (name, nu) in [("φ", phi.decay_exponent()), ("ψ", psi.decay_exponent())] {
        if !nu.is_some_and(|v| v > nf) {
            return Err(Error::Divergence(format!(
                "{name} must decay faster than |x|^-{n} for the double integral to converge"
            )));
        }
    }
    check_negligible(&phi, grid.radius, n)?;
    check_negligible(&psi, grid.radius, n)?;
    let lhs = euclidean_side(params, &phi, &psi, grid)?;
    let rhs = sphere_side(params, &lift(params, phi), &lift(params, psi), grid)?;
    let scale = lhs.abs().max(rhs.abs());
    let rel_diff = if scale == T::zero() {
        T::zero()
    } else {
        (lhs - rhs).abs() / scale
    };
    Ok(Id1Result { lhs, rhs, rel_diff })
}

fn directions<T: Real>(n: usize, count: usize) -> Vec<Vec<T>> {
    if n == 1 {
        return vec![vec![T::one()], vec![-T::one()]];
    }
    (0..count)
        .map(|j| {
            let a = c::<T>(2.0) * T::PI() * cu::<T>(j) / cu::<T>(count);
            vec![a.cos(), a.sin()]
        })
        .collect()
}

fn check_negligible<T: Real, F: Field<T>>(f: &F, radius: T, n: usize) -> Result<()> {
    let origin = vec![T::zero(); n];
    let mut peak = f.eval(&origin).abs();
    let mut edge = T::zero();
    for d in directions::<T>(n, 16) {
        for frac in [0.25, 0.5, 0.75] {
            let x: Vec<T> = d.iter().map(|v| *v * radius * c(frac)).collect();
            peak = peak.max(f.eval(&x).abs());
        }
        let x: Vec<T> = d.iter().map(|v| *v * radius).collect();
        edge = edge.max(f.eval(&x).abs());
    }
    if edge > c::<T>(NEGLIGIBLE) * peak {
        return Err(Error::Divergence(format!(
            "field is not negligible at the truncation radius {radius}"
        )));
    }
    Ok(())
}

/// Outer points and weights covering the ball of the given radius.
fn ball_rule<T: Real>(n: usize, radius: T, grid: &Id1Grid<T>) -> Result<Vec<(Vec<T>, T)>> {
    let gl = gauss_rule::<T>(GaussFamily::Legendre, grid.n_outer)?;
    if n == 1 {
        return Ok(gl
            .affine(-radius, radius)
            .into_iter()
            .map(|(x, w)| (vec![x], w))
            .collect());
    }
    let radial = gl.affine(T::zero(), radius);
    let dirs = directions::<T>(2, grid.n_angle);
    let dphi = c::<T>(2.0) * T::PI() / cu::<T>(grid.n_angle);
    let mut out = Vec::with_capacity(radial.len() * dirs.len());
    for (r, w) in radial {
        for d in &dirs {
            out.push((vec![r * d[0], r * d[1]], w * r * dphi));
        }
    }
    Ok(out)
}

fn euclidean_side<T: Real, F: Field<T>, G: Field<T>>(
    params: &ProblemParams<T>,
    phi: &F,
    psi: &G,
    grid: &Id1Grid<T>,
) -> Result<T> {
    let n = params.n();
    let e = params.kernel_exponent();
    let b = cu::<T>(n) - T::one() - e;
    // ∫ ψ(x + ρθ) ρ^{N-1-e} dρ dθ over ρ ∈ [0, 2R] with the weight exact.
    let reach = c::<T>(2.0) * grid.radius;
    let inner = gauss_rule(GaussFamily::Jacobi { a: T::zero(), b }, grid.n_inner)?;
    let inner_scale = (reach / c(2.0)).powf(b + T::one());
    let dirs = directions::<T>(n, grid.n_angle);
    let dir_weight = if n == 1 {
        T::one()
    } else {
        c::<T>(2.0) * T::PI() / cu::<T>(grid.n_angle)
    };
    let mut total = T::zero();
    for (x, wx) in ball_rule(n, grid.radius, grid)? {
        let fx = phi.eval(&x);
        if fx == T::zero() {
            continue;
        }
        let mut acc = T::zero();
        for d in &dirs {
            for (t, w) in inner.pairs() {
                let rho = reach * (T::one() + t) / c(2.0);
                let y: Vec<T> = x.iter().zip(d).map(|(a, b)| *a + rho * *b).collect();
                acc = acc + w * psi.eval(&y);
            }
        }
        total = total + wx * fx * acc * inner_scale * dir_weight;
    }
    Ok(total)
}

/// Orthonormal tangent basis at `ω` on `S^N`, `N ∈ {1, 2}`.
fn tangent_basis<T: Real>(omega: &[T]) -> Vec<Vec<T>> {
    if omega.len() == 2 {
        return vec![vec![-omega[1], omega[0]]];
    }
    // Gram-Schmidt against the coordinate axis least aligned with ω.
    let mut axis = 0;
    for j in 1..3 {
        if omega[j].abs() < omega[axis].abs() {
            axis = j;
        }
    }
    let mut e1 = vec![T::zero(); 3];
    e1[axis] = T::one();
    let dot = omega[axis];
    for j in 0..3 {
        e1[j] = e1[j] - dot * omega[j];
    }
    let norm = norm_sq(&e1).sqrt();
    for v in e1.iter_mut() {
        *v = *v / norm;
    }
    let e2 = vec![
        omega[1] * e1[2] - omega[2] * e1[1],
        omega[2] * e1[0] - omega[0] * e1[2],
        omega[0] * e1[1] - omega[1] * e1[0],
    ];
    vec![e1, e2]
}

fn sphere_side<T: Real>(
    params: &ProblemParams<T>,
    phi: &LiftedField<T>,
    psi: &LiftedField<T>,
    grid: &Id1Grid<T>,
) -> Result<T> {
    let n = params.n();
    let e = params.kernel_exponent();
    let one = T::one();
    let two = c::<T>(2.0);
    let pi = T::PI();
    // Outer points ω.
    let mut outer: Vec<(Vec<T>, T)> = Vec::new();
    if n == 1 {
        let count = 2 * grid.n_outer;
        let dtheta = two * pi / cu::<T>(count);
        for j in 0..count {
            let th = -pi + dtheta * cu::<T>(j);
            outer.push((vec![th.sin(), th.cos()], dtheta));
        }
    } else {
        let gl = gauss_rule::<T>(GaussFamily::Legendre, grid.n_outer)?;
        let dphi = two * pi / cu::<T>(grid.n_angle);
        for (beta, w) in gl.affine(T::zero(), pi) {
            for j in 0..grid.n_angle {
                let az = dphi * cu::<T>(j);
                let sb = beta.sin();
                outer.push((vec![sb * az.cos(), sb * az.sin(), beta.cos()], w * sb * dphi));
            }
        }
    }
    // Geodesic polar angle β ∈ [0, π] around ω with β^{N-1-e} extracted.
    let b = cu::<T>(n) - one - e;
    let inner = gauss_rule(GaussFamily::Jacobi { a: T::zero(), b }, grid.n_inner)?;
    let half_pi = pi / two;
    let inner_scale = half_pi.powf(b + one);
    let ring = if n == 1 { 2 } else { grid.n_angle };
    let ring_weight = if n == 1 { one } else { two * pi / cu::<T>(ring) };
    let mut total = T::zero();
    for (w_coords, w_weight) in outer {
        let omega = SpherePoint { coords: w_coords };
        if one + omega.height() <= T::zero() {
            continue;
        }
        let f = phi.eval(&omega)?;
        if f == T::zero() {
            continue;
        }
        let basis = tangent_basis(omega.coords());
        let mut acc = T::zero();
        for (t, w) in inner.pairs() {
            let beta = half_pi * (one + t);
            let (sb, cb) = beta.sin_cos();
            // (2 sin(β/2))^{-e} sin^{N-1} β = β^{N-1-e} · smooth
            let smooth = (two * (beta / two).sin() / beta).powf(-e) * (sb / beta).powi(n as i32 - 1);
            let mut ring_sum = T::zero();
            for j in 0..ring {
                let dir: Vec<T> = if n == 1 {
                    let sign = if j == 0 { one } else { -one };
                    basis[0].iter().map(|v| *v * sign).collect()
                } else {
                    let az = two * pi * cu::<T>(j) / cu::<T>(ring);
                    let (sa, ca) = az.sin_cos();
                    (0..3).map(|k| ca * basis[0][k] + sa * basis[1][k]).collect()
                };
                let eta: Vec<T> = omega
                    .coords()
                    .iter()
                    .zip(&dir)
                    .map(|(o, d)| cb * *o + sb * *d)
                    .collect();
                let eta = SpherePoint { coords: eta };
                if one + eta.height() <= T::zero() {
                    continue;
                }
                ring_sum = ring_sum + psi.eval(&eta)?;
            }
            acc = acc + w * smooth * ring_sum;
        }
        total = total + w_weight * f * acc * inner_scale * ring_weight;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::Bubble;
    use crate::field::FnField;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn projection_basics() {
        let north = stereo_project(&[0.0_f64, 0.0, 0.0]);
        assert_eq!(north.coords(), &[0.0, 0.0, 0.0, 1.0]);
        let eq = stereo_project(&[0.6_f64, 0.8]);
        assert!(eq.height().abs() < 1e-16);
        let mut st = 1u64;
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| 20.0 * lcg(&mut st) - 10.0).collect();
            let p = stereo_project(&x);
            assert!((norm_sq(p.coords()).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_round_trip_and_pole() {
        let mut st = 2u64;
        for _ in 0..100 {
            let v: Vec<f64> = (0..4).map(|_| lcg(&mut st) - 0.5).collect();
            let p = SpherePoint::normalized(v).unwrap();
            if p.height() < -0.999 {
                continue;
            }
            let back = stereo_project(&stereo_inverse(&p).unwrap());
            for (a, b) in back.coords().iter().zip(p.coords()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let pole = SpherePoint::new(vec![0.0_f64, -1.0]).unwrap();
        assert_eq!(stereo_inverse(&pole), Err(Error::Pole));
        let h = -1.0_f64 + 1e-9;
        let near = SpherePoint::new(vec![(1.0 - h * h).sqrt(), h]).unwrap();
        let x = stereo_inverse(&near).unwrap();
        assert!(x[0].is_finite());
        assert!((x[0] / (2.0_f64 / 1e-9).sqrt() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn jacobian_matches_bubble_power() {
        let params = ProblemParams::new(3, 0.5_f64).unwrap();
        let w = Bubble::standard(params);
        let e = params.decay_exponent();
        let n = 3.0;
        let alpha = params.bubble_amplitude();
        let mut st = 3u64;
        assert_eq!(jacobian(&[0.0_f64; 3]), 8.0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| 8.0 * lcg(&mut st) - 4.0).collect();
            let want = 2f64.powf(n) * alpha.powf(-2.0 * n / e) * w.eval(&x).powf(2.0 * n / e);
            assert!((jacobian(&x) / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lifts_of_simple_fields() {
        let params = ProblemParams::new(2, 0.3_f64).unwrap();
        let q = (2.0 + 0.6) / 4.0;
        let unit = lift(&params, FnField::new(2, move |x: &[f64]| jacobian(x).powf(q)));
        let w_lift = lift(&params, Bubble::standard(params));
        let w_h = h_transform(&params, Bubble::standard(params));
        let want = params.bubble_amplitude() * 2f64.powf(-params.decay_exponent() / 2.0);
        for p in fibonacci_sphere::<f64>(100) {
            assert!((unit.eval(&p).unwrap() - 1.0).abs() < 1e-12);
            assert!((w_h.eval(&p).unwrap() / want - 1.0).abs() < 1e-12);
            let x = stereo_inverse(&p).unwrap();
            let lifted = want * jacobian(&x).powf(-0.6 / 2.0);
            assert!((w_lift.eval(&p).unwrap() / lifted - 1.0).abs() < 1e-12);
        }
        assert!(w_h.bounded);
        assert!(!w_lift.bounded);
    }

    #[test]
    fn jacobian_integrates_to_sphere_area() {
        use crate::special_fns::sphere_area;
        let rule = gauss_rule::<f64>(GaussFamily::Legendre, 200).unwrap();
        for n in 1..=3usize {
            // r = tan(θ/2), θ ∈ [0, π).
            let radial = rule.integrate(|t| {
                let th = std::f64::consts::FRAC_PI_2 * (1.0 + t);
                let r = (th / 2.0).tan();
                let dr = 0.5 / (th / 2.0).cos().powi(2);
                jacobian(&[r]).powi(n as i32) * r.powi(n as i32 - 1) * dr
            }) * std::f64::consts::FRAC_PI_2;
            let got = radial * sphere_area::<f64>(n - 1);
            let want = sphere_area::<f64>(n);
            assert!((got / want - 1.0).abs() < 1e-8, "N={n}: {got} vs {want}");
        }
    }

    #[test]
    fn kernel_h_is_bounded() {
        let params = ProblemParams::new(3, 0.5_f64).unwrap();
        for k in 0..=3 {
            let h = h_transform(&params, KernelFunction::new(params, k).unwrap());
            assert!(h.bounded);
            let (coarse, fine) = sampled_sup_pair(&h, 3, 2500).unwrap();
            assert!(coarse.is_finite() && fine.is_finite());
            assert!((fine / coarse - 1.0).abs() < 0.05, "k={k}: {coarse} {fine}");
        }
    }

    #[test]
    fn conformal_distance() {
        let mut st = 4u64;
        for n in 1..=3 {
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| 10.0 * lcg(&mut st) - 5.0).collect();
                let y: Vec<f64> = (0..n).map(|_| 10.0 * lcg(&mut st) - 5.0).collect();
                assert!(conformal_distance_defect(&x, &y) < 1e-12);
            }
        }
    }

    #[test]
    fn sample_sets_avoid_pole() {
        for n in 1..=4 {
            let pts = sphere_samples::<f64>(n, 400).unwrap();
            assert!(pts.len() >= 100, "N={n}: {}", pts.len());
            for p in &pts {
                assert_eq!(p.dim(), n);
                assert!((norm_sq(p.coords()).sqrt() - 1.0).abs() < 1e-14);
                assert!(p.height() >= -1.0 + POLE_MARGIN);
            }
        }
    }

    #[test]
    fn kernel_lifts_are_coordinate_functions() {
        for n in [2usize, 3] {
            let params = ProblemParams::new(n, 0.5_f64).unwrap();
            let samples = sphere_samples::<f64>(n, 2000).unwrap();
            for k in 0..=n {
                let fit = lift_kernel_to_h1(&params, k, &samples).unwrap();
                let want = if k == 0 { n } else { k - 1 };
                assert!(fit.residual <= 1e-8, "N={n} k={k}: {}", fit.residual);
                assert_eq!(fit.dominant(), want);
                assert!(fit.cross_ratio() <= 1e-8);
            }
        }
    }

    #[test]
    fn degree_two_field_is_not_in_h1() {
        let params = ProblemParams::new(2, 0.5_f64).unwrap();
        let e = params.decay_exponent();
        let phi = FnField::new(2, move |x: &[f64]| {
            x[0] * x[1] * (1.0 + norm_sq(x)).powf(-e / 2.0 - 2.0)
        })
        .with_decay(e + 2.0);
        let fit = fit_h1(&h_transform(&params, phi), &fibonacci_sphere(2000)).unwrap();
        assert!(fit.residual >= 0.1, "{}", fit.residual);
    }

    #[test]
    fn bilinear_identity_on_the_line() {
        let params = ProblemParams::new(1, 0.25_f64).unwrap();
        let g1 = FnField::new(1, |x: &[f64]| (-x[0] * x[0]).exp()).with_decay(f64::INFINITY);
        let g2 = FnField::new(1, |x: &[f64]| (-2.0 * (x[0] - 0.3).powi(2)).exp()).with_decay(f64::INFINITY);
        let grid = Id1Grid::default();
        let a = verify_id1(&params, g1.clone(), g1.clone(), &grid).unwrap();
        assert!(a.rel_diff <= 1e-6, "{a:?}");
        let ab = verify_id1(&params, g1.clone(), g2.clone(), &grid).unwrap();
        let ba = verify_id1(&params, g2, g1, &grid).unwrap();
        assert!((ab.lhs / ba.lhs - 1.0).abs() < 1e-12);
        assert!((ab.rhs / ba.rhs - 1.0).abs() < 1e-12);
        let zero = FnField::new(1, |_: &[f64]| 0.0).with_decay(f64::INFINITY);
        let z = verify_id1(&params, zero.clone(), zero, &grid).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    }

    #[test]
    fn bilinear_identity_in_the_plane() {
        let params = ProblemParams::new(2, 0.5_f64).unwrap();
        let g = FnField::new(2, |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp()).with_decay(f64::INFINITY);
        let grid = Id1Grid {
            radius: 9.0,
            n_outer: 60,
            n_inner: 120,
            n_angle: 32,
        };
        let r = verify_id1(&params, g.clone(), g, &grid).unwrap();
        assert!(r.rel_diff <= 1e-6, "{r:?}");
    }

    #[test]
    fn slow_decay_rejected() {
        let params = ProblemParams::new(1, 0.25_f64).unwrap();
        let slow = FnField::new(1, |x: &[f64]| 1.0 / (1.0 + x[0] * x[0]).sqrt()).with_decay(1.0);
        let err = verify_id1(&params, slow.clone(), slow, &Id1Grid::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }
}
