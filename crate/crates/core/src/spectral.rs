//! Discretization of the sphere operator `T h(ω) = ∫ h(η) |ω - η|^{-(N-2s)} dη`
//! on zonal functions, its spectrum, and the nondegeneracy certificate.
//!
//! For zonal `f(η) = f(⟨η, e⟩)` the operator reduces to
//! `(Tf)(u) = ∫ f(v) K(u, v) (1 - v^2)^{(N-2)/2} dv` with
//! `K(u, v) = (2ab)^{-k} ∫_{S^{N-1}} (ε + 1 - ⟨θ, e'⟩)^{-k} dθ`,
//! `a = √(1-u^2)`, `b = √(1-v^2)`, `k = (N-2s)/2` and
//! `ε = (1 - cos(θ_u - θ_v)) / (ab)` in colatitudes. The Nyström matrix is
//! assembled by product integration: the unknown is interpolated by the
//! polynomial through the latitude nodes and each kernel moment is
//! integrated in the colatitude on panels graded toward the diagonal.

use std::time::Instant;

use crate::bubble::{KernelFunction, ProblemParams};
use crate::error::{Error, Result};
use crate::funk_hecke::{a_constant, eigenvalue_closed, normalization_audit, ratio_closed, EigenvalueTable};
use crate::linalg::{symmetric_eigen, SquareMatrix};
use crate::riesz::{apply_linearized, bubble_residual, RieszConfig};
use crate::scalar::{c, cu, Real};
use crate::special_fns::{dim_harmonic, gauss_rule, GaussFamily, JacobiRecurrence};
use crate::sphere_transform::{lift_kernel_to_h1, sphere_samples};
use crate::zonal::ZonalIntegrator;

/// Relative distance below which a computed eigenvalue may be matched to a level.
pub const MATCH_THRESHOLD: f64 = 1e-3;

/// Quadrature settings for [`build_zonal_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalConfig<T> {
    /// Latitude nodes.
    pub nodes: usize,
    /// Size of the unsplit inner rule over `S^{N-1}`.
    pub inner_nodes: usize,
    /// Gauss-Legendre nodes per colatitude panel.
    pub panel_nodes: usize,
    /// Ratio between consecutive panels graded toward the diagonal.
    pub grading: T,
    /// Width of the innermost graded panel.
    pub innermost: T,
    pub target_tol: T,
}

impl<T: Real> Default for ZonalConfig<T> {
    fn default() -> Self {
        Self {
            nodes: 64,
            inner_nodes: 128,
            panel_nodes: 16,
            grading: c(0.3),
            innermost: c(1e-15),
            target_tol: c(1e-9),
        }
    }
}

impl<T: Real> ZonalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::InvalidParams(format!(
                "zonal matrix needs at least 16 nodes, got {}",
                self.nodes
            )));
        }
        if self.inner_nodes < 32 {
            return Err(Error::InvalidParams(format!(
                "inner rule needs at least 32 nodes, got {}",
                self.inner_nodes
            )));
        }
        if self.panel_nodes < 4 {
            return Err(Error::InvalidParams("panel rule needs at least 4 nodes".into()));
        }
        if !(self.grading > T::zero() && self.grading < T::one()) {
            return Err(Error::InvalidParams("grading ratio must lie in (0, 1)".into()));
        }
        if !(self.innermost > T::zero() && self.innermost < c(1e-3)) {
            return Err(Error::InvalidParams(
                "innermost panel width must lie in (0, 1e-3)".into(),
            ));
        }
        if !(self.target_tol > T::zero()) {
            return Err(Error::InvalidParams("target tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Symmetrized Nyström matrix of `T` on zonal functions.
#[derive(Debug, Clone)]
pub struct ZonalOperatorMatrix<T> {
    pub params: ProblemParams<T>,
    /// Latitudes `u_j`, Gauss-Jacobi((N-2)/2, (N-2)/2) nodes.
    pub nodes: Vec<T>,
    /// Quadrature weights `W_j`.
    pub weights: Vec<T>,
    /// Kernel values `K(u_i, u_j)` of the discrete operator, `(Tf)_i = Σ_j K_ij W_j f_j`.
    pub kernel: SquareMatrix<T>,
    /// `W^{1/2} K W^{1/2}`, symmetrized.
    pub matrix: SquareMatrix<T>,
    /// Largest `|M_ij - M_ji|` before symmetrization, relative to the largest entry.
    pub raw_asymmetry: T,
    /// Largest change of the kernel moments between the panel rule and a finer one.
    pub accuracy_estimate: T,
    pub config: ZonalConfig<T>,
}

impl<T: Real> ZonalOperatorMatrix<T> {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Discrete `T f` at the nodes.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let wf: Vec<T> = f.iter().zip(&self.weights).map(|(a, b)| *a * *b).collect();
        self.kernel.mul_vec(&wf)
    }
}

/// Kernel `K(u_i, cos θ)` along colatitudes.
struct RowKernel<'a, T> {
    zonal: &'a ZonalIntegrator<T>,
    k: T,
    sin_i: T,
}

impl<T: Real> RowKernel<'_, T> {
    /// `delta = θ - θ_i`, passed separately to keep `ε` accurate on the diagonal.
    fn eval(&self, theta: T, delta: T) -> T {
        let two = c::<T>(2.0);
        let ab = self.sin_i * theta.sin();
        let half = (delta / two).sin();
        let eps = two * half * half / ab;
        (two * ab).powf(-self.k) * self.zonal.eval(eps, |_| T::one())
    }
}

/// Points and weights in `θ` covering `[0, π]` for row `θ_i`, graded toward `θ_i`.
/// Returns `(θ, θ - θ_i, weight)`; the innermost panels carry a
/// `|θ - θ_i|^{2s-1}` Jacobi weight, absorbed into the returned weight.
fn row_rule<T: Real>(theta_i: T, s: T, cfg: &ZonalConfig<T>, gl: &[(T, T)], inner: &[(T, T)]) -> Vec<(T, T, T)> {
    let pi = T::PI();
    let two = c::<T>(2.0);
    let one = T::one();
    let b = two * s - one;
    let coarse = pi / c(16.0);
    let mut out = Vec::new();
    for (side, sign) in [(theta_i, -one), (pi - theta_i, one)] {
        let graded = side.min(coarse);
        // d measured from θ_i outward.
        let mut hi = graded;
        loop {
            let lo = hi * cfg.grading;
            if lo < cfg.innermost {
                // [0, hi] with weight d^{2s-1}: d = hi (1 + x) / 2.
                let scale = (hi / two).powf(b + one);
                for &(x, w) in inner {
                    let d = hi * (one + x) / two;
                    out.push((theta_i + sign * d, sign * d, w * scale * d.powf(-b)));
                }
                break;
            }
            let mid = (hi + lo) / two;
            let half = (hi - lo) / two;
            for &(x, w) in gl {
                let d = mid + half * x;
                out.push((theta_i + sign * d, sign * d, w * half));
            }
            hi = lo;
        }
        let rest = side - graded;
        if rest > T::zero() {
            let count = (rest / coarse).ceil().to_usize().unwrap_or(1).max(1);
            let width = rest / cu::<T>(count);
            for p in 0..count {
                let lo = graded + width * cu::<T>(p);
                let mid = lo + width / two;
                for &(x, w) in gl {
                    let d = mid + width / two * x;
                    out.push((theta_i + sign * d, sign * d, w * width / two));
                }
            }
        }
    }
    out
}

/// Moments `∫ K(u_i, v) p_k(v) (1 - v^2)^{(N-2)/2} dv` for `k < n`.
fn row_moments<T: Real>(
    kernel: &RowKernel<'_, T>,
    n: usize,
    rec: &JacobiRecurrence<T>,
    rule: &[(T, T, T)],
    weight_exp: usize,
) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for &(theta, delta, w) in rule {
        let st = theta.sin();
        if !(st > T::zero()) {
            continue;
        }
        let f = w * kernel.eval(theta, delta) * st.powi(weight_exp as i32);
        let p = rec.orthonormal_values(n, theta.cos());
        for (acc, pk) in out.iter_mut().zip(&p) {
            *acc = *acc + f * *pk;
        }
    }
    out
}

/// Nyström matrix of the zonal action of `T` with `cfg.nodes` latitudes.
pub fn build_zonal_matrix<T: Real>(params: &ProblemParams<T>, cfg: &ZonalConfig<T>) -> Result<ZonalOperatorMatrix<T>> {
    cfg.validate()?;
    let n_dim = params.n();
    if n_dim < 2 {
        return Err(Error::InvalidParams(format!(
            "zonal reduction needs N >= 2, got {n_dim}"
        )));
    }
    let nf = cu::<T>(n_dim);
    let two = c::<T>(2.0);
    let ja = (nf - two) / two;
    let e = params.kernel_exponent();
    let k = e / two;
    let n = cfg.nodes;
    let latitudes = gauss_rule(GaussFamily::Jacobi { a: ja, b: ja }, n)?;
    let rec = JacobiRecurrence::new(ja, ja)?;
    let mu0 = rec.mu0();
    let zonal = ZonalIntegrator::new(n_dim - 1, k, cfg.inner_nodes)?;
    // The singular part of K behaves like |θ - θ_i|^{(N-1) - e}.
    let s_eff = (nf - e) / two;
    if !(s_eff > T::zero()) {
        return Err(Error::Divergence(format!(
            "kernel exponent {e} is not integrable on S^{n_dim}"
        )));
    }
    let gl: Vec<(T, T)> = gauss_rule::<T>(GaussFamily::Legendre, cfg.panel_nodes)?
        .pairs()
        .collect();
    let inner: Vec<(T, T)> = gauss_rule(
        GaussFamily::Jacobi {
            a: T::zero(),
            b: two * s_eff - T::one(),
        },
        cfg.panel_nodes,
    )?
    .pairs()
    .collect();
    let fine_nodes = cfg.panel_nodes + 8;
    let gl_fine: Vec<(T, T)> = gauss_rule::<T>(GaussFamily::Legendre, fine_nodes)?.pairs().collect();
    let inner_fine: Vec<(T, T)> = gauss_rule(
        GaussFamily::Jacobi {
            a: T::zero(),
            b: two * s_eff - T::one(),
        },
        fine_nodes,
    )?
    .pairs()
    .collect();

    // Orthonormal values at the nodes (scaled so that Σ_k q_k(u) q_k(v) W_v interpolates).
    let p_nodes: Vec<Vec<T>> = latitudes.nodes.iter().map(|u| rec.orthonormal_values(n, *u)).collect();
    let mut kernel = SquareMatrix::zeros(n);
    let mut accuracy = T::zero();
    let probe_rows = [0, n / 2, n - 1];
    for (i, &u) in latitudes.nodes.iter().enumerate() {
        let theta_i = u.acos();
        let row = RowKernel {
            zonal: &zonal,
            k,
            sin_i: theta_i.sin(),
        };
        let rule = row_rule(theta_i, s_eff, cfg, &gl, &inner);
        let moments = row_moments(&row, n, &rec, &rule, n_dim - 1);
        if probe_rows.contains(&i) {
            let fine_rule = row_rule(theta_i, s_eff, cfg, &gl_fine, &inner_fine);
            let fine = row_moments(&row, n, &rec, &fine_rule, n_dim - 1);
            let scale = moments.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let change = moments
                .iter()
                .zip(&fine)
                .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
                / scale;
            accuracy = accuracy.max(change);
        }
        for j in 0..n {
            let v = p_nodes[j]
                .iter()
                .zip(&moments)
                .fold(T::zero(), |acc, (p, m)| acc + *p * *m);
            kernel[(i, j)] = v / mu0;
        }
    }
    if !(accuracy <= c::<T>(10.0) * cfg.target_tol) {
        return Err(Error::Accuracy(format!(
            "kernel moments changed by {accuracy:e} under panel refinement (target {:e})",
            cfg.target_tol
        )));
    }
    let sqrt_w: Vec<T> = latitudes.weights.iter().map(|w| w.sqrt()).collect();
    let mut matrix = SquareMatrix::from_fn(n, |i, j| sqrt_w[i] * kernel[(i, j)] * sqrt_w[j]);
    let largest = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(T::zero(), |m, (i, j)| m.max(matrix[(i, j)].abs()));
    let raw_asymmetry = matrix.max_asymmetry() / largest;
    matrix.symmetrize();
    Ok(ZonalOperatorMatrix {
        params: *params,
        nodes: latitudes.nodes.clone(),
        weights: latitudes.weights.clone(),
        kernel,
        matrix,
        raw_asymmetry,
        accuracy_estimate: accuracy,
        config: *cfg,
    })
}

/// One computed eigenvalue and the level it was matched to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry<T> {
    pub value: T,
    /// Degree `l` of the matched level, if any.
    pub level: Option<usize>,
    /// `κ_audit e_l` for the matched level.
    pub reference: Option<T>,
    pub rel_error: Option<T>,
}

/// Largest `m` eigenvalues of the matrix (descending), greedily matched to
/// `references[l]` in order of `l`.
pub fn spectrum<T: Real>(matrix: &ZonalOperatorMatrix<T>, m: usize, references: &[T]) -> Result<Vec<SpectrumEntry<T>>> {
    if m > matrix.dim() {
        return Err(Error::InvalidParams(format!(
            "requested {m} eigenvalues of a {}x{} matrix",
            matrix.dim(),
            matrix.dim()
        )));
    }
    let eig = symmetric_eigen(&matrix.matrix)?;
    Ok(match_levels(&eig.values[..m], references))
}

/// Greedy descending matching with relative threshold [`MATCH_THRESHOLD`].
pub fn match_levels<T: Real>(values: &[T], references: &[T]) -> Vec<SpectrumEntry<T>> {
    let mut next = 0;
    values
        .iter()
        .map(|&value| {
            let found = (next..references.len()).find(|&l| {
                let r = references[l];
                ((value - r) / r).abs() <= c(MATCH_THRESHOLD)
            });
            match found {
                Some(l) => {
                    next = l + 1;
                    let r = references[l];
                    SpectrumEntry {
                        value,
                        level: Some(l),
                        reference: Some(r),
                        rel_error: Some(((value - r) / r).abs()),
                    }
                }
                None => SpectrumEntry {
                    value,
                    level: None,
                    reference: None,
                    rel_error: None,
                },
            }
        })
        .collect()
}

/// `κ_audit e_l` for `l <= lmax`.
pub fn audited_levels<T: Real>(params: &ProblemParams<T>, lmax: usize) -> Result<(T, Vec<T>)> {
    let audit = normalization_audit(params, lmax.max(3))?;
    let levels = (0..=lmax)
        .map(|l| audit.factor * eigenvalue_closed(params, l))
        .collect();
    Ok((audit.factor, levels))
}

/// `min(1 - e_2/e_1, e_0/e_1 - 1)` from the closed-form table.
pub fn gap_at_e1<T: Real>(params: &ProblemParams<T>) -> T {
    let table = EigenvalueTable::closed_form(params, 2);
    let e = &table.values;
    (T::one() - e[2] / e[1]).min(e[0] / e[1] - T::one())
}

/// Outcome of one certificate check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Inputs that define the check.
    pub params: Vec<(String, f64)>,
    /// Worst computed value.
    pub computed: f64,
    /// Value the computed one is compared against.
    pub reference: f64,
    pub tol: f64,
    pub pass: bool,
    pub seconds: f64,
    /// Set when the check could not be evaluated because a structural
    /// precondition failed (the check then fails).
    pub error: Option<String>,
}

/// Tolerances of the certificate checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateTolerances {
    pub bubble: f64,
    pub kernel_rel: f64,
    pub kernel_abs: f64,
    pub lift: f64,
    pub identification: f64,
    pub spectrum: f64,
}

impl Default for CertificateTolerances {
    fn default() -> Self {
        Self {
            bubble: 1e-6,
            kernel_rel: 1e-5,
            kernel_abs: 1e-7,
            lift: 1e-8,
            identification: 1e-8,
            spectrum: 1e-5,
        }
    }
}

/// Everything the certificate needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateConfig<T> {
    pub riesz: RieszConfig<T>,
    pub zonal: ZonalConfig<T>,
    pub bubble_radii: Vec<T>,
    pub kernel_radii: Vec<T>,
    /// Highest degree used by the normalization audit.
    pub lmax: usize,
    /// Approximate number of sphere samples for the lift fits.
    pub sphere_samples: usize,
    /// Number of zonal eigenvalues compared with the closed form.
    pub spectrum_levels: usize,
    pub tolerances: CertificateTolerances,
    /// Run independent checks on separate threads.
    pub parallel: bool,
}

impl<T: Real> Default for CertificateConfig<T> {
    fn default() -> Self {
        Self {
            riesz: RieszConfig::default(),
            zonal: ZonalConfig::default(),
            bubble_radii: [0.0, 0.5, 1.0, 2.0, 10.0].iter().map(|r| c(*r)).collect(),
            kernel_radii: [0.0, 0.5, 2.0, 10.0].iter().map(|r| c(*r)).collect(),
            lmax: 20,
            sphere_samples: 2000,
            spectrum_levels: 6,
            tolerances: CertificateTolerances::default(),
            parallel: false,
        }
    }
}

/// Check names in execution order.
pub const CHECK_NAMES: [&str; 7] = [
    "bubble_residual",
    "kernel_annihilation",
    "lift_to_h1",
    "eigenvalue_identification",
    "spectral_gap",
    "kernel_dimension",
    "zonal_spectrum",
];

/// Aggregated certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport<T> {
    pub params: ProblemParams<T>,
    /// Zonal eigenvalues with their matched levels.
    pub eigenvalues: Vec<SpectrumEntry<T>>,
    /// `κ_audit`, if the audit could be carried out.
    pub normalization: Option<T>,
    pub gap_at_e1: T,
    pub checks: Vec<CheckRecord>,
    pub verdict: bool,
}

impl<T: Real> SpectralReport<T> {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64_lossy()
}

struct Outcome {
    computed: f64,
    reference: f64,
    tol: f64,
    pass: bool,
    params: Vec<(String, f64)>,
}

fn run_check(name: &str, body: impl FnOnce() -> Result<Outcome>) -> Result<CheckRecord> {
    let start = Instant::now();
    let result = body();
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(o) => Ok(CheckRecord {
            name: name.to_string(),
            params: o.params,
            computed: o.computed,
            reference: o.reference,
            tol: o.tol,
            pass: o.pass,
            seconds,
            error: None,
        }),
        Err(err) if err.is_falsifying() => Ok(CheckRecord {
            name: name.to_string(),
            params: Vec::new(),
            computed: f64::NAN,
            reference: f64::NAN,
            tol: f64::NAN,
            pass: false,
            seconds,
            error: Some(err.to_string()),
        }),
        Err(err) => Err(err.in_check(name)),
    }
}

fn base_params<T: Real>(params: &ProblemParams<T>) -> Vec<(String, f64)> {
    vec![("N".into(), params.n() as f64), ("s".into(), f64_of(params.s()))]
}

fn check_bubble<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<Outcome> {
    let worst = bubble_residual(params, &cfg.bubble_radii, &cfg.riesz)?;
    let mut p = base_params(params);
    p.extend(cfg.bubble_radii.iter().map(|r| ("radius".to_string(), f64_of(*r))));
    Ok(Outcome {
        computed: f64_of(worst),
        reference: 0.0,
        tol: cfg.tolerances.bubble,
        pass: f64_of(worst) <= cfg.tolerances.bubble,
        params: p,
    })
}

fn check_kernel<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<Outcome> {
    let tol = cfg.tolerances;
    // Worst ratio |diff| / allowed over every generator and radius.
    let mut worst_ratio = 0.0_f64;
    let mut worst_diff = 0.0_f64;
    let mut worst_ref = 0.0_f64;
    for z in KernelFunction::all(*params) {
        for &r in &cfg.kernel_radii {
            let got = f64_of(apply_linearized(params, &z, r, &cfg.riesz)?);
            let want = f64_of(z.radial(r));
            let diff = (got - want).abs();
            let allowed = (tol.kernel_rel * want.abs()).max(tol.kernel_abs);
            if diff / allowed > worst_ratio || !diff.is_finite() {
                worst_ratio = diff / allowed;
                worst_diff = diff;
                worst_ref = want;
            }
        }
    }
    let mut p = base_params(params);
    p.push(("tol_abs".into(), tol.kernel_abs));
    p.extend(cfg.kernel_radii.iter().map(|r| ("radius".to_string(), f64_of(*r))));
    Ok(Outcome {
        computed: worst_diff,
        reference: worst_ref,
        tol: tol.kernel_rel,
        pass: worst_ratio <= 1.0,
        params: p,
    })
}

fn check_lift<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<Outcome> {
    let n = params.n();
    let samples = sphere_samples::<T>(n, cfg.sphere_samples)?;
    let mut worst = 0.0_f64;
    let mut directions_ok = true;
    for k in 0..=n {
        let fit = lift_kernel_to_h1(params, k, &samples)?;
        let want = if k == 0 { n } else { k - 1 };
        worst = worst.max(f64_of(fit.residual)).max(f64_of(fit.cross_ratio()));
        directions_ok &= fit.dominant() == want;
    }
    let mut p = base_params(params);
    p.push(("samples".into(), samples.len() as f64));
    Ok(Outcome {
        computed: worst,
        reference: 0.0,
        tol: cfg.tolerances.lift,
        pass: directions_ok && worst <= cfg.tolerances.lift,
        params: p,
    })
}

fn check_identification<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<(Outcome, T)> {
    let audit = normalization_audit(params, cfg.lmax.max(3))?;
    let a = a_constant(params);
    let e1 = audit.factor * eigenvalue_closed(params, 1);
    let ratio = f64_of(a / e1);
    let mut p = base_params(params);
    p.push(("kappa_audit".into(), f64_of(audit.factor)));
    p.push(("lmax".into(), cfg.lmax as f64));
    Ok((
        Outcome {
            computed: ratio,
            reference: 1.0,
            tol: cfg.tolerances.identification,
            pass: (ratio - 1.0).abs() <= cfg.tolerances.identification,
            params: p,
        },
        audit.factor,
    ))
}

fn check_gap<T: Real>(params: &ProblemParams<T>) -> Result<Outcome> {
    let gap = f64_of(gap_at_e1(params));
    let r0 = f64_of(ratio_closed(params, 0));
    let r1 = f64_of(ratio_closed(params, 1));
    let law = (1.0 - r1).min(1.0 / r0 - 1.0);
    Ok(Outcome {
        computed: gap,
        reference: law,
        tol: 1e-12,
        pass: gap > 0.0 && ((gap - law) / law).abs() <= 1e-12,
        params: base_params(params),
    })
}

fn check_dimension<T: Real>(params: &ProblemParams<T>) -> Result<Outcome> {
    let n = params.n();
    let dim = dim_harmonic(n, 1) as f64;
    let generators = KernelFunction::all(*params).len() as f64;
    Ok(Outcome {
        computed: dim,
        reference: generators,
        tol: 0.0,
        pass: dim == generators,
        params: base_params(params),
    })
}

fn check_spectrum<T: Real>(
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<(Outcome, Vec<SpectrumEntry<T>>)> {
    let (_, levels) = audited_levels(params, cfg.lmax.max(cfg.spectrum_levels + 2))?;
    let matrix = build_zonal_matrix(params, &cfg.zonal)?;
    let entries = spectrum(&matrix, cfg.spectrum_levels, &levels)?;
    let mut worst = 0.0_f64;
    let mut matched_in_order = true;
    for (l, e) in entries.iter().enumerate() {
        match (e.level, e.rel_error) {
            (Some(level), Some(err)) if level == l => worst = worst.max(f64_of(err)),
            _ => matched_in_order = false,
        }
    }
    let mut p = base_params(params);
    p.push(("nodes".into(), cfg.zonal.nodes as f64));
    p.push(("levels".into(), cfg.spectrum_levels as f64));
    Ok((
        Outcome {
            computed: if matched_in_order { worst } else { f64::INFINITY },
            reference: 0.0,
            tol: cfg.tolerances.spectrum,
            pass: matched_in_order && worst <= cfg.tolerances.spectrum,
            params: p,
        },
        entries,
    ))
}

/// Runs every check of the nondegeneracy argument for `params`. The zonal
/// spectrum check is skipped for `N = 1`.
pub fn nondegeneracy_certificate<T: Real>(
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<SpectralReport<T>> {
    cfg.riesz.validate()?;
    cfg.zonal.validate()?;
    let [c1, c2, c3, c4, c5, c6, c7] = CHECK_NAMES;
    // The zonal reduction needs a sphere of dimension at least 2.
    let has_zonal = params.n() >= 2;
    let mut records: Vec<Result<CheckRecord>> = Vec::with_capacity(7);
    let (r4, r7) = if cfg.parallel {
        std::thread::scope(|scope| {
            let h1 = scope.spawn(|| run_check(c1, || check_bubble(params, cfg)));
            let h2 = scope.spawn(|| run_check(c2, || check_kernel(params, cfg)));
            let h3 = scope.spawn(|| run_check(c3, || check_lift(params, cfg)));
            let h7 = has_zonal.then(|| scope.spawn(|| spectrum_record(c7, params, cfg)));
            let r4 = identification_record(c4, params, cfg);
            records.push(join(h1));
            records.push(join(h2));
            records.push(join(h3));
            (r4, h7.map(join))
        })
    } else {
        records.push(run_check(c1, || check_bubble(params, cfg)));
        records.push(run_check(c2, || check_kernel(params, cfg)));
        records.push(run_check(c3, || check_lift(params, cfg)));
        let r4 = identification_record(c4, params, cfg);
        let r7 = has_zonal.then(|| spectrum_record(c7, params, cfg));
        (r4, r7)
    };
    let (rec4, normalization) = r4?;
    records.push(Ok(rec4));
    records.push(run_check(c5, || check_gap(params)));
    records.push(run_check(c6, || check_dimension(params)));
    let mut eigenvalues = Vec::new();
    if let Some(r7) = r7 {
        let (rec7, entries) = r7?;
        records.push(Ok(rec7));
        eigenvalues = entries;
    }
    let checks = records.into_iter().collect::<Result<Vec<_>>>()?;
    let verdict = checks.iter().all(|c| c.pass);
    Ok(SpectralReport {
        params: *params,
        eigenvalues,
        normalization,
        gap_at_e1: gap_at_e1(params),
        checks,
        verdict,
    })
}

/// Check 1: the bubble solves the integral equation at the configured radii.
pub fn bubble_check<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<CheckRecord> {
    run_check(CHECK_NAMES[0], || check_bubble(params, cfg))
}

/// Check 2: the linearized operator reproduces every kernel generator.
pub fn kernel_check<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<CheckRecord> {
    run_check(CHECK_NAMES[1], || check_kernel(params, cfg))
}

/// Check 3: every generator maps into the coordinate functions on the sphere.
pub fn lift_check<T: Real>(params: &ProblemParams<T>, cfg: &CertificateConfig<T>) -> Result<CheckRecord> {
    run_check(CHECK_NAMES[2], || check_lift(params, cfg))
}

/// Check 4: `a = κ_audit e_1`. Also returns `κ_audit` when available.
pub fn identification_check<T: Real>(
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<(CheckRecord, Option<T>)> {
    identification_record(CHECK_NAMES[3], params, cfg)
}

/// Check 5: `e_1` is separated from its neighbours.
pub fn gap_check<T: Real>(params: &ProblemParams<T>) -> Result<CheckRecord> {
    run_check(CHECK_NAMES[4], || check_gap(params))
}

/// Check 6: `dim H_1` equals the number of kernel generators.
pub fn dimension_check<T: Real>(params: &ProblemParams<T>) -> Result<CheckRecord> {
    run_check(CHECK_NAMES[5], || check_dimension(params))
}

/// Check 7: the first zonal Nyström eigenvalues match `κ_audit e_l`.
pub fn spectrum_check<T: Real>(
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<(CheckRecord, Vec<SpectrumEntry<T>>)> {
    spectrum_record(CHECK_NAMES[6], params, cfg)
}

fn identification_record<T: Real>(
    name: &str,
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<(CheckRecord, Option<T>)> {
    let mut factor = None;
    let rec = run_check(name, || {
        let (o, f) = check_identification(params, cfg)?;
        factor = Some(f);
        Ok(o)
    })?;
    Ok((rec, factor))
}

fn spectrum_record<T: Real>(
    name: &str,
    params: &ProblemParams<T>,
    cfg: &CertificateConfig<T>,
) -> Result<(CheckRecord, Vec<SpectrumEntry<T>>)> {
    let mut entries = Vec::new();
    let rec = run_check(name, || {
        let (o, e) = check_spectrum(params, cfg)?;
        entries = e;
        Ok(o)
    })?;
    Ok((rec, entries))
}

fn join<R>(h: std::thread::ScopedJoinHandle<'_, Result<R>>) -> Result<R> {
    h.join()
        .unwrap_or_else(|_| Err(Error::NonConvergence("check thread panicked".into())))
}
