//! Acceptance suite: one PASS/FAIL line per criterion with wall time and budget.
//!
//! Runs without the libtest harness so every line reaches the output. The
//! process fails on any unexpected result; criteria listed in `KNOWN_RED`
//! are reported as FAIL and fail the process if they ever pass.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use nondegen::decay::{measure_exponent, predicted_exponent, predicted_steps};
use nondegen::funk_hecke::ratio_closed;
use nondegen::riesz::{apply_linearized, bubble_residual};
use nondegen::special_fns::dim_harmonic;
use nondegen::spectral::{audited_levels, spectrum};
use nondegen::sphere_transform::{conformal_distance_defect, lift_kernel_to_h1, sphere_samples, verify_id1, Id1Grid};
use nondegen::{
    a_constant, bootstrap_check, build_zonal_matrix, eigenvalue_closed, eigenvalue_quadrature, kernel_decay,
    normalization_audit, DecayConfig, EigenvalueTable, FnField, KernelFunction, Params, RieszConfig, ZonalConfig,
};
use nondegen_cli::Report;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail. 10: at the borderline `ν + 4s = N` the weighted
/// integral carries a logarithm, `v ~ r^{-2} (8π ln r + c)` for N = 3, s = 1/2,
/// so the fitted exponent on [10, 1e3] is about 1.80 instead of 2.
const KNOWN_RED: &[usize] = &[10];

type Check = Result<String, String>;

/// Id, title, runtime budget, body.
type Criterion = (usize, &'static str, Duration, fn() -> Check);

/// Collects sub-results of one criterion.
#[derive(Default)]
struct Findings {
    lines: Vec<String>,
    failed: bool,
}

impl Findings {
    fn check(&mut self, ok: bool, line: String) {
        self.failed |= !ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn finish(self) -> Check {
        let text = self.lines.join("\n      ");
        if self.failed {
            Err(text)
        } else {
            Ok(text)
        }
    }
}

fn params(n: usize, s: f64) -> Params {
    Params::new(n, s).expect("valid parameters")
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn criterion_1() -> Check {
    const TOL: f64 = 1e-12;
    const LMAX: usize = 50;
    let mut f = Findings::default();
    for (n, s) in [(1, 0.25), (2, 0.5), (3, 0.5), (3, 0.75), (4, 0.9)] {
        let p = params(n, s);
        let table = EigenvalueTable::closed_form(&p, LMAX);
        let alpha = n as f64 / 2.0 - s;
        let worst = table
            .ratios()
            .iter()
            .enumerate()
            .map(|(l, r)| rel(*r, (l as f64 + alpha) / (l as f64 + n as f64 - alpha)))
            .fold(0.0, f64::max);
        f.check(
            worst <= TOL,
            format!("(N={n}, s={s}) max ratio error {worst:.2e} <= {TOL:e}"),
        );
    }
    f.finish()
}

fn criterion_2() -> Check {
    const TOL: f64 = 1e-10;
    const LMAX: usize = 20;
    let mut f = Findings::default();
    for n in [2, 3] {
        for s in [0.25, 0.5, 0.75] {
            match normalization_audit(&params(n, s), LMAX) {
                Ok(a) => f.check(
                    a.max_residual <= TOL,
                    format!(
                        "(N={n}, s={s}) kappa_audit = {:.15} residual {:.2e} <= {TOL:e}",
                        a.factor, a.max_residual
                    ),
                ),
                Err(e) => f.check(false, format!("(N={n}, s={s}) {e}")),
            }
        }
    }
    f.finish()
}

fn criterion_3() -> Check {
    const TOL: f64 = 1e-10;
    let p = params(3, 0.5);
    let mut f = Findings::default();
    let e0 = eigenvalue_quadrature(&p, 0, 16).map_err(|e| e.to_string())?;
    let e1 = eigenvalue_quadrature(&p, 1, 16).map_err(|e| e.to_string())?;
    f.check(
        rel(e0, 2.0 * PI * PI) <= TOL,
        format!("e_0 = {e0:.15} vs 2 pi^2, rel {:.2e}", rel(e0, 2.0 * PI * PI)),
    );
    f.check(
        rel(e1, PI * PI) <= TOL,
        format!("e_1 = {e1:.15} vs pi^2, rel {:.2e}", rel(e1, PI * PI)),
    );
    let law = ratio_closed(&p, 0);
    f.check(
        rel(e1 / e0, 0.5) <= TOL && rel(law, 0.5) <= TOL,
        format!("e_1/e_0 = {:.15}, ratio law {law}", e1 / e0),
    );
    f.finish()
}

fn criterion_4() -> Check {
    const TOL: f64 = 1e-6;
    let radii = [0.0, 0.5, 1.0, 2.0, 10.0];
    let mut f = Findings::default();
    for (n, s) in [(3, 0.5), (2, 0.5)] {
        match bubble_residual(&params(n, s), &radii, &RieszConfig::default()) {
            Ok(r) => f.check(r <= TOL, format!("(N={n}, s={s}) residual {r:.2e} <= {TOL:e}")),
            Err(e) => f.check(false, format!("(N={n}, s={s}) {e}")),
        }
    }
    f.finish()
}

fn criterion_5() -> Check {
    const REL: f64 = 1e-5;
    const ABS: f64 = 1e-7;
    let p = params(3, 0.5);
    let cfg = RieszConfig::default();
    let mut f = Findings::default();
    for z in [KernelFunction::new(p, 0).unwrap(), KernelFunction::new(p, 1).unwrap()] {
        for r in [0.0, 0.5, 2.0, 10.0] {
            let want = z.radial(r);
            match apply_linearized(&p, &z, r, &cfg) {
                Ok(got) => {
                    let diff = (got - want).abs();
                    let ok = diff <= (REL * want.abs()).max(ABS);
                    f.check(
                        ok,
                        format!("Z_{} r={r}: {got:.12e} vs {want:.12e}, |diff| {diff:.1e}", z.index),
                    );
                }
                Err(e) => f.check(false, format!("Z_{} r={r}: {e}", z.index)),
            }
        }
    }
    // Z_0 vanishes at r = 1; the absolute floor applies there.
    let z0 = KernelFunction::new(p, 0).unwrap();
    let at_one = apply_linearized(&p, &z0, 1.0, &cfg).map_err(|e| e.to_string())?;
    f.check(at_one.abs() <= ABS, format!("Z_0 r=1: {at_one:.1e} <= {ABS:e}"));
    f.finish()
}

fn criterion_6() -> Check {
    const TOL: f64 = 1e-8;
    const SAMPLES: usize = 2000;
    let mut f = Findings::default();
    for n in [2, 3] {
        let p = params(n, 0.5);
        let samples = sphere_samples::<f64>(n, SAMPLES).map_err(|e| e.to_string())?;
        for k in 0..=n {
            let want = if k == 0 { n } else { k - 1 };
            match lift_kernel_to_h1(&p, k, &samples) {
                Ok(fit) => f.check(
                    fit.residual <= TOL && fit.dominant() == want && fit.cross_ratio() <= TOL,
                    format!(
                        "N={n} k={k}: residual {:.1e}, direction e_{}, cross {:.1e}",
                        fit.residual,
                        fit.dominant() + 1,
                        fit.cross_ratio()
                    ),
                ),
                Err(e) => f.check(false, format!("N={n} k={k}: {e}")),
            }
        }
    }
    f.finish()
}

fn criterion_7() -> Check {
    const ID_TOL: f64 = 1e-6;
    const CONFORMAL_TOL: f64 = 1e-12;
    const PAIRS: usize = 100;
    let mut f = Findings::default();
    let p = params(1, 0.25);
    let g1 = FnField::new(1, |x: &[f64]| (-x[0] * x[0]).exp()).with_decay(f64::INFINITY);
    let g2 = FnField::new(1, |x: &[f64]| (-2.0 * (x[0] - 0.3).powi(2)).exp()).with_decay(f64::INFINITY);
    let g3 = FnField::new(1, |x: &[f64]| x[0] * (-0.5 * x[0] * x[0]).exp()).with_decay(f64::INFINITY);
    let grid = Id1Grid::default();
    for (name, a, b) in [("g1,g1", &g1, &g1), ("g1,g2", &g1, &g2), ("g2,g3", &g2, &g3)] {
        match verify_id1(&p, a.clone(), b.clone(), &grid) {
            Ok(r) => f.check(
                r.rel_diff <= ID_TOL,
                format!("({name}) lhs {:.12e} rhs {:.12e} rel {:.1e}", r.lhs, r.rhs, r.rel_diff),
            ),
            Err(e) => f.check(false, format!("({name}) {e}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [1, 2, 3] {
        let worst = (0..PAIRS)
            .map(|_| {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                conformal_distance_defect(&x, &y)
            })
            .fold(0.0, f64::max);
        f.check(
            worst <= CONFORMAL_TOL,
            format!("conformal distance N={n}: {worst:.1e} <= {CONFORMAL_TOL:e}"),
        );
    }
    f.finish()
}

fn criterion_8() -> Check {
    const TOL: f64 = 1e-8;
    let mut f = Findings::default();
    for (n, s) in [(2, 0.5), (3, 0.5), (3, 0.75)] {
        let p = params(n, s);
        let audit = normalization_audit(&p, 20).map_err(|e| e.to_string())?;
        let ratio = a_constant(&p) / (audit.factor * eigenvalue_closed(&p, 1));
        f.check(
            (ratio - 1.0).abs() <= TOL,
            format!("(N={n}, s={s}) a/(kappa e_1) = {ratio:.15}"),
        );
    }
    f.finish()
}

fn criterion_9() -> Check {
    const TOL: f64 = 1e-5;
    const LEVELS: usize = 6;
    let cfg = ZonalConfig {
        nodes: 64,
        ..ZonalConfig::default()
    };
    let mut f = Findings::default();
    for n in [2, 3] {
        let p = params(n, 0.5);
        let (_, refs) = audited_levels(&p, 20).map_err(|e| e.to_string())?;
        let matrix = build_zonal_matrix(&p, &cfg).map_err(|e| e.to_string())?;
        let entries = spectrum(&matrix, LEVELS, &refs).map_err(|e| e.to_string())?;
        for (l, e) in entries.iter().enumerate() {
            let ok = e.level == Some(l) && e.rel_error.is_some_and(|r| r <= TOL);
            f.check(
                ok,
                format!(
                    "N={n} level {l}: {:.12e} matched {:?} rel {:.1e}",
                    e.value,
                    e.level,
                    e.rel_error.unwrap_or(f64::NAN)
                ),
            );
        }
    }
    f.finish()
}

fn criterion_10() -> Check {
    const TOL: f64 = 0.05;
    let p = params(3, 0.5);
    let cfg = DecayConfig::default();
    let sat = p.decay_exponent();
    let mut f = Findings::default();
    for nu in [0.0, 0.5 * sat, sat] {
        let want = predicted_exponent(&p, nu);
        match measure_exponent(&p, nu, &cfg) {
            Ok(fit) => f.check(
                (fit.exponent - want).abs() <= TOL,
                format!("nu={nu}: exponent {:.4} vs {want} (+-{TOL})", fit.exponent),
            ),
            Err(e) => f.check(false, format!("nu={nu}: {e}")),
        }
    }
    let reach = predicted_steps(&p, 0.0);
    match bootstrap_check(&p, 0.0, reach, &cfg) {
        Ok(steps) => {
            for s in &steps {
                f.check(
                    s.within(TOL),
                    format!(
                        "bootstrap step {}: {:.4} vs {} (+-{TOL})",
                        s.step, s.measured, s.predicted
                    ),
                );
            }
            let last = steps.last().expect("at least one step");
            f.check(
                (last.measured - sat).abs() <= TOL,
                format!(
                    "reaches N-2s = {sat} at the predicted step {reach}: {:.4}",
                    last.measured
                ),
            );
        }
        Err(e) => f.check(false, format!("bootstrap: {e}")),
    }
    match kernel_decay(&p, 0, &cfg) {
        Ok(fit) => f.check(
            (fit.exponent - sat).abs() <= TOL,
            format!("Z_0 decay {:.4} vs {sat} (+-{TOL})", fit.exponent),
        ),
        Err(e) => f.check(false, format!("Z_0 decay: {e}")),
    }
    f.finish()
}

fn criterion_11() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |extra: &[&str], file: &str| -> Result<(i32, Report, String), String> {
        let path = dir.path().join(file);
        let out = Command::new(env!("CARGO_BIN_EXE_nondegen"))
            .args(["certify", "--N", "3", "--s", "0.5", "--out", path.to_str().unwrap()])
            .args(extra)
            .output()
            .map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let report = Report::from_json(&text).map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
        Ok((out.status.code().unwrap_or(-1), report, stderr))
    };
    let mut f = Findings::default();
    let (code, report, _) = run(&[], "clean.json")?;
    f.check(code == 0 && report.verdict, format!("clean certify: exit {code}"));
    let cases: [(&[&str], &[&str]); 3] = [
        (
            &["--inject-amplitude", "1.1"],
            &["bubble_residual", "kernel_annihilation"],
        ),
        (
            &["--inject-gamma", "1.1"],
            &["bubble_residual", "eigenvalue_identification"],
        ),
        (
            &["--inject-exponent-shift", "0.1"],
            &["bubble_residual", "kernel_annihilation", "eigenvalue_identification"],
        ),
    ];
    for (i, (flags, expected)) in cases.iter().enumerate() {
        let (code, report, stderr) = run(flags, &format!("defect{i}.json"))?;
        let failed = report.failed_checks();
        let named = expected
            .iter()
            .all(|name| failed.contains(name) && stderr.lines().any(|l| l.starts_with(&format!("FAIL {name}"))));
        let clean_checks_pass = report
            .checks
            .iter()
            .filter(|c| ["spectral_gap", "kernel_dimension", "lift_to_h1"].contains(&c.name.as_str()))
            .all(|c| c.pass);
        f.check(
            code == 1 && !report.verdict && named && clean_checks_pass,
            format!("{}: exit {code}, failing {failed:?}", flags.join(" ")),
        );
    }
    f.finish()
}

/// Exponent vectors of the monomials of degree `d` in `m` variables.
fn monomials(m: usize, d: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .flat_map(|first| {
            monomials(m - 1, d - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = BigRational::one() / rows[r][c].clone();
        let pivot_row: Vec<BigRational> = rows[r].iter().map(|v| v * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &factor * y;
                }
            }
        }
        rows[r] = pivot_row;
        r += 1;
    }
    r
}

/// Dimension of the harmonic polynomials of degree `d` in `m` variables:
/// the kernel of the Laplacian from degree `d` to degree `d - 2`, by exact
/// rational elimination.
fn harmonic_count(m: usize, d: usize) -> usize {
    let source = monomials(m, d);
    if d < 2 {
        return source.len();
    }
    let target = monomials(m, d - 2);
    let mut rows = vec![vec![BigRational::zero(); source.len()]; target.len()];
    for (j, a) in source.iter().enumerate() {
        for k in 0..m {
            if a[k] >= 2 {
                let mut b = a.clone();
                b[k] -= 2;
                let i = target.iter().position(|t| *t == b).expect("target monomial");
                rows[i][j] += BigRational::from_integer(((a[k] * (a[k] - 1)) as i64).into());
            }
        }
    }
    source.len() - rank(rows)
}

fn criterion_12() -> Check {
    let mut f = Findings::default();
    for n in 1..=4 {
        let counts: Vec<usize> = (0..=4).map(|l| harmonic_count(n + 1, l)).collect();
        let formula: Vec<usize> = (0..=4).map(|l| dim_harmonic(n, l) as usize).collect();
        f.check(
            counts == formula && counts[1] == n + 1,
            format!(
                "N={n}: brute force {counts:?}, formula {formula:?}, dim H_1 = {}",
                counts[1]
            ),
        );
    }
    f.finish()
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "ratio law of the closed form", Duration::from_secs(1), criterion_1),
        (
            2,
            "quadrature vs closed form after one normalization",
            Duration::from_secs(5),
            criterion_2,
        ),
        (
            3,
            "spot values e_0 = 2 pi^2, e_1 = pi^2",
            Duration::from_secs(1),
            criterion_3,
        ),
        (
            4,
            "bubble solves the integral equation",
            Duration::from_secs(60),
            criterion_4,
        ),
        (
            5,
            "linearized operator fixes Z_0 and Z_1",
            Duration::from_secs(120),
            criterion_5,
        ),
        (6, "kernel lifts lie in H_1", Duration::from_secs(10), criterion_6),
        (
            7,
            "bilinear and conformal distance identities",
            Duration::from_secs(30),
            criterion_7,
        ),
        (8, "a = kappa_audit e_1", Duration::from_secs(5), criterion_8),
        (9, "zonal Nystrom spectrum", Duration::from_secs(60), criterion_9),
        (
            10,
            "decay exponents and bootstrap",
            Duration::from_secs(120),
            criterion_10,
        ),
        (11, "certificate falsifiability", Duration::from_secs(180), criterion_11),
        (
            12,
            "dim H_1 = N + 1 by brute force",
            Duration::from_secs(1),
            criterion_12,
        ),
    ];
    let mut unexpected = Vec::new();
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.is_ok() && in_time;
        let known_red = KNOWN_RED.contains(&id);
        let tag = match (pass, known_red) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known red)",
            (true, true) => "PASS (expected red)",
        };
        println!(
            "criterion {id:>2} {tag}: {title} [{:.2} s, budget {} s]",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        let detail = match &result {
            Ok(d) | Err(d) => d,
        };
        println!("      {detail}");
        if !in_time {
            println!("      FAIL runtime over budget");
        }
        if pass == known_red {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (known red: {KNOWN_RED:?})");
    } else {
        println!("acceptance: unexpected result for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
