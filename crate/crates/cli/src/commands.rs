//! Check catalogue and execution of each command.

use std::collections::BTreeSet;
use std::time::Instant;

use nondegen::decay::{measure_exponent, predicted_exponent, predicted_steps};
use nondegen::funk_hecke::ratio_closed;
use nondegen::spectral::{
    bubble_check, dimension_check, gap_check, identification_check, kernel_check, lift_check, spectrum_check,
    CHECK_NAMES,
};
use nondegen::sphere_transform::{conformal_distance_defect, verify_id1, Id1Grid};
use nondegen::{
    a_constant, bootstrap_check, kernel_decay, normalization_audit, CertificateConfig, CheckRecord, EigenvalueTable,
    Error, FnField, Params,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CommandKind, RunConfig};
use crate::report::{cell, num, Table};

/// Random point pairs per dimension in the conformal distance check.
pub const CONFORMAL_PAIRS: usize = 100;

/// Checks a command can run for dimension `n`, in execution order.
pub fn check_names(kind: CommandKind, n: usize) -> Vec<&'static str> {
    match kind {
        CommandKind::Constants => vec!["constants"],
        CommandKind::BubbleCheck => vec![CHECK_NAMES[0]],
        CommandKind::KernelCheck => vec![CHECK_NAMES[1]],
        CommandKind::TransformCheck if n == 1 => vec![CHECK_NAMES[2], "conformal_distance", "bilinear_identity"],
        CommandKind::TransformCheck => vec![CHECK_NAMES[2], "conformal_distance"],
        CommandKind::Eigs => vec!["ratio_law", "normalization_audit", CHECK_NAMES[3]],
        CommandKind::Spectrum => vec![CHECK_NAMES[6]],
        CommandKind::Decay => vec!["decay_exponent_law", "bootstrap", "kernel_decay"],
        CommandKind::Certify if n == 1 => CHECK_NAMES[..6].to_vec(),
        CommandKind::Certify => CHECK_NAMES.to_vec(),
    }
}

/// Result of one check.
#[derive(Debug, Clone)]
pub struct Piece {
    pub record: CheckRecord,
    pub rows: Vec<Vec<String>>,
    pub normalization: Option<f64>,
}

impl From<CheckRecord> for Piece {
    fn from(record: CheckRecord) -> Self {
        Self {
            record,
            rows: Vec::new(),
            normalization: None,
        }
    }
}

/// Everything a command produced.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub records: Vec<CheckRecord>,
    pub normalization: Option<f64>,
    pub table: Option<Table>,
}

type Task<'a> = (&'static str, Box<dyn FnOnce() -> Result<Piece, Error> + Send + 'a>);

struct Measured {
    computed: f64,
    reference: f64,
    tol: f64,
    pass: bool,
    params: Vec<(String, f64)>,
    rows: Vec<Vec<String>>,
}

/// Times `body`; errors that falsify the checked identity become a failed record.
fn measure(name: &str, body: impl FnOnce() -> Result<Measured, Error>) -> Result<Piece, Error> {
    let start = Instant::now();
    let result = body();
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(m) => Ok(Piece {
            record: CheckRecord {
                name: name.to_string(),
                params: m.params,
                computed: m.computed,
                reference: m.reference,
                tol: m.tol,
                pass: m.pass,
                seconds,
                error: None,
            },
            rows: m.rows,
            normalization: None,
        }),
        Err(err) if err.is_falsifying() => Ok(Piece::from(CheckRecord {
            name: name.to_string(),
            params: Vec::new(),
            computed: f64::NAN,
            reference: f64::NAN,
            tol: f64::NAN,
            pass: false,
            seconds,
            error: Some(err.to_string()),
        })),
        Err(err) => Err(err.in_check(name)),
    }
}

fn base_params(p: &Params) -> Vec<(String, f64)> {
    vec![("N".into(), p.n() as f64), ("s".into(), p.s())]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn run_tasks(tasks: Vec<Task<'_>>, parallel: bool) -> Result<Vec<Piece>, Error> {
    if !parallel {
        return tasks.into_iter().map(|(_, t)| t()).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = tasks.into_iter().map(|(name, t)| (name, scope.spawn(t))).collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::NonConvergence("check thread panicked".into()).in_check(name)))
            })
            .collect()
    })
}

/// Runs the selected checks of the configured command.
pub fn execute(cfg: &RunConfig) -> Result<CommandOutput, crate::error::CliError> {
    let params = cfg.params()?;
    let cert = cfg.certificate();
    let mut tasks: Vec<Task<'_>> = Vec::new();
    let p = &params;
    let cert = &cert;
    for name in check_names(cfg.command, cfg.n).into_iter().filter(|c| cfg.wants(c)) {
        let task: Box<dyn FnOnce() -> Result<Piece, Error> + Send + '_> = match name {
            "constants" => Box::new(move || measure("constants", || constants_check(p, cfg))),
            "bubble_residual" => Box::new(move || bubble_check(p, cert).map(Piece::from)),
            "kernel_annihilation" => Box::new(move || kernel_check(p, cert).map(Piece::from)),
            "lift_to_h1" => Box::new(move || lift_check(p, cert).map(Piece::from)),
            "conformal_distance" => Box::new(move || measure(name, || conformal_check(p, cfg))),
            "bilinear_identity" => Box::new(move || measure(name, || bilinear_check(p, cfg))),
            "ratio_law" => Box::new(move || measure(name, || ratio_check(p, cfg))),
            "normalization_audit" => Box::new(move || audit_check(p, cfg)),
            "eigenvalue_identification" => Box::new(move || {
                let (record, factor) = identification_check(p, cert)?;
                Ok(Piece {
                    record,
                    rows: Vec::new(),
                    normalization: factor,
                })
            }),
            "spectral_gap" => Box::new(move || gap_check(p).map(Piece::from)),
            "kernel_dimension" => Box::new(move || dimension_check(p).map(Piece::from)),
            "zonal_spectrum" => Box::new(move || zonal_check(p, cert)),
            "decay_exponent_law" => Box::new(move || measure(name, || exponent_law_check(p, cfg))),
            "bootstrap" => Box::new(move || measure(name, || bootstrap_task(p, cfg))),
            "kernel_decay" => Box::new(move || measure(name, || kernel_decay_check(p, cfg))),
            other => unreachable!("unknown check {other} passed validation"),
        };
        tasks.push((name, task));
    }
    let pieces = run_tasks(tasks, cfg.parallel)?;
    let mut table = match cfg.command {
        CommandKind::Constants => Some(constants_table(p)),
        CommandKind::Eigs => Some(eigs_table(p, cfg.lmax)?),
        CommandKind::Spectrum => Some(Table::new(&["index", "value", "level", "reference", "rel_error"])),
        CommandKind::Decay => Some(Table::new(&[
            "kind",
            "index",
            "nu",
            "step",
            "measured",
            "predicted",
            "quality",
        ])),
        _ => None,
    };
    let mut records = Vec::with_capacity(pieces.len());
    let mut normalization = None;
    for piece in pieces {
        if let Some(t) = table.as_mut() {
            if matches!(cfg.command, CommandKind::Spectrum | CommandKind::Decay) {
                t.rows.extend(piece.rows);
            }
        }
        normalization = normalization.or(piece.normalization);
        records.push(piece.record);
    }
    Ok(CommandOutput {
        records,
        normalization,
        table,
    })
}

fn constants_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let n = p.n() as f64;
    let s = p.s();
    let fresh = Params::new(p.n(), s)?;
    let p_law = (n + 2.0 * s) / (n - 2.0 * s);
    let deviations = [
        rel(p.p(), p_law),
        rel(p.two_star(), 2.0 * n / (n - 2.0 * s)),
        rel(p.two_star(), p.p() + 1.0),
        rel(p.funk_alpha(), n / 2.0 - s),
        rel(p.kernel_exponent(), n - 2.0 * s),
        rel(p.bubble_amplitude(), fresh.bubble_amplitude()),
        rel(p.riesz_gamma(), fresh.riesz_gamma()),
    ];
    let worst = deviations.iter().fold(0.0_f64, |m, d| m.max(*d));
    let tol = cfg.tolerances.constants;
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol && p.is_consistent(),
        params: base_params(p),
        rows: Vec::new(),
    })
}

fn constants_table(p: &Params) -> Table {
    let mut t = Table::new(&["name", "value"]);
    let entries = [
        ("N", p.n() as f64),
        ("s", p.s()),
        ("p", p.p()),
        ("two_star", p.two_star()),
        ("funk_alpha", p.funk_alpha()),
        ("bubble_amplitude", p.bubble_amplitude()),
        ("riesz_gamma", p.riesz_gamma()),
        ("kernel_exponent", p.kernel_exponent()),
        ("a_constant", a_constant(p)),
    ];
    t.rows = entries.iter().map(|(k, v)| vec![k.to_string(), num(*v)]).collect();
    t
}

fn conformal_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let dims: BTreeSet<usize> = [1, 2, 3, p.n()].into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0_f64;
    for &d in &dims {
        for _ in 0..CONFORMAL_PAIRS {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            worst = worst.max(conformal_distance_defect(&x, &y));
        }
    }
    let mut params = base_params(p);
    params.push(("seed".into(), cfg.seed as f64));
    params.push(("pairs".into(), CONFORMAL_PAIRS as f64));
    params.extend(dims.iter().map(|d| ("dim".to_string(), *d as f64)));
    let tol = cfg.tolerances.conformal;
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol,
        params,
        rows: Vec::new(),
    })
}

fn bilinear_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let g1 = FnField::new(1, |x: &[f64]| (-x[0] * x[0]).exp()).with_decay(f64::INFINITY);
    let g2 = FnField::new(1, |x: &[f64]| (-2.0 * (x[0] - 0.3).powi(2)).exp()).with_decay(f64::INFINITY);
    let grid = Id1Grid::default();
    let same = verify_id1(p, g1.clone(), g1.clone(), &grid)?;
    let mixed = verify_id1(p, g1, g2, &grid)?;
    let worst = same.rel_diff.max(mixed.rel_diff);
    let mut params = base_params(p);
    params.push(("radius".into(), grid.radius));
    params.push(("n_outer".into(), grid.n_outer as f64));
    params.push(("n_inner".into(), grid.n_inner as f64));
    let tol = cfg.tolerances.bilinear;
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol,
        params,
        rows: Vec::new(),
    })
}

fn ratio_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let table = EigenvalueTable::closed_form(p, cfg.lmax);
    let worst = table
        .ratios()
        .iter()
        .enumerate()
        .map(|(l, r)| rel(*r, ratio_closed(p, l)))
        .fold(0.0_f64, f64::max);
    let mut params = base_params(p);
    params.push(("lmax".into(), cfg.lmax as f64));
    let tol = cfg.tolerances.ratio;
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol,
        params,
        rows: Vec::new(),
    })
}

fn audit_check(p: &Params, cfg: &RunConfig) -> Result<Piece, Error> {
    let mut factor = None;
    let mut piece = measure("normalization_audit", || {
        let audit = normalization_audit(p, cfg.lmax)?;
        factor = Some(audit.factor);
        let mut params = base_params(p);
        params.push(("lmax".into(), cfg.lmax as f64));
        params.push(("kappa_audit".into(), audit.factor));
        let tol = cfg.tolerances.audit;
        Ok(Measured {
            computed: audit.max_residual,
            reference: 0.0,
            tol,
            pass: audit.max_residual <= tol,
            params,
            rows: Vec::new(),
        })
    })?;
    piece.normalization = factor;
    Ok(piece)
}

fn eigs_table(p: &Params, lmax: usize) -> Result<Table, Error> {
    let closed = EigenvalueTable::closed_form(p, lmax);
    let quad = EigenvalueTable::quadrature(p, lmax)?;
    let ratios = closed.ratios();
    let mut t = Table::new(&[
        "l",
        "e_closed",
        "e_quadrature",
        "quadrature_over_closed",
        "ratio",
        "ratio_law",
    ]);
    for l in 0..=lmax {
        let (c, q) = (closed.values[l], quad.values[l]);
        t.rows.push(vec![
            l.to_string(),
            num(c),
            num(q),
            num(q / c),
            cell(ratios.get(l).copied()),
            cell((l < lmax).then(|| ratio_closed(p, l))),
        ]);
    }
    Ok(t)
}

fn zonal_check(p: &Params, cert: &CertificateConfig<f64>) -> Result<Piece, Error> {
    let (record, entries) = spectrum_check(p, cert)?;
    let rows = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                i.to_string(),
                num(e.value),
                e.level.map_or_else(String::new, |l| l.to_string()),
                cell(e.reference),
                cell(e.rel_error),
            ]
        })
        .collect();
    Ok(Piece {
        record,
        rows,
        normalization: None,
    })
}

fn exponent_law_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let decay = cfg.decay();
    let sat = p.decay_exponent();
    let tol = cfg.tolerances.decay;
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    let mut params = base_params(p);
    for nu in [0.0, 0.5 * sat, sat] {
        let fit = measure_exponent(p, nu, &decay)?;
        let predicted = predicted_exponent(p, nu);
        worst = worst.max((fit.exponent - predicted).abs());
        params.push(("nu".into(), nu));
        rows.push(vec![
            "single".into(),
            String::new(),
            num(nu),
            "1".into(),
            num(fit.exponent),
            num(predicted),
            num(fit.quality),
        ]);
    }
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol,
        params,
        rows,
    })
}

fn bootstrap_task(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let decay = cfg.decay();
    let reach = predicted_steps(p, 0.0);
    let steps = bootstrap_check(p, 0.0, reach + 1, &decay)?;
    let tol = cfg.tolerances.decay;
    let worst = steps
        .iter()
        .fold(0.0_f64, |m, s| m.max((s.measured - s.predicted).abs()));
    let monotone = steps.windows(2).all(|w| w[1].measured >= w[0].measured);
    let reached = steps
        .get(reach.saturating_sub(1))
        .is_some_and(|s| (s.measured - p.decay_exponent()).abs() <= tol);
    let rows = steps
        .iter()
        .map(|s| {
            vec![
                "bootstrap".into(),
                String::new(),
                "0".into(),
                s.step.to_string(),
                num(s.measured),
                num(s.predicted),
                num(s.quality),
            ]
        })
        .collect();
    let mut params = base_params(p);
    params.push(("nu".into(), 0.0));
    params.push(("steps".into(), (reach + 1) as f64));
    params.push(("predicted_steps".into(), reach as f64));
    Ok(Measured {
        computed: worst,
        reference: 0.0,
        tol,
        pass: worst <= tol && monotone && reached,
        params,
        rows,
    })
}

fn kernel_decay_check(p: &Params, cfg: &RunConfig) -> Result<Measured, Error> {
    let decay = cfg.decay();
    let sat = p.decay_exponent();
    let tol = cfg.tolerances.decay;
    let dilation = kernel_decay(p, 0, &decay)?;
    let translation = kernel_decay(p, 1, &decay)?;
    let row = |index: usize, fit: &nondegen::DecayFit<f64>, predicted: f64| {
        vec![
            "kernel".into(),
            index.to_string(),
            String::new(),
            String::new(),
            num(fit.exponent),
            num(predicted),
            num(fit.quality),
        ]
    };
    let rows = vec![row(0, &dilation, sat), row(1, &translation, sat + 1.0)];
    let mut params = base_params(p);
    params.push(("translation_exponent".into(), translation.exponent));
    Ok(Measured {
        computed: dilation.exponent,
        reference: sat,
        tol,
        pass: (dilation.exponent - sat).abs() <= tol && translation.exponent > sat + tol,
        params,
        rows,
    })
}
