//! Command-line flags and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nondegen::decay::DecayConfig;
use nondegen::spectral::CertificateTolerances;
use nondegen::{CertificateConfig, Defect, Params};
use serde::{Deserialize, Serialize};

use crate::commands::check_names;
use crate::error::CliError;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "nondegen",
    version,
    about = "Numerical verification of the nondegeneracy of fractional Sobolev extremals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Derived constants and their consistency.
    Constants(CommonArgs),
    /// The bubble solves the integral equation.
    BubbleCheck(CommonArgs),
    /// The linearized operator fixes every kernel generator.
    KernelCheck(CommonArgs),
    /// Stereographic transfer to the sphere.
    TransformCheck(CommonArgs),
    /// Sphere eigenvalues: closed form, quadrature, ratio law (CSV table on stdout).
    Eigs(CommonArgs),
    /// Zonal Nystrom spectrum (CSV table on stdout).
    Spectrum(CommonArgs),
    /// Decay exponents and the bootstrap (CSV table on stdout).
    Decay(CommonArgs),
    /// The full nondegeneracy certificate.
    Certify(CommonArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Constants(_) => CommandKind::Constants,
            Command::BubbleCheck(_) => CommandKind::BubbleCheck,
            Command::KernelCheck(_) => CommandKind::KernelCheck,
            Command::TransformCheck(_) => CommandKind::TransformCheck,
            Command::Eigs(_) => CommandKind::Eigs,
            Command::Spectrum(_) => CommandKind::Spectrum,
            Command::Decay(_) => CommandKind::Decay,
            Command::Certify(_) => CommandKind::Certify,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Constants(a)
            | Command::BubbleCheck(a)
            | Command::KernelCheck(a)
            | Command::TransformCheck(a)
            | Command::Eigs(a)
            | Command::Spectrum(a)
            | Command::Decay(a)
            | Command::Certify(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Constants,
    BubbleCheck,
    KernelCheck,
    TransformCheck,
    Eigs,
    Spectrum,
    Decay,
    Certify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Dimension.
    #[arg(long = "N", default_value_t = 3)]
    pub n: usize,
    /// Fractional order, in (0, 1).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub s: f64,
    /// Highest spherical harmonic degree.
    #[arg(long, default_value_t = 20)]
    pub lmax: usize,
    /// Radial quadrature nodes per panel.
    #[arg(long, default_value_t = 96)]
    pub radial_nodes: usize,
    /// Angular quadrature nodes.
    #[arg(long, default_value_t = 64)]
    pub angular_nodes: usize,
    /// Latitude nodes of the zonal Nystrom matrix.
    #[arg(long, default_value_t = 64)]
    pub zonal_nodes: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Report file; without it the report goes to stdout unless the command prints a table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed of the random test points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omit the timestamp and zero the wall times.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Run independent checks on separate threads.
    #[arg(long)]
    pub parallel: bool,
    /// Comma-separated subset of the command's checks.
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,
    #[command(flatten)]
    pub inject: InjectArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    #[arg(long = "tol-constants", default_value_t = 1e-14)]
    pub constants: f64,
    #[arg(long = "tol-bubble", default_value_t = 1e-6)]
    pub bubble: f64,
    /// Relative tolerance of the kernel check.
    #[arg(long = "tol-kernel", default_value_t = 1e-5)]
    pub kernel: f64,
    /// Absolute floor of the kernel check.
    #[arg(long = "tol-kernel-abs", default_value_t = 1e-7)]
    pub kernel_abs: f64,
    #[arg(long = "tol-lift", default_value_t = 1e-8)]
    pub lift: f64,
    #[arg(long = "tol-conformal", default_value_t = 1e-12)]
    pub conformal: f64,
    #[arg(long = "tol-bilinear", default_value_t = 1e-6)]
    pub bilinear: f64,
    #[arg(long = "tol-ratio", default_value_t = 1e-12)]
    pub ratio: f64,
    #[arg(long = "tol-audit", default_value_t = 1e-10)]
    pub audit: f64,
    #[arg(long = "tol-identification", default_value_t = 1e-8)]
    pub identification: f64,
    #[arg(long = "tol-spectrum", default_value_t = 1e-5)]
    pub spectrum: f64,
    /// Absolute tolerance on decay exponents.
    #[arg(long = "tol-decay", default_value_t = 0.05)]
    pub decay: f64,
}

#[derive(Args, Debug, Clone, Default)]
#[group(multiple = false)]
pub struct InjectArgs {
    /// Multiply the bubble amplitude by this factor.
    #[arg(long)]
    pub inject_amplitude: Option<f64>,
    /// Multiply the Riesz constant by this factor.
    #[arg(long)]
    pub inject_gamma: Option<f64>,
    /// Add this shift to the Riesz kernel exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub inject_exponent_shift: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub constants: f64,
    pub bubble: f64,
    pub kernel: f64,
    pub kernel_abs: f64,
    pub lift: f64,
    pub conformal: f64,
    pub bilinear: f64,
    pub ratio: f64,
    pub audit: f64,
    pub identification: f64,
    pub spectrum: f64,
    pub decay: f64,
}

impl From<&TolArgs> for Tolerances {
    fn from(t: &TolArgs) -> Self {
        Self {
            constants: t.constants,
            bubble: t.bubble,
            kernel: t.kernel,
            kernel_abs: t.kernel_abs,
            lift: t.lift,
            conformal: t.conformal,
            bilinear: t.bilinear,
            ratio: t.ratio,
            audit: t.audit,
            identification: t.identification,
            spectrum: t.spectrum,
            decay: t.decay,
        }
    }
}

impl Tolerances {
    fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("constants", self.constants),
            ("bubble", self.bubble),
            ("kernel", self.kernel),
            ("kernel-abs", self.kernel_abs),
            ("lift", self.lift),
            ("conformal", self.conformal),
            ("bilinear", self.bilinear),
            ("ratio", self.ratio),
            ("audit", self.audit),
            ("identification", self.identification),
            ("spectrum", self.spectrum),
            ("decay", self.decay),
        ]
    }
}

/// A deliberately corrupted constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Injection {
    Amplitude(f64),
    Gamma(f64),
    ExponentShift(f64),
}

impl Injection {
    fn from_args(a: &InjectArgs) -> Option<Self> {
        a.inject_amplitude
            .map(Injection::Amplitude)
            .or(a.inject_gamma.map(Injection::Gamma))
            .or(a.inject_exponent_shift.map(Injection::ExponentShift))
    }

    pub fn defect(&self) -> Defect<f64> {
        match *self {
            Injection::Amplitude(f) => Defect::AmplitudeScale(f),
            Injection::Gamma(f) => Defect::GammaScale(f),
            Injection::ExponentShift(d) => Defect::KernelExponentShift(d),
        }
    }
}

/// Validated configuration, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub lmax: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub zonal_nodes: usize,
    pub tolerances: Tolerances,
    pub out: Option<String>,
    pub format: Format,
    pub seed: u64,
    /// Checks to run, in execution order.
    pub checks: Vec<String>,
    pub parallel: bool,
    pub inject: Option<Injection>,
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> Result<Self, CliError> {
        let a = cmd.args();
        let kind = cmd.kind();
        if a.n == 0 {
            return Err(CliError::Config("N must be at least 1".into()));
        }
        if !(a.s > 0.0 && a.s < 1.0) {
            return Err(CliError::Config(format!("s = {} must lie in (0, 1)", a.s)));
        }
        if a.n as f64 <= 2.0 * a.s {
            return Err(CliError::Config(format!(
                "N > 2s is required (N = {}, 2s = {})",
                a.n,
                2.0 * a.s
            )));
        }
        if a.lmax < 3 {
            return Err(CliError::Config(format!("lmax must be at least 3, got {}", a.lmax)));
        }
        if a.radial_nodes < 4 || a.angular_nodes < 4 {
            return Err(CliError::Config(
                "radial and angular node counts must be at least 4".into(),
            ));
        }
        if a.zonal_nodes < 16 {
            return Err(CliError::Config("zonal node count must be at least 16".into()));
        }
        let tolerances = Tolerances::from(&a.tol);
        for (name, v) in tolerances.named() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--tol-{name} must be positive, got {v}")));
            }
        }
        let inject = Injection::from_args(&a.inject);
        match inject {
            Some(Injection::Amplitude(f) | Injection::Gamma(f)) if !(f > 0.0 && f.is_finite()) => {
                return Err(CliError::Config(format!("injected factor must be positive, got {f}")));
            }
            Some(Injection::ExponentShift(d)) if !d.is_finite() => {
                return Err(CliError::Config("injected exponent shift must be finite".into()));
            }
            _ => {}
        }
        let available = check_names(kind, a.n);
        let checks = if a.checks.is_empty() {
            available.iter().map(|c| c.to_string()).collect()
        } else {
            for name in &a.checks {
                if !available.contains(&name.as_str()) {
                    return Err(CliError::Config(format!(
                        "check `{name}` is not available here; choose from {}",
                        available.join(", ")
                    )));
                }
            }
            available
                .iter()
                .filter(|c| a.checks.iter().any(|x| x == *c))
                .map(|c| c.to_string())
                .collect()
        };
        Ok(Self {
            command: kind,
            n: a.n,
            s: a.s,
            lmax: a.lmax,
            radial_nodes: a.radial_nodes,
            angular_nodes: a.angular_nodes,
            zonal_nodes: a.zonal_nodes,
            tolerances,
            out: a.out.as_ref().map(|p| p.display().to_string()),
            format: a.format,
            seed: a.seed,
            checks,
            parallel: a.parallel,
            inject,
        })
    }

    pub fn wants(&self, check: &str) -> bool {
        self.checks.iter().any(|c| c == check)
    }

    /// Problem parameters with the injected defect, if any.
    pub fn params(&self) -> Result<Params, CliError> {
        let p = Params::new(self.n, self.s)?;
        Ok(match self.inject {
            Some(inj) => p.with_defect(inj.defect()),
            None => p,
        })
    }

    pub fn certificate(&self) -> CertificateConfig<f64> {
        let mut cfg = CertificateConfig::default();
        cfg.riesz.n_radial = self.radial_nodes;
        cfg.riesz.n_angular = self.angular_nodes;
        cfg.zonal.nodes = self.zonal_nodes;
        cfg.lmax = self.lmax;
        cfg.tolerances = CertificateTolerances {
            bubble: self.tolerances.bubble,
            kernel_rel: self.tolerances.kernel,
            kernel_abs: self.tolerances.kernel_abs,
            lift: self.tolerances.lift,
            identification: self.tolerances.identification,
            spectrum: self.tolerances.spectrum,
        };
        cfg
    }

    pub fn decay(&self) -> DecayConfig<f64> {
        let mut cfg = DecayConfig::default();
        cfg.riesz.n_radial = self.radial_nodes;
        cfg.riesz.n_angular = self.angular_nodes;
        cfg
    }
}
