//! Numerical verification of nondegeneracy for the extremals of the
//! fractional Sobolev inequality.
//!
//! Every routine is generic over the scalar type; the aliases at the crate
//! root fix it to `f64`.

// Negated comparisons make NaN fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod decay;
pub mod error;
pub mod field;
pub mod funk_hecke;
pub mod linalg;
pub mod riesz;
pub mod scalar;
pub mod special_fns;
pub mod spectral;
pub mod sphere_transform;
mod zonal;

pub use bubble::{Bubble, Defect, KernelFunction, ProblemParams};
pub use decay::{bootstrap_check, fit_decay, kernel_decay, BootstrapStep, DecayConfig, DecayFit};
pub use error::{Error, Result};
pub use field::{Field, FnField};
pub use funk_hecke::{a_constant, eigenvalue_closed, eigenvalue_quadrature, normalization_audit, EigenvalueTable};
pub use riesz::{RadialProfile, RieszConfig, RieszOperator};
pub use scalar::Real;
pub use spectral::{
    build_zonal_matrix, nondegeneracy_certificate, CertificateConfig, CheckRecord, SpectralReport, ZonalConfig,
};
pub use sphere_transform::{LiftedField, SpherePoint};

pub type Params = ProblemParams<f64>;
pub type Bubble64 = Bubble<f64>;
pub type Kernel64 = KernelFunction<f64>;
pub type Certificate64 = SpectralReport<f64>;
