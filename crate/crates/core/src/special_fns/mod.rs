//! Special functions and quadrature rules used by every other module.

mod gamma;
mod gegenbauer;
mod harmonic;
mod quadrature;

pub(crate) use gamma::ln_gamma_positive;
pub use gamma::{gamma_ratio, log_gamma, sphere_area};
pub use gegenbauer::{gegenbauer_ln_at_one, gegenbauer_normalized, gegenbauer_normalized_table};
pub use harmonic::dim_harmonic;
pub use quadrature::{gauss_rule, GaussFamily, JacobiRecurrence, QuadratureFamily, QuadratureRule};
