//! Special functions: Gamma family, Pochhammer symbols, Gegenbauer ratios,
//! generalized hypergeometric series and Bessel functions.

mod bessel;
pub mod exact;
mod gamma;
mod gegenbauer;
mod hypergeometric;

pub use bessel::{bessel_j, bessel_k};
pub use gamma::{
    beta, digamma, gamma, ln_beta, ln_gamma, ln_gamma_ratio, ln_gamma_signed, ln_pochhammer,
    pochhammer, sin_pi, tetragamma, trigamma,
};
pub use gegenbauer::{gegenbauer_ratio, gegenbauer_ratios, gegenbauer_ratios_into};
pub use hypergeometric::{hyp2f1, pfq, pfq_scaled, PfqOptions, PfqParams, PfqSum, PfqValue};

/// Alias kept for readers used to the `beta_fn` spelling.
pub use gamma::beta as beta_fn;
/// Alias kept for readers used to the `gamma_fn` spelling.
pub use gamma::gamma as gamma_fn;
