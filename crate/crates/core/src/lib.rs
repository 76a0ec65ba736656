//! Certified numerics for Eisenstein series and normalized modular forms on
//! the arc `{e^{iθ} : π/2 ≤ θ ≤ 2π/3}` of the modular fundamental domain.
//!
//! The crate evaluates `F_k(θ) = e^{ikθ/2} E_k(e^{iθ})` by norm-bucketed
//! coprime lattice sums with a rigorous truncation radius, assembles the
//! forms `f_k = E_k + Σ a_j E_{k-12j} Δ^j`, isolates their zeros on the arc
//! by sign-certified bisection, and checks interlacing of the zeros of
//! `f_k` and `f_{k+12}`.
//!
//! Module map:
//!
//! * [`arith`]: weight decomposition, `δ_t`, coprime pairs of given norm, the
//!   exact cosine-zero grids.
//! * [`eisenstein`]: lattice sums, tail and head bounds, `p_k`.
//! * [`forms`]: `Δ` on the arc, `ε`, `G_k`, `S_k`, `Q_k`, hypothesis checks
//!   and the bound sweeps.
//! * [`zeros`]: extremum grid, certified zero isolation, localization.
//! * [`interlace`]: interlacing certificates and the case analysis.
//!
//! Data-parallel sweeps go through [`Execution`]; with the `parallel`
//! feature disabled every path runs sequentially.

// NaN must fail the positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::should_implement_trait)]

pub mod arith;
pub mod certified;
pub mod eisenstein;
mod error;
pub mod forms;
pub mod interlace;
pub mod par;
pub mod sum;
pub mod zeros;

pub use certified::Certified;
pub use error::{Error, Result};
pub use par::Execution;

/// Left end of the arc, `θ = π/2` (the point `i`).
pub const ARC_LO: f64 = std::f64::consts::FRAC_PI_2;

/// Right end of the arc, `θ = 2π/3` (the point `ρ`).
pub const ARC_HI: f64 = 2.0 * std::f64::consts::FRAC_PI_3;

/// Unit roundoff of `f64`.
pub(crate) const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Returns `true` when `theta` lies on the closed arc `[π/2, 2π/3]`.
pub fn on_arc(theta: f64) -> bool {
    (ARC_LO..=ARC_HI).contains(&theta)
}
