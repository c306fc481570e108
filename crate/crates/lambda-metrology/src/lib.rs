//! Quantum metrology of a three-level Λ atom driven by two resonant laser
//! fields.
//!
//! The crate computes how precisely the three level energies of the atom can
//! be estimated from its evolved state: symmetric logarithmic derivatives,
//! quantum Fisher information (single-parameter and matrix form), classical
//! Fisher information for a POVM, Hilbert-Schmidt speed, Cramér-Rao variance
//! bounds and the independent-vs-simultaneous performance ratio `R`, plus
//! closed-form reference expressions and a deterministic sweep engine with a
//! CSV-emitting command line (`lamet`).
//!
//! Units: `ħ = 1`; energies and Rabi frequencies in rad/time, QFI in time²,
//! Hilbert-Schmidt speed in time.
//!
//! ```
//! use lambda_metrology::estimation::{hss, qfi_pure};
//! use lambda_metrology::model::{evolve, LambdaParams, Level};
//! use std::f64::consts::PI;
//!
//! // Equal resonant drives with alpha = phi1 - phi2 - psi = -pi and
//! // theta = pi/2: the atom is coherently trapped in its lower levels.
//! let params = LambdaParams { psi: PI, ..Default::default() };
//! assert!(params.is_cpt(1e-9));
//! let state = evolve(&params, 3.0).unwrap();
//! assert!(state.populations()[0] < 1e-20);
//!
//! // Trapping optimizes the estimation of the ground level energy,
//! // F = t^2, and the Fisher information is four times the squared
//! // Hilbert-Schmidt speed.
//! let f = qfi_pure(&params, 3.0, Level::B).unwrap();
//! let s = hss(&params, 3.0, Level::B).unwrap();
//! assert!((f - 9.0).abs() < 1e-10);
//! assert!((f - 4.0 * s * s).abs() < 1e-10);
//! ```
//!
//! The `book/` directory of the repository holds a guided tour; its code
//! blocks run as documentation tests of this crate.

pub mod analytic;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod sweep;

pub use estimation::{EstimationConfig, Povm, QfiMatrix, SldOperator, VarianceBounds};
pub use model::{LambdaParams, Level, PureState, StateDerivative};

// Keep the book chapters honest: every fenced Rust block in the guide is
// compiled and run by `cargo test`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(model, "../../../book/src/model.md");
    chapter!(estimation, "../../../book/src/estimation.md");
    chapter!(speed, "../../../book/src/speed.md");
    chapter!(cli, "../../../book/src/cli.md");
}
