//! Bifurcation analysis of a delayed reaction–diffusion mussel–algae model
//!
//! ```text
//! m_t = d Δm + m (r a(t-τ) - 1/(1 + m(t-τ)))
//! γ a_t = Δa + α(1 - a) - m a
//! ```
//!
//! on `(0, lπ)` with homogeneous Neumann boundary conditions.
//!
//! - [`model`]: parameters, kinetics, equilibria and the standing hypotheses.
//! - [`linear`]: delay-free spectrum, the Hopf curve in `r` and Turing analysis.
//! - [`delay`]: the transcendental characteristic equation, crossing
//!   frequencies and critical delays.
//! - [`normal_form`]: center-manifold reduction at the first critical delay.
//! - [`simulator`]: IMEX method-of-lines integration of the delay PDE.
//! - [`verification`]: independent numerical oracles for the closed forms.

pub mod delay;
pub mod error;
pub mod linear;
pub mod model;
pub mod normal_form;
pub mod numfmt;
pub mod roots;
pub mod simulator;
pub mod verification;

pub use error::{Error, ErrorCategory, Result};
pub use model::{Equilibrium, HypothesisReport, ModelParams};
