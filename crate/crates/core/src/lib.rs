//! Exact arithmetic for p-derivations: Fermat quotients on rational and
//! p-adic coefficients, δ-jet series in one or several primes, δ-Fourier and
//! Serre–Tate expansions of modular forms, and desk checks of their
//! identities.

pub mod arith;
pub mod deltajet;
pub mod error;
pub mod forms;
pub mod json;
pub mod modular;
pub mod multiprime;
pub mod qseries;

pub use arith::{Coefficient, LocalizedRational, PadicCtx, PadicTrunc, Weight};
pub use deltajet::{BaseVar, JetRing, JetSeries, JetVar, Monomial};
pub use error::{Error, Result};
pub use forms::CovarianceReport;
pub use modular::{CurveFixture, EllipticCurveQ, QExpansion};
pub use multiprime::MultiJetSeries;
pub use qseries::{Gamma, Series1};
