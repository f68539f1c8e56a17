//! Dependence and tail diagnostics: autocorrelation, detrended
//! fluctuation analysis and heavy-tail fits.

mod acf;
mod dfa;
mod tails;

pub use acf::{acf, classify_dependence, pacf, AcfResult, Dependence, CONFIDENCE_Z};
pub use dfa::{dfa, geometric_sizes, DfaConfig, DfaResult, DfaRegime};
pub use tails::{
    compare_tails, empirical_ccdf, fit_lognormal, fit_powerlaw, LognormalFit, PowerLawFit, TailFit, TailModel,
};

use serde::{Deserialize, Serialize};

/// ACF and DFA of one series, bundled for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub acf: AcfResult,
    pub dfa: DfaResult,
}
