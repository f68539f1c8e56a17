//! Statistical reference forecasters: the Ornstein–Uhlenbeck process and
//! AR(p) autoregression.

mod ar;
mod ou;

pub use ar::{fit_ar, fit_ar_segments, forecast_ar, select_ar_order, ArForecaster, ArModel};
pub use ou::{estimate_ou, forecast_ou, ou_ensemble_mean, simulate_ou, OuForecaster, OuParams};
