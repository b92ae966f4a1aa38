//! Simulation and verification toolkit for adjusted mean-thresholding (AMT)
//! public-good mechanisms.
//!
//! An AMT mechanism provides a binary public good when the sum of transformed
//! valuations clears a mean-adjusted threshold, and charges each agent their
//! pivotal value when the good is provided. The crate is organised around
//! four layers:
//!
//! * [`distributions`]: valuation distributions, monotone transforms,
//!   virtual valuations, and moment bundles computed by quadrature;
//! * [`mechanisms`]: decision rules, pivotal transfers, and the rebate
//!   schemes that trade exact budget balance against incentive slack;
//! * [`montecarlo`]: a deterministic, replication-parallel estimation
//!   engine with common random numbers across mechanism variants;
//! * [`theory`]: closed-form bounds (Berry-Esseen, truncated normal means,
//!   Hoeffding tails, regret and profit-ratio bounds) and rate diagnostics.

pub mod distributions;
pub mod mechanisms;
pub mod montecarlo;
pub mod numeric;
pub mod theory;
