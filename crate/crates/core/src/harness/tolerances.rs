//! Pass/fail thresholds for every suite, in one table.
//!
//! | suite              | field                         | default    |
//! |--------------------|-------------------------------|------------|
//! | green-covariance   | `covariance_rel`              | 1e-10      |
//! | green-mc           | `ladder_sigmas`               | 3          |
//! | green-mc           | `green_spread`                | 0.15       |
//! | martingale         | `martingale_sigmas`           | 3          |
//! | drift              | `drift_rel`                   | 1e-6       |
//! | twosided-oracle    | `oracle_distance`             | 0.08       |
//! | escape             | `escape_slack`                | 0.15       |
//! | content-scaling    | `slope_tolerance`             | 0.1        |
//! | lengthbias         | `lengthbias_distance`         | 0.12       |
//! | lengthbias         | `mass_ratio_lo`, `_hi`        | 0.85, 1.18 |
//! | metric             | `metric_slack`                | 1e-9       |
//! | integrability      | `integrability_growth`        | 0.05       |
//!
//! Any field may be overridden from the experiment file.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub covariance_rel: f64,
    pub ladder_sigmas: f64,
    pub green_spread: f64,
    pub martingale_sigmas: f64,
    pub drift_rel: f64,
    pub oracle_distance: f64,
    pub escape_slack: f64,
    pub slope_tolerance: f64,
    pub lengthbias_distance: f64,
    pub mass_ratio_lo: f64,
    pub mass_ratio_hi: f64,
    pub metric_slack: f64,
    /// Allowed gap between measured and predicted log2 shell growth.
    pub integrability_growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            covariance_rel: 1e-10,
            ladder_sigmas: 3.0,
            green_spread: 0.15,
            martingale_sigmas: 3.0,
            drift_rel: 1e-6,
            oracle_distance: 0.08,
            escape_slack: 0.15,
            slope_tolerance: 0.1,
            lengthbias_distance: 0.12,
            mass_ratio_lo: 0.85,
            mass_ratio_hi: 1.18,
            metric_slack: 1e-9,
            integrability_growth: 0.05,
        }
    }
}
