//! Finite-blocklength physical-layer-security metrics over fading wiretap
//! channels.
//!
//! * [`rates`]: capacity, dispersion, maximal coding rate and the secrecy-rate
//!   bounds at a given channel realization.
//! * [`fading`]: Rayleigh/combining SNR laws and seeded channel sampling.
//! * [`mc`]: the Monte Carlo estimator behind every averaged metric.
//! * [`metrics`]: secrecy throughput, outage, effective throughput, secrecy
//!   outage probability and reliable throughput.
//! * [`optimize`]: grid sweeps, feasible argmax and rate bisection.

pub mod error;
pub mod fading;
pub mod mc;
pub mod metrics;
pub mod optimize;
pub mod rates;
pub mod special;

pub use error::{Error, Result};
pub use fading::{sample_channel, ChannelStream, FadingScenario, SnrLaw};
pub use mc::{McBudget, MetricEstimate};
pub use metrics::{CsiModel, SecurityConstraints, TransmissionPlan};
pub use rates::{ChannelPoint, RatePoint};
