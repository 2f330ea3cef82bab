use thiserror::Error;

use crate::rates::ChannelPoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} = {value} is outside {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    /// The Monte Carlo integrand produced NaN or an infinity.
    #[error(
        "integrand returned {value} at gamma_b = {}, gamma_e = {}",
        point.gamma_b(),
        point.gamma_e()
    )]
    NonFinite { point: ChannelPoint, value: f64 },

    /// Too few samples satisfied the conditioning event.
    #[error(
        "insufficient conditioning: {hits} of {n_samples} samples satisfy the condition \
         (need at least {required} and probability >= {min_probability}); increase n_samples"
    )]
    InsufficientConditioning {
        hits: u64,
        n_samples: u64,
        required: u64,
        min_probability: f64,
    },

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            bound: "(0, 1)",
        })
    }
}

pub(crate) fn check_snr(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            bound: "[0, inf)",
        })
    }
}

pub(crate) fn check_blocklength(n: u32) -> Result<u32> {
    if n >= 1 {
        Ok(n)
    } else {
        Err(Error::Domain {
            name: "blocklength",
            value: 0.0,
            bound: "[1, inf)",
        })
    }
}
