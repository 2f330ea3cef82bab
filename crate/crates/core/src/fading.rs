//! Fading laws for the legitimate and eavesdropper SNRs.
//!
//! With transmit beamforming over `K` Rayleigh branches toward Bob the
//! post-beamforming SNR is `Gamma(K, rho_b)`; maximal-ratio combining over
//! `K_e` branches at Eve gives `Gamma(K_e, rho_e)`. Both are drawn as sums of
//! independent exponential branch powers. The two links are independent.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::ChannelPoint;

/// Distribution of one link's instantaneous SNR (linear scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum SnrLaw {
    /// Sum of `branches` i.i.d. exponential powers with mean `avg_snr` each.
    Gamma { branches: u32, avg_snr: f64 },
    /// Deterministic SNR.
    Fixed { snr: f64 },
}

impl SnrLaw {
    pub fn gamma(branches: u32, avg_snr: f64) -> Result<Self> {
        if branches == 0 {
            return Err(Error::Domain {
                name: "antenna count",
                value: 0.0,
                bound: "[1, inf)",
            });
        }
        if !(avg_snr.is_finite() && avg_snr > 0.0) {
            return Err(Error::Domain {
                name: "average SNR",
                value: avg_snr,
                bound: "(0, inf)",
            });
        }
        Ok(Self::Gamma { branches, avg_snr })
    }

    pub fn fixed(snr: f64) -> Result<Self> {
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(Error::Domain {
                name: "SNR",
                value: snr,
                bound: "[0, inf)",
            });
        }
        Ok(Self::Fixed { snr })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Gamma { branches, avg_snr } => Self::gamma(branches, avg_snr).map(drop),
            Self::Fixed { snr } => Self::fixed(snr).map(drop),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gamma { branches, avg_snr } => f64::from(branches) * avg_snr,
            Self::Fixed { snr } => snr,
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        Ok(match *self {
            Self::Gamma { branches, avg_snr } => regularized_gamma(branches, x / avg_snr).0,
            Self::Fixed { snr } => {
                if x >= snr {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// `P(X > x)`, computed without cancellation in the upper tail.
    pub fn survival(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        Ok(match *self {
            Self::Gamma { branches, avg_snr } => regularized_gamma(branches, x / avg_snr).1,
            Self::Fixed { snr } => {
                if x >= snr {
                    0.0
                } else {
                    1.0
                }
            }
        })
    }

    /// Density; a point mass has none and returns an error.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        match *self {
            Self::Gamma { branches, avg_snr } => {
                let t = x / avg_snr;
                if t == 0.0 {
                    return Ok(if branches == 1 { 1.0 / avg_snr } else { 0.0 });
                }
                let k = f64::from(branches);
                let log_density = (k - 1.0) * t.ln() - t - ln_factorial(branches - 1);
                Ok(log_density.exp() / avg_snr)
            }
            Self::Fixed { .. } => Err(Error::Invalid("a fixed SNR has no density".to_string())),
        }
    }

    /// Smallest `x` with `cdf(x) >= p`, for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                bound: "[0, 1)",
            });
        }
        match *self {
            Self::Fixed { snr } => Ok(snr),
            Self::Gamma { branches, avg_snr } => {
                if p == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = f64::from(branches).max(1.0);
                while regularized_gamma(branches, hi).0 < p {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if regularized_gamma(branches, mid).0 < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi * avg_snr)
            }
        }
    }

    #[inline]
    fn sample(&self, stream: &mut ChannelStream) -> f64 {
        match *self {
            Self::Gamma { branches, avg_snr } => {
                let mut total = 0.0;
                for _ in 0..branches {
                    total += stream.standard_exponential();
                }
                total * avg_snr
            }
            Self::Fixed { snr } => snr,
        }
    }
}

fn check_support(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "x",
            value: x,
            bound: "[0, inf]",
        })
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| f64::from(i).ln()).sum()
}

/// Regularized incomplete gamma `(P(k, t), Q(k, t))` for integer shape `k`.
fn regularized_gamma(k: u32, t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 1.0);
    }
    if t.is_infinite() {
        return (1.0, 0.0);
    }
    let kf = f64::from(k);
    if t < kf + 1.0 {
        // P = e^-t t^k / k! * sum_m t^m / ((k+1)...(k+m))
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0;
        while term > sum * 1e-17 {
            term *= t / (kf + m);
            sum += term;
            m += 1.0;
        }
        let p = (kf * t.ln() - t - ln_factorial(k)).exp() * sum;
        let p = p.min(1.0);
        (p, 1.0 - p)
    } else {
        // Q = e^-t sum_{j<k} t^j / j!
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..k {
            term *= t / f64::from(j);
            sum += term;
        }
        let q = ((-t).exp() * sum).min(1.0);
        (1.0 - q, q)
    }
}

/// Statistical description of both links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingScenario {
    pub main: SnrLaw,
    pub wiretap: SnrLaw,
}

impl FadingScenario {
    pub fn new(main: SnrLaw, wiretap: SnrLaw) -> Result<Self> {
        main.validate()?;
        wiretap.validate()?;
        Ok(Self { main, wiretap })
    }

    /// Rayleigh fading with `k_alice` beamforming antennas toward Bob and
    /// `k_eve` combining antennas at Eve; `rho_*` are per-branch average SNRs.
    pub fn rayleigh(rho_b: f64, rho_e: f64, k_alice: u32, k_eve: u32) -> Result<Self> {
        Ok(Self {
            main: SnrLaw::gamma(k_alice, rho_b)?,
            wiretap: SnrLaw::gamma(k_eve, rho_e)?,
        })
    }

    /// Degenerate scenario where both SNRs are fixed.
    pub fn point_mass(gamma_b: f64, gamma_e: f64) -> Result<Self> {
        Ok(Self {
            main: SnrLaw::fixed(gamma_b)?,
            wiretap: SnrLaw::fixed(gamma_e)?,
        })
    }

    pub fn cdf_gamma_b(&self, x: f64) -> Result<f64> {
        self.main.cdf(x)
    }

    pub fn pdf_gamma_b(&self, x: f64) -> Result<f64> {
        self.main.pdf(x)
    }

    pub fn cdf_gamma_e(&self, x: f64) -> Result<f64> {
        self.wiretap.cdf(x)
    }

    pub fn pdf_gamma_e(&self, x: f64) -> Result<f64> {
        self.wiretap.pdf(x)
    }
}

/// Seeded random stream for channel draws.
///
/// Each `(seed, stream_id)` pair selects an independent ChaCha8 keystream,
/// so disjoint sample blocks can be drawn in any order or on any thread and
/// still reproduce the same sequence.
#[derive(Debug, Clone)]
pub struct ChannelStream {
    rng: ChaCha8Rng,
}

impl ChannelStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { rng }
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn standard_exponential(&mut self) -> f64 {
        // 1 - u lies in (0, 1]; libm keeps the draw identical across platforms.
        -libm::log(1.0 - self.uniform())
    }
}

/// Draws one `(gamma_b, gamma_e)` realization; `gamma_b` first, then `gamma_e`.
#[inline]
pub fn sample_channel(scenario: &FadingScenario, stream: &mut ChannelStream) -> ChannelPoint {
    let gamma_b = scenario.main.sample(stream);
    let gamma_e = scenario.wiretap.sample(stream);
    ChannelPoint::new_unchecked(gamma_b, gamma_e)
}
