//! Finite-blocklength rate kernels: capacity, dispersion, the normal
//! approximation of the maximal coding rate, and the secrecy-rate bounds of
//! the Gaussian wiretap channel.
//!
//! Rates are in bits per channel use. Every function here is pure.

use serde::{Deserialize, Serialize};

use crate::error::{check_blocklength, check_probability, check_snr, Error, Result};
use crate::special::{q_inv, q_unchecked};

/// `(log2 e)^2`, the high-SNR limit of the dispersion.
pub const DISPERSION_LIMIT: f64 = std::f64::consts::LOG2_E * std::f64::consts::LOG2_E;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One realization of the legitimate (`gamma_b`) and eavesdropper
/// (`gamma_e`) instantaneous SNRs, both linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPoint {
    gamma_b: f64,
    gamma_e: f64,
}

impl ChannelPoint {
    pub fn new(gamma_b: f64, gamma_e: f64) -> Result<Self> {
        Ok(Self {
            gamma_b: check_snr("gamma_b", gamma_b)?,
            gamma_e: check_snr("gamma_e", gamma_e)?,
        })
    }

    pub fn from_db(gamma_b_db: f64, gamma_e_db: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma_b_db), db_to_linear(gamma_e_db))
    }

    /// Caller guarantees both values are finite and non-negative.
    #[inline]
    pub(crate) fn new_unchecked(gamma_b: f64, gamma_e: f64) -> Self {
        debug_assert!(gamma_b >= 0.0 && gamma_e >= 0.0);
        Self { gamma_b, gamma_e }
    }

    #[inline]
    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    #[inline]
    pub fn gamma_e(&self) -> f64 {
        self.gamma_e
    }

    /// `C(gamma_b) - C(gamma_e)`, negative when Eve has the better channel.
    pub fn secrecy_capacity(&self) -> f64 {
        capacity_unchecked(self.gamma_b) - capacity_unchecked(self.gamma_e)
    }
}

/// Validated operating point `(N, epsilon, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    blocklength: u32,
    epsilon: f64,
    delta: f64,
}

impl RatePoint {
    pub fn new(blocklength: u32, epsilon: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            blocklength: check_blocklength(blocklength)?,
            epsilon: check_probability("epsilon", epsilon)?,
            delta: check_probability("delta", delta)?,
        })
    }

    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn achievable(&self, ch: &ChannelPoint) -> f64 {
        achievable_secrecy_rate(self.blocklength, self.epsilon, self.delta, ch)
            .expect("validated rate point")
    }

    pub fn converse(&self, ch: &ChannelPoint) -> Result<f64> {
        converse_secrecy_rate(self.blocklength, self.epsilon, self.delta, ch)
    }
}

#[inline]
pub(crate) fn capacity_unchecked(gamma: f64) -> f64 {
    gamma.ln_1p() * std::f64::consts::LOG2_E
}

#[inline]
pub(crate) fn dispersion_unchecked(gamma: f64) -> f64 {
    let inv = 1.0 / (1.0 + gamma);
    DISPERSION_LIMIT * (1.0 - inv * inv)
}

/// `log2(1 + gamma)`.
pub fn capacity(gamma: f64) -> Result<f64> {
    Ok(capacity_unchecked(check_snr("gamma", gamma)?))
}

/// Complex AWGN channel dispersion `(log2 e)^2 (1 - (1 + gamma)^-2)`.
pub fn dispersion(gamma: f64) -> Result<f64> {
    Ok(dispersion_unchecked(check_snr("gamma", gamma)?))
}

/// Dispersion constants entering the wiretap bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiretapDispersions {
    /// Multiplies `Q^-1(epsilon)` in the achievability bound.
    pub reliability: f64,
    /// Multiplies `Q^-1(delta)` in the achievability bound.
    pub leakage: f64,
    /// Multiplies `Q^-1(epsilon + delta)` in the converse bound.
    pub converse: f64,
}

/// The single place where the wiretap dispersions are assigned.
#[inline]
pub fn wiretap_dispersions(ch: &ChannelPoint) -> WiretapDispersions {
    let main = dispersion_unchecked(ch.gamma_b);
    WiretapDispersions {
        reliability: main,
        leakage: dispersion_unchecked(ch.gamma_e),
        converse: main,
    }
}

/// Normal approximation of the maximal coding rate at blocklength `n` and
/// error probability `epsilon`, clamped at zero.
pub fn max_coding_rate(n: u32, epsilon: f64, gamma: f64) -> Result<f64> {
    let n = check_blocklength(n)?;
    let q = q_inv(epsilon)?;
    let gamma = check_snr("gamma", gamma)?;
    Ok(CodingRateModel::with_quantile(n, q).rate(gamma))
}

/// Precomputed `(N, Q^-1(epsilon))` for repeated evaluation of the maximal
/// coding rate across channel realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingRateModel {
    inv_sqrt_n: f64,
    q_eps: f64,
}

impl CodingRateModel {
    pub fn new(n: u32, epsilon: f64) -> Result<Self> {
        Ok(Self::with_quantile(check_blocklength(n)?, q_inv(epsilon)?))
    }

    fn with_quantile(n: u32, q_eps: f64) -> Self {
        Self {
            inv_sqrt_n: 1.0 / f64::from(n).sqrt(),
            q_eps,
        }
    }

    #[inline]
    pub fn rate(&self, gamma: f64) -> f64 {
        let r = capacity_unchecked(gamma)
            - (dispersion_unchecked(gamma)).sqrt() * self.inv_sqrt_n * self.q_eps;
        r.max(0.0)
    }
}

/// Precomputed quantiles for the secrecy-rate bounds at a fixed `(N, epsilon, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyRateModel {
    inv_sqrt_n: f64,
    q_eps: f64,
    q_delta: f64,
}

impl SecrecyRateModel {
    pub fn new(n: u32, epsilon: f64, delta: f64) -> Result<Self> {
        let n = check_blocklength(n)?;
        Ok(Self {
            inv_sqrt_n: 1.0 / f64::from(n).sqrt(),
            q_eps: q_inv(epsilon)?,
            q_delta: q_inv(delta)?,
        })
    }

    /// Achievability bound before clamping; may be negative.
    #[inline]
    pub fn achievable_unclamped(&self, ch: &ChannelPoint) -> f64 {
        let v = wiretap_dispersions(ch);
        ch.secrecy_capacity()
            - v.reliability.sqrt() * self.inv_sqrt_n * self.q_eps
            - v.leakage.sqrt() * self.inv_sqrt_n * self.q_delta
    }

    #[inline]
    pub fn achievable(&self, ch: &ChannelPoint) -> f64 {
        self.achievable_unclamped(ch).max(0.0)
    }
}

/// Lower (achievability) bound on the maximal secret communication rate.
pub fn achievable_secrecy_rate(n: u32, epsilon: f64, delta: f64, ch: &ChannelPoint) -> Result<f64> {
    Ok(SecrecyRateModel::new(n, epsilon, delta)?.achievable(ch))
}

/// Upper (converse) bound on the maximal secret communication rate.
pub fn converse_secrecy_rate(n: u32, epsilon: f64, delta: f64, ch: &ChannelPoint) -> Result<f64> {
    let n = check_blocklength(n)?;
    check_probability("epsilon", epsilon)?;
    check_probability("delta", delta)?;
    let q = q_inv(epsilon + delta).map_err(|_| Error::Domain {
        name: "epsilon + delta",
        value: epsilon + delta,
        bound: "(0, 1)",
    })?;
    let v = wiretap_dispersions(ch);
    let r = ch.secrecy_capacity() - (v.converse / f64::from(n)).sqrt() * q;
    Ok(r.max(0.0))
}

/// Decoding error probability at which the achievability bound equals `r0`,
/// for leakage constraint `delta_bar`. Cached form of [`decoding_error_prob`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodingErrorModel {
    n: f64,
    q_delta: f64,
}

impl DecodingErrorModel {
    pub fn new(n: u32, delta_bar: f64) -> Result<Self> {
        let n = check_blocklength(n)?;
        Ok(Self {
            n: f64::from(n),
            q_delta: q_inv(delta_bar)?,
        })
    }

    #[inline]
    pub fn error_probability(&self, r0: f64, ch: &ChannelPoint) -> f64 {
        let v = wiretap_dispersions(ch);
        let margin = ch.secrecy_capacity() - (v.leakage / self.n).sqrt() * self.q_delta - r0;
        if v.reliability == 0.0 {
            // Zero main-link dispersion: the Q argument saturates at +-inf.
            return if margin > 0.0 {
                0.0
            } else if margin < 0.0 {
                1.0
            } else {
                0.5
            };
        }
        q_unchecked((self.n / v.reliability).sqrt() * margin)
    }
}

/// `epsilon(gamma_b, gamma_e, delta_bar, r0)`: the error probability obtained by
/// inverting the achievability bound at rate `r0`.
///
/// A channel with `gamma_b = 0` has no dispersion; the result saturates to 0
/// or 1 by the sign of the rate margin (0.5 on a tie).
pub fn decoding_error_prob(r0: f64, n: u32, delta_bar: f64, ch: &ChannelPoint) -> Result<f64> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Error::Domain {
            name: "r0",
            value: r0,
            bound: "[0, inf)",
        });
    }
    Ok(DecodingErrorModel::new(n, delta_bar)?.error_probability(r0, ch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::q_func;
    use proptest::prelude::*;

    // Frozen from a 40-digit mpmath evaluation of the same closed forms.
    const CAP_10: f64 = 3.459_431_618_637_297;
    const DISP_10: f64 = 2.064_167_584_468_371;
    const RSTAR_1000: f64 = 3.319_032_750_938_087;
    const SECRECY_CAP: f64 = 1.402_058_410_030_502;
    const ACH_1000: f64 = 1.124_806_234_413_565;
    const CONV_1000: f64 = 1.271_294_567_966_697;
    const EPS_AT_R1: f64 = 2.653_235_581_402_072e-9;

    fn fig2_point() -> ChannelPoint {
        ChannelPoint::from_db(10.0, 5.0).unwrap()
    }

    #[test]
    fn db_conversion_is_exact() {
        let g = db_to_linear(5.0);
        assert!((g - 10f64.powf(0.5)).abs() <= f64::EPSILON * g);
        assert_eq!(db_to_linear(10.0), 10.0);
    }

    #[test]
    fn channel_point_rejects_bad_snr() {
        assert!(ChannelPoint::new(-1.0, 0.0).is_err());
        assert!(ChannelPoint::new(1.0, f64::NAN).is_err());
        assert!(ChannelPoint::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(0.0).unwrap(), 0.0);
        assert_eq!(capacity(1.0).unwrap(), 1.0);
        assert!((capacity(10.0).unwrap() - CAP_10).abs() < 1e-12);
        assert!(capacity(-0.1).is_err());
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(0.0).unwrap(), 0.0);
        assert!((dispersion(10.0).unwrap() - DISP_10).abs() < 1e-12);
        assert!((dispersion(1e12).unwrap() - 2.081_368_981_005_608).abs() < 1e-9);
        assert!(dispersion(1e300).unwrap() <= DISPERSION_LIMIT);
        assert!(dispersion(-1.0).is_err());
    }

    #[test]
    fn max_coding_rate_values() {
        assert_eq!(
            max_coding_rate(17, 0.5, 10.0).unwrap(),
            capacity(10.0).unwrap()
        );
        assert!((max_coding_rate(1000, 1e-3, 10.0).unwrap() - RSTAR_1000).abs() < 1e-10);
        assert!((max_coding_rate(100_000_000, 1e-3, 10.0).unwrap() - CAP_10).abs() < 1e-3);
        assert!(max_coding_rate(0, 1e-3, 10.0).is_err());
        assert!(max_coding_rate(10, 1.0, 10.0).is_err());
    }

    #[test]
    fn max_coding_rate_clamps_at_zero() {
        assert_eq!(max_coding_rate(1, 1e-9, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn achievable_values() {
        let ch = fig2_point();
        assert!((ch.secrecy_capacity() - SECRECY_CAP).abs() < 1e-12);
        let a = achievable_secrecy_rate(1000, 1e-3, 1e-3, &ch).unwrap();
        assert!((a - ACH_1000).abs() < 1e-10);
        let far = achievable_secrecy_rate(u32::MAX, 1e-3, 1e-3, &ch).unwrap();
        assert!((far - SECRECY_CAP).abs() < 1e-3);
    }

    #[test]
    fn achievable_is_zero_without_advantage() {
        let ch = ChannelPoint::new(7.0, 7.0).unwrap();
        for n in [1, 10, 1000, 1_000_000] {
            assert_eq!(achievable_secrecy_rate(n, 0.1, 0.2, &ch).unwrap(), 0.0);
        }
        let worse = ChannelPoint::new(1.0, 7.0).unwrap();
        assert_eq!(
            achievable_secrecy_rate(100, 1e-3, 1e-3, &worse).unwrap(),
            0.0
        );
    }

    #[test]
    fn converse_values() {
        let ch = fig2_point();
        let c = converse_secrecy_rate(1000, 1e-3, 1e-3, &ch).unwrap();
        assert!((c - CONV_1000).abs() < 1e-10);
        let at_half = converse_secrecy_rate(321, 0.2, 0.3, &ch).unwrap();
        assert_eq!(at_half, ch.secrecy_capacity());
        let a500 = achievable_secrecy_rate(500, 1e-3, 1e-3, &ch).unwrap();
        let c500 = converse_secrecy_rate(500, 1e-3, 1e-3, &ch).unwrap();
        assert!(c500 > a500);
    }

    #[test]
    fn converse_rejects_sum_at_one() {
        let ch = fig2_point();
        let err = converse_secrecy_rate(100, 0.6, 0.4, &ch).unwrap_err();
        assert!(matches!(
            err,
            Error::Domain {
                name: "epsilon + delta",
                ..
            }
        ));
    }

    #[test]
    fn decoding_error_values() {
        let ch = fig2_point();
        let eps = decoding_error_prob(1.0, 1000, 1e-3, &ch).unwrap();
        assert!((eps - EPS_AT_R1).abs() < 1e-15, "{eps}");

        let n = 700;
        let model = SecrecyRateModel::new(n, 0.01, 1e-3).unwrap();
        let r0 = model.achievable_unclamped(&ch);
        assert!(r0 > 0.0);
        let back = decoding_error_prob(r0, n, 1e-3, &ch).unwrap();
        assert!((back - 0.01).abs() < 1e-10);

        let v2 = dispersion(ch.gamma_e()).unwrap();
        let r_half = ch.secrecy_capacity() - (v2 / f64::from(n)).sqrt() * q_inv(1e-3).unwrap();
        assert!((decoding_error_prob(r_half, n, 1e-3, &ch).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn decoding_error_saturates_without_main_link() {
        let dead = ChannelPoint::new(0.0, 3.0).unwrap();
        for r0 in [0.0, 0.5, 4.0] {
            assert_eq!(decoding_error_prob(r0, 100, 1e-3, &dead).unwrap(), 1.0);
        }
        let silent = ChannelPoint::new(0.0, 0.0).unwrap();
        assert_eq!(decoding_error_prob(0.0, 100, 1e-3, &silent).unwrap(), 0.5);
        assert!(decoding_error_prob(-0.1, 100, 1e-3, &silent).is_err());
    }

    #[test]
    fn kernels_are_bit_reproducible() {
        let ch = ChannelPoint::new(12.345, 2.5).unwrap();
        let a = achievable_secrecy_rate(333, 1e-4, 1e-2, &ch).unwrap();
        let b = achievable_secrecy_rate(333, 1e-4, 1e-2, &ch).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn q_func_matches_error_model_argument() {
        // Cross-route: recompute the error probability through the public Q function.
        let ch = ChannelPoint::new(20.0, 2.0).unwrap();
        let (n, r0, d) = (400u32, 1.5, 1e-2);
        let v1 = dispersion(20.0).unwrap();
        let v2 = dispersion(2.0).unwrap();
        let arg = (f64::from(n) / v1).sqrt()
            * (ch.secrecy_capacity() - (v2 / f64::from(n)).sqrt() * q_inv(d).unwrap() - r0);
        let direct = q_func(arg).unwrap();
        assert_eq!(direct, decoding_error_prob(r0, n, d, &ch).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn bounds_are_ordered(
            n in 1u32..100_000,
            eps in 1e-8f64..0.49,
            delta in 1e-8f64..0.49,
            gb in 0.0f64..1e4,
            ge in 0.0f64..1e4,
        ) {
            let ch = ChannelPoint::new(gb, ge).unwrap();
            let a = achievable_secrecy_rate(n, eps, delta, &ch).unwrap();
            let c = converse_secrecy_rate(n, eps, delta, &ch).unwrap();
            prop_assert!(a <= c + 1e-12);
            prop_assert!(a <= ch.secrecy_capacity().max(0.0) + 1e-12);
        }

        #[test]
        fn capacity_and_dispersion_monotone(g in 0.0f64..1e6, d in 1e-9f64..1e3) {
            prop_assert!(capacity(g + d).unwrap() >= capacity(g).unwrap());
            prop_assert!(dispersion(g + d).unwrap() >= dispersion(g).unwrap());
            prop_assert!(dispersion(g).unwrap() < DISPERSION_LIMIT);
        }
    }

    proptest! {
        #[test]
        fn coding_rate_monotone(
            n in 1u32..50_000,
            dn in 1u32..1000,
            eps in 1e-8f64..0.49,
            g in 0.0f64..1e4,
            dg in 0.0f64..10.0,
        ) {
            let base = max_coding_rate(n, eps, g).unwrap();
            prop_assert!(max_coding_rate(n + dn, eps, g).unwrap() >= base);
            prop_assert!(max_coding_rate(n, eps, g + dg).unwrap() >= base);
            prop_assert!(max_coding_rate(n, (eps * 1.01).min(0.499), g).unwrap() >= base);
        }

        #[test]
        fn decoding_error_monotone(
            r0 in 0.0f64..6.0,
            dr in 1e-3f64..1.0,
            gb in 1.0f64..1e3,
            dg in 0.5f64..100.0,
            ge in 0.0f64..10.0,
        ) {
            let m = DecodingErrorModel::new(500, 1e-3).unwrap();
            let ch = ChannelPoint::new(gb, ge).unwrap();
            let e = m.error_probability(r0, &ch);
            prop_assume!(e > 1e-300 && e < 1.0 - 1e-15);
            prop_assert!(m.error_probability(r0 + dr, &ch) >= e);
            let better = ChannelPoint::new(gb + dg, ge).unwrap();
            prop_assert!(m.error_probability(r0, &better) <= e);
        }
    }
}
