//! Secrecy metrics over fading: ergodic secrecy throughput, outage
//! probability with effective throughput, and the on-off secrecy outage
//! probability with reliable throughput under adaptive and quantized rate
//! selection.

use serde::{Deserialize, Serialize};

use crate::error::{check_blocklength, check_probability, Error, Result};
use crate::fading::{FadingScenario, SnrLaw};
use crate::mc::{
    estimate_conditional, estimate_mean, estimate_probability, McBudget, MetricEstimate,
};
use crate::rates::{ChannelPoint, CodingRateModel, DecodingErrorModel, SecrecyRateModel};

/// Largest supported quantizer resolution.
pub const MAX_FEEDBACK_BITS: u32 = 16;

/// Packet size, blocklength and on-off threshold. The coding rate is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPlan {
    b_bits: u32,
    n: u32,
    mu: f64,
}

impl TransmissionPlan {
    pub fn new(b_bits: u32, n: u32, mu: f64) -> Result<Self> {
        check_blocklength(n)?;
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::Domain {
                name: "mu",
                value: mu,
                bound: "[0, inf)",
            });
        }
        Ok(Self { b_bits, n, mu })
    }

    /// Always-transmit plan (`mu = 0`).
    pub fn always_on(b_bits: u32, n: u32) -> Result<Self> {
        Self::new(b_bits, n, 0.0)
    }

    pub fn b_bits(&self) -> u32 {
        self.b_bits
    }

    pub fn blocklength(&self) -> u32 {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `B / N` in bits per channel use.
    pub fn r0(&self) -> f64 {
        f64::from(self.b_bits) / f64::from(self.n)
    }

    pub fn with_blocklength(&self, n: u32) -> Result<Self> {
        Self::new(self.b_bits, n, self.mu)
    }

    pub fn with_payload(&self, b_bits: u32) -> Result<Self> {
        Self::new(b_bits, self.n, self.mu)
    }

    pub fn with_threshold(&self, mu: f64) -> Result<Self> {
        Self::new(self.b_bits, self.n, mu)
    }
}

/// Preset reliability, secrecy and outage constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityConstraints {
    eps_bar: f64,
    delta_bar: f64,
    zeta: f64,
}

impl SecurityConstraints {
    pub fn new(eps_bar: f64, delta_bar: f64, zeta: f64) -> Result<Self> {
        Ok(Self {
            eps_bar: check_probability("eps_bar", eps_bar)?,
            delta_bar: check_probability("delta_bar", delta_bar)?,
            zeta: check_probability("zeta", zeta)?,
        })
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn delta_bar(&self) -> f64 {
        self.delta_bar
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn with_delta_bar(&self, delta_bar: f64) -> Result<Self> {
        Self::new(self.eps_bar, delta_bar, self.zeta)
    }

    pub fn with_zeta(&self, zeta: f64) -> Result<Self> {
        Self::new(self.eps_bar, self.delta_bar, zeta)
    }
}

/// Main-channel state information available to the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CsiModel {
    /// Exact `gamma_b` per slot (adaptive coding).
    Perfect,
    /// `gamma_b` quantized to `feedback_bits`; one bit is the on-off decision
    /// alone, i.e. non-adaptive coding.
    Quantized { feedback_bits: u32 },
}

impl CsiModel {
    pub const NON_ADAPTIVE: CsiModel = CsiModel::Quantized { feedback_bits: 1 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Perfect => Ok(()),
            Self::Quantized { feedback_bits }
                if (1..=MAX_FEEDBACK_BITS).contains(&feedback_bits) =>
            {
                Ok(())
            }
            Self::Quantized { feedback_bits } => Err(Error::Domain {
                name: "feedback_bits",
                value: f64::from(feedback_bits),
                bound: "[1, 16]",
            }),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Perfect => "adaptive".to_string(),
            Self::Quantized { feedback_bits: 1 } => "non-adaptive".to_string(),
            Self::Quantized { feedback_bits } => format!("quantized-{feedback_bits}"),
        }
    }
}

fn require_always_on(plan: &TransmissionPlan) -> Result<()> {
    if plan.mu != 0.0 {
        return Err(Error::Invalid(format!(
            "this metric has no on-off gate; plan.mu must be 0 (got {})",
            plan.mu
        )));
    }
    Ok(())
}

/// Average decoding error probability at rate `R0 = B/N` under the secrecy constraint.
pub fn average_decoding_error(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<MetricEstimate> {
    let model = DecodingErrorModel::new(plan.n, constraints.delta_bar)?;
    let r0 = plan.r0();
    estimate_mean(|ch| model.error_probability(r0, ch), scenario, budget)
}

/// Ergodic secrecy throughput `R0 (1 - avg decoding error)`.
pub fn secrecy_throughput(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<MetricEstimate> {
    require_always_on(plan)?;
    let avg_error = average_decoding_error(plan, scenario, constraints, budget)?;
    let r0 = plan.r0();
    Ok(avg_error.affine(-r0, r0))
}

/// `P(achievable secrecy rate <= R0)` at the preset `(eps_bar, delta_bar)`.
pub fn outage_probability(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<MetricEstimate> {
    require_always_on(plan)?;
    let model = SecrecyRateModel::new(plan.n, constraints.eps_bar, constraints.delta_bar)?;
    let r0 = plan.r0();
    estimate_probability(|ch| model.achievable(ch) <= r0, scenario, budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveThroughput {
    /// `R0 (1 - p_out)`.
    pub throughput: MetricEstimate,
    pub outage: MetricEstimate,
    /// `p_out < zeta`.
    pub feasible: bool,
}

pub fn effective_throughput(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<EffectiveThroughput> {
    let outage = outage_probability(plan, scenario, constraints, budget)?;
    let r0 = plan.r0();
    Ok(EffectiveThroughput {
        throughput: outage.affine(-r0, r0),
        outage,
        feasible: outage.value < constraints.zeta,
    })
}

/// On-off transmission at a fixed rate: transmit when `gamma_b > mu` and the
/// rate is below the maximal coding rate at `eps_bar`.
#[derive(Debug, Clone, Copy)]
struct OnOffGate {
    mu: f64,
    coding: CodingRateModel,
}

impl OnOffGate {
    fn new(mu: f64, n: u32, eps_bar: f64) -> Result<Self> {
        Ok(Self {
            mu,
            coding: CodingRateModel::new(n, eps_bar)?,
        })
    }

    #[inline]
    fn transmits(&self, rate: f64, gamma_b: f64) -> bool {
        gamma_b > self.mu && rate < self.coding.rate(gamma_b)
    }
}

/// SOP at an arbitrary (not necessarily `B/N`) rate.
pub fn secrecy_outage_at_rate(
    rate: f64,
    n: u32,
    mu: f64,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<MetricEstimate> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Domain {
            name: "rate",
            value: rate,
            bound: "[0, inf)",
        });
    }
    let gate = OnOffGate::new(mu, n, constraints.eps_bar)?;
    let bound = SecrecyRateModel::new(n, constraints.eps_bar, constraints.delta_bar)?;
    estimate_conditional(
        // Compared against the unclamped bound so that at rate 0 the event is
        // exactly the clamp mass.
        |ch| rate > bound.achievable_unclamped(ch),
        |ch| gate.transmits(rate, ch.gamma_b()),
        scenario,
        budget,
    )
}

/// `P(R0 > achievable secrecy rate | transmission)` under on-off transmission.
pub fn secrecy_outage_probability(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<MetricEstimate> {
    secrecy_outage_at_rate(plan.r0(), plan.n, plan.mu, scenario, constraints, budget)
}

/// Fixed-rate on-off transmission at `R0 = B/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffThroughput {
    /// `R0 * P(transmit)`.
    pub throughput: MetricEstimate,
    pub sop: MetricEstimate,
    /// `p_so < zeta`.
    pub feasible: bool,
}

/// Throughput of fixed-rate on-off transmission with the plan's own `R0`,
/// together with its secrecy outage probability.
pub fn fixed_rate_throughput(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<OnOffThroughput> {
    let gate = OnOffGate::new(plan.mu, plan.n, constraints.eps_bar)?;
    let r0 = plan.r0();
    let sop = secrecy_outage_probability(plan, scenario, constraints, budget)?;
    let tx = estimate_probability(|ch| gate.transmits(r0, ch.gamma_b()), scenario, budget)?;
    Ok(OnOffThroughput {
        throughput: tx.affine(r0, 0.0),
        sop,
        feasible: sop.value < constraints.zeta,
    })
}

/// Per-realization rate design: the largest rate whose secrecy outage over
/// the unknown `gamma_e` stays at or below `zeta` for a known `gamma_b`.
///
/// Since the achievable rate decreases in `gamma_e`, this is the achievable
/// rate evaluated at the `(1 - zeta)` quantile of `gamma_e`.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveRateRule {
    bound: SecrecyRateModel,
    eve_quantile: f64,
}

impl AdaptiveRateRule {
    pub fn new(n: u32, wiretap: &SnrLaw, constraints: &SecurityConstraints) -> Result<Self> {
        Ok(Self {
            bound: SecrecyRateModel::new(n, constraints.eps_bar, constraints.delta_bar)?,
            eve_quantile: wiretap.quantile(1.0 - constraints.zeta)?,
        })
    }

    #[inline]
    pub fn rate(&self, gamma_b: f64) -> f64 {
        self.bound
            .achievable(&ChannelPoint::new_unchecked(gamma_b, self.eve_quantile))
    }
}

/// Rate as a function of the transmitter's knowledge of `gamma_b`.
#[derive(Debug, Clone)]
enum RateSchedule {
    Fixed(f64),
    Adaptive(AdaptiveRateRule),
    /// Ascending lower bin edges and the rate designed at each edge.
    Binned {
        edges: Vec<f64>,
        rates: Vec<f64>,
    },
}

impl RateSchedule {
    fn build(
        csi: &CsiModel,
        n: u32,
        mu: f64,
        scenario: &FadingScenario,
        constraints: &SecurityConstraints,
    ) -> Result<Self> {
        csi.validate()?;
        let rule = AdaptiveRateRule::new(n, &scenario.wiretap, constraints)?;
        match *csi {
            CsiModel::Perfect => Ok(Self::Adaptive(rule)),
            CsiModel::Quantized { feedback_bits: 1 } => Ok(Self::Fixed(rule.rate(mu))),
            CsiModel::Quantized { feedback_bits } => {
                let bins = (1u32 << feedback_bits) - 1;
                let base = scenario.main.cdf(mu)?;
                let mut edges = Vec::with_capacity(bins as usize);
                edges.push(mu);
                for j in 1..bins {
                    let p = base + (1.0 - base) * f64::from(j) / f64::from(bins);
                    let edge = if p < 1.0 {
                        scenario.main.quantile(p)?
                    } else {
                        f64::INFINITY
                    };
                    edges.push(edge.max(mu));
                }
                let rates = edges.iter().map(|&e| rule.rate(e)).collect();
                Ok(Self::Binned { edges, rates })
            }
        }
    }

    #[inline]
    fn rate(&self, gamma_b: f64) -> f64 {
        match self {
            Self::Fixed(r) => *r,
            Self::Adaptive(rule) => rule.rate(gamma_b),
            Self::Binned { edges, rates } => {
                let idx = edges.partition_point(|&e| e <= gamma_b);
                if idx == 0 {
                    0.0
                } else {
                    rates[idx - 1]
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliableThroughput {
    /// Average delivered rate per slot; silent slots count as zero.
    pub throughput: MetricEstimate,
    /// Achieved SOP over transmitting slots; `None` if no slot transmits.
    pub sop: Option<MetricEstimate>,
    /// The SOP estimate is not significantly above `zeta` (within 3 standard errors).
    pub feasible: bool,
    pub diagnostic: Option<String>,
}

/// Reliable throughput of the on-off scheme with rates chosen from the given CSI.
///
/// The plan supplies `N` and `mu`; the per-slot rate comes from the
/// [`AdaptiveRateRule`] at the exact `gamma_b` (perfect CSI) or at the lower
/// edge of the quantization bin containing it. With one feedback bit this is
/// the fixed rate designed at `mu`.
pub fn reliable_throughput(
    plan: &TransmissionPlan,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    csi: &CsiModel,
    budget: &McBudget,
) -> Result<ReliableThroughput> {
    let schedule = RateSchedule::build(csi, plan.n, plan.mu, scenario, constraints)?;
    let gate = OnOffGate::new(plan.mu, plan.n, constraints.eps_bar)?;
    let bound = SecrecyRateModel::new(plan.n, constraints.eps_bar, constraints.delta_bar)?;
    let transmits = |gamma_b: f64| -> Option<f64> {
        let rate = schedule.rate(gamma_b);
        (rate > 0.0 && gate.transmits(rate, gamma_b)).then_some(rate)
    };

    let throughput = match schedule {
        RateSchedule::Fixed(rate) => {
            estimate_probability(|ch| transmits(ch.gamma_b()).is_some(), scenario, budget)?
                .affine(rate, 0.0)
        }
        _ => estimate_mean(
            |ch| transmits(ch.gamma_b()).unwrap_or(0.0),
            scenario,
            budget,
        )?,
    };

    if throughput.value == 0.0 {
        return Ok(ReliableThroughput {
            throughput,
            sop: None,
            feasible: false,
            diagnostic: Some(format!(
                "no positive rate satisfies the SOP constraint zeta = {} at N = {}, mu = {}",
                constraints.zeta, plan.n, plan.mu
            )),
        });
    }

    let sop = estimate_conditional(
        |ch| schedule.rate(ch.gamma_b()) > bound.achievable_unclamped(ch),
        |ch| transmits(ch.gamma_b()).is_some(),
        scenario,
        budget,
    )?;
    Ok(ReliableThroughput {
        throughput,
        feasible: sop.value - 3.0 * sop.std_error < constraints.zeta,
        sop: Some(sop),
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{
        achievable_secrecy_rate, db_to_linear, decoding_error_prob, max_coding_rate,
    };

    fn constraints() -> SecurityConstraints {
        SecurityConstraints::new(1e-3, 1e-3, 0.3).unwrap()
    }

    fn budget() -> McBudget {
        McBudget::new(20_000, 5)
    }

    fn fig5() -> FadingScenario {
        FadingScenario::rayleigh(db_to_linear(15.0), db_to_linear(10.0), 8, 1).unwrap()
    }

    #[test]
    fn plan_and_constraint_validation() {
        assert!(TransmissionPlan::new(10, 0, 0.0).is_err());
        assert!(TransmissionPlan::new(10, 10, -1.0).is_err());
        assert!(TransmissionPlan::new(10, 10, f64::NAN).is_err());
        let p = TransmissionPlan::new(500, 1500, 0.0).unwrap();
        assert_eq!(p.r0() * 1500.0, 500.0);
        assert!(SecurityConstraints::new(1.5, 0.1, 0.1).is_err());
        assert!(SecurityConstraints::new(0.1, 0.0, 0.1).is_err());
        assert!(SecurityConstraints::new(0.1, 0.1, 1.0).is_err());
        assert!(CsiModel::Quantized { feedback_bits: 0 }.validate().is_err());
        assert!(CsiModel::Quantized { feedback_bits: 17 }
            .validate()
            .is_err());
    }

    #[test]
    fn on_off_plans_are_rejected_by_ergodic_metrics() {
        let s = fig5();
        let p = TransmissionPlan::new(500, 1000, 1.0).unwrap();
        assert!(secrecy_throughput(&p, &s, &constraints(), &budget()).is_err());
        assert!(outage_probability(&p, &s, &constraints(), &budget()).is_err());
    }

    #[test]
    fn zero_rate_gives_zero_throughput() {
        let p = TransmissionPlan::always_on(0, 100).unwrap();
        let t = secrecy_throughput(&p, &fig5(), &constraints(), &budget()).unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn point_mass_secrecy_throughput() {
        let (gb, ge) = (30.0, 2.0);
        let s = FadingScenario::point_mass(gb, ge).unwrap();
        let p = TransmissionPlan::always_on(600, 200).unwrap();
        let c = constraints();
        let t = secrecy_throughput(&p, &s, &c, &budget()).unwrap();
        let eps = decoding_error_prob(3.0, 200, 1e-3, &ChannelPoint::new(gb, ge).unwrap()).unwrap();
        assert!(eps > 1e-6 && eps < 0.5, "{eps}");
        assert_eq!(t.value, 3.0 * (1.0 - eps));
        assert_eq!(t.std_error, 0.0);
        assert!(t.value < p.r0());
    }

    #[test]
    fn point_mass_outage() {
        let ch = ChannelPoint::new(30.0, 2.0).unwrap();
        let s = FadingScenario::point_mass(30.0, 2.0).unwrap();
        let rs = achievable_secrecy_rate(200, 1e-3, 1e-3, &ch).unwrap();
        let below = TransmissionPlan::always_on(((rs - 0.05) * 200.0) as u32, 200).unwrap();
        let above = TransmissionPlan::always_on(((rs + 0.05) * 200.0).ceil() as u32, 200).unwrap();
        let c = constraints();
        assert_eq!(
            outage_probability(&below, &s, &c, &budget()).unwrap().value,
            0.0
        );
        assert_eq!(
            outage_probability(&above, &s, &c, &budget()).unwrap().value,
            1.0
        );

        let e = effective_throughput(&below, &s, &c, &budget()).unwrap();
        assert_eq!(e.throughput.value, below.r0());
        assert!(e.feasible);
        let e = effective_throughput(&above, &s, &c, &budget()).unwrap();
        assert_eq!(e.throughput.value, 0.0);
        assert!(!e.feasible);
    }

    #[test]
    fn zero_rate_outage_is_clamp_mass() {
        let s = FadingScenario::rayleigh(2.0, 2.0, 1, 1).unwrap();
        let c = constraints();
        let b = McBudget::new(50_000, 8);
        let p = TransmissionPlan::always_on(0, 300).unwrap();
        let out = outage_probability(&p, &s, &c, &b).unwrap();
        let model = SecrecyRateModel::new(300, 1e-3, 1e-3).unwrap();
        let clamp =
            estimate_probability(|ch| model.achievable_unclamped(ch) <= 0.0, &s, &b).unwrap();
        assert_eq!(out.value, clamp.value);
    }

    #[test]
    fn point_mass_sop() {
        let c = constraints();
        let n = 400;
        // R_s > 0 here, so a zero rate never outages.
        let s = FadingScenario::point_mass(30.0, 2.0).unwrap();
        let p = TransmissionPlan::new(0, n, 0.0).unwrap();
        assert_eq!(
            secrecy_outage_probability(&p, &s, &c, &budget())
                .unwrap()
                .value,
            0.0
        );
        // Eve stronger than Bob: the unclamped bound is negative, full clamp mass.
        let s = FadingScenario::point_mass(2.0, 30.0).unwrap();
        assert_eq!(
            secrecy_outage_probability(&p, &s, &c, &budget())
                .unwrap()
                .value,
            1.0
        );
        // Rate between the secrecy bound and the coding rate: always outage.
        let s = FadingScenario::point_mass(30.0, 2.0).unwrap();
        let ch = ChannelPoint::new(30.0, 2.0).unwrap();
        let rs = achievable_secrecy_rate(n, 1e-3, 1e-3, &ch).unwrap();
        let p = TransmissionPlan::new((rs * f64::from(n)).ceil() as u32 + 1, n, 0.0).unwrap();
        assert!(p.r0() < max_coding_rate(n, 1e-3, 30.0).unwrap());
        assert_eq!(
            secrecy_outage_probability(&p, &s, &c, &budget())
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn sop_vanishes_for_high_threshold() {
        let main = SnrLaw::gamma(1, 10.0).unwrap();
        let s = FadingScenario::new(main, SnrLaw::fixed(0.5).unwrap()).unwrap();
        let p = TransmissionPlan::new(200, 100, 60.0).unwrap();
        let sop = secrecy_outage_probability(&p, &s, &constraints(), &McBudget::new(2_000_000, 1))
            .unwrap();
        assert_eq!(sop.value, 0.0);
    }

    #[test]
    fn sop_needs_transmissions() {
        let s = FadingScenario::rayleigh(1.0, 1.0, 1, 1).unwrap();
        let p = TransmissionPlan::new(100, 100, 40.0).unwrap();
        let err = secrecy_outage_probability(&p, &s, &constraints(), &budget()).unwrap_err();
        assert!(matches!(err, Error::InsufficientConditioning { .. }));
    }

    #[test]
    fn fixed_rate_point_mass() {
        let s = FadingScenario::point_mass(30.0, 2.0).unwrap();
        let c = constraints();
        let p = TransmissionPlan::new(300, 200, 10.0).unwrap();
        let f = fixed_rate_throughput(&p, &s, &c, &budget()).unwrap();
        assert_eq!(f.throughput.value, 1.5);
        assert_eq!(f.sop.value, 0.0);
        assert!(f.feasible);
        let silent = TransmissionPlan::new(300, 200, 40.0).unwrap();
        assert!(fixed_rate_throughput(&silent, &s, &c, &budget()).is_err());
    }

    #[test]
    fn one_bit_equals_non_adaptive_fixed_rate() {
        let s = fig5();
        let c = constraints();
        let p = TransmissionPlan::new(500, 300, 100.0).unwrap();
        let one = reliable_throughput(&p, &s, &c, &CsiModel::NON_ADAPTIVE, &budget()).unwrap();
        let rule = AdaptiveRateRule::new(300, &s.wiretap, &c).unwrap();
        let rate = rule.rate(100.0);
        let tx = estimate_probability(
            |ch| ch.gamma_b() > 100.0 && rate < max_coding_rate(300, 1e-3, ch.gamma_b()).unwrap(),
            &s,
            &budget(),
        )
        .unwrap();
        assert_eq!(one.throughput.value, rate * tx.value);
        assert!(one.feasible);
    }

    #[test]
    fn point_mass_adaptive_rate() {
        let s = FadingScenario::new(SnrLaw::fixed(50.0).unwrap(), SnrLaw::gamma(1, 3.0).unwrap())
            .unwrap();
        let c = constraints();
        let p = TransmissionPlan::new(1, 500, 10.0).unwrap();
        let r = reliable_throughput(&p, &s, &c, &CsiModel::Perfect, &budget()).unwrap();
        let q = 3.0 * (1.0f64 / 0.3).ln();
        let expected =
            achievable_secrecy_rate(500, 1e-3, 1e-3, &ChannelPoint::new(50.0, q).unwrap()).unwrap();
        assert!((r.throughput.value - expected).abs() < 1e-12);
        assert_eq!(r.throughput.std_error, 0.0);
        let sop = r.sop.unwrap();
        assert!((sop.value - 0.3).abs() < 3.0 * sop.std_error);
        assert!(r.feasible);
    }

    #[test]
    fn hopeless_channel_yields_zero_throughput_diagnostic() {
        let s = FadingScenario::point_mass(1.0, 50.0).unwrap();
        let p = TransmissionPlan::new(100, 200, 0.0).unwrap();
        let r = reliable_throughput(&p, &s, &constraints(), &CsiModel::Perfect, &budget()).unwrap();
        assert_eq!(r.throughput.value, 0.0);
        assert!(r.sop.is_none());
        assert!(r.diagnostic.is_some());
        assert!(!r.feasible);
    }

    #[test]
    fn schedule_ordering_per_sample() {
        let s = fig5();
        let c = constraints();
        let mu = 50.0;
        let adaptive = RateSchedule::build(&CsiModel::Perfect, 800, mu, &s, &c).unwrap();
        let q4 = RateSchedule::build(&CsiModel::Quantized { feedback_bits: 4 }, 800, mu, &s, &c)
            .unwrap();
        let q1 = RateSchedule::build(&CsiModel::NON_ADAPTIVE, 800, mu, &s, &c).unwrap();
        if let RateSchedule::Binned { edges, .. } = &q4 {
            assert_eq!(edges.len(), 15);
            assert_eq!(edges[0], mu);
            assert!(edges.windows(2).all(|w| w[0] < w[1]));
        } else {
            panic!("expected bins");
        }
        for i in 0..2000 {
            let g = mu + 0.5 * f64::from(i);
            let (a, b, o) = (adaptive.rate(g), q4.rate(g), q1.rate(g));
            assert!(a >= b && b >= o, "gamma_b = {g}: {a} {b} {o}");
        }
        assert_eq!(q4.rate(mu * 0.99), 0.0);
    }
}
