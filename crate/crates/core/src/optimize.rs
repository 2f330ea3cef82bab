//! Grid sweeps over blocklength, payload/rate or threshold, feasible argmax
//! with noise-aware tie handling, and bisection for the largest fixed rate
//! meeting the SOP constraint.
//!
//! Every grid point reuses the same [`McBudget`], so all points see the same
//! channel draws (common random numbers).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::FadingScenario;
use crate::mc::{McBudget, MetricEstimate};
use crate::metrics::{
    effective_throughput, reliable_throughput, secrecy_outage_at_rate, secrecy_throughput,
    CsiModel, SecurityConstraints, TransmissionPlan,
};
use crate::rates::{capacity, CodingRateModel};

/// Bisection tolerance on the rate, bits per channel use.
pub const RATE_TOLERANCE: f64 = 1e-4;

/// Upper-tail probability of `gamma_b` used to bound plausible rates.
const PLAUSIBLE_TAIL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// `N` with `B` fixed, so `R0 = B/N` moves with it.
    Blocklength,
    /// `R0 = B/N` at fixed `N`; grid values are rates and must be whole
    /// payloads `B` at that `N`.
    Rate,
    /// On-off threshold `mu` (linear SNR).
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "metric")]
pub enum Objective {
    SecrecyThroughput,
    EffectiveThroughput,
    ReliableThroughput { csi: CsiModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub objective: Objective,
    pub constraints: SecurityConstraints,
}

impl SweepSpec {
    /// Checks the grid against the base plan; returns every violation found.
    pub fn violations(&self, scenario: &FadingScenario, base: &TransmissionPlan) -> Vec<String> {
        let mut out = Vec::new();
        if self.grid.is_empty() {
            out.push("grid is empty".to_string());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            out.push("grid contains a non-finite value".to_string());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            out.push("grid is not strictly increasing".to_string());
        }
        match self.variable {
            SweepVariable::Blocklength => {
                if self
                    .grid
                    .iter()
                    .any(|&v| v.fract() != 0.0 || v < 1.0 || v > f64::from(u32::MAX))
                {
                    out.push("blocklength grid must hold integers >= 1".to_string());
                }
                let n_min = min_plausible_blocklength(base.b_bits(), scenario);
                if let Some(&first) = self.grid.first() {
                    if first < n_min {
                        out.push(format!(
                            "blocklength {first} is below B / C_max = {n_min:.3} (rate above any plausible capacity)"
                        ));
                    }
                }
            }
            SweepVariable::Rate => {
                let n = f64::from(base.blocklength());
                for &r in &self.grid {
                    let b = r * n;
                    if r < 0.0 || (b - b.round()).abs() > 1e-9 * b.abs().max(1.0) {
                        out.push(format!("rate {r} is not a whole payload at N = {n}"));
                    }
                }
            }
            SweepVariable::Threshold => {
                if self.grid.iter().any(|&v| v < 0.0) {
                    out.push("threshold grid must be >= 0".to_string());
                }
            }
        }
        if matches!(
            self.objective,
            Objective::SecrecyThroughput | Objective::EffectiveThroughput
        ) && self.variable == SweepVariable::Threshold
        {
            out.push("ergodic and outage objectives have no threshold".to_string());
        }
        if let Objective::ReliableThroughput { csi } = self.objective {
            if let Err(e) = csi.validate() {
                out.push(e.to_string());
            }
        }
        out
    }

    fn plan_at(&self, base: &TransmissionPlan, value: f64) -> Result<TransmissionPlan> {
        match self.variable {
            SweepVariable::Blocklength => base.with_blocklength(value as u32),
            SweepVariable::Rate => {
                base.with_payload((value * f64::from(base.blocklength())).round() as u32)
            }
            SweepVariable::Threshold => base.with_threshold(value),
        }
    }
}

/// Smallest blocklength whose rate `B/N` does not exceed the capacity at the
/// extreme upper tail of `gamma_b`.
pub fn min_plausible_blocklength(b_bits: u32, scenario: &FadingScenario) -> f64 {
    let top = scenario
        .main
        .quantile(1.0 - PLAUSIBLE_TAIL)
        .unwrap_or(f64::INFINITY);
    let c_max = capacity(top).unwrap_or(f64::INFINITY);
    if c_max > 0.0 {
        f64::from(b_bits) / c_max
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub plan: TransmissionPlan,
    pub objective: MetricEstimate,
    /// The constrained probability: `p_out` or the achieved SOP.
    pub constraint: Option<MetricEstimate>,
    pub feasible: bool,
    pub diagnostic: Option<String>,
}

/// Evaluates the objective at every grid point. Infeasible points stay in the table.
pub fn sweep(
    spec: &SweepSpec,
    scenario: &FadingScenario,
    base_plan: &TransmissionPlan,
    budget: &McBudget,
) -> Result<Vec<SweepRow>> {
    let problems = spec.violations(scenario, base_plan);
    if !problems.is_empty() {
        return Err(Error::Invalid(problems.join("; ")));
    }
    spec.grid
        .iter()
        .map(|&value| {
            let plan = spec.plan_at(base_plan, value)?;
            let c = &spec.constraints;
            let row = match spec.objective {
                Objective::SecrecyThroughput => SweepRow {
                    value,
                    plan,
                    objective: secrecy_throughput(&plan, scenario, c, budget)?,
                    constraint: None,
                    feasible: true,
                    diagnostic: None,
                },
                Objective::EffectiveThroughput => {
                    let e = effective_throughput(&plan, scenario, c, budget)?;
                    SweepRow {
                        value,
                        plan,
                        objective: e.throughput,
                        constraint: Some(e.outage),
                        feasible: e.feasible,
                        diagnostic: None,
                    }
                }
                Objective::ReliableThroughput { csi } => {
                    let r = reliable_throughput(&plan, scenario, c, &csi, budget)?;
                    SweepRow {
                        value,
                        plan,
                        objective: r.throughput,
                        constraint: r.sop,
                        feasible: r.feasible,
                        diagnostic: r.diagnostic,
                    }
                }
            };
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub index: usize,
    pub value: f64,
    pub estimate: MetricEstimate,
    /// Other feasible rows overlapped the best within one combined standard error.
    pub tie: bool,
    /// Grid values of every row in the tie, ascending.
    pub tied_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Optimal(Optimum),
    Infeasible,
}

/// Best feasible row. Rows within one combined standard error of the best
/// are a tie, broken toward the smallest blocklength, the smallest threshold
/// or the largest rate.
pub fn argmax_feasible(rows: &[SweepRow], variable: SweepVariable) -> Verdict {
    let feasible: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].feasible).collect();
    let Some(&best) = feasible.iter().max_by(|&&a, &&b| {
        rows[a]
            .objective
            .value
            .total_cmp(&rows[b].objective.value)
            .then(b.cmp(&a))
    }) else {
        return Verdict::Infeasible;
    };
    let top = rows[best].objective;
    let tied: Vec<usize> = feasible
        .into_iter()
        .filter(|&i| {
            let e = rows[i].objective;
            let combined = (top.std_error.powi(2) + e.std_error.powi(2)).sqrt();
            top.value - e.value <= combined
        })
        .collect();
    let chosen = match variable {
        SweepVariable::Blocklength | SweepVariable::Threshold => *tied
            .iter()
            .min_by(|&&a, &&b| rows[a].value.total_cmp(&rows[b].value))
            .expect("best row is tied with itself"),
        SweepVariable::Rate => *tied
            .iter()
            .max_by(|&&a, &&b| rows[a].value.total_cmp(&rows[b].value))
            .expect("best row is tied with itself"),
    };
    let mut tied_values: Vec<f64> = tied.iter().map(|&i| rows[i].value).collect();
    tied_values.sort_by(f64::total_cmp);
    Verdict::Optimal(Optimum {
        index: chosen,
        value: rows[chosen].value,
        estimate: rows[chosen].objective,
        tie: tied.len() > 1,
        tied_values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateDesign {
    /// Largest fixed rate found, with its SOP estimate.
    Rate { rate: f64, sop: MetricEstimate },
    /// The constraint fails even at the smallest positive rate.
    ZeroRate,
}

/// Largest fixed rate whose on-off SOP at blocklength `n` and threshold `mu`
/// stays at or below `zeta`, by bisection to [`RATE_TOLERANCE`].
///
/// Rates at which too few slots pass the on-off gate to estimate the SOP
/// count as infeasible, so as `zeta -> 1` the result approaches the
/// reliability-gate limit.
pub fn optimal_rate_bisect(
    n: u32,
    mu: f64,
    scenario: &FadingScenario,
    constraints: &SecurityConstraints,
    budget: &McBudget,
) -> Result<RateDesign> {
    let zeta = constraints.zeta();
    let check = |rate: f64| -> Result<Option<MetricEstimate>> {
        match secrecy_outage_at_rate(rate, n, mu, scenario, constraints, budget) {
            Ok(sop) if sop.value <= zeta => Ok(Some(sop)),
            Ok(_) | Err(Error::InsufficientConditioning { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let top = scenario.main.quantile(1.0 - PLAUSIBLE_TAIL)?;
    let mut hi = CodingRateModel::new(n, constraints.eps_bar())?.rate(top);
    let mut lo = RATE_TOLERANCE.min(hi);
    let Some(mut lo_sop) = check(lo)? else {
        return Ok(RateDesign::ZeroRate);
    };
    if let Some(sop) = check(hi)? {
        return Ok(RateDesign::Rate { rate: hi, sop });
    }
    while hi - lo > RATE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        match check(mid)? {
            Some(sop) => {
                lo = mid;
                lo_sop = sop;
            }
            None => hi = mid,
        }
    }
    Ok(RateDesign::Rate {
        rate: lo,
        sop: lo_sop,
    })
}
