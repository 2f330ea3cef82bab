//! Study runners. Each produces one results table plus warnings and a JSON summary.

use std::collections::BTreeMap;

use fbsec_core::metrics::{
    average_decoding_error, effective_throughput, fixed_rate_throughput, secrecy_throughput,
};
use fbsec_core::optimize::{
    argmax_feasible, sweep, Objective, SweepRow, SweepSpec, SweepVariable, Verdict,
};
use fbsec_core::rates::{achievable_secrecy_rate, converse_secrecy_rate};
use fbsec_core::{
    CsiModel, Error, FadingScenario, MetricEstimate, SecurityConstraints, TransmissionPlan,
};
use serde_json::{json, Value};

use crate::config::{ObjectiveName, Resolved, Study};
use crate::CliError;

/// Relative precision below which a stochastic cell triggers a warning.
pub const PRECISION_TARGET: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub table: Table,
    pub warnings: Vec<String>,
    pub summary: Value,
    /// Set when an optimization found no feasible point anywhere.
    pub infeasible: Option<String>,
}

/// Tracks imprecise estimates per column for the end-of-run warning.
#[derive(Default)]
struct Precision {
    flagged: BTreeMap<&'static str, (usize, usize)>,
    worst_ratio: f64,
}

impl Precision {
    fn record(&mut self, column: &'static str, e: &MetricEstimate) {
        let entry = self.flagged.entry(column).or_default();
        entry.1 += 1;
        if e.is_imprecise(PRECISION_TARGET) {
            entry.0 += 1;
            if e.value != 0.0 {
                let ratio = 3.0 * e.std_error / (PRECISION_TARGET * e.value.abs());
                self.worst_ratio = self.worst_ratio.max(ratio);
            }
        }
    }

    fn warnings(&self, n_samples: u64) -> Vec<String> {
        let suggested = if self.worst_ratio.is_finite() && self.worst_ratio > 1.0 {
            let factor = (self.worst_ratio * self.worst_ratio).ceil().min(1e6);
            (n_samples as f64 * factor) as u64
        } else {
            n_samples.saturating_mul(4)
        };
        self.flagged
            .iter()
            .filter(|(_, &(bad, _))| bad > 0)
            .map(|(col, &(bad, total))| {
                format!(
                    "{col}: {bad} of {total} rows have 3*stderr above 1% of the value; \
                     consider --samples {suggested}"
                )
            })
            .collect()
    }
}

fn estimate_cells(e: &MetricEstimate) -> [Cell; 2] {
    [Cell::Num(e.value), Cell::Num(e.std_error)]
}

fn missing() -> [Cell; 2] {
    [Cell::Num(f64::NAN), Cell::Num(f64::NAN)]
}

pub fn run(r: &Resolved) -> Result<StudyOutput, CliError> {
    match r.study {
        Study::RateBounds => rate_bounds(r),
        Study::SecrecyThroughput => secrecy_throughput_study(r),
        Study::EffectiveThroughput => effective_throughput_study(r),
        Study::SopStudy => sop_study(r),
        Study::Optimize => optimize_study(r),
    }
}

fn fading(r: &Resolved) -> &FadingScenario {
    r.fading.as_ref().expect("fading scenario resolved")
}

fn b_bits(r: &Resolved) -> u32 {
    r.b_bits.expect("payload resolved")
}

fn rate_bounds(r: &Resolved) -> Result<StudyOutput, CliError> {
    let ch = r.point.expect("channel point resolved");
    let delta = r.delta_bars[0];
    let cs = ch.secrecy_capacity();
    let mut table = Table {
        header: vec!["N", "achievable", "converse", "capacity_gap"],
        rows: Vec::new(),
    };
    for &n in &r.n_grid {
        let ach = achievable_secrecy_rate(n, r.eps_bar, delta, &ch)?;
        let conv = converse_secrecy_rate(n, r.eps_bar, delta, &ch)?;
        table.rows.push(vec![
            Cell::Int(n.into()),
            Cell::Num(ach),
            Cell::Num(conv),
            Cell::Num(cs - ach),
        ]);
    }
    Ok(StudyOutput {
        table,
        warnings: Vec::new(),
        summary: json!({ "secrecy_capacity": cs }),
        infeasible: None,
    })
}

fn summarize(verdict: &Verdict, rows: &[SweepRow]) -> Value {
    match verdict {
        Verdict::Infeasible => json!({ "feasible": false }),
        Verdict::Optimal(o) => json!({
            "feasible": true,
            "value": o.value,
            "r0": rows[o.index].plan.r0(),
            "objective": o.estimate.value,
            "objective_stderr": o.estimate.std_error,
            "tie": o.tie,
            "tied_values": o.tied_values,
        }),
    }
}

fn secrecy_throughput_study(r: &Resolved) -> Result<StudyOutput, CliError> {
    let s = fading(r);
    let b = b_bits(r);
    let mut precision = Precision::default();
    let mut table = Table {
        header: vec![
            "delta_bar",
            "N",
            "r0",
            "avg_error",
            "avg_error_stderr",
            "throughput",
            "throughput_stderr",
            "n_samples",
            "seed",
        ],
        rows: Vec::new(),
    };
    let mut optima = Vec::new();
    for &delta_bar in &r.delta_bars {
        let c = r.constraints_at(delta_bar);
        let mut rows = Vec::new();
        for &n in &r.n_grid {
            let plan = TransmissionPlan::always_on(b, n)?;
            let err = average_decoding_error(&plan, s, &c, &r.budget)?;
            let t = secrecy_throughput(&plan, s, &c, &r.budget)?;
            precision.record("throughput", &t);
            let mut row = vec![
                Cell::Num(delta_bar),
                Cell::Int(n.into()),
                Cell::Num(plan.r0()),
            ];
            row.extend(estimate_cells(&err));
            row.extend(estimate_cells(&t));
            row.extend([Cell::Int(t.n_samples), Cell::Int(t.seed)]);
            table.rows.push(row);
            rows.push(SweepRow {
                value: n.into(),
                plan,
                objective: t,
                constraint: None,
                feasible: true,
                diagnostic: None,
            });
        }
        let verdict = argmax_feasible(&rows, SweepVariable::Blocklength);
        let mut summary = summarize(&verdict, &rows);
        summary["delta_bar"] = json!(delta_bar);
        optima.push(summary);
    }
    Ok(StudyOutput {
        table,
        warnings: precision.warnings(r.budget.n_samples),
        summary: json!({ "optimum_blocklength": optima }),
        infeasible: None,
    })
}

fn effective_throughput_study(r: &Resolved) -> Result<StudyOutput, CliError> {
    let s = fading(r);
    let b = b_bits(r);
    let c = r.constraints();
    let mut precision = Precision::default();
    let mut table = Table {
        header: vec![
            "N",
            "r0",
            "p_out",
            "p_out_stderr",
            "throughput",
            "throughput_stderr",
            "n_samples",
            "seed",
            "feasible",
        ],
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for &n in &r.n_grid {
        let plan = TransmissionPlan::always_on(b, n)?;
        let e = effective_throughput(&plan, s, &c, &r.budget)?;
        precision.record("throughput", &e.throughput);
        let mut row = vec![Cell::Int(n.into()), Cell::Num(plan.r0())];
        row.extend(estimate_cells(&e.outage));
        row.extend(estimate_cells(&e.throughput));
        row.extend([
            Cell::Int(e.throughput.n_samples),
            Cell::Int(e.throughput.seed),
            Cell::Flag(e.feasible),
        ]);
        table.rows.push(row);
        rows.push(SweepRow {
            value: n.into(),
            plan,
            objective: e.throughput,
            constraint: Some(e.outage),
            feasible: e.feasible,
            diagnostic: None,
        });
    }
    let verdict = argmax_feasible(&rows, SweepVariable::Blocklength);
    let mut warnings = precision.warnings(r.budget.n_samples);
    let infeasible_count = rows.iter().filter(|row| !row.feasible).count();
    if infeasible_count == rows.len() {
        warnings.push(format!("no blocklength meets p_out < zeta = {}", r.zeta));
    }
    Ok(StudyOutput {
        table,
        warnings,
        summary: json!({
            "optimum_blocklength": summarize(&verdict, &rows),
            "infeasible_points": infeasible_count,
        }),
        infeasible: None,
    })
}

/// One scheme of the on-off comparison.
#[derive(Debug, Clone, Copy)]
enum Scheme {
    Csi(CsiModel),
    /// Fixed rate `B/N` from the plan.
    FixedRate,
}

impl Scheme {
    fn label(&self) -> String {
        match self {
            Self::Csi(m) => m.label(),
            Self::FixedRate => "fixed-rate".to_string(),
        }
    }
}

/// Evaluates one on-off point. Too few transmitting slots to estimate the
/// SOP leaves the point infeasible with a diagnostic instead of aborting.
fn on_off_row(
    scheme: Scheme,
    plan: &TransmissionPlan,
    s: &FadingScenario,
    c: &SecurityConstraints,
    r: &Resolved,
) -> Result<SweepRow, CliError> {
    let outcome = match scheme {
        Scheme::Csi(csi) => {
            let spec = SweepSpec {
                variable: SweepVariable::Threshold,
                grid: vec![plan.mu()],
                objective: Objective::ReliableThroughput { csi },
                constraints: *c,
            };
            sweep(&spec, s, plan, &r.budget).map(|mut rows| rows.remove(0))
        }
        Scheme::FixedRate => fixed_rate_throughput(plan, s, c, &r.budget).map(|f| SweepRow {
            value: plan.mu(),
            plan: *plan,
            objective: f.throughput,
            constraint: Some(f.sop),
            feasible: f.feasible,
            diagnostic: None,
        }),
    };
    match outcome {
        Ok(row) => Ok(row),
        Err(e @ Error::InsufficientConditioning { .. }) => Ok(SweepRow {
            value: plan.mu(),
            plan: *plan,
            objective: MetricEstimate::exact(f64::NAN, &r.budget),
            constraint: None,
            feasible: false,
            diagnostic: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn sop_study(r: &Resolved) -> Result<StudyOutput, CliError> {
    let s = fading(r);
    let c = r.constraints();
    let mut schemes: Vec<Scheme> = r.csi.iter().copied().map(Scheme::Csi).collect();
    if r.b_bits.is_some() {
        schemes.push(Scheme::FixedRate);
    }
    let mut precision = Precision::default();
    let mut warnings = Vec::new();
    let mut table = Table {
        header: vec![
            "N",
            "scheme",
            "mu",
            "throughput",
            "throughput_stderr",
            "p_so",
            "p_so_stderr",
            "n_samples",
            "seed",
            "feasible",
            "selected",
            "tie",
        ],
        rows: Vec::new(),
    };
    let mut optima = Vec::new();
    for &n in &r.n_grid {
        for scheme in &schemes {
            let mut rows = Vec::new();
            for &mu in &r.mu_grid {
                let plan = TransmissionPlan::new(r.b_bits.unwrap_or(0), n, mu)?;
                let row = on_off_row(*scheme, &plan, s, &c, r)?;
                if let Some(d) = &row.diagnostic {
                    warnings.push(format!("N = {n}, {}, mu = {mu}: {d}", scheme.label()));
                } else {
                    precision.record("throughput", &row.objective);
                }
                rows.push(row);
            }
            let verdict = argmax_feasible(&rows, SweepVariable::Threshold);
            let (chosen, tie) = match &verdict {
                Verdict::Optimal(o) => (Some(o.index), o.tie),
                Verdict::Infeasible => (None, false),
            };
            for (i, row) in rows.iter().enumerate() {
                let mut cells = vec![
                    Cell::Int(n.into()),
                    Cell::Text(scheme.label()),
                    Cell::Num(row.value),
                ];
                cells.extend(estimate_cells(&row.objective));
                cells.extend(row.constraint.as_ref().map_or_else(missing, estimate_cells));
                cells.extend([
                    Cell::Int(row.objective.n_samples),
                    Cell::Int(row.objective.seed),
                    Cell::Flag(row.feasible),
                    Cell::Flag(chosen == Some(i)),
                    Cell::Flag(chosen == Some(i) && tie),
                ]);
                table.rows.push(cells);
            }
            let mut summary = summarize(&verdict, &rows);
            summary["N"] = json!(n);
            summary["scheme"] = json!(scheme.label());
            optima.push(summary);
        }
    }
    warnings.extend(precision.warnings(r.budget.n_samples));
    Ok(StudyOutput {
        table,
        warnings,
        summary: json!({ "optimum_threshold": optima }),
        infeasible: None,
    })
}

fn optimize_study(r: &Resolved) -> Result<StudyOutput, CliError> {
    let s = fading(r);
    let o = r.optimize.expect("optimize section resolved");
    let b = b_bits(r);
    let c = r.constraints();
    let csi = r.csi[0];
    let objective = match o.objective {
        ObjectiveName::SecrecyThroughput => Objective::SecrecyThroughput,
        ObjectiveName::EffectiveThroughput => Objective::EffectiveThroughput,
        ObjectiveName::ReliableThroughput => Objective::ReliableThroughput { csi },
    };
    let n0 = r.n_grid[0];
    let grid: Vec<f64> = match o.variable {
        SweepVariable::Blocklength => r.n_grid.iter().map(|&n| n.into()).collect(),
        SweepVariable::Rate => r
            .b_grid
            .iter()
            .map(|&bb| f64::from(bb) / f64::from(n0))
            .collect(),
        SweepVariable::Threshold => r.mu_grid.clone(),
    };
    let spec = SweepSpec {
        variable: o.variable,
        grid,
        objective,
        constraints: c,
    };
    let base = TransmissionPlan::always_on(b, n0)?;
    let problems = spec.violations(s, &base);
    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }
    let rows = sweep(&spec, s, &base, &r.budget)?;
    let verdict = argmax_feasible(&rows, o.variable);
    let mut precision = Precision::default();
    let variable = match o.variable {
        SweepVariable::Blocklength => "N",
        SweepVariable::Rate => "r0",
        SweepVariable::Threshold => "mu",
    };
    let chosen = match &verdict {
        Verdict::Optimal(opt) => Some(opt.index),
        Verdict::Infeasible => None,
    };
    let mut table = Table {
        header: vec![
            "variable",
            "value",
            "r0",
            "objective",
            "objective_stderr",
            "constraint",
            "constraint_stderr",
            "n_samples",
            "seed",
            "feasible",
            "selected",
        ],
        rows: Vec::new(),
    };
    let mut warnings = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        precision.record("objective", &row.objective);
        if let Some(d) = &row.diagnostic {
            warnings.push(format!("{variable} = {}: {d}", row.value));
        }
        let mut cells = vec![
            Cell::Text(variable.to_string()),
            Cell::Num(row.value),
            Cell::Num(row.plan.r0()),
        ];
        cells.extend(estimate_cells(&row.objective));
        cells.extend(row.constraint.as_ref().map_or_else(missing, estimate_cells));
        cells.extend([
            Cell::Int(row.objective.n_samples),
            Cell::Int(row.objective.seed),
            Cell::Flag(row.feasible),
            Cell::Flag(chosen == Some(i)),
        ]);
        table.rows.push(cells);
    }
    warnings.extend(precision.warnings(r.budget.n_samples));
    let infeasible = chosen
        .is_none()
        .then(|| format!("no grid point satisfies the constraint (zeta = {})", r.zeta));
    Ok(StudyOutput {
        table,
        warnings,
        summary: json!({ "optimum": summarize(&verdict, &rows) }),
        infeasible,
    })
}
