//! Scenario files: strict TOML schema, validation and resolution into core types.
//!
//! SNR keys come in `_db` / `_linear` pairs; exactly one of each pair may be
//! given. Conversion to linear happens here and nowhere else.

use std::path::Path;

use fbsec_core::metrics::MAX_FEEDBACK_BITS;
use fbsec_core::optimize::SweepVariable;
use fbsec_core::rates::db_to_linear;
use fbsec_core::{ChannelPoint, CsiModel, FadingScenario, McBudget, SecurityConstraints};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    RateBounds,
    SecrecyThroughput,
    EffectiveThroughput,
    SopStudy,
    Optimize,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RateBounds => "rate-bounds",
            Self::SecrecyThroughput => "secrecy-throughput",
            Self::EffectiveThroughput => "effective-throughput",
            Self::SopStudy => "sop-study",
            Self::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub study: Option<Study>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub plan: PlanSection,
    #[serde(default)]
    pub constraints: ConstraintsSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub csi: Vec<CsiEntry>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_e_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_e_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_e_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_e_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_alice: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_eve: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: u32,
    pub stop: u32,
    pub step: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_bits: Option<u32>,
    /// Blocklength grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u32>>,
    /// Inclusive arithmetic blocklength range, appended to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<RangeSpec>,
    /// Payload grid for rate sweeps at a single `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_linear: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self) -> Vec<f64> {
        match self {
            Self::One(v) => vec![*v],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsSection {
    /// Reliability constraint; the decoding error probability for rate-bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_bar: Option<f64>,
    /// Secrecy constraint; a list gives one series per value (secrecy-throughput).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_bar: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiKind {
    Perfect,
    Quantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiEntry {
    pub kind: CsiKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveName {
    SecrecyThroughput,
    EffectiveThroughput,
    ReliableThroughput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub variable: SweepVariable,
    pub objective: ObjectiveName,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
    pub workers: Option<usize>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub study: Study,
    /// Echo of the configuration with defaults filled in and SNRs in linear form.
    pub echo: ScenarioFile,
    pub point: Option<ChannelPoint>,
    pub fading: Option<FadingScenario>,
    pub b_bits: Option<u32>,
    pub n_grid: Vec<u32>,
    pub b_grid: Vec<u32>,
    pub mu_grid: Vec<f64>,
    pub eps_bar: f64,
    pub delta_bars: Vec<f64>,
    pub zeta: f64,
    pub csi: Vec<CsiModel>,
    pub budget: McBudget,
    pub optimize: Option<OptimizeSection>,
}

impl Resolved {
    /// Constraints for the first (or only) `delta_bar`.
    pub fn constraints(&self) -> SecurityConstraints {
        self.constraints_at(self.delta_bars[0])
    }

    pub fn constraints_at(&self, delta_bar: f64) -> SecurityConstraints {
        SecurityConstraints::new(self.eps_bar, delta_bar, self.zeta).expect("validated constraints")
    }
}

pub fn parse_str(text: &str) -> Result<ScenarioFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(one_line(&e.to_string())))
}

/// Reads a scenario from a TOML file, or from the `scenario` field of a run manifest.
pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        #[derive(Deserialize)]
        struct Manifest {
            scenario: ScenarioFile,
        }
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(m.scenario);
    }
    parse_str(&text)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn snr_pair(
    issues: &mut Vec<String>,
    name: &str,
    db: Option<f64>,
    linear: Option<f64>,
    required: bool,
) -> Option<f64> {
    match (db, linear) {
        (Some(_), Some(_)) => {
            issues.push(format!(
                "channel.{name}: give {name}_db or {name}_linear, not both"
            ));
            None
        }
        (Some(d), None) if d.is_finite() => Some(db_to_linear(d)),
        (Some(d), None) => {
            issues.push(format!("channel.{name}_db = {d} must be finite"));
            None
        }
        (None, Some(l)) => Some(l),
        (None, None) => {
            if required {
                issues.push(format!(
                    "channel.{name}_db or channel.{name}_linear is required"
                ));
            }
            None
        }
    }
}

fn check_open_unit(issues: &mut Vec<String>, key: &str, v: f64) {
    if !(v > 0.0 && v < 1.0) {
        issues.push(format!("{key} = {v} must lie in (0, 1)"));
    }
}

fn require<T: Copy>(issues: &mut Vec<String>, key: &str, v: Option<T>) -> Option<T> {
    if v.is_none() {
        issues.push(format!("{key} is required"));
    }
    v
}

/// Validates the scenario and lists every violated invariant.
pub fn resolve(file: &ScenarioFile, overrides: &Overrides) -> Result<Resolved, Vec<String>> {
    let mut issues = Vec::new();
    let Some(study) = file.study else {
        return Err(vec!["study is required".to_string()]);
    };
    let mut echo = file.clone();
    let ch = &file.channel;

    // Channel.
    let (mut point, mut fading) = (None, None);
    echo.channel = ChannelSection::default();
    if study == Study::RateBounds {
        let gb = snr_pair(
            &mut issues,
            "gamma_b",
            ch.gamma_b_db,
            ch.gamma_b_linear,
            true,
        );
        let ge = snr_pair(
            &mut issues,
            "gamma_e",
            ch.gamma_e_db,
            ch.gamma_e_linear,
            true,
        );
        if let (Some(gb), Some(ge)) = (gb, ge) {
            match ChannelPoint::new(gb, ge) {
                Ok(p) => point = Some(p),
                Err(e) => issues.push(format!("channel: {e}")),
            }
        }
        echo.channel.gamma_b_linear = gb;
        echo.channel.gamma_e_linear = ge;
    } else {
        let rb = snr_pair(&mut issues, "rho_b", ch.rho_b_db, ch.rho_b_linear, true);
        let re = snr_pair(&mut issues, "rho_e", ch.rho_e_db, ch.rho_e_linear, true);
        let ka = ch.k_alice.unwrap_or(1);
        let ke = ch.k_eve.unwrap_or(1);
        if let (Some(rb), Some(re)) = (rb, re) {
            match FadingScenario::rayleigh(rb, re, ka, ke) {
                Ok(s) => fading = Some(s),
                Err(e) => issues.push(format!("channel: {e}")),
            }
        } else if ka == 0 || ke == 0 {
            issues.push("channel antenna counts must be >= 1".to_string());
        }
        echo.channel.rho_b_linear = rb;
        echo.channel.rho_e_linear = re;
        echo.channel.k_alice = Some(ka);
        echo.channel.k_eve = Some(ke);
    }

    // Plan grids.
    let plan = &file.plan;
    let mut n_grid = plan.n.clone().unwrap_or_default();
    if let Some(r) = plan.n_range {
        if r.step == 0 || r.start == 0 || r.stop < r.start {
            issues.push(format!(
                "plan.n_range needs 1 <= start <= stop and step >= 1 (got {}..={} step {})",
                r.start, r.stop, r.step
            ));
        } else {
            n_grid.extend((r.start..=r.stop).step_by(r.step as usize));
        }
    }
    if n_grid.contains(&0) {
        issues.push("plan.n values must be >= 1".to_string());
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        issues.push("plan.n grid must be strictly increasing".to_string());
    }
    echo.plan.n = (!n_grid.is_empty()).then(|| n_grid.clone());
    echo.plan.n_range = None;

    let mu_grid = match (&plan.mu_db, &plan.mu_linear) {
        (Some(_), Some(_)) => {
            issues.push("plan: give mu_db or mu_linear, not both".to_string());
            Vec::new()
        }
        (Some(db), None) => db.iter().map(|&d| db_to_linear(d)).collect(),
        (None, Some(lin)) => lin.clone(),
        (None, None) => Vec::new(),
    };
    if mu_grid.iter().any(|&m| !(m.is_finite() && m >= 0.0)) {
        issues.push("plan.mu values must be finite and >= 0".to_string());
    }
    if mu_grid.windows(2).any(|w| w[0] >= w[1]) {
        issues.push("plan.mu grid must be strictly increasing".to_string());
    }
    echo.plan.mu_db = None;
    echo.plan.mu_linear = (!mu_grid.is_empty()).then(|| mu_grid.clone());
    let b_grid = plan.b_grid.clone().unwrap_or_default();

    // Constraints.
    let c = &file.constraints;
    let delta_bars = c
        .delta_bar
        .as_ref()
        .map(OneOrMany::values)
        .unwrap_or_default();
    for (i, &d) in delta_bars.iter().enumerate() {
        check_open_unit(&mut issues, &format!("constraints.delta_bar[{i}]"), d);
    }
    if let Some(e) = c.eps_bar {
        check_open_unit(&mut issues, "constraints.eps_bar", e);
    }
    if let Some(z) = c.zeta {
        check_open_unit(&mut issues, "constraints.zeta", z);
    }
    if delta_bars.is_empty() {
        issues.push("constraints.delta_bar is required".to_string());
    } else if delta_bars.len() > 1 && study != Study::SecrecyThroughput {
        issues.push(format!(
            "constraints.delta_bar takes a list only for secrecy-throughput (study is {})",
            study.name()
        ));
    }

    // Unused constraints get a neutral placeholder; they are not echoed.
    let (eps_bar, zeta) = match study {
        Study::SecrecyThroughput => (c.eps_bar.unwrap_or(0.5), c.zeta.unwrap_or(0.5)),
        Study::RateBounds => {
            let e = require(&mut issues, "constraints.eps_bar", c.eps_bar).unwrap_or(0.5);
            if let Some(&d) = delta_bars.first() {
                if e + d >= 1.0 {
                    issues.push(format!(
                        "constraints.eps_bar + delta_bar = {} must be < 1",
                        e + d
                    ));
                }
            }
            (e, c.zeta.unwrap_or(0.5))
        }
        _ => (
            require(&mut issues, "constraints.eps_bar", c.eps_bar).unwrap_or(0.5),
            require(&mut issues, "constraints.zeta", c.zeta).unwrap_or(0.5),
        ),
    };

    // CSI.
    let mut csi = Vec::new();
    for (i, entry) in file.csi.iter().enumerate() {
        match (entry.kind, entry.feedback_bits) {
            (CsiKind::Perfect, None) => csi.push(CsiModel::Perfect),
            (CsiKind::Perfect, Some(_)) => issues.push(format!(
                "csi[{i}]: feedback_bits applies only to kind = \"quantized\""
            )),
            (CsiKind::Quantized, Some(b)) if (1..=MAX_FEEDBACK_BITS).contains(&b) => {
                csi.push(CsiModel::Quantized { feedback_bits: b })
            }
            (CsiKind::Quantized, Some(b)) => issues.push(format!(
                "csi[{i}].feedback_bits = {b} must lie in [1, {MAX_FEEDBACK_BITS}]"
            )),
            (CsiKind::Quantized, None) => {
                issues.push(format!("csi[{i}]: quantized CSI needs feedback_bits"))
            }
        }
    }
    if file.csi.is_empty() {
        csi = match study {
            Study::SopStudy => vec![
                CsiModel::Perfect,
                CsiModel::Quantized { feedback_bits: 4 },
                CsiModel::NON_ADAPTIVE,
            ],
            _ => vec![CsiModel::Perfect],
        };
    }
    echo.csi = csi
        .iter()
        .map(|m| match *m {
            CsiModel::Perfect => CsiEntry {
                kind: CsiKind::Perfect,
                feedback_bits: None,
            },
            CsiModel::Quantized { feedback_bits } => CsiEntry {
                kind: CsiKind::Quantized,
                feedback_bits: Some(feedback_bits),
            },
        })
        .collect();

    // Monte Carlo.
    let n_samples = overrides
        .n_samples
        .or(file.mc.n_samples)
        .unwrap_or(fbsec_core::mc::DEFAULT_SAMPLES);
    let seed = overrides.seed.or(file.mc.seed).unwrap_or(0);
    let workers = overrides.workers.or(file.mc.workers).unwrap_or(1);
    if n_samples < fbsec_core::mc::MIN_SAMPLES {
        issues.push(format!(
            "mc.n_samples = {n_samples} must be >= {}",
            fbsec_core::mc::MIN_SAMPLES
        ));
    }
    if workers == 0 {
        issues.push("mc.workers must be >= 1".to_string());
    }
    echo.mc = McSection {
        n_samples: Some(n_samples),
        seed: Some(seed),
        workers: Some(workers),
    };
    let budget = McBudget::new(n_samples, seed).with_workers(workers);

    // Study-specific requirements.
    let needs_b = matches!(
        study,
        Study::SecrecyThroughput | Study::EffectiveThroughput | Study::Optimize
    );
    if needs_b {
        require(&mut issues, "plan.b_bits", plan.b_bits);
    }
    match study {
        Study::RateBounds
        | Study::SecrecyThroughput
        | Study::EffectiveThroughput
        | Study::SopStudy => {
            if n_grid.is_empty() {
                issues.push("plan.n or plan.n_range is required".to_string());
            }
            if file.optimize.is_some() {
                issues.push(format!(
                    "[optimize] is only valid for study = \"optimize\" (study is {})",
                    study.name()
                ));
            }
        }
        Study::Optimize => {
            match file.optimize {
                None => issues.push("[optimize] section is required".to_string()),
                Some(o) => {
                    match o.variable {
                    SweepVariable::Blocklength if n_grid.is_empty() => {
                        issues.push("plan.n grid is required for a blocklength sweep".to_string())
                    }
                    SweepVariable::Rate | SweepVariable::Threshold if n_grid.len() != 1 => issues
                        .push("plan.n must hold exactly one blocklength for rate/threshold sweeps".to_string()),
                    _ => {}
                }
                    if o.variable == SweepVariable::Rate && b_grid.is_empty() {
                        issues.push("plan.b_grid is required for a rate sweep".to_string());
                    }
                    if o.variable == SweepVariable::Threshold && mu_grid.is_empty() {
                        issues.push(
                            "plan.mu_db or plan.mu_linear is required for a threshold sweep"
                                .to_string(),
                        );
                    }
                    if o.objective != ObjectiveName::ReliableThroughput
                        && o.variable == SweepVariable::Threshold
                    {
                        issues.push(
                            "threshold sweeps need objective = \"reliable-throughput\"".to_string(),
                        );
                    }
                }
            }
        }
    }
    if study == Study::SopStudy && mu_grid.is_empty() {
        issues.push("plan.mu_db or plan.mu_linear is required for sop-study".to_string());
    }
    if b_grid.windows(2).any(|w| w[0] >= w[1]) {
        issues.push("plan.b_grid must be strictly increasing".to_string());
    }

    echo.constraints = ConstraintsSection {
        eps_bar: c.eps_bar,
        delta_bar: c.delta_bar.clone(),
        zeta: c.zeta,
    };

    if !issues.is_empty() {
        return Err(issues);
    }
    Ok(Resolved {
        study,
        echo,
        point,
        fading,
        b_bits: plan.b_bits,
        n_grid,
        b_grid,
        mu_grid,
        eps_bar,
        delta_bars,
        zeta,
        csi,
        budget,
        optimize: file.optimize,
    })
}
