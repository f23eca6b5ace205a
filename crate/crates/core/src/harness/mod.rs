//! Seeded Monte Carlo experiment runner: configures channels, detectors
//! and attacks, sweeps parameter grids with per-trial substreams, and
//! emits CSV/JSON result rows.

mod emit;
mod runners;

pub use emit::{emit, OutputFormat};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("infeasible experiment: {0}")]
    Infeasible(String),
}

impl HarnessError {
    /// Process exit code: 1 config, 2 numerical, 3 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Infeasible(_) => 3,
        }
    }
}

impl From<crate::attacks::AttackError> for HarnessError {
    fn from(e: crate::attacks::AttackError) -> Self {
        use crate::attacks::AttackError::*;
        match &e {
            InfeasibleTarget(_) | DomainGuard { .. } => HarnessError::Infeasible(e.to_string()),
            _ => HarnessError::Numerical(e.to_string()),
        }
    }
}

impl From<crate::channel::ChannelError> for HarnessError {
    fn from(e: crate::channel::ChannelError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<crate::detectors::DetectError> for HarnessError {
    fn from(e: crate::detectors::DetectError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<crate::statdist::StatError> for HarnessError {
    fn from(e: crate::statdist::StatError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Fig2,
    Fig3,
    Custom,
}

impl ExperimentId {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "table1" => Self::Table1,
            "table2" => Self::Table2,
            "table3" => Self::Table3,
            "table4" => Self::Table4,
            "table5" => Self::Table5,
            "fig2" => Self::Fig2,
            "fig3" => Self::Fig3,
            "custom" => Self::Custom,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
            Self::Table4 => "table4",
            Self::Table5 => "table5",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Custom => "custom",
        }
    }
}

/// Experiment configuration. dB/dBm fields are converted to linear once at
/// resolve time; everything downstream is linear.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// RIS elements
    pub n: usize,
    /// transmit antennas (MISO paths)
    pub m: usize,
    /// symbols per fading block
    pub k: usize,
    /// phase-shift resolution bits
    pub b: u8,
    /// fading blocks per moment-detector decision
    pub t: usize,
    pub p_dbm: f64,
    pub sigma_w2_dbm: f64,
    pub eps_h_db: f64,
    pub eps_g_db: f64,
    /// per-element cascaded CSI error variance (linear channel units)
    pub sigma_e2: f64,
    pub rho_grid: Vec<f64>,
    /// detection-probability targets paired with rho_grid (table1) or
    /// swept against it (fig2)
    pub xi_grid: Vec<f64>,
    pub a_glr_grid: Vec<f64>,
    /// run-length floors for fig3
    pub tau_grid: Vec<f64>,
    /// (κ₁, κ₂) tolerance multipliers for the policy attack
    pub kappa_grid: Vec<(f64, f64)>,
    pub eps_ks_grid: Vec<f64>,
    pub nu_ks_grid: Vec<f64>,
    /// KS critical value (configuration, not derived)
    pub iota: f64,
    pub trials: usize,
    /// restore paper-scale trial counts
    pub full: bool,
    pub seed: u64,
    /// Gaussian-randomization samples per design
    pub sdr_trials: usize,
    /// sampled channel states for the policy LP
    pub states: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentId::Custom,
            n: 64,
            m: 2,
            k: 50,
            b: 2,
            t: 100,
            p_dbm: 30.0,
            sigma_w2_dbm: -10.0,
            eps_h_db: 0.0,
            eps_g_db: 0.0,
            sigma_e2: 0.0,
            rho_grid: vec![0.05, 0.10, 0.15],
            xi_grid: vec![0.53, 0.57, 0.60],
            a_glr_grid: vec![0.01, 0.015, 0.02],
            tau_grid: vec![50.0, 100.0, 150.0, 200.0],
            kappa_grid: vec![(0.10, 0.10), (0.20, 0.20), (0.30, 0.30), (0.40, 0.40)],
            eps_ks_grid: vec![0.02, 0.04],
            nu_ks_grid: vec![0.10, 0.15, 0.20, 0.25, 0.30, 0.35],
            iota: 0.230,
            trials: 2000,
            full: false,
            seed: 7,
            sdr_trials: 1000,
            states: 100,
        }
    }
}

impl ExperimentConfig {
    /// Defaults per experiment, including the calibrated link scales.
    pub fn default_for(id: ExperimentId) -> Self {
        let mut cfg = Self { experiment: id, ..Self::default() };
        match id {
            ExperimentId::Table1 | ExperimentId::Fig2 => {
                cfg.n = 64;
                cfg.k = 50;
                cfg.eps_h_db = -33.6;
                cfg.eps_g_db = -33.6;
                if id == ExperimentId::Fig2 {
                    cfg.xi_grid = vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
                    cfg.trials = 400;
                }
            }
            ExperimentId::Table2 | ExperimentId::Fig3 => {
                cfg.n = 64;
                cfg.k = 50;
                cfg.eps_h_db = 3.0;
                cfg.eps_g_db = 3.0;
                cfg.trials = if id == ExperimentId::Table2 { 2000 } else { 200 };
            }
            ExperimentId::Table3 | ExperimentId::Table5 => {
                cfg.n = 8;
                cfg.b = 2;
                cfg.eps_h_db = -17.7;
                cfg.eps_g_db = -17.7;
                cfg.states = 100;
                if id == ExperimentId::Table5 {
                    cfg.kappa_grid = vec![(0.56, 0.52), (0.61, 0.58)];
                    cfg.trials = 400;
                }
            }
            ExperimentId::Table4 => {
                cfg.n = 64;
                cfg.k = 100;
                cfg.eps_h_db = -17.9;
                cfg.eps_g_db = -17.9;
                cfg.sigma_e2 = 1.3e-4;
            }
            ExperimentId::Custom => {}
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.n == 0 || self.k == 0 {
            return Err(HarnessError::Config("n and k must be >= 1".into()));
        }
        let grids: [(&str, bool); 4] = [
            ("rho_grid", self.rho_grid.is_empty()),
            ("a_glr_grid", self.a_glr_grid.is_empty()),
            ("kappa_grid", self.kappa_grid.is_empty()),
            ("nu_ks_grid", self.nu_ks_grid.is_empty()),
        ];
        for (name, empty) in grids {
            if empty {
                return Err(HarnessError::Config(format!("{name} must be nonempty")));
            }
        }
        Ok(())
    }

    /// Linear-unit link parameters (single conversion point for dB fields).
    pub fn resolve(&self) -> LinkParams {
        let p = 10f64.powf(self.p_dbm / 10.0);
        let sigma_w2 = 10f64.powf(self.sigma_w2_dbm / 10.0);
        LinkParams {
            p_tx: p,
            sigma_w2,
            eps_h: 10f64.powf(self.eps_h_db / 10.0),
            eps_g: 10f64.powf(self.eps_g_db / 10.0),
            kappa_bar: p / sigma_w2,
        }
    }

    /// Trial count with the paper-scale restore flag applied.
    pub fn effective_trials(&self) -> usize {
        if self.full {
            self.trials.max(10_000)
        } else {
            self.trials
        }
    }
}

/// Linear-power link parameters after the one-time dB conversion.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    pub p_tx: f64,
    pub sigma_w2: f64,
    pub eps_h: f64,
    pub eps_g: f64,
    pub kappa_bar: f64,
}

/// One sweep-point metric with its Monte Carlo standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub metric: String,
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl ResultRow {
    pub fn new(
        experiment: ExperimentId,
        params: &[(&str, String)],
        metric: &str,
        value: f64,
        std_error: f64,
        trials: usize,
    ) -> Self {
        Self {
            experiment: experiment.name().to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            metric: metric.to_string(),
            value,
            std_error,
            trials,
        }
    }
}

/// Run the configured experiment. Deterministic for a fixed seed.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    config.validate()?;
    match config.experiment {
        ExperimentId::Table1 => runners::run_table1(config),
        ExperimentId::Table2 => runners::run_table2(config),
        ExperimentId::Table3 => runners::run_table3(config),
        ExperimentId::Table4 => runners::run_table4(config),
        ExperimentId::Table5 => runners::run_table5(config),
        ExperimentId::Fig2 => runners::run_fig2(config),
        ExperimentId::Fig3 => runners::run_fig3(config),
        ExperimentId::Custom => runners::run_table1(config),
    }
}

/// Ratio-of-means estimate `mean(num)/mean(den)` with its influence-
/// function standard error; the workhorse for rate-decrease metrics.
pub(crate) fn ratio_of_means(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let n = num.len() as f64;
    let mn: f64 = num.iter().sum::<f64>() / n;
    let md: f64 = den.iter().sum::<f64>() / n;
    let r = mn / md;
    let var: f64 = num
        .iter()
        .zip(den)
        .map(|(&a, &b)| {
            let inf = (a - r * b) / md;
            inf * inf
        })
        .sum::<f64>()
        / (n * (n - 1.0).max(1.0));
    (r, var.sqrt())
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n * (n - 1.0));
    (mean, var.sqrt())
}
