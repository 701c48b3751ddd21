//! Reproducible experiments: outcome sampling, distinguishability masses,
//! consistency decay, the expected-divergence bound and redundancy curves.

mod config;
pub mod decl;
mod runs;
mod sampling;

pub use config::{EstimatorKind, ExperimentConfig, ExperimentKind};
pub use runs::{bound_run, consistency_run, markov_run, redundancy_run, run};
pub use sampling::{distinguishability_mass, markov_check, sample_words, DistinguishabilityRelation, MarkovCheck};

use serde::{Deserialize, Serialize};

/// Replica label of rows computed by exact enumeration.
pub const EXACT: &str = "exact";

pub const CSV_HEADER: &str = "experiment,n,replica,metric,value,base,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pass,
    Fail,
    /// A hypothesis of the checked statement did not hold.
    Inconclusive,
}

impl RunStatus {
    /// 0 pass, 2 failed assertion, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 2,
            RunStatus::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    /// Replica index, or [`EXACT`].
    pub replica: String,
    pub metric: String,
    pub value: f64,
    /// `bits`, `nats` or `none`.
    pub base: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub status: RunStatus,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

impl RunResult {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        RunResult {
            metadata: Metadata {
                experiment: cfg.experiment.tag().into(),
                config_hash: cfg.hash(),
                seed: cfg.seed,
                version: env!("CARGO_PKG_VERSION").into(),
                status: RunStatus::Pass,
                notes: Vec::new(),
            },
            rows: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, n: usize, replica: impl ToString, metric: impl Into<String>, value: f64, base: &str) {
        self.rows.push(Row {
            n,
            replica: replica.to_string(),
            metric: metric.into(),
            value,
            base: base.into(),
        });
    }

    pub fn status(&self) -> RunStatus {
        self.metadata.status
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.metadata.experiment, r.n, r.replica, r.metric, r.value, r.base, self.metadata.seed
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run results serialize")
    }

    /// Values of `metric` at level `n`, in row order.
    pub fn values(&self, metric: &str, n: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.n == n)
            .map(|r| r.value)
            .collect()
    }

    /// The single exact value of `metric` at level `n`.
    pub fn exact(&self, metric: &str, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.n == n && r.replica == EXACT)
            .map(|r| r.value)
    }

    /// Median of `metric` at level `n` (mean of the middle pair for even
    /// counts).
    pub fn median(&self, metric: &str, n: usize) -> Option<f64> {
        let mut v = self.values(metric, n);
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
    }
}
