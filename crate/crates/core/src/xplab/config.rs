use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::decl::{ModelDecl, QDecl, SourceDecl, StateDecl};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Consistency,
    Bound,
    Redundancy,
    Markov,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Bound => "bound",
            ExperimentKind::Redundancy => "redundancy",
            ExperimentKind::Markov => "markov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    #[default]
    TwoPart,
    /// Predictive state of a mixture source.
    Laplace,
}

fn one() -> usize {
    1
}

/// Configuration shared by all experiments; which fields are required
/// depends on `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_state: Option<StateDecl>,
    /// Mixture source: the predictor for consistency runs, the reference
    /// for markov runs, the universal source for redundancy runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDecl>,
    #[serde(default)]
    pub estimator: EstimatorKind,
    #[serde(default)]
    pub competitors: Vec<SourceDecl>,
    #[serde(default)]
    pub q: QDecl,
    pub n_schedule: Vec<usize>,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_schedule.is_empty() {
            return Err(Error::config("n_schedule", "empty schedule"));
        }
        for (i, w) in self.n_schedule.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::config(format!("n_schedule[{}]", i + 1), "schedule must be strictly ascending"));
            }
        }
        if self.replicas < 1 {
            return Err(Error::config("replicas", "need at least one replica"));
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::config(format!("deltas[{i}]"), format!("delta = {d} must be positive")));
            }
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 1.0) {
                return Err(Error::config("alpha", format!("alpha = {a} must exceed 1")));
            }
        }
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::config(field, format!("required for {} runs", self.experiment.tag())))
            }
        };
        match self.experiment {
            ExperimentKind::Consistency => {
                need(self.true_state.is_some(), "true_state")?;
                match self.estimator {
                    EstimatorKind::TwoPart => need(self.model.is_some(), "model")?,
                    EstimatorKind::Laplace => need(self.source.is_some(), "source")?,
                }
                if !self.competitors.is_empty() {
                    need(!self.deltas.is_empty(), "deltas")?;
                }
            }
            ExperimentKind::Bound => {
                need(self.true_state.is_some(), "true_state")?;
                need(self.model.is_some(), "model")?;
                need(self.alpha.is_some(), "alpha")?;
            }
            ExperimentKind::Redundancy => {
                need(self.true_state.is_some(), "true_state")?;
                need(self.source.is_some(), "source")?;
            }
            ExperimentKind::Markov => {
                need(self.source.is_some(), "source")?;
                need(!self.competitors.is_empty(), "competitors")?;
                need(!self.deltas.is_empty(), "deltas")?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUND: &str = r#"{"experiment":"bound","true_state":{"model":"example","theta":0.2},
        "model":{"thetas":[0.2,0.8],"code_weights":[0.5,0.25]},"alpha":2,"n_schedule":[2,3]}"#;

    #[test]
    fn parses_and_hashes() {
        let a = ExperimentConfig::from_json(BOUND).unwrap();
        let b = ExperimentConfig::from_json(BOUND).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.seed = 9;
        assert_ne!(a.hash(), c.hash());
    }

    fn path_of(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_reports_field_paths() {
        assert_eq!(path_of(&BOUND.replace("[2,3]", "[3,2]")), "n_schedule[1]");
        assert_eq!(path_of(&BOUND.replace("\"alpha\":2", "\"alpha\":1")), "alpha");
        assert_eq!(path_of(&BOUND.replace("\"alpha\":2,", "")), "alpha");
        assert_eq!(path_of(&BOUND.replace("\"theta\":0.2", "\"theta\":\"x\"")), "true_state.theta");
        assert_eq!(path_of(&BOUND.replace("\"alpha\"", "\"alhpa\"")), "alhpa");
        let markov = r#"{"experiment":"markov","source":{"exact":{"model":"example"}},
            "competitors":[{"exact":{"model":"example"}}],"deltas":[0],"n_schedule":[4]}"#;
        assert_eq!(path_of(markov), "deltas[0]");
    }
}
