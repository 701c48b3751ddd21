use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::opcore::Density;
use crate::projlat::ProjSystem;
use crate::qsource::ClassLaw;
use crate::rng::stream_rng;
use crate::words::{check_class_count, compositions, ln_multinomial, OutcomeWord};
use crate::{Error, Result};

/// `replicas` i.i.d. words of length `n` measured with `q` on copies of
/// `state`; replica `r` draws from the stream of `(seed, r, n)`.
pub fn sample_words(
    state: &Density,
    q: &ProjSystem,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<OutcomeWord>> {
    let probs = q.outcome_probabilities(state)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Parameter(format!("outcome law: {e}")))?;
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64, n as u64);
            let idx = (0..n).map(|_| dist.sample(&mut rng)).collect();
            OutcomeWord::new(idx, q.len())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityRelation {
    pub n: usize,
    pub delta: f64,
    /// Reference probability of the words on which the competitor's
    /// likelihood exceeds `delta` times the reference likelihood.
    pub mass: f64,
}

/// Exact reference mass of `{I : P'(I) > δ P(I)}`, summed over histogram
/// classes. Words of reference probability zero are excluded.
pub fn distinguishability_mass(
    reference: &ClassLaw,
    competitor: &ClassLaw,
    n: usize,
    delta: f64,
) -> Result<DistinguishabilityRelation> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let m = reference.outcomes();
    if competitor.outcomes() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: competitor.outcomes(),
        });
    }
    check_class_count(n, m)?;
    let ln_delta = delta.ln();
    let mass = compositions(n, m)
        .filter_map(|c| {
            let lr = reference.ln_prob(&c);
            (lr > f64::NEG_INFINITY && competitor.ln_prob(&c) - lr > ln_delta)
                .then(|| (ln_multinomial(&c) + lr).exp())
        })
        .sum();
    Ok(DistinguishabilityRelation { n, delta, mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovCheck {
    pub relation: DistinguishabilityRelation,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `mass ≤ 1/δ` for a competitor of total mass at most one.
pub fn markov_check(reference: &ClassLaw, competitor: &ClassLaw, n: usize, delta: f64) -> Result<MarkovCheck> {
    let relation = distinguishability_mass(reference, competitor, n, delta)?;
    let bound = 1.0 / delta;
    Ok(MarkovCheck {
        relation,
        bound,
        pass: relation.mass <= bound + 1e-9,
    })
}
