//! Quantum sources as level sequences, their outcome laws under projective
//! measurement, sandwich (bullet) constructions, strategies and
//! universality checks.

mod bullet;
mod mixture;
mod universality;

pub use bullet::{bullet, cond_density, inverse_bullet, strategy_step, Strategy};
pub use mixture::{
    conjugate, convex_combine, q_restrict, Component, MixtureSource, QuadratureSource,
    SimpleSource, UniformPriorSource, DEFAULT_NODES,
};
pub use universality::{
    universality_check, LevelMargin, UniversalityMode, UniversalityReport, UniversalityRow,
    PASS_SLACK,
};

use serde::{Deserialize, Serialize};

use crate::opcore::{partial_trace, Op};
use crate::projlat::ProjSystem;
use crate::words::{log_sum_exp, OutcomeWord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Unit-trace levels.
    Source,
    /// Trace-nonincreasing levels.
    Generalized,
}

/// Law of outcome words of an exchangeable source under a fixed projection
/// system. Word probabilities depend only on the histogram.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassLaw {
    /// `P(word) = Σ_i w_i Π_j p_ij^{c_j}`, stored as logarithms.
    Mixture {
        ln_weights: Vec<f64>,
        ln_letters: Vec<Vec<f64>>,
    },
    /// Per-word maximum over members, `P(word) = max_i t_i^n Π_j p_ij^{c_j}`:
    /// the level of a two-part code built from semi-densities of trace `t_i`.
    Envelope {
        ln_traces: Vec<f64>,
        ln_letters: Vec<Vec<f64>>,
    },
    /// Uniform mixture of Bernoulli laws: `P(word) = k!(n-k)!/(n+1)!` where
    /// `k` counts outcome `first`.
    Beta { first: usize },
}

impl ClassLaw {
    pub fn outcomes(&self) -> usize {
        match self {
            ClassLaw::Mixture { ln_letters, .. } | ClassLaw::Envelope { ln_letters, .. } => {
                ln_letters.first().map_or(0, |l| l.len())
            }
            ClassLaw::Beta { .. } => 2,
        }
    }

    /// Natural log of the probability of any single word with these counts.
    pub fn ln_prob(&self, counts: &[usize]) -> f64 {
        match self {
            ClassLaw::Mixture {
                ln_weights,
                ln_letters,
            } => log_sum_exp(
                ln_weights
                    .iter()
                    .zip(ln_letters)
                    .map(|(w, l)| w + ln_letter_product(counts, l)),
            ),
            ClassLaw::Envelope {
                ln_traces,
                ln_letters,
            } => {
                let n: usize = counts.iter().sum();
                ln_traces
                    .iter()
                    .zip(ln_letters)
                    .map(|(t, l)| envelope_term(n, *t, counts, l))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            ClassLaw::Beta { first } => {
                let n: usize = counts.iter().sum();
                let k = counts[*first];
                crate::words::ln_factorial(k) + crate::words::ln_factorial(n - k)
                    - crate::words::ln_factorial(n + 1)
            }
        }
    }

    pub(crate) fn from_letter_probs(weights: &[f64], letters: Vec<Vec<f64>>) -> Self {
        ClassLaw::Mixture {
            ln_weights: weights.iter().map(|w| w.ln()).collect(),
            ln_letters: letters
                .into_iter()
                .map(|l| l.into_iter().map(f64::ln).collect())
                .collect(),
        }
    }
}

/// A sequence of levels `ρ̄^(n)` on `H^{⊗n}`.
pub trait QuantumSource: Send + Sync {
    /// Single-site dimension.
    fn dim(&self) -> usize;

    fn kind(&self) -> SourceKind;

    /// Dense level `n`; level 0 is the 1×1 matrix of total weight.
    fn level(&self, n: usize) -> Result<Op>;

    /// Exchangeable outcome law under `q`; errors for sources whose word
    /// probabilities depend on more than the histogram.
    fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw>;

    /// `ln Tr(q_I ρ̄^(n) q_I)`, `-∞` for impossible words.
    fn ln_word_prob(&self, q: &ProjSystem, word: &OutcomeWord) -> Result<f64> {
        check_word(q, word)?;
        Ok(self.class_law(q)?.ln_prob(word.counts()))
    }
}

/// `Σ_j c_j ln p_j` with `0 · ln 0 = 0`.
pub(crate) fn ln_letter_product(counts: &[usize], ln_letters: &[f64]) -> f64 {
    counts
        .iter()
        .zip(ln_letters)
        .filter(|(c, _)| **c > 0)
        .map(|(&c, lp)| c as f64 * lp)
        .sum()
}

/// `n ln t + Σ_j c_j ln p_j`, the log-score of one two-part member.
pub(crate) fn envelope_term(n: usize, ln_trace: f64, counts: &[usize], ln_letters: &[f64]) -> f64 {
    let letters = ln_letter_product(counts, ln_letters);
    if n == 0 {
        letters
    } else {
        n as f64 * ln_trace + letters
    }
}

pub(crate) fn check_word(q: &ProjSystem, word: &OutcomeWord) -> Result<()> {
    if word.outcomes() != q.len() {
        return Err(Error::InvalidOutcome {
            index: word.outcomes(),
            outcomes: q.len(),
        });
    }
    Ok(())
}

/// `Tr(q_I ρ̄^(n) q_I)` evaluated without materializing the level.
pub fn outcome_prob(src: &dyn QuantumSource, q: &ProjSystem, word: &OutcomeWord) -> Result<f64> {
    Ok(src.ln_word_prob(q, word)?.exp())
}

/// `‖Tr_{n+1}(ρ̄^(n+1)) − ρ̄^(n)‖_T`.
pub fn marginal_residual(src: &dyn QuantumSource, n: usize) -> Result<f64> {
    let d = src.dim();
    let upper = src.level(n + 1)?;
    let lower = src.level(n)?;
    let mut dims = vec![d; n];
    dims.push(d);
    let traced = if n == 0 {
        Op::from_rows(1, &[upper.trace()])?
    } else {
        partial_trace(&upper, &dims, n)?
    };
    Ok((&traced - &lower).frobenius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estim::example_state;
    use crate::opcore::Density;

    fn two_state_mixture() -> MixtureSource {
        let mut rng = crate::rng::seeded(5);
        let a = crate::rng::random_density(2, &mut rng);
        let b = crate::rng::random_density(2, &mut rng);
        MixtureSource::source(vec![(0.4, a), (0.6, b)]).unwrap()
    }

    #[test]
    fn marginal_law_holds() {
        let src = two_state_mixture();
        for n in 0..5 {
            assert!(marginal_residual(&src, n).unwrap() < 1e-10);
        }
    }

    #[test]
    fn single_state_word_probability() {
        let rho = example_state(0.3, 0.5).unwrap();
        let src = MixtureSource::source(vec![(1.0, rho)]).unwrap();
        let q = ProjSystem::computational(2);
        let w = OutcomeWord::parse("0,0,1", 2).unwrap();
        assert!((outcome_prob(&src, &q, &w).unwrap() - 0.063).abs() < 1e-15);
        assert_eq!(outcome_prob(&src, &q, &OutcomeWord::empty(2)).unwrap(), 1.0);
    }

    #[test]
    fn factorized_probabilities_match_dense() {
        let src = two_state_mixture();
        let mut rng = crate::rng::seeded(9);
        let q = ProjSystem::haar(2, &mut rng);
        for n in 1..=5 {
            let level = src.level(n).unwrap();
            let prod = crate::projlat::ProductSystem::power(&q, n);
            for code in 0..(1usize << n) {
                let idx: Vec<usize> = (0..n).map(|j| (code >> (n - 1 - j)) & 1).collect();
                let w = OutcomeWord::new(idx.clone(), 2).unwrap();
                let qi = prod.projector(&idx).unwrap();
                let dense = (&(&qi * &level) * &qi).trace().re;
                assert!((outcome_prob(&src, &q, &w).unwrap() - dense).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn word_must_match_system() {
        let src = MixtureSource::source(vec![(1.0, Density::maximally_mixed(2))]).unwrap();
        let w = OutcomeWord::parse("0,2", 3).unwrap();
        assert!(outcome_prob(&src, &ProjSystem::computational(2), &w).is_err());
    }
}
