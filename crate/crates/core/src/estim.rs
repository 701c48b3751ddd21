//! Maximum-likelihood estimation over parameter grids, Laplace-style
//! prediction from mixture sources, and two-part estimation over weighted
//! models.

use serde::{Deserialize, Serialize};

use crate::opcore::{Density, Op, SemiDensity};
use crate::projlat::ProjSystem;
use crate::qsource::{check_word, envelope_term, ClassLaw, QuantumSource};
use crate::words::{check_class_count, compositions, ln_multinomial, OutcomeWord};
use crate::{Error, Result};

/// Default number of grid points for the built-in family, `θ = i/1000`.
pub const DEFAULT_GRID_POINTS: usize = 1001;

/// Outcome probabilities below this are floored before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-300;

/// `ρ_θ = [[θ, √(c(θ−θ²))], [√(c(θ−θ²)), 1−θ]]`.
pub fn example_state(theta: f64, c: f64) -> Result<Density> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Parameter(format!("theta = {theta} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Parameter(format!("c = {c} outside [0, 1]")));
    }
    let off = (c * (theta - theta * theta)).max(0.0).sqrt();
    Ok(Density::from_op_unchecked(Op::from_real_rows(&[
        &[theta, off],
        &[off, 1.0 - theta],
    ])?))
}

/// `points` equally spaced values `i/(points−1)` on `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let d = (points - 1) as f64;
            (0..points).map(|i| i as f64 / d).collect()
        }
    }
}

/// A finite family of states, optionally labelled by a scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamModel {
    thetas: Option<Vec<f64>>,
    states: Vec<Density>,
}

impl ParamModel {
    /// The one-parameter qubit family on an ascending grid in `[0, 1]`.
    pub fn example(c: f64, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Parameter("empty parameter grid".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("parameter grid must be strictly ascending".into()));
        }
        let states = grid.iter().map(|&t| example_state(t, c)).collect::<Result<_>>()?;
        Ok(ParamModel {
            thetas: Some(grid),
            states,
        })
    }

    pub fn example_default(c: f64) -> Result<Self> {
        ParamModel::example(c, uniform_grid(DEFAULT_GRID_POINTS))
    }

    pub fn explicit(states: Vec<Density>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Parameter("empty model".into()));
        }
        Ok(ParamModel { thetas: None, states })
    }

    pub fn thetas(&self) -> Option<&[f64]> {
        self.thetas.as_deref()
    }

    pub fn states(&self) -> &[Density] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// How the winner was singled out among equal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiePath {
    /// Candidates attaining the maximal score.
    pub maxima: usize,
    /// Of those, candidates attaining the maximal stored trace.
    pub trace_ties: usize,
    /// Index of the selected candidate.
    pub chosen: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// The normalized winner.
    pub state: Density,
    pub theta_hat: Option<f64>,
    /// Trace of the winning stored element.
    pub lambda: f64,
    pub index: usize,
    /// Natural-log score of the winner.
    pub ln_score: f64,
    pub tie_path: TiePath,
}

/// Scores are tied when within this relative distance of the best.
const TIE_REL: f64 = 1e-12;

fn select(scores: &[f64], traces: &[f64]) -> Result<(usize, TiePath)> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY || best.is_nan() {
        return Err(Error::AllZeroLikelihood);
    }
    let tol = TIE_REL * best.abs().max(1.0);
    let maxima: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= best - tol).collect();
    let top = maxima.iter().map(|&i| traces[i]).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = maxima
        .iter()
        .copied()
        .filter(|&i| traces[i] >= top - TIE_REL * top.abs())
        .collect();
    Ok((
        tied[0],
        TiePath {
            maxima: maxima.len(),
            trace_ties: tied.len(),
            chosen: tied[0],
        },
    ))
}

fn ln_likelihood(counts: &[usize], probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(probs)
        .filter(|(c, _)| **c > 0)
        .map(|(&c, &p)| {
            if p <= 0.0 {
                f64::NEG_INFINITY
            } else {
                c as f64 * p.max(PROB_FLOOR).ln()
            }
        })
        .sum()
}

/// Grid maximum likelihood: maximizes `Π_j Tr(q_{i_j} ρ q_{i_j})`, ties to
/// the lowest index.
pub fn mle(model: &ParamModel, q: &ProjSystem, word: &OutcomeWord) -> Result<EstimateResult> {
    q.require_minimal()?;
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    check_word(q, word)?;
    let scores = model
        .states
        .iter()
        .map(|s| Ok(ln_likelihood(word.counts(), &q.outcome_probabilities(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let (index, tie_path) = select(&scores, &vec![1.0; scores.len()])?;
    Ok(EstimateResult {
        state: model.states[index].clone(),
        theta_hat: model.thetas.as_ref().map(|t| t[index]),
        lambda: 1.0,
        index,
        ln_score: scores[index],
        tie_path,
    })
}

/// Conditional law of the next outcome: `P(word ⊕ j) / P(word)`.
pub fn predict_next(src: &dyn QuantumSource, q: &ProjSystem, word: &OutcomeWord) -> Result<Vec<f64>> {
    let base = src.ln_word_prob(q, word)?;
    if !(base.exp() > PROB_FLOOR) {
        return Err(Error::ZeroConditioning);
    }
    (0..q.len())
        .map(|j| Ok((src.ln_word_prob(q, &word.extended(j)?)? - base).exp()))
        .collect()
}

/// A model member stored as the semi-density `code_weight · state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub state: Density,
    pub code_weight: f64,
}

/// Finite list of weighted members with `Σ code_weight ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedModel {
    members: Vec<Member>,
    thetas: Option<Vec<f64>>,
}

impl GeneralizedModel {
    pub fn new(members: Vec<(Density, f64)>) -> Result<Self> {
        GeneralizedModel::build(members, None)
    }

    /// Weights a parametric model member by member.
    pub fn from_param_model(model: &ParamModel, code_weights: &[f64]) -> Result<Self> {
        if code_weights.len() != model.len() {
            return Err(Error::InvalidWeights(format!(
                "{} members but {} code weights",
                model.len(),
                code_weights.len()
            )));
        }
        GeneralizedModel::build(
            model.states.iter().cloned().zip(code_weights.iter().copied()).collect(),
            model.thetas.clone(),
        )
    }

    fn build(members: Vec<(Density, f64)>, thetas: Option<Vec<f64>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Parameter("empty model".into()));
        }
        let dim = members[0].0.dim();
        for (i, (s, w)) in members.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(Error::InvalidWeights(format!("code weight {i} = {w} outside (0, 1]")));
            }
        }
        let total: f64 = members.iter().map(|m| m.1).sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidWeights(format!("code weights sum to {total}")));
        }
        Ok(GeneralizedModel {
            members: members
                .into_iter()
                .map(|(state, code_weight)| Member { state, code_weight })
                .collect(),
            thetas,
        })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn thetas(&self) -> Option<&[f64]> {
        self.thetas.as_deref()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].state.dim()
    }

    /// `code_weight · state`.
    pub fn stored(&self, i: usize) -> Result<SemiDensity> {
        let m = &self.members[i];
        m.state.weighted(m.code_weight)
    }

    /// Word law of the two-part level: per word, the largest member score.
    pub fn envelope_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        let ln_letters = self
            .members
            .iter()
            .map(|m| Ok(q.outcome_probabilities(&m.state)?.into_iter().map(f64::ln).collect()))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(ClassLaw::Envelope {
            ln_traces: self.members.iter().map(|m| m.code_weight.ln()).collect(),
            ln_letters,
        })
    }

    /// Precomputed two-part selection under `q`.
    pub fn selector(&self, q: &ProjSystem) -> Result<TwoPartSelector<'_>> {
        q.require_minimal()?;
        let ClassLaw::Envelope { ln_traces, ln_letters } = self.envelope_law(q)? else {
            unreachable!("envelope_law builds an envelope");
        };
        Ok(TwoPartSelector {
            model: self,
            ln_traces,
            ln_letters,
        })
    }
}

/// Two-part selection for one projection system; depends on words only
/// through their histograms.
pub struct TwoPartSelector<'a> {
    model: &'a GeneralizedModel,
    ln_traces: Vec<f64>,
    ln_letters: Vec<Vec<f64>>,
}

impl TwoPartSelector<'_> {
    pub fn select(&self, counts: &[usize]) -> Result<EstimateResult> {
        let n: usize = counts.iter().sum();
        let scores: Vec<f64> = self
            .ln_traces
            .iter()
            .zip(&self.ln_letters)
            .map(|(t, l)| envelope_term(n, *t, counts, l))
            .collect();
        let traces: Vec<f64> = self.model.members.iter().map(|m| m.code_weight).collect();
        let (index, tie_path) = select(&scores, &traces)?;
        Ok(EstimateResult {
            state: self.model.members[index].state.clone(),
            theta_hat: self.model.thetas.as_ref().map(|t| t[index]),
            lambda: traces[index],
            index,
            ln_score: scores[index],
            tie_path,
        })
    }
}

/// Two-part estimate: maximizes `(code_weight)^n Π_j Tr(q_{i_j} ρ q_{i_j})`;
/// ties go to the larger stored trace, then to the lowest index.
pub fn two_part(model: &GeneralizedModel, q: &ProjSystem, word: &OutcomeWord) -> Result<EstimateResult> {
    check_word(q, word)?;
    model.selector(q)?.select(word.counts())
}

/// Maps each stored member `T` to `Tr(T)^{α−1} T`.
pub fn alpha_scale(model: &GeneralizedModel, alpha: f64) -> Result<GeneralizedModel> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} must exceed 1")));
    }
    Ok(GeneralizedModel {
        members: model
            .members
            .iter()
            .map(|m| Member {
                state: m.state.clone(),
                code_weight: m.code_weight.powf(alpha),
            })
            .collect(),
        thetas: model.thetas.clone(),
    })
}

/// `Σ_I Λ_I` over all length-`n` words. Words that every member assigns
/// probability zero have no winner and contribute nothing.
pub fn lambda_sum(model: &GeneralizedModel, q: &ProjSystem, n: usize) -> Result<f64> {
    let sel = model.selector(q)?;
    check_class_count(n, q.len())?;
    let mut total = 0.0;
    for c in compositions(n, q.len()) {
        match sel.select(&c) {
            Ok(est) => total += ln_multinomial(&c).exp() * est.lambda,
            Err(Error::AllZeroLikelihood) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}
