use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassLaw, MixtureSource, QuantumSource};
use crate::infodist::{class_divergence, rel_entropy_nats, DivergenceKind};
use crate::opcore::{tensor_power, Density, HermOp, Op};
use crate::projlat::ProjSystem;
use crate::words::{check_class_count, compositions};
use crate::{Error, Result};

/// Margins at or above `-PASS_SLACK` count as passing.
pub const PASS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniversalityMode {
    /// `min eig(ρ̄^(n) − 2^{−nε} ρ^{⊗n})`.
    Matrix,
    /// `min over classes of log₂ P̄ − log₂ P + nε`.
    QRestricted,
    /// `nε − S(ρ^{⊗n} ‖ ρ̄^(n))` in bits.
    Expected,
    /// `nε − S` between outcome-word laws, in bits.
    QExpected,
}

impl UniversalityMode {
    pub fn tag(self) -> &'static str {
        match self {
            UniversalityMode::Matrix => "matrix",
            UniversalityMode::QRestricted => "q-restricted",
            UniversalityMode::Expected => "expected",
            UniversalityMode::QExpected => "q-expected",
        }
    }

    fn needs_q(self) -> bool {
        matches!(self, UniversalityMode::QRestricted | UniversalityMode::QExpected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalityRow {
    pub n: usize,
    pub member: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMargin {
    pub n: usize,
    /// Smallest margin over model members.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub mode: UniversalityMode,
    pub epsilon: f64,
    pub rows: Vec<UniversalityRow>,
    pub per_level: Vec<LevelMargin>,
    /// Smallest checked level from which every level through the end of the
    /// range passes.
    pub n0: Option<usize>,
    pub pass: bool,
}

impl UniversalityReport {
    /// CSV with header `mode,epsilon,n,member,margin,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,epsilon,n,member,margin,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.mode.tag(),
                self.epsilon,
                r.n,
                r.member,
                r.margin,
                r.margin >= -PASS_SLACK
            ));
        }
        out
    }
}

fn margin_matrix(level: &Op, member: &Density, n: usize, eps: f64) -> Result<f64> {
    let scaled = tensor_power(member, n)?.scale((-(n as f64) * eps).exp2());
    Ok(HermOp::from_op_unchecked(level - &scaled).min_eigenvalue())
}

fn margin_expected(level: &Op, member: &Density, n: usize, eps: f64) -> Result<f64> {
    let power = HermOp::from_op_unchecked(tensor_power(member, n)?);
    let s = rel_entropy_nats(&power, &HermOp::from_op_unchecked(level.clone()));
    Ok(n as f64 * eps - s / std::f64::consts::LN_2)
}

fn margin_q_restricted(src: &ClassLaw, member: &ClassLaw, n: usize, eps: f64) -> f64 {
    let ne = n as f64 * eps;
    compositions(n, member.outcomes())
        .filter_map(|c| {
            let lp = member.ln_prob(&c);
            (lp > f64::NEG_INFINITY).then(|| (src.ln_prob(&c) - lp) / std::f64::consts::LN_2 + ne)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks the universality inequality of `src` against every model member at
/// every level of `n_range`. The report certifies the checked range only.
pub fn universality_check(
    src: &dyn QuantumSource,
    model: &[Density],
    epsilon: f64,
    n_range: RangeInclusive<usize>,
    mode: UniversalityMode,
    q: Option<&ProjSystem>,
) -> Result<UniversalityReport> {
    if model.is_empty() {
        return Err(Error::Parameter("empty model".into()));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if n_range.is_empty() {
        return Err(Error::Parameter("empty level range".into()));
    }
    for m in model {
        if m.dim() != src.dim() {
            return Err(Error::DimensionMismatch {
                expected: src.dim(),
                found: m.dim(),
            });
        }
    }
    let levels: Vec<usize> = n_range.collect();
    let pairs: Vec<(usize, usize)> = levels
        .iter()
        .flat_map(|&n| (0..model.len()).map(move |i| (n, i)))
        .collect();

    let margins: Vec<f64> = if mode.needs_q() {
        let q = q.ok_or_else(|| Error::Parameter(format!("{} mode needs a projection system", mode.tag())))?;
        q.require_minimal()?;
        let src_law = src.class_law(q)?;
        let laws = model
            .iter()
            .map(|m| MixtureSource::source(vec![(1.0, m.clone())])?.class_law(q))
            .collect::<Result<Vec<_>>>()?;
        for &n in &levels {
            check_class_count(n, q.len())?;
        }
        pairs
            .par_iter()
            .map(|&(n, i)| match mode {
                UniversalityMode::QRestricted => Ok(margin_q_restricted(&src_law, &laws[i], n, epsilon)),
                _ => {
                    let s = class_divergence(DivergenceKind::RelEntropy, &laws[i], &src_law, n)?;
                    Ok(n as f64 * epsilon - s.value)
                }
            })
            .collect::<Result<_>>()?
    } else {
        let dense: Vec<Op> = levels.par_iter().map(|&n| src.level(n)).collect::<Result<_>>()?;
        pairs
            .par_iter()
            .map(|&(n, i)| {
                let level = &dense[n - levels[0]];
                match mode {
                    UniversalityMode::Matrix => margin_matrix(level, &model[i], n, epsilon),
                    _ => margin_expected(level, &model[i], n, epsilon),
                }
            })
            .collect::<Result<_>>()?
    };

    let rows: Vec<UniversalityRow> = pairs
        .iter()
        .zip(&margins)
        .map(|(&(n, member), &margin)| UniversalityRow { n, member, margin })
        .collect();
    let per_level: Vec<LevelMargin> = levels
        .iter()
        .map(|&n| LevelMargin {
            n,
            margin: rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.margin)
                .fold(f64::INFINITY, f64::min),
        })
        .collect();
    let mut n0 = None;
    for lm in per_level.iter().rev() {
        if lm.margin >= -PASS_SLACK {
            n0 = Some(lm.n);
        } else {
            break;
        }
    }
    Ok(UniversalityReport {
        mode,
        epsilon,
        rows,
        per_level,
        n0,
        pass: n0.is_some(),
    })
}
