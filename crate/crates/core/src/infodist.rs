//! Relative entropy, squared Hellinger distance and Rényi divergence between
//! (semi-)density matrices, between finite distributions, and between the
//! outcome-word laws of exchangeable sources.

use serde::{Deserialize, Serialize};

use crate::opcore::{eigh, power_psd, sqrt_psd, HermOp, LogBase, SemiDensity, SupportMode};
use crate::projlat::ProjSystem;
use crate::qsource::{ClassLaw, QuantumSource};
use crate::tol::Tolerances;
use crate::words::{check_class_count, compositions, ln_multinomial, log_sum_exp};
use crate::{Error, Result};

/// A divergence value, possibly `+∞`. `base` is `None` for quantities that
/// carry no logarithm (squared Hellinger distance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub base: Option<LogBase>,
}

impl DivergenceValue {
    pub fn bits(value: f64) -> Self {
        DivergenceValue {
            value,
            base: Some(LogBase::Bits),
        }
    }

    pub fn nats(value: f64) -> Self {
        DivergenceValue {
            value,
            base: Some(LogBase::Nats),
        }
    }

    pub fn unitless(value: f64) -> Self {
        DivergenceValue { value, base: None }
    }

    /// `"bits"`, `"nats"` or `"none"`.
    pub fn base_tag(&self) -> &'static str {
        self.base.map_or("none", LogBase::tag)
    }

    /// The same quantity expressed in another logarithm base.
    pub fn in_base(self, base: LogBase) -> Self {
        match self.base {
            Some(b) if b != base => DivergenceValue {
                value: self.value * b.ln_scale() / base.ln_scale(),
                base: Some(base),
            },
            _ => self,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DivergenceKind {
    RelEntropy,
    HellingerSq,
    Renyi { lambda: f64 },
}

impl DivergenceKind {
    /// Bits for relative entropy, nats for Rényi.
    pub fn default_base(self) -> LogBase {
        match self {
            DivergenceKind::Renyi { .. } => LogBase::Nats,
            _ => LogBase::Bits,
        }
    }

    fn check(self) -> Result<()> {
        match self {
            DivergenceKind::Renyi { lambda } if !(lambda > 0.0 && lambda < 1.0) => Err(Error::Domain(lambda)),
            _ => Ok(()),
        }
    }
}

pub(crate) fn rel_entropy_nats(r1: &HermOp, r2: &HermOp) -> f64 {
    let supp = Tolerances::DEFAULT.support;
    let s1 = eigh(r1);
    let s2 = eigh(r2);
    let mut cross = 0.0;
    for (k, &s) in s2.values.iter().enumerate() {
        let v = nalgebra::DVector::from_column_slice(&s2.vector(k));
        let mass = (v.adjoint() * r1.matrix() * &v)[(0, 0)].re;
        if s <= supp {
            if mass > 1e-9 {
                return f64::INFINITY;
            }
        } else {
            cross += mass * s.ln();
        }
    }
    let own: f64 = s1.values.iter().filter(|&&p| p > supp).map(|p| p * p.ln()).sum();
    own - cross
}

/// `Tr ρ₁ log ρ₁ − Tr ρ₁ log ρ₂`; `+∞` when `ρ₁` has weight outside the
/// support of `ρ₂`.
pub fn rel_entropy(r1: &SemiDensity, r2: &SemiDensity, base: LogBase) -> Result<DivergenceValue> {
    r1.check_same_dim(r2)?;
    Ok(DivergenceValue::nats(rel_entropy_nats(r1, r2)).in_base(base))
}

/// `‖√ρ₁ − √ρ₂‖_T²`.
pub fn hellinger_sq(r1: &SemiDensity, r2: &SemiDensity) -> Result<DivergenceValue> {
    r1.check_same_dim(r2)?;
    let a = sqrt_psd(r1, SupportMode::Lenient)?;
    let b = sqrt_psd(r2, SupportMode::Lenient)?;
    Ok(DivergenceValue::unitless((a.as_op() - b.as_op()).frobenius().powi(2)))
}

/// `−(1/(1−λ)) ln Tr(ρ₁^λ ρ₂^{1−λ})`, `+∞` without overlap.
pub fn renyi(lambda: f64, r1: &SemiDensity, r2: &SemiDensity, base: LogBase) -> Result<DivergenceValue> {
    DivergenceKind::Renyi { lambda }.check()?;
    r1.check_same_dim(r2)?;
    let a = power_psd(r1, lambda, SupportMode::Lenient)?;
    let b = power_psd(r2, 1.0 - lambda, SupportMode::Lenient)?;
    let overlap = (a.as_op() * b.as_op()).trace().re;
    let value = if overlap > 0.0 {
        -overlap.ln() / (1.0 - lambda)
    } else {
        f64::INFINITY
    };
    Ok(DivergenceValue::nats(value).in_base(base))
}

/// Quantum divergence of the requested kind, in its default base.
pub fn divergence(kind: DivergenceKind, r1: &SemiDensity, r2: &SemiDensity) -> Result<DivergenceValue> {
    match kind {
        DivergenceKind::RelEntropy => rel_entropy(r1, r2, LogBase::Bits),
        DivergenceKind::HellingerSq => hellinger_sq(r1, r2),
        DivergenceKind::Renyi { lambda } => renyi(lambda, r1, r2, LogBase::Nats),
    }
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(())
}

/// Divergence between two finite (sub-)distributions.
pub fn classical_divergence(kind: DivergenceKind, p: &[f64], q: &[f64]) -> Result<DivergenceValue> {
    kind.check()?;
    check_lengths(p, q)?;
    let ln_p: Vec<f64> = p.iter().map(|x| x.ln()).collect();
    let ln_q: Vec<f64> = q.iter().map(|x| x.ln()).collect();
    Ok(accumulate(kind, ln_p.into_iter().zip(ln_q).map(|(a, b)| (0.0, a, b))))
}

/// Folds `(ln multiplicity, ln P_a, ln P_b)` terms into a divergence in
/// the kind's default base.
fn accumulate(kind: DivergenceKind, terms: impl Iterator<Item = (f64, f64, f64)>) -> DivergenceValue {
    match kind {
        DivergenceKind::RelEntropy => {
            let mut total = 0.0;
            for (lm, la, lb) in terms {
                if la == f64::NEG_INFINITY {
                    continue;
                }
                if lb == f64::NEG_INFINITY {
                    return DivergenceValue::bits(f64::INFINITY);
                }
                total += (lm + la).exp() * (la - lb);
            }
            DivergenceValue::nats(total).in_base(LogBase::Bits)
        }
        DivergenceKind::HellingerSq => DivergenceValue::unitless(
            terms
                .map(|(lm, la, lb)| ((0.5 * (lm + la)).exp() - (0.5 * (lm + lb)).exp()).powi(2))
                .sum(),
        ),
        DivergenceKind::Renyi { lambda } => {
            let ln_overlap = log_sum_exp(terms.filter_map(|(lm, la, lb)| {
                (la > f64::NEG_INFINITY && lb > f64::NEG_INFINITY)
                    .then_some(lm + lambda * la + (1.0 - lambda) * lb)
            }));
            DivergenceValue::nats(-ln_overlap / (1.0 - lambda))
        }
    }
}

/// Divergence between the length-`n` word laws of two exchangeable laws,
/// summed over histogram classes.
pub fn class_divergence(kind: DivergenceKind, a: &ClassLaw, b: &ClassLaw, n: usize) -> Result<DivergenceValue> {
    kind.check()?;
    let m = a.outcomes();
    if b.outcomes() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.outcomes(),
        });
    }
    check_class_count(n, m)?;
    Ok(accumulate(
        kind,
        compositions(n, m).map(|c| (ln_multinomial(&c), a.ln_prob(&c), b.ln_prob(&c))),
    ))
}

/// Divergence between the `Q^(n)`-projected levels of two sources, i.e.
/// between their length-`n` outcome-word distributions.
pub fn word_divergences(
    a: &dyn QuantumSource,
    b: &dyn QuantumSource,
    q: &ProjSystem,
    n: usize,
    kind: DivergenceKind,
) -> Result<DivergenceValue> {
    q.require_minimal()?;
    class_divergence(kind, &a.class_law(q)?, &b.class_law(q)?, n)
}
