use super::ProjSystem;
use crate::opcore::{tensor, Op};
use crate::tol::PROJ_TOL;
use crate::Result;

/// `T_Q = Σ q T q`.
pub fn q_project(t: &Op, q: &ProjSystem) -> Result<Op> {
    let mut acc = Op::zeros(t.dim());
    for p in q.projectors() {
        t.check_same_dim(p.as_op())?;
        acc = &acc + &(p.as_op() * t * p.as_op());
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityTag {
    Classical,
    MaximallyNonclassical,
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Classification {
    /// Operator norm of the part removed by the projection.
    pub nu: f64,
    pub tag: ComplexityTag,
}

/// Quantum complexity of `T` relative to a rank-one system.
pub fn classify(t: &Op, q: &ProjSystem) -> Result<Classification> {
    q.require_minimal()?;
    let tq = q_project(t, q)?;
    let nu = (t - &tq).op_norm();
    let tag = if nu <= PROJ_TOL {
        ComplexityTag::Classical
    } else if tq.op_norm() <= PROJ_TOL {
        ComplexityTag::MaximallyNonclassical
    } else {
        ComplexityTag::Intermediate
    };
    Ok(Classification { nu, tag })
}

/// `P ⊗ Q = {p_i ⊗ q_j}` in lexicographic order.
pub fn tensor_system(p: &ProjSystem, q: &ProjSystem) -> Result<ProjSystem> {
    crate::tol::check_cap(p.dim().saturating_mul(q.dim()))?;
    let mut out = Vec::with_capacity(p.len() * q.len());
    for a in p.projectors() {
        for b in q.projectors() {
            out.push(tensor(a, b)?);
        }
    }
    Ok(ProjSystem::from_parts_unchecked(p.dim() * q.dim(), out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakCheck {
    pub pass: bool,
    /// First sampled system on which the projections differed.
    pub witness: Option<ProjSystem>,
    pub trials_run: usize,
}

/// Sampled check that `T_Q = S_Q` for Haar-random rank-one systems.
pub fn weakly_equal(t: &Op, s: &Op, trials: usize, seed: u64) -> Result<WeakCheck> {
    t.check_same_dim(s)?;
    let mut rng = crate::rng::seeded(seed);
    let diff = t - s;
    for k in 0..trials {
        let q = ProjSystem::haar(t.dim(), &mut rng);
        if q_project(&diff, &q)?.op_norm() > PROJ_TOL {
            return Ok(WeakCheck {
                pass: false,
                witness: Some(q),
                trials_run: k + 1,
            });
        }
    }
    Ok(WeakCheck {
        pass: true,
        witness: None,
        trials_run: trials,
    })
}
