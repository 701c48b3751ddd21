use rand::Rng;

use crate::opcore::{eigh, tensor, HermOp, MatrixLiteral, Op, C64};
use crate::tol::{check_cap, PROJ_TOL};
use crate::{Error, Result};

const SYSTEM_TOL: f64 = 1e-9;

/// A complete set of mutually orthogonal nonzero projections.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjSystem {
    dim: usize,
    projectors: Vec<HermOp>,
    minimal: bool,
}

impl ProjSystem {
    /// Validates idempotence, Hermiticity, mutual orthogonality and
    /// completeness; the minimal flag is set when every member has rank one.
    pub fn new(projectors: Vec<Op>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidSystem("no projectors".into()));
        };
        let dim = first.dim();
        let mut herm = Vec::with_capacity(projectors.len());
        for (k, p) in projectors.into_iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            let h = HermOp::new(p)?;
            let sq = h.as_op() * h.as_op();
            if sq.max_abs_diff(&h) > SYSTEM_TOL {
                return Err(Error::InvalidSystem(format!("member {k} is not idempotent")));
            }
            if h.frobenius() <= PROJ_TOL {
                return Err(Error::InvalidSystem(format!("member {k} is zero")));
            }
            herm.push(h);
        }
        let mut sum = Op::zeros(dim);
        for (i, p) in herm.iter().enumerate() {
            for (j, q) in herm.iter().enumerate().skip(i + 1) {
                let prod = p.as_op() * q.as_op();
                if prod.max_abs_diff(&Op::zeros(dim)) > SYSTEM_TOL {
                    return Err(Error::InvalidSystem(format!(
                        "members {i} and {j} are not orthogonal"
                    )));
                }
            }
            sum = &sum + p.as_op();
        }
        if sum.max_abs_diff(&Op::identity(dim)) > SYSTEM_TOL {
            return Err(Error::InvalidSystem("members do not sum to the identity".into()));
        }
        let minimal = herm.iter().all(|p| {
            let s = eigh(p);
            let n = s.values.len();
            (s.values[n - 1] - 1.0).abs() <= SYSTEM_TOL
                && (n < 2 || s.values[n - 2] <= SYSTEM_TOL)
        });
        Ok(ProjSystem {
            dim,
            projectors: herm,
            minimal,
        })
    }

    /// `{|0><0|, …, |d-1><d-1|}`.
    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|k| {
                let mut v = vec![0.0; dim];
                v[k] = 1.0;
                HermOp::from_op_unchecked(Op::diag(&v))
            })
            .collect();
        ProjSystem {
            dim,
            projectors,
            minimal: true,
        }
    }

    /// The one-element system `{I}`.
    pub fn trivial(dim: usize) -> Self {
        ProjSystem {
            dim,
            projectors: vec![HermOp::from_op_unchecked(Op::identity(dim))],
            minimal: dim == 1,
        }
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(u: &Op) -> Result<Self> {
        let d = u.dim();
        ProjSystem::from_basis_groups(u, &(0..d).map(|k| vec![k]).collect::<Vec<_>>())
    }

    /// Projectors onto the spans of groups of columns of a unitary. The
    /// groups must partition the column indices.
    pub fn from_basis_groups(u: &Op, groups: &[Vec<usize>]) -> Result<Self> {
        let defect = u.unitarity_defect();
        if defect > SYSTEM_TOL {
            return Err(Error::NotUnitary(defect));
        }
        let d = u.dim();
        let mut seen = vec![false; d];
        let mut projectors = Vec::with_capacity(groups.len());
        for g in groups {
            let mut p = Op::zeros(d);
            for &k in g {
                if k >= d || seen[k] {
                    return Err(Error::InvalidSystem(format!("column {k} is not a valid group member")));
                }
                seen[k] = true;
                let col: Vec<C64> = u.matrix().column(k).iter().copied().collect();
                p = &p + &Op::outer(&col);
            }
            projectors.push(p);
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidSystem("groups do not cover every column".into()));
        }
        ProjSystem::new(projectors)
    }

    /// Rank-one system in a Haar-random basis.
    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let u = crate::rng::haar_unitary(dim, rng);
        ProjSystem::from_basis(&u).expect("Haar unitary yields a valid system")
    }

    pub fn from_literals(lits: &[MatrixLiteral]) -> Result<Self> {
        ProjSystem::new(lits.iter().map(|l| l.to_op()).collect::<Result<_>>()?)
    }

    pub fn to_literals(&self) -> Vec<MatrixLiteral> {
        self.projectors.iter().map(|p| MatrixLiteral::from(p.as_op())).collect()
    }

    pub(crate) fn from_parts_unchecked(dim: usize, projectors: Vec<Op>) -> Self {
        let minimal = projectors.iter().all(|p| (p.trace().re - 1.0).abs() < 1e-6);
        ProjSystem {
            dim,
            projectors: projectors.into_iter().map(HermOp::from_op_unchecked).collect(),
            minimal,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    pub fn projectors(&self) -> &[HermOp] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> Result<&HermOp> {
        self.projectors.get(k).ok_or(Error::InvalidOutcome {
            index: k,
            outcomes: self.len(),
        })
    }

    pub(crate) fn require_minimal(&self) -> Result<()> {
        if self.minimal {
            Ok(())
        } else {
            Err(Error::NonMinimalSystem)
        }
    }

    /// Outcome probabilities `Tr(q ρ q)`, clamped at zero.
    pub fn outcome_probabilities(&self, state: &Op) -> Result<Vec<f64>> {
        state.check_same_dim(self.projectors[0].as_op())?;
        Ok(self
            .projectors
            .iter()
            .map(|q| {
                // Tr(q ρ q) = Tr(q ρ) for a projector.
                let p: C64 = q
                    .matrix()
                    .iter()
                    .zip(state.matrix().transpose().iter())
                    .map(|(a, b)| a * b)
                    .sum();
                p.re.max(0.0)
            })
            .collect())
    }

    /// Whether every member is diagonal in the computational basis, which
    /// makes it a coarse-graining of the computational system.
    pub fn is_diagonal(&self) -> bool {
        self.projectors.iter().all(|p| {
            let d = self.dim;
            (0..d).all(|i| (0..d).all(|j| i == j || p.get(i, j).norm() <= PROJ_TOL))
        })
    }
}

/// The product system `Q₁ ⊗ … ⊗ Q_n`, kept factorized.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSystem {
    factors: Vec<ProjSystem>,
}

impl ProductSystem {
    pub fn new(factors: Vec<ProjSystem>) -> Self {
        ProductSystem { factors }
    }

    /// `Q^(n)`.
    pub fn power(q: &ProjSystem, n: usize) -> Self {
        ProductSystem {
            factors: vec![q.clone(); n],
        }
    }

    pub fn level(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[ProjSystem] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    /// Number of members, `Π |Q_k|`.
    pub fn count(&self) -> u128 {
        self.factors.iter().map(|f| f.len() as u128).product()
    }

    /// Dense `q_I = q_{i₁} ⊗ … ⊗ q_{i_n}`.
    pub fn projector(&self, word: &[usize]) -> Result<Op> {
        if word.len() != self.level() {
            return Err(Error::DimensionMismatch {
                expected: self.level(),
                found: word.len(),
            });
        }
        check_cap(self.dims().iter().product())?;
        let mut out = Op::identity(1);
        for (f, &i) in self.factors.iter().zip(word) {
            out = tensor(&out, f.projector(i)?.as_op())?;
        }
        Ok(out)
    }

    /// `T_{Q^(n)}` computed one factor at a time.
    pub fn project(&self, t: &Op) -> Result<Op> {
        let dims = self.dims();
        let total: usize = dims.iter().product();
        if total != t.dim() {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: t.dim(),
            });
        }
        let mut cur = t.clone();
        for (site, f) in self.factors.iter().enumerate() {
            let mut acc = Op::zeros(total);
            for q in f.projectors() {
                let term = crate::opcore::apply_site(&cur, &dims, site, Some(q), Some(q))?;
                acc = &acc + &term;
            }
            cur = acc;
        }
        Ok(cur)
    }

    /// Dense materialization of every member, in lexicographic word order.
    pub fn materialize(&self) -> Result<ProjSystem> {
        let mut sys = ProjSystem::trivial(1);
        for f in &self.factors {
            sys = super::tensor_system(&sys, f)?;
        }
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_defects() {
        let p = Op::diag(&[1.0, 0.0]);
        assert!(ProjSystem::new(vec![p.clone()]).is_err()); // incomplete
        assert!(ProjSystem::new(vec![p.clone(), p.clone()]).is_err()); // overlap
        assert!(ProjSystem::new(vec![Op::diag(&[0.5, 0.5]), Op::diag(&[0.5, 0.5])]).is_err());
        let ok = ProjSystem::new(vec![p, Op::diag(&[0.0, 1.0])]).unwrap();
        assert!(ok.is_minimal());
        assert!(!ProjSystem::trivial(2).is_minimal());
    }

    #[test]
    fn coarse_grained_basis_system() {
        let u = Op::identity(4);
        let s = ProjSystem::from_basis_groups(&u, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(!s.is_minimal());
        assert!(ProjSystem::from_basis_groups(&u, &[vec![0, 1], vec![2]]).is_err());
    }

    #[test]
    fn product_projection_matches_dense_system() {
        let mut rng = crate::rng::seeded(11);
        let q = ProjSystem::haar(2, &mut rng);
        let t = crate::rng::ginibre(8, &mut rng);
        let prod = ProductSystem::power(&q, 3);
        let dense = prod.materialize().unwrap();
        let a = prod.project(&t).unwrap();
        let b = super::super::q_project(&t, &dense).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert_eq!(prod.count(), 8);
        let p = prod.projector(&[0, 1, 1]).unwrap();
        assert!(p.max_abs_diff(dense.projector(3).unwrap()) < 1e-12);
    }
}
