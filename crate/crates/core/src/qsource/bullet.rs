use super::QuantumSource;
use crate::opcore::{apply_site, partial_trace, support_projector, pinv_sqrt, sqrt_psd, Density, HermOp, Op, SupportMode};
use crate::tol::Tolerances;
use crate::{Error, Result};

fn split(t1: &Op, t: &Op) -> Result<[usize; 2]> {
    let d1 = t1.dim();
    if d1 == 0 || !t.dim().is_multiple_of(d1) {
        return Err(Error::DimensionMismatch {
            expected: d1,
            found: t.dim(),
        });
    }
    Ok([d1, t.dim() / d1])
}

fn sandwich(s: &HermOp, t: &Op) -> Result<Op> {
    let dims = split(s, t)?;
    apply_site(t, &dims, 0, Some(s.as_op()), Some(s.as_op()))
}

/// `T₁ • T = (√T₁ ⊗ I) T (√T₁ ⊗ I)`; the split of `T` is inferred from the
/// dimension of `T₁`.
pub fn bullet(t1: &HermOp, t: &Op) -> Result<Op> {
    sandwich(&sqrt_psd(t1, SupportMode::Lenient)?, t)
}

/// `T₁⁻¹ • T`, with the inverse taken on the support of `T₁`.
pub fn inverse_bullet(t1: &HermOp, t: &Op) -> Result<Op> {
    sandwich(&pinv_sqrt(t1, Tolerances::DEFAULT.rank)?, t)
}

/// Conditional density of `ρ` on the second factor given `σ` on the first:
/// `Tr₁(σ • (ρ₁⁻¹ • ρ))` with `ρ₁ = Tr₂ ρ`.
pub fn cond_density(rho: &Density, sigma: &Density) -> Result<Density> {
    let dims = split(sigma, rho)?;
    let rho1 = HermOp::from_op_unchecked(partial_trace(rho, &dims, 1)?);
    let support = support_projector(&rho1, Tolerances::DEFAULT.rank);
    let deficit = 1.0 - (&support * sigma.as_op()).trace().re;
    if deficit > 1e-8 {
        return Err(Error::SupportMismatch(deficit));
    }
    let conditional = inverse_bullet(&rho1, rho)?;
    let joint = bullet(sigma, &conditional)?;
    let out = partial_trace(&joint, &dims, 0)?.hermitian_part();
    let tr = out.trace().re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::SupportMismatch(1.0 - tr));
    }
    Ok(Density::from_op_unchecked(out))
}

/// `ρ̂^(n+1) = (ρ̄^(n))⁻¹ • ρ̄^(n+1)` for a regular source.
pub fn strategy_step(src: &dyn QuantumSource, n: usize) -> Result<Op> {
    let lower = HermOp::from_op_unchecked(src.level(n)?);
    let upper = src.level(n + 1)?;
    let min = lower.min_eigenvalue();
    if min <= Tolerances::DEFAULT.rank {
        return Err(Error::NotRegular {
            level: n,
            min_eigenvalue: min,
        });
    }
    inverse_bullet(&lower, &upper)
}

/// The strategy `(ρ̂^(n))` of a regular source.
pub struct Strategy<'a> {
    source: &'a dyn QuantumSource,
}

impl<'a> Strategy<'a> {
    pub fn new(source: &'a dyn QuantumSource) -> Self {
        Strategy { source }
    }

    /// `ρ̂^(n)` for `n ≥ 1`.
    pub fn level(&self, n: usize) -> Result<Op> {
        if n == 0 {
            return Err(Error::Parameter("strategy levels start at 1".into()));
        }
        strategy_step(self.source, n - 1)
    }

    /// `‖ρ̄^(n) • ρ̂^(n+1) − ρ̄^(n+1)‖` in the maximum-entry sense.
    pub fn reconstruction_error(&self, n: usize) -> Result<f64> {
        let hat = self.level(n + 1)?;
        let lower = HermOp::from_op_unchecked(self.source.level(n)?);
        let rebuilt = bullet(&lower, &hat)?;
        Ok(rebuilt.max_abs_diff(&self.source.level(n + 1)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::tensor;
    use crate::qsource::{MixtureSource, SimpleSource};

    fn qubit(seed: u64) -> Density {
        crate::rng::random_density(2, &mut crate::rng::seeded(seed))
    }

    #[test]
    fn bullet_examples() {
        let t = crate::rng::random_psd(4, &mut crate::rng::seeded(1));
        let id = HermOp::from_op_unchecked(Op::identity(2));
        assert!(bullet(&id, &t).unwrap().max_abs_diff(&t) < 1e-13);
        let d = HermOp::from_op_unchecked(Op::diag(&[4.0, 0.0]));
        let out = bullet(&d, &Op::identity(4)).unwrap();
        assert!(out.max_abs_diff(&Op::diag(&[4.0, 4.0, 0.0, 0.0])) < 1e-13);
        let p = crate::rng::random_psd(2, &mut crate::rng::seeded(2));
        let out = HermOp::new(bullet(&p, &t).unwrap()).unwrap();
        assert!(out.min_eigenvalue() >= -1e-9);
        assert!(bullet(&p, &Op::identity(3)).is_err());
    }

    #[test]
    fn conditional_of_product_state() {
        let r1 = Density::from_probabilities(&[0.7, 0.3]).unwrap();
        let r2 = qubit(3);
        let rho = Density::new(tensor(&r1, &r2).unwrap()).unwrap();
        let sigma = qubit(4);
        let out = cond_density(&rho, &sigma).unwrap();
        assert!(out.max_abs_diff(&r2) < 1e-12);

        let rho = crate::rng::random_density(4, &mut crate::rng::seeded(5));
        let marginal = Density::new(partial_trace(&rho, &[2, 2], 1).unwrap()).unwrap();
        let out = cond_density(&rho, &marginal).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-8);
        assert!(out.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn conditional_support_mismatch() {
        let r1 = Density::from_probabilities(&[1.0, 0.0]).unwrap();
        let rho = Density::new(tensor(&r1, &qubit(6)).unwrap()).unwrap();
        let sigma = Density::from_probabilities(&[0.0, 1.0]).unwrap();
        match cond_density(&rho, &sigma) {
            Err(Error::SupportMismatch(d)) => assert!((d - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iid_strategy_is_identity_tensor_state() {
        let rho = qubit(7);
        let src = SimpleSource::new(rho.clone().into_semi()).unwrap();
        let strat = Strategy::new(&src);
        for n in 1..=3 {
            let hat = strat.level(n + 1).unwrap();
            let id = Op::identity(1 << n);
            assert!(hat.max_abs_diff(&tensor(&id, &rho).unwrap()) < 1e-10);
            assert!(strat.reconstruction_error(n).unwrap() < 1e-8);
        }
        let mix = MixtureSource::source(vec![(1.0, rho.clone())]).unwrap();
        let hat = strategy_step(&mix, 1).unwrap();
        assert!(hat.max_abs_diff(&tensor(&Op::identity(2), &rho).unwrap()) < 1e-10);
    }

    #[test]
    fn mixture_strategy_reconstructs() {
        let src = MixtureSource::source(vec![(0.5, qubit(8)), (0.5, qubit(9))]).unwrap();
        let strat = Strategy::new(&src);
        for n in 0..=3 {
            assert!(strat.reconstruction_error(n).unwrap() < 1e-8);
        }
    }

    #[test]
    fn singular_level_is_not_regular() {
        let pure = Density::from_probabilities(&[1.0, 0.0]).unwrap();
        let src = MixtureSource::source(vec![(1.0, pure)]).unwrap();
        assert!(matches!(strategy_step(&src, 1), Err(Error::NotRegular { level: 1, .. })));
    }
}
