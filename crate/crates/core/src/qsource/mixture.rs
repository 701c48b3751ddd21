use gauss_quad::legendre::GaussLegendre;

use super::{ClassLaw, QuantumSource, SourceKind};
use crate::estim::example_state;
use crate::opcore::{tensor, tensor_power, Density, Op, SemiDensity};
use crate::projlat::{q_project, ProjSystem};
use crate::tol::{check_cap, checked_pow, Tolerances};
use crate::words::OutcomeWord;
use crate::{Error, Result};

/// Nodes of the default quadrature rule over a one-dimensional parameter.
pub const DEFAULT_NODES: usize = 2048;

const QUAD_WEIGHT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub state: SemiDensity,
}

/// `ρ̄^(n) = Σ_i w_i ρ_i^{⊗n}`, kept symbolic.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSource {
    components: Vec<Component>,
    kind: SourceKind,
}

impl MixtureSource {
    pub fn new(components: Vec<Component>, kind: SourceKind) -> Result<Self> {
        MixtureSource::build(components, kind, Tolerances::DEFAULT.trace)
    }

    /// Mixture of densities with weights summing to one.
    pub fn source(items: Vec<(f64, Density)>) -> Result<Self> {
        MixtureSource::new(
            items
                .into_iter()
                .map(|(weight, s)| Component {
                    weight,
                    state: s.into_semi(),
                })
                .collect(),
            SourceKind::Source,
        )
    }

    /// Mixture of semi-densities with `Σ w_i Tr(ρ_i) ≤ 1`.
    pub fn generalized(items: Vec<(f64, SemiDensity)>) -> Result<Self> {
        MixtureSource::new(
            items
                .into_iter()
                .map(|(weight, state)| Component { weight, state })
                .collect(),
            SourceKind::Generalized,
        )
    }

    fn build(components: Vec<Component>, kind: SourceKind, weight_tol: f64) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidWeights("no components".into()));
        };
        let dim = first.state.dim();
        let trace_tol = Tolerances::DEFAULT.trace;
        for (i, c) in components.iter().enumerate() {
            if c.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.state.dim(),
                });
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight {i} = {} is not positive",
                    c.weight
                )));
            }
            if kind == SourceKind::Source && (c.state.trace_re() - 1.0).abs() > trace_tol {
                return Err(Error::InvalidWeights(format!(
                    "component {i} has trace {} but a source needs densities",
                    c.state.trace_re()
                )));
            }
        }
        match kind {
            SourceKind::Source => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > weight_tol {
                    return Err(Error::InvalidWeights(format!("weights sum to {total}")));
                }
            }
            SourceKind::Generalized => {
                let mass: f64 = components.iter().map(|c| c.weight * c.state.trace_re()).sum();
                if mass > 1.0 + trace_tol {
                    return Err(Error::InvalidWeights(format!(
                        "level-1 trace {mass} exceeds one"
                    )));
                }
            }
        }
        Ok(MixtureSource { components, kind })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl QuantumSource for MixtureSource {
    fn dim(&self) -> usize {
        self.components[0].state.dim()
    }

    fn kind(&self) -> SourceKind {
        self.kind
    }

    fn level(&self, n: usize) -> Result<Op> {
        let total = checked_pow(self.dim(), n)?;
        let mut acc = Op::zeros(total);
        for c in &self.components {
            acc = acc + tensor_power(&c.state, n)?.scale(c.weight);
        }
        Ok(acc)
    }

    fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        let letters = self
            .components
            .iter()
            .map(|c| q.outcome_probabilities(&c.state))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassLaw::from_letter_probs(&self.weights(), letters))
    }
}

/// `ρ ⊗ ω(ρ)^{⊗(n−1)}` for a single semi-density `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleSource {
    base: SemiDensity,
    normalized: Density,
}

impl SimpleSource {
    pub fn new(base: SemiDensity) -> Result<Self> {
        let normalized = base.normalize()?;
        Ok(SimpleSource { base, normalized })
    }

    pub fn base(&self) -> &SemiDensity {
        &self.base
    }

    fn is_normalized(&self) -> bool {
        (self.base.trace_re() - 1.0).abs() <= Tolerances::DEFAULT.trace
    }
}

impl QuantumSource for SimpleSource {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn kind(&self) -> SourceKind {
        if self.is_normalized() {
            SourceKind::Source
        } else {
            SourceKind::Generalized
        }
    }

    fn level(&self, n: usize) -> Result<Op> {
        if n == 0 {
            return Ok(Op::identity(1));
        }
        checked_pow(self.dim(), n)?;
        tensor(&self.base, &tensor_power(&self.normalized, n - 1)?)
    }

    fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        if !self.is_normalized() {
            return Err(Error::Unsupported(
                "word probabilities of a subnormalized simple source depend on the first letter".into(),
            ));
        }
        Ok(ClassLaw::from_letter_probs(
            &[1.0],
            vec![q.outcome_probabilities(&self.base)?],
        ))
    }

    fn ln_word_prob(&self, q: &ProjSystem, word: &OutcomeWord) -> Result<f64> {
        super::check_word(q, word)?;
        let first = q.outcome_probabilities(&self.base)?;
        let rest = q.outcome_probabilities(&self.normalized)?;
        Ok(word
            .indices()
            .iter()
            .enumerate()
            .map(|(j, &i)| if j == 0 { first[i].ln() } else { rest[i].ln() })
            .sum())
    }
}

/// A mixture whose weights discretize a prior over a scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSource {
    thetas: Vec<f64>,
    mixture: MixtureSource,
}

impl QuadratureSource {
    /// Nodes `(θ_j, u_j, ρ_θj)`; the `u_j` must sum to one within 1e-6.
    pub fn new(nodes: Vec<(f64, f64, Density)>) -> Result<Self> {
        let thetas = nodes.iter().map(|n| n.0).collect();
        let components = nodes
            .into_iter()
            .map(|(_, weight, s)| Component {
                weight,
                state: s.into_semi(),
            })
            .collect();
        Ok(QuadratureSource {
            thetas,
            mixture: MixtureSource::build(components, SourceKind::Source, QUAD_WEIGHT_TOL)?,
        })
    }

    /// Gauss–Legendre discretization of `∫ prior(θ) ρ_θ dθ` over `[lo, hi]`.
    pub fn from_prior(
        lo: f64,
        hi: f64,
        nodes: usize,
        prior: impl Fn(f64) -> f64,
        state: impl Fn(f64) -> Result<Density>,
    ) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Parameter(format!("empty parameter box [{lo}, {hi}]")));
        }
        let rule = GaussLegendre::new(nodes)
            .map_err(|_| Error::Parameter(format!("quadrature needs at least 2 nodes, got {nodes}")))?;
        let half = 0.5 * (hi - lo);
        let mut out = Vec::with_capacity(nodes);
        for &(x, w) in rule.as_node_weight_pairs() {
            let theta = lo + half * (x + 1.0);
            let u = half * w * prior(theta);
            if u > 0.0 {
                out.push((theta, u, state(theta)?));
            }
        }
        QuadratureSource::new(out)
    }

    /// Uniform prior over the one-parameter qubit family with constant `c`.
    pub fn example_uniform(c: f64, nodes: usize) -> Result<Self> {
        QuadratureSource::from_prior(0.0, 1.0, nodes, |_| 1.0, |t| example_state(t, c))
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn mixture(&self) -> &MixtureSource {
        &self.mixture
    }
}

impl QuantumSource for QuadratureSource {
    fn dim(&self) -> usize {
        self.mixture.dim()
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Source
    }

    fn level(&self, n: usize) -> Result<Op> {
        self.mixture.level(n)
    }

    fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        self.mixture.class_law(q)
    }
}

/// Exact uniform-prior mixture `∫₀¹ ρ_θ^{⊗n} dθ` over the one-parameter
/// qubit family, evaluated with Beta integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPriorSource {
    c: f64,
}

impl UniformPriorSource {
    pub fn new(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Parameter(format!("c = {c} outside [0, 1]")));
        }
        Ok(UniformPriorSource { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Index of the `|0⟩⟨0|` outcome when `q` is the computational system
    /// in some order.
    fn computational_index(q: &ProjSystem) -> Result<usize> {
        if q.dim() != 2 || q.len() != 2 || !q.is_diagonal() {
            return Err(Error::Unsupported(
                "closed-form mixture law needs the computational system; use a quadrature source".into(),
            ));
        }
        Ok(if q.projectors()[0].get(0, 0).re > 0.5 { 0 } else { 1 })
    }

    /// Restriction to the computational system, which removes coherences.
    pub fn q_restrict(&self, q: &ProjSystem) -> Result<Self> {
        Self::computational_index(q)?;
        Ok(UniformPriorSource { c: 0.0 })
    }
}

impl QuantumSource for UniformPriorSource {
    fn dim(&self) -> usize {
        2
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Source
    }

    fn level(&self, n: usize) -> Result<Op> {
        let total = checked_pow(2, n)?;
        check_cap(total)?;
        let ln_c = self.c.ln();
        let m = nalgebra::DMatrix::from_fn(total, total, |r, s| {
            let (mut a, mut b, mut off) = (0u32, 0u32, 0u32);
            for j in 0..n {
                match ((r >> j) & 1, (s >> j) & 1) {
                    (0, 0) => a += 1,
                    (1, 1) => b += 1,
                    _ => off += 1,
                }
            }
            if off > 0 && self.c == 0.0 {
                return crate::opcore::C64::new(0.0, 0.0);
            }
            let h = f64::from(off) / 2.0;
            let ln_entry = if off > 0 { h * ln_c } else { 0.0 }
                + statrs::function::beta::ln_beta(f64::from(a) + h + 1.0, f64::from(b) + h + 1.0);
            crate::opcore::C64::new(ln_entry.exp(), 0.0)
        });
        Op::from_matrix(m)
    }

    fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        Ok(ClassLaw::Beta {
            first: Self::computational_index(q)?,
        })
    }
}

/// `(w_i, U ρ_i U†)`.
pub fn conjugate(src: &MixtureSource, u: &Op) -> Result<MixtureSource> {
    let defect = u.unitarity_defect();
    if defect > 1e-9 {
        return Err(Error::NotUnitary(defect));
    }
    let ud = u.adjoint();
    let components = src
        .components
        .iter()
        .map(|c| {
            Ok(Component {
                weight: c.weight,
                state: SemiDensity::new((u * c.state.as_op() * &ud).hermitian_part())?,
            })
        })
        .collect::<Result<_>>()?;
    MixtureSource::new(components, src.kind)
}

/// Levels `(ρ̄^(n))_{Q^(n)}`; for a mixture these are the mixtures of the
/// projected components.
pub fn q_restrict(src: &MixtureSource, q: &ProjSystem) -> Result<MixtureSource> {
    q.require_minimal()?;
    let components = src
        .components
        .iter()
        .map(|c| {
            Ok(Component {
                weight: c.weight,
                state: SemiDensity::new(q_project(&c.state, q)?.hermitian_part())?,
            })
        })
        .collect::<Result<_>>()?;
    MixtureSource::new(components, src.kind)
}

/// `Σ_k α_k ρ̄_k`; zero weights drop their source.
pub fn convex_combine(sources: &[&MixtureSource], weights: &[f64]) -> Result<MixtureSource> {
    if sources.len() != weights.len() || sources.is_empty() {
        return Err(Error::InvalidWeights(format!(
            "{} sources but {} weights",
            sources.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let kind = sources[0].kind;
    if sources.iter().any(|s| s.kind != kind) {
        return Err(Error::InvalidWeights("sources of different kinds".into()));
    }
    let mut components = Vec::new();
    for (s, &a) in sources.iter().zip(weights) {
        if a == 0.0 {
            continue;
        }
        components.extend(s.components.iter().map(|c| Component {
            weight: a * c.weight,
            state: c.state.clone(),
        }));
    }
    MixtureSource::new(components, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsource::{marginal_residual, outcome_prob};
    use crate::words::OutcomeWord;

    fn qubit(seed: u64) -> Density {
        crate::rng::random_density(2, &mut crate::rng::seeded(seed))
    }

    #[test]
    fn singleton_and_simple_levels_are_powers() {
        let rho = qubit(1);
        let cube = tensor_power(&rho, 3).unwrap();
        let mix = MixtureSource::source(vec![(1.0, rho.clone())]).unwrap();
        assert!(mix.level(3).unwrap().max_abs_diff(&cube) < 1e-14);
        let simple = SimpleSource::new(rho.into_semi()).unwrap();
        assert!(simple.level(3).unwrap().max_abs_diff(&cube) < 1e-14);
    }

    #[test]
    fn subnormalized_simple_source() {
        let rho = qubit(2).weighted(0.5).unwrap();
        let s = SimpleSource::new(rho).unwrap();
        assert_eq!(s.kind(), SourceKind::Generalized);
        assert!((s.level(3).unwrap().trace().re - 0.5).abs() < 1e-12);
        let q = ProjSystem::computational(2);
        let w = OutcomeWord::parse("1,0", 2).unwrap();
        let level = s.level(2).unwrap();
        let dense = level.get(2, 2).re;
        assert!((outcome_prob(&s, &q, &w).unwrap() - dense).abs() < 1e-14);
        assert!(s.class_law(&q).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(MixtureSource::source(vec![(0.5, qubit(1))]).is_err());
        assert!(MixtureSource::source(vec![(1.0, qubit(1)), (0.0, qubit(2))]).is_err());
        let half = qubit(1).weighted(0.5).unwrap();
        assert!(MixtureSource::generalized(vec![(1.0, half.clone())]).is_ok());
        assert!(MixtureSource::generalized(vec![(1.5, half.clone()), (1.0, half)]).is_err());
    }

    #[test]
    fn uniform_prior_word_probabilities() {
        let q = ProjSystem::computational(2);
        let src = UniformPriorSource::new(0.7).unwrap();
        let w = OutcomeWord::binary(5, 2).unwrap();
        assert!((outcome_prob(&src, &q, &w).unwrap() - 1.0 / 60.0).abs() < 1e-15);
        let quad = QuadratureSource::example_uniform(0.7, DEFAULT_NODES).unwrap();
        assert!((outcome_prob(&quad, &q, &w).unwrap() - 1.0 / 60.0).abs() < 1e-12);
        let total: f64 = quad.mixture().weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_prior_levels_match_quadrature() {
        for c in [0.0, 0.4, 1.0] {
            let exact = UniformPriorSource::new(c).unwrap();
            let quad = QuadratureSource::example_uniform(c, 256).unwrap();
            for n in 0..=4 {
                let a = exact.level(n).unwrap();
                let b = quad.level(n).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-6, "c={c} n={n}");
            }
            for n in 0..4 {
                assert!(marginal_residual(&exact, n).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugation_and_restriction() {
        let src = MixtureSource::source(vec![(0.3, qubit(3)), (0.7, qubit(4))]).unwrap();
        let same = conjugate(&src, &Op::identity(2)).unwrap();
        assert!(same.level(2).unwrap().max_abs_diff(&src.level(2).unwrap()) < 1e-14);
        assert!(conjugate(&src, &Op::diag(&[1.0, 2.0])).is_err());
        let h = Op::hadamard();
        let conj = conjugate(&src, &h).unwrap();
        let expect = &(&h * &src.level(1).unwrap()) * &h.adjoint();
        assert!(conj.level(1).unwrap().max_abs_diff(&expect) < 1e-14);

        let q = ProjSystem::computational(2);
        let r = q_restrict(&src, &q).unwrap();
        for n in 1..=3 {
            let l = r.level(n).unwrap();
            assert!((l.trace().re - 1.0).abs() < 1e-10);
            let projected = crate::projlat::ProductSystem::power(&q, n).project(&src.level(n).unwrap()).unwrap();
            assert!(l.max_abs_diff(&projected) < 1e-14);
        }
        assert!(q_restrict(&src, &ProjSystem::trivial(2)).is_err());
    }

    #[test]
    fn convex_combination() {
        let a = MixtureSource::source(vec![(1.0, qubit(5))]).unwrap();
        let b = MixtureSource::source(vec![(0.5, qubit(6)), (0.5, qubit(7))]).unwrap();
        let degenerate = convex_combine(&[&a, &b], &[1.0, 0.0]).unwrap();
        assert_eq!(degenerate, a);
        let self_mix = convex_combine(&[&b, &b], &[0.5, 0.5]).unwrap();
        assert!(self_mix.level(3).unwrap().max_abs_diff(&b.level(3).unwrap()) < 1e-10);
        let mix = convex_combine(&[&a, &b], &[0.25, 0.75]).unwrap();
        let expect = a.level(2).unwrap().scale(0.25) + b.level(2).unwrap().scale(0.75);
        assert!(mix.level(2).unwrap().max_abs_diff(&expect) < 1e-10);
        assert!(convex_combine(&[&a, &b], &[0.5, 0.6]).is_err());
    }
}
