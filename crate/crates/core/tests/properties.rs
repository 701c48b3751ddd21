use proptest::prelude::*;

use qmdl::opcore::Density;
use qmdl::projlat::ProjSystem;
use qmdl::qsource::{outcome_prob, MixtureSource, QuantumSource};
use qmdl::words::OutcomeWord;
use qmdl::xplab::distinguishability_mass;

fn bernoulli_source(p: f64) -> MixtureSource {
    MixtureSource::source(vec![(1.0, Density::from_probabilities(&[p, 1.0 - p]).unwrap())]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_a_probability_and_falls_with_delta(
        p in 0.05f64..0.95,
        p2 in 0.05f64..0.95,
        n in 1usize..40,
        d1 in 0.01f64..10.0,
        d2 in 0.01f64..10.0,
    ) {
        let q = ProjSystem::computational(2);
        let reference = bernoulli_source(p).class_law(&q).unwrap();
        let competitor = bernoulli_source(p2).class_law(&q).unwrap();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let m_lo = distinguishability_mass(&reference, &competitor, n, lo).unwrap().mass;
        let m_hi = distinguishability_mass(&reference, &competitor, n, hi).unwrap().mass;
        prop_assert!((0.0..=1.0 + 1e-9).contains(&m_lo));
        prop_assert!(m_hi <= m_lo);
    }

    #[test]
    fn word_probabilities_marginalize(
        weights in prop::collection::vec(0.1f64..1.0, 1..4),
        thetas in prop::collection::vec(0.0f64..1.0, 3),
        bits in prop::collection::vec(0usize..2, 0..12),
    ) {
        let total: f64 = weights.iter().sum();
        let items = weights
            .iter()
            .zip(&thetas)
            .map(|(w, t)| (w / total, Density::from_probabilities(&[*t, 1.0 - t]).unwrap()))
            .collect();
        let src = MixtureSource::source(items).unwrap();
        let q = ProjSystem::computational(2);
        let word = OutcomeWord::new(bits, 2).unwrap();
        let whole = outcome_prob(&src, &q, &word).unwrap();
        let split: f64 = (0..2)
            .map(|j| outcome_prob(&src, &q, &word.extended(j).unwrap()).unwrap())
            .sum();
        prop_assert!((whole - split).abs() <= 1e-10);
    }
}
