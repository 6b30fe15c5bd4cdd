use hvscal_core::bandit::{explore_ucb, make_anticorrelated, ExploreUcbConfig, Perturbation};
use hvscal_core::hypervolume::{cumulative_hv, hv_exact, HvMode};
use hvscal_core::scalarize::SamplerKind;
use hvscal_core::{
    argmax_scalarized, dominates, pareto_front, ObjectiveSet, ScalarizerSpec, WeightSampler,
    WeightVector,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point_set(max_k: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_k).prop_flat_map(move |k| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), 1..=max_n)
    })
}

fn set(rows: &[Vec<f64>]) -> ObjectiveSet {
    ObjectiveSet::from_rows(rows.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hypervolume_depends_only_on_the_front(rows in point_set(4, 12)) {
        let k = rows[0].len();
        let z = vec![0.0; k];
        let all = set(&rows);
        let front = all.select(&pareto_front(&all).unwrap());
        let (a, b) = (hv_exact(&all, &z).unwrap(), hv_exact(&front, &z).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn hypervolume_is_monotone_and_bounded(rows in point_set(4, 12), extra in prop::collection::vec(0.0f64..1.0, 4)) {
        let k = rows[0].len();
        let z = vec![0.0; k];
        let base = hv_exact(&set(&rows), &z).unwrap();
        let mut grown = rows.clone();
        grown.push(extra[..k].to_vec());
        let bigger = hv_exact(&set(&grown), &z).unwrap();
        prop_assert!(bigger >= base - 1e-12);
        // Each box lies inside the unit cube.
        prop_assert!(bigger <= 1.0 + 1e-12);
        let largest_box = grown
            .iter()
            .map(|p| p.iter().product::<f64>())
            .fold(0.0, f64::max);
        prop_assert!(bigger >= largest_box - 1e-12);
    }

    #[test]
    fn cumulative_curve_matches_prefix_volumes(rows in point_set(3, 10)) {
        let k = rows[0].len();
        let z = vec![0.0; k];
        let all = set(&rows);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let curve = cumulative_hv(&all, &z, HvMode::Exact, &mut rng).unwrap();
        for (t, value) in curve.iter().enumerate() {
            let prefix = hv_exact(&all.prefix(t + 1), &z).unwrap();
            prop_assert!((value - prefix).abs() <= 1e-10);
        }
    }

    #[test]
    fn linear_argmax_is_pareto_optimal(
        rows in point_set(4, 15),
        raw in prop::collection::vec(0.05f64..1.0, 4),
    ) {
        let k = rows[0].len();
        let all = set(&rows);
        let weights = WeightVector::from_direction(&raw[..k]).unwrap();
        let index = argmax_scalarized(&all, &ScalarizerSpec::LINEAR, &weights, &vec![0.0; k]).unwrap();
        for other in all.iter() {
            prop_assert!(!dominates(other, all.point(index)).unwrap());
        }
    }

    #[test]
    fn hypervolume_scalarization_is_scale_equivariant(
        y in prop::collection::vec(0.01f64..1.0, 3),
        raw in prop::collection::vec(0.05f64..1.0, 3),
        c in 0.1f64..10.0,
    ) {
        let weights = WeightVector::from_direction(&raw).unwrap();
        let spec = ScalarizerSpec::HYPERVOLUME;
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        let (a, b) = (spec.evaluate(&weights, &y).unwrap(), spec.evaluate(&weights, &scaled).unwrap());
        prop_assert!((b - c * a).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn sampled_weights_are_positive_and_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [
        SamplerKind::UniformSpherePositive,
        SamplerKind::BoxedLinear,
        SamplerKind::BoxedChebyshev,
    ] {
        let sampler = WeightSampler::with_default_box(kind);
        for _ in 0..1000 {
            let w = sampler.sample(5, &mut rng);
            assert!(w.iter().all(|&v| v > 0.0));
            let norm = match kind {
                SamplerKind::UniformSpherePositive => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
                _ => w.iter().sum(),
            };
            assert!((norm - 1.0).abs() < 1e-12, "{kind:?}");
        }
    }
}

#[test]
fn explore_ucb_plays_exactly_the_horizon() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let instance = make_anticorrelated(4, 5, Perturbation::default(), 100, &mut rng).unwrap();
    let config = ExploreUcbConfig::new(
        30,
        ScalarizerSpec::HYPERVOLUME,
        WeightSampler::uniform(),
        instance.num_objectives(),
    );
    let trace = explore_ucb(&instance, &config, &mut rng).unwrap();
    assert_eq!(trace.actions.nrows(), 30);
    assert_eq!(trace.expected_rewards.len(), 30);
    assert_eq!(trace.exploit_indices.len(), 15);
    for (r, &index) in trace.exploit_indices.iter().enumerate() {
        let played: Vec<f64> = trace.actions.row(2 * r + 1).iter().copied().collect();
        let candidate: Vec<f64> = instance.actions().row(index).iter().copied().collect();
        assert_eq!(played, candidate);
        assert_eq!(trace.expected_rewards.point(2 * r + 1), &instance.expected_reward(&played)[..]);
    }

    let odd = ExploreUcbConfig { horizon: 31, ..config };
    assert!(explore_ucb(&instance, &odd, &mut rng).is_err());
}

#[test]
fn explore_ucb_is_reproducible_from_a_seed() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let instance = make_anticorrelated(3, 4, Perturbation::default(), 50, &mut rng).unwrap();
        let config = ExploreUcbConfig::new(
            20,
            ScalarizerSpec::CHEBYSHEV,
            WeightSampler::with_default_box(SamplerKind::BoxedChebyshev),
            3,
        );
        explore_ucb(&instance, &config, &mut rng).unwrap()
    };
    assert_eq!(run(), run());
}
