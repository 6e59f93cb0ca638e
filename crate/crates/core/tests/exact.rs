mod common;

use retrodp::exact_allocation::{gibbs_update_allocations_exact, BoundedWeightedStream};
use retrodp::model::{BaseMeasureParams, ModelSpec, VarianceMode};
use retrodp::retro_conditional::ChainState;
use retrodp::rng;
use retrodp::stick_breaking::StickState;

#[test]
fn law_of_j_matches_truncation_oracle() {
    for seed in [1, 2] {
        let c = common::exact_vs_truncation(seed, 50_000);
        assert!(c.tv < 0.01, "seed {seed}: TV {}", c.tv);
        assert!(c.monotone);
    }
}

#[test]
fn lazily_realized_sticks_give_prior_predictive() {
    // With constant factors the law of J is the prior law of one allocation:
    // pr(J = 0) = E[V_1] = 1 / (1 + alpha).
    let spec = ModelSpec::new(BaseMeasureParams::new(0.0, 1.0, 2.0, 1.0).unwrap(), 2.0).unwrap();
    let mut r = rng::stream(3, 0);
    let draws = 40_000;
    let mut zero = 0;
    for _ in 0..draws {
        let mut st = StickState::new();
        let mut s = BoundedWeightedStream::new(&mut st, &spec, 1.0, |_, _: &StickState| 0.5).unwrap();
        zero += usize::from(s.sample(&mut r).unwrap() == 0);
    }
    let p = zero as f64 / draws as f64;
    let se = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
    assert!((p - 1.0 / 3.0).abs() < 4.0 * se, "{p}");
}

#[test]
fn exact_gibbs_keeps_state_consistent() {
    let base = BaseMeasureParams::new(0.0, 4.0, 2.0, 1.0).unwrap();
    let spec = ModelSpec::with_variance(base, 1.0, VarianceMode::Fixed(0.3)).unwrap();
    let data: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { -1.5 } else { 1.5 } + 0.01 * i as f64).collect();
    let mut r = rng::stream(4, 0);
    let mut st = ChainState::initial(data, spec, &mut r);
    for _ in 0..200 {
        let examined = gibbs_update_allocations_exact(&mut st, &mut r).unwrap();
        assert!(examined >= st.data.len());
        assert!(st.alloc.is_consistent());
        assert_eq!(st.sticks.frontier(), st.alloc.max_k());
    }
}
