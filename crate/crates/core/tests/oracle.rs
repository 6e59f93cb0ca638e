//! Acceptance probabilities and swap ratios against the joint-density oracle.

mod common;

use rand::Rng;

use retrodp::model::ComponentParams;
use retrodp::retro_conditional::{
    accept_probability, neighbor_swap_acceptance, proposal_bound, proposal_normalizer, random_swap_acceptance,
    AcceptCase,
};
use retrodp::rng;

use common::{oracle_weights, relative_error, Frozen};

#[test]
fn mh_cases_match_oracle() {
    let mut r = rng::stream(31, 0);
    let mut seen = [0usize; 3];
    for _ in 0..500 {
        let f = Frozen::random(&mut r);
        let st = f.to_state();
        for i in 0..f.data.len() {
            for j in 0..f.sticks.len() {
                let (a, case) = accept_probability(&st, i, j).unwrap();
                seen[case as usize] += 1;
                let o = f.mh_acceptance(i, j);
                assert!(relative_error(a, o) < 1e-10, "case {case:?}: {a} vs {o}");
                if case == AcceptCase::Within {
                    assert_eq!(a, 1.0);
                }
            }
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn swaps_match_oracle() {
    let mut r = rng::stream(32, 0);
    for _ in 0..500 {
        let f = Frozen::random(&mut r);
        let st = f.to_state();
        let alive = f.alive();
        for &a in &alive {
            for &b in &alive {
                if a != b {
                    let lib = random_swap_acceptance(&st, a, b);
                    assert!(relative_error(lib, f.random_swap_acceptance(a, b)) < 1e-10);
                }
            }
        }
        for j in 0..f.max_k().min(f.sticks.len() - 1) {
            let lib = neighbor_swap_acceptance(&st, j);
            assert!(relative_error(lib, f.neighbor_swap_acceptance(j)) < 1e-10);
        }
    }
}

#[test]
fn normalizer_and_bound_from_scratch() {
    let mut r = rng::stream(33, 0);
    for _ in 0..300 {
        let f = Frozen::random(&mut r);
        let st = f.to_state();
        let i = r.random_range(0..f.data.len());
        let y = f.data[i];
        let dens = |z: &ComponentParams| {
            (-(y - z.mean).powi(2) / (2.0 * z.variance)).exp() / (2.0 * std::f64::consts::PI * z.variance).sqrt()
        };
        let m = f.max_k();
        let p = oracle_weights(&f.sticks);
        let bound = f.atoms[..m].iter().map(dens).fold(0.0, f64::max);
        let c: f64 = (0..m).map(|j| p[j] * dens(&f.atoms[j])).sum::<f64>() + bound * (1.0 - p[..m].iter().sum::<f64>());
        assert!(relative_error(proposal_bound(&st, i), bound) < 1e-12);
        assert!(relative_error(proposal_normalizer(&st, i), c) < 1e-10);
    }
}

#[test]
fn acceptance_survives_far_outliers() {
    // Densities underflow in linear space; the ratio must still be finite.
    let mut r = rng::stream(34, 0);
    let mut f = Frozen::random(&mut r);
    f.data[0] = 60.0;
    let st = f.to_state();
    for j in 0..f.sticks.len() {
        let (a, _) = accept_probability(&st, 0, j).unwrap();
        assert!((0.0..=1.0).contains(&a), "{a}");
    }
}
