use proptest::prelude::*;

use retrodp::harness::config::RunConfig;
use retrodp::harness::data::parse_data;
use retrodp::harness::trace::Trace;
use retrodp::model::ComponentParams;
use retrodp::retro_conditional::AllocationState;
use retrodp::stick_breaking::StickState;

fn atom() -> ComponentParams {
    ComponentParams::new(0.0, 1.0).unwrap()
}

proptest! {
    #[test]
    fn weights_and_tail_sum_to_one(sticks in prop::collection::vec(1e-6f64..1.0, 1..60)) {
        let n = sticks.len();
        let st = StickState::from_parts(sticks.clone(), vec![atom(); n]).unwrap();
        let total: f64 = st.weights().iter().sum::<f64>() + st.log_tail_mass().exp();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let direct: f64 = sticks.iter().map(|v| (1.0 - v).ln()).sum();
        prop_assert!((st.log_tail_mass() - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn neighbor_swaps_keep_prefix_consistent(
        sticks in prop::collection::vec(0.01f64..0.99, 2..20),
        swaps in prop::collection::vec(0usize..100, 0..30),
    ) {
        let n = sticks.len();
        let mut st = StickState::from_parts(sticks, vec![atom(); n]).unwrap();
        for s in swaps {
            st.swap_neighbors(s % (n - 1));
        }
        let fresh = StickState::from_parts(st.sticks().to_vec(), st.atoms().to_vec()).unwrap();
        prop_assert!((st.log_tail_mass() - fresh.log_tail_mass()).abs() < 1e-12);
        for j in 0..n {
            prop_assert!((st.weight(j) - fresh.weight(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn allocation_bookkeeping(
        labels in prop::collection::vec(0usize..8, 1..20),
        moves in prop::collection::vec((0usize..20, 0usize..10), 0..40),
        swaps in prop::collection::vec((0usize..10, 0usize..10), 0..10),
    ) {
        let n = labels.len();
        let mut a = AllocationState::new(labels);
        for (i, j) in moves {
            let i = i % n;
            let expected = a.max_after_move(i, j);
            a.reassign(i, j);
            prop_assert_eq!(a.max_k(), expected);
            prop_assert!(a.is_consistent());
        }
        for (x, y) in swaps {
            if x != y {
                a.swap_labels(x, y);
                prop_assert!(a.is_consistent());
            }
        }
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_data(&text);
        let _ = RunConfig::from_kv_str(&text);
        if let Ok(t) = Trace::parse(&text) {
            let again = Trace::parse(&t.to_csv_string()).unwrap();
            prop_assert_eq!(again.records.len(), t.records.len());
        }
    }
}
