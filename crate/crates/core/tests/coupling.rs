use std::collections::BTreeSet;

use proptest::prelude::*;

use truncperc::oriented::{explore_visit, ExplorationParams};
use truncperc::sequences::SequenceSpec;
use truncperc::starlat::{block_path_fronts, check_h, BlockParams, StarParams};
use truncperc::Site;

fn fronts(params: &ExplorationParams, seed: u64) -> Vec<BTreeSet<Site>> {
    let mut out = vec![BTreeSet::new(); params.horizon as usize + 1];
    explore_visit(&params.field(seed), params, |n, front| {
        out[n as usize] = front.iter().copied().collect();
    });
    out
}

fn nested(small: &[BTreeSet<Site>], big: &[BTreeSet<Site>]) -> bool {
    small.iter().zip(big).all(|(a, b)| a.is_subset(b))
}

fn law() -> impl Strategy<Value = SequenceSpec> {
    prop_oneof![
        (0.05f64..0.6).prop_map(|c| SequenceSpec::PowerLaw {
            alpha: 1.0,
            scale: c
        }),
        (0.1f64..0.9).prop_map(|c| SequenceSpec::PowerLaw {
            alpha: 2.0,
            scale: c
        }),
        Just(SequenceSpec::Harmonic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oriented_clusters_nest_in_k(seed in any::<u64>(), dim in 1usize..=3, k in 1u64..6, dk in 1u64..6, p in law(), q in law()) {
        let base = ExplorationParams::new(dim, k, 8, 6, p, q).unwrap();
        prop_assert!(nested(&fronts(&base, seed), &fronts(&base.with_k(k + dk), seed)));
    }

    #[test]
    fn oriented_clusters_nest_in_window(seed in any::<u64>(), k in 1u64..6, w in 0i64..6, dw in 1i64..4, p in law()) {
        let small = ExplorationParams::new(2, k, 8, w, p.clone(), p.clone()).unwrap();
        let big = ExplorationParams::new(2, k, 8, w + dw, p.clone(), p).unwrap();
        prop_assert!(nested(&fronts(&small, seed), &fronts(&big, seed)));
    }

    #[test]
    fn h_events_grow_with_window_and_k(seed in any::<u64>(), m in -6i64..6, n in 0u64..20, k in 1u64..5, w in 1i64..6) {
        let p = SequenceSpec::PowerLaw { alpha: 1.0, scale: 0.5 };
        let small = StarParams::new(0.5, p, k, w).unwrap();
        let field = small.field(seed);
        let hit = check_h(&field, m, n, &small);
        let wider = StarParams { window: w + 2, ..small.clone() };
        let longer = small.with_k(k + 2);
        if hit {
            prop_assert!(check_h(&field, m, n, &wider));
            prop_assert!(check_h(&longer.field(seed), m, n, &longer));
        }
    }

    #[test]
    fn block_fronts_grow_with_k(seed in any::<u64>(), k in 1u64..4) {
        let p = SequenceSpec::PowerLaw { alpha: 1.0, scale: 0.8 };
        let block = BlockParams { width: 2, delta: 0.2 };
        let small = StarParams::new(0.7, p, k, 4).unwrap();
        let big = small.with_k(k + 3);
        let a = block_path_fronts(&small.field(seed), &block, &small, 10);
        let b = block_path_fronts(&big.field(seed), &block, &big, 10);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y), "{:?} {:?}", a, b);
    }
}
