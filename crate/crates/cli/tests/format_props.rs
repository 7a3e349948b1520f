use leantd::decompose::{decompose, DecomposeOptions};
use leantd::graph::Graph;
use leantd_cli::format::{parse_dimacs, parse_td, write_dimacs, write_td};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (0..=max_n).prop_flat_map(|n| {
        let pairs = n * n.saturating_sub(1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let all = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::new(n, all.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(g in graph_strategy(12)) {
        prop_assert_eq!(parse_dimacs(&write_dimacs(&g)).unwrap(), g);
    }

    #[test]
    fn td_round_trip(g in graph_strategy(10), k in 1usize..4, seed in any::<u64>()) {
        let td = decompose(&g, k, &DecomposeOptions { seed, ..Default::default() }).unwrap().td;
        let text = write_td(&td);
        let back = parse_td(&text).unwrap();
        prop_assert_eq!(write_td(&back), text);
        let mut a: Vec<_> = td.bags().iter().map(|b| b.to_vec()).collect();
        let mut b: Vec<_> = back.bags().iter().map(|b| b.to_vec()).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        prop_assert_eq!(back.root().map(|r| back.bag(r).clone()), td.root().map(|r| td.bag(r).clone()));
    }
}
