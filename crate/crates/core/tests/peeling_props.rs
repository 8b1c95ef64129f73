use std::collections::BTreeSet;

use hyperpeel::peeling::{is_stopping_set, max_stopping_set_bruteforce, peel};
use hyperpeel::{Hypergraph, PeelConfig};
use proptest::prelude::*;
use proptest::sample::subsequence;

#[derive(Debug, Clone)]
struct Case {
    n: usize,
    k: usize,
    d: usize,
    edges: Vec<Vec<u32>>,
    removed: Vec<u32>,
    extra: Vec<u32>,
}

impl Case {
    fn graph(&self, removed: &[u32]) -> Hypergraph {
        Hypergraph::from_edge_list(self.n, self.k, &self.edges, removed).unwrap()
    }
}

fn case() -> impl Strategy<Value = Case> {
    (4usize..=14, 2usize..=4)
        .prop_flat_map(|(n, k)| {
            let verts: Vec<u32> = (0..n as u32).collect();
            (
                Just(n),
                Just(k),
                2..=k,
                prop::collection::vec(subsequence(verts.clone(), k), 0..=3 * n),
                subsequence(verts.clone(), 0..=n / 3),
                subsequence(verts, 0..=n / 3),
            )
        })
        .prop_map(|(n, k, d, edges, removed, extra)| Case {
            n,
            k,
            d,
            edges,
            removed,
            extra,
        })
}

fn as_set(v: &[u32]) -> BTreeSet<u32> {
    v.iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn batch_and_one_vertex_agree(c in case(), seed in any::<u64>()) {
        let g = c.graph(&c.removed);
        let batch = peel(&g, &PeelConfig::batch(c.d)).unwrap();
        let single = peel(&g, &PeelConfig::one_vertex(c.d, seed)).unwrap();
        prop_assert_eq!(&batch.remainder, &single.remainder);
        prop_assert_eq!(batch.peeled, single.peeled);
    }

    #[test]
    fn remainder_is_largest_stopping_set(c in case()) {
        let g = c.graph(&c.removed);
        let res = peel(&g, &PeelConfig::batch(c.d)).unwrap();
        let oracle = max_stopping_set_bruteforce(&g, c.d).unwrap();
        prop_assert_eq!(as_set(&res.remainder), as_set(&oracle));
    }

    #[test]
    fn remainder_is_stopping_set(c in case(), seed in any::<u64>()) {
        let g = c.graph(&c.removed);
        let res = peel(&g, &PeelConfig::one_vertex(c.d, seed)).unwrap();
        prop_assert!(is_stopping_set(&g, &res.remainder, c.d).unwrap());
        prop_assert_eq!(res.remainder.len() + res.peeled + c.removed.len(), c.n);
    }

    #[test]
    fn removing_more_shrinks_remainder(c in case()) {
        let small = peel(&c.graph(&c.removed), &PeelConfig::batch(c.d)).unwrap();
        let mut more = as_set(&c.removed);
        more.extend(&c.extra);
        let more: Vec<u32> = more.into_iter().collect();
        let big = peel(&c.graph(&more), &PeelConfig::batch(c.d)).unwrap();
        prop_assert!(as_set(&big.remainder).is_subset(&as_set(&small.remainder)));
    }

    #[test]
    fn stopping_sets_are_closed_under_union(c in case()) {
        let base = c.graph(&[]);
        let a = peel(&c.graph(&c.removed), &PeelConfig::batch(c.d)).unwrap().remainder;
        let b = peel(&c.graph(&c.extra), &PeelConfig::batch(c.d)).unwrap().remainder;
        prop_assert!(is_stopping_set(&base, &a, c.d).unwrap());
        prop_assert!(is_stopping_set(&base, &b, c.d).unwrap());
        let union: Vec<u32> = as_set(&a).union(&as_set(&b)).copied().collect();
        prop_assert!(is_stopping_set(&base, &union, c.d).unwrap());
    }

    #[test]
    fn arbitrary_stopping_sets_union(c in case(), picks in prop::collection::vec(any::<u32>(), 2)) {
        let base = c.graph(&[]);
        let subset = |bits: u32| -> Vec<u32> { (0..c.n as u32).filter(|v| bits >> v & 1 == 1).collect() };
        let (s, t) = (subset(picks[0]), subset(picks[1]));
        if is_stopping_set(&base, &s, c.d).unwrap() && is_stopping_set(&base, &t, c.d).unwrap() {
            let union: Vec<u32> = as_set(&s).union(&as_set(&t)).copied().collect();
            prop_assert!(is_stopping_set(&base, &union, c.d).unwrap());
        }
    }
}
