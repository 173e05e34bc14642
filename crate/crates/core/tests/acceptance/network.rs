use proptest::prelude::*;

use pricenet::network::{transitive_closure, validate, Violation};
use pricenet::{InfluenceNetwork, NetworkError};

use crate::common::*;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Random transitive DAG: random forward edges under a random node order,
/// then closed.
fn random_dag() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..=7)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (Just(n), prop::collection::vec(any::<bool>(), pairs), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
        .prop_map(|(n, bits, order)| {
            let mut adj = vec![vec![false; n]; n];
            let mut b = bits.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    adj[order[i]][order[j]] = b.next().unwrap();
                }
            }
            transitive_closure(&mut adj);
            adj
        })
}

fn longest_path_nodes(adj: &[Vec<bool>]) -> usize {
    fn from(adj: &[Vec<bool>], i: usize) -> usize {
        1 + (0..adj.len()).filter(|&j| adj[i][j]).map(|j| from(adj, j)).max().unwrap_or(0)
    }
    (0..adj.len()).map(|i| from(adj, i)).max().unwrap_or(0)
}

proptest! {
    #[test]
    fn path_counts_match_enumeration(adj in random_dag()) {
        let net = validate(adj.clone(), None).unwrap();
        let (totals, per_firm) = enumerate_paths(&adj);
        prop_assert_eq!(&net.path_counts().totals, &totals);
        prop_assert_eq!(&net.path_counts().per_firm, &per_firm);
    }

    #[test]
    fn depth_is_longest_path(adj in random_dag()) {
        let net = validate(adj.clone(), None).unwrap();
        prop_assert_eq!(net.depth(), longest_path_nodes(&adj));
        let totals = &net.path_counts().totals;
        prop_assert!(totals[net.depth()..].iter().all(|&t| t == 0));
    }

    #[test]
    fn chain_bounds_every_network(adj in random_dag()) {
        let n = adj.len() as u128;
        let net = validate(adj, None).unwrap();
        for (k, &t) in net.path_counts().totals.iter().enumerate() {
            prop_assert!(t <= binomial(n, k as u128 + 1));
        }
    }
}

#[test]
fn chain_counts_are_binomial() {
    for n in 1..=12usize {
        let net = InfluenceNetwork::chain(n);
        for (k, &t) in net.path_counts().totals.iter().enumerate() {
            assert_eq!(t, binomial(n as u128, k as u128 + 1), "chain({n}) k = {k}");
        }
        assert_eq!(net.depth(), n);
        assert_eq!(net.path_counts().totals.iter().sum::<u128>(), (1u128 << n) - 1);
    }
}

#[test]
fn large_chain_counts_do_not_overflow() {
    let net = InfluenceNetwork::chain(60);
    assert_eq!(net.path_counts().totals[29], binomial(60, 30));
}

#[test]
fn empty_network_has_depth_one() {
    let net = InfluenceNetwork::empty(5);
    assert_eq!(net.depth(), 1);
    assert_eq!(net.path_counts().totals, vec![5, 0, 0, 0, 0]);
}

#[test]
fn fig4_counts() {
    let net = fig4();
    assert_eq!(net.path_counts().totals, vec![6, 6, 1, 0, 0, 0]);
    assert_eq!(net.out_degrees(), vec![3, 0, 0, 0, 1, 2]);
}

#[test]
fn every_violation_is_reported() {
    let adj = vec![
        vec![true, true, false, false],
        vec![false, false, true, false],
        vec![false, true, false, false],
        vec![false, false, false, false],
    ];
    let err = validate(adj, None).unwrap_err();
    let v = err.violations();
    assert!(v.contains(&Violation::NonZeroDiagonal(0)));
    assert!(v.iter().any(|x| matches!(x, Violation::Cycle(c) if c.len() == 2)));
    assert!(v.contains(&Violation::IntransitiveTriple(0, 1, 2)));
}

#[test]
fn intransitive_chain_is_rejected_with_names() {
    let err = InfluenceNetwork::from_labelled_edges(labels(&["a", "b", "c"]), &[("a", "b"), ("b", "c")]).unwrap_err();
    assert_eq!(err.to_string(), "IntransitiveTriple: a→b→c without a→c");
}

#[test]
fn cycle_message_names_firms() {
    let err = InfluenceNetwork::from_labelled_edges(labels(&["L", "T", "F"]), &[("L", "T"), ("T", "L")]).unwrap_err();
    assert_eq!(err.to_string(), "Cycle: L→T→L");
}

#[test]
fn bad_inputs() {
    assert!(matches!(
        InfluenceNetwork::from_labelled_edges(labels(&["a", "a"]), &[] as &[(&str, &str)]),
        Err(NetworkError::DuplicateLabel(_))
    ));
    assert!(matches!(
        InfluenceNetwork::from_labelled_edges(labels(&["a", "b"]), &[("a", "z")]),
        Err(NetworkError::UnknownFirm(_))
    ));
    assert!(matches!(InfluenceNetwork::from_edges(2, &[(0, 2)]), Err(NetworkError::IndexOutOfRange { .. })));
    assert!(matches!(validate(vec![vec![false, false], vec![false]], None), Err(NetworkError::NotSquare { .. })));
}

#[test]
fn transitive_dag_enumeration_sizes() {
    // labelled partial orders on n points
    let expected = [1, 1, 3, 19, 219];
    for (n, &count) in expected.iter().enumerate() {
        assert_eq!(all_transitive_dags(n).len(), count, "n = {n}");
    }
    // ordered ones are the sub-orders of one total order
    assert_eq!(ordered_transitive_dags(3).len(), 7);
}

#[test]
fn merge_contracts_and_closes() {
    let merged = diamond().merge_nodes(0, 1, &[]).unwrap();
    assert_eq!(merged.labels(), &labels(&["1+2", "3", "4"])[..]);
    assert_eq!(merged.edges(), vec![(0, 1), (0, 2)]);

    // 1 -> 2 -> 4 and 3 -> 4; merging 1 and 2 drops their internal edge
    let base = merger_base().merge_nodes(0, 1, &[]).unwrap();
    assert_eq!(base.labels(), &labels(&["1+2", "3", "4", "5"])[..]);
    assert_eq!(base.edges(), vec![(0, 2), (1, 2)]);

    let grown = merger_base().merge_nodes(0, 1, &[(0, 1)]).unwrap();
    assert_eq!(grown.edges(), vec![(0, 1), (0, 2), (1, 2)]);
}

#[test]
fn merge_into_cycle_is_rejected() {
    // 1 -> 3 -> 2 (and 1 -> 2): merging 1 and 2 puts 3 on a cycle
    let net = InfluenceNetwork::from_edges(3, &[(0, 2), (2, 1), (0, 1)]).unwrap();
    assert!(matches!(net.merge_nodes(0, 1, &[]), Err(NetworkError::ResultCyclic { .. })));
    assert!(matches!(net.merge_nodes(0, 0, &[]), Err(NetworkError::SelfMerge(0))));
}
