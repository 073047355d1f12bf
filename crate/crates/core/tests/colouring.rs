use std::collections::BTreeSet;

use num_traits::{One, Zero};
use proptest::prelude::*;
use shiftgame::colouring::{
    build_generic_pyramid, closure, colouring_to_profile, detect_parity_infeasible, extend_colouring, node_regrets,
    seed_colouring_with, solve_finite_game, verify_parity, Colouring, Feasibility, MixedAssignment, Node, PointGraph,
    SeedReading, SeedRule,
};
use shiftgame::payoffs::{payoff_g, payoff_r, ActionA, ActionB, RedPlayer};
use shiftgame::rational::int;
use shiftgame::{Error, Rational};

/// `(e, successors)` per node; successors are `None` for leaves.
type Shape = Vec<(u8, Option<(usize, usize)>)>;

fn graph_of(shape: &Shape) -> PointGraph {
    let nodes = shape
        .iter()
        .enumerate()
        .map(|(k, &(e, succ))| Node { id: format!("n{k}"), e, t1: succ.map(|s| s.0), t2: succ.map(|s| s.1) })
        .collect();
    PointGraph::new(nodes).unwrap()
}

fn shape(max_nodes: usize) -> impl Strategy<Value = Shape> {
    (1..=max_nodes).prop_flat_map(|n| {
        proptest::collection::vec(
            (0u8..2, proptest::option::weighted(0.8, (0..n, 0..n))),
            n,
        )
    })
}

fn brute_force(graph: &PointGraph) -> Option<Vec<u8>> {
    let n = graph.len();
    (0u64..1 << n).find_map(|mask| {
        let c = |v: usize| ((mask >> v) & 1) as u8;
        let ok = (0..n).all(|v| graph.successors(v).is_none_or(|(a, b)| c(v) == c(a) ^ c(b) ^ graph.e(v)));
        ok.then(|| (0..n).map(c).collect())
    })
}

/// Per-node best-response gains straight from the payoff tables.
fn oracle_max_regret(graph: &PointGraph, a: &MixedAssignment) -> Rational {
    let w = |p: &Rational, i: u8| if i == 0 { p.clone() } else { Rational::one() - p };
    let gain = |v0: Rational, v1: Rational, p: &Rational| {
        let actual = p * &v0 + (Rational::one() - p) * &v1;
        v0.max(v1) - actual
    };
    let mut worst = Rational::zero();
    for v in 0..graph.len() {
        let e = graph.e(v);
        if let Some((t1, t2)) = graph.successors(v) {
            let value = |b: u8| {
                let mut s = Rational::zero();
                for a1 in 0..2u8 {
                    for a2 in 0..2u8 {
                        let pay = payoff_g(e, ActionB::from_index(b), ActionA::from_index(a1), ActionA::from_index(a2));
                        s += w(&a.r1[t1], a1) * w(&a.r2[t2], a2) * int(pay);
                    }
                }
                s
            };
            worst = worst.max(gain(value(0), value(1), &a.g[v]));
        }
        for (player, r) in [(RedPlayer::R1, &a.r1), (RedPlayer::R2, &a.r2)] {
            let value = |act: u8| {
                (0..2u8)
                    .map(|b| w(&a.g[v], b) * int(payoff_r(player, e, ActionB::from_index(b), ActionA::from_index(act))))
                    .sum::<Rational>()
            };
            worst = worst.max(gain(value(0), value(1), &r[v]));
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn feasibility_matches_brute_force(s in shape(12)) {
        let g = graph_of(&s);
        match detect_parity_infeasible(&g) {
            Feasibility::Feasible(c) => {
                prop_assert!(brute_force(&g).is_some());
                prop_assert!(verify_parity(&g, &c).unwrap().is_empty());
            }
            Feasibility::Infeasible(cert) => {
                prop_assert!(brute_force(&g).is_none());
                prop_assert!(cert.replay().is_ok());
            }
        }
    }

    #[test]
    fn closure_is_a_closure_operator(s in shape(10), picks in proptest::collection::btree_set(0usize..10, 0..6)) {
        let g = graph_of(&s);
        let a: BTreeSet<usize> = picks.into_iter().filter(|&v| v < g.len()).collect();
        let ca = closure(&g, &a);
        prop_assert!(a.is_subset(&ca));
        prop_assert_eq!(closure(&g, &ca), ca.clone());
        for v in 0..g.len() {
            let mut b = a.clone();
            b.insert(v);
            prop_assert!(ca.is_subset(&closure(&g, &b)));
        }
        // closed: every twin over two members is a member
        for z in 0..g.len() {
            if let Some((x, y)) = g.successors(z) {
                if ca.contains(&x) && ca.contains(&y) {
                    prop_assert!(ca.contains(&z));
                }
            }
        }
    }

    #[test]
    fn extension_keeps_fixed_colours(s in shape(10), first in 0usize..10, second in 0usize..10) {
        let g = graph_of(&s);
        let (first, second) = (first % g.len(), second % g.len());
        let empty = Colouring::empty(g.len());
        let Ok(base) = extend_colouring(&g, &empty, first) else { return Ok(()) };
        let orbit = g.forward_orbit(first);
        prop_assert!(orbit.iter().all(|&v| base.get(v).is_some()));
        match extend_colouring(&g, &base, second) {
            Ok(next) => {
                for v in base.domain() {
                    prop_assert_eq!(next.get(v), base.get(v));
                }
                let covered: BTreeSet<usize> = next.domain();
                for v in g.forward_orbit(second) {
                    prop_assert!(covered.contains(&v));
                }
                for &v in &covered {
                    if let Some((x, y)) = g.successors(v) {
                        if let (Some(cv), Some(cx), Some(cy)) = (next.get(v), next.get(x), next.get(y)) {
                            prop_assert_eq!(cv, cx ^ cy ^ g.e(v));
                        }
                    }
                }
            }
            Err(Error::Contradiction(cert)) => prop_assert!(cert.replay().is_ok()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn seed_colourings_satisfy_parity(depth in 0u32..=8, seed in any::<u64>(), alternate in any::<bool>()) {
        let count = (1usize << (depth + 1)) - 1;
        let e_bits: Vec<u8> = (0..count).map(|k| ((seed >> (k % 64)) & 1) as u8).collect();
        let g = build_generic_pyramid(depth, &e_bits).unwrap();
        let rule = SeedRule {
            reading: if alternate { SeedReading::Alternate } else { SeedReading::AsWritten },
            ..SeedRule::default()
        };
        let c = seed_colouring_with(&g, &rule).unwrap();
        prop_assert!(verify_parity(&g, &c).unwrap().is_empty());
        let a = colouring_to_profile(&g, &c).unwrap();
        prop_assert_eq!(node_regrets(&g, &a).max, int(0));
        prop_assert_eq!(oracle_max_regret(&g, &a), int(0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_reaches_exact_equilibria_on_small_graphs(s in shape(8)) {
        let g = graph_of(&s);
        match solve_finite_game(&g) {
            Ok(sol) => {
                prop_assert!(sol.regret.max <= shiftgame::rational::ratio(1, 1_000_000_000));
                prop_assert_eq!(oracle_max_regret(&g, &sol.assignment), sol.regret.max.clone());
                if brute_force(&g).is_none() {
                    prop_assert!(!sol.mixing_nodes.is_empty());
                }
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn xy_pair_is_infeasible_and_solved_by_mixing() {
    let g = graph_of(&vec![(0, Some((1, 0))), (1, Some((0, 0)))]);
    assert!(brute_force(&g).is_none());
    let Feasibility::Infeasible(cert) = detect_parity_infeasible(&g) else { panic!("pair must be infeasible") };
    assert_eq!(cert.forced(), vec![("n1".to_string(), 1)]);
    let sol = solve_finite_game(&g).unwrap();
    assert_eq!(oracle_max_regret(&g, &sol.assignment), int(0));
    assert!(!sol.mixing_nodes.is_empty());
}
