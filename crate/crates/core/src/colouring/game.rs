//! The game restricted to a finite point graph.
//!
//! At node `v`, `G0` is paid according to `x^e`, `R1` at `T1 v` and `R2` at
//! `T2 v`; each `R_i` is paid according to `x^e` and `G0` at `v`. Leaves
//! carry no `G0` payoff. Payoff evaluation at `v` therefore reads only `v`
//! and its successors, never an ancestor, which is what lets the solver fix
//! strongly connected components from the sinks upward.

use num_traits::{One, Signed, ToPrimitive, Zero};
use num_rational::Ratio;
use serde::Serialize;

use super::gf2::solve_rows;
use super::regimes::{Outcome, Regime, Search};
use super::{detect_parity_infeasible, Colouring, Feasibility, PointGraph};
use crate::error::{Error, Result};
use crate::payoffs::{self, RedPlayer};
use crate::rational::{self, int, Rational};
use crate::report;

/// Node-indexed mixtures: `P(b0)` for `G0`, `P(a0)` for each red player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixedAssignment {
    #[serde(serialize_with = "report::exact_vec")]
    pub g: Vec<Rational>,
    #[serde(serialize_with = "report::exact_vec")]
    pub r1: Vec<Rational>,
    #[serde(serialize_with = "report::exact_vec")]
    pub r2: Vec<Rational>,
}

impl MixedAssignment {
    /// Nodes where some player puts positive weight on both actions.
    pub fn mixing_nodes(&self) -> Vec<usize> {
        let strict = |p: &Rational| p.is_positive() && *p < Rational::one();
        (0..self.g.len()).filter(|&v| strict(&self.g[v]) || strict(&self.r1[v]) || strict(&self.r2[v])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeRegret {
    pub node: String,
    /// `G0`'s best-response gain; absent at leaves.
    #[serde(serialize_with = "report::exact_opt")]
    pub g: Option<Rational>,
    /// `|E[b0] - E[b1]|` for `G0`; absent at leaves.
    #[serde(serialize_with = "report::exact_opt")]
    pub g_gap: Option<Rational>,
    #[serde(serialize_with = "report::exact")]
    pub r1: Rational,
    #[serde(serialize_with = "report::exact")]
    pub r1_gap: Rational,
    #[serde(serialize_with = "report::exact")]
    pub r2: Rational,
    #[serde(serialize_with = "report::exact")]
    pub r2_gap: Rational,
}

impl NodeRegret {
    pub fn max(&self) -> Rational {
        let mut m = self.r1.clone().max(self.r2.clone());
        if let Some(g) = &self.g {
            m = m.max(g.clone());
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphRegret {
    pub nodes: Vec<NodeRegret>,
    #[serde(serialize_with = "report::exact")]
    pub max: Rational,
}

/// Exact per-node Bayesian regrets of an assignment.
pub fn node_regrets(graph: &PointGraph, a: &MixedAssignment) -> GraphRegret {
    let nodes: Vec<NodeRegret> = (0..graph.len()).map(|v| regret_at(graph, a, v)).collect();
    let max = nodes.iter().map(NodeRegret::max).max().unwrap_or_else(Rational::zero);
    GraphRegret { nodes, max }
}

pub(super) fn regret_at(graph: &PointGraph, a: &MixedAssignment, v: usize) -> NodeRegret {
    let e = graph.e(v);
    let (g, g_gap) = match graph.successors(v) {
        Some((t1, t2)) => (
            Some(payoffs::gain_g(e, &a.g[v], &a.r1[t1], &a.r2[t2])),
            Some(payoffs::g_advantage(e, &a.r1[t1], &a.r2[t2]).abs()),
        ),
        None => (None, None),
    };
    NodeRegret {
        node: graph.id(v).to_string(),
        g,
        g_gap,
        r1: payoffs::gain_r(RedPlayer::R1, e, &a.g[v], &a.r1[v]),
        r1_gap: payoffs::incentive_gap_r(RedPlayer::R1, e, &a.g[v]),
        r2: payoffs::gain_r(RedPlayer::R2, e, &a.g[v], &a.r2[v]),
        r2_gap: payoffs::incentive_gap_r(RedPlayer::R2, e, &a.g[v]),
    }
}

/// The pure profile of a colouring: `b_c` for `G0` and `a_c` for both red
/// players at a node of colour `c`.
pub fn colouring_to_profile(graph: &PointGraph, colouring: &Colouring) -> Result<MixedAssignment> {
    if colouring.len() != graph.len() || !colouring.is_total() {
        return Err(Error::InvalidArgument("colouring must be total on the graph".into()));
    }
    let pure: Vec<Rational> =
        (0..graph.len()).map(|v| int(i64::from(colouring.get(v).unwrap() == 0))).collect();
    Ok(MixedAssignment { g: pure.clone(), r1: pure.clone(), r2: pure })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest accepted per-node regret after exact re-scoring.
    pub tolerance: f64,
    /// Fictitious-play rounds per large component.
    pub max_iterations: u64,
    /// Components up to this size go straight to regime enumeration;
    /// larger ones try fictitious play first.
    pub enumeration_limit: usize,
    /// Regime assignments solved exactly before a component is given up.
    pub enumeration_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-9, max_iterations: 200_000, enumeration_limit: 8, enumeration_budget: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// A parity colouring of the whole graph, hence a pure equilibrium.
    ParityColouring,
    /// Component-by-component solution.
    Components,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub nodes: Vec<String>,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub method: SolveMethod,
    pub components: Vec<ComponentReport>,
    pub assignment: MixedAssignment,
    pub regret: GraphRegret,
    /// Ids of nodes where some player strictly mixes.
    pub mixing_nodes: Vec<String>,
}

pub fn solve_finite_game(graph: &PointGraph) -> Result<Solution> {
    solve_finite_game_with(graph, &SolveOptions::default())
}

/// A mixed equilibrium of the finite game, or `NonConvergence`.
pub fn solve_finite_game_with(graph: &PointGraph, opts: &SolveOptions) -> Result<Solution> {
    if let Feasibility::Feasible(c) = detect_parity_infeasible(graph) {
        let assignment = colouring_to_profile(graph, &c)?;
        return finish(graph, assignment, SolveMethod::ParityColouring, Vec::new(), opts);
    }
    let n = graph.len();
    let mut a = MixedAssignment { g: vec![Rational::zero(); n], r1: vec![Rational::zero(); n], r2: vec![Rational::zero(); n] };
    let mut reports = Vec::new();
    for component in components(graph) {
        let method = solve_component(graph, &component, &mut a, opts)?;
        reports.push(ComponentReport { nodes: component.iter().map(|&v| graph.id(v).to_string()).collect(), method });
    }
    finish(graph, a, SolveMethod::Components, reports, opts)
}

fn finish(
    graph: &PointGraph,
    assignment: MixedAssignment,
    method: SolveMethod,
    components: Vec<ComponentReport>,
    opts: &SolveOptions,
) -> Result<Solution> {
    let regret = node_regrets(graph, &assignment);
    let bound = rational::from_f64(opts.tolerance)?;
    if regret.max > bound {
        return Err(Error::NonConvergence(format!(
            "best assignment found has regret {} above the tolerance {}",
            rational::to_f64(&regret.max),
            opts.tolerance
        )));
    }
    let mixing_nodes = assignment.mixing_nodes().into_iter().map(|v| graph.id(v).to_string()).collect();
    Ok(Solution { method, components, assignment, regret, mixing_nodes })
}

/// Strongly connected components along successor edges, sinks first.
fn components(graph: &PointGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let succ = |v: usize| graph.successors(v).map(|(a, b)| vec![a, b]).unwrap_or_default();
    // first pass: finishing order
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, k)) = stack.pop() {
            let next = succ(v);
            if k < next.len() {
                stack.push((v, k + 1));
                let w = next[k];
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    // second pass on the reversed graph; components come out sources first
    let parents = graph.parents();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        comp[root] = id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &p in &parents[v] {
                if comp[p] == usize::MAX {
                    comp[p] = id;
                    members.push(p);
                    stack.push(p);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out.reverse();
    out
}

fn solve_component(
    graph: &PointGraph,
    nodes: &[usize],
    a: &mut MixedAssignment,
    opts: &SolveOptions,
) -> Result<&'static str> {
    if pure_component(graph, nodes, a) {
        return Ok("parity colouring");
    }
    if nodes.len() <= opts.enumeration_limit {
        if regime_search(graph, nodes, a, opts) {
            return Ok("regime enumeration");
        }
    } else {
        if fictitious_play(graph, nodes, a, opts) {
            return Ok("fictitious play with regime snapping");
        }
        if regime_search(graph, nodes, a, opts) {
            return Ok("regime enumeration");
        }
    }
    Err(Error::NonConvergence(format!(
        "no equilibrium found on the component {{{}}}",
        nodes.iter().map(|&v| graph.id(v)).collect::<Vec<_>>().join(", ")
    )))
}

/// Zero regret for every player at every node of the component.
fn component_is_equilibrium(graph: &PointGraph, nodes: &[usize], a: &MixedAssignment) -> bool {
    nodes.iter().all(|&v| regret_at(graph, a, v).max().is_zero())
}

/// Parity colouring of the component when every value it reads from
/// downstream is pure.
fn pure_component(graph: &PointGraph, nodes: &[usize], a: &mut MixedAssignment) -> bool {
    let local = |v: usize| nodes.binary_search(&v).ok();
    let pure = |p: &Rational| -> Option<u8> {
        if p.is_one() {
            Some(0)
        } else if p.is_zero() {
            Some(1)
        } else {
            None
        }
    };
    let mut rows = Vec::new();
    for (k, &v) in nodes.iter().enumerate() {
        let Some((t1, t2)) = graph.successors(v) else { continue };
        let mut terms = vec![k];
        let mut rhs = graph.e(v);
        for (w, values) in [(t1, &a.r1), (t2, &a.r2)] {
            match local(w) {
                Some(j) => terms.push(j),
                None => match pure(&values[w]) {
                    Some(c) => rhs ^= c,
                    None => return false,
                },
            }
        }
        rows.push((terms, rhs));
    }
    let Some(colours) = solve_rows(nodes.len(), rows) else { return false };
    for (k, &v) in nodes.iter().enumerate() {
        let p = int(i64::from(colours[k] == 0));
        a.g[v] = p.clone();
        a.r1[v] = p.clone();
        a.r2[v] = p;
    }
    component_is_equilibrium(graph, nodes, a)
}

/// Fictitious play on the component in floating point, then an exact solve
/// of the regimes it settles on.
fn fictitious_play(graph: &PointGraph, nodes: &[usize], a: &mut MixedAssignment, opts: &SolveOptions) -> bool {
    let local = |v: usize| nodes.binary_search(&v).ok();
    let k = nodes.len();
    let f = |p: &Rational| p.to_f64().unwrap_or(0.5);
    let mut avg = vec![[0.5f64; 3]; k];
    for t in 0..opts.max_iterations {
        let read = |w: usize, which: usize, avg: &[[f64; 3]]| match local(w) {
            Some(j) => avg[j][which],
            None => f(if which == 1 { &a.r1[w] } else { &a.r2[w] }),
        };
        let mut br = vec![[0.0f64; 3]; k];
        for (j, &v) in nodes.iter().enumerate() {
            let e = graph.e(v);
            br[j][0] = match graph.successors(v) {
                Some((t1, t2)) => {
                    let (b, _) = payoffs::best_response_g(e, &read(t1, 1, &avg), &read(t2, 2, &avg));
                    f64::from(b.index() == 0)
                }
                None => 1.0,
            };
            for (slot, player) in [(1, RedPlayer::R1), (2, RedPlayer::R2)] {
                let (act, _) = payoffs::best_response_r(player, e, &avg[j][0]);
                br[j][slot] = f64::from(act.index() == 0);
            }
        }
        let step = 1.0 / (t as f64 + 2.0);
        for j in 0..k {
            for s in 0..3 {
                avg[j][s] += step * (br[j][s] - avg[j][s]);
            }
        }
    }
    let Ok(tolerance) = rational::from_f64(opts.tolerance) else { return false };
    let snapped: Vec<Regime> = nodes.iter().enumerate().map(|(j, &v)| Regime::snap(avg[j][0], graph.e(v))).collect();
    if let Some(found) = Search::new(graph, nodes, a, tolerance.clone(), 1).solve(&snapped) {
        install(nodes, a, found);
        return true;
    }
    // keep the averaged play if it is already within tolerance
    let previous = a.clone();
    for (j, &v) in nodes.iter().enumerate() {
        let exact = |p: f64| -> Rational {
            Ratio::<i64>::approximate_float(p)
                .map(|r| Rational::new((*r.numer()).into(), (*r.denom()).into()))
                .unwrap_or_else(rational::half)
        };
        a.g[v] = exact(avg[j][0]);
        a.r1[v] = exact(avg[j][1]);
        a.r2[v] = exact(avg[j][2]);
    }
    if nodes.iter().all(|&v| regret_at(graph, a, v).max() <= tolerance) {
        return true;
    }
    *a = previous;
    false
}

fn regime_search(graph: &PointGraph, nodes: &[usize], a: &mut MixedAssignment, opts: &SolveOptions) -> bool {
    let Ok(tolerance) = rational::from_f64(opts.tolerance) else { return false };
    match Search::new(graph, nodes, a, tolerance, opts.enumeration_budget).enumerate() {
        Some(found) => {
            install(nodes, a, found);
            true
        }
        None => false,
    }
}

fn install(nodes: &[usize], a: &mut MixedAssignment, found: Outcome) {
    for (j, &v) in nodes.iter().enumerate() {
        a.g[v] = found.g[j].clone();
        a.r1[v] = found.r1[j].clone();
        a.r2[v] = found.r2[j].clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::{build_generic_pyramid_seeded, seed_colouring, Node};
    use crate::rational::ratio;

    fn node(id: &str, e: u8, t: Option<(usize, usize)>) -> Node {
        Node { id: id.into(), e, t1: t.map(|p| p.0), t2: t.map(|p| p.1) }
    }

    fn xy_pair() -> PointGraph {
        PointGraph::new(vec![node("x", 0, Some((1, 0))), node("y", 1, Some((0, 0)))]).unwrap()
    }

    #[test]
    fn colouring_profile_has_strict_incentives() {
        let g = build_generic_pyramid_seeded(6, 5).unwrap();
        let c = seed_colouring(&g).unwrap();
        let a = colouring_to_profile(&g, &c).unwrap();
        let report = node_regrets(&g, &a);
        assert!(report.max.is_zero());
        for n in &report.nodes {
            if let Some(gap) = &n.g_gap {
                assert!(*gap >= int(1000));
            }
            assert!(n.r1_gap >= int(100) && n.r2_gap >= int(100));
        }
    }

    #[test]
    fn node_regret_ignores_ancestors() {
        let g = build_generic_pyramid_seeded(5, 9).unwrap();
        let c = seed_colouring(&g).unwrap();
        let base = colouring_to_profile(&g, &c).unwrap();
        let parents = g.parents();
        for v in 0..g.len() {
            let mut ancestors = vec![false; g.len()];
            let mut stack = parents[v].clone();
            while let Some(p) = stack.pop() {
                if p != v && !ancestors[p] {
                    ancestors[p] = true;
                    stack.extend(parents[p].iter().copied());
                }
            }
            let mut moved = base.clone();
            for w in (0..g.len()).filter(|&w| ancestors[w]) {
                moved.g[w] = ratio(1, 3);
                moved.r1[w] = ratio(2, 7);
                moved.r2[w] = ratio(5, 9);
            }
            assert_eq!(regret_at(&g, &moved, v), regret_at(&g, &base, v), "node {v}");
        }
    }

    #[test]
    fn xy_pair_needs_mixing() {
        let s = solve_finite_game(&xy_pair()).unwrap();
        assert_eq!(s.method, SolveMethod::Components);
        assert!(s.regret.max.is_zero());
        assert!(!s.mixing_nodes.is_empty());
    }

    #[test]
    fn hand_equilibrium_of_xy_pair() {
        let a = MixedAssignment {
            g: vec![ratio(1, 4), ratio(3, 4)],
            r1: vec![ratio(1, 2), ratio(2, 3)],
            r2: vec![int(0), int(1)],
        };
        assert!(node_regrets(&xy_pair(), &a).max.is_zero());
    }

    #[test]
    fn self_loop_is_pure_blue() {
        let g = PointGraph::new(vec![node("z", 0, Some((0, 0)))]).unwrap();
        let s = solve_finite_game(&g).unwrap();
        assert_eq!(s.method, SolveMethod::ParityColouring);
        assert_eq!(s.assignment.g, vec![int(1)]);
        assert!(s.mixing_nodes.is_empty());
    }

    #[test]
    fn components_come_sinks_first() {
        // a -> (b, b), b -> (c, c), c leaf
        let g = PointGraph::new(vec![node("a", 0, Some((1, 1))), node("b", 1, Some((2, 2))), node("c", 0, None)])
            .unwrap();
        assert_eq!(components(&g), vec![vec![2], vec![1], vec![0]]);
        let g = xy_pair();
        assert_eq!(components(&g), vec![vec![0, 1]]);
    }

    #[test]
    fn larger_infeasible_component() {
        // the x,y pair, copied twice and tied into one component through a cycle
        let g = PointGraph::new(vec![
            node("x", 0, Some((1, 0))),
            node("y", 1, Some((0, 0))),
            node("u", 0, Some((3, 2))),
            node("w", 1, Some((2, 0))),
        ])
        .unwrap();
        let s = solve_finite_game(&g).unwrap();
        assert!(s.regret.max <= rational::from_f64(1e-9).unwrap());
    }
}
