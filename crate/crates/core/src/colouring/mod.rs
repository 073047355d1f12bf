//! Parity colourings of finite point graphs.
//!
//! A node stands for a point `x` of `X`; its successors are `T1 x` and `T2 x`.
//! A colouring `c` is parity-consistent when every interior node satisfies
//! `c(x) = c(T1 x) + c(T2 x) + x^e (mod 2)`. Colour `1` is red, `0` blue.

mod game;
mod gf2;
mod io;
mod regimes;

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::semigroup::{Generator, Word};

pub use game::{
    colouring_to_profile, node_regrets, solve_finite_game, solve_finite_game_with, ComponentReport, GraphRegret,
    MixedAssignment,
    NodeRegret, SolveMethod, SolveOptions, Solution,
};
pub use gf2::{detect_parity_infeasible, Contradiction, Equation, Feasibility, Step};
pub use io::{GraphFile, NodeId, NodeRecord};

/// Free choices default to blue.
pub const DEFAULT_COLOUR: u8 = 0;

/// Largest pyramid depth that is materialised.
pub const MAX_PYRAMID_DEPTH: u32 = 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: String,
    pub e: u8,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
}

/// A finite set of points with their shift successors, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointGraph {
    nodes: Vec<Node>,
}

impl PointGraph {
    pub fn new(nodes: Vec<Node>) -> Result<PointGraph> {
        let len = nodes.len();
        let mut seen = std::collections::HashSet::new();
        for node in &nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate node id {:?}", node.id)));
            }
            if node.e > 1 {
                return Err(Error::InvalidGraph(format!("node {:?} has e = {}", node.id, node.e)));
            }
            match (node.t1, node.t2) {
                (Some(a), Some(b)) if a >= len || b >= len => {
                    return Err(Error::InvalidGraph(format!("node {:?} points outside the graph", node.id)));
                }
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::InvalidGraph(format!(
                        "node {:?} has exactly one successor; the parity constraint needs both",
                        node.id
                    )));
                }
                _ => {}
            }
        }
        Ok(PointGraph { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn id(&self, v: usize) -> &str {
        &self.nodes[v].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn e(&self, v: usize) -> u8 {
        self.nodes[v].e
    }

    /// `(T1 v, T2 v)` for interior nodes.
    pub fn successors(&self, v: usize) -> Option<(usize, usize)> {
        let n = &self.nodes[v];
        n.t1.zip(n.t2)
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.successors(v).is_some()
    }

    pub fn interior_count(&self) -> usize {
        (0..self.len()).filter(|&v| self.is_interior(v)).count()
    }

    /// Nodes having `v` as a successor, each listed once.
    pub(crate) fn parents(&self) -> Vec<Vec<usize>> {
        let mut parents = vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            if let Some((a, b)) = self.successors(v) {
                parents[a].push(v);
                if b != a {
                    parents[b].push(v);
                }
            }
        }
        parents
    }

    /// Nodes reachable from `root` along successor edges, `root` included.
    pub fn forward_orbit(&self, root: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            if let Some((a, b)) = self.successors(v) {
                for w in [a, b] {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen
    }

    /// Whether the graph is the heap-ordered pyramid built by
    /// [`build_generic_pyramid`]; returns its depth.
    pub fn pyramid_depth(&self) -> Option<u32> {
        let n = self.len() as u64 + 1;
        if !n.is_power_of_two() || n < 2 {
            return None;
        }
        let depth = n.trailing_zeros() - 1;
        let interior = (1usize << depth) - 1;
        let ok = (0..self.len()).all(|v| match self.successors(v) {
            Some((a, b)) => v < interior && a == 2 * v + 1 && b == 2 * v + 2,
            None => v >= interior,
        });
        ok.then_some(depth)
    }
}

/// Words of length at most `depth` in canonical order; `T_i`-successor of `w`
/// is `w T_i`. Node `k` is the word with canonical index `k`.
pub fn build_generic_pyramid(depth: u32, e_bits: &[u8]) -> Result<PointGraph> {
    if depth > MAX_PYRAMID_DEPTH {
        return Err(Error::ResourceLimit(format!("pyramid depth {depth} above {MAX_PYRAMID_DEPTH}")));
    }
    let count = (1usize << (depth + 1)) - 1;
    if e_bits.len() != count {
        return Err(Error::InvalidArgument(format!(
            "pyramid of depth {depth} needs {count} e-bits, got {}",
            e_bits.len()
        )));
    }
    let interior = (1usize << depth) - 1;
    let nodes = (0..count)
        .map(|k| Node {
            id: Word::from_index(k as u64).to_string(),
            e: e_bits[k] & 1,
            t1: (k < interior).then_some(2 * k + 1),
            t2: (k < interior).then_some(2 * k + 2),
        })
        .collect();
    PointGraph::new(nodes)
}

/// As [`build_generic_pyramid`] with e-bits drawn from `ChaCha8(seed)`.
pub fn build_generic_pyramid_seeded(depth: u32, seed: u64) -> Result<PointGraph> {
    if depth > MAX_PYRAMID_DEPTH {
        return Err(Error::ResourceLimit(format!("pyramid depth {depth} above {MAX_PYRAMID_DEPTH}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<u8> = (0..(1usize << (depth + 1)) - 1).map(|_| rng.random::<bool>() as u8).collect();
    build_generic_pyramid(depth, &bits)
}

/// A partial map from nodes to colours.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Colouring(Vec<Option<u8>>);

impl Colouring {
    pub fn empty(len: usize) -> Colouring {
        Colouring(vec![None; len])
    }

    pub fn from_total(colours: Vec<u8>) -> Colouring {
        Colouring(colours.into_iter().map(|c| Some(c & 1)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<u8> {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, colour: u8) {
        self.0[v] = Some(colour & 1);
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        (0..self.len()).filter(|&v| self.0[v].is_some()).collect()
    }

    /// Restriction to `domain`.
    pub fn restrict(&self, domain: &BTreeSet<usize>) -> Colouring {
        Colouring((0..self.len()).map(|v| if domain.contains(&v) { self.0[v] } else { None }).collect())
    }

    pub fn as_slice(&self) -> &[Option<u8>] {
        &self.0
    }
}

/// Smallest superset of `subset` containing every twin over two of its members.
pub fn closure(graph: &PointGraph, subset: &BTreeSet<usize>) -> BTreeSet<usize> {
    let parents = graph.parents();
    let mut set = subset.clone();
    let mut queue: VecDeque<usize> = subset.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &z in &parents[u] {
            if set.contains(&z) {
                continue;
            }
            let (a, b) = graph.successors(z).expect("parents are interior");
            if set.contains(&a) && set.contains(&b) {
                set.insert(z);
                queue.push_back(z);
            }
        }
    }
    set
}

/// Interior nodes whose parity identity fails. Errors if a checked node
/// or one of its successors is uncoloured.
pub fn verify_parity(graph: &PointGraph, colouring: &Colouring) -> Result<Vec<usize>> {
    verify_parity_with(graph, colouring, Execution::default())
}

pub fn verify_parity_with(graph: &PointGraph, colouring: &Colouring, exec: Execution) -> Result<Vec<usize>> {
    if colouring.len() != graph.len() {
        return Err(Error::InvalidArgument("colouring and graph sizes differ".into()));
    }
    if !colouring.is_total() {
        return Err(Error::InvalidArgument("verify_parity needs a total colouring".into()));
    }
    let flags = exec.map_range(0..graph.len() as u64, |v| {
        let v = v as usize;
        graph.successors(v).is_some_and(|(a, b)| !parity_ok(graph, colouring, v, a, b))
    });
    Ok(flags.iter().enumerate().filter(|(_, &bad)| bad).map(|(v, _)| v).collect())
}

fn parity_ok(graph: &PointGraph, c: &Colouring, v: usize, a: usize, b: usize) -> bool {
    match (c.get(v), c.get(a), c.get(b)) {
        (Some(x), Some(y), Some(z)) => x == y ^ z ^ graph.e(v),
        _ => true,
    }
}

/// Which side-family rule (ii) picks out; see [`seed_colouring`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SeedReading {
    /// Rule (ii) as printed: words starting with `T2` and ending with `T1`.
    #[default]
    AsWritten,
    /// Words starting with `T2` and ending with `T2`.
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedRule {
    pub reading: SeedReading,
    /// Colour of the `T1`-side family (red by default).
    pub first_family: u8,
    /// Colour of the `T2`-side family (blue by default).
    pub second_family: u8,
}

impl Default for SeedRule {
    fn default() -> Self {
        SeedRule { reading: SeedReading::AsWritten, first_family: 1, second_family: 0 }
    }
}

impl SeedRule {
    /// The fixed colour of word `w`, if `w` belongs to a seed family.
    pub fn seed_of(&self, w: &Word) -> Option<u8> {
        let (first, last) = (w.first()?, w.last()?);
        match first {
            Generator::T1 if last == Generator::T1 => Some(self.first_family),
            Generator::T2 => {
                let wanted = match self.reading {
                    SeedReading::AsWritten => Generator::T1,
                    SeedReading::Alternate => Generator::T2,
                };
                (last == wanted).then_some(self.second_family)
            }
            _ => None,
        }
    }
}

/// Parity colouring of a generic pyramid with the default [`SeedRule`].
pub fn seed_colouring(graph: &PointGraph) -> Result<Colouring> {
    seed_colouring_with(graph, &SeedRule::default())
}

/// Seed families take their fixed colours; every other node is forced by
/// the parity rule at its parent, whose other child is always a family
/// member. The root's `T2` child is the single free choice under the
/// as-written reading; the root itself is forced by its two children.
pub fn seed_colouring_with(graph: &PointGraph, rule: &SeedRule) -> Result<Colouring> {
    let depth = graph
        .pyramid_depth()
        .ok_or_else(|| Error::InvalidGraph("seed colouring needs a generic pyramid".into()))?;
    let mut c = Colouring::empty(graph.len());
    if depth == 0 {
        c.set(0, DEFAULT_COLOUR);
        return Ok(c);
    }
    let seed = |v: usize| rule.seed_of(&Word::from_index(v as u64));
    for v in [1, 2] {
        c.set(v, seed(v).unwrap_or(DEFAULT_COLOUR));
    }
    c.set(0, c.get(1).unwrap() ^ c.get(2).unwrap() ^ graph.e(0));
    for v in 1..graph.len() {
        let Some((a, b)) = graph.successors(v) else { continue };
        let cv = c.get(v).expect("top-down order colours parents first");
        match (seed(a), seed(b)) {
            (Some(ca), None) => {
                c.set(a, ca);
                c.set(b, cv ^ ca ^ graph.e(v));
            }
            (None, Some(cb)) => {
                c.set(b, cb);
                c.set(a, cv ^ cb ^ graph.e(v));
            }
            _ => unreachable!("each non-root interior word has exactly one seeded child"),
        }
    }
    Ok(c)
}

/// First nodes of `domain` met on successor paths from `root` that avoid
/// `domain` until then.
pub fn hitting_points(graph: &PointGraph, domain: &BTreeSet<usize>, root: usize) -> Vec<usize> {
    let mut hits = BTreeSet::new();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        if domain.contains(&v) {
            hits.insert(v);
            continue;
        }
        if let Some((a, b)) = graph.successors(v) {
            for w in [a, b] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    hits.into_iter().collect()
}

/// Extends `fixed` to the forward orbit of `new_root`.
///
/// The new root takes the default colour, and colours are pushed downward:
/// a successor already coloured constrains the other one, free pairs take
/// the default on `T1`. If that greedy pass meets a conflict the extension
/// is re-solved exactly over GF(2); only a genuinely infeasible system is
/// reported as a [`Contradiction`].
pub fn extend_colouring(graph: &PointGraph, fixed: &Colouring, new_root: usize) -> Result<Colouring> {
    if fixed.len() != graph.len() {
        return Err(Error::InvalidArgument("colouring and graph sizes differ".into()));
    }
    if new_root >= graph.len() {
        return Err(Error::InvalidArgument(format!("node {new_root} is not in the graph")));
    }
    if fixed.get(new_root).is_some() {
        return Ok(fixed.clone());
    }
    let region: BTreeSet<usize> =
        graph.forward_orbit(new_root).into_iter().filter(|&v| fixed.get(v).is_none()).collect();
    if let Some(c) = greedy_extension(graph, fixed, new_root, &region) {
        return Ok(c);
    }
    gf2::solve_extension(graph, fixed, &region)
}

fn greedy_extension(
    graph: &PointGraph,
    fixed: &Colouring,
    new_root: usize,
    region: &BTreeSet<usize>,
) -> Option<Colouring> {
    let mut c = fixed.clone();
    let root_colour = match graph.successors(new_root) {
        Some((a, b)) if a != new_root && b != new_root => match (c.get(a), c.get(b)) {
            (Some(x), Some(y)) => x ^ y ^ graph.e(new_root),
            _ => DEFAULT_COLOUR,
        },
        _ => DEFAULT_COLOUR,
    };
    c.set(new_root, root_colour);
    let mut queue = VecDeque::from([new_root]);
    while let Some(v) = queue.pop_front() {
        let Some((a, b)) = graph.successors(v) else { continue };
        let cv = c.get(v)?;
        let e = graph.e(v);
        match (c.get(a), c.get(b)) {
            (Some(_), Some(_)) => {}
            (Some(x), None) => {
                c.set(b, cv ^ x ^ e);
                queue.push_back(b);
            }
            (None, Some(y)) => {
                c.set(a, cv ^ y ^ e);
                queue.push_back(a);
            }
            (None, None) if a == b => {
                c.set(a, DEFAULT_COLOUR);
                queue.push_back(a);
            }
            (None, None) => {
                c.set(a, DEFAULT_COLOUR);
                c.set(b, cv ^ DEFAULT_COLOUR ^ e);
                queue.push_back(a);
                queue.push_back(b);
            }
        }
    }
    let consistent = region.iter().all(|&v| match graph.successors(v) {
        Some((a, b)) => parity_ok(graph, &c, v, a, b),
        None => true,
    });
    consistent.then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pyramid(depth: u32, e: u8) -> PointGraph {
        build_generic_pyramid(depth, &vec![e; (1 << (depth + 1)) - 1]).unwrap()
    }

    #[test]
    fn pyramid_shapes() {
        let g0 = pyramid(0, 0);
        assert_eq!(g0.len(), 1);
        assert!(!g0.is_interior(0));
        let g2 = pyramid(2, 0);
        assert_eq!(g2.len(), 7);
        assert_eq!(g2.interior_count(), 3);
        assert_eq!(g2.id(4), "T1T2");
        assert_eq!(build_generic_pyramid_seeded(12, 1).unwrap().len(), 8191);
        assert_eq!(g2.pyramid_depth(), Some(2));
    }

    #[test]
    fn rejects_half_nodes() {
        let nodes = vec![Node { id: "a".into(), e: 0, t1: Some(0), t2: None }];
        assert!(matches!(PointGraph::new(nodes), Err(Error::InvalidGraph(_))));
        let nodes = vec![Node { id: "a".into(), e: 0, t1: Some(0), t2: Some(3) }];
        assert!(PointGraph::new(nodes).is_err());
    }

    #[test]
    fn seed_examples() {
        for (e, root) in [(0, 1), (1, 0)] {
            let c = seed_colouring(&pyramid(1, e)).unwrap();
            assert_eq!(c.get(1), Some(1));
            assert_eq!(c.get(2), Some(0));
            assert_eq!(c.get(0), Some(root));
        }
    }

    #[test]
    fn seed_colouring_is_parity_consistent() {
        for reading in [SeedReading::AsWritten, SeedReading::Alternate] {
            let rule = SeedRule { reading, ..SeedRule::default() };
            for depth in 0..=8 {
                let g = build_generic_pyramid_seeded(depth, u64::from(depth)).unwrap();
                let c = seed_colouring_with(&g, &rule).unwrap();
                assert!(c.is_total());
                assert!(verify_parity(&g, &c).unwrap().is_empty());
                for v in 1..g.len() {
                    if let Some(k) = rule.seed_of(&Word::from_index(v as u64)) {
                        assert_eq!(c.get(v), Some(k), "seeded word {}", g.id(v));
                    }
                }
            }
        }
    }

    #[test]
    fn closure_of_children_contains_root() {
        let g = pyramid(2, 0);
        assert!(closure(&g, &BTreeSet::new()).is_empty());
        let s = closure(&g, &BTreeSet::from([1, 2]));
        assert!(s.contains(&0));
    }

    #[test]
    fn flipped_node_is_localised() {
        let g = build_generic_pyramid_seeded(4, 7).unwrap();
        let mut c = seed_colouring(&g).unwrap();
        let v = 4;
        c.set(v, c.get(v).unwrap() ^ 1);
        let bad = verify_parity(&g, &c).unwrap();
        assert_eq!(bad, vec![1, 4]);
    }

    #[test]
    fn single_node_passes() {
        let g = pyramid(0, 1);
        assert!(verify_parity(&g, &Colouring::from_total(vec![1])).unwrap().is_empty());
    }

    #[test]
    fn extension_with_one_hitting_point() {
        // a coloured depth-2 pyramid plus a new root over its root and a fresh leaf
        let base = build_generic_pyramid_seeded(2, 3).unwrap();
        let mut nodes = base.nodes().to_vec();
        nodes.push(Node { id: "leaf".into(), e: 0, t1: None, t2: None });
        nodes.push(Node { id: "new".into(), e: 1, t1: Some(0), t2: Some(7) });
        let g = PointGraph::new(nodes).unwrap();
        let seeded = seed_colouring(&base).unwrap();
        let mut fixed = Colouring::empty(g.len());
        for v in 0..base.len() {
            fixed.set(v, seeded.get(v).unwrap());
        }
        let domain = fixed.domain();
        assert_eq!(hitting_points(&g, &domain, 8), vec![0]);
        let c = extend_colouring(&g, &fixed, 8).unwrap();
        assert_eq!(c.get(7).unwrap(), c.get(8).unwrap() ^ c.get(0).unwrap() ^ 1);
        assert_eq!(c.restrict(&domain), fixed);
        assert!(verify_parity(&g, &c).unwrap().is_empty());
        assert_eq!(extend_colouring(&g, &c, 8).unwrap(), c);
    }

    #[test]
    fn extension_from_nothing_is_parity_consistent() {
        let g = build_generic_pyramid_seeded(5, 11).unwrap();
        let c = extend_colouring(&g, &Colouring::empty(g.len()), 0).unwrap();
        assert!(c.is_total());
        assert!(verify_parity(&g, &c).unwrap().is_empty());
    }

    #[test]
    fn greedy_conflict_falls_back_to_exact_solve() {
        // r -> (a, b); a -> (b, b); greedy fixes r, then a, then meets b twice
        let nodes = vec![
            Node { id: "r".into(), e: 0, t1: Some(1), t2: Some(2) },
            Node { id: "a".into(), e: 1, t1: Some(2), t2: Some(2) },
            Node { id: "b".into(), e: 0, t1: None, t2: None },
        ];
        let g = PointGraph::new(nodes).unwrap();
        let c = extend_colouring(&g, &Colouring::empty(3), 0).unwrap();
        assert!(verify_parity(&g, &c).unwrap().is_empty());
    }
}
