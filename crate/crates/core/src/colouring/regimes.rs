//! Equilibria of a component by enumerating per-node regimes.
//!
//! Both red players at a node read only `G0` there, so `G0`'s mixture pins
//! them down unless it sits at one red player's indifference point. That
//! leaves seven regimes per node. Once regimes are fixed, the unknowns are
//! the indifferent red mixtures, linked by `G0`'s bilinear indifference
//! conditions; each condition ties at most two unknowns, so a connected
//! group is parametrised by one of its members through Mobius maps and
//! every extra condition is a quadratic in that member.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::game::{regret_at, MixedAssignment};
use super::PointGraph;
use crate::payoffs::{self, ActionA, RedPlayer};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Regime {
    B0,
    B1,
    /// `G0` mixes at this red player's indifference point, leaving it free.
    Indifferent(RedPlayer),
    /// `G0` mixes strictly inside the `k`-th gap between `0`, both
    /// indifference points and `1`; both red players are pure.
    Interval(u8),
}

impl Regime {
    const ALL: [Regime; 7] = [
        Regime::B0,
        Regime::B1,
        Regime::Indifferent(RedPlayer::R1),
        Regime::Indifferent(RedPlayer::R2),
        Regime::Interval(0),
        Regime::Interval(1),
        Regime::Interval(2),
    ];

    /// The regime whose `G0` value is nearest `g`.
    pub(super) fn snap(g: f64, e: u8) -> Regime {
        if g > 0.99 {
            return Regime::B0;
        }
        if g < 0.01 {
            return Regime::B1;
        }
        for player in RedPlayer::ALL {
            if (g - rational::to_f64(&payoffs::r_indifference_point(player, e))).abs() < 0.02 {
                return Regime::Indifferent(player);
            }
        }
        let (lo, hi) = breakpoints(e);
        let k = u8::from(g > rational::to_f64(&lo)) + u8::from(g > rational::to_f64(&hi));
        Regime::Interval(k)
    }

    fn g_value(self, e: u8) -> Rational {
        match self {
            Regime::B0 => Rational::one(),
            Regime::B1 => Rational::zero(),
            Regime::Indifferent(player) => payoffs::r_indifference_point(player, e),
            Regime::Interval(k) => {
                let (lo, hi) = breakpoints(e);
                let (a, b) = match k {
                    0 => (Rational::zero(), lo),
                    1 => (lo, hi),
                    _ => (hi, Rational::one()),
                };
                (a + b) / int(2)
            }
        }
    }

    /// The red player's mixture, or `None` when it is an unknown.
    fn red_value(self, e: u8, player: RedPlayer) -> Option<Rational> {
        if self == Regime::Indifferent(player) {
            return None;
        }
        let (action, _) = payoffs::best_response_r(player, e, &self.g_value(e));
        Some(int(i64::from(action == ActionA::A0)))
    }

    fn requirement(self) -> Kind {
        match self {
            Regime::B0 => Kind::AtLeast,
            Regime::B1 => Kind::AtMost,
            _ => Kind::Zero,
        }
    }
}

fn breakpoints(e: u8) -> (Rational, Rational) {
    let a = payoffs::r_indifference_point(RedPlayer::R1, e);
    let b = payoffs::r_indifference_point(RedPlayer::R2, e);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sign condition on `E[b0] - E[b1]` for `G0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    AtLeast,
    AtMost,
    Zero,
}

#[derive(Debug, Clone)]
enum Val {
    Known(Rational),
    /// Local index of the node whose indifferent red mixture is unknown.
    Unknown(usize),
}

/// `alpha + beta p + gamma s + delta p s`.
#[derive(Debug, Clone)]
struct Bilinear {
    alpha: Rational,
    beta: Rational,
    gamma: Rational,
    delta: Rational,
}

impl Bilinear {
    fn advantage(e: u8) -> Bilinear {
        let at = |p: i64, s: i64| payoffs::g_advantage(e, &int(p), &int(s));
        let alpha = at(0, 0);
        Bilinear {
            beta: at(1, 0) - &alpha,
            gamma: at(0, 1) - &alpha,
            delta: at(1, 1) - at(1, 0) - at(0, 1) + &alpha,
            alpha,
        }
    }

    fn eval(&self, p: &Rational, s: &Rational) -> Rational {
        &self.alpha + &self.beta * p + &self.gamma * s + &self.delta * p * s
    }
}

#[derive(Debug, Clone)]
struct Condition {
    f: Bilinear,
    p: Val,
    s: Val,
    kind: Kind,
}

/// `(a x + b) / (c x + d)`.
#[derive(Debug, Clone)]
struct Mobius {
    a: Rational,
    b: Rational,
    c: Rational,
    d: Rational,
}

impl Mobius {
    fn identity() -> Mobius {
        Mobius { a: Rational::one(), b: Rational::zero(), c: Rational::zero(), d: Rational::one() }
    }

    fn apply(&self, x: &Rational) -> Option<Rational> {
        let den = &self.c * x + &self.d;
        (!den.is_zero()).then(|| (&self.a * x + &self.b) / den)
    }

    /// `-(u + v y) / (w + z y)` with `y = self(x)`.
    fn solve_through(&self, u: &Rational, v: &Rational, w: &Rational, z: &Rational) -> Mobius {
        Mobius {
            a: -(u * &self.c + v * &self.a),
            b: -(u * &self.d + v * &self.b),
            c: w * &self.c + z * &self.a,
            d: w * &self.d + z * &self.b,
        }
    }
}

/// `[c0, c1, c2]` for `c0 + c1 x + c2 x^2`.
type Quadratic = [Rational; 3];

fn mul_linear(p: (&Rational, &Rational), q: (&Rational, &Rational)) -> Quadratic {
    // (p0 + p1 x)(q0 + q1 x)
    [p.0 * q.0, p.0 * q.1 + p.1 * q.0, p.1 * q.1]
}

fn add_scaled(acc: &mut Quadratic, k: &Rational, q: Quadratic) {
    for (a, b) in acc.iter_mut().zip(q) {
        *a += k * b;
    }
}

/// Numerator of `f(M_p(x), M_s(x))` after clearing both denominators.
fn closing(f: &Bilinear, mp: &Mobius, ms: &Mobius) -> Quadratic {
    let (np, dp) = ((&mp.b, &mp.a), (&mp.d, &mp.c));
    let (ns, ds) = ((&ms.b, &ms.a), (&ms.d, &ms.c));
    let mut q = [Rational::zero(), Rational::zero(), Rational::zero()];
    add_scaled(&mut q, &f.alpha, mul_linear(dp, ds));
    add_scaled(&mut q, &f.beta, mul_linear(np, ds));
    add_scaled(&mut q, &f.gamma, mul_linear(dp, ns));
    add_scaled(&mut q, &f.delta, mul_linear(np, ns));
    q
}

/// Bits kept when a square root is irrational.
const SQRT_BITS: u32 = 96;

fn sqrt_rational(x: &Rational) -> Rational {
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Rational::new(rn, rd);
    }
    // sqrt(n/d) = sqrt(n d) / d, scaled by 2^SQRT_BITS
    let scaled: BigInt = (n * d) << (2 * SQRT_BITS);
    Rational::new(scaled.sqrt(), d << SQRT_BITS)
}

/// Real roots in `[0, 1]`; `None` if the polynomial vanishes identically.
fn unit_roots(q: &Quadratic) -> Option<Vec<Rational>> {
    let [c0, c1, c2] = q;
    let roots = if c2.is_zero() {
        if c1.is_zero() {
            return if c0.is_zero() { None } else { Some(Vec::new()) };
        }
        vec![-c0 / c1]
    } else {
        let disc = c1 * c1 - int(4) * c2 * c0;
        if disc.is_negative() {
            Vec::new()
        } else {
            let r = sqrt_rational(&disc);
            let two_a = int(2) * c2;
            vec![(-c1 - &r) / &two_a, (-c1 + r) / two_a]
        }
    };
    Some(roots.into_iter().filter(rational::is_probability).collect())
}

pub(super) struct Outcome {
    pub g: Vec<Rational>,
    pub r1: Vec<Rational>,
    pub r2: Vec<Rational>,
}

pub(super) struct Search<'a> {
    graph: &'a PointGraph,
    nodes: &'a [usize],
    outside: &'a MixedAssignment,
    tolerance: Rational,
    /// Continuous solves left before giving up.
    budget: u64,
}

impl<'a> Search<'a> {
    pub(super) fn new(
        graph: &'a PointGraph,
        nodes: &'a [usize],
        outside: &'a MixedAssignment,
        tolerance: Rational,
        budget: u64,
    ) -> Search<'a> {
        Search { graph, nodes, outside, tolerance, budget }
    }

    fn local(&self, v: usize) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    fn value(&self, regimes: &[Regime], w: usize, player: RedPlayer) -> Val {
        match self.local(w) {
            Some(i) => match regimes[i].red_value(self.graph.e(w), player) {
                Some(x) => Val::Known(x),
                None => Val::Unknown(i),
            },
            None => Val::Known(match player {
                RedPlayer::R1 => self.outside.r1[w].clone(),
                RedPlayer::R2 => self.outside.r2[w].clone(),
            }),
        }
    }

    fn condition(&self, regimes: &[Regime], j: usize) -> Option<Condition> {
        let v = self.nodes[j];
        let (t1, t2) = self.graph.successors(v)?;
        Some(Condition {
            f: Bilinear::advantage(self.graph.e(v)),
            p: self.value(regimes, t1, RedPlayer::R1),
            s: self.value(regimes, t2, RedPlayer::R2),
            kind: regimes[j].requirement(),
        })
    }

    /// Depth-first search over regimes with a box test on each `G0`
    /// condition as soon as its three nodes have regimes.
    pub(super) fn enumerate(&mut self) -> Option<Outcome> {
        let k = self.nodes.len();
        let mut ready: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (j, &v) in self.nodes.iter().enumerate() {
            if let Some((t1, t2)) = self.graph.successors(v) {
                let last = [Some(j), self.local(t1), self.local(t2)].into_iter().flatten().max().unwrap();
                ready[last].push(j);
            }
        }
        let mut regimes = vec![Regime::B0; k];
        self.descend(0, &mut regimes, &ready)
    }

    fn descend(&mut self, depth: usize, regimes: &mut Vec<Regime>, ready: &[Vec<usize>]) -> Option<Outcome> {
        if depth == regimes.len() {
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            return self.solve(regimes);
        }
        for regime in Regime::ALL {
            regimes[depth] = regime;
            let plausible = ready[depth].iter().all(|&j| {
                let c = self.condition(regimes, j).expect("only interior nodes are queued");
                box_feasible(&c)
            });
            if plausible {
                if let Some(found) = self.descend(depth + 1, regimes, ready) {
                    return Some(found);
                }
            }
            if self.budget == 0 {
                return None;
            }
        }
        None
    }

    /// Solves the continuous part for fixed regimes and checks the result.
    pub(super) fn solve(&self, regimes: &[Regime]) -> Option<Outcome> {
        let k = self.nodes.len();
        let conditions: Vec<Condition> = (0..k).filter_map(|j| self.condition(regimes, j)).collect();
        let mut values: Vec<Option<Rational>> = vec![None; k];
        let is_unknown = |i: usize| matches!(regimes[i], Regime::Indifferent(_));

        propagate(&conditions, &mut values)?;

        // group the remaining unknowns along equality conditions
        let unresolved: Vec<usize> = (0..k).filter(|&i| is_unknown(i) && values[i].is_none()).collect();
        let mut maps: Vec<Option<(usize, Mobius)>> = vec![None; k];
        let mut groups: Vec<(usize, Vec<Quadratic>)> = Vec::new();
        for &root in &unresolved {
            if maps[root].is_some() {
                continue;
            }
            maps[root] = Some((root, Mobius::identity()));
            let mut closings = Vec::new();
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let mu = maps[u].clone().expect("queued unknowns are mapped").1;
                for c in conditions.iter().filter(|c| c.kind == Kind::Zero) {
                    let (Val::Unknown(p), Val::Unknown(s)) = (&c.p, &c.s) else { continue };
                    let (p, s) = (*p, *s);
                    if values[p].is_some() || values[s].is_some() || (p != u && s != u) {
                        continue;
                    }
                    let (other, m) = if p == u {
                        (s, mu.solve_through(&c.f.alpha, &c.f.beta, &c.f.gamma, &c.f.delta))
                    } else {
                        (p, mu.solve_through(&c.f.alpha, &c.f.gamma, &c.f.beta, &c.f.delta))
                    };
                    if maps[other].is_none() {
                        maps[other] = Some((root, m));
                        queue.push_back(other);
                    }
                }
            }
            // every equality inside the group, checked through the maps
            for c in conditions.iter().filter(|c| c.kind == Kind::Zero) {
                if let (Val::Unknown(p), Val::Unknown(s)) = (&c.p, &c.s) {
                    if maps[*p].as_ref().is_some_and(|m| m.0 == root) && maps[*s].as_ref().is_some_and(|m| m.0 == root) {
                        closings.push(closing(&c.f, &maps[*p].as_ref().unwrap().1, &maps[*s].as_ref().unwrap().1));
                    }
                }
            }
            groups.push((root, closings));
        }

        let candidates: Vec<Vec<Rational>> = groups
            .iter()
            .map(|(root, closings)| self.candidates(*root, closings, &maps, &conditions, &values))
            .collect();
        let mut chosen = values.clone();
        self.choose(0, &groups, &candidates, &maps, &conditions, &mut chosen)?;

        let outcome = self.outcome(regimes, &chosen);
        let mut trial = self.outside.clone();
        for (j, &v) in self.nodes.iter().enumerate() {
            trial.g[v] = outcome.g[j].clone();
            trial.r1[v] = outcome.r1[j].clone();
            trial.r2[v] = outcome.r2[j].clone();
        }
        self.nodes
            .iter()
            .all(|&v| regret_at(self.graph, &trial, v).max() <= self.tolerance)
            .then_some(outcome)
    }

    fn candidates(
        &self,
        root: usize,
        closings: &[Quadratic],
        maps: &[Option<(usize, Mobius)>],
        conditions: &[Condition],
        values: &[Option<Rational>],
    ) -> Vec<Rational> {
        for q in closings {
            if let Some(roots) = unit_roots(q) {
                return roots;
            }
        }
        // a free parameter: try the points where some member or some
        // condition changes sign, and the midpoints between them
        let members: Vec<&Mobius> = maps.iter().flatten().filter(|m| m.0 == root).map(|m| &m.1).collect();
        let mut points = vec![Rational::zero(), Rational::one()];
        let mut push_roots = |q: Quadratic| {
            if let Some(r) = unit_roots(&q) {
                points.extend(r);
            }
        };
        for m in &members {
            push_roots([m.b.clone(), m.a.clone(), Rational::zero()]);
            push_roots([&m.b - &m.d, &m.a - &m.c, Rational::zero()]);
        }
        let constant = |v: &Rational| Mobius { a: Rational::zero(), b: v.clone(), c: Rational::zero(), d: Rational::one() };
        let side = |val: &Val| -> Option<Mobius> {
            match val {
                Val::Known(x) => Some(constant(x)),
                Val::Unknown(i) => match (&values[*i], &maps[*i]) {
                    (Some(x), _) => Some(constant(x)),
                    (None, Some((r, m))) if *r == root => Some(m.clone()),
                    _ => None,
                },
            }
        };
        for c in conditions {
            if let (Some(mp), Some(ms)) = (side(&c.p), side(&c.s)) {
                push_roots(closing(&c.f, &mp, &ms));
            }
        }
        points.sort();
        points.dedup();
        let mids: Vec<Rational> = points.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
        // midpoints first: they avoid ties at the boundaries
        mids.into_iter().chain(points).collect()
    }

    fn choose(
        &self,
        g: usize,
        groups: &[(usize, Vec<Quadratic>)],
        candidates: &[Vec<Rational>],
        maps: &[Option<(usize, Mobius)>],
        conditions: &[Condition],
        chosen: &mut Vec<Option<Rational>>,
    ) -> Option<()> {
        if g == groups.len() {
            return Some(());
        }
        let root = groups[g].0;
        let members: Vec<usize> =
            (0..chosen.len()).filter(|&i| maps[i].as_ref().is_some_and(|m| m.0 == root)).collect();
        'candidate: for x in &candidates[g] {
            for &i in &members {
                match maps[i].as_ref().unwrap().1.apply(x) {
                    Some(y) if rational::is_probability(&y) => chosen[i] = Some(y),
                    _ => {
                        for &i in &members {
                            chosen[i] = None;
                        }
                        continue 'candidate;
                    }
                }
            }
            if conditions.iter().all(|c| self.consistent(c, chosen))
                && self.choose(g + 1, groups, candidates, maps, conditions, chosen).is_some()
            {
                return Some(());
            }
            for &i in &members {
                chosen[i] = None;
            }
        }
        None
    }

    /// False only when a fully determined condition fails.
    fn consistent(&self, c: &Condition, chosen: &[Option<Rational>]) -> bool {
        let get = |v: &Val| match v {
            Val::Known(x) => Some(x.clone()),
            Val::Unknown(i) => chosen[*i].clone(),
        };
        let (Some(p), Some(s)) = (get(&c.p), get(&c.s)) else { return true };
        let a = c.f.eval(&p, &s);
        match c.kind {
            Kind::AtLeast => !a.is_negative(),
            Kind::AtMost => !a.is_positive(),
            Kind::Zero => a.abs() <= self.tolerance,
        }
    }

    fn outcome(&self, regimes: &[Regime], chosen: &[Option<Rational>]) -> Outcome {
        let mut out = Outcome { g: Vec::new(), r1: Vec::new(), r2: Vec::new() };
        for (j, &v) in self.nodes.iter().enumerate() {
            let e = self.graph.e(v);
            out.g.push(regimes[j].g_value(e));
            // an unknown that no condition constrains is any mixture; take 1/2
            let fill = |player| {
                regimes[j].red_value(e, player).unwrap_or_else(|| chosen[j].clone().unwrap_or_else(rational::half))
            };
            out.r1.push(fill(RedPlayer::R1));
            out.r2.push(fill(RedPlayer::R2));
        }
        out
    }
}

/// Solves equalities with a single open unknown until nothing changes.
fn propagate(conditions: &[Condition], values: &mut [Option<Rational>]) -> Option<()> {
    loop {
        let mut progressed = false;
        for c in conditions.iter().filter(|c| c.kind == Kind::Zero) {
            let get = |v: &Val, values: &[Option<Rational>]| match v {
                Val::Known(x) => Ok(x.clone()),
                Val::Unknown(i) => values[*i].clone().ok_or(*i),
            };
            let (slot, coef, constant) = match (get(&c.p, values), get(&c.s, values)) {
                (Ok(p), Ok(s)) => {
                    if !c.f.eval(&p, &s).is_zero() {
                        return None;
                    }
                    continue;
                }
                (Err(i), Ok(s)) => (i, &c.f.beta + &c.f.delta * &s, &c.f.alpha + &c.f.gamma * &s),
                (Ok(p), Err(i)) => (i, &c.f.gamma + &c.f.delta * &p, &c.f.alpha + &c.f.beta * &p),
                (Err(_), Err(_)) => continue,
            };
            if coef.is_zero() {
                if !constant.is_zero() {
                    return None;
                }
                continue;
            }
            let x = -constant / coef;
            if !rational::is_probability(&x) {
                return None;
            }
            values[slot] = Some(x);
            progressed = true;
        }
        if !progressed {
            return Some(());
        }
    }
}

/// Whether the condition can hold for some value of its unknowns in
/// `[0, 1]`; a bilinear form takes its extremes at the corners.
fn box_feasible(c: &Condition) -> bool {
    let range = |v: &Val| match v {
        Val::Known(x) => vec![x.clone()],
        Val::Unknown(_) => vec![Rational::zero(), Rational::one()],
    };
    let corners: Vec<Rational> =
        range(&c.p).iter().flat_map(|p| range(&c.s).into_iter().map(move |s| c.f.eval(p, &s))).collect();
    let min = corners.iter().min().unwrap();
    let max = corners.iter().max().unwrap();
    match c.kind {
        Kind::AtLeast => !max.is_negative(),
        Kind::AtMost => !min.is_positive(),
        Kind::Zero => !min.is_positive() && !max.is_negative(),
    }
}
