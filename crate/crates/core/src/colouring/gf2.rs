//! The parity constraints of a graph as a linear system over GF(2).
//!
//! Each interior node `v` contributes `c(v) + c(T1 v) + c(T2 v) = e(v)`.
//! Variables occurring in a single live equation are peeled off first (on
//! acyclic graphs this consumes everything); the remaining core is reduced
//! by Gaussian elimination that tracks which equations were combined, so an
//! inconsistency comes with the exact set of equations summing to `0 = 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{Colouring, PointGraph, DEFAULT_COLOUR};
use crate::error::{Error, Result};

/// One constraint, with terms listed as written (repeats allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub label: String,
    /// Node whose parity rule this is; `None` for a fixed colour.
    pub owner: Option<String>,
    pub terms: Vec<String>,
    pub rhs: u8,
}

impl Equation {
    /// Terms occurring an odd number of times.
    fn effective(&self) -> BTreeSet<&str> {
        let mut set = BTreeSet::new();
        for t in &self.terms {
            if !set.remove(t.as_str()) {
                set.insert(t.as_str());
            }
        }
        set
    }

    fn self_referential(&self) -> bool {
        self.owner.as_ref().is_some_and(|o| self.terms.iter().filter(|t| *t == o).count() > 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    /// The equation has one unknown left, which it forces.
    Forced { equation: usize, node: String, colour: u8 },
    /// The equation has no unknowns left and evaluates to the wrong side.
    Violated { equation: usize, note: String },
    /// The listed equations, summed, cancel every unknown and leave `0 = 1`.
    Sum { equations: Vec<usize> },
}

/// An infeasibility certificate: equations whose sum is `0 = 1`, plus a
/// propagation narrative that can be replayed step by step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contradiction {
    pub equations: Vec<Equation>,
    pub steps: Vec<Step>,
}

impl Contradiction {
    /// Checks the certificate: every step is valid in order, the last one
    /// closes the argument, and the equations sum to `0 = 1`.
    pub fn replay(&self) -> std::result::Result<(), String> {
        let mut known: HashMap<&str, u8> = HashMap::new();
        let eq = |k: usize| self.equations.get(k).ok_or_else(|| format!("step cites missing equation {k}"));
        let mut closed = false;
        for (i, step) in self.steps.iter().enumerate() {
            if closed {
                return Err(format!("step {i} follows the contradiction"));
            }
            match step {
                Step::Forced { equation, node, colour } => {
                    let e = eq(*equation)?;
                    let (unknown, value) = substitute(&e.effective(), &known);
                    if unknown != [node.as_str()] {
                        return Err(format!("step {i}: {node} is not the only unknown of {}", e.label));
                    }
                    if value ^ e.rhs != *colour {
                        return Err(format!("step {i}: {} forces {node} = {}", e.label, value ^ e.rhs));
                    }
                    let name = e.terms.iter().find(|t| *t == node).expect("term exists");
                    known.insert(name.as_str(), *colour);
                }
                Step::Violated { equation, .. } => {
                    let e = eq(*equation)?;
                    let (unknown, value) = substitute(&e.effective(), &known);
                    if !unknown.is_empty() || value == e.rhs {
                        return Err(format!("step {i}: {} is not violated", e.label));
                    }
                    closed = true;
                }
                Step::Sum { equations } => {
                    let mut terms = BTreeSet::new();
                    let mut rhs = 0;
                    for &k in equations {
                        let e = eq(k)?;
                        rhs ^= e.rhs;
                        for t in e.effective() {
                            if !terms.remove(t) {
                                terms.insert(t);
                            }
                        }
                    }
                    let (unknown, value) = substitute(&terms, &known);
                    if !unknown.is_empty() || value == rhs {
                        return Err(format!("step {i}: the sum does not reduce to 0 = 1"));
                    }
                    closed = true;
                }
            }
        }
        if !closed {
            return Err("narrative ends without a contradiction".into());
        }
        let mut total = BTreeSet::new();
        let mut rhs = 0;
        for e in &self.equations {
            rhs ^= e.rhs;
            for t in e.effective() {
                if !total.remove(t) {
                    total.insert(t);
                }
            }
        }
        if !total.is_empty() || rhs != 1 {
            return Err("the certificate equations do not sum to 0 = 1".into());
        }
        Ok(())
    }

    /// Colours forced along the narrative, in order.
    pub fn forced(&self) -> Vec<(String, u8)> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Forced { node, colour, .. } => Some((node.clone(), *colour)),
                _ => None,
            })
            .collect()
    }

    /// Human-readable rendering of the narrative.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            match step {
                Step::Forced { equation, node, colour } => {
                    out += &format!("{} forces colour({node}) = {colour}\n", self.equations[*equation].label);
                }
                Step::Violated { note, .. } => out += &format!("{note}\n"),
                Step::Sum { equations } => {
                    let labels: Vec<&str> = equations.iter().map(|&k| self.equations[k].label.as_str()).collect();
                    out += &format!("summing {} gives 0 = 1\n", labels.join(", "));
                }
            }
        }
        out
    }
}

fn substitute<'a>(terms: &BTreeSet<&'a str>, known: &HashMap<&str, u8>) -> (Vec<&'a str>, u8) {
    let mut unknown = Vec::new();
    let mut value = 0;
    for &t in terms {
        match known.get(t) {
            Some(c) => value ^= c,
            None => unknown.push(t),
        }
    }
    (unknown, value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Colouring),
    Infeasible(Box<Contradiction>),
}

/// A total parity colouring (free choices blue) or an infeasibility certificate.
pub fn detect_parity_infeasible(graph: &PointGraph) -> Feasibility {
    let system = System::parity(graph, &(0..graph.len()).collect());
    match system.solve(graph.len()) {
        Ok(values) => Feasibility::Feasible(Colouring::from_total(values)),
        Err(combo) => Feasibility::Infeasible(Box::new(system.certificate(graph, &combo))),
    }
}

/// Exact extension of `fixed` over `region` (used when greedy propagation conflicts).
pub(super) fn solve_extension(graph: &PointGraph, fixed: &Colouring, region: &BTreeSet<usize>) -> Result<Colouring> {
    let mut system = System::parity(graph, region);
    let mentioned: BTreeSet<usize> = system.rows.iter().flat_map(|r| r.terms.iter().copied()).collect();
    for v in mentioned {
        if let Some(colour) = fixed.get(v) {
            system.rows.push(Row { terms: vec![v], rhs: colour, owner: None });
        }
    }
    match system.solve(graph.len()) {
        Ok(values) => {
            let mut c = fixed.clone();
            for &v in region {
                c.set(v, values[v]);
            }
            Ok(c)
        }
        Err(combo) => Err(Error::Contradiction(Box::new(system.certificate(graph, &combo)))),
    }
}

/// Solves rows of `(terms, rhs)` over `n_vars` variables; `None` if inconsistent.
pub(super) fn solve_rows(n_vars: usize, rows: Vec<(Vec<usize>, u8)>) -> Option<Vec<u8>> {
    let system = System { rows: rows.into_iter().map(|(terms, rhs)| Row { terms, rhs, owner: None }).collect() };
    system.solve(n_vars).ok()
}

struct Row {
    terms: Vec<usize>,
    rhs: u8,
    owner: Option<usize>,
}

impl Row {
    fn effective(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for &t in &self.terms {
            if !set.remove(&t) {
                set.insert(t);
            }
        }
        set.into_iter().collect()
    }
}

struct System {
    rows: Vec<Row>,
}

impl System {
    fn parity(graph: &PointGraph, nodes: &BTreeSet<usize>) -> System {
        let rows = nodes
            .iter()
            .filter_map(|&v| {
                let (a, b) = graph.successors(v)?;
                Some(Row { terms: vec![v, a, b], rhs: graph.e(v), owner: Some(v) })
            })
            .collect();
        System { rows }
    }

    /// Peel, then eliminate. Returns an assignment (unconstrained variables
    /// take the default colour) or the indices of rows summing to `0 = 1`.
    fn solve(&self, n_vars: usize) -> std::result::Result<Vec<u8>, Vec<usize>> {
        let eqs: Vec<Vec<usize>> = self.rows.iter().map(Row::effective).collect();
        let m = eqs.len();
        let mut occurrences = vec![Vec::new(); n_vars];
        for (i, e) in eqs.iter().enumerate() {
            for &v in e {
                occurrences[v].push(i);
            }
        }
        let mut alive = vec![true; m];
        let mut count: Vec<usize> = occurrences.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..n_vars).rev().filter(|&v| count[v] == 1).collect();
        let mut peeled = Vec::new();
        while let Some(v) = stack.pop() {
            if count[v] != 1 {
                continue;
            }
            let i = *occurrences[v].iter().find(|&&i| alive[i]).expect("one live occurrence");
            alive[i] = false;
            peeled.push((i, v));
            for &w in &eqs[i] {
                count[w] -= 1;
                if count[w] == 1 {
                    stack.push(w);
                }
            }
        }

        let core: Vec<usize> = (0..m).filter(|&i| alive[i]).collect();
        let mut columns: Vec<usize> = core.iter().flat_map(|&i| eqs[i].iter().copied()).collect();
        columns.sort_unstable();
        columns.dedup();
        let column_of: HashMap<usize, usize> = columns.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let width = columns.len().div_ceil(64);
        let combo_width = core.len().div_ceil(64);

        struct Pivot {
            column: usize,
            bits: Vec<u64>,
            rhs: u8,
            combo: Vec<u64>,
        }
        let mut pivots: Vec<Pivot> = Vec::new();
        for (k, &i) in core.iter().enumerate() {
            let mut bits = vec![0u64; width];
            for v in &eqs[i] {
                set_bit(&mut bits, column_of[v]);
            }
            let mut rhs = self.rows[i].rhs;
            let mut combo = vec![0u64; combo_width];
            set_bit(&mut combo, k);
            for p in &pivots {
                if get_bit(&bits, p.column) {
                    xor_into(&mut bits, &p.bits);
                    xor_into(&mut combo, &p.combo);
                    rhs ^= p.rhs;
                }
            }
            match lowest_bit(&bits) {
                Some(column) => pivots.push(Pivot { column, bits, rhs, combo }),
                None if rhs == 1 => {
                    return Err((0..core.len()).filter(|&j| get_bit(&combo, j)).map(|j| core[j]).collect());
                }
                None => {}
            }
        }

        let mut values: Vec<Option<u8>> = vec![None; n_vars];
        for p in pivots.iter().rev() {
            let mut value = p.rhs;
            for (k, &v) in columns.iter().enumerate() {
                if k != p.column && get_bit(&p.bits, k) {
                    value ^= *values[v].get_or_insert(DEFAULT_COLOUR);
                }
            }
            values[columns[p.column]] = Some(value);
        }
        for &(i, v) in peeled.iter().rev() {
            let mut value = self.rows[i].rhs;
            for &w in &eqs[i] {
                if w != v {
                    value ^= *values[w].get_or_insert(DEFAULT_COLOUR);
                }
            }
            values[v] = Some(value);
        }
        Ok(values.into_iter().map(|v| v.unwrap_or(DEFAULT_COLOUR)).collect())
    }

    fn certificate(&self, graph: &PointGraph, rows: &[usize]) -> Contradiction {
        let equations: Vec<Equation> = rows
            .iter()
            .map(|&i| {
                let row = &self.rows[i];
                let terms: Vec<String> = row.terms.iter().map(|&v| graph.id(v).to_string()).collect();
                match row.owner {
                    Some(v) => Equation {
                        label: format!(
                            "parity at {}: c({}) + c({}) + c({}) = {}",
                            terms[0], terms[0], terms[1], terms[2], row.rhs
                        ),
                        owner: Some(graph.id(v).to_string()),
                        terms,
                        rhs: row.rhs,
                    },
                    None => Equation {
                        label: format!("fixed colour c({}) = {}", terms[0], row.rhs),
                        owner: None,
                        terms,
                        rhs: row.rhs,
                    },
                }
            })
            .collect();
        let steps = narrative(&equations);
        Contradiction { equations, steps }
    }
}

/// Unit propagation over the certificate. Equations that do not mention
/// their owner twice are tried first, so forced colours are derived before a
/// self-referential rule is evaluated.
fn narrative(equations: &[Equation]) -> Vec<Step> {
    let effective: Vec<BTreeSet<&str>> = equations.iter().map(Equation::effective).collect();
    let mut order: Vec<usize> = (0..equations.len()).collect();
    order.sort_by_key(|&k| equations[k].self_referential());
    let mut known: BTreeMap<&str, u8> = BTreeMap::new();
    let mut used = vec![false; equations.len()];
    let mut steps = Vec::new();
    loop {
        let known_map: HashMap<&str, u8> = known.iter().map(|(k, v)| (*k, *v)).collect();
        let mut progressed = false;
        for &k in &order {
            if used[k] {
                continue;
            }
            let (unknown, value) = substitute(&effective[k], &known_map);
            if unknown.is_empty() {
                used[k] = true;
                if value != equations[k].rhs {
                    steps.push(Step::Violated { equation: k, note: violation_note(&equations[k], &known) });
                    return steps;
                }
                progressed = true;
                break;
            }
        }
        if progressed {
            continue;
        }
        for &k in &order {
            if used[k] {
                continue;
            }
            let (unknown, value) = substitute(&effective[k], &known_map);
            if unknown.len() == 1 {
                let colour = value ^ equations[k].rhs;
                used[k] = true;
                known.insert(unknown[0], colour);
                steps.push(Step::Forced { equation: k, node: unknown[0].to_string(), colour });
                progressed = true;
                break;
            }
        }
        if !progressed {
            let rest: Vec<usize> = (0..equations.len()).filter(|&k| !used[k]).collect();
            steps.push(Step::Sum { equations: rest });
            return steps;
        }
    }
}

fn violation_note(e: &Equation, known: &BTreeMap<&str, u8>) -> String {
    let values: Vec<String> = e
        .terms
        .iter()
        .filter(|t| known.contains_key(t.as_str()))
        .map(|t| format!("c({t}) = {}", known[t.as_str()]))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let context = if values.is_empty() { String::new() } else { format!(" with {}", values.join(", ")) };
    match &e.owner {
        Some(o) if e.self_referential() => {
            format!("{}{context} forces {o} to be coloured differently from itself", e.label)
        }
        _ => format!("{}{context} cannot hold", e.label),
    }
}

fn set_bit(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn get_bit(bits: &[u64], k: usize) -> bool {
    bits[k / 64] >> (k % 64) & 1 == 1
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest_bit(bits: &[u64]) -> Option<usize> {
    bits.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::{verify_parity, Node};

    fn node(id: &str, e: u8, t: Option<(usize, usize)>) -> Node {
        Node { id: id.into(), e, t1: t.map(|p| p.0), t2: t.map(|p| p.1) }
    }

    pub(crate) fn xy_pair() -> PointGraph {
        PointGraph::new(vec![node("x", 0, Some((1, 0))), node("y", 1, Some((0, 0)))]).unwrap()
    }

    #[test]
    fn xy_pair_is_infeasible() {
        let Feasibility::Infeasible(c) = detect_parity_infeasible(&xy_pair()) else { panic!("feasible") };
        c.replay().unwrap();
        assert_eq!(c.forced(), vec![("y".to_string(), 1)]);
        match c.steps.last().unwrap() {
            Step::Violated { note, .. } => assert!(note.contains("x to be coloured differently from itself"), "{note}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_loop_forces_blue() {
        let g = PointGraph::new(vec![node("z", 0, Some((0, 0)))]).unwrap();
        let Feasibility::Feasible(c) = detect_parity_infeasible(&g) else { panic!() };
        assert_eq!(c.get(0), Some(0));
        let g = PointGraph::new(vec![node("z", 1, Some((0, 0)))]).unwrap();
        let Feasibility::Feasible(c) = detect_parity_infeasible(&g) else { panic!() };
        assert_eq!(c.get(0), Some(1));
    }

    #[test]
    fn pure_cycle_needs_elimination() {
        // a -> (b, b), b -> (a, a): c(a) = e_a, c(b) = e_b with no conflict
        let g = PointGraph::new(vec![node("a", 1, Some((1, 1))), node("b", 0, Some((0, 0)))]).unwrap();
        let Feasibility::Feasible(c) = detect_parity_infeasible(&g) else { panic!() };
        assert!(verify_parity(&g, &c).unwrap().is_empty());
    }

    #[test]
    fn two_variable_cycle_without_units() {
        // three mutually dependent nodes; either outcome must check out
        let g = PointGraph::new(vec![
            node("a", 0, Some((1, 2))),
            node("b", 1, Some((0, 2))),
            node("c", 1, Some((0, 1))),
        ])
        .unwrap();
        match detect_parity_infeasible(&g) {
            Feasibility::Feasible(c) => assert!(verify_parity(&g, &c).unwrap().is_empty()),
            Feasibility::Infeasible(c) => c.replay().unwrap(),
        }
    }

    #[test]
    fn tampered_certificate_fails_replay() {
        let Feasibility::Infeasible(mut c) = detect_parity_infeasible(&xy_pair()) else { panic!() };
        if let Step::Forced { colour, .. } = &mut c.steps[0] {
            *colour ^= 1;
        }
        assert!(c.replay().is_err());
    }
}
