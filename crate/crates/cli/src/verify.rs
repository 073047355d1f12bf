//! `verify lemma1|lemma2|lemma3`: one check per printed constant.

use serde::Serialize;
use serde_json::{json, Value};
use shiftgame::analysis::{
    g_map, lemma1_min_gap, lemma1_twin_cases, lemma2_bound, lemma2_parity_failure_bound, lemma3_base_case,
    lemma3_iterate_interval, twin_cases_csv, TwinBounds,
};
use shiftgame::rational::{int, ratio, to_string};
use shiftgame::Rational;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), pass, detail: detail.into(), note: None }
    }

    fn note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

pub struct Outcome {
    pub checks: Vec<Check>,
    pub data: Value,
    /// Extra text printed after the check lines.
    pub table: Option<String>,
}

fn s(r: &Rational) -> String {
    to_string(r)
}

/// A printed lower bound passes if the proof-style relaxation gives it, or
/// if it is still below the true minimum; the second case is annotated.
fn bound_check(row: &TwinBounds, lower: bool) -> Check {
    let case = format!("{:?}", row.case);
    let (printed, relaxed, exact) = if lower {
        (&row.printed_lower, &row.relaxed_lower, &row.exact_lower)
    } else {
        (&row.printed_upper, &row.relaxed_upper, &row.exact_upper)
    };
    let (role, action) = if lower {
        ("at least", row.favoured.clone())
    } else {
        ("at most", if row.favoured == "b0" { "b1".to_string() } else { "b0".to_string() })
    };
    let name = format!("{case} {action} {role} {}", s(printed));
    let valid = if lower { printed <= exact } else { printed >= exact };
    let detail = format!("relaxed {}, exact extremum {}", s(relaxed), s(exact));
    if relaxed == printed {
        Check::new(name, valid, detail)
    } else {
        Check::new(name, valid, detail).note(format!(
            "relaxation gives {}; the printed constant is a valid but looser bound",
            s(relaxed)
        ))
    }
}

pub fn lemma1() -> Outcome {
    let rows = lemma1_twin_cases();
    let mut checks = Vec::new();
    for row in &rows {
        checks.push(bound_check(row, true));
        checks.push(bound_check(row, false));
        checks.push(Check::new(
            format!("{:?} incentive at least 80", row.case),
            row.printed_gap() >= int(80) && row.exact_gap() >= int(80),
            format!("printed gap {}, exact gap {}", s(&row.printed_gap()), s(&row.exact_gap())),
        ));
    }
    let m = lemma1_min_gap();
    checks.push(Check::new(
        "min-max red gap 100 at p = 1/2",
        m.value == int(100) && m.at == ratio(1, 2),
        format!("minimum {} at p = {}", s(&m.value), s(&m.at)),
    ));
    checks.push(Check::new(
        format!("grid cross-check over {} points", m.grid_points),
        m.grid_value == m.value,
        format!("grid minimum {} at p = {}", s(&m.grid_value), s(&m.grid_at)),
    ));
    checks.push(Check::new(
        "R1 payoffs 150 and 50 at p = 1/2",
        m.r1_a0_payoff == int(150) && m.r1_a1_payoff == int(50),
        format!("a0 {}, a1 {}", s(&m.r1_a0_payoff), s(&m.r1_a1_payoff)),
    ));
    let table = twin_cases_csv(&rows);
    Outcome { checks, data: json!({ "twin_cases": rows, "min_gap": m }), table: Some(table) }
}

pub fn lemma2() -> Outcome {
    let b = lemma2_bound();
    let f = lemma2_parity_failure_bound();
    let root = format!("[{}, {}]", shiftgame::rational::to_f64(&b.root_lower), shiftgame::rational::to_f64(&b.root_upper));
    let checks = vec![
        Check::new(
            "quadratic coefficients 3001/10^6, -999/500, 1",
            b.chain.matches,
            format!("derived {:?}", b.chain.derived.iter().map(s).collect::<Vec<_>>()),
        ),
        Check::new(
            "root inside (0.001503, 0.001504)",
            b.root_lower > ratio(1503, 1_000_000) && b.root_upper < ratio(1504, 1_000_000),
            format!("certified enclosure {root}"),
        ),
        Check::new("root below 16/10000", b.below_certified_upper, format!("upper end {}", s(&b.root_upper))),
        Check::new("root below .0016", b.below_displayed, format!("upper end {}", s(&b.root_upper)))
            .note("the certified root is tighter than the displayed .0016"),
        Check::new(
            "quadratic non-negative below the root",
            b.nonnegative_below_root,
            "f(0) > 0 and f decreasing on [0, root]",
        ),
        Check::new(
            "parity-failure sum .00395",
            f.total == ratio(395, 100_000) && f.within_displayed,
            format!("2 x 16/10000 + 3 x {} = {}", s(&f.incentive_terms[0]), s(&f.total)),
        ),
        Check::new("parity-failure sum at most 4/1000", f.within_statement, format!("{} <= {}", s(&f.total), s(&f.statement_bound))),
    ];
    Outcome { checks, data: json!({ "bound": b, "parity_failure": f }), table: None }
}

pub fn lemma3() -> Outcome {
    let base = lemma3_base_case();
    let third = ratio(1, 3);
    let g_third = g_map(&third);
    let it = lemma3_iterate_interval(&ratio(48, 100), &ratio(1, 2), 100).expect("interval inside [0, 1/2]");
    let last = it.trajectory.last().expect("trajectory starts with the start interval");
    let checks = vec![
        Check::new(
            "base case 2(124/250)^2 - 1/125 = 0.484032",
            base.value == ratio(484_032, 1_000_000),
            format!("value {}", s(&base.value)),
        ),
        Check::new("base case at least .48", base.at_least_048, format!("{} >= 12/25", s(&base.value))),
        Check::new(
            "g(1/3) = 4/9 - 1/125 > 1/3",
            g_third == ratio(4, 9) - ratio(1, 125) && g_third > third,
            format!("g(1/3) = {}", s(&g_third)),
        ),
        Check::new(
            "100 iterations from [0.48, 0.5] stay at least 1/3",
            it.stays_above_third,
            format!(
                "minimum lower end {:.6}, final enclosure [{:.6}, {:.6}]",
                shiftgame::rational::to_f64(&it.min_lower),
                shiftgame::rational::to_f64(&last.lower),
                shiftgame::rational::to_f64(&last.upper)
            ),
        ),
    ];
    let summary = json!({
        "steps": it.trajectory.len() - 1,
        "stays_above_third": it.stays_above_third,
        "min_lower": shiftgame::report::ExactValue::new(&it.min_lower),
        "final": last,
    });
    Outcome { checks, data: json!({ "base_case": base, "g_of_third": shiftgame::report::ExactValue::new(&g_third), "iteration": summary }), table: None }
}
