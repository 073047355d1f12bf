//! Incentive gaps of the red players and the four twin cases for `G0`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::payoffs::{self, ActionA, ActionB, RedPlayer};
use crate::rational::{int, ratio, Rational};
use crate::report;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinGapAtE {
    pub e: u8,
    #[serde(serialize_with = "report::exact")]
    pub value: Rational,
    #[serde(serialize_with = "report::exact")]
    pub at: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinGap {
    /// `min_p max(gap_R1, gap_R2)` over both e-bits.
    #[serde(serialize_with = "report::exact")]
    pub value: Rational,
    #[serde(serialize_with = "report::exact")]
    pub at: Rational,
    pub per_e: Vec<MinGapAtE>,
    /// Same minimum over the grid `k / grid_points`.
    #[serde(serialize_with = "report::exact")]
    pub grid_value: Rational,
    #[serde(serialize_with = "report::exact")]
    pub grid_at: Rational,
    pub grid_points: u32,
    /// `R1`'s payoffs for `a0` and `a1` at the minimiser, `e = 0`.
    #[serde(serialize_with = "report::exact")]
    pub r1_a0_payoff: Rational,
    #[serde(serialize_with = "report::exact")]
    pub r1_a1_payoff: Rational,
}

fn max_gap(e: u8, p: &Rational) -> Rational {
    let g1 = payoffs::incentive_gap_r(RedPlayer::R1, e, p);
    let g2 = payoffs::incentive_gap_r(RedPlayer::R2, e, p);
    g1.max(g2)
}

/// Both gaps are absolute values of affine functions of `p`, so the
/// minimum of their maximum sits at an endpoint, a zero of either affine
/// part, or a point where the two agree up to sign.
fn min_gap_at(e: u8) -> MinGapAtE {
    let affine = |player| {
        let c: Rational = payoffs::r_advantage(player, e, &Rational::zero());
        let k: Rational = payoffs::r_advantage(player, e, &Rational::one()) - &c;
        (c, k)
    };
    let (c1, k1) = affine(RedPlayer::R1);
    let (c2, k2) = affine(RedPlayer::R2);
    let mut candidates = vec![Rational::zero(), Rational::one()];
    for (c, k) in [
        (c1.clone(), k1.clone()),
        (c2.clone(), k2.clone()),
        (&c1 - &c2, &k1 - &k2),
        (&c1 + &c2, &k1 + &k2),
    ] {
        if !k.is_zero() {
            let p = -c / k;
            if p >= Rational::zero() && p <= Rational::one() {
                candidates.push(p);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let (value, at) = candidates
        .into_iter()
        .map(|p| (max_gap(e, &p), p))
        .min()
        .expect("endpoints are always candidates");
    MinGapAtE { e, value, at }
}

pub fn lemma1_min_gap() -> MinGap {
    lemma1_min_gap_with_grid(10_000)
}

pub fn lemma1_min_gap_with_grid(grid_points: u32) -> MinGap {
    let per_e: Vec<MinGapAtE> = [0, 1].into_iter().map(min_gap_at).collect();
    let best = per_e.iter().min_by(|a, b| a.value.cmp(&b.value).then(a.at.cmp(&b.at))).unwrap();
    let (grid_value, grid_at) = (0..=grid_points)
        .map(|k| {
            let p = ratio(i64::from(k), i64::from(grid_points));
            (max_gap(0, &p).min(max_gap(1, &p)), p)
        })
        .min()
        .unwrap();
    MinGap {
        value: best.value.clone(),
        at: best.at.clone(),
        r1_a0_payoff: payoffs::expected_payoff_r(RedPlayer::R1, 0, &best.at, &Rational::one()),
        r1_a1_payoff: payoffs::expected_payoff_r(RedPlayer::R1, 0, &best.at, &Rational::zero()),
        per_e,
        grid_value,
        grid_at,
        grid_points,
    }
}

/// Which of `R2`'s actions is almost never played, and `R1`'s range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwinCase {
    /// `P(a0 of R2) <= 1/20`, `P(a0 of R1) >= 3/5`; twin with `x^e = 1`.
    A1,
    /// `P(a0 of R2) <= 1/20`, `P(a0 of R1) <= 3/5`; twin with `x^e = 0`.
    A2,
    /// `P(a1 of R2) <= 1/20`, `P(a0 of R1) >= 3/5`; twin with `x^e = 1`.
    B1,
    /// `P(a1 of R2) <= 1/20`, `P(a0 of R1) <= 3/5`; twin with `x^e = 0`.
    B2,
}

impl TwinCase {
    pub const ALL: [TwinCase; 4] = [TwinCase::A1, TwinCase::A2, TwinCase::B1, TwinCase::B2];

    pub fn name(self) -> &'static str {
        match self {
            TwinCase::A1 => "R2 a0 <= 1/20, R1 a0 >= 3/5",
            TwinCase::A2 => "R2 a0 <= 1/20, R1 a0 <= 3/5",
            TwinCase::B1 => "R2 a1 <= 1/20, R1 a0 >= 3/5",
            TwinCase::B2 => "R2 a1 <= 1/20, R1 a0 <= 3/5",
        }
    }

    pub fn e(self) -> u8 {
        match self {
            TwinCase::A1 | TwinCase::B1 => 1,
            TwinCase::A2 | TwinCase::B2 => 0,
        }
    }

    /// `R2`'s `P(a0)` as a function of the small weight `w`.
    fn s(self, w: &Rational) -> Rational {
        match self {
            TwinCase::A1 | TwinCase::A2 => w.clone(),
            TwinCase::B1 | TwinCase::B2 => Rational::one() - w,
        }
    }

    fn p_range(self) -> (Rational, Rational) {
        match self {
            TwinCase::A1 | TwinCase::B1 => (ratio(3, 5), Rational::one()),
            TwinCase::A2 | TwinCase::B2 => (Rational::zero(), ratio(3, 5)),
        }
    }

    /// The action `G0` is pushed towards at this twin.
    pub fn favoured(self) -> ActionB {
        match self {
            TwinCase::A1 | TwinCase::A2 => ActionB::B0,
            TwinCase::B1 | TwinCase::B2 => ActionB::B1,
        }
    }

    /// Constants printed in the proof: lower bound for the favoured action,
    /// upper bound for the other one.
    pub fn printed_bounds(self) -> (Rational, Rational) {
        match self {
            TwinCase::A1 => (int(570), int(480)),
            TwinCase::A2 => (int(760), int(670)),
            TwinCase::B1 => (int(1140), int(820)),
            TwinCase::B2 => (int(780), int(670)),
        }
    }
}

const W_MAX: (i64, i64) = (1, 20);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwinBounds {
    pub case: TwinCase,
    pub description: &'static str,
    pub e: u8,
    pub favoured: String,
    #[serde(serialize_with = "report::exact")]
    pub printed_lower: Rational,
    #[serde(serialize_with = "report::exact")]
    pub printed_upper: Rational,
    /// Recomputed by relaxing `p` monomial by monomial (see [`relaxed_bounds`]).
    #[serde(serialize_with = "report::exact")]
    pub relaxed_lower: Rational,
    #[serde(serialize_with = "report::exact")]
    pub relaxed_upper: Rational,
    /// True extrema over the parameter rectangle.
    #[serde(serialize_with = "report::exact")]
    pub exact_lower: Rational,
    #[serde(serialize_with = "report::exact")]
    pub exact_upper: Rational,
}

impl TwinBounds {
    pub fn printed_gap(&self) -> Rational {
        &self.printed_lower - &self.printed_upper
    }

    pub fn exact_gap(&self) -> Rational {
        &self.exact_lower - &self.exact_upper
    }

    /// The printed constants are valid bounds on the true extrema.
    pub fn printed_valid(&self) -> bool {
        self.printed_lower <= self.exact_lower && self.printed_upper >= self.exact_upper
    }

    pub fn relaxation_matches(&self) -> (bool, bool) {
        (self.relaxed_lower == self.printed_lower, self.relaxed_upper == self.printed_upper)
    }

    /// `(b0_bound, b1_bound)` in table order.
    pub fn by_action(&self) -> (&Rational, &Rational) {
        match self.case.favoured() {
            ActionB::B0 => (&self.printed_lower, &self.printed_upper),
            ActionB::B1 => (&self.printed_upper, &self.printed_lower),
        }
    }
}

fn other(b: ActionB) -> ActionB {
    match b {
        ActionB::B0 => ActionB::B1,
        ActionB::B1 => ActionB::B0,
    }
}

/// Expected payoff of `b` at the twin, as a function of `(p, w)`.
fn twin_payoff(case: TwinCase, b: ActionB, p: &Rational, w: &Rational) -> Rational {
    payoffs::expected_payoff_g(case.e(), b, p, &case.s(w))
}

fn corners(case: TwinCase) -> Vec<(Rational, Rational)> {
    let (lo, hi) = case.p_range();
    let ws = [Rational::zero(), ratio(W_MAX.0, W_MAX.1)];
    [lo, hi].into_iter().flat_map(|p| ws.clone().into_iter().map(move |w| (p.clone(), w))).collect()
}

/// Monomials `coef * P(p) * S(w)` of the payoff of `b`, where `P` is `p` or
/// `1 - p` and `S` is `w` or `1 - w`.
fn monomials(case: TwinCase, b: ActionB) -> Vec<(i64, bool, bool)> {
    let mut out = Vec::new();
    for a1 in [ActionA::A0, ActionA::A1] {
        for a2 in [ActionA::A0, ActionA::A1] {
            let coef = payoffs::payoff_g(case.e(), b, a1, a2);
            if coef == 0 {
                continue;
            }
            // P(a2 = a0) is w in the A cases and 1 - w in the B cases
            let r2_is_w = matches!(case, TwinCase::A1 | TwinCase::A2) == (a2 == ActionA::A0);
            out.push((coef, a1 == ActionA::A0, r2_is_w));
        }
    }
    out
}

/// The proof-style estimates: the favoured action is bounded below by its
/// best single monomial at the worst corner; the other action is bounded
/// above by maximising each monomial's `p` factor separately, then taking
/// the worst `w`.
pub fn relaxed_bounds(case: TwinCase) -> (Rational, Rational) {
    let (plo, phi) = case.p_range();
    let w_hi = ratio(W_MAX.0, W_MAX.1);
    let pf = |is_p: bool, p: &Rational| if is_p { p.clone() } else { Rational::one() - p };
    let wf = |is_w: bool, w: &Rational| if is_w { w.clone() } else { Rational::one() - w };
    let lower = monomials(case, case.favoured())
        .into_iter()
        .map(|(coef, is_p, is_w)| {
            corners(case)
                .iter()
                .map(|(p, w)| int(coef) * pf(is_p, p) * wf(is_w, w))
                .min()
                .unwrap()
        })
        .max()
        .unwrap_or_else(Rational::zero);
    let upper = [Rational::zero(), w_hi]
        .iter()
        .map(|w| {
            monomials(case, other(case.favoured()))
                .into_iter()
                .map(|(coef, is_p, is_w)| {
                    let p_max = pf(is_p, &plo).max(pf(is_p, &phi));
                    int(coef) * p_max * wf(is_w, w)
                })
                .fold(Rational::zero(), |acc, v| acc + v)
        })
        .max()
        .unwrap();
    (lower, upper)
}

/// Both payoffs are bilinear in `(p, w)`, so their extrema over the
/// rectangle are attained at its corners.
pub fn exact_bounds(case: TwinCase) -> (Rational, Rational) {
    let fav = case.favoured();
    let lower = corners(case).iter().map(|(p, w)| twin_payoff(case, fav, p, w)).min().unwrap();
    let upper = corners(case).iter().map(|(p, w)| twin_payoff(case, other(fav), p, w)).max().unwrap();
    (lower, upper)
}

pub fn lemma1_twin_cases() -> Vec<TwinBounds> {
    TwinCase::ALL
        .into_iter()
        .map(|case| {
            let (printed_lower, printed_upper) = case.printed_bounds();
            let (relaxed_lower, relaxed_upper) = relaxed_bounds(case);
            let (exact_lower, exact_upper) = exact_bounds(case);
            TwinBounds {
                case,
                description: case.name(),
                e: case.e(),
                favoured: format!("{:?}", case.favoured()).to_lowercase(),
                printed_lower,
                printed_upper,
                relaxed_lower,
                relaxed_upper,
                exact_lower,
                exact_upper,
            }
        })
        .collect()
}

/// CSV with columns `case,b0_bound,b1_bound,gap` (printed constants).
pub fn twin_cases_csv(rows: &[TwinBounds]) -> String {
    let mut out = String::from("case,b0_bound,b1_bound,gap\n");
    for row in rows {
        let (b0, b1) = row.by_action();
        out += &format!(
            "{:?},{},{},{}\n",
            row.case,
            crate::rational::to_string(b0),
            crate::rational::to_string(b1),
            crate::rational::to_string(&row.printed_gap())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_gap_is_one_hundred_at_half() {
        let m = lemma1_min_gap_with_grid(1000);
        assert_eq!(m.value, int(100));
        assert_eq!(m.at, ratio(1, 2));
        assert_eq!(m.grid_value, int(100));
        assert_eq!(m.r1_a0_payoff, int(150));
        assert_eq!(m.r1_a1_payoff, int(50));
        for e in &m.per_e {
            assert_eq!(e.value, int(100));
        }
    }

    #[test]
    fn exact_extrema() {
        let expected = [(600, 440), (790, 610), (1160, 800), (790, 610)];
        for (case, (lo, hi)) in TwinCase::ALL.into_iter().zip(expected) {
            assert_eq!(exact_bounds(case), (int(lo), int(hi)), "{case:?}");
        }
    }

    #[test]
    fn relaxation_reproduces_six_constants() {
        let expected = [(570, 480), (760, 670), (1140, 810), (760, 670)];
        for (case, (lo, hi)) in TwinCase::ALL.into_iter().zip(expected) {
            assert_eq!(relaxed_bounds(case), (int(lo), int(hi)), "{case:?}");
        }
    }

    #[test]
    fn printed_constants_are_valid_with_gap() {
        for row in lemma1_twin_cases() {
            assert!(row.printed_valid(), "{:?}", row.case);
            assert!(row.printed_gap() >= int(80));
            assert!(row.exact_gap() >= int(80));
        }
    }

    #[test]
    fn csv_layout() {
        let csv = twin_cases_csv(&lemma1_twin_cases());
        assert_eq!(csv, "case,b0_bound,b1_bound,gap\nA1,570,480,90\nA2,760,670,90\nB1,820,1140,320\nB2,670,780,110\n");
    }
}
