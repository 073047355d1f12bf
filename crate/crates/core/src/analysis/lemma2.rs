//! The quadratic bound on `G0`'s mixing probability and the parity-failure total.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::profiles::epsilon_measure_bound;
use crate::rational::{int, ratio, Rational};
use crate::report;

/// `f(c) = c^2 - (999/500) c + 3001/10^6`.
pub fn quadratic(c: &Rational) -> Rational {
    c * c - ratio(999, 500) * c + ratio(3001, 1_000_000)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainAudit {
    /// Coefficients `(c^0, c^1, c^2)` obtained by substituting
    /// `ab <= (a+b)^2/4` and `a + b <= c + 1/1000` into
    /// `c <= 1/4000 + ab + (a+b)/2` and scaling by 4.
    #[serde(serialize_with = "report::exact_vec")]
    pub derived: Vec<Rational>,
    #[serde(serialize_with = "report::exact_vec")]
    pub stated: Vec<Rational>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma2Bound {
    /// Certified enclosure of the smaller root: `f(lower) > 0 > f(upper)`.
    #[serde(serialize_with = "report::exact")]
    pub root_lower: Rational,
    #[serde(serialize_with = "report::exact")]
    pub root_upper: Rational,
    /// `16/10000`, the bound in the statement.
    #[serde(serialize_with = "report::exact")]
    pub certified_upper: Rational,
    pub below_certified_upper: bool,
    /// `.0016`, the figure displayed in the proof.
    #[serde(serialize_with = "report::exact")]
    pub displayed: Rational,
    pub below_displayed: bool,
    /// `f` is non-negative on `[0, root_lower]`: it is decreasing there.
    pub nonnegative_below_root: bool,
    pub chain: ChainAudit,
}

/// Bisection in exact arithmetic on `[0, 999/1000]`, where `f` falls from
/// positive to negative, until the enclosure is narrower than `2^-bits`.
pub fn lemma2_bound_with(bits: u32) -> Lemma2Bound {
    let mut lo = Rational::zero();
    let mut hi = ratio(999, 1000);
    let width = Rational::one() / Rational::from_integer(num_bigint::BigInt::one() << bits);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / int(2);
        if quadratic(&mid) > Rational::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(quadratic(&lo) > Rational::zero() && quadratic(&hi) <= Rational::zero());
    let certified_upper = ratio(16, 10_000);
    let displayed = ratio(16, 10_000);
    // f'(c) = 2c - 999/500 < 0 on [0, 999/1000], so f is decreasing there
    let nonnegative_below_root = quadratic(&Rational::zero()) > Rational::zero()
        && int(2) * &lo - ratio(999, 500) < Rational::zero()
        && quadratic(&lo) > Rational::zero();
    Lemma2Bound {
        below_certified_upper: hi < certified_upper,
        below_displayed: hi < displayed,
        root_lower: lo,
        root_upper: hi,
        certified_upper,
        displayed,
        nonnegative_below_root,
        chain: chain_audit(),
    }
}

pub fn lemma2_bound() -> Lemma2Bound {
    lemma2_bound_with(40)
}

fn chain_audit() -> ChainAudit {
    // 4 * (1/4000 + s^2/4 + s/2 - c) with s = c + d, d = 1/1000:
    // s^2 = c^2 + 2dc + d^2, 2s = 2c + 2d
    let d = ratio(1, 1000);
    let constant = int(4) * ratio(1, 4000) + &d * &d + int(2) * &d;
    let linear = int(2) * &d + int(2) - int(4);
    let derived = vec![constant, linear, Rational::one()];
    let stated = vec![ratio(3001, 1_000_000), -ratio(999, 500), Rational::one()];
    ChainAudit { matches: derived == stated, derived, stated }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityFailureBound {
    /// Two mixing masses, each below the Lemma 2 bound.
    #[serde(serialize_with = "report::exact_vec")]
    pub mixing_terms: Vec<Rational>,
    /// Three `20 eps / r` terms with `eps = 1/1000`, `r = 80`.
    #[serde(serialize_with = "report::exact_vec")]
    pub incentive_terms: Vec<Rational>,
    #[serde(serialize_with = "report::exact")]
    pub total: Rational,
    #[serde(serialize_with = "report::exact")]
    pub displayed_sum: Rational,
    #[serde(serialize_with = "report::exact")]
    pub statement_bound: Rational,
    pub within_displayed: bool,
    pub within_statement: bool,
}

pub fn lemma2_parity_failure_bound() -> ParityFailureBound {
    let mixing = ratio(16, 10_000);
    let term = epsilon_measure_bound(&ratio(1, 1000), &int(80)).expect("r > 0");
    let mixing_terms = vec![mixing.clone(), mixing];
    let incentive_terms = vec![term.clone(), term.clone(), term];
    let total = mixing_terms.iter().chain(&incentive_terms).fold(Rational::zero(), |a, v| a + v);
    let displayed_sum = ratio(395, 100_000);
    let statement_bound = ratio(4, 1000);
    ParityFailureBound {
        within_displayed: total <= displayed_sum,
        within_statement: displayed_sum <= statement_bound && total <= statement_bound,
        mixing_terms,
        incentive_terms,
        total,
        displayed_sum,
        statement_bound,
    }
}
