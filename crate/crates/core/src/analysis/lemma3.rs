//! Minority-mass recursion: XOR convolution, the base case and iteration of
//! `g(q) = 2q - 2q^2 - 1/125`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, round_down_dyadic, round_up_dyadic, Rational};
use crate::report;

fn check_minority(name: &str, x: &Rational) -> Result<()> {
    if *x < Rational::zero() || *x > rational::half() {
        return Err(Error::InvalidArgument(format!(
            "{name} = {} is outside the minority-mass range [0, 1/2]",
            rational::to_string(x)
        )));
    }
    Ok(())
}

fn check_probability(name: &str, x: &Rational) -> Result<()> {
    if !rational::is_probability(x) {
        return Err(Error::InvalidArgument(format!("{name} = {} is not in [0, 1]", rational::to_string(x))));
    }
    Ok(())
}

/// `p + q - 2pq`: minority mass of the XOR of independent colours whose
/// minority masses are `p` and `q`.
pub fn xor_convolution(p: &Rational, q: &Rational) -> Result<Rational> {
    check_minority("p", p)?;
    check_minority("q", q)?;
    Ok(p + q - int(2) * p * q)
}

/// Right-hand side of
/// `eta(t) >= -r(t) + eta(c)(1 - eta(d) - r(d)) + eta(d)(1 - eta(c) - r(c))`.
pub fn lemma3_recursion_check(
    eta_c: &Rational,
    eta_d: &Rational,
    r_c: &Rational,
    r_d: &Rational,
    r_t: &Rational,
) -> Result<Rational> {
    check_minority("eta_c", eta_c)?;
    check_minority("eta_d", eta_d)?;
    for (name, r) in [("r_c", r_c), ("r_d", r_d), ("r_t", r_t)] {
        check_probability(name, r)?;
    }
    let one = Rational::one();
    Ok(-r_t.clone() + eta_c * (&one - eta_d - r_d) + eta_d * (&one - eta_c - r_c))
}

/// `g(q) = 2q - 2q^2 - 1/125`, clamped below at zero.
pub fn g_map(q: &Rational) -> Rational {
    let v = int(2) * q - int(2) * q * q - ratio(1, 125);
    v.max(Rational::zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseCase {
    #[serde(serialize_with = "report::exact")]
    pub value: Rational,
    pub at_least_048: bool,
    pub at_least_third: bool,
}

/// `2 (124/250)^2 - 1/125`.
pub fn lemma3_base_case() -> BaseCase {
    let w = ratio(124, 250);
    let value = int(2) * &w * &w - ratio(1, 125);
    BaseCase {
        at_least_048: value >= ratio(48, 100),
        at_least_third: value >= ratio(1, 3),
        value,
    }
}

/// One step of an iteration: exact while denominators stay small, then an
/// outward-rounded dyadic enclosure. `g` is increasing on `[0, 1/2]`, so
/// iterating the endpoints encloses every start in between.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    #[serde(serialize_with = "report::exact")]
    pub lower: Rational,
    #[serde(serialize_with = "report::exact")]
    pub upper: Rational,
}

impl Enclosure {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Iteration {
    pub trajectory: Vec<Enclosure>,
    pub stays_above_third: bool,
    #[serde(serialize_with = "report::exact")]
    pub min_lower: Rational,
}

/// Denominators above this many bits are rounded outward.
const EXACT_BITS: u64 = 256;
const ROUNDING_BITS: u32 = 128;

fn step(x: &Rational, down: bool) -> Rational {
    let v = g_map(x);
    if v.denom().bits() <= EXACT_BITS {
        v
    } else if down {
        round_down_dyadic(&v, ROUNDING_BITS)
    } else {
        round_up_dyadic(&v, ROUNDING_BITS)
    }
}

/// Iterates every start in `[lower, upper]` at once.
pub fn lemma3_iterate_interval(lower: &Rational, upper: &Rational, steps: usize) -> Result<Iteration> {
    check_minority("lower", lower)?;
    check_minority("upper", upper)?;
    if lower > upper {
        return Err(Error::InvalidArgument("empty start interval".into()));
    }
    let third = ratio(1, 3);
    let mut lo = lower.clone();
    let mut hi = upper.clone();
    let mut trajectory = vec![Enclosure { lower: lo.clone(), upper: hi.clone() }];
    for _ in 0..steps {
        lo = step(&lo, true);
        hi = step(&hi, false).min(rational::half());
        trajectory.push(Enclosure { lower: lo.clone(), upper: hi.clone() });
    }
    let min_lower = trajectory.iter().map(|e| e.lower.clone()).min().expect("start is recorded");
    Ok(Iteration { stays_above_third: min_lower >= third, trajectory, min_lower })
}

/// Iterates `g` from `q0` for `steps` steps.
pub fn lemma3_iterate(q0: &Rational, steps: usize) -> Result<Iteration> {
    lemma3_iterate_interval(q0, q0, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_examples() {
        assert_eq!(xor_convolution(&ratio(1, 2), &ratio(1, 2)).unwrap(), ratio(1, 2));
        assert_eq!(xor_convolution(&int(0), &ratio(2, 7)).unwrap(), ratio(2, 7));
        assert_eq!(xor_convolution(&ratio(1, 3), &ratio(1, 3)).unwrap(), ratio(4, 9));
        assert!(xor_convolution(&ratio(3, 5), &int(0)).is_err());
    }

    #[test]
    fn recursion_examples() {
        let third = ratio(1, 3);
        let z = int(0);
        assert_eq!(lemma3_recursion_check(&third, &third, &z, &z, &z).unwrap(), ratio(4, 9));
        let r = ratio(1, 250);
        assert_eq!(lemma3_recursion_check(&third, &third, &r, &r, &r).unwrap(), ratio(4, 9) - ratio(1, 150));
    }

    #[test]
    fn base_case_value() {
        let b = lemma3_base_case();
        assert_eq!(b.value, ratio(484_032, 1_000_000));
        assert!(b.at_least_048 && b.at_least_third);
    }

    #[test]
    fn map_examples() {
        assert_eq!(g_map(&ratio(1, 3)), ratio(4, 9) - ratio(1, 125));
        assert!(g_map(&ratio(1, 3)) > ratio(1, 3));
        assert_eq!(g_map(&ratio(1, 2)), ratio(1, 2) - ratio(1, 125));
        assert_eq!(g_map(&int(0)), int(0));
    }

    #[test]
    fn interval_iteration_stays_high() {
        let it = lemma3_iterate_interval(&ratio(12, 25), &ratio(1, 2), 100).unwrap();
        assert_eq!(it.trajectory.len(), 101);
        assert!(it.stays_above_third);
        assert!(!it.trajectory.last().unwrap().is_exact());
        let single = lemma3_iterate(&ratio(1, 3), 3).unwrap();
        assert!(single.trajectory[1].is_exact());
    }
}
