//! Payoff tables of the three players and their multilinear extensions.
//!
//! Mixtures are carried as the probability of the index-0 action (`a0` for
//! the red players, `b0` for `G0`). Every function is generic over a
//! [`Scalar`], so the same code runs on exact rationals and on `f64` inside
//! search loops.

use std::fmt;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Field-like numeric type usable for payoff arithmetic.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + fmt::Debug {}

impl<T: Clone + PartialOrd + Num + FromPrimitive + fmt::Debug> Scalar for T {}

fn lit<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("payoff constant representable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionA {
    A0,
    A1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionB {
    B0,
    B1,
}

impl ActionA {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> ActionA {
        if i & 1 == 0 {
            ActionA::A0
        } else {
            ActionA::A1
        }
    }
}

impl ActionB {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> ActionB {
        if i & 1 == 0 {
            ActionB::B0
        } else {
            ActionB::B1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RedPlayer {
    R1,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    G0,
    R1,
    R2,
}

impl Player {
    pub const ALL: [Player; 3] = [Player::G0, Player::R1, Player::R2];

    pub fn name(self) -> &'static str {
        match self {
            Player::G0 => "G0",
            Player::R1 => "R1",
            Player::R2 => "R2",
        }
    }
}

impl From<RedPlayer> for Player {
    fn from(r: RedPlayer) -> Player {
        match r {
            RedPlayer::R1 => Player::R1,
            RedPlayer::R2 => Player::R2,
        }
    }
}

impl RedPlayer {
    pub const ALL: [RedPlayer; 2] = [RedPlayer::R1, RedPlayer::R2];
}

/// A two-action mixture: the exact probability of the index-0 action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mixture(Rational);

impl Mixture {
    pub fn new(p: Rational) -> Result<Mixture> {
        if !rational::is_probability(&p) {
            return Err(Error::InvalidArgument(format!(
                "mixture probability {} outside [0,1]",
                rational::to_string(&p)
            )));
        }
        Ok(Mixture(p))
    }

    pub fn pure(index: u8) -> Mixture {
        Mixture(rational::int(i64::from(index & 1 == 0)))
    }

    pub fn p(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

/// `R_i(e, b, a)`: 300 / 100 on the matching diagonal, 0 off it.
pub fn payoff_r(player: RedPlayer, e_bit: u8, b: ActionB, a: ActionA) -> i64 {
    if a.index() != b.index() {
        return 0;
    }
    // R1 at e=0 favours the (b0,a0) corner; R2 and e=1 each swap it.
    let swapped = (player == RedPlayer::R2) ^ (e_bit & 1 == 1);
    if (b == ActionB::B0) ^ swapped {
        300
    } else {
        100
    }
}

/// `G0(e, b, a1, a2)` with `a1` the action of `R1` and `a2` that of `R2`.
pub fn payoff_g(e_bit: u8, b: ActionB, a1: ActionA, a2: ActionA) -> i64 {
    // The table is supported where b = a1 xor a2 xor e; the (a1, a2) pair
    // decides between 1000 and 2000.
    let parity = a1.index() ^ a2.index() ^ (e_bit & 1);
    if parity != b.index() {
        return 0;
    }
    let low_cell = match (e_bit & 1, b) {
        (0, ActionB::B0) => (ActionA::A0, ActionA::A0),
        (1, ActionB::B1) => (ActionA::A1, ActionA::A1),
        _ => (ActionA::A0, ActionA::A1),
    };
    let low = (a1, a2) == low_cell;
    if low {
        1000
    } else {
        2000
    }
}

fn weights<T: Scalar>(p0: &T) -> [T; 2] {
    [p0.clone(), T::one() - p0.clone()]
}

/// Expected `R_i` payoff when `G0` plays `b0` w.p. `p_b0` and `R_i` plays `a0` w.p. `p_a0`.
pub fn expected_payoff_r<T: Scalar>(player: RedPlayer, e_bit: u8, p_b0: &T, p_a0: &T) -> T {
    let wb = weights(p_b0);
    let wa = weights(p_a0);
    let mut total = T::zero();
    for (bi, pb) in wb.iter().enumerate() {
        for (ai, pa) in wa.iter().enumerate() {
            let v = payoff_r(player, e_bit, ActionB::from_index(bi as u8), ActionA::from_index(ai as u8));
            if v != 0 {
                total = total + pb.clone() * pa.clone() * lit(v);
            }
        }
    }
    total
}

/// Expected `G0` payoff of the pure action `b` against independent `R1`, `R2` mixtures.
pub fn expected_payoff_g<T: Scalar>(e_bit: u8, b: ActionB, p1_a0: &T, p2_a0: &T) -> T {
    let w1 = weights(p1_a0);
    let w2 = weights(p2_a0);
    let mut total = T::zero();
    for (i, q1) in w1.iter().enumerate() {
        for (j, q2) in w2.iter().enumerate() {
            let v = payoff_g(e_bit, b, ActionA::from_index(i as u8), ActionA::from_index(j as u8));
            if v != 0 {
                total = total + q1.clone() * q2.clone() * lit(v);
            }
        }
    }
    total
}

/// Trilinear extension: `G0` also mixes.
pub fn expected_payoff_g_mixed<T: Scalar>(e_bit: u8, p_b0: &T, p1_a0: &T, p2_a0: &T) -> T {
    let v0 = expected_payoff_g(e_bit, ActionB::B0, p1_a0, p2_a0);
    let v1 = expected_payoff_g(e_bit, ActionB::B1, p1_a0, p2_a0);
    p_b0.clone() * v0 + (T::one() - p_b0.clone()) * v1
}

fn abs_diff<T: Scalar>(a: T, b: T) -> T {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// `|E[R_i | a0] - E[R_i | a1]|` when `G0` plays `b0` w.p. `p_b0`.
pub fn incentive_gap_r<T: Scalar>(player: RedPlayer, e_bit: u8, p_b0: &T) -> T {
    let v0 = expected_payoff_r(player, e_bit, p_b0, &T::one());
    let v1 = expected_payoff_r(player, e_bit, p_b0, &T::zero());
    abs_diff(v0, v1)
}

/// Weakly better pure action for `R_i` and the payoff difference; ties go to `a0`.
pub fn best_response_r<T: Scalar>(player: RedPlayer, e_bit: u8, p_b0: &T) -> (ActionA, T) {
    let v0 = expected_payoff_r(player, e_bit, p_b0, &T::one());
    let v1 = expected_payoff_r(player, e_bit, p_b0, &T::zero());
    if v0 >= v1 {
        (ActionA::A0, v0 - v1)
    } else {
        (ActionA::A1, v1 - v0)
    }
}

/// Weakly better pure action for `G0` and the payoff difference; ties go to `b0`.
pub fn best_response_g<T: Scalar>(e_bit: u8, p1_a0: &T, p2_a0: &T) -> (ActionB, T) {
    let v0 = expected_payoff_g(e_bit, ActionB::B0, p1_a0, p2_a0);
    let v1 = expected_payoff_g(e_bit, ActionB::B1, p1_a0, p2_a0);
    if v0 >= v1 {
        (ActionB::B0, v0 - v1)
    } else {
        (ActionB::B1, v1 - v0)
    }
}

/// Gain available to `R_i` by switching from its mixture to a best response.
pub fn gain_r<T: Scalar>(player: RedPlayer, e_bit: u8, p_b0: &T, p_a0: &T) -> T {
    let v0 = expected_payoff_r(player, e_bit, p_b0, &T::one());
    let v1 = expected_payoff_r(player, e_bit, p_b0, &T::zero());
    let actual = p_a0.clone() * v0.clone() + (T::one() - p_a0.clone()) * v1.clone();
    let best = if v0 >= v1 { v0 } else { v1 };
    best - actual
}

/// Gain available to `G0` by switching from its mixture to a best response.
pub fn gain_g<T: Scalar>(e_bit: u8, p_b0: &T, p1_a0: &T, p2_a0: &T) -> T {
    let v0 = expected_payoff_g(e_bit, ActionB::B0, p1_a0, p2_a0);
    let v1 = expected_payoff_g(e_bit, ActionB::B1, p1_a0, p2_a0);
    let actual = p_b0.clone() * v0.clone() + (T::one() - p_b0.clone()) * v1.clone();
    let best = if v0 >= v1 { v0 } else { v1 };
    best - actual
}

/// `E[G0 | b0] - E[G0 | b1]`, bilinear in the two red mixtures.
pub fn g_advantage<T: Scalar>(e_bit: u8, p1_a0: &T, p2_a0: &T) -> T {
    expected_payoff_g(e_bit, ActionB::B0, p1_a0, p2_a0) - expected_payoff_g(e_bit, ActionB::B1, p1_a0, p2_a0)
}

/// `E[R_i | a0] - E[R_i | a1]`, affine in `p_b0`.
pub fn r_advantage<T: Scalar>(player: RedPlayer, e_bit: u8, p_b0: &T) -> T {
    expected_payoff_r(player, e_bit, p_b0, &T::one()) - expected_payoff_r(player, e_bit, p_b0, &T::zero())
}

/// The `G0` mixture at which `R_i` is indifferent between its actions.
pub fn r_indifference_point(player: RedPlayer, e_bit: u8) -> Rational {
    // advantage(p) = c + k p, linear in p
    let c: Rational = r_advantage(player, e_bit, &rational::int(0));
    let k: Rational = r_advantage(player, e_bit, &rational::int(1)) - &c;
    -c / k
}
