//! Depth-`n` measurable strategy profiles and everything measured on them.
//!
//! A profile assigns each player a mixture per depth-`n` cylinder. At a point
//! `x` of `X` a player behaves according to the cylinder containing `x`; for
//! `R_i` that is its behaviour on the information set `{(r,x)} ∪ {g}×T_i^-1(x)`.
//!
//! `G0`'s local payoff at `x` depends on `R1` at `T1 x` and `R2` at `T2 x`,
//! so its regret is measurable one level deeper than the profile: exact
//! `G0` figures are computed over `C_{n+1}`, red-player figures over `C_n`.

mod eta;
mod file;
mod mc;
mod regret;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoffs::{self, Mixture, RedPlayer};
use crate::rational::{self, ratio, Rational};
use crate::semigroup::{cylinder_count, Cylinder, Generator};

pub use eta::{eta_stats, EtaLevel, EtaStats};
pub use file::{Entry, ProfileFile};
pub use mc::{mc_regret, mc_regret_with, Estimate, McRegretReport};
pub use regret::{
    harsanyi_regret, harsanyi_regret_with, parity_violation_mass, parity_violation_mass_with,
    MassValue, PlayerRegret, RegretOptions, RegretReport,
};

/// Profiles are materialised as dense tables; `|C_3| = 2^15` entries is the ceiling.
pub const MAX_PROFILE_DEPTH: u32 = 3;

/// Membership of a `G0` mixture in `A0`, `A1` or the mixing region `A_M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MixClass {
    A0,
    A1,
    AM,
}

impl MixClass {
    /// The colour `i` of `A_i`, or `None` for the mixing region.
    pub fn colour(self) -> Option<u8> {
        match self {
            MixClass::A0 => Some(0),
            MixClass::A1 => Some(1),
            MixClass::AM => None,
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

/// `A0` iff `P(b0) >= 19/20`, `A1` iff `P(b1) >= 19/20`, otherwise `A_M`.
pub fn classify(p_b0: &Rational) -> MixClass {
    let threshold = ratio(19, 20);
    if *p_b0 >= threshold {
        MixClass::A0
    } else if Rational::one() - p_b0 >= threshold {
        MixClass::A1
    } else {
        MixClass::AM
    }
}

/// Float version of [`classify`], used by the Monte Carlo estimator.
pub(crate) fn classify_f64(p_b0: f64) -> MixClass {
    if p_b0 >= 0.95 {
        MixClass::A0
    } else if p_b0 <= 0.05 {
        MixClass::A1
    } else {
        MixClass::AM
    }
}

/// Whether the parity rule holds at a point whose own class is `own`, whose
/// shift images have classes `c1`, `c2`, and whose `x^e` is `e_bit`.
pub fn parity_holds(own: MixClass, c1: MixClass, c2: MixClass, e_bit: u8) -> bool {
    match (own.colour(), c1.colour(), c2.colour()) {
        (Some(k), Some(i), Some(j)) => k == i ^ j ^ (e_bit & 1),
        _ => false,
    }
}

/// Upper bound `20 eps / r` on the mass where a player forgoes a gain of `r`.
pub fn epsilon_measure_bound(epsilon: &Rational, r: &Rational) -> Result<Rational> {
    if *r <= Rational::zero() {
        return Err(Error::InvalidArgument("gain r must be positive".into()));
    }
    if *epsilon < Rational::zero() {
        return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
    }
    Ok(rational::int(20) * epsilon / r)
}

/// Three cylinder-indexed mixture tables of a common depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    depth: u32,
    sigma_g: Vec<Rational>,
    sigma_r1: Vec<Rational>,
    sigma_r2: Vec<Rational>,
}

impl StrategyProfile {
    /// Tables are indexed by cylinder code; entries are `P(b0)` for `G0`
    /// and `P(a0)` for the red players.
    pub fn new(
        depth: u32,
        sigma_g: Vec<Rational>,
        sigma_r1: Vec<Rational>,
        sigma_r2: Vec<Rational>,
    ) -> Result<StrategyProfile> {
        if depth > MAX_PROFILE_DEPTH {
            return Err(Error::ResourceLimit(format!(
                "profile depth {depth} exceeds the table limit {MAX_PROFILE_DEPTH}"
            )));
        }
        let count = cylinder_count(depth)? as usize;
        for (name, table) in [("sigma_g", &sigma_g), ("sigma_r1", &sigma_r1), ("sigma_r2", &sigma_r2)] {
            if table.len() != count {
                return Err(Error::InvalidArgument(format!(
                    "{name} has {} entries, depth {depth} needs {count}",
                    table.len()
                )));
            }
            if let Some((k, bad)) = table.iter().enumerate().find(|(_, p)| !rational::is_probability(p)) {
                return Err(Error::InvalidArgument(format!(
                    "{name}[{k}] = {} is not a probability",
                    rational::to_string(bad)
                )));
            }
        }
        Ok(StrategyProfile { depth, sigma_g, sigma_r1, sigma_r2 })
    }

    /// Same mixtures on every cylinder.
    pub fn constant(depth: u32, p_b0: Rational, p1_a0: Rational, p2_a0: Rational) -> Result<StrategyProfile> {
        let count = if depth > MAX_PROFILE_DEPTH { 0 } else { cylinder_count(depth)? as usize };
        StrategyProfile::new(depth, vec![p_b0; count], vec![p1_a0; count], vec![p2_a0; count])
    }

    /// Builds each table entry from the cylinder it is attached to.
    pub fn from_fn<F>(depth: u32, mut f: F) -> Result<StrategyProfile>
    where
        F: FnMut(&Cylinder) -> (Rational, Rational, Rational),
    {
        if depth > MAX_PROFILE_DEPTH {
            return Err(Error::ResourceLimit(format!(
                "profile depth {depth} exceeds the table limit {MAX_PROFILE_DEPTH}"
            )));
        }
        let count = cylinder_count(depth)?;
        let mut g = Vec::with_capacity(count as usize);
        let mut r1 = Vec::with_capacity(count as usize);
        let mut r2 = Vec::with_capacity(count as usize);
        for code in 0..count {
            let (a, b, c) = f(&Cylinder::new_unchecked(depth, code));
            g.push(a);
            r1.push(b);
            r2.push(c);
        }
        StrategyProfile::new(depth, g, r1, r2)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn sigma_g(&self) -> &[Rational] {
        &self.sigma_g
    }

    pub fn sigma_r1(&self) -> &[Rational] {
        &self.sigma_r1
    }

    pub fn sigma_r2(&self) -> &[Rational] {
        &self.sigma_r2
    }

    pub fn sigma_r(&self, player: RedPlayer) -> &[Rational] {
        match player {
            RedPlayer::R1 => &self.sigma_r1,
            RedPlayer::R2 => &self.sigma_r2,
        }
    }

    pub fn g_mixture(&self, c: &Cylinder) -> Mixture {
        Mixture::new(self.sigma_g[c.code() as usize].clone()).expect("validated at construction")
    }

    /// `G0` class at the depth-`n` cylinder `c`.
    pub fn class_at(&self, c: &Cylinder) -> MixClass {
        classify(&self.sigma_g[c.code() as usize])
    }

    /// The same profile viewed as a depth-`depth` profile (`depth >= n`).
    pub fn refine(&self, depth: u32) -> Result<StrategyProfile> {
        if depth < self.depth {
            return Err(Error::DepthMismatch { expected: self.depth, got: depth });
        }
        let mask = cylinder_count(self.depth)? - 1;
        StrategyProfile::from_fn(depth, |c| {
            let k = (c.code() & mask) as usize;
            (self.sigma_g[k].clone(), self.sigma_r1[k].clone(), self.sigma_r2[k].clone())
        })
    }

    fn check_depth(&self, c: &Cylinder, expected: u32) -> Result<()> {
        if c.depth() != expected {
            return Err(Error::DepthMismatch { expected, got: c.depth() });
        }
        Ok(())
    }
}

/// `G0`'s gain from a best response at the information sets over the
/// depth-`n+1` cylinder `t`.
pub fn bayesian_gain_g(profile: &StrategyProfile, t: &Cylinder) -> Result<Rational> {
    profile.check_depth(t, profile.depth + 1)?;
    let own = t.truncate(profile.depth)?;
    let c1 = t.shift(Generator::T1)?;
    let c2 = t.shift(Generator::T2)?;
    Ok(payoffs::gain_g(
        t.e_label(),
        &profile.sigma_g[own.code() as usize],
        &profile.sigma_r1[c1.code() as usize],
        &profile.sigma_r2[c2.code() as usize],
    ))
}

/// `R_i`'s gain from a best response at the information sets over the
/// depth-`n` cylinder `c`.
pub fn bayesian_gain_r(player: RedPlayer, profile: &StrategyProfile, c: &Cylinder) -> Result<Rational> {
    profile.check_depth(c, profile.depth)?;
    let k = c.code() as usize;
    Ok(payoffs::gain_r(player, c.e_label(), &profile.sigma_g[k], &profile.sigma_r(player)[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::semigroup::{compose, cylinders};

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(&int(1)), MixClass::A0);
        assert_eq!(classify(&ratio(19, 20)), MixClass::A0);
        assert_eq!(classify(&ratio(1, 2)), MixClass::AM);
        assert_eq!(classify(&ratio(1, 20)), MixClass::A1);
        assert_eq!(classify(&ratio(189, 200)), MixClass::AM);
        assert_eq!(classify(&int(0)), MixClass::A1);
    }

    #[test]
    fn measure_bound() {
        assert_eq!(epsilon_measure_bound(&ratio(1, 1000), &int(80)).unwrap(), ratio(1, 4000));
        assert_eq!(epsilon_measure_bound(&int(0), &int(7)).unwrap(), int(0));
        assert_eq!(epsilon_measure_bound(&ratio(1, 1000), &int(2000)).unwrap(), ratio(1, 100_000));
        assert!(epsilon_measure_bound(&ratio(1, 1000), &int(0)).is_err());
        assert!(epsilon_measure_bound(&ratio(1, 1000), &int(-3)).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(StrategyProfile::new(0, vec![int(1)], vec![int(1); 2], vec![int(1); 2]).is_err());
        assert!(StrategyProfile::new(0, vec![int(2), int(1)], vec![int(1); 2], vec![int(1); 2]).is_err());
        assert!(StrategyProfile::constant(4, int(1), int(1), int(1)).is_err());
        assert!(StrategyProfile::constant(1, int(1), int(1), int(1)).is_ok());
    }

    #[test]
    fn gains_of_constant_profile() {
        let p = StrategyProfile::constant(0, int(1), int(1), int(1)).unwrap();
        let any = Cylinder::new(0, 0).unwrap();
        let t1 = compose(1, &any, &any).unwrap();
        let t0 = compose(0, &any, &any).unwrap();
        assert_eq!(bayesian_gain_g(&p, &t1).unwrap(), int(2000));
        assert_eq!(bayesian_gain_g(&p, &t0).unwrap(), int(0));
        for c in cylinders(0).unwrap() {
            assert_eq!(bayesian_gain_r(RedPlayer::R1, &p, &c).unwrap(), int(0));
            assert_eq!(bayesian_gain_r(RedPlayer::R2, &p, &c).unwrap(), int(0));
        }
        assert!(bayesian_gain_g(&p, &any).is_err());
        assert!(bayesian_gain_r(RedPlayer::R1, &p, &t0).is_err());
    }

    #[test]
    fn refinement_keeps_behaviour() {
        let p = StrategyProfile::new(
            0,
            vec![ratio(1, 3), ratio(2, 3)],
            vec![int(1), int(0)],
            vec![ratio(1, 2), int(1)],
        )
        .unwrap();
        let q = p.refine(1).unwrap();
        for c in cylinders(1).unwrap() {
            let e = c.e_label() as usize;
            assert_eq!(q.sigma_g()[c.code() as usize], p.sigma_g()[e]);
        }
    }
}
