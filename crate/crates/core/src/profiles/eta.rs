//! Minority masses `eta(c)`, their averages `q_i`, and conditional parity
//! violation masses `r(c)` for every level `i <= n` of a profile.

use num_traits::Zero;
use serde::Serialize;

use super::regret::violation_counts;
use super::{MixClass, StrategyProfile};
use crate::exec::Execution;
use crate::rational::{int, Rational};
use crate::report;
use crate::semigroup::cylinder_count;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaLevel {
    pub depth: u32,
    /// `eta(c) = min(w_0(c), w_1(c))`, indexed by depth-`i` code.
    #[serde(serialize_with = "report::exact_vec")]
    pub eta: Vec<Rational>,
    /// Parity-violation mass inside `c` divided by `m(c)`.
    #[serde(serialize_with = "report::exact_vec")]
    pub r: Vec<Rational>,
    #[serde(serialize_with = "report::exact")]
    pub q: Rational,
    #[serde(serialize_with = "report::exact")]
    pub max_r: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaStats {
    pub depth: u32,
    pub levels: Vec<EtaLevel>,
}

impl EtaStats {
    pub fn q(&self, depth: u32) -> Option<&Rational> {
        self.levels.get(depth as usize).map(|l| &l.q)
    }
}

pub fn eta_stats(profile: &StrategyProfile) -> EtaStats {
    let n = profile.depth();
    let violations = violation_counts(profile, Execution::default());
    let levels = (0..=n)
        .map(|i| {
            let count_i = cylinder_count(i).expect("i <= n") as usize;
            // refinements of a depth-i cylinder share its low code bits
            let mut a0 = vec![0u64; count_i];
            let mut a1 = vec![0u64; count_i];
            let mut bad = vec![0u64; count_i];
            for (code, p) in profile.sigma_g().iter().enumerate() {
                let k = code % count_i;
                match super::classify(p) {
                    MixClass::A0 => a0[k] += 1,
                    MixClass::A1 => a1[k] += 1,
                    MixClass::AM => {}
                }
                bad[k] += violations[code];
            }
            let per_c = int((profile.sigma_g().len() / count_i) as i64);
            let per_c_next = &per_c * int(cylinder_count(n + 1).expect("n <= 3") as i64)
                / int(profile.sigma_g().len() as i64);
            let eta: Vec<Rational> =
                (0..count_i).map(|k| int(a0[k].min(a1[k]) as i64) / &per_c).collect();
            let r: Vec<Rational> = bad.iter().map(|&b| int(b as i64) / &per_c_next).collect();
            let q = eta.iter().fold(Rational::zero(), |acc, v| acc + v) / int(count_i as i64);
            let max_r = r.iter().max().cloned().unwrap_or_else(Rational::zero);
            EtaLevel { depth: i, eta, r, q, max_r }
        })
        .collect();
    EtaStats { depth: n, levels }
}
