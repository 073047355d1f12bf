//! Exact Harsanyi and supremum-Bayesian regret.
//!
//! A depth-`(n+1)` cylinder `t` is the twin `(e, c1, c2)` of two depth-`n`
//! cylinders. Its own depth-`n` truncation `c'` fixes `e` together with the
//! depth-`(n-1)` prefixes of `c1` and `c2`, so the `|C_{n+1}|` twins are
//! grouped by `c'`, and inside a group only the *distinct* red mixtures over
//! each prefix matter. Work is `|C_n| * k1 * k2` where `k_i` counts distinct
//! `sigma_Ri` values per prefix class, instead of `|C_{n+1}|`.

use std::collections::HashMap;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{classify, parity_holds, MixClass, StrategyProfile};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::payoffs::{self, Player, RedPlayer};
use crate::rational::{int, Rational};
use crate::report;
use crate::semigroup::{
    compose, cylinder_count, label_count, sample_cylinder_with, Cylinder, Generator, ENUMERATION_CAP,
    EXTENDED_ENUMERATION_CAP,
};

const CAP_HINT: &str = "use a Monte Carlo estimate or raise the cap to 4";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegretOptions {
    pub exec: Execution,
    /// Deepest cylinder level that may be enumerated.
    pub cap: u32,
    /// Samples used when a parity mass has to fall back to sampling.
    pub fallback_samples: u64,
    pub seed: u64,
}

impl Default for RegretOptions {
    fn default() -> Self {
        RegretOptions { exec: Execution::default(), cap: ENUMERATION_CAP, fallback_samples: 100_000, seed: 0 }
    }
}

impl RegretOptions {
    fn check(&self, depth: u32) -> Result<()> {
        if self.cap > EXTENDED_ENUMERATION_CAP {
            return Err(Error::InvalidArgument(format!(
                "enumeration cap {} is above the supported maximum {EXTENDED_ENUMERATION_CAP}",
                self.cap
            )));
        }
        if depth > self.cap {
            return Err(Error::CapExceeded { depth, cap: self.cap, hint: CAP_HINT });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerRegret {
    /// Mean over `X` of the gain from a best response.
    #[serde(serialize_with = "report::exact")]
    pub harsanyi: Rational,
    /// Largest gain over any information set.
    #[serde(serialize_with = "report::exact")]
    pub sup_bayesian: Rational,
    /// Smallest-code cylinder attaining `sup_bayesian`.
    pub witness: Cylinder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegretReport {
    pub depth: u32,
    pub g0: PlayerRegret,
    pub r1: PlayerRegret,
    pub r2: PlayerRegret,
    /// Mass of depth-`(n+1)` cylinders where the parity rule fails.
    #[serde(serialize_with = "report::exact")]
    pub parity_violation_mass: Rational,
    /// Mass of depth-`n` cylinders where `G0` lies in `A_M`.
    #[serde(serialize_with = "report::exact")]
    pub mixing_mass: Rational,
    #[serde(serialize_with = "report::exact")]
    pub a0_mass: Rational,
    #[serde(serialize_with = "report::exact")]
    pub a1_mass: Rational,
}

impl RegretReport {
    pub fn player(&self, p: Player) -> &PlayerRegret {
        match p {
            Player::G0 => &self.g0,
            Player::R1 => &self.r1,
            Player::R2 => &self.r2,
        }
    }

    /// `eps` for which the profile is an `eps`-Harsanyi equilibrium.
    pub fn max_harsanyi(&self) -> &Rational {
        [&self.g0.harsanyi, &self.r1.harsanyi, &self.r2.harsanyi].into_iter().max().unwrap()
    }

    /// `eps` for which the profile is an `eps`-Bayesian equilibrium.
    pub fn max_sup_bayesian(&self) -> &Rational {
        [&self.g0.sup_bayesian, &self.r1.sup_bayesian, &self.r2.sup_bayesian]
            .into_iter()
            .max()
            .unwrap()
    }
}

/// A mass that is exact when enumeration is allowed and sampled otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassValue {
    Exact {
        #[serde(serialize_with = "report::exact")]
        value: Rational,
    },
    Estimate {
        mean: f64,
        std_error: f64,
        samples: u64,
        seed: u64,
    },
}

impl MassValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, MassValue::Exact { .. })
    }

    pub fn approx(&self) -> f64 {
        match self {
            MassValue::Exact { value } => crate::rational::to_f64(value),
            MassValue::Estimate { mean, .. } => *mean,
        }
    }
}

/// Exact regret report with the default options.
pub fn harsanyi_regret(profile: &StrategyProfile) -> Result<RegretReport> {
    harsanyi_regret_with(profile, &RegretOptions::default())
}

pub fn harsanyi_regret_with(profile: &StrategyProfile, opts: &RegretOptions) -> Result<RegretReport> {
    let n = profile.depth();
    opts.check(n + 1)?;
    let twins = TwinTables::new(profile);
    let cells = opts.exec.map_range(0..twins.count_n, |code| twins.g_cell(code));

    let mut sum = Rational::zero();
    let mut sup = Rational::zero();
    let mut witness = u64::MAX;
    let mut violations = 0u64;
    for cell in &cells {
        sum += &cell.weighted_gain;
        violations += cell.violations;
        if cell.sup > sup || (cell.sup == sup && cell.witness < witness) {
            sup = cell.sup.clone();
            witness = cell.witness;
        }
    }
    let count_next = cylinder_count(n + 1)?;
    let denom = int(count_next as i64);
    let g0 = PlayerRegret {
        harsanyi: sum / &denom,
        sup_bayesian: sup,
        witness: Cylinder::new_unchecked(n + 1, witness),
    };

    let r1 = red_regret(profile, RedPlayer::R1, opts.exec);
    let r2 = red_regret(profile, RedPlayer::R2, opts.exec);

    let mut counts = [0u64; 3];
    for p in profile.sigma_g() {
        counts[classify(p).slot()] += 1;
    }
    let count_n = int(twins.count_n as i64);
    Ok(RegretReport {
        depth: n,
        g0,
        r1,
        r2,
        parity_violation_mass: int(violations as i64) / denom,
        mixing_mass: int(counts[MixClass::AM.slot()] as i64) / &count_n,
        a0_mass: int(counts[MixClass::A0.slot()] as i64) / &count_n,
        a1_mass: int(counts[MixClass::A1.slot()] as i64) / &count_n,
    })
}

/// Mass of depth-`(n+1)` cylinders violating the parity rule.
pub fn parity_violation_mass(profile: &StrategyProfile) -> Result<MassValue> {
    parity_violation_mass_with(profile, &RegretOptions::default())
}

/// As [`parity_violation_mass`]; beyond the cap it samples and says so.
pub fn parity_violation_mass_with(profile: &StrategyProfile, opts: &RegretOptions) -> Result<MassValue> {
    let n = profile.depth();
    match opts.check(n + 1) {
        Ok(()) => {
            let counts = violation_counts(profile, opts.exec);
            let total: u64 = counts.iter().sum();
            Ok(MassValue::Exact { value: int(total as i64) / int(cylinder_count(n + 1)? as i64) })
        }
        Err(Error::CapExceeded { .. }) => sampled_violation_mass(profile, opts),
        Err(e) => Err(e),
    }
}

fn sampled_violation_mass(profile: &StrategyProfile, opts: &RegretOptions) -> Result<MassValue> {
    if opts.fallback_samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let n = profile.depth();
    let classes: Vec<MixClass> = profile.sigma_g().iter().map(classify).collect();
    let hits = opts.exec.map_range(0..opts.fallback_samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i);
        let t = sample_cylinder_with(n + 1, &mut rng).expect("depth checked");
        u64::from(!parity_at(&classes, &t))
    });
    let k: u64 = hits.iter().sum();
    let m = opts.fallback_samples as f64;
    let mean = k as f64 / m;
    let std_error = if opts.fallback_samples > 1 {
        (mean * (1.0 - mean) / (m - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    Ok(MassValue::Estimate { mean, std_error, samples: opts.fallback_samples, seed: opts.seed })
}

/// Parity check at the depth-`(n+1)` cylinder `t` given per-code classes.
pub(crate) fn parity_at(classes: &[MixClass], t: &Cylinder) -> bool {
    let n = t.depth() - 1;
    let own = t.truncate(n).expect("n < depth");
    let c1 = t.shift(Generator::T1).expect("depth >= 1");
    let c2 = t.shift(Generator::T2).expect("depth >= 1");
    parity_holds(
        classes[own.code() as usize],
        classes[c1.code() as usize],
        classes[c2.code() as usize],
        t.e_label(),
    )
}

/// Number of violating depth-`(n+1)` refinements of each depth-`n` cylinder.
pub(crate) fn violation_counts(profile: &StrategyProfile, exec: Execution) -> Vec<u64> {
    let twins = TwinTables::new(profile);
    exec.map_range(0..twins.count_n, |code| twins.violations(code))
}

fn red_regret(profile: &StrategyProfile, player: RedPlayer, exec: Execution) -> PlayerRegret {
    let n = profile.depth();
    let g = profile.sigma_g();
    let r = profile.sigma_r(player);
    let count = g.len() as u64;
    let gains = exec.map_range(0..count, |code| {
        let k = code as usize;
        payoffs::gain_r(player, (code & 1) as u8, &g[k], &r[k])
    });
    let mut sum = Rational::zero();
    let mut sup = Rational::zero();
    let mut witness = 0u64;
    for (code, gain) in gains.into_iter().enumerate() {
        if gain > sup {
            sup = gain.clone();
            witness = code as u64;
        }
        sum += gain;
    }
    PlayerRegret {
        harsanyi: sum / int(count as i64),
        sup_bayesian: sup,
        witness: Cylinder::new_unchecked(n, witness),
    }
}

/// Distinct values of a table and the id of each entry.
struct Interned {
    values: Vec<Rational>,
    ids: Vec<u32>,
}

impl Interned {
    fn new(table: &[Rational]) -> Interned {
        let mut index: HashMap<&Rational, u32> = HashMap::new();
        let mut values = Vec::new();
        let ids = table
            .iter()
            .map(|v| {
                *index.entry(v).or_insert_with(|| {
                    values.push(v.clone());
                    (values.len() - 1) as u32
                })
            })
            .collect();
        Interned { values, ids }
    }
}

#[derive(Debug, Clone, Copy)]
struct Bucket {
    id: u32,
    count: u64,
    /// Smallest code carrying this value; keeps witnesses canonical.
    min_code: u64,
}

/// For each depth-`(n-1)` prefix (a single empty prefix when `n = 0`), the
/// distinct ids over all depth-`n` extensions, sorted by id.
fn histograms(ids: &[u32], n: u32) -> Vec<Vec<Bucket>> {
    let prefix_bits = if n == 0 { 0 } else { label_count(n - 1) };
    let prefixes = 1u64 << prefix_bits;
    let extensions = 1u64 << (label_count(n) - prefix_bits);
    (0..prefixes)
        .map(|d| {
            let mut buckets: Vec<Bucket> = Vec::new();
            let mut slot: HashMap<u32, usize> = HashMap::new();
            for k in 0..extensions {
                let code = d | (k << prefix_bits);
                let id = ids[code as usize];
                match slot.get(&id) {
                    Some(&s) => buckets[s].count += 1,
                    None => {
                        slot.insert(id, buckets.len());
                        buckets.push(Bucket { id, count: 1, min_code: code });
                    }
                }
            }
            buckets.sort_by_key(|b| b.id);
            buckets
        })
        .collect()
}

struct GCell {
    weighted_gain: Rational,
    sup: Rational,
    witness: u64,
    violations: u64,
}

struct TwinTables<'a> {
    n: u32,
    count_n: u64,
    sigma_g: &'a [Rational],
    r1: Interned,
    r2: Interned,
    h1: Vec<Vec<Bucket>>,
    h2: Vec<Vec<Bucket>>,
    classes: Vec<MixClass>,
    class_hist: Vec<Vec<Bucket>>,
}

impl<'a> TwinTables<'a> {
    fn new(profile: &'a StrategyProfile) -> TwinTables<'a> {
        let n = profile.depth();
        let r1 = Interned::new(profile.sigma_r1());
        let r2 = Interned::new(profile.sigma_r2());
        let h1 = histograms(&r1.ids, n);
        let h2 = histograms(&r2.ids, n);
        let classes: Vec<MixClass> = profile.sigma_g().iter().map(classify).collect();
        let class_ids: Vec<u32> = classes.iter().map(|c| c.slot() as u32).collect();
        let class_hist = histograms(&class_ids, n);
        TwinTables {
            n,
            count_n: profile.sigma_g().len() as u64,
            sigma_g: profile.sigma_g(),
            r1,
            r2,
            h1,
            h2,
            classes,
            class_hist,
        }
    }

    /// `(x^e, prefix of c1, prefix of c2)` shared by every twin under `code`.
    fn split(&self, code: u64) -> (u8, usize, usize) {
        if self.n == 0 {
            return (code as u8, 0, 0);
        }
        let c = Cylinder::new_unchecked(self.n, code);
        let d1 = c.shift(Generator::T1).expect("n >= 1").code();
        let d2 = c.shift(Generator::T2).expect("n >= 1").code();
        (c.e_label(), d1 as usize, d2 as usize)
    }

    fn twin_code(&self, e: u8, a: u64, b: u64) -> u64 {
        let c1 = Cylinder::new_unchecked(self.n, a);
        let c2 = Cylinder::new_unchecked(self.n, b);
        compose(e, &c1, &c2).expect("depth within range").code()
    }

    fn g_cell(&self, code: u64) -> GCell {
        let (e, d1, d2) = self.split(code);
        let p_b0 = &self.sigma_g[code as usize];
        let mut weighted_gain = Rational::zero();
        let mut sup = Rational::zero();
        let mut best: Option<(u64, u64)> = None;
        let mut best_code = u64::MAX;
        for b1 in &self.h1[d1] {
            for b2 in &self.h2[d2] {
                let gain = payoffs::gain_g(
                    e,
                    p_b0,
                    &self.r1.values[b1.id as usize],
                    &self.r2.values[b2.id as usize],
                );
                let weight = int((b1.count * b2.count) as i64);
                weighted_gain += &gain * weight;
                match gain.cmp(&sup) {
                    std::cmp::Ordering::Greater => {
                        sup = gain;
                        best = Some((b1.min_code, b2.min_code));
                        best_code = self.twin_code(e, b1.min_code, b2.min_code);
                    }
                    std::cmp::Ordering::Equal => {
                        let candidate = self.twin_code(e, b1.min_code, b2.min_code);
                        if best.is_none() || candidate < best_code {
                            best = Some((b1.min_code, b2.min_code));
                            best_code = candidate;
                        }
                    }
                    std::cmp::Ordering::Less => {}
                }
            }
        }
        GCell { weighted_gain, sup, witness: best_code, violations: self.violations(code) }
    }

    fn violations(&self, code: u64) -> u64 {
        let (e, d1, d2) = self.split(code);
        let own = self.classes[code as usize];
        let mut count = 0;
        for b1 in &self.class_hist[d1] {
            for b2 in &self.class_hist[d2] {
                let c1 = class_from_slot(b1.id);
                let c2 = class_from_slot(b2.id);
                if !parity_holds(own, c1, c2, e) {
                    count += b1.count * b2.count;
                }
            }
        }
        count
    }
}

fn class_from_slot(slot: u32) -> MixClass {
    match slot {
        0 => MixClass::A0,
        1 => MixClass::A1,
        _ => MixClass::AM,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::bayesian_gain_g;
    use crate::rational::ratio;
    use crate::semigroup::cylinders;

    fn sample_profile(depth: u32) -> StrategyProfile {
        let values = [int(0), ratio(1, 3), ratio(19, 20), int(1), ratio(1, 20), ratio(1, 2)];
        StrategyProfile::from_fn(depth, |c| {
            let k = c.code() as usize;
            (values[k % 6].clone(), values[(k * 7 + 1) % 6].clone(), values[(k / 3 + k) % 6].clone())
        })
        .unwrap()
    }

    fn brute_force_g(profile: &StrategyProfile) -> (Rational, Rational, u64, u64) {
        let classes: Vec<MixClass> = profile.sigma_g().iter().map(classify).collect();
        let mut sum = Rational::zero();
        let mut sup = Rational::zero();
        let mut witness = u64::MAX;
        let mut violations = 0;
        for t in cylinders(profile.depth() + 1).unwrap() {
            let g = bayesian_gain_g(profile, &t).unwrap();
            if g > sup || (g == sup && t.code() < witness) {
                sup = g.clone();
                witness = t.code();
            }
            sum += g;
            if !parity_at(&classes, &t) {
                violations += 1;
            }
        }
        (sum, sup, witness, violations)
    }

    #[test]
    fn grouped_matches_enumeration() {
        for depth in 0..=2 {
            let p = sample_profile(depth);
            let report = harsanyi_regret(&p).unwrap();
            let (sum, sup, witness, violations) = brute_force_g(&p);
            let total = int(cylinder_count(depth + 1).unwrap() as i64);
            assert_eq!(report.g0.harsanyi, sum / &total, "depth {depth}");
            assert_eq!(report.g0.sup_bayesian, sup);
            assert_eq!(report.g0.witness.code(), witness);
            assert_eq!(report.parity_violation_mass, int(violations as i64) / total);
        }
    }

    #[test]
    fn sanity_profile() {
        let p = StrategyProfile::constant(0, int(1), int(1), int(1)).unwrap();
        let r = harsanyi_regret(&p).unwrap();
        assert_eq!(r.g0.harsanyi, int(1000));
        assert_eq!(r.g0.sup_bayesian, int(2000));
        assert_eq!(r.r1.harsanyi, int(0));
        assert_eq!(r.r2.harsanyi, int(0));
        assert_eq!(r.a0_mass, int(1));
        // e = 0 cylinders need colour 1 = 0 xor 0 xor 0 to fail; e = 1 fails
        assert_eq!(r.parity_violation_mass, ratio(1, 2));
    }

    #[test]
    fn red_regret_for_misaligned_red() {
        let p = StrategyProfile::constant(0, int(1), int(0), int(0)).unwrap();
        let r = harsanyi_regret(&p).unwrap();
        // gaps of 300 at e=0 and 100 at e=1
        assert_eq!(r.r1.harsanyi, int(200));
        assert_eq!(r.r1.sup_bayesian, int(300));
        assert_eq!(r.r1.witness.e_label(), 0);
    }

    #[test]
    fn modes_agree() {
        let p = sample_profile(2);
        let seq = RegretOptions { exec: Execution::Sequential, ..Default::default() };
        let par = RegretOptions { exec: Execution::Parallel, ..Default::default() };
        assert_eq!(harsanyi_regret_with(&p, &seq).unwrap(), harsanyi_regret_with(&p, &par).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        let p = StrategyProfile::constant(3, int(1), int(1), int(1)).unwrap();
        assert!(matches!(harsanyi_regret(&p), Err(Error::CapExceeded { depth: 4, cap: 3, .. })));
        let m = parity_violation_mass(&p).unwrap();
        assert!(!m.is_exact());
        let opts = RegretOptions { cap: 5, ..Default::default() };
        assert!(matches!(harsanyi_regret_with(&p, &opts), Err(Error::InvalidArgument(_))));
    }
}
