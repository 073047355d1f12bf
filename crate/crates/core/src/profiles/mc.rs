//! Monte Carlo regret estimates for profiles too deep to enumerate.
//!
//! Sample `i` draws its cylinder from `ChaCha8(seed)` on stream `i`, and the
//! per-sample values are reduced in index order, so an estimate depends only
//! on `(profile, samples, seed)` and not on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{classify_f64, parity_holds, MixClass, StrategyProfile};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::payoffs::{self, RedPlayer};
use crate::rational::to_f64;
use crate::semigroup::{sample_cylinder_with, Generator, MAX_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRegretReport {
    pub depth: u32,
    pub samples: u64,
    pub seed: u64,
    pub g0: Estimate,
    pub r1: Estimate,
    pub r2: Estimate,
    pub parity_violation_mass: Estimate,
    pub mixing_mass: Estimate,
}

pub fn mc_regret(profile: &StrategyProfile, samples: u64, seed: u64) -> Result<McRegretReport> {
    mc_regret_with(profile, samples, seed, Execution::default())
}

pub fn mc_regret_with(
    profile: &StrategyProfile,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<McRegretReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let n = profile.depth();
    if n + 1 > MAX_DEPTH {
        return Err(Error::Overflow { what: format!("cylinder depth {}", n + 1) });
    }
    let g: Vec<f64> = profile.sigma_g().iter().map(to_f64).collect();
    let r1: Vec<f64> = profile.sigma_r1().iter().map(to_f64).collect();
    let r2: Vec<f64> = profile.sigma_r2().iter().map(to_f64).collect();
    let classes: Vec<MixClass> = g.iter().map(|&p| classify_f64(p)).collect();

    let rows = exec.map_range(0..samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let t = sample_cylinder_with(n + 1, &mut rng).expect("depth checked");
        let e = t.e_label();
        let own = t.truncate(n).expect("n < n + 1").code() as usize;
        let c1 = t.shift(Generator::T1).expect("depth >= 1").code() as usize;
        let c2 = t.shift(Generator::T2).expect("depth >= 1").code() as usize;
        let parity = parity_holds(classes[own], classes[c1], classes[c2], e);
        [
            payoffs::gain_g(e, &g[own], &r1[c1], &r2[c2]),
            payoffs::gain_r(RedPlayer::R1, e, &g[own], &r1[own]),
            payoffs::gain_r(RedPlayer::R2, e, &g[own], &r2[own]),
            if parity { 0.0 } else { 1.0 },
            if classes[own] == MixClass::AM { 1.0 } else { 0.0 },
        ]
    });

    let column = |k: usize| estimate(rows.iter().map(|row| row[k]), samples);
    Ok(McRegretReport {
        depth: n,
        samples,
        seed,
        g0: column(0),
        r1: column(1),
        r2: column(2),
        parity_violation_mass: column(3),
        mixing_mass: column(4),
    })
}

fn estimate(values: impl Iterator<Item = f64> + Clone, samples: u64) -> Estimate {
    let m = samples as f64;
    let mean = values.clone().sum::<f64>() / m;
    let std_error = if samples > 1 {
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        f64::NAN
    };
    Estimate { mean, std_error }
}
