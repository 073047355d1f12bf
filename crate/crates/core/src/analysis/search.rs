//! Minimum max-player Harsanyi regret over shallow measurable profiles.
//!
//! Floating point drives the search; every candidate that can win is
//! re-scored exactly and only exact comparisons decide the result.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::payoffs::{self, RedPlayer};
use crate::profiles::{eta_stats, harsanyi_regret_with, ProfileFile, RegretOptions, RegretReport, StrategyProfile};
use crate::rational::{int, ratio, Rational};
use crate::report;
use crate::semigroup::{cylinder_count, Cylinder, Generator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub depth: u32,
    /// Grid points per coordinate (`K`); spacing is `1/(K-1)`.
    pub grid: u32,
    /// Halvings of the coordinate step during local refinement.
    pub refinement_rounds: u32,
    /// Random grid starts for depth 1.
    pub restarts: u32,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { depth: 0, grid: 21, refinement_rounds: 0, restarts: 16, seed: 0, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredProfile {
    pub profile: ProfileFile,
    pub report: RegretReport,
    #[serde(serialize_with = "report::exact")]
    pub max_regret: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub depth: u32,
    pub grid: u32,
    pub refinement_rounds: u32,
    pub restarts: u32,
    pub seed: u64,
    pub best: ScoredProfile,
    /// Exhaustive scan of the 64 pure depth-0 profiles (depth 0 only).
    pub pure_corner_best: Option<ScoredProfile>,
    /// Profiles scored in floating point.
    pub evaluated: u64,
    /// Depth 1 results come from local search and are evidence, not proof.
    pub exhaustive_grid: bool,
}

/// Flat parameter vector `[g..., r1..., r2...]`, each table by cylinder code.
fn profile_from(depth: u32, x: &[Rational]) -> StrategyProfile {
    let n = x.len() / 3;
    StrategyProfile::new(depth, x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n..].to_vec())
        .expect("search keeps coordinates in [0,1]")
}

fn score(depth: u32, x: &[Rational]) -> ScoredProfile {
    let profile = profile_from(depth, x);
    let opts = RegretOptions { exec: Execution::Sequential, ..RegretOptions::default() };
    let report = harsanyi_regret_with(&profile, &opts).expect("depth <= 1 is within the cap");
    let max_regret = report.max_harsanyi().clone();
    ScoredProfile { profile: ProfileFile::from(&profile), report, max_regret }
}

/// Floating-point max regret of a depth-`n` parameter vector.
struct FloatModel {
    count: usize,
    /// `(e, own, T1 image, T2 image)` for every depth-`(n+1)` cylinder.
    twins: Vec<(u8, usize, usize, usize)>,
}

impl FloatModel {
    fn new(depth: u32) -> FloatModel {
        let count = cylinder_count(depth).expect("depth <= 1") as usize;
        let next = cylinder_count(depth + 1).expect("depth <= 1");
        let twins = (0..next)
            .map(|code| {
                let t = Cylinder::new(depth + 1, code).expect("code in range");
                (
                    t.e_label(),
                    t.truncate(depth).unwrap().code() as usize,
                    t.shift(Generator::T1).unwrap().code() as usize,
                    t.shift(Generator::T2).unwrap().code() as usize,
                )
            })
            .collect();
        FloatModel { count, twins }
    }

    fn max_regret(&self, x: &[f64]) -> f64 {
        let n = self.count;
        let (g, r1, r2) = (&x[..n], &x[n..2 * n], &x[2 * n..]);
        let gg: f64 = self.twins.iter().map(|&(e, k, a, b)| payoffs::gain_g(e, &g[k], &r1[a], &r2[b])).sum::<f64>()
            / self.twins.len() as f64;
        let red = |player, r: &[f64]| {
            (0..n).map(|k| payoffs::gain_r(player, (k & 1) as u8, &g[k], &r[k])).sum::<f64>() / n as f64
        };
        gg.max(red(RedPlayer::R1, r1)).max(red(RedPlayer::R2, r2))
    }
}

pub fn min_regret_search(opts: &SearchOptions) -> Result<SearchResult> {
    if opts.grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points per coordinate".into()));
    }
    if opts.grid > 1001 {
        return Err(Error::ResourceLimit(format!("grid {} above 1001 points per coordinate", opts.grid)));
    }
    match opts.depth {
        0 => search_depth0(opts),
        1 => search_depth1(opts),
        d => Err(Error::InvalidArgument(format!("search supports depth 0 or 1, not {d}"))),
    }
}

fn grid_value(k: u32, grid: u32) -> Rational {
    ratio(i64::from(k), i64::from(grid - 1))
}

/// Exhaustive scan of the 64 pure depth-0 profiles; ties keep the first in
/// lexicographic order of the parameter vector.
pub fn pure_corner_scan() -> ScoredProfile {
    (0..64u32)
        .map(|bits| {
            let x: Vec<Rational> = (0..6).map(|k| int(i64::from((bits >> (5 - k)) & 1))).collect();
            score(0, &x)
        })
        .reduce(|best, s| if s.max_regret < best.max_regret { s } else { best })
        .expect("64 profiles")
}

fn search_depth0(opts: &SearchOptions) -> Result<SearchResult> {
    let k = opts.grid as u64;
    let total = k.pow(6);
    if total > 2_000_000_000 {
        return Err(Error::ResourceLimit(format!("{total} grid points at depth 0")));
    }
    let model = FloatModel::new(0);
    let values: Vec<f64> = (0..opts.grid).map(|i| f64::from(i) / f64::from(opts.grid - 1)).collect();
    // chunks fix the two leading coordinates; each returns its near-best indices
    let chunks = opts.exec.map_range(0..k * k, |chunk| {
        let mut best = f64::INFINITY;
        let mut near: Vec<(f64, u64)> = Vec::new();
        let mut x = [values[(chunk / k) as usize], values[(chunk % k) as usize], 0.0, 0.0, 0.0, 0.0];
        for rest in 0..k.pow(4) {
            let mut r = rest;
            for slot in (2..6).rev() {
                x[slot] = values[(r % k) as usize];
                r /= k;
            }
            let v = model.max_regret(&x);
            if v < best - 1e-9 {
                best = v;
                near.retain(|(w, _)| *w <= best + 1e-9);
            }
            if v <= best + 1e-9 {
                near.push((v, chunk * k.pow(4) + rest));
            }
        }
        near
    });
    let global = chunks.iter().flatten().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    let candidates: Vec<u64> =
        chunks.into_iter().flatten().filter(|(v, _)| *v <= global + 1e-9).map(|(_, i)| i).collect();
    let decode = |index: u64| -> Vec<u32> {
        let mut r = index;
        let mut digits = vec![0u32; 6];
        for slot in (0..6).rev() {
            digits[slot] = (r % k) as u32;
            r /= k;
        }
        digits
    };
    let mut best: Option<(Vec<Rational>, ScoredProfile)> = None;
    for index in candidates {
        let x: Vec<Rational> = decode(index).into_iter().map(|d| grid_value(d, opts.grid)).collect();
        let s = score(0, &x);
        if best.as_ref().is_none_or(|(bx, b)| s.max_regret < b.max_regret || (s.max_regret == b.max_regret && x < *bx)) {
            best = Some((x, s));
        }
    }
    let (x, scored) = best.expect("grid is non-empty");
    let (_, scored) = refine(0, x, scored, opts.grid, opts.refinement_rounds);
    Ok(SearchResult {
        depth: 0,
        grid: opts.grid,
        refinement_rounds: opts.refinement_rounds,
        restarts: 0,
        seed: opts.seed,
        best: scored,
        pure_corner_best: Some(pure_corner_scan()),
        evaluated: total,
        exhaustive_grid: true,
    })
}

/// Exact coordinate descent: for each halving of the step, try moving each
/// coordinate up or down and keep strict exact improvements until none remain.
fn refine(depth: u32, mut x: Vec<Rational>, mut best: ScoredProfile, grid: u32, rounds: u32) -> (Vec<Rational>, ScoredProfile) {
    for round in 1..=rounds {
        let step = ratio(1, i64::from(grid - 1) << round);
        loop {
            let mut improved = false;
            for i in 0..x.len() {
                for delta in [-step.clone(), step.clone()] {
                    let v = &x[i] + &delta;
                    if v < Rational::zero() || v > int(1) {
                        continue;
                    }
                    let mut y = x.clone();
                    y[i] = v;
                    let s = score(depth, &y);
                    if s.max_regret < best.max_regret {
                        x = y;
                        best = s;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (x, best)
}

/// Float coordinate descent on the grid from `x`, then halved steps.
fn float_descent(model: &FloatModel, mut x: Vec<f64>, grid: u32, rounds: u32) -> Vec<f64> {
    let mut value = model.max_regret(&x);
    for round in 0..=rounds {
        let step = 1.0 / (f64::from(grid - 1) * f64::from(1u32 << round));
        loop {
            let mut improved = false;
            for i in 0..x.len() {
                for delta in [-step, step] {
                    let v = x[i] + delta;
                    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                        continue;
                    }
                    let old = x[i];
                    x[i] = v.clamp(0.0, 1.0);
                    let w = model.max_regret(&x);
                    if w < value - 1e-12 {
                        value = w;
                        improved = true;
                    } else {
                        x[i] = old;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    x
}

fn search_depth1(opts: &SearchOptions) -> Result<SearchResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("depth-1 search needs at least one restart".into()));
    }
    let model = FloatModel::new(1);
    let dims = 3 * model.count;
    let grid = opts.grid;
    let denom = 1i64 << opts.refinement_rounds;
    let starts = opts.exec.map_range(0..u64::from(opts.restarts), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i);
        let x: Vec<f64> = (0..dims).map(|_| f64::from(rng.random_range(0..grid)) / f64::from(grid - 1)).collect();
        let x = float_descent(&model, x, grid, opts.refinement_rounds);
        // descent moves on the lattice of step 1/((K-1) 2^rounds); snap back onto it
        let lattice = i64::from(grid - 1) * denom;
        let exact: Vec<Rational> =
            x.iter().map(|v| ratio((v * lattice as f64).round() as i64, lattice)).collect();
        let s = score(1, &exact);
        (exact, s)
    });
    let (_, best) = starts
        .into_iter()
        .reduce(|a, b| if b.1.max_regret < a.1.max_regret { b } else { a })
        .expect("at least one restart");
    Ok(SearchResult {
        depth: 1,
        grid,
        refinement_rounds: opts.refinement_rounds,
        restarts: opts.restarts,
        seed: opts.seed,
        best,
        pure_corner_best: None,
        evaluated: u64::from(opts.restarts),
        exhaustive_grid: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QCollapse {
    pub depth: u32,
    pub profiles_checked: u64,
    pub exhaustive: bool,
    /// Every checked pure profile has `q_depth = 0`.
    pub all_zero: bool,
}

/// `q_k` at the profile's own depth for pure depth-`k` profiles: all of
/// them when there are at most `2^16`, otherwise `samples` seeded draws.
pub fn pure_q_collapse(depth: u32, samples: u64, seed: u64) -> Result<QCollapse> {
    let count = cylinder_count(depth)?;
    let exhaustive = count <= 16;
    let total = if exhaustive { 1u64 << count } else { samples };
    let make = |bits: &dyn Fn(u64) -> bool| {
        StrategyProfile::from_fn(depth, |c| (int(i64::from(bits(c.code()))), int(1), int(1)))
    };
    let mut all_zero = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..total {
        let profile = if exhaustive {
            make(&|code| (i >> code) & 1 == 1)?
        } else {
            let words: Vec<u64> = (0..count.div_ceil(64)).map(|_| rng.random()).collect();
            make(&|code| (words[(code / 64) as usize] >> (code % 64)) & 1 == 1)?
        };
        let stats = eta_stats(&profile);
        if !stats.q(depth).is_some_and(Zero::is_zero) {
            all_zero = false;
        }
    }
    Ok(QCollapse { depth, profiles_checked: total, exhaustive, all_zero })
}
