//! Galton-Watson and strong-ties branching processes.
//!
//! In the strong-ties tree a node is a married couple. Its children are the
//! couples formed by the married siblings of the spouse who joined the tree
//! at that node, so the offspring law depends only on the family-size
//! distribution `F` and the marriage ratio `alpha`. The root couple has two
//! such spouses and draws twice.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{ChildCountDist, DistError, MarriageRatio, NORMALIZATION_TOLERANCE};
use crate::rng;
use crate::sampling::CumulativeSampler;

/// |mu - 1| at or below this is classified as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;
/// Absolute step size at which fixed-point iteration stops.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 1_000_000;

/// Levels wider than this are drawn as one multinomial count vector
/// instead of one inverse-CDF draw per node.
const AGGREGATE_LEVEL_THRESHOLD: u64 = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchingError {
    #[error("fixed-point iteration did not converge within {iterations} steps (last value {last})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error("invalid offspring distribution: {0}")]
    InvalidDistribution(#[from] DistError),
    #[error("caps must be at least 1")]
    InvalidCaps,
    #[error("run count must be at least 1")]
    NoRuns,
}

/// Offspring distribution of a non-root node in the strong-ties tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedChildDist {
    a: Vec<f64>,
    mu: f64,
    residual_folded: f64,
}

impl DerivedChildDist {
    /// Use `a` directly as the offspring law of a plain Galton-Watson
    /// process.
    pub fn from_offspring(a: &[f64]) -> Result<Self, BranchingError> {
        let dist = ChildCountDist::new(a.to_vec())?;
        let a = dist.weights().to_vec();
        Ok(Self {
            mu: weighted_mean(&a),
            a,
            residual_folded: 0.0,
        })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Mass added to `a[0]` so the vector sums to one.
    pub fn residual_folded(&self) -> f64 {
        self.residual_folded
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.a.get(j).copied().unwrap_or(0.0)
    }

    /// Probability generating function, evaluated by Horner's rule.
    pub fn pgf(&self, s: f64) -> f64 {
        self.a.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }
}

fn weighted_mean(a: &[f64]) -> f64 {
    a.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Offspring law `A` of a non-root strong-ties node.
///
/// `A_j = sum_{k > j} F_k C(k-1, j) alpha^j (1-alpha)^(k-1-j)`: the joining
/// spouse comes from a family of `k` children and exactly `j` of the other
/// `k - 1` siblings are married. These terms sum to `1 - F_0`; the deficit is
/// added to `A_0`, which leaves `mu` unchanged.
pub fn derive_child_dist(f: &ChildCountDist, alpha: MarriageRatio) -> DerivedChildDist {
    let alpha = alpha.value();
    let max_k = f.max_children();
    let len = max_k.max(1);
    let mut a = vec![0.0; len];
    for (j, slot) in a.iter_mut().enumerate() {
        *slot = (j + 1..=max_k)
            .map(|k| {
                f.weight(k)
                    * binomial_coefficient(k - 1, j)
                    * alpha.powi(j as i32)
                    * (1.0 - alpha).powi((k - 1 - j) as i32)
            })
            .sum();
    }
    let mu = weighted_mean(&a);
    let residual_folded = (1.0 - a.iter().sum::<f64>()).max(0.0);
    a[0] += residual_folded;
    DerivedChildDist {
        a,
        mu,
        residual_folded,
    }
}

/// `mu = alpha * (mean(F) - 1 + F_0)`, the binomial mean of the married
/// sibling count summed over the spouse's family size.
pub fn mu_closed_form(f: &ChildCountDist, alpha: MarriageRatio) -> f64 {
    alpha.value() * (f.mean() - 1.0 + f.weight(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalityClass {
    Subcritical,
    Critical,
    Supercritical,
}

/// Regime of a branching process, decided by its mean offspring count.
///
/// Subcritical and critical processes die out almost surely; supercritical
/// ones survive forever with positive probability. `degenerate` marks the
/// deterministic chain `P[xi = 1] = 1`, which never dies and never grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criticality {
    pub class: CriticalityClass,
    pub mu: f64,
    pub degenerate: bool,
}

pub fn classify(dist: &DerivedChildDist) -> Criticality {
    let mu = dist.mu;
    if dist.prob(1) >= 1.0 - NORMALIZATION_TOLERANCE {
        return Criticality {
            class: CriticalityClass::Supercritical,
            mu,
            degenerate: true,
        };
    }
    let class = if (mu - 1.0).abs() <= CRITICAL_TOLERANCE {
        CriticalityClass::Critical
    } else if mu < 1.0 {
        CriticalityClass::Subcritical
    } else {
        CriticalityClass::Supercritical
    };
    Criticality {
        class,
        mu,
        degenerate: false,
    }
}

/// Smallest root of `s = pgf(s)` in `[0, 1]`, by iteration from `s = 0`.
pub fn extinction_probability(dist: &DerivedChildDist) -> Result<f64, BranchingError> {
    let crit = classify(dist);
    if !crit.degenerate && crit.class != CriticalityClass::Supercritical {
        return Ok(1.0);
    }
    let mut s = 0.0;
    for _ in 0..FIXED_POINT_MAX_ITERATIONS {
        let next = dist.pgf(s);
        if (next - s).abs() < FIXED_POINT_TOLERANCE {
            return Ok(next.clamp(0.0, 1.0));
        }
        s = next;
    }
    Err(BranchingError::NoConvergence {
        iterations: FIXED_POINT_MAX_ITERATIONS,
        last: s,
    })
}

/// Limits that stop a run which has not died out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Levels below the root.
    pub max_levels: usize,
    pub max_nodes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_levels: 500,
            max_nodes: 1_000_000,
        }
    }
}

impl Caps {
    pub fn new(max_levels: usize, max_nodes: u64) -> Result<Self, BranchingError> {
        if max_levels == 0 || max_nodes == 0 {
            return Err(BranchingError::InvalidCaps);
        }
        Ok(Self {
            max_levels,
            max_nodes,
        })
    }
}

/// One realized tree, summarized by its level sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingOutcome {
    pub z: Vec<u64>,
    pub extinct: bool,
    pub total_nodes: u64,
    pub truncated: bool,
}

struct LevelSampler<'a> {
    weights: &'a [f64],
    tail_mass: Vec<f64>,
    per_node: CumulativeSampler,
    last_positive: usize,
}

impl<'a> LevelSampler<'a> {
    fn new(dist: &'a DerivedChildDist) -> Self {
        let weights = dist.a.as_slice();
        let mut tail_mass = vec![0.0; weights.len()];
        let mut acc = 0.0;
        for j in (0..weights.len()).rev() {
            acc += weights[j];
            tail_mass[j] = acc;
        }
        Self {
            weights,
            tail_mass,
            per_node: CumulativeSampler::new(weights),
            last_positive: weights.iter().rposition(|&w| w > 0.0).unwrap_or(0),
        }
    }

    fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.per_node.sample(rng) as u64
    }

    /// Total offspring of `parents` independent nodes.
    fn draw_level<R: Rng + ?Sized>(&self, parents: u64, rng: &mut R) -> u64 {
        if parents <= AGGREGATE_LEVEL_THRESHOLD {
            return (0..parents).map(|_| self.draw_one(rng)).sum();
        }
        // sequential conditional binomials give the multinomial counts
        let mut remaining = parents;
        let mut total = 0u64;
        for (j, &w) in self.weights.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let count = if j == self.last_positive {
                remaining
            } else {
                let p = (w / self.tail_mass[j]).clamp(0.0, 1.0);
                Binomial::new(remaining, p)
                    .expect("probability clamped to [0, 1]")
                    .sample(rng)
            };
            total += j as u64 * count;
            remaining -= count;
        }
        total
    }
}

fn grow<R: Rng + ?Sized>(
    sampler: &LevelSampler<'_>,
    root_draws: u64,
    rng: &mut R,
    caps: Caps,
) -> BranchingOutcome {
    let mut z = vec![1u64];
    let mut total = 1u64;
    let mut extinct = false;
    let mut truncated = false;
    let first = (0..root_draws).map(|_| sampler.draw_one(rng)).sum();
    let mut current = first;
    loop {
        z.push(current);
        total += current;
        if current == 0 {
            extinct = true;
            break;
        }
        if total > caps.max_nodes || z.len() > caps.max_levels {
            truncated = true;
            break;
        }
        current = sampler.draw_level(current, rng);
    }
    BranchingOutcome {
        z,
        extinct,
        total_nodes: total,
        truncated,
    }
}

/// Plain Galton-Watson run: every node, the root included, draws once.
pub fn simulate_gw<R: Rng + ?Sized>(
    dist: &DerivedChildDist,
    rng: &mut R,
    caps: Caps,
) -> BranchingOutcome {
    grow(&LevelSampler::new(dist), 1, rng, caps)
}

/// Strong-ties run: the root couple draws twice, every other node once.
pub fn simulate_strong_ties_tree<R: Rng + ?Sized>(
    f: &ChildCountDist,
    alpha: MarriageRatio,
    rng: &mut R,
    caps: Caps,
) -> BranchingOutcome {
    let dist = derive_child_dist(f, alpha);
    grow(&LevelSampler::new(&dist), 2, rng, caps)
}

/// Which process an ensemble simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    GaltonWatson,
    StrongTies,
}

impl ProcessKind {
    fn root_draws(self) -> u64 {
        match self {
            ProcessKind::GaltonWatson => 1,
            ProcessKind::StrongTies => 2,
        }
    }
}

/// Aggregate of many seeded runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub process: ProcessKind,
    pub runs: u64,
    pub seed: u64,
    pub caps: Caps,
    pub extinct: u64,
    pub truncated: u64,
    /// Fraction of runs that hit a cap without dying out.
    pub survival_frequency: f64,
    pub extinction_frequency: f64,
    /// Mean `Z_t` for `t = 0..mean_z.len()`, over runs whose level `t` is
    /// known (recorded, or zero after extinction).
    pub mean_z: Vec<f64>,
    pub mean_z_samples: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<Vec<u64>>>,
}

#[derive(Default, Clone)]
struct Tally {
    extinct: u64,
    truncated: u64,
    z_sum: Vec<u128>,
    z_count: Vec<u64>,
}

impl Tally {
    fn with_levels(levels: usize) -> Self {
        Self {
            z_sum: vec![0; levels],
            z_count: vec![0; levels],
            ..Self::default()
        }
    }

    fn add(mut self, outcome: &BranchingOutcome) -> Self {
        self.extinct += outcome.extinct as u64;
        self.truncated += outcome.truncated as u64;
        for t in 0..self.z_sum.len() {
            match outcome.z.get(t) {
                Some(&zt) => {
                    self.z_sum[t] += zt as u128;
                    self.z_count[t] += 1;
                }
                None if outcome.extinct => self.z_count[t] += 1,
                None => {}
            }
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.extinct += other.extinct;
        self.truncated += other.truncated;
        for t in 0..self.z_sum.len() {
            self.z_sum[t] += other.z_sum[t];
            self.z_count[t] += other.z_count[t];
        }
        self
    }
}

/// Run `runs` independent trees, run `i` on stream `(seed, i)`.
///
/// Counts are accumulated in integers, so the summary is identical for any
/// thread count.
pub fn run_ensemble(
    dist: &DerivedChildDist,
    process: ProcessKind,
    runs: u64,
    caps: Caps,
    seed: u64,
    report_levels: usize,
    keep_trajectories: bool,
) -> Result<EnsembleSummary, BranchingError> {
    if runs == 0 {
        return Err(BranchingError::NoRuns);
    }
    Caps::new(caps.max_levels, caps.max_nodes)?;
    let sampler = LevelSampler::new(dist);
    let simulate = |i: u64| {
        let mut rng = rng::stream(seed, i);
        grow(&sampler, process.root_draws(), &mut rng, caps)
    };
    let (tally, trajectories) = if keep_trajectories {
        let outcomes: Vec<BranchingOutcome> = (0..runs).into_par_iter().map(simulate).collect();
        let tally = outcomes
            .iter()
            .fold(Tally::with_levels(report_levels), Tally::add);
        (tally, Some(outcomes.into_iter().map(|o| o.z).collect()))
    } else {
        let tally = (0..runs)
            .into_par_iter()
            .fold(
                || Tally::with_levels(report_levels),
                |tally, i| tally.add(&simulate(i)),
            )
            .reduce(|| Tally::with_levels(report_levels), Tally::merge);
        (tally, None)
    };
    let mean_z = tally
        .z_sum
        .iter()
        .zip(&tally.z_count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s as f64 / c as f64 })
        .collect();
    Ok(EnsembleSummary {
        process,
        runs,
        seed,
        caps,
        extinct: tally.extinct,
        truncated: tally.truncated,
        survival_frequency: tally.truncated as f64 / runs as f64,
        extinction_frequency: tally.extinct as f64 / runs as f64,
        mean_z,
        mean_z_samples: tally.z_count,
        trajectories,
    })
}

/// Fraction of strong-ties runs that reach a cap without dying out, a
/// finite stand-in for the probability of an infinite component.
pub fn survival_frequency(
    f: &ChildCountDist,
    alpha: MarriageRatio,
    runs: u64,
    caps: Caps,
    seed: u64,
) -> Result<f64, BranchingError> {
    let dist = derive_child_dist(f, alpha);
    run_ensemble(&dist, ProcessKind::StrongTies, runs, caps, seed, 0, false)
        .map(|s| s.survival_frequency)
}
