//! Empirical re-collision / equalization profiles, collision-count moments,
//! per-family theoretical beta(m) bounds, and the prefix sums B(t) that
//! govern estimator variance.
//!
//! Empirical profiles reuse one trajectory (pair) per trial for every m, so
//! entries are correlated across m within a trial; the reported standard
//! errors are the per-m binomial ones and assertions are made per m only.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle;
use crate::rng::stream;
use crate::topology::{NodeId, Topology};

/// Minimum trial count for moment estimation; higher central moments are
/// noise below this.
pub const MOMENT_MIN_TRIALS: u64 = 10_000;

/// Where a [`BetaProfile`]'s entries came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSource {
    Empirical,
    Oracle,
    Theoretical,
}

/// Re-collision (or equalization) probabilities for m = 0..=m_max.
#[derive(Debug, Clone)]
pub struct BetaProfile {
    values: Vec<f64>,
    std_errors: Vec<f64>,
    trials: u64,
    source: ProfileSource,
}

impl BetaProfile {
    pub fn m_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn value(&self, m: u64) -> f64 {
        self.values[m as usize]
    }

    pub fn std_error(&self, m: u64) -> f64 {
        self.std_errors[m as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }
}

/// Central-moment estimate of a collision or visit count.
///
/// `order` 1 reports the raw mean; orders >= 2 are central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub order: u32,
    pub value: f64,
    pub trials: u64,
    pub rounds: u64,
    pub nodes: u64,
}

fn profile_from_counts(counts: Vec<u64>, trials: u64, source: ProfileSource) -> BetaProfile {
    let values: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let std_errors = values
        .iter()
        .map(|&p| (p * (1.0 - p) / trials as f64).sqrt())
        .collect();
    BetaProfile {
        values,
        std_errors,
        trials,
        source,
    }
}

fn empirical_profile(
    topology: &Topology,
    start: Option<NodeId>,
    m_max: u64,
    trials: u64,
    seed: u64,
    pair: bool,
) -> Result<BetaProfile> {
    if trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    if let Some(s) = start {
        if s >= topology.nodes() {
            return Err(Error::NodeOutOfRange {
                id: s,
                nodes: topology.nodes(),
            });
        }
    }
    let len = m_max as usize + 1;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut acc, trial| {
                let mut rng = stream(seed, trial);
                let origin = match start {
                    Some(s) => s,
                    None => rng.random_range(0..topology.nodes()),
                };
                acc[0] += 1;
                if pair {
                    let mut a = origin;
                    let mut b = origin;
                    for m in 1..=m_max {
                        a = topology.random_step_unchecked(a, &mut rng);
                        b = topology.random_step_unchecked(b, &mut rng);
                        if a == b {
                            acc[m as usize] += 1;
                        }
                    }
                } else {
                    let mut a = origin;
                    for m in 1..=m_max {
                        a = topology.random_step_unchecked(a, &mut rng);
                        if a == origin {
                            acc[m as usize] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += y;
                }
                a
            },
        );
    Ok(profile_from_counts(counts, trials, ProfileSource::Empirical))
}

/// Monte Carlo re-collision profile: each trial places two walkers at a
/// common uniformly random node and records their co-location indicator at
/// every m <= m_max. Valid as the conditional re-collision law on
/// vertex-transitive families; use [`empirical_beta_profile_from`] to pin
/// the start node on other regular graphs.
pub fn empirical_beta_profile(
    topology: &Topology,
    m_max: u64,
    trials: u64,
    seed: u64,
) -> Result<BetaProfile> {
    empirical_profile(topology, None, m_max, trials, seed, true)
}

/// [`empirical_beta_profile`] with a fixed common start node.
pub fn empirical_beta_profile_from(
    topology: &Topology,
    start: NodeId,
    m_max: u64,
    trials: u64,
    seed: u64,
) -> Result<BetaProfile> {
    empirical_profile(topology, Some(start), m_max, trials, seed, true)
}

/// Monte Carlo equalization profile: a single walk from a uniformly random
/// start, indicator of being back at the start after m steps.
pub fn empirical_equalization_profile(
    topology: &Topology,
    m_max: u64,
    trials: u64,
    seed: u64,
) -> Result<BetaProfile> {
    empirical_profile(topology, None, m_max, trials, seed, false)
}

/// Exact re-collision profile from the oracle (start node pinned; identical
/// for every start on vertex-transitive families).
pub fn oracle_beta_profile(topology: &Topology, start: NodeId, m_max: u64) -> Result<BetaProfile> {
    let values = oracle::recollision_profile(topology, start, m_max)?;
    let std_errors = vec![0.0; values.len()];
    Ok(BetaProfile {
        values,
        std_errors,
        trials: 0,
        source: ProfileSource::Oracle,
    })
}

/// Exact equalization profile from the oracle.
pub fn oracle_equalization_profile(
    topology: &Topology,
    start: NodeId,
    m_max: u64,
) -> Result<BetaProfile> {
    let values = oracle::equalization_profile(topology, start, m_max)?;
    let std_errors = vec![0.0; values.len()];
    Ok(BetaProfile {
        values,
        std_errors,
        trials: 0,
        source: ProfileSource::Oracle,
    })
}

/// A family whose re-collision bound has a closed leading form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoreticalFamily {
    /// 1/(m+1) + 1/A.
    Torus2d { nodes: u64 },
    /// 1/sqrt(m+1) + 1/A.
    Ring { nodes: u64 },
    /// (m+1)^(-k/2) + 1/A.
    TorusKd { dims: u32, nodes: u64 },
    /// lambda^m + 2/A.
    Expander { lambda: f64, nodes: u64 },
    /// 0.7^m + 1/sqrt(A).
    Hypercube { nodes: u64 },
}

/// The bound's leading functional form with its additive term. Constants in
/// front of the leading terms are fixed to 1; consumers make slope/shape
/// checks only, never absolute-value checks.
pub fn theoretical_beta(family: &TheoreticalFamily, m: u64) -> Result<f64> {
    let mf = m as f64;
    Ok(match *family {
        TheoreticalFamily::Torus2d { nodes } => 1.0 / (mf + 1.0) + 1.0 / nodes as f64,
        TheoreticalFamily::Ring { nodes } => 1.0 / (mf + 1.0).sqrt() + 1.0 / nodes as f64,
        TheoreticalFamily::TorusKd { dims, nodes } => {
            if dims == 0 {
                return Err(Error::param("dims", "must be >= 1"));
            }
            (mf + 1.0).powf(-(dims as f64) / 2.0) + 1.0 / nodes as f64
        }
        TheoreticalFamily::Expander { lambda, nodes } => {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::param("lambda", "must lie in [0, 1]"));
            }
            lambda.powf(mf) + 2.0 / nodes as f64
        }
        TheoreticalFamily::Hypercube { nodes } => {
            0.7f64.powf(mf) + 1.0 / (nodes as f64).sqrt()
        }
    })
}

/// Theoretical bound rendered as a profile for B(t) sums and CSV output.
pub fn theoretical_profile(family: &TheoreticalFamily, m_max: u64) -> Result<BetaProfile> {
    let values: Result<Vec<f64>> = (0..=m_max).map(|m| theoretical_beta(family, m)).collect();
    let values = values?;
    let std_errors = vec![0.0; values.len()];
    Ok(BetaProfile {
        values,
        std_errors,
        trials: 0,
        source: ProfileSource::Theoretical,
    })
}

/// B(t): prefix sum of the profile through m = t.
pub fn big_b(profile: &BetaProfile, t: u64) -> Result<f64> {
    if t > profile.m_max() {
        return Err(Error::RangeViolation {
            index: t,
            max: profile.m_max(),
        });
    }
    Ok(profile.values[..=t as usize].iter().sum())
}

struct MomentSums {
    s1: u128,
    s2: u128,
    s3: u128,
    s4: u128,
}

impl MomentSums {
    fn zero() -> Self {
        MomentSums {
            s1: 0,
            s2: 0,
            s3: 0,
            s4: 0,
        }
    }

    fn add(&mut self, c: u64) {
        let c = c as u128;
        self.s1 += c;
        self.s2 += c * c;
        self.s3 += c * c * c;
        self.s4 += c * c * c * c;
    }

    fn merge(mut self, other: MomentSums) -> Self {
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
        self
    }

    fn reports(&self, max_order: u32, trials: u64, rounds: u64, nodes: u64) -> Vec<MomentReport> {
        let n = trials as f64;
        let m1 = self.s1 as f64 / n;
        let r2 = self.s2 as f64 / n;
        let r3 = self.s3 as f64 / n;
        let r4 = self.s4 as f64 / n;
        let central = [
            m1,
            r2 - m1 * m1,
            r3 - 3.0 * m1 * r2 + 2.0 * m1.powi(3),
            r4 - 4.0 * m1 * r3 + 6.0 * m1 * m1 * r2 - 3.0 * m1.powi(4),
        ];
        (1..=max_order)
            .map(|order| MomentReport {
                order,
                value: central[(order - 1) as usize],
                trials,
                rounds,
                nodes,
            })
            .collect()
    }
}

fn validate_moment_args(topology: &Topology, rounds: u64, max_order: u32, trials: u64) -> Result<()> {
    if topology.regular_degree().is_none() {
        let stats = topology.graph_stats();
        return Err(Error::IrregularGraph {
            min: stats.min_degree,
            max: stats.max_degree,
        });
    }
    if rounds == 0 || rounds > topology.nodes() {
        return Err(Error::param("rounds", "requires 1 <= t <= A"));
    }
    if !(1..=4).contains(&max_order) {
        return Err(Error::param("max_order", "orders 1..=4 supported"));
    }
    if trials < MOMENT_MIN_TRIALS {
        return Err(Error::param(
            "trials",
            format!("moment estimation needs >= {MOMENT_MIN_TRIALS} trials"),
        ));
    }
    Ok(())
}

/// Monte Carlo moments of the collision count between one tracked pair of
/// walks placed independently uniformly, over `rounds` synchronous rounds.
pub fn pair_collision_moments(
    topology: &Topology,
    rounds: u64,
    max_order: u32,
    trials: u64,
    seed: u64,
) -> Result<Vec<MomentReport>> {
    validate_moment_args(topology, rounds, max_order, trials)?;
    let sums = (0..trials)
        .into_par_iter()
        .fold(MomentSums::zero, |mut acc, trial| {
            let mut rng = stream(seed, trial);
            let mut a = rng.random_range(0..topology.nodes());
            let mut b = rng.random_range(0..topology.nodes());
            let mut c = 0u64;
            for _ in 0..rounds {
                a = topology.random_step_unchecked(a, &mut rng);
                b = topology.random_step_unchecked(b, &mut rng);
                if a == b {
                    c += 1;
                }
            }
            acc.add(c);
            acc
        })
        .reduce(MomentSums::zero, MomentSums::merge);
    Ok(sums.reports(max_order, trials, rounds, topology.nodes()))
}

/// Monte Carlo moments of the number of visits a single uniformly started
/// walk pays to a fixed tracked node.
pub fn visit_count_moments(
    topology: &Topology,
    tracked: NodeId,
    rounds: u64,
    max_order: u32,
    trials: u64,
    seed: u64,
) -> Result<Vec<MomentReport>> {
    validate_moment_args(topology, rounds, max_order, trials)?;
    if tracked >= topology.nodes() {
        return Err(Error::NodeOutOfRange {
            id: tracked,
            nodes: topology.nodes(),
        });
    }
    let sums = (0..trials)
        .into_par_iter()
        .fold(MomentSums::zero, |mut acc, trial| {
            let mut rng = stream(seed, trial);
            let mut a = rng.random_range(0..topology.nodes());
            let mut c = 0u64;
            for _ in 0..rounds {
                a = topology.random_step_unchecked(a, &mut rng);
                if a == tracked {
                    c += 1;
                }
            }
            acc.add(c);
            acc
        })
        .reduce(MomentSums::zero, MomentSums::merge);
    Ok(sums.reports(max_order, trials, rounds, topology.nodes()))
}

/// Least-squares slope of ln(values[m]) against ln(m+1) over `m_lo..=m_hi`.
pub fn log_log_slope(values: &[f64], m_lo: u64, m_hi: u64) -> Result<f64> {
    if m_lo >= m_hi || m_hi as usize >= values.len() {
        return Err(Error::param("range", "need m_lo < m_hi <= m_max"));
    }
    let points: Vec<(f64, f64)> = (m_lo..=m_hi)
        .map(|m| {
            let v = values[m as usize];
            if v <= 0.0 {
                return Err(Error::param(
                    "values",
                    format!("non-positive entry at m={m} cannot be log-fitted"),
                ));
            }
            Ok((((m + 1) as f64).ln(), v.ln()))
        })
        .collect::<Result<_>>()?;
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Ok(sxy / sxx)
}
