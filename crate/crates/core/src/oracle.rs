//! Brute-force ground truth on small graphs: exact walk distributions via
//! repeated application of the transition operator, exact re-collision and
//! equalization probabilities, the degree-weighted collision bound beta(m),
//! and total-variation distance to stationarity.
//!
//! Everything here is a pure function of an immutable [`Topology`]; exactness
//! is limited only by f64 rounding (no eigendecompositions involved).

use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Largest node count accepted by the exact oracle.
pub const ORACLE_SIZE_GUARD: u64 = 4096;

/// Exact single-walk law over nodes after a fixed number of steps.
#[derive(Debug, Clone)]
pub struct DistributionVector {
    probabilities: Vec<f64>,
    step: u64,
}

impl DistributionVector {
    /// Validates the probability-vector invariants: entries >= 0 and total
    /// mass 1 within 1e-12.
    pub fn new(probabilities: Vec<f64>, step: u64) -> Result<DistributionVector> {
        if probabilities.iter().any(|&p| p < 0.0) {
            return Err(Error::param("probabilities", "negative entry"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "probabilities",
                format!("mass sums to {total}, not 1"),
            ));
        }
        Ok(DistributionVector {
            probabilities,
            step,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Sum of squared entries: the co-location probability of two independent
    /// walks that share this law.
    pub fn squared_mass(&self) -> f64 {
        self.probabilities.iter().map(|p| p * p).sum()
    }
}

fn check_guard(topology: &Topology) -> Result<()> {
    if topology.nodes() > ORACLE_SIZE_GUARD {
        return Err(Error::SizeGuard {
            nodes: topology.nodes(),
            guard: ORACLE_SIZE_GUARD,
        });
    }
    Ok(())
}

/// Applies one step of the walk: next[j] = sum over i ~ j of cur[i]/deg(i).
fn apply_step(topology: &Topology, cur: &[f64], next: &mut [f64], lazy: bool) {
    next.iter_mut().for_each(|x| *x = 0.0);
    let mut nbrs = Vec::new();
    for i in 0..topology.nodes() {
        let p = cur[i as usize];
        if p == 0.0 {
            continue;
        }
        topology.neighbors_into(i, &mut nbrs);
        let share = if lazy {
            next[i as usize] += 0.5 * p;
            0.5 * p / nbrs.len() as f64
        } else {
            p / nbrs.len() as f64
        };
        for &j in &nbrs {
            next[j as usize] += share;
        }
    }
}

fn distribution_after(topology: &Topology, start: NodeId, steps: u64, lazy: bool) -> Result<Vec<f64>> {
    check_guard(topology)?;
    if start >= topology.nodes() {
        return Err(Error::NodeOutOfRange {
            id: start,
            nodes: topology.nodes(),
        });
    }
    let n = topology.nodes() as usize;
    let mut cur = vec![0.0; n];
    cur[start as usize] = 1.0;
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        apply_step(topology, &cur, &mut next, lazy);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Exact m-step law of a single walk started at `start`.
pub fn step_distribution(topology: &Topology, start: NodeId, steps: u64) -> Result<DistributionVector> {
    DistributionVector::new(distribution_after(topology, start, steps, false)?, steps)
}

/// Exact m-step law of the lazy walk (hold with probability 1/2).
pub fn step_distribution_lazy(
    topology: &Topology,
    start: NodeId,
    steps: u64,
) -> Result<DistributionVector> {
    DistributionVector::new(distribution_after(topology, start, steps, true)?, steps)
}

/// Probability that two independent walks co-located at `start` are
/// co-located again after each walks `steps` more rounds.
pub fn exact_recollision(topology: &Topology, start: NodeId, steps: u64) -> Result<f64> {
    Ok(step_distribution(topology, start, steps)?.squared_mass())
}

/// Probability that a single walk at `start` is back at `start` after `steps`.
pub fn exact_equalization(topology: &Topology, start: NodeId, steps: u64) -> Result<f64> {
    Ok(step_distribution(topology, start, steps)?.probabilities()[start as usize])
}

/// Re-collision probabilities for every m in `0..=m_max` in one pass.
pub fn recollision_profile(topology: &Topology, start: NodeId, m_max: u64) -> Result<Vec<f64>> {
    profile_impl(topology, start, m_max, |dist, _| {
        dist.iter().map(|p| p * p).sum()
    })
}

/// Equalization probabilities for every m in `0..=m_max` in one pass.
pub fn equalization_profile(topology: &Topology, start: NodeId, m_max: u64) -> Result<Vec<f64>> {
    profile_impl(topology, start, m_max, |dist, start| dist[start as usize])
}

fn profile_impl(
    topology: &Topology,
    start: NodeId,
    m_max: u64,
    statistic: impl Fn(&[f64], NodeId) -> f64,
) -> Result<Vec<f64>> {
    check_guard(topology)?;
    if start >= topology.nodes() {
        return Err(Error::NodeOutOfRange {
            id: start,
            nodes: topology.nodes(),
        });
    }
    let n = topology.nodes() as usize;
    let mut cur = vec![0.0; n];
    cur[start as usize] = 1.0;
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(m_max as usize + 1);
    out.push(statistic(&cur, start));
    for _ in 0..m_max {
        apply_step(topology, &cur, &mut next, false);
        std::mem::swap(&mut cur, &mut next);
        out.push(statistic(&cur, start));
    }
    Ok(out)
}

/// Independent route to the re-collision probability on regular graphs:
/// ||W^m e_i||^2 computed by gathering averages over neighborhoods. Equals
/// [`exact_recollision`] for regular graphs; used as a cross-check.
pub fn recollision_via_walk_matrix(
    topology: &Topology,
    start: NodeId,
    steps: u64,
) -> Result<f64> {
    check_guard(topology)?;
    let Some(k) = topology.regular_degree() else {
        let stats = topology.graph_stats();
        return Err(Error::IrregularGraph {
            min: stats.min_degree,
            max: stats.max_degree,
        });
    };
    if start >= topology.nodes() {
        return Err(Error::NodeOutOfRange {
            id: start,
            nodes: topology.nodes(),
        });
    }
    let n = topology.nodes() as usize;
    let inv_k = 1.0 / k as f64;
    let mut cur = vec![0.0; n];
    cur[start as usize] = 1.0;
    let mut next = vec![0.0; n];
    let mut nbrs = Vec::new();
    for _ in 0..steps {
        for j in 0..topology.nodes() {
            topology.neighbors_into(j, &mut nbrs);
            next[j as usize] = nbrs.iter().map(|&i| cur[i as usize]).sum::<f64>() * inv_k;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur.iter().map(|p| p * p).sum())
}

/// The degree-weighted collision bound: max over (i, j) of p(i, j, m)/deg(j).
///
/// O(A * m * |E|); intended for graphs well under the size guard.
pub fn degree_weighted_beta(topology: &Topology, steps: u64) -> Result<f64> {
    check_guard(topology)?;
    let mut best = 0.0f64;
    for i in 0..topology.nodes() {
        let dist = distribution_after(topology, i, steps, false)?;
        for (j, &p) in dist.iter().enumerate() {
            let weighted = p / topology.degree_unchecked(j as NodeId) as f64;
            if weighted > best {
                best = weighted;
            }
        }
    }
    Ok(best)
}

/// [`degree_weighted_beta`] for every m in `0..=m_max`, sharing the walk
/// distributions across m (one pass per start node).
pub fn degree_weighted_beta_profile(topology: &Topology, m_max: u64) -> Result<Vec<f64>> {
    check_guard(topology)?;
    let n = topology.nodes() as usize;
    let mut maxima = vec![0.0f64; m_max as usize + 1];
    let mut cur = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    for start in 0..topology.nodes() {
        cur.iter_mut().for_each(|x| *x = 0.0);
        cur[start as usize] = 1.0;
        for m in 0..=m_max {
            if m > 0 {
                apply_step(topology, &cur, &mut next, false);
                std::mem::swap(&mut cur, &mut next);
            }
            let slot = &mut maxima[m as usize];
            for (j, &p) in cur.iter().enumerate() {
                let weighted = p / topology.degree_unchecked(j as NodeId) as f64;
                if weighted > *slot {
                    *slot = weighted;
                }
            }
        }
    }
    Ok(maxima)
}

/// Total-variation distance (half the 1-norm; the 1-norm used in mixing-time
/// statements is exactly twice this value) between the m-step law from
/// `start` and the degree-proportional stationary law.
pub fn tv_to_stationary(topology: &Topology, start: NodeId, steps: u64) -> Result<f64> {
    tv_impl(topology, start, steps, false)
}

/// Lazy-walk variant of [`tv_to_stationary`].
pub fn tv_to_stationary_lazy(topology: &Topology, start: NodeId, steps: u64) -> Result<f64> {
    tv_impl(topology, start, steps, true)
}

fn tv_impl(topology: &Topology, start: NodeId, steps: u64, lazy: bool) -> Result<f64> {
    let dist = distribution_after(topology, start, steps, lazy)?;
    let degree_sum = 2.0 * topology.edges() as f64;
    let tv = dist
        .iter()
        .enumerate()
        .map(|(v, &p)| (p - topology.degree_unchecked(v as NodeId) as f64 / degree_sum).abs())
        .sum::<f64>()
        / 2.0;
    Ok(tv)
}
