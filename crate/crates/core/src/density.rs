//! Synchronous-round multi-agent simulator with exact collision semantics.
//!
//! One call to a `run_*` function executes a single trial. Trials are
//! identified by `(master seed, trial index)`; the RNG stream for trial `i`
//! is `rng::stream(config.seed, i)`, so independent trials can run in
//! parallel and still reproduce bit-for-bit.
//!
//! Within a trial the draw order is fixed and documented per algorithm:
//! placement draws in agent order (one `random_range(0..A)` per agent), then
//! any per-agent state/label draws in agent order, then one step draw per
//! agent per round in agent order. Collisions are evaluated once per round
//! at end-of-round positions; initial placement co-locations are never
//! counted.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::topology::{Family, NodeId, Topology};

/// Which estimation routine a [`SimConfig`] drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Random-walk encounter rates: d-tilde = c/t.
    EncounterRate,
    /// Stationary/walking split with mod-correction: d-tilde = 2(c mod t)/t.
    IndependentSampling,
    /// Encounter rates split by a boolean agent property.
    Frequency,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::EncounterRate => "encounter",
            Algorithm::IndependentSampling => "independent",
            Algorithm::Frequency => "frequency",
        }
    }
}

/// Parameters for one simulated experiment.
///
/// `other_agents` is the paper-facing n: the simulation places n + 1 agents
/// and the target density is d = n/A.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub topology: Topology,
    pub other_agents: u64,
    pub rounds: u64,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Bernoulli labeling fraction for frequency runs.
    pub label_fraction: Option<f64>,
}

impl SimConfig {
    /// Target density d = n/A.
    pub fn density(&self) -> f64 {
        self.other_agents as f64 / self.topology.nodes() as f64
    }

    fn validate_common(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::param("rounds", "must be >= 1"));
        }
        Ok(())
    }

    fn validate_independent(&self) -> Result<()> {
        self.validate_common()?;
        let Family::TorusKd { sides } = self.topology.family() else {
            return Err(Error::param(
                "topology",
                "independent sampling runs on a 2-D torus only",
            ));
        };
        if sides.len() != 2 {
            return Err(Error::param(
                "topology",
                "independent sampling runs on a 2-D torus only",
            ));
        }
        let t = self.rounds as u128;
        if t * t >= self.topology.nodes() as u128 {
            return Err(Error::param("rounds", "requires t < sqrt(A)"));
        }
        if self.other_agents > self.topology.nodes() {
            return Err(Error::param("agents", "requires density d <= 1"));
        }
        Ok(())
    }
}

/// One agent's collision count and density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    /// Collision count; for independent sampling this is already reduced
    /// mod t.
    pub collisions: u64,
    pub d_tilde: f64,
    pub algorithm: Algorithm,
}

/// One agent's paired totals from a frequency run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub collisions: u64,
    pub labeled_collisions: u64,
    pub d_tilde: f64,
    pub d_tilde_p: f64,
    /// d-tilde_P / d-tilde; absent when the agent saw no collisions at all.
    pub f_tilde_p: Option<f64>,
}

/// Per-agent count of other agents sharing its node.
pub fn occupancy_collisions(positions: &[NodeId]) -> Vec<u64> {
    let mut occupancy: HashMap<NodeId, u64> = HashMap::with_capacity(positions.len());
    for &p in positions {
        *occupancy.entry(p).or_insert(0) += 1;
    }
    positions.iter().map(|p| occupancy[p] - 1).collect()
}

struct Occupancy {
    map: HashMap<NodeId, u64>,
}

impl Occupancy {
    fn new(capacity: usize) -> Self {
        Occupancy {
            map: HashMap::with_capacity(capacity),
        }
    }

    fn tally(&mut self, positions: &[NodeId]) {
        self.map.clear();
        for &p in positions {
            *self.map.entry(p).or_insert(0) += 1;
        }
    }

    fn others_at(&self, p: NodeId) -> u64 {
        self.map[&p] - 1
    }
}

fn place_uniform(topology: &Topology, count: u64, rng: &mut impl rand::Rng) -> Vec<NodeId> {
    (0..count)
        .map(|_| rng.random_range(0..topology.nodes()))
        .collect()
}

/// Algorithm: every agent random-walks; each round it adds the number of
/// other agents at its end-of-round node; the estimate is c/t.
pub fn run_encounter_rate(config: &SimConfig, trial: u64) -> Result<Vec<DensityEstimate>> {
    config.validate_common()?;
    let mut rng = stream(config.seed, trial);
    let agents = config.other_agents + 1;
    let mut positions = place_uniform(&config.topology, agents, &mut rng);
    let mut counts = vec![0u64; agents as usize];
    let mut occupancy = Occupancy::new(agents as usize);
    for _ in 0..config.rounds {
        for p in positions.iter_mut() {
            *p = config.topology.random_step_unchecked(*p, &mut rng);
        }
        occupancy.tally(&positions);
        for (c, &p) in counts.iter_mut().zip(positions.iter()) {
            *c += occupancy.others_at(p);
        }
    }
    Ok(counts
        .into_iter()
        .map(|c| DensityEstimate {
            collisions: c,
            d_tilde: c as f64 / config.rounds as f64,
            algorithm: Algorithm::EncounterRate,
        })
        .collect())
}

/// Forced initial conditions for independent-sampling runs; test hook for
/// the lockstep and separation properties.
#[derive(Debug, Clone)]
pub struct IndependentInit {
    pub positions: Vec<NodeId>,
    pub walking: Vec<bool>,
}

/// Algorithm: agents split into walking/stationary halves by fair coin;
/// walking agents add the fixed step (0,1) (one cell along dimension 1)
/// each round; everyone accumulates count(position) each round; the final
/// count is reduced mod t and the estimate is 2(c mod t)/t.
pub fn run_independent_sampling(config: &SimConfig, trial: u64) -> Result<Vec<DensityEstimate>> {
    run_independent_inner(config, trial, None)
}

/// [`run_independent_sampling`] with forced placement and walking states.
pub fn run_independent_sampling_with(
    config: &SimConfig,
    trial: u64,
    init: IndependentInit,
) -> Result<Vec<DensityEstimate>> {
    run_independent_inner(config, trial, Some(init))
}

fn run_independent_inner(
    config: &SimConfig,
    trial: u64,
    init: Option<IndependentInit>,
) -> Result<Vec<DensityEstimate>> {
    config.validate_independent()?;
    let mut rng = stream(config.seed, trial);
    let agents = config.other_agents + 1;
    let (mut positions, walking) = match init {
        Some(init) => {
            if init.positions.len() as u64 != agents || init.walking.len() as u64 != agents {
                return Err(Error::param("init", "length must equal agent count"));
            }
            (init.positions, init.walking)
        }
        None => {
            let positions = place_uniform(&config.topology, agents, &mut rng);
            let walking = (0..agents).map(|_| rng.random_range(0..2u32) == 1).collect();
            (positions, walking)
        }
    };
    let mut counts = vec![0u64; agents as usize];
    let mut occupancy = Occupancy::new(agents as usize);
    for _ in 0..config.rounds {
        for (p, &walks) in positions.iter_mut().zip(walking.iter()) {
            if walks {
                *p = config.topology.torus_shift(*p, 1, 1)?;
            }
        }
        occupancy.tally(&positions);
        for (c, &p) in counts.iter_mut().zip(positions.iter()) {
            *c += occupancy.others_at(p);
        }
    }
    let t = config.rounds;
    Ok(counts
        .into_iter()
        .map(|c| {
            let reduced = c % t;
            DensityEstimate {
                collisions: reduced,
                d_tilde: 2.0 * reduced as f64 / t as f64,
                algorithm: Algorithm::IndependentSampling,
            }
        })
        .collect())
}

/// Frequency estimation: encounter-rate run with two counters per agent,
/// all collisions and collisions with labeled agents. Labels default to
/// independent Bernoulli(`label_fraction`) draws.
pub fn run_frequency_estimation(
    config: &SimConfig,
    trial: u64,
    labels: Option<&[bool]>,
) -> Result<Vec<FrequencyEstimate>> {
    config.validate_common()?;
    let mut rng = stream(config.seed, trial);
    let agents = config.other_agents + 1;
    let mut positions = place_uniform(&config.topology, agents, &mut rng);
    let labels: Vec<bool> = match labels {
        Some(l) => {
            if l.len() as u64 != agents {
                return Err(Error::param("labels", "length must equal agent count"));
            }
            l.to_vec()
        }
        None => {
            let f = config.label_fraction.ok_or_else(|| {
                Error::param("label_fraction", "required for frequency runs")
            })?;
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::param("label_fraction", "must lie in [0, 1]"));
            }
            (0..agents).map(|_| rng.random::<f64>() < f).collect()
        }
    };
    let mut counts = vec![0u64; agents as usize];
    let mut labeled_counts = vec![0u64; agents as usize];
    let mut all = Occupancy::new(agents as usize);
    let mut labeled = Occupancy::new(agents as usize);
    let labeled_positions: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| l.then_some(i))
        .collect();
    let mut labeled_buf = vec![0 as NodeId; labeled_positions.len()];
    for _ in 0..config.rounds {
        for p in positions.iter_mut() {
            *p = config.topology.random_step_unchecked(*p, &mut rng);
        }
        all.tally(&positions);
        for (slot, &i) in labeled_buf.iter_mut().zip(labeled_positions.iter()) {
            *slot = positions[i];
        }
        labeled.tally(&labeled_buf);
        for (i, &p) in positions.iter().enumerate() {
            counts[i] += all.others_at(p);
            let at_node = labeled.map.get(&p).copied().unwrap_or(0);
            labeled_counts[i] += at_node - u64::from(labels[i]);
        }
    }
    let t = config.rounds as f64;
    Ok(counts
        .iter()
        .zip(labeled_counts.iter())
        .map(|(&c, &cp)| {
            let d_tilde = c as f64 / t;
            let d_tilde_p = cp as f64 / t;
            FrequencyEstimate {
                collisions: c,
                labeled_collisions: cp,
                d_tilde,
                d_tilde_p,
                f_tilde_p: (c > 0).then(|| d_tilde_p / d_tilde),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    fn torus_config(side: u64, n: u64, t: u64, seed: u64, algorithm: Algorithm) -> SimConfig {
        SimConfig {
            topology: Topology::torus2d(side).unwrap(),
            other_agents: n,
            rounds: t,
            seed,
            algorithm,
            label_fraction: None,
        }
    }

    #[test]
    fn occupancy_examples() {
        assert_eq!(occupancy_collisions(&[1, 2, 3]), vec![0, 0, 0]);
        let counts = occupancy_collisions(&[7, 7, 7]);
        assert_eq!(counts, vec![2, 2, 2]);
        assert_eq!(counts.iter().sum::<u64>(), 6);
        assert_eq!(occupancy_collisions(&[5, 5, 9]), vec![1, 1, 0]);
    }

    #[test]
    fn single_agent_sees_nothing() {
        let config = torus_config(8, 0, 16, 1, Algorithm::EncounterRate);
        for e in run_encounter_rate(&config, 0).unwrap() {
            assert_eq!(e.collisions, 0);
            assert_eq!(e.d_tilde, 0.0);
        }
        let config = torus_config(8, 0, 7, 1, Algorithm::IndependentSampling);
        for e in run_independent_sampling(&config, 0).unwrap() {
            assert_eq!(e.d_tilde, 0.0);
        }
    }

    #[test]
    fn encounter_rate_grand_mean_is_unbiased() {
        // Torus 32x32, 11 agents, t = 512, 2000 trials: grand mean of
        // d-tilde within 3 standard errors of d = 10/1024.
        let config = torus_config(32, 10, 512, 42, Algorithm::EncounterRate);
        let trials = 2000u64;
        let trial_means: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let est = run_encounter_rate(&config, i).unwrap();
                est.iter().map(|e| e.d_tilde).sum::<f64>() / est.len() as f64
            })
            .collect();
        let grand = trial_means.iter().sum::<f64>() / trials as f64;
        let var = trial_means
            .iter()
            .map(|m| (m - grand).powi(2))
            .sum::<f64>()
            / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        let d = config.density();
        assert!(
            (grand - d).abs() <= 3.0 * se,
            "grand mean {grand} vs d {d} (se {se})"
        );
    }

    #[test]
    fn complete_graph_single_round_matches_enumeration() {
        // Independent oracle: enumerate all joint starts and joint steps of
        // two agents on K_5. Uniform placement keeps each walk uniform, so
        // the collision probability is exactly 1/A.
        let a = 5u64;
        let topology = crate::topology::complete(a).unwrap();
        let mut collide = 0.0f64;
        for sa in 0..a {
            for sb in 0..a {
                let na = topology.neighbors(sa).unwrap();
                let nb = topology.neighbors(sb).unwrap();
                for &x in &na {
                    for &y in &nb {
                        if x == y {
                            collide += 1.0 / (a * a * (a - 1) * (a - 1)) as f64;
                        }
                    }
                }
            }
        }
        assert!(
            (collide - 1.0 / a as f64).abs() < 1e-12,
            "enumerated collision probability {collide}"
        );

        let config = SimConfig {
            topology,
            other_agents: 1,
            rounds: 1,
            seed: 7,
            algorithm: Algorithm::EncounterRate,
            label_fraction: None,
        };
        let trials = 40_000u64;
        let mut sum = 0.0;
        for i in 0..trials {
            let est = run_encounter_rate(&config, i).unwrap();
            assert!(est[0].d_tilde == 0.0 || est[0].d_tilde == 1.0);
            sum += est[0].d_tilde;
        }
        let mean = sum / trials as f64;
        let se = (collide * (1.0 - collide) / trials as f64).sqrt();
        assert!(
            (mean - collide).abs() <= 3.0 * se,
            "mean {mean} vs enumerated {collide}"
        );
    }

    #[test]
    fn independent_sampling_preconditions() {
        // Not a torus.
        let config = SimConfig {
            topology: Topology::ring(64).unwrap(),
            other_agents: 2,
            rounds: 4,
            seed: 0,
            algorithm: Algorithm::IndependentSampling,
            label_fraction: None,
        };
        assert!(run_independent_sampling(&config, 0).is_err());
        // t >= sqrt(A).
        let config = torus_config(8, 2, 8, 0, Algorithm::IndependentSampling);
        assert!(run_independent_sampling(&config, 0).is_err());
        // d > 1.
        let config = torus_config(8, 65, 4, 0, Algorithm::IndependentSampling);
        assert!(run_independent_sampling(&config, 0).is_err());
    }

    #[test]
    fn lockstep_walking_agents_mod_correct_to_zero() {
        // All agents walking from one shared start: every round each counts
        // the w = n others, so raw c = w * t reduces to 0 mod t.
        let config = torus_config(64, 4, 16, 3, Algorithm::IndependentSampling);
        let init = IndependentInit {
            positions: vec![9; 5],
            walking: vec![true; 5],
        };
        for e in run_independent_sampling_with(&config, 0, init).unwrap() {
            assert_eq!(e.collisions, 0);
            assert_eq!(e.d_tilde, 0.0);
        }
    }

    #[test]
    fn walking_agents_from_distinct_starts_never_collide() {
        let topology = Topology::torus2d(64).unwrap();
        let positions: Vec<NodeId> = (0..6).map(|i| i * 100).collect();
        let config = torus_config(64, 5, 32, 5, Algorithm::IndependentSampling);
        let init = IndependentInit {
            positions,
            walking: vec![true; 6],
        };
        let _ = topology;
        for e in run_independent_sampling_with(&config, 0, init).unwrap() {
            assert_eq!(e.collisions, 0);
        }
    }

    #[test]
    fn independent_sampling_grand_mean_is_unbiased() {
        // Torus 64x64, n = 40, t = 32, 5000 trials.
        let config = torus_config(64, 40, 32, 11, Algorithm::IndependentSampling);
        let trials = 5000u64;
        let trial_means: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let est = run_independent_sampling(&config, i).unwrap();
                est.iter().map(|e| e.d_tilde).sum::<f64>() / est.len() as f64
            })
            .collect();
        let grand = trial_means.iter().sum::<f64>() / trials as f64;
        let var = trial_means
            .iter()
            .map(|m| (m - grand).powi(2))
            .sum::<f64>()
            / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        let d = config.density();
        assert!(
            (grand - d).abs() <= 3.0 * se,
            "grand mean {grand} vs d {d} (se {se})"
        );
    }

    #[test]
    fn frequency_extremes() {
        let mut config = torus_config(16, 6, 64, 9, Algorithm::Frequency);
        config.label_fraction = Some(1.0);
        for e in run_frequency_estimation(&config, 0, None).unwrap() {
            if e.collisions > 0 {
                assert_eq!(e.f_tilde_p, Some(1.0));
            }
        }
        config.label_fraction = Some(0.0);
        for e in run_frequency_estimation(&config, 1, None).unwrap() {
            if e.collisions > 0 {
                assert_eq!(e.f_tilde_p, Some(0.0));
            } else {
                assert_eq!(e.f_tilde_p, None);
            }
        }
    }

    #[test]
    fn frequency_counters_are_consistent() {
        let mut config = torus_config(8, 12, 128, 13, Algorithm::Frequency);
        config.label_fraction = Some(0.5);
        for e in run_frequency_estimation(&config, 2, None).unwrap() {
            assert!(e.labeled_collisions <= e.collisions);
            if let Some(f) = e.f_tilde_p {
                assert!((0.0..=1.0).contains(&f));
            }
        }
    }

    #[test]
    fn identical_seed_reproduces_traces() {
        let config = torus_config(16, 8, 64, 21, Algorithm::EncounterRate);
        let a = run_encounter_rate(&config, 3).unwrap();
        let b = run_encounter_rate(&config, 3).unwrap();
        assert_eq!(a, b);
        let c = run_encounter_rate(&config, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn collision_sum_identity_on_random_positions() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(
                &proptest::collection::vec(0u64..32, 1..200),
                |positions| {
                    let per_agent = occupancy_collisions(&positions);
                    let total: u64 = per_agent.iter().sum();
                    let mut occ: HashMap<NodeId, u64> = HashMap::new();
                    for &p in &positions {
                        *occ.entry(p).or_insert(0) += 1;
                    }
                    let expected: u64 = occ.values().map(|&o| o * (o - 1)).sum();
                    prop_assert_eq!(total, expected);
                    Ok(())
                },
            )
            .unwrap();
    }
}
