//! Network size estimation over a link-query graph: burn-in, degree-weighted
//! collision counting, average-degree estimation, walk-count planning, and
//! median boosting.
//!
//! The estimator touches the graph only through [`LinkQuery`]: neighborhood
//! lookups of already-reached vertices plus degree lookups. Query accounting
//! is exact: a full pipeline run spends n*(M+t) neighborhood queries (one per
//! walk per round, burn-in included) plus n degree queries for the average
//! degree estimate. Each walk queries its node on arrival; that response is
//! cached and serves both the collision weight of the current round and the
//! step choice of the next one. The seed's neighborhood is the crawl's
//! bootstrap knowledge, fetched once at graph construction and not counted.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle;
use crate::rng::{derive_master, stream};
use crate::spectral::{spectral_lambda, spectral_lambda_lazy};
use crate::topology::{GraphStats, NodeId, Topology};

/// Frozen stand-in for the burn-in Theta-constant.
pub const DEFAULT_C_BURN: f64 = 4.0;
/// Frozen stand-in for the walk-count Theta-constant.
pub const DEFAULT_C_PLAN: f64 = 2.0;

/// Walk stepping discipline. The lazy walk (hold with probability 1/2) is the
/// explicit opt-in that makes bipartite graphs mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    Simple,
    Lazy,
}

/// Link-query access to a graph: the only primitives are the seed vertex,
/// neighborhood lookups, and degree lookups. No global enumeration exists on
/// this interface.
pub trait LinkQuery {
    fn seed_vertex(&self) -> NodeId;
    /// The seed's neighborhood, known at crawl start; not a counted query.
    fn bootstrap_neighbors(&self) -> &[NodeId];
    /// Neighborhood lookup; increments the neighborhood-query counter.
    fn query_neighbors(&mut self, v: NodeId, out: &mut Vec<NodeId>);
    /// Degree lookup; increments the degree-query counter.
    fn query_degree(&mut self, v: NodeId) -> u64;
}

/// A [`Topology`] wrapped with monotone query counters and a seed vertex.
#[derive(Debug, Clone)]
pub struct LinkQueryGraph {
    topology: Topology,
    seed: NodeId,
    seed_neighbors: Vec<NodeId>,
    neighborhood_queries: u64,
    degree_queries: u64,
}

impl LinkQueryGraph {
    pub fn new(topology: Topology, seed: NodeId) -> Result<LinkQueryGraph> {
        let seed_neighbors = topology.neighbors(seed)?;
        Ok(LinkQueryGraph {
            topology,
            seed,
            seed_neighbors,
            neighborhood_queries: 0,
            degree_queries: 0,
        })
    }

    pub fn neighborhood_queries(&self) -> u64 {
        self.neighborhood_queries
    }

    pub fn degree_queries(&self) -> u64 {
        self.degree_queries
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

impl LinkQuery for LinkQueryGraph {
    fn seed_vertex(&self) -> NodeId {
        self.seed
    }

    fn bootstrap_neighbors(&self) -> &[NodeId] {
        &self.seed_neighbors
    }

    fn query_neighbors(&mut self, v: NodeId, out: &mut Vec<NodeId>) {
        self.neighborhood_queries += 1;
        self.topology.neighbors_into(v, out);
    }

    fn query_degree(&mut self, v: NodeId) -> u64 {
        self.degree_queries += 1;
        self.topology.degree_unchecked(v)
    }
}

/// Positions of n walks plus the cached neighborhood (hence degree) of each
/// walk's current node and the walk's RNG stream.
#[derive(Debug)]
pub struct WalkEnsemble {
    positions: Vec<NodeId>,
    cached_neighbors: Vec<Vec<NodeId>>,
    rng: ChaCha8Rng,
    mode: WalkMode,
    burn_in_used: u64,
}

impl WalkEnsemble {
    pub fn positions(&self) -> &[NodeId] {
        &self.positions
    }

    pub fn walk_count(&self) -> u64 {
        self.positions.len() as u64
    }

    pub fn burn_in_used(&self) -> u64 {
        self.burn_in_used
    }

    pub fn mode(&self) -> WalkMode {
        self.mode
    }

    /// Analysis entry point: walks at given positions with warm caches read
    /// directly from the wrapped topology (uncounted). Every constructed
    /// topology is connected, so positions are always reachable from the
    /// seed.
    pub fn from_positions(
        graph: &LinkQueryGraph,
        positions: Vec<NodeId>,
        seed: u64,
        mode: WalkMode,
    ) -> Result<WalkEnsemble> {
        let mut cached_neighbors = Vec::with_capacity(positions.len());
        for &p in &positions {
            cached_neighbors.push(graph.topology.neighbors(p)?);
        }
        Ok(WalkEnsemble {
            positions,
            cached_neighbors,
            rng: stream(seed, 0),
            mode,
            burn_in_used: 0,
        })
    }

    /// Analysis entry point: n walks placed by exact stationary sampling,
    /// isolating the estimator from burn-in error.
    pub fn from_stationary(
        graph: &LinkQueryGraph,
        n: u64,
        seed: u64,
        mode: WalkMode,
    ) -> Result<WalkEnsemble> {
        let mut rng = stream(seed, 0);
        let positions: Vec<NodeId> = (0..n)
            .map(|_| graph.topology.stationary_sample(&mut rng))
            .collect();
        let mut ensemble = WalkEnsemble::from_positions(graph, positions, seed, mode)?;
        ensemble.rng = rng;
        Ok(ensemble)
    }

    /// One synchronous round: every walk steps (one draw each, walk order),
    /// then queries its arrival node, refreshing the cache. Exactly n counted
    /// neighborhood queries.
    fn advance_round<G: LinkQuery>(&mut self, graph: &mut G) {
        for j in 0..self.positions.len() {
            let nbrs = &self.cached_neighbors[j];
            let next = match self.mode {
                WalkMode::Simple => nbrs[self.rng.random_range(0..nbrs.len())],
                WalkMode::Lazy => {
                    let r = self.rng.random_range(0..2 * nbrs.len());
                    if r < nbrs.len() {
                        nbrs[r]
                    } else {
                        self.positions[j]
                    }
                }
            };
            self.positions[j] = next;
            graph.query_neighbors(next, &mut self.cached_neighbors[j]);
        }
    }
}

/// Burn-in length M = ceil(c_burn * ln(|E|/delta) / (1 - lambda)).
///
/// A 1e-9 slack before the ceiling keeps float-exact integer boundaries from
/// rounding up.
pub fn burn_in_length(lambda: f64, edges: f64, delta: f64, c_burn: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::param(
            "lambda",
            "must lie in [0, 1); the walk does not mix at lambda = 1 (bipartite or disconnected)",
        ));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if edges <= 0.0 {
        return Err(Error::param("edges", "must be positive"));
    }
    if c_burn <= 0.0 {
        return Err(Error::param("c_burn", "must be positive"));
    }
    let v = c_burn * (edges / delta).ln() / (1.0 - lambda);
    Ok((v - 1e-9).ceil().max(0.0) as u64)
}

/// Starts n walks at the seed vertex and advances them M rounds. Neighborhood
/// queries: exactly n * M.
pub fn run_burn_in<G: LinkQuery>(
    graph: &mut G,
    n: u64,
    burn_in: u64,
    seed: u64,
    mode: WalkMode,
) -> Result<WalkEnsemble> {
    if n < 2 {
        return Err(Error::param("n", "need at least 2 walks"));
    }
    let mut ensemble = WalkEnsemble {
        positions: vec![graph.seed_vertex(); n as usize],
        cached_neighbors: vec![graph.bootstrap_neighbors().to_vec(); n as usize],
        rng: stream(seed, 0),
        mode,
        burn_in_used: burn_in,
    };
    for _ in 0..burn_in {
        ensemble.advance_round(graph);
    }
    Ok(ensemble)
}

/// Inverse average degree estimate D = (1/n) * sum_j 1/deg(w_j).
/// Degree queries: exactly n.
pub fn estimate_avg_degree<G: LinkQuery>(graph: &mut G, ensemble: &WalkEnsemble) -> Result<f64> {
    if ensemble.positions.is_empty() {
        return Err(Error::param("ensemble", "need at least 1 walk"));
    }
    let sum: f64 = ensemble
        .positions
        .iter()
        .map(|&p| 1.0 / graph.query_degree(p) as f64)
        .sum();
    Ok(sum / ensemble.positions.len() as f64)
}

/// The degree-weighted collision statistic and derived size estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeEstimate {
    /// Per-walk weighted collision sums c_j (sums of count/deg terms).
    pub weighted_counts: Vec<f64>,
    /// C = avg_deg * sum(c_j) / (n * (n-1) * t).
    pub statistic: f64,
    /// 1/C; absent when no collisions were observed.
    pub a_tilde: Option<f64>,
    pub rounds: u64,
    pub avg_degree_input: f64,
}

/// Advances every walk t synchronous rounds, accumulating degree-weighted
/// collision counts at end-of-round positions. Neighborhood queries: exactly
/// n * t. A zero collision count yields an absent estimate; the caller
/// retries or boosts.
pub fn estimate_size<G: LinkQuery>(
    graph: &mut G,
    ensemble: &mut WalkEnsemble,
    rounds: u64,
    avg_degree: f64,
) -> Result<SizeEstimate> {
    let n = ensemble.positions.len();
    if n < 2 {
        return Err(Error::param("n", "need at least 2 walks"));
    }
    if rounds == 0 {
        return Err(Error::param("rounds", "must be >= 1"));
    }
    if avg_degree <= 0.0 {
        return Err(Error::param("avg_degree", "must be positive"));
    }
    let mut weighted_counts = vec![0.0f64; n];
    let mut occupancy: std::collections::HashMap<NodeId, u64> =
        std::collections::HashMap::with_capacity(n);
    for _ in 0..rounds {
        ensemble.advance_round(graph);
        occupancy.clear();
        for &p in &ensemble.positions {
            *occupancy.entry(p).or_insert(0) += 1;
        }
        for (j, &p) in ensemble.positions.iter().enumerate() {
            let others = occupancy[&p] - 1;
            if others > 0 {
                weighted_counts[j] +=
                    others as f64 / ensemble.cached_neighbors[j].len() as f64;
            }
        }
    }
    let total: f64 = weighted_counts.iter().sum();
    let statistic = avg_degree * total / (n as f64 * (n as f64 - 1.0) * rounds as f64);
    Ok(SizeEstimate {
        weighted_counts,
        statistic,
        a_tilde: (statistic > 0.0).then(|| 1.0 / statistic),
        rounds,
        avg_degree_input: avg_degree,
    })
}

/// Median of an odd number of estimates; absent entries are failed runs and
/// sort as +infinity. Errors only when every entry is absent.
pub fn median_boost(estimates: &[Option<f64>]) -> Result<f64> {
    if estimates.is_empty() || estimates.len() % 2 == 0 {
        return Err(Error::param("estimates", "need an odd number of runs"));
    }
    if estimates.iter().all(|e| e.is_none()) {
        return Err(Error::AllEstimatesAbsent);
    }
    let mut values: Vec<f64> = estimates
        .iter()
        .map(|e| e.unwrap_or(f64::INFINITY))
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values[values.len() / 2])
}

/// Walk-count plan n = ceil(c_plan * max of the two variance terms), using
/// `size_guess` for |V|. The same 1e-9 relative slack as
/// [`burn_in_length`] guards exact integer boundaries.
pub fn plan_walk_count(
    rounds: u64,
    b_t: f64,
    stats: &GraphStats,
    eps: f64,
    delta: f64,
    size_guess: f64,
    c_plan: f64,
) -> Result<u64> {
    if rounds == 0 || b_t <= 0.0 || size_guess <= 0.0 || c_plan <= 0.0 {
        return Err(Error::param("plan", "all parameters must be positive"));
    }
    if !(0.0..1.0).contains(&eps) || eps == 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::param("eps/delta", "must lie in (0, 1)"));
    }
    let avg = stats.avg_degree();
    let e2d = eps * eps * delta;
    let term1 = avg / (stats.min_degree as f64 * e2d);
    let term2 = (size_guess * b_t * avg / (rounds as f64 * e2d)).sqrt();
    let v = c_plan * term1.max(term2);
    Ok((v - 1e-9 * v.max(1.0)).ceil() as u64)
}

/// Full pipeline configuration. Planning inputs that require global knowledge
/// (lambda, B(t), a size guess) are computed from the wrapped topology when
/// it is small enough, or supplied explicitly via the overrides.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub topology: Topology,
    pub seed_vertex: NodeId,
    pub eps: f64,
    pub delta: f64,
    pub rounds: u64,
    pub boost_runs: u64,
    pub seed: u64,
    pub lazy: bool,
    pub c_burn: f64,
    pub c_plan: f64,
    pub size_guess: Option<f64>,
    pub lambda_override: Option<f64>,
    pub b_t_override: Option<f64>,
}

impl PipelineConfig {
    pub fn new(topology: Topology, seed_vertex: NodeId, seed: u64) -> PipelineConfig {
        PipelineConfig {
            topology,
            seed_vertex,
            eps: 0.2,
            delta: 0.1,
            rounds: 64,
            boost_runs: 15,
            seed,
            lazy: false,
            c_burn: DEFAULT_C_BURN,
            c_plan: DEFAULT_C_PLAN,
            size_guess: None,
            lambda_override: None,
            b_t_override: None,
        }
    }
}

/// One boost run's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub a_tilde: Option<f64>,
    pub statistic: f64,
    pub avg_degree_estimate: f64,
    pub neighborhood_queries: u64,
    pub degree_queries: u64,
}

/// Pipeline result with full planning metadata; every output records the
/// frozen constants and walk mode used.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub a_tilde: f64,
    pub walks: u64,
    pub burn_in: u64,
    pub rounds: u64,
    pub lambda: f64,
    pub b_t: f64,
    pub c_burn: f64,
    pub c_plan: f64,
    pub lazy: bool,
    pub neighborhood_queries: u64,
    pub degree_queries: u64,
    pub runs: Vec<PipelineRun>,
}

/// Degree-weighted B(t) = sum over m = 0..=t of max_{i,j} p(i,j,m)/deg(j),
/// computed exactly; the planning input matching the estimator's variance
/// bound (summing from m = 0 adds at most 1/deg_min and stays conservative).
pub fn degree_weighted_big_b(topology: &Topology, rounds: u64) -> Result<f64> {
    Ok(oracle::degree_weighted_beta_profile(topology, rounds)?
        .iter()
        .sum())
}

/// Burn-in, average-degree estimation, size estimation, and median boosting,
/// end to end. Bipartite topologies are rejected unless the lazy walk is
/// enabled. Each boost run uses a derived seed and its own query counters;
/// per-run accounting is exactly n*(M+t) neighborhood plus n degree queries.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineResult> {
    if config.boost_runs == 0 || config.boost_runs % 2 == 0 {
        return Err(Error::param("boost_runs", "need an odd number of runs"));
    }
    if config.topology.is_bipartite() && !config.lazy {
        return Err(Error::BipartiteGraph);
    }
    let lambda = match config.lambda_override {
        Some(l) => l,
        None => {
            if config.lazy {
                spectral_lambda_lazy(&config.topology)?
            } else {
                spectral_lambda(&config.topology)?
            }
        }
    };
    let stats = config.topology.graph_stats();
    let burn_in = burn_in_length(lambda, stats.edges as f64, config.delta, config.c_burn)?;
    let b_t = match config.b_t_override {
        Some(b) => b,
        None => degree_weighted_big_b(&config.topology, config.rounds)?,
    };
    let size_guess = config
        .size_guess
        .unwrap_or(config.topology.nodes() as f64);
    let walks = plan_walk_count(
        config.rounds,
        b_t,
        &stats,
        config.eps,
        config.delta,
        size_guess,
        config.c_plan,
    )?;
    let mode = if config.lazy {
        WalkMode::Lazy
    } else {
        WalkMode::Simple
    };
    let runs: Result<Vec<PipelineRun>> = (0..config.boost_runs)
        .into_par_iter()
        .map(|run| {
            let mut graph =
                LinkQueryGraph::new(config.topology.clone(), config.seed_vertex)?;
            let run_seed = derive_master(config.seed, run);
            let mut ensemble = run_burn_in(&mut graph, walks, burn_in, run_seed, mode)?;
            let d = estimate_avg_degree(&mut graph, &ensemble)?;
            let estimate = estimate_size(&mut graph, &mut ensemble, config.rounds, 1.0 / d)?;
            Ok(PipelineRun {
                a_tilde: estimate.a_tilde,
                statistic: estimate.statistic,
                avg_degree_estimate: d,
                neighborhood_queries: graph.neighborhood_queries(),
                degree_queries: graph.degree_queries(),
            })
        })
        .collect();
    let runs = runs?;
    let boosted = median_boost(&runs.iter().map(|r| r.a_tilde).collect::<Vec<_>>())?;
    Ok(PipelineResult {
        a_tilde: boosted,
        walks,
        burn_in,
        rounds: config.rounds,
        lambda,
        b_t,
        c_burn: config.c_burn,
        c_plan: config.c_plan,
        lazy: config.lazy,
        neighborhood_queries: runs.iter().map(|r| r.neighborhood_queries).sum(),
        degree_queries: runs.iter().map(|r| r.degree_queries).sum(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{complete, star};

    #[test]
    fn burn_in_length_examples() {
        let e = std::f64::consts::E;
        assert_eq!(burn_in_length(0.0, e, 1.0 / e, 1.0).unwrap(), 2);
        assert_eq!(burn_in_length(0.5, 100.0, 0.1, 4.0).unwrap(), 56);
        // Monotone in delta.
        let m1 = burn_in_length(0.3, 50.0, 0.2, 4.0).unwrap();
        let m2 = burn_in_length(0.3, 50.0, 0.02, 4.0).unwrap();
        assert!(m2 >= m1);
        assert!(burn_in_length(1.0, 10.0, 0.1, 4.0).is_err());
    }

    #[test]
    fn burn_in_zero_keeps_walks_at_seed() {
        let t = Topology::torus(&[5, 5]).unwrap();
        let mut g = LinkQueryGraph::new(t, 7).unwrap();
        let e = run_burn_in(&mut g, 4, 0, 1, WalkMode::Simple).unwrap();
        assert!(e.positions().iter().all(|&p| p == 7));
        assert_eq!(g.neighborhood_queries(), 0);
    }

    #[test]
    fn burn_in_on_k2_forces_both_walks_over() {
        let t = Topology::explicit(vec![vec![1], vec![0]]).unwrap();
        let mut g = LinkQueryGraph::new(t, 0).unwrap();
        let e = run_burn_in(&mut g, 2, 1, 3, WalkMode::Simple).unwrap();
        assert_eq!(e.positions(), &[1, 1]);
        assert_eq!(g.neighborhood_queries(), 2);
    }

    #[test]
    fn burn_in_reaches_uniform_on_lazy_3d_torus() {
        // 4x4x4 torus is bipartite; the lazy walk is the documented opt-in.
        // Empirical final-position distribution over many independent
        // burn-ins lands within TV 0.05 of uniform, matching the exact
        // lazy-walk TV from the oracle.
        let t = Topology::torus(&[4, 4, 4]).unwrap();
        let lambda = spectral_lambda_lazy(&t).unwrap();
        let m = burn_in_length(lambda, t.edges() as f64, 0.05, DEFAULT_C_BURN).unwrap();
        let exact_tv = oracle::tv_to_stationary_lazy(&t, 0, m).unwrap();
        assert!(exact_tv <= 0.05, "exact TV {exact_tv}");

        let trials = 100_000u64;
        let counts = (0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; t.nodes() as usize],
                |mut acc, i| {
                    let mut g = LinkQueryGraph::new(t.clone(), 0).unwrap();
                    let e = run_burn_in(&mut g, 2, m, derive_master(99, i), WalkMode::Lazy)
                        .unwrap();
                    acc[e.positions()[0] as usize] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; t.nodes() as usize],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x += y;
                    }
                    a
                },
            );
        let uniform = 1.0 / t.nodes() as f64;
        let tv: f64 = counts
            .iter()
            .map(|&c| (c as f64 / trials as f64 - uniform).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.05, "empirical TV {tv}");
    }

    #[test]
    fn avg_degree_exact_on_regular() {
        let t = Topology::torus(&[5, 5]).unwrap();
        let mut g = LinkQueryGraph::new(t, 0).unwrap();
        let e = run_burn_in(&mut g, 8, 3, 5, WalkMode::Simple).unwrap();
        let d = estimate_avg_degree(&mut g, &e).unwrap();
        assert_eq!(d, 0.25);
        assert_eq!(g.degree_queries(), 8);
    }

    #[test]
    fn avg_degree_unbiased_on_star() {
        // Stationary walks on K_{1,3}: E D = |V| / 2|E| = 4/6.
        let t = star(3).unwrap();
        let g = LinkQueryGraph::new(t, 0).unwrap();
        let trials = 100_000u64;
        let samples: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut g = g.clone();
                let e = WalkEnsemble::from_stationary(&g, 4, derive_master(7, i), WalkMode::Simple)
                    .unwrap();
                estimate_avg_degree(&mut g, &e).unwrap()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - 4.0 / 6.0).abs() <= 3.0 * se,
            "mean {mean} (se {se})"
        );
    }

    #[test]
    fn avg_degree_variance_quarters_with_4x_walks() {
        let t = star(3).unwrap();
        let g = LinkQueryGraph::new(t, 0).unwrap();
        let variance_for = |n: u64, salt: u64| {
            let trials = 40_000u64;
            let samples: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut g = g.clone();
                    let e = WalkEnsemble::from_stationary(
                        &g,
                        n,
                        derive_master(salt, i),
                        WalkMode::Simple,
                    )
                    .unwrap();
                    estimate_avg_degree(&mut g, &e).unwrap()
                })
                .collect();
            let mean = samples.iter().sum::<f64>() / trials as f64;
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0)
        };
        let v1 = variance_for(8, 1);
        let v4 = variance_for(32, 2);
        let ratio = v1 / v4;
        assert!(
            (ratio - 4.0).abs() / 4.0 <= 0.3,
            "variance ratio {ratio} not within 30% of 4"
        );
    }

    #[test]
    fn k2_lockstep_gives_unit_estimate() {
        let t = Topology::explicit(vec![vec![1], vec![0]]).unwrap();
        let g = LinkQueryGraph::new(t, 0).unwrap();
        let mut g2 = g.clone();
        let mut e =
            WalkEnsemble::from_positions(&g, vec![0, 0], 11, WalkMode::Simple).unwrap();
        let rounds = 16;
        let est = estimate_size(&mut g2, &mut e, rounds, 1.0).unwrap();
        assert_eq!(est.weighted_counts, vec![rounds as f64, rounds as f64]);
        assert_eq!(est.statistic, 1.0);
        assert_eq!(est.a_tilde, Some(1.0));
    }

    #[test]
    fn no_collisions_yields_absent_estimate() {
        let t = Topology::ring(64).unwrap();
        let g = LinkQueryGraph::new(t, 0).unwrap();
        let mut g2 = g.clone();
        let mut e =
            WalkEnsemble::from_positions(&g, vec![0, 32], 13, WalkMode::Simple).unwrap();
        let est = estimate_size(&mut g2, &mut e, 2, 2.0).unwrap();
        assert_eq!(est.statistic, 0.0);
        assert_eq!(est.a_tilde, None);
    }

    #[test]
    fn mean_statistic_matches_inverse_node_count_on_tiny_graphs() {
        // Lemma check with stationary starts: E C = 1/|V| on K_3, K_4, and
        // the 8-node 3-regular Wagner graph (Moebius ladder, non-bipartite).
        let wagner = Topology::explicit(vec![
            vec![1, 7, 4],
            vec![0, 2, 5],
            vec![1, 3, 6],
            vec![2, 4, 7],
            vec![3, 5, 0],
            vec![4, 6, 1],
            vec![5, 7, 2],
            vec![6, 0, 3],
        ])
        .unwrap();
        for (topology, salt) in [(complete(3).unwrap(), 1u64), (complete(4).unwrap(), 2), (wagner, 3)] {
            let nodes = topology.nodes();
            let avg_deg = topology.graph_stats().avg_degree();
            let g = LinkQueryGraph::new(topology, 0).unwrap();
            let trials = 100_000u64;
            let rounds = 8;
            let stats: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut g = g.clone();
                    let mut e = WalkEnsemble::from_stationary(
                        &g,
                        4,
                        derive_master(salt, i),
                        WalkMode::Simple,
                    )
                    .unwrap();
                    estimate_size(&mut g, &mut e, rounds, avg_deg)
                        .unwrap()
                        .statistic
                })
                .collect();
            let mean = stats.iter().sum::<f64>() / trials as f64;
            let var =
                stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
            let se = (var / trials as f64).sqrt();
            let expected = 1.0 / nodes as f64;
            assert!(
                (mean - expected).abs() <= 3.0 * se,
                "nodes={nodes}: mean {mean} vs {expected} (se {se})"
            );
        }
    }

    #[test]
    fn median_boost_examples() {
        assert_eq!(median_boost(&[Some(42.0)]).unwrap(), 42.0);
        assert_eq!(
            median_boost(&[Some(90.0), Some(100.0), None]).unwrap(),
            100.0
        );
        assert!(matches!(
            median_boost(&[None, None, None]),
            Err(Error::AllEstimatesAbsent)
        ));
        assert!(median_boost(&[Some(1.0), Some(2.0)]).is_err());
    }

    #[test]
    fn plan_walk_count_examples() {
        // Regular graph, first term dominating: c_plan / (eps^2 delta).
        let stats = GraphStats {
            nodes: 10_000,
            edges: 20_000,
            min_degree: 4,
            max_degree: 4,
        };
        let n = plan_walk_count(1_000_000, 1e-9, &stats, 0.1, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(n, 400); // 2 * 1/(0.01 * 0.5)

        // 3-D torus worked example.
        let stats = GraphStats {
            nodes: 512,
            edges: 1536,
            min_degree: 6,
            max_degree: 6,
        };
        let n = plan_walk_count(64, 3.7, &stats, 0.2, 0.1, 512.0, 2.0).unwrap();
        assert_eq!(n, 500);

        // Halving eps at least doubles n.
        let stats = GraphStats {
            nodes: 1024,
            edges: 3072,
            min_degree: 6,
            max_degree: 6,
        };
        let n1 = plan_walk_count(64, 4.0, &stats, 0.2, 0.1, 1024.0, 2.0).unwrap();
        let n2 = plan_walk_count(64, 4.0, &stats, 0.1, 0.1, 1024.0, 2.0).unwrap();
        assert!(n2 >= 2 * n1, "{n2} < 2 * {n1}");
    }

    #[test]
    fn pipeline_rejects_bipartite_without_lazy() {
        let t = Topology::torus(&[4, 4, 4]).unwrap();
        let config = PipelineConfig::new(t, 0, 1);
        assert!(matches!(run_pipeline(&config), Err(Error::BipartiteGraph)));
    }

    #[test]
    fn pipeline_query_accounting_is_exact() {
        let t = Topology::torus(&[5, 5]).unwrap();
        let mut config = PipelineConfig::new(t, 0, 5);
        config.rounds = 8;
        config.boost_runs = 3;
        config.eps = 0.4;
        config.delta = 0.3;
        let result = run_pipeline(&config).unwrap();
        let n = result.walks;
        let expected = n * (result.burn_in + result.rounds);
        for run in &result.runs {
            assert_eq!(run.neighborhood_queries, expected);
            assert_eq!(run.degree_queries, n);
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let t = Topology::torus(&[5, 5]).unwrap();
        let mut config = PipelineConfig::new(t, 3, 17);
        config.rounds = 8;
        config.boost_runs = 3;
        config.eps = 0.4;
        config.delta = 0.3;
        let a = run_pipeline(&config).unwrap();
        let b = run_pipeline(&config).unwrap();
        assert_eq!(a.a_tilde, b.a_tilde);
        assert_eq!(a.runs, b.runs);
    }

    #[test]
    fn link_query_discipline_only_touches_reached_vertices() {
        // Recording double: every queried vertex must already be reached
        // (the seed or some earlier query's response).
        struct Recording {
            inner: LinkQueryGraph,
            reached: std::collections::HashSet<NodeId>,
            violations: u64,
        }
        impl LinkQuery for Recording {
            fn seed_vertex(&self) -> NodeId {
                self.inner.seed_vertex()
            }
            fn bootstrap_neighbors(&self) -> &[NodeId] {
                self.inner.bootstrap_neighbors()
            }
            fn query_neighbors(&mut self, v: NodeId, out: &mut Vec<NodeId>) {
                if !self.reached.contains(&v) {
                    self.violations += 1;
                }
                self.inner.query_neighbors(v, out);
                self.reached.extend(out.iter().copied());
            }
            fn query_degree(&mut self, v: NodeId) -> u64 {
                if !self.reached.contains(&v) {
                    self.violations += 1;
                }
                self.inner.query_degree(v)
            }
        }
        let t = Topology::torus(&[5, 5]).unwrap();
        let inner = LinkQueryGraph::new(t, 12).unwrap();
        let mut reached: std::collections::HashSet<NodeId> =
            inner.bootstrap_neighbors().iter().copied().collect();
        reached.insert(12);
        let mut g = Recording {
            inner,
            reached,
            violations: 0,
        };
        let mut e = run_burn_in(&mut g, 6, 20, 9, WalkMode::Simple).unwrap();
        let d = estimate_avg_degree(&mut g, &e).unwrap();
        let _ = estimate_size(&mut g, &mut e, 16, 1.0 / d).unwrap();
        assert_eq!(g.violations, 0);
        assert_eq!(g.inner.neighborhood_queries(), 6 * (20 + 16));
        assert_eq!(g.inner.degree_queries(), 6);
    }
}
