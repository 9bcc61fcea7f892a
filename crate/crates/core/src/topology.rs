//! Graph families and uniform-random-neighbor stepping.
//!
//! Node ids are dense integers `0..A`. The coordinate bijections are fixed:
//!
//! * torus: little-endian mixed radix. With sides `[s_0, ..., s_{k-1}]` and
//!   strides `stride_0 = 1`, `stride_d = s_0 * ... * s_{d-1}`, a coordinate
//!   tuple `(c_0, ..., c_{k-1})` maps to `id = sum c_d * stride_d`.
//! * hypercube: bit `b` of the node id is coordinate `b`; neighbors differ
//!   in exactly one bit.
//! * ring: node `i` is adjacent to `(i ± 1) mod A`.
//!
//! All random operations consume a fixed number of draws from the caller's
//! RNG stream (one `random_range` per step or sample), so seeded streams
//! stay aligned across runs.

use rand::Rng;

use crate::error::{Error, Result};

pub type NodeId = u64;

/// Maximum dimension count for tori (keeps the stack neighbor buffer bounded).
pub const MAX_TORUS_DIMS: usize = 32;
/// Maximum hypercube bit count (A = 2^k node ids stay well inside u64).
pub const MAX_HYPERCUBE_BITS: u32 = 30;

const NEIGHBOR_BUF: usize = 64;

/// Which parameterized family a [`Topology`] belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// k-dimensional torus; `sides[d] >= 3` for every dimension.
    TorusKd { sides: Vec<u64> },
    /// Cycle on `nodes >= 3` vertices.
    Ring { nodes: u64 },
    /// k-dimensional hypercube on 2^k vertices.
    Hypercube { bits: u32 },
    /// Arbitrary undirected simple connected graph given by adjacency lists.
    Explicit,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::TorusKd { .. } => "torus_kd",
            Family::Ring { .. } => "ring",
            Family::Hypercube { .. } => "hypercube",
            Family::Explicit => "explicit",
        }
    }
}

/// A finite undirected graph with neighbor access.
///
/// Immutable after construction; safe to share across threads. Parametric
/// families compute neighborhoods on the fly (O(1) memory in A); explicit
/// graphs store a CSR adjacency validated eagerly at build time.
#[derive(Debug, Clone)]
pub struct Topology {
    family: Family,
    nodes: u64,
    edges: u64,
    /// Torus strides (little-endian mixed radix); empty for other families.
    strides: Vec<u64>,
    /// CSR row offsets; explicit graphs only.
    adj_offsets: Vec<usize>,
    /// CSR targets, sorted ascending within each row; explicit graphs only.
    adj_targets: Vec<NodeId>,
    /// Cumulative degree table for stationary sampling; explicit graphs only.
    cum_degrees: Vec<u64>,
}

/// Exact degree summary. `avg_degree * nodes == 2 * edges` holds as an
/// integer identity via [`GraphStats::degree_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub nodes: u64,
    pub edges: u64,
    pub min_degree: u64,
    pub max_degree: u64,
}

impl GraphStats {
    /// 2|E|, the exact numerator of the average degree.
    pub fn degree_sum(&self) -> u64 {
        2 * self.edges
    }

    /// Average degree 2|E|/|V| as a float.
    pub fn avg_degree(&self) -> f64 {
        self.degree_sum() as f64 / self.nodes as f64
    }
}

impl Topology {
    /// k-dimensional torus with per-dimension side lengths (all >= 3).
    pub fn torus(sides: &[u64]) -> Result<Topology> {
        if sides.is_empty() || sides.len() > MAX_TORUS_DIMS {
            return Err(Error::BadDimensionCount(sides.len() as u64));
        }
        let mut strides = Vec::with_capacity(sides.len());
        let mut nodes: u64 = 1;
        for (dim, &side) in sides.iter().enumerate() {
            if side < 3 {
                return Err(Error::SideTooSmall { dim, side });
            }
            strides.push(nodes);
            nodes = nodes.checked_mul(side).ok_or(Error::NodeCountOverflow)?;
        }
        let k = sides.len() as u64;
        let edges = nodes.checked_mul(k).ok_or(Error::NodeCountOverflow)?;
        Ok(Topology {
            family: Family::TorusKd {
                sides: sides.to_vec(),
            },
            nodes,
            edges,
            strides,
            adj_offsets: Vec::new(),
            adj_targets: Vec::new(),
            cum_degrees: Vec::new(),
        })
    }

    /// Square 2-D torus, the default simulation surface.
    pub fn torus2d(side: u64) -> Result<Topology> {
        Topology::torus(&[side, side])
    }

    /// Cycle on `nodes` vertices (`nodes >= 3`).
    pub fn ring(nodes: u64) -> Result<Topology> {
        if nodes < 3 {
            return Err(Error::SideTooSmall { dim: 0, side: nodes });
        }
        Ok(Topology {
            family: Family::Ring { nodes },
            nodes,
            edges: nodes,
            strides: Vec::new(),
            adj_offsets: Vec::new(),
            adj_targets: Vec::new(),
            cum_degrees: Vec::new(),
        })
    }

    /// k-dimensional hypercube on 2^k vertices (`1 <= k <= 30`).
    pub fn hypercube(bits: u32) -> Result<Topology> {
        if bits == 0 || bits > MAX_HYPERCUBE_BITS {
            return Err(Error::BadBitCount(bits as u64));
        }
        let nodes = 1u64 << bits;
        Ok(Topology {
            family: Family::Hypercube { bits },
            nodes,
            edges: nodes * bits as u64 / 2,
            strides: Vec::new(),
            adj_offsets: Vec::new(),
            adj_targets: Vec::new(),
            cum_degrees: Vec::new(),
        })
    }

    /// Explicit graph from adjacency lists. Validates symmetry, no self-loops,
    /// no parallel edges, and connectivity; O(|E|) total.
    pub fn explicit(adjacency: Vec<Vec<NodeId>>) -> Result<Topology> {
        let nodes = adjacency.len() as u64;
        if nodes == 0 {
            return Err(Error::BadDimensionCount(0));
        }
        let mut adj_offsets = Vec::with_capacity(adjacency.len() + 1);
        let mut adj_targets = Vec::new();
        adj_offsets.push(0usize);
        for (u, row) in adjacency.iter().enumerate() {
            let u = u as NodeId;
            let mut sorted = row.clone();
            sorted.sort_unstable();
            for pair in sorted.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::ParallelEdge { u, v: pair[0] });
                }
            }
            for &v in &sorted {
                if v >= nodes {
                    return Err(Error::NodeOutOfRange { id: v, nodes });
                }
                if v == u {
                    return Err(Error::SelfLoop(u));
                }
            }
            adj_targets.extend_from_slice(&sorted);
            adj_offsets.push(adj_targets.len());
        }
        // Symmetry: every directed arc must have its reverse.
        for u in 0..adjacency.len() {
            for &v in &adj_targets[adj_offsets[u]..adj_offsets[u + 1]] {
                let row = &adj_targets[adj_offsets[v as usize]..adj_offsets[v as usize + 1]];
                if row.binary_search(&(u as NodeId)).is_err() {
                    return Err(Error::Asymmetric {
                        from: u as NodeId,
                        to: v,
                    });
                }
            }
        }
        if adj_targets.len() % 2 != 0 {
            // Unreachable once symmetry holds; kept as a consistency check.
            return Err(Error::Asymmetric { from: 0, to: 0 });
        }
        let edges = (adj_targets.len() / 2) as u64;
        let mut cum_degrees = Vec::with_capacity(adjacency.len());
        let mut acc = 0u64;
        for u in 0..adjacency.len() {
            acc += (adj_offsets[u + 1] - adj_offsets[u]) as u64;
            cum_degrees.push(acc);
        }
        let topo = Topology {
            family: Family::Explicit,
            nodes,
            edges,
            strides: Vec::new(),
            adj_offsets,
            adj_targets,
            cum_degrees,
        };
        // Connectivity via BFS from node 0.
        if let Some(unreached) = topo.first_unreachable() {
            return Err(Error::Disconnected(unreached));
        }
        Ok(topo)
    }

    /// Parse an edge-list file: first non-comment line `A |E|`, then one
    /// `u v` pair per line, 0-indexed, whitespace-separated. Lines starting
    /// with '#' and blank lines are ignored.
    pub fn from_edge_list_str(text: &str) -> Result<Topology> {
        let mut header: Option<(u64, u64)> = None;
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let a = it.next();
            let b = it.next();
            let extra = it.next();
            let (Some(a), Some(b), None) = (a, b, extra) else {
                return Err(Error::GraphFileFormat {
                    line: idx + 1,
                    reason: "expected exactly two whitespace-separated integers".into(),
                });
            };
            let parse = |s: &str| -> Result<u64> {
                s.parse::<u64>().map_err(|_| Error::GraphFileFormat {
                    line: idx + 1,
                    reason: format!("`{s}` is not a non-negative integer"),
                })
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if header.is_none() {
                header = Some((a, b));
            } else {
                edges.push((a, b));
            }
        }
        let Some((nodes, edge_count)) = header else {
            return Err(Error::GraphFileFormat {
                line: 0,
                reason: "missing `A |E|` header line".into(),
            });
        };
        if edges.len() as u64 != edge_count {
            return Err(Error::GraphFileFormat {
                line: 0,
                reason: format!(
                    "header declares {edge_count} edges but file lists {}",
                    edges.len()
                ),
            });
        }
        let mut adjacency = vec![Vec::new(); nodes as usize];
        for (u, v) in edges {
            if u >= nodes || v >= nodes {
                return Err(Error::NodeOutOfRange {
                    id: u.max(v),
                    nodes,
                });
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        Topology::explicit(adjacency)
    }

    /// Load an edge-list file from disk (format of [`Topology::from_edge_list_str`]).
    pub fn from_edge_list_file(path: &std::path::Path) -> Result<Topology> {
        let text = std::fs::read_to_string(path)?;
        Topology::from_edge_list_str(&text)
    }

    /// Sample a uniformly random connected simple `degree`-regular graph via
    /// the pairing model with rejection. `require_non_bipartite` additionally
    /// rejects bipartite samples.
    pub fn random_regular(
        nodes: u64,
        degree: u64,
        rng: &mut impl Rng,
        require_non_bipartite: bool,
    ) -> Result<Topology> {
        if degree == 0 || degree >= nodes {
            return Err(Error::param("degree", "must satisfy 1 <= degree < nodes"));
        }
        if nodes * degree % 2 != 0 {
            return Err(Error::param("nodes", "nodes * degree must be even"));
        }
        let mut stubs: Vec<NodeId> = (0..nodes)
            .flat_map(|v| std::iter::repeat(v).take(degree as usize))
            .collect();
        'attempt: for _ in 0..10_000 {
            // Fisher-Yates shuffle; one draw per position.
            for i in (1..stubs.len()).rev() {
                let j = rng.random_range(0..=i);
                stubs.swap(i, j);
            }
            let mut adjacency = vec![Vec::with_capacity(degree as usize); nodes as usize];
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v || adjacency[u as usize].contains(&v) {
                    continue 'attempt;
                }
                adjacency[u as usize].push(v);
                adjacency[v as usize].push(u);
            }
            match Topology::explicit(adjacency) {
                Ok(t) => {
                    if require_non_bipartite && t.is_bipartite() {
                        continue 'attempt;
                    }
                    return Ok(t);
                }
                Err(Error::Disconnected(_)) => continue 'attempt,
                Err(e) => return Err(e),
            }
        }
        Err(Error::param(
            "degree",
            "pairing model failed to produce a valid graph in 10000 attempts",
        ))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Node count A.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Edge count |E|.
    pub fn edges(&self) -> u64 {
        self.edges
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.nodes {
            return Err(Error::NodeOutOfRange {
                id: v,
                nodes: self.nodes,
            });
        }
        Ok(())
    }

    pub fn degree(&self, v: NodeId) -> Result<u64> {
        self.check_node(v)?;
        Ok(self.degree_unchecked(v))
    }

    pub(crate) fn degree_unchecked(&self, v: NodeId) -> u64 {
        match &self.family {
            Family::TorusKd { sides } => 2 * sides.len() as u64,
            Family::Ring { .. } => 2,
            Family::Hypercube { bits } => *bits as u64,
            Family::Explicit => {
                let v = v as usize;
                (self.adj_offsets[v + 1] - self.adj_offsets[v]) as u64
            }
        }
    }

    /// All neighbors of `v` in ascending node-id order.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let mut out = Vec::new();
        self.neighbors_into(v, &mut out);
        Ok(out)
    }

    /// Neighbor computation without per-call allocation. `v` must be valid.
    pub(crate) fn neighbors_into(&self, v: NodeId, out: &mut Vec<NodeId>) {
        out.clear();
        if let Family::Explicit = self.family {
            let vu = v as usize;
            out.extend_from_slice(&self.adj_targets[self.adj_offsets[vu]..self.adj_offsets[vu + 1]]);
            return;
        }
        let mut buf = [0u64; NEIGHBOR_BUF];
        let len = self.neighbors_buf(v, &mut buf);
        out.extend_from_slice(&buf[..len]);
    }

    /// Writes the sorted neighbor ids of `v` into `buf`, returning the count.
    /// Parametric families only (their degrees fit the stack buffer).
    fn neighbors_buf(&self, v: NodeId, buf: &mut [u64; NEIGHBOR_BUF]) -> usize {
        debug_assert!(v < self.nodes);
        let len = match &self.family {
            Family::TorusKd { sides } => {
                let mut len = 0;
                let mut rem = v;
                for (d, &side) in sides.iter().enumerate() {
                    let coord = rem % side;
                    rem /= side;
                    let stride = self.strides[d];
                    let up = if coord + 1 == side { 0 } else { coord + 1 };
                    let down = if coord == 0 { side - 1 } else { coord - 1 };
                    buf[len] = v - coord * stride + up * stride;
                    buf[len + 1] = v - coord * stride + down * stride;
                    len += 2;
                }
                len
            }
            Family::Ring { nodes } => {
                buf[0] = if v + 1 == *nodes { 0 } else { v + 1 };
                buf[1] = if v == 0 { *nodes - 1 } else { v - 1 };
                2
            }
            Family::Hypercube { bits } => {
                for b in 0..*bits {
                    buf[b as usize] = v ^ (1u64 << b);
                }
                *bits as usize
            }
            Family::Explicit => unreachable!("explicit graphs read the CSR rows directly"),
        };
        buf[..len].sort_unstable();
        len
    }

    /// One uniform random-walk step from `v`: draws exactly one
    /// `random_range(0..deg)` and returns the neighbor at that index of the
    /// ascending neighbor list.
    pub fn random_step(&self, v: NodeId, rng: &mut impl Rng) -> Result<NodeId> {
        self.check_node(v)?;
        Ok(self.random_step_unchecked(v, rng))
    }

    pub(crate) fn random_step_unchecked(&self, v: NodeId, rng: &mut impl Rng) -> NodeId {
        if let Family::Explicit = self.family {
            let vu = v as usize;
            let row = &self.adj_targets[self.adj_offsets[vu]..self.adj_offsets[vu + 1]];
            return row[rng.random_range(0..row.len())];
        }
        let mut buf = [0u64; NEIGHBOR_BUF];
        let len = self.neighbors_buf(v, &mut buf);
        buf[rng.random_range(0..len)]
    }

    /// Sample a node with probability deg(v)/2|E| (uniform on regular
    /// families). One draw.
    pub fn stationary_sample(&self, rng: &mut impl Rng) -> NodeId {
        match &self.family {
            Family::Explicit => {
                let r = rng.random_range(0..2 * self.edges);
                // First index whose cumulative degree exceeds r.
                match self.cum_degrees.binary_search(&(r + 1)) {
                    Ok(i) => i as NodeId,
                    Err(i) => i as NodeId,
                }
            }
            _ => rng.random_range(0..self.nodes),
        }
    }

    /// Exact degree summary.
    pub fn graph_stats(&self) -> GraphStats {
        let (min_degree, max_degree) = match &self.family {
            Family::Explicit => {
                let mut min = u64::MAX;
                let mut max = 0;
                for v in 0..self.nodes {
                    let d = self.degree_unchecked(v);
                    min = min.min(d);
                    max = max.max(d);
                }
                (min, max)
            }
            _ => {
                let d = self.degree_unchecked(0);
                (d, d)
            }
        };
        GraphStats {
            nodes: self.nodes,
            edges: self.edges,
            min_degree,
            max_degree,
        }
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<u64> {
        let stats = self.graph_stats();
        (stats.min_degree == stats.max_degree).then_some(stats.min_degree)
    }

    /// Whether the graph admits a proper 2-coloring. Closed-form for the
    /// parametric families, BFS for explicit graphs.
    pub fn is_bipartite(&self) -> bool {
        match &self.family {
            Family::TorusKd { sides } => sides.iter().all(|s| s % 2 == 0),
            Family::Ring { nodes } => nodes % 2 == 0,
            Family::Hypercube { .. } => true,
            Family::Explicit => {
                let n = self.nodes as usize;
                let mut color = vec![u8::MAX; n];
                let mut queue = std::collections::VecDeque::new();
                color[0] = 0;
                queue.push_back(0usize);
                while let Some(u) = queue.pop_front() {
                    for &w in &self.adj_targets[self.adj_offsets[u]..self.adj_offsets[u + 1]] {
                        let w = w as usize;
                        if color[w] == u8::MAX {
                            color[w] = 1 - color[u];
                            queue.push_back(w);
                        } else if color[w] == color[u] {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Torus coordinates of `v` under the mixed-radix bijection.
    pub fn torus_coords(&self, v: NodeId) -> Result<Vec<u64>> {
        self.check_node(v)?;
        let Family::TorusKd { sides } = &self.family else {
            return Err(Error::param("topology", "not a torus"));
        };
        let mut rem = v;
        Ok(sides
            .iter()
            .map(|&s| {
                let c = rem % s;
                rem /= s;
                c
            })
            .collect())
    }

    /// Node id of a torus coordinate tuple.
    pub fn torus_node(&self, coords: &[u64]) -> Result<NodeId> {
        let Family::TorusKd { sides } = &self.family else {
            return Err(Error::param("topology", "not a torus"));
        };
        if coords.len() != sides.len() {
            return Err(Error::param("coords", "dimension mismatch"));
        }
        let mut id = 0u64;
        for (d, (&c, &s)) in coords.iter().zip(sides.iter()).enumerate() {
            if c >= s {
                return Err(Error::param("coords", format!("coordinate {d} out of range")));
            }
            id += c * self.strides[d];
        }
        Ok(id)
    }

    /// Shift a torus node by `delta` (possibly negative) along `dim`, wrapping.
    pub fn torus_shift(&self, v: NodeId, dim: usize, delta: i64) -> Result<NodeId> {
        self.check_node(v)?;
        let Family::TorusKd { sides } = &self.family else {
            return Err(Error::param("topology", "not a torus"));
        };
        if dim >= sides.len() {
            return Err(Error::param("dim", "dimension out of range"));
        }
        let side = sides[dim] as i64;
        let stride = self.strides[dim];
        let coord = (v / stride) % sides[dim];
        let shifted = (coord as i64 + delta).rem_euclid(side) as u64;
        Ok(v - coord * stride + shifted * stride)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let n = self.nodes as usize;
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        let mut count = 1usize;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj_targets[self.adj_offsets[u]..self.adj_offsets[u + 1]] {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count == n {
            None
        } else {
            seen.iter().position(|s| !s).map(|i| i as NodeId)
        }
    }
}

/// Star graph K_{1,n}: node 0 is the hub. Used in tests and degree-estimation
/// examples.
pub fn star(leaves: u64) -> Result<Topology> {
    let mut adjacency = vec![Vec::new(); (leaves + 1) as usize];
    for leaf in 1..=leaves {
        adjacency[0].push(leaf);
        adjacency[leaf as usize].push(0);
    }
    Topology::explicit(adjacency)
}

/// Complete graph on `n` vertices.
pub fn complete(n: u64) -> Result<Topology> {
    let mut adjacency = vec![Vec::new(); n as usize];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                adjacency[u as usize].push(v);
            }
        }
    }
    Topology::explicit(adjacency)
}
