//! Seeded Waxman topologies and Poisson request workloads.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{NodeId, Position, SubstrateNetwork, VNRequest, VNodeId, VirtualNetwork};

/// CPU capacities of the two server models substrate nodes are drawn from.
pub const SUBSTRATE_CPU_CHOICES: [u64; 2] = [3720, 5320];
/// CPU demands virtual nodes are drawn from.
pub const VIRTUAL_CPU_CHOICES: [u64; 4] = [2500, 2000, 1000, 500];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("cannot place {links} links on {nodes} nodes")]
    LinkCount { nodes: usize, links: usize },
    #[error("invalid parameter: {0}")]
    Param(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaxmanParams {
    pub node_count: usize,
    pub link_count: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Side of the square nodes are placed on.
    pub plane_size: f64,
}

impl WaxmanParams {
    pub fn new(node_count: usize, link_count: usize) -> Self {
        Self {
            node_count,
            link_count,
            alpha: 0.5,
            beta: 0.2,
            plane_size: 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let n = self.node_count;
        if n == 0 {
            return Err(WorkloadError::Param("node_count must be positive"));
        }
        if self.link_count + 1 < n || self.link_count > n * (n - 1) / 2 {
            return Err(WorkloadError::LinkCount {
                nodes: n,
                links: self.link_count,
            });
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(WorkloadError::Param("alpha must lie in (0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(WorkloadError::Param("beta must lie in (0, 1]"));
        }
        if !(self.plane_size > 0.0 && self.plane_size.is_finite()) {
            return Err(WorkloadError::Param("plane_size must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadParams {
    pub request_count: usize,
    pub vn_size_min: usize,
    pub vn_size_max: usize,
    pub connectivity: f64,
    pub cpu_choices: Vec<u64>,
    pub bw_min: u64,
    pub bw_max: u64,
    /// Mean arrivals per time unit.
    pub arrival_rate: f64,
    pub lifetime_min: f64,
    pub lifetime_max: f64,
    pub seed: u64,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        Self {
            request_count: 1000,
            vn_size_min: 2,
            vn_size_max: 20,
            connectivity: 0.5,
            cpu_choices: VIRTUAL_CPU_CHOICES.to_vec(),
            bw_min: 1,
            bw_max: 50,
            arrival_rate: 0.1,
            lifetime_min: 300.0,
            lifetime_max: 700.0,
            seed: 0,
        }
    }
}

impl WorkloadParams {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.vn_size_min == 0 || self.vn_size_min > self.vn_size_max {
            return Err(WorkloadError::Param("vn size range"));
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return Err(WorkloadError::Param("connectivity must lie in (0, 1]"));
        }
        if self.cpu_choices.is_empty() || self.cpu_choices.contains(&0) {
            return Err(WorkloadError::Param(
                "cpu choices must be non-empty and positive",
            ));
        }
        if self.bw_min == 0 || self.bw_min > self.bw_max {
            return Err(WorkloadError::Param("bandwidth range"));
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(WorkloadError::Param("arrival rate must be positive"));
        }
        if !(self.lifetime_min > 0.0
            && self.lifetime_min <= self.lifetime_max
            && self.lifetime_max.is_finite())
        {
            return Err(WorkloadError::Param("lifetime range"));
        }
        Ok(())
    }
}

/// Rounds to the micro-unit grid so coordinates survive a 6-decimal text
/// round trip unchanged.
fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Node positions and undirected edges as index pairs.
type Layout = (Vec<Position>, Vec<(usize, usize)>);

/// Node positions and undirected edges `(a, b)` with `a < b`, sorted.
///
/// A random spanning tree joins each node, in shuffled order, to an
/// earlier node drawn with Waxman weights. The remaining links are a
/// weighted sample without replacement over all other pairs
/// (Efraimidis–Spirakis keys), so the link count is exact.
fn waxman_graph<R: Rng + ?Sized>(
    params: &WaxmanParams,
    rng: &mut R,
) -> Result<Layout, WorkloadError> {
    params.validate()?;
    let n = params.node_count;
    let side = params.plane_size;
    let pos: Vec<Position> = (0..n)
        .map(|_| Position {
            x: quantize(rng.random_range(0.0..side)),
            y: quantize(rng.random_range(0.0..side)),
        })
        .collect();

    let dist =
        |a: usize, b: usize| ((pos[a].x - pos[b].x).powi(2) + (pos[a].y - pos[b].y).powi(2)).sqrt();
    let mut max_dist = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            max_dist = max_dist.max(dist(a, b));
        }
    }
    let weight = |a: usize, b: usize| {
        if max_dist > 0.0 {
            params.alpha * (-dist(a, b) / (params.beta * max_dist)).exp()
        } else {
            params.alpha
        }
    };

    let mut linked = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(params.link_count);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    for i in 1..n {
        let u = perm[i];
        let total: f64 = perm[..i].iter().map(|&w| weight(u, w)).sum();
        let mut pick = rng.random_range(0.0..total);
        let mut w = perm[i - 1];
        for &cand in &perm[..i] {
            pick -= weight(u, cand);
            if pick < 0.0 {
                w = cand;
                break;
            }
        }
        linked[u][w] = true;
        linked[w][u] = true;
        edges.push((u.min(w), u.max(w)));
    }

    let extra = params.link_count - edges.len();
    if extra > 0 {
        let mut keyed: Vec<(f64, usize, usize)> = Vec::new();
        for (a, row) in linked.iter().enumerate() {
            for (b, &done) in row.iter().enumerate().skip(a + 1) {
                if !done {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    keyed.push((u.ln() / weight(a, b), a, b));
                }
            }
        }
        keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        edges.extend(keyed[..extra].iter().map(|&(_, a, b)| (a, b)));
    }
    edges.sort_unstable();
    Ok((pos, edges))
}

fn pick<R: Rng + ?Sized>(choices: &[u64], rng: &mut R) -> u64 {
    choices[rng.random_range(0..choices.len())]
}

/// A connected Waxman substrate with CPU capacities drawn from
/// `cpu_choices` and link bandwidths uniform in `bw`.
pub fn waxman_substrate<R: Rng + ?Sized>(
    params: &WaxmanParams,
    cpu_choices: &[u64],
    bw: RangeInclusive<u64>,
    rng: &mut R,
) -> Result<SubstrateNetwork, WorkloadError> {
    if cpu_choices.is_empty() {
        return Err(WorkloadError::Param("cpu choices must be non-empty"));
    }
    if bw.is_empty() {
        return Err(WorkloadError::Param("bandwidth range"));
    }
    let (pos, edges) = waxman_graph(params, rng)?;
    let mut sn = SubstrateNetwork::new();
    for p in pos {
        let cpu = pick(cpu_choices, rng);
        sn.add_node(cpu, p);
    }
    for (a, b) in edges {
        let cap = rng.random_range(bw.clone());
        sn.add_link(NodeId::from(a), NodeId::from(b), cap)
            .expect("generated edges are simple");
    }
    Ok(sn)
}

/// Number of links a virtual network of `size` nodes gets at the given
/// connectivity: `round(connectivity * size * (size - 1) / 2)`, clamped to
/// a spanning tree at least and a complete graph at most.
pub fn virtual_link_count(size: usize, connectivity: f64) -> usize {
    if size < 2 {
        return 0;
    }
    let max = size * (size - 1) / 2;
    let want = (connectivity * max as f64).round() as usize;
    want.clamp(size - 1, max)
}

/// A connected Waxman virtual network with CPU demands drawn from
/// `cpu_choices` and bandwidth demands uniform in `bw`.
///
/// Panics when `size` is zero, `cpu_choices` is empty or contains zero, or
/// `bw` starts at zero.
pub fn waxman_virtual<R: Rng + ?Sized>(
    size: usize,
    connectivity: f64,
    cpu_choices: &[u64],
    bw: RangeInclusive<u64>,
    rng: &mut R,
) -> VirtualNetwork {
    let params = WaxmanParams::new(size, virtual_link_count(size, connectivity));
    let (pos, edges) = waxman_graph(&params, rng).expect("virtual link count is always attainable");
    let mut vn = VirtualNetwork::new();
    for p in pos {
        let cpu = pick(cpu_choices, rng);
        vn.add_node(cpu, p).expect("cpu choices are positive");
    }
    for (a, b) in edges {
        let demand = rng.random_range(bw.clone());
        vn.add_link(VNodeId::from(a), VNodeId::from(b), demand)
            .expect("bandwidth demands are positive");
    }
    vn
}

/// Requests with exponential inter-arrival times, uniform lifetimes and
/// uniform sizes, sorted by arrival. Seeded from `params.seed`.
pub fn generate_workload(params: &WorkloadParams) -> Result<Vec<VNRequest>, WorkloadError> {
    generate_workload_with(params, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

/// As [`generate_workload`], drawing from `rng`.
pub fn generate_workload_with<R: Rng + ?Sized>(
    params: &WorkloadParams,
    rng: &mut R,
) -> Result<Vec<VNRequest>, WorkloadError> {
    params.validate()?;
    let gap = Exp::new(params.arrival_rate)
        .map_err(|_| WorkloadError::Param("arrival rate must be positive"))?;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(params.request_count);
    for _ in 0..params.request_count {
        t += gap.sample(rng);
        let lifetime = if params.lifetime_min < params.lifetime_max {
            rng.random_range(params.lifetime_min..=params.lifetime_max)
        } else {
            params.lifetime_min
        };
        let size = rng.random_range(params.vn_size_min..=params.vn_size_max);
        let vn = waxman_virtual(
            size,
            params.connectivity,
            &params.cpu_choices,
            params.bw_min..=params.bw_max,
            rng,
        );
        out.push(VNRequest::new(vn, t, lifetime).expect("generated requests are valid"));
    }
    Ok(out)
}
