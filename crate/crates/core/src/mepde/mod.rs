//! A multi-objective evolutionary embedder with local-search refinement,
//! and a greedy baseline built from the same seeding procedure.
//!
//! A solve runs in four stages:
//!
//! 1. the virtual nodes are ordered breadth-first from the most demanding
//!    node ([`vn_bfs_order`]);
//! 2. the initial population is collected by a bounded backtracking
//!    search, sweeping every root host at increasing hop limits
//!    ([`Instance::init_population`]);
//! 3. every individual is repaired and improved by local search
//!    ([`Instance::optimize`]);
//! 4. for a fixed number of generations, offspring are produced by
//!    roulette selection, single-point crossover and mutation, optimized,
//!    and merged with the parents through non-dominated sorting and
//!    crowding truncation.
//!
//! The cheapest member of the final non-dominated front is returned. The
//! substrate is never modified; admission is left to the caller.

mod chromosome;
mod embed;
mod local_search;
mod operators;

use std::cell::Cell;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{NetError, Residuals, SubstrateNetwork, VNRequest, VNodeId, VirtualNetwork};
use crate::objectives::{evaluate_on, FragmentationParams};
use crate::pareto::{best_solution, environmental_selection, rank_population, RankedIndividual};

pub use chromosome::{validate, Chromosome, Violation};
pub use embed::{vn_bfs_order, BacktrackBudget};

/// Upper bound on backtracking steps for one embedding attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktrackLimit {
    /// A multiple of the number of virtual nodes.
    PerVirtualNode(u32),
    Fixed(u32),
}

impl BacktrackLimit {
    pub fn for_size(self, virtual_nodes: usize) -> u32 {
        match self {
            BacktrackLimit::PerVirtualNode(k) => k.saturating_mul(virtual_nodes as u32),
            BacktrackLimit::Fixed(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("mutation probability {0} outside [0, 1]")]
    MutationProbability(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub iterations_max: usize,
    pub population_size: usize,
    pub max_backtrack: BacktrackLimit,
    pub hops_max: usize,
    pub fragmentation: FragmentationParams,
    pub mutation_probability: f64,
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            iterations_max: 5,
            population_size: 10,
            max_backtrack: BacktrackLimit::PerVirtualNode(3),
            hops_max: 2,
            fragmentation: FragmentationParams::default(),
            mutation_probability: 0.1,
            seed: 0,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.iterations_max == 0 {
            return Err(ParamError::NotPositive("iterations_max"));
        }
        if self.population_size == 0 {
            return Err(ParamError::NotPositive("population_size"));
        }
        if self.max_backtrack.for_size(1) == 0 {
            return Err(ParamError::NotPositive("max_backtrack"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(ParamError::MutationProbability(self.mutation_probability));
        }
        Ok(())
    }
}

/// Why a request could not be embedded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// No substrate node has enough CPU for the root virtual node.
    NoRootHost,
    /// The backtracking search found no mapping within its hop and
    /// backtrack limits.
    SearchExhausted,
    /// The request graph itself is unusable.
    InvalidRequest,
}

impl Rejection {
    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::NoRootHost => "no_root_host",
            Rejection::SearchExhausted => "search_exhausted",
            Rejection::InvalidRequest => "invalid_request",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub generations: usize,
    pub evaluations: u64,
    pub backtracks: u64,
    /// Population size after the initial sweep.
    pub population_size: usize,
    /// Cheapest rank-0 cost of the population after seeding and after
    /// each generation.
    pub best_cost_history: Vec<f64>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub success: bool,
    pub mapping: Option<Chromosome>,
    pub rejection: Option<Rejection>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    fn rejected(reason: Rejection, stats: SolveStats) -> Self {
        Self {
            success: false,
            mapping: None,
            rejection: Some(reason),
            stats,
        }
    }
}

/// One embedding problem: a substrate snapshot, the request graph, its
/// node ordering and the solver parameters. All search operators hang off
/// this type.
pub struct Instance<'a> {
    pub sn: &'a SubstrateNetwork,
    pub vn: &'a VirtualNetwork,
    /// Residuals of `sn` when the instance was created.
    pub base: Residuals,
    pub order: Vec<VNodeId>,
    /// Position of every virtual node in `order`.
    position: Vec<usize>,
    pub params: SolveParams,
    evaluations: Cell<u64>,
    backtracks: Cell<u64>,
}

impl<'a> Instance<'a> {
    pub fn new(
        sn: &'a SubstrateNetwork,
        vn: &'a VirtualNetwork,
        params: SolveParams,
    ) -> Result<Self, NetError> {
        let order = vn_bfs_order(vn)?;
        let mut position = vec![0; order.len()];
        for (i, v) in order.iter().enumerate() {
            position[v.index()] = i;
        }
        Ok(Self {
            sn,
            vn,
            base: sn.residuals(),
            order,
            position,
            params,
            evaluations: Cell::new(0),
            backtracks: Cell::new(0),
        })
    }

    pub fn position(&self, v: VNodeId) -> usize {
        self.position[v.index()]
    }

    pub fn backtrack_limit(&self) -> u32 {
        self.params.max_backtrack.for_size(self.vn.node_count())
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }

    pub fn backtracks(&self) -> u64 {
        self.backtracks.get()
    }

    fn count_evaluation(&self) {
        self.evaluations.set(self.evaluations.get() + 1);
    }

    fn count_backtrack(&self) {
        self.backtracks.set(self.backtracks.get() + 1);
    }

    /// Evaluates a feasible chromosome against the instance snapshot and
    /// stores its objectives.
    pub fn evaluate(&self, ch: &mut Chromosome) -> bool {
        self.count_evaluation();
        match evaluate_on(
            self.sn,
            &self.base,
            self.vn,
            &ch.mapping,
            self.params.fragmentation,
        ) {
            Ok(obj) => {
                ch.objectives = Some(obj);
                ch.feasible = true;
                true
            }
            Err(_) => {
                ch.objectives = None;
                ch.feasible = false;
                false
            }
        }
    }

    fn stats(&self) -> SolveStats {
        SolveStats {
            evaluations: self.evaluations(),
            backtracks: self.backtracks(),
            ..SolveStats::default()
        }
    }
}

fn objectives_of(pop: &[Chromosome]) -> Vec<RankedIndividual> {
    let objs: Vec<_> = pop
        .iter()
        .map(|c| c.objectives.expect("population members are evaluated"))
        .collect();
    rank_population(&objs)
}

fn best_rank0_cost(ranked: &[RankedIndividual]) -> f64 {
    ranked
        .iter()
        .filter(|r| r.rank == 0)
        .map(|r| r.objectives.cost)
        .fold(f64::INFINITY, f64::min)
}

/// Runs the full evolutionary embedder. Deterministic for a given
/// `params.seed`.
pub fn solve(sn: &SubstrateNetwork, vnr: &VNRequest, params: &SolveParams) -> SolveOutcome {
    solve_with(sn, vnr, params, |_, _| {})
}

/// As [`solve`], handing the population to `observer` after seeding
/// (generation 0) and after every generation.
pub fn solve_with<F>(
    sn: &SubstrateNetwork,
    vnr: &VNRequest,
    params: &SolveParams,
    mut observer: F,
) -> SolveOutcome
where
    F: FnMut(usize, &[Chromosome]),
{
    let started = Instant::now();
    let Ok(inst) = Instance::new(sn, &vnr.vn, *params) else {
        return SolveOutcome::rejected(Rejection::InvalidRequest, SolveStats::default());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let seeded = inst.init_population();
    if seeded.is_empty() {
        let mut stats = inst.stats();
        stats.elapsed = started.elapsed();
        return SolveOutcome::rejected(inst.empty_reason(), stats);
    }
    // the sweep may come up short; the population never regrows
    let size = seeded.len();

    let mut pop: Vec<Chromosome> = seeded
        .into_iter()
        .map(|c| inst.optimize(c))
        .filter(|c| c.feasible)
        .collect();
    if pop.is_empty() {
        let mut stats = inst.stats();
        stats.elapsed = started.elapsed();
        return SolveOutcome::rejected(Rejection::SearchExhausted, stats);
    }
    let mut ranked = objectives_of(&pop);
    let mut history = vec![best_rank0_cost(&ranked)];
    observer(0, &pop);

    for generation in 1..=params.iterations_max {
        let mut offspring = Vec::with_capacity(size);
        while offspring.len() < size {
            let a = inst.select_parent(&ranked, &mut rng);
            let b = inst.select_parent(&ranked, &mut rng);
            let child = inst.crossover(&pop[a], &pop[b], &mut rng);
            offspring.push(inst.mutate(child, &pop, &mut rng));
        }

        let mut combined = pop;
        combined.extend(
            offspring
                .into_iter()
                .map(|c| inst.optimize(c))
                .filter(|c| c.feasible),
        );
        let combined_ranks = objectives_of(&combined);
        let keep = environmental_selection(&combined_ranks, size.min(combined.len()))
            .expect("selection size bounded by combined population");
        let mut slots: Vec<Option<Chromosome>> = combined.into_iter().map(Some).collect();
        pop = keep
            .iter()
            .map(|&i| slots[i].take().expect("indices are distinct"))
            .collect();

        ranked = objectives_of(&pop);
        history.push(best_rank0_cost(&ranked));
        observer(generation, &pop);
    }

    let best = best_solution(&ranked).expect("population is non-empty");
    let mut stats = inst.stats();
    stats.generations = params.iterations_max;
    stats.population_size = size;
    stats.best_cost_history = history;
    stats.elapsed = started.elapsed();
    SolveOutcome {
        success: true,
        mapping: Some(pop.swap_remove(best)),
        rejection: None,
        stats,
    }
}

/// Baseline: the first chromosome the seeding sweep finds, without local
/// search or evolution.
pub fn greedy_solve(sn: &SubstrateNetwork, vnr: &VNRequest, params: &SolveParams) -> SolveOutcome {
    let started = Instant::now();
    let params = SolveParams {
        population_size: 1,
        ..*params
    };
    let Ok(inst) = Instance::new(sn, &vnr.vn, params) else {
        return SolveOutcome::rejected(Rejection::InvalidRequest, SolveStats::default());
    };
    let mut first = inst.init_population().into_iter().next();
    let mut stats = inst.stats();
    match first.as_mut() {
        Some(ch) => {
            inst.evaluate(ch);
            stats.evaluations = inst.evaluations();
            stats.population_size = 1;
            stats.best_cost_history = vec![ch.objectives.map_or(f64::INFINITY, |o| o.cost)];
            stats.elapsed = started.elapsed();
            SolveOutcome {
                success: true,
                mapping: first,
                rejection: None,
                stats,
            }
        }
        None => {
            stats.elapsed = started.elapsed();
            SolveOutcome::rejected(inst.empty_reason(), stats)
        }
    }
}

/// An embedding algorithm the simulator can drive.
pub trait Solver {
    fn name(&self) -> &'static str;

    fn solve(&self, sn: &SubstrateNetwork, vnr: &VNRequest, seed: u64) -> SolveOutcome;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Mepde {
    pub params: SolveParams,
}

impl Solver for Mepde {
    fn name(&self) -> &'static str {
        "mepde"
    }

    fn solve(&self, sn: &SubstrateNetwork, vnr: &VNRequest, seed: u64) -> SolveOutcome {
        solve(
            sn,
            vnr,
            &SolveParams {
                seed,
                ..self.params
            },
        )
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy {
    pub params: SolveParams,
}

impl Solver for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn solve(&self, sn: &SubstrateNetwork, vnr: &VNRequest, seed: u64) -> SolveOutcome {
        greedy_solve(
            sn,
            vnr,
            &SolveParams {
                seed,
                ..self.params
            },
        )
    }
}
