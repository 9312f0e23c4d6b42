//! Event-driven admission of a request workload against a substrate, and
//! the long-term metrics computed from the resulting trace.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mepde::{validate, Rejection, Solver, Violation};
use crate::netmodel::{AllocationId, NetError, SubstrateNetwork, VNRequest};
use crate::objectives::{cost, revenue, snf, FragmentationParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Departure,
    Arrival,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub request: usize,
}

impl Eq for Event {}

impl Ord for Event {
    /// Time, then departures before arrivals, then request id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.request.cmp(&other.request))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Substrate state right after one event was processed. It holds until
/// the next sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub event: EventKind,
    pub request: usize,
    /// Summed revenue of all active requests.
    pub revenue_rate: u64,
    /// Summed cost of all active requests.
    pub cost_rate: u64,
    pub snf: f64,
    pub cpu_utilization: f64,
    pub bw_utilization: f64,
    /// Substrate nodes hosting at least one virtual node.
    pub active_nodes: usize,
    pub active_requests: usize,
    pub cpu_allocated: u64,
    pub cpu_residual: u64,
    pub bw_allocated: u64,
    pub bw_residual: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RequestRecord {
    pub id: usize,
    pub arrival_time: f64,
    pub lifetime: f64,
    pub accepted: bool,
    /// Revenue the request would earn; earned only when accepted.
    pub revenue: u64,
    /// Cost of the accepted embedding, 0 when rejected.
    pub cost: u64,
    pub cpu_demand: u64,
    pub bw_demand: u64,
    pub solve_time: Duration,
    pub rejection: Option<Rejection>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub solver: String,
    pub seed: u64,
    /// Fragmentation of the substrate before the first event.
    pub initial_snf: f64,
    pub cpu_capacity: u64,
    pub bw_capacity: u64,
    pub samples: Vec<Sample>,
    pub records: Vec<RequestRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SimConfig {
    /// Base seed; each request is solved with a seed derived from it.
    pub seed: u64,
    pub fragmentation: FragmentationParams,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("workload is not sorted by arrival time at request {0}")]
    Unsorted(usize),
    #[error("solver returned an invalid mapping for request {request}: {}", list(.violations))]
    InvalidMapping {
        request: usize,
        violations: Vec<Violation>,
    },
    #[error("allocation of request {request} failed: {source}")]
    Allocation { request: usize, source: NetError },
}

fn list(vs: &[Violation]) -> String {
    vs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Seed handed to the solver for request `id`.
pub fn request_seed(base: u64, id: usize) -> u64 {
    base ^ (id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Active {
    allocation: AllocationId,
    revenue: u64,
    cost: u64,
}

/// Replays `workload` against `sn`. Every arrival is handed to `solver`
/// with the current residuals; accepted mappings are re-validated, then
/// allocated until departure. `sn` ends in its initial state when the run
/// completes.
pub fn run(
    sn: &mut SubstrateNetwork,
    workload: &[VNRequest],
    solver: &dyn Solver,
    config: &SimConfig,
) -> Result<SimTrace, SimError> {
    if let Some(i) =
        (1..workload.len()).find(|&i| workload[i].arrival_time < workload[i - 1].arrival_time)
    {
        return Err(SimError::Unsorted(i));
    }
    let mut trace = SimTrace {
        solver: solver.name().to_string(),
        seed: config.seed,
        initial_snf: snf(sn, config.fragmentation),
        cpu_capacity: sn.total_cpu_capacity(),
        bw_capacity: sn.total_bw_capacity(),
        samples: Vec::with_capacity(2 * workload.len()),
        records: Vec::with_capacity(workload.len()),
    };

    let mut queue: BinaryHeap<Reverse<Event>> = workload
        .iter()
        .enumerate()
        .map(|(request, r)| {
            Reverse(Event {
                time: r.arrival_time,
                kind: EventKind::Arrival,
                request,
            })
        })
        .collect();
    let mut active: Vec<Option<Active>> = (0..workload.len()).map(|_| None).collect();
    let mut revenue_rate = 0u64;
    let mut cost_rate = 0u64;
    let mut active_count = 0usize;

    while let Some(Reverse(ev)) = queue.pop() {
        let req = &workload[ev.request];
        match ev.kind {
            EventKind::Arrival => {
                let started = Instant::now();
                let outcome = solver.solve(sn, req, request_seed(config.seed, ev.request));
                let solve_time = started.elapsed();
                let mut record = RequestRecord {
                    id: ev.request,
                    arrival_time: req.arrival_time,
                    lifetime: req.lifetime,
                    accepted: false,
                    revenue: revenue(&req.vn, true),
                    cost: 0,
                    cpu_demand: req.vn.cpu_total(),
                    bw_demand: req.vn.bw_total(),
                    solve_time,
                    rejection: outcome.rejection,
                };
                match outcome.mapping.filter(|_| outcome.success) {
                    Some(ch) => {
                        let violations = validate(&ch, sn, &req.vn);
                        if !violations.is_empty() {
                            return Err(SimError::InvalidMapping {
                                request: ev.request,
                                violations,
                            });
                        }
                        let c = cost(&req.vn, &ch.mapping, true).map_err(|source| {
                            SimError::Allocation {
                                request: ev.request,
                                source,
                            }
                        })?;
                        let allocation = sn.allocate(&req.vn, &ch.mapping).map_err(|source| {
                            SimError::Allocation {
                                request: ev.request,
                                source,
                            }
                        })?;
                        record.accepted = true;
                        record.cost = c;
                        revenue_rate += record.revenue;
                        cost_rate += c;
                        active_count += 1;
                        active[ev.request] = Some(Active {
                            allocation,
                            revenue: record.revenue,
                            cost: c,
                        });
                        queue.push(Reverse(Event {
                            time: req.departure_time(),
                            kind: EventKind::Departure,
                            request: ev.request,
                        }));
                    }
                    None => {
                        record.rejection.get_or_insert(Rejection::SearchExhausted);
                    }
                }
                trace.records.push(record);
            }
            EventKind::Departure => {
                let a = active[ev.request]
                    .take()
                    .expect("departures follow acceptance");
                sn.release(a.allocation)
                    .map_err(|source| SimError::Allocation {
                        request: ev.request,
                        source,
                    })?;
                revenue_rate -= a.revenue;
                cost_rate -= a.cost;
                active_count -= 1;
            }
        }
        trace.samples.push(sample(
            sn,
            ev,
            revenue_rate,
            cost_rate,
            active_count,
            config,
        ));
    }
    trace.records.sort_by_key(|r| r.id);
    Ok(trace)
}

fn ratio(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

fn sample(
    sn: &SubstrateNetwork,
    ev: Event,
    revenue_rate: u64,
    cost_rate: u64,
    active_requests: usize,
    config: &SimConfig,
) -> Sample {
    let cpu_capacity = sn.total_cpu_capacity();
    let bw_capacity = sn.total_bw_capacity();
    let cpu_residual = sn.total_cpu_residual();
    let bw_residual = sn.total_bw_residual();
    Sample {
        time: ev.time,
        event: ev.kind,
        request: ev.request,
        revenue_rate,
        cost_rate,
        snf: snf(sn, config.fragmentation),
        cpu_utilization: ratio(cpu_capacity - cpu_residual, cpu_capacity),
        bw_utilization: ratio(bw_capacity - bw_residual, bw_capacity),
        active_nodes: sn
            .nodes()
            .iter()
            .filter(|n| n.cpu_residual < n.cpu_capacity)
            .count(),
        active_requests,
        cpu_allocated: cpu_capacity - cpu_residual,
        cpu_residual,
        bw_allocated: bw_capacity - bw_residual,
        bw_residual,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub solver: String,
    pub seed: u64,
    /// Length of the averaging window starting at time 0.
    pub horizon: f64,
    pub requests: usize,
    pub accepted: usize,
    pub long_term_avg_revenue: f64,
    pub long_term_avg_cost: f64,
    pub acceptance_ratio: f64,
    pub cpu_acceptance_ratio: f64,
    pub bw_acceptance_ratio: f64,
    pub revenue_cost_ratio: f64,
    pub long_term_avg_snf: f64,
    /// Mean wall-clock solve time in milliseconds, when recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_solve_time_ms: Option<f64>,
}

/// Time of the last event, which is the last departure for a completed
/// run.
pub fn end_time(trace: &SimTrace) -> f64 {
    trace.samples.last().map_or(0.0, |s| s.time)
}

/// Integral over `[0, horizon)` of the step function that takes
/// `initial` before the first sample and each sample's value until the
/// next one.
fn integrate(trace: &SimTrace, horizon: f64, initial: f64, value: impl Fn(&Sample) -> f64) -> f64 {
    let mut total = 0.0;
    let mut t = 0.0;
    let mut v = initial;
    for s in &trace.samples {
        let next = s.time.min(horizon);
        if next > t {
            total += v * (next - t);
            t = next;
        }
        if s.time >= horizon {
            return total;
        }
        v = value(s);
    }
    if horizon > t {
        total += v * (horizon - t);
    }
    total
}

/// Long-term averages over `[0, horizon)`, where `horizon` defaults to the
/// last event time. Revenue, cost and fragmentation are time integrals of
/// the sampled step functions divided by the horizon. Request counts
/// cover the requests arriving before the horizon.
pub fn long_term_metrics(trace: &SimTrace, horizon: Option<f64>) -> SimSummary {
    let horizon = horizon.unwrap_or_else(|| end_time(trace));
    let counted: Vec<&RequestRecord> = trace
        .records
        .iter()
        .filter(|r| r.arrival_time <= horizon)
        .collect();
    let accepted: Vec<&&RequestRecord> = counted.iter().filter(|r| r.accepted).collect();

    let revenue_area = integrate(trace, horizon, 0.0, |s| s.revenue_rate as f64);
    let cost_area = integrate(trace, horizon, 0.0, |s| s.cost_rate as f64);
    let snf_area = integrate(trace, horizon, trace.initial_snf, |s| s.snf);
    let per_time = |area: f64| if horizon > 0.0 { area / horizon } else { 0.0 };

    let cpu_all: u64 = counted.iter().map(|r| r.cpu_demand).sum();
    let bw_all: u64 = counted.iter().map(|r| r.bw_demand).sum();
    let cpu_ok: u64 = accepted.iter().map(|r| r.cpu_demand).sum();
    let bw_ok: u64 = accepted.iter().map(|r| r.bw_demand).sum();
    let solve_ms = counted
        .iter()
        .map(|r| r.solve_time.as_secs_f64() * 1e3)
        .sum::<f64>();

    SimSummary {
        solver: trace.solver.clone(),
        seed: trace.seed,
        horizon,
        requests: counted.len(),
        accepted: accepted.len(),
        long_term_avg_revenue: per_time(revenue_area),
        long_term_avg_cost: per_time(cost_area),
        acceptance_ratio: ratio(accepted.len() as u64, counted.len() as u64),
        cpu_acceptance_ratio: ratio(cpu_ok, cpu_all),
        bw_acceptance_ratio: ratio(bw_ok, bw_all),
        revenue_cost_ratio: if cost_area > 0.0 {
            revenue_area / cost_area
        } else {
            0.0
        },
        long_term_avg_snf: per_time(snf_area),
        mean_solve_time_ms: (!counted.is_empty()).then(|| solve_ms / counted.len() as f64),
    }
}
