//! Embedding revenue and cost, substrate fragmentation, and the
//! two-objective evaluation used by the evolutionary search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{
    components_within, Mapping, NetError, NodeId, Residuals, SubstrateNetwork, VirtualNetwork,
};

/// The minimized objective pair of one embedding.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub cost: f64,
    pub fragmentation: f64,
}

impl ObjectiveVector {
    pub fn new(cost: f64, fragmentation: f64) -> Self {
        Self {
            cost,
            fragmentation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fragmentation exponent must be at least 2, got {0}")]
pub struct BadExponent(pub u32);

/// Exponent of the fragmentation measure. Larger values suppress the
/// influence of small fragments next to one large fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentationParams {
    q: u32,
}

impl FragmentationParams {
    pub fn new(q: u32) -> Result<Self, BadExponent> {
        if q < 2 {
            return Err(BadExponent(q));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }
}

impl Default for FragmentationParams {
    fn default() -> Self {
        Self { q: 2 }
    }
}

/// Sum of demanded CPU and bandwidth while the request is alive.
pub fn revenue(vn: &VirtualNetwork, active: bool) -> u64 {
    if !active {
        return 0;
    }
    vn.cpu_total() + vn.bw_total()
}

/// Substrate resources held by an embedding: CPU plus bandwidth times path
/// length for every virtual link. Co-located links cost nothing.
pub fn cost(vn: &VirtualNetwork, mapping: &Mapping, active: bool) -> Result<u64, NetError> {
    for v in vn.nodes() {
        if mapping.hosts.get(v.id.index()).is_none() {
            return Err(NetError::UncoveredNode(v.id));
        }
    }
    let mut bw = 0;
    for l in vn.links() {
        let path = mapping
            .routes
            .get(l.id.index())
            .and_then(Option::as_ref)
            .ok_or(NetError::UncoveredLink(l.id))?;
        bw += l.bw_demand * path.len() as u64;
    }
    if !active {
        return Ok(0);
    }
    Ok(vn.cpu_total() + bw)
}

fn residual_sum_within(sn: &SubstrateNetwork, res: &Residuals, component: &[NodeId]) -> u64 {
    let mut member = vec![false; sn.node_count()];
    for n in component {
        member[n.index()] = true;
    }
    let cpu: u64 = component.iter().map(|n| res.cpu[n.index()]).sum();
    let bw: u64 = sn
        .links()
        .iter()
        .filter(|l| member[l.endpoints.0.index()] && member[l.endpoints.1.index()])
        .map(|l| res.bw[l.id.index()])
        .sum();
    cpu + bw
}

/// Residual CPU of the component's nodes plus residual bandwidth of links
/// with both endpoints inside it.
pub fn residual_sum(sn: &SubstrateNetwork, component: &[NodeId]) -> u64 {
    residual_sum_within(sn, &sn.residuals(), component)
}

/// Fragmentation of the residual state `res` on the topology of `sn`:
/// `1 - Σ rᵢ^q / (Σ rᵢ)^q` over residual fragments. A network with no
/// residual resources left counts as unfragmented.
pub fn snf_within(sn: &SubstrateNetwork, res: &Residuals, params: FragmentationParams) -> f64 {
    let sums: Vec<u64> = components_within(sn, &res.bw)
        .iter()
        .map(|c| residual_sum_within(sn, res, c))
        .collect();
    fragmentation_of(&sums, params)
}

/// The fragmentation formula applied to per-fragment residual sums.
pub fn fragmentation_of(fragment_sums: &[u64], params: FragmentationParams) -> f64 {
    let total: u64 = fragment_sums.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let q = params.q as i32;
    let total = total as f64;
    // shares keep the powers in [0, 1]
    let concentration: f64 = fragment_sums
        .iter()
        .filter(|&&r| r > 0)
        .map(|&r| (r as f64 / total).powi(q))
        .sum();
    (1.0 - concentration).max(0.0)
}

pub fn snf(sn: &SubstrateNetwork, params: FragmentationParams) -> f64 {
    snf_within(sn, &sn.residuals(), params)
}

/// Objective vector of `mapping`: instantaneous cost and the fragmentation
/// the substrate would show once the mapping is in place. Works on a copy
/// of the residuals; `sn` is never modified.
pub fn evaluate(
    sn: &SubstrateNetwork,
    vn: &VirtualNetwork,
    mapping: &Mapping,
    params: FragmentationParams,
) -> Result<ObjectiveVector, NetError> {
    evaluate_on(sn, &sn.residuals(), vn, mapping, params)
}

/// As [`evaluate`], against an explicit residual state.
pub fn evaluate_on(
    sn: &SubstrateNetwork,
    base: &Residuals,
    vn: &VirtualNetwork,
    mapping: &Mapping,
    params: FragmentationParams,
) -> Result<ObjectiveVector, NetError> {
    let debit = sn.debit(vn, mapping)?;
    let mut res = base.clone();
    res.apply(&debit)?;
    let cost = cost(vn, mapping, true)?;
    Ok(ObjectiveVector {
        cost: cost as f64,
        fragmentation: snf_within(sn, &res, params),
    })
}
