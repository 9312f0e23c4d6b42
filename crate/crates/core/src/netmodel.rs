//! Substrate and virtual network graphs, residual accounting and
//! bandwidth-constrained path search.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(i: usize) -> Self {
                $name(i as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Substrate node identifier, dense from 0.
    NodeId,
    "s"
);
id_type!(
    /// Substrate link identifier, dense from 0.
    LinkId,
    "sl"
);
id_type!(
    /// Virtual node identifier, dense from 0 within one virtual network.
    VNodeId,
    "v"
);
id_type!(
    /// Virtual link identifier, dense from 0 within one virtual network.
    VLinkId,
    "vl"
);

/// Identifier of an allocation held by a [`SubstrateNetwork`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllocationId(pub u64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("unknown substrate node {0}")]
    UnknownNode(NodeId),
    #[error("unknown virtual node {0}")]
    UnknownVirtualNode(VNodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("parallel link between {0} and {1}")]
    ParallelLink(u32, u32),
    #[error("virtual demand must be positive")]
    ZeroDemand,
    #[error("virtual network is not connected")]
    Disconnected,
    #[error("lifetime must be positive, got {0}")]
    BadLifetime(f64),
    #[error("mapping does not cover virtual node {0}")]
    UncoveredNode(VNodeId),
    #[error("mapping does not route virtual link {0}")]
    UncoveredLink(VLinkId),
    #[error("insufficient CPU on substrate node {0}")]
    CpuExhausted(NodeId),
    #[error("insufficient bandwidth on substrate link {0}")]
    BandwidthExhausted(LinkId),
    #[error("allocation {0:?} is not active")]
    NotAllocated(AllocationId),
}

/// Planar position of a node, carried through topology files.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub cpu_capacity: u64,
    pub cpu_residual: u64,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstrateLink {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    pub bw_capacity: u64,
    pub bw_residual: u64,
}

impl SubstrateLink {
    /// The endpoint opposite to `n`.
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.endpoints.0 == n {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// Resource amounts a mapping draws from the substrate, aggregated per
/// node and per link.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Debit {
    pub cpu: BTreeMap<NodeId, u64>,
    pub bw: BTreeMap<LinkId, u64>,
}

impl Debit {
    pub fn cpu_total(&self) -> u64 {
        self.cpu.values().sum()
    }

    pub fn bw_total(&self) -> u64 {
        self.bw.values().sum()
    }
}

/// Detached copy of the residual state of a substrate network. Solvers
/// work on these instead of mutating the shared network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residuals {
    pub cpu: Vec<u64>,
    pub bw: Vec<u64>,
}

impl Residuals {
    /// Checks that `debit` fits, then subtracts it. Leaves `self`
    /// untouched on failure.
    pub fn apply(&mut self, debit: &Debit) -> Result<(), NetError> {
        for (&n, &amount) in &debit.cpu {
            if self.cpu[n.index()] < amount {
                return Err(NetError::CpuExhausted(n));
            }
        }
        for (&l, &amount) in &debit.bw {
            if self.bw[l.index()] < amount {
                return Err(NetError::BandwidthExhausted(l));
            }
        }
        for (&n, &amount) in &debit.cpu {
            self.cpu[n.index()] -= amount;
        }
        for (&l, &amount) in &debit.bw {
            self.bw[l.index()] -= amount;
        }
        Ok(())
    }

    pub fn claim_path(&mut self, path: &SubstratePath, amount: u64) {
        for l in &path.links {
            self.bw[l.index()] -= amount;
        }
    }

    pub fn unclaim_path(&mut self, path: &SubstratePath, amount: u64) {
        for l in &path.links {
            self.bw[l.index()] += amount;
        }
    }

    pub fn path_fits(&self, path: &SubstratePath, amount: u64) -> bool {
        path.links.iter().all(|l| self.bw[l.index()] >= amount)
    }
}

/// The physical network: undirected, capacitated, with mutable residuals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubstrateNetwork {
    nodes: Vec<SubstrateNode>,
    links: Vec<SubstrateLink>,
    /// Per node: incident (link, neighbor) pairs in ascending link order.
    adjacency: Vec<Vec<(LinkId, NodeId)>>,
    active: BTreeMap<AllocationId, Debit>,
    next_allocation: u64,
}

impl SubstrateNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, cpu_capacity: u64, pos: Position) -> NodeId {
        let id = NodeId::from(self.nodes.len());
        self.nodes.push(SubstrateNode {
            id,
            cpu_capacity,
            cpu_residual: cpu_capacity,
            pos,
        });
        self.adjacency.push(Vec::new());
        id
    }

    pub fn add_link(&mut self, a: NodeId, b: NodeId, bw_capacity: u64) -> Result<LinkId, NetError> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(NetError::SelfLoop(a.0));
        }
        if self.link_between(a, b).is_some() {
            return Err(NetError::ParallelLink(a.0, b.0));
        }
        let id = LinkId::from(self.links.len());
        self.links.push(SubstrateLink {
            id,
            endpoints: (a, b),
            bw_capacity,
            bw_residual: bw_capacity,
        });
        self.adjacency[a.index()].push((id, b));
        self.adjacency[b.index()].push((id, a));
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &SubstrateNode {
        &self.nodes[id.index()]
    }

    pub fn link(&self, id: LinkId) -> &SubstrateLink {
        &self.links[id.index()]
    }

    pub fn neighbors(&self, id: NodeId) -> &[(LinkId, NodeId)] {
        &self.adjacency[id.index()]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency
            .get(a.index())?
            .iter()
            .find(|&&(_, n)| n == b)
            .map(|&(l, _)| l)
    }

    pub fn check_node(&self, id: NodeId) -> Result<(), NetError> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(NetError::UnknownNode(id))
        }
    }

    pub fn residuals(&self) -> Residuals {
        Residuals {
            cpu: self.nodes.iter().map(|n| n.cpu_residual).collect(),
            bw: self.links.iter().map(|l| l.bw_residual).collect(),
        }
    }

    pub fn total_cpu_capacity(&self) -> u64 {
        self.nodes.iter().map(|n| n.cpu_capacity).sum()
    }

    pub fn total_bw_capacity(&self) -> u64 {
        self.links.iter().map(|l| l.bw_capacity).sum()
    }

    pub fn total_cpu_residual(&self) -> u64 {
        self.nodes.iter().map(|n| n.cpu_residual).sum()
    }

    pub fn total_bw_residual(&self) -> u64 {
        self.links.iter().map(|l| l.bw_residual).sum()
    }

    /// Resource measure used to order candidate hosts: residual CPU plus
    /// the residual bandwidth of incident links.
    pub fn available_resources(&self, res: &Residuals, n: NodeId) -> u64 {
        res.cpu[n.index()]
            + self.adjacency[n.index()]
                .iter()
                .map(|&(l, _)| res.bw[l.index()])
                .sum::<u64>()
    }

    /// Number of active allocations.
    pub fn allocation_count(&self) -> usize {
        self.active.len()
    }

    /// Reserves the resources of `mapping` for `vn`. Nothing changes when
    /// any node or link lacks capacity.
    pub fn allocate(
        &mut self,
        vn: &VirtualNetwork,
        mapping: &Mapping,
    ) -> Result<AllocationId, NetError> {
        let debit = self.debit(vn, mapping)?;
        let mut res = self.residuals();
        res.apply(&debit)?;
        self.store_residuals(&res);
        let id = AllocationId(self.next_allocation);
        self.next_allocation += 1;
        self.active.insert(id, debit);
        Ok(id)
    }

    pub fn release(&mut self, id: AllocationId) -> Result<(), NetError> {
        let debit = self.active.remove(&id).ok_or(NetError::NotAllocated(id))?;
        for (n, amount) in debit.cpu {
            self.nodes[n.index()].cpu_residual += amount;
        }
        for (l, amount) in debit.bw {
            self.links[l.index()].bw_residual += amount;
        }
        Ok(())
    }

    /// Overwrites residuals wholesale. Used by tests and file loaders.
    pub fn store_residuals(&mut self, res: &Residuals) {
        for (n, &r) in self.nodes.iter_mut().zip(&res.cpu) {
            assert!(
                r <= n.cpu_capacity,
                "cpu residual above capacity on {}",
                n.id
            );
            n.cpu_residual = r;
        }
        for (l, &r) in self.links.iter_mut().zip(&res.bw) {
            assert!(r <= l.bw_capacity, "bw residual above capacity on {}", l.id);
            l.bw_residual = r;
        }
    }

    /// Aggregated resources `mapping` would take for `vn`. Fails when the
    /// mapping leaves a node or link uncovered or names unknown hosts.
    pub fn debit(&self, vn: &VirtualNetwork, mapping: &Mapping) -> Result<Debit, NetError> {
        let mut debit = Debit::default();
        for v in vn.nodes() {
            let host = *mapping
                .hosts
                .get(v.id.index())
                .ok_or(NetError::UncoveredNode(v.id))?;
            self.check_node(host)?;
            *debit.cpu.entry(host).or_default() += v.cpu_demand;
        }
        for l in vn.links() {
            let path = mapping
                .routes
                .get(l.id.index())
                .and_then(Option::as_ref)
                .ok_or(NetError::UncoveredLink(l.id))?;
            for &sl in &path.links {
                if sl.index() >= self.links.len() {
                    return Err(NetError::UncoveredLink(l.id));
                }
                *debit.bw.entry(sl).or_default() += l.bw_demand;
            }
        }
        Ok(debit)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirtualNode {
    pub id: VNodeId,
    pub cpu_demand: u64,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualLink {
    pub id: VLinkId,
    pub endpoints: (VNodeId, VNodeId),
    pub bw_demand: u64,
}

impl VirtualLink {
    pub fn other(&self, v: VNodeId) -> VNodeId {
        if self.endpoints.0 == v {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// A virtual network: the demand graph of one request.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VirtualNetwork {
    nodes: Vec<VirtualNode>,
    links: Vec<VirtualLink>,
    adjacency: Vec<Vec<(VLinkId, VNodeId)>>,
}

impl VirtualNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, cpu_demand: u64, pos: Position) -> Result<VNodeId, NetError> {
        if cpu_demand == 0 {
            return Err(NetError::ZeroDemand);
        }
        let id = VNodeId::from(self.nodes.len());
        self.nodes.push(VirtualNode {
            id,
            cpu_demand,
            pos,
        });
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn add_link(
        &mut self,
        a: VNodeId,
        b: VNodeId,
        bw_demand: u64,
    ) -> Result<VLinkId, NetError> {
        for v in [a, b] {
            if v.index() >= self.nodes.len() {
                return Err(NetError::UnknownVirtualNode(v));
            }
        }
        if a == b {
            return Err(NetError::SelfLoop(a.0));
        }
        if bw_demand == 0 {
            return Err(NetError::ZeroDemand);
        }
        if self.adjacency[a.index()].iter().any(|&(_, n)| n == b) {
            return Err(NetError::ParallelLink(a.0, b.0));
        }
        let id = VLinkId::from(self.links.len());
        self.links.push(VirtualLink {
            id,
            endpoints: (a, b),
            bw_demand,
        });
        self.adjacency[a.index()].push((id, b));
        self.adjacency[b.index()].push((id, a));
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[VirtualNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[VirtualLink] {
        &self.links
    }

    pub fn node(&self, id: VNodeId) -> &VirtualNode {
        &self.nodes[id.index()]
    }

    pub fn link(&self, id: VLinkId) -> &VirtualLink {
        &self.links[id.index()]
    }

    pub fn neighbors(&self, id: VNodeId) -> &[(VLinkId, VNodeId)] {
        &self.adjacency[id.index()]
    }

    pub fn cpu_total(&self) -> u64 {
        self.nodes.iter().map(|n| n.cpu_demand).sum()
    }

    pub fn bw_total(&self) -> u64 {
        self.links.iter().map(|l| l.bw_demand).sum()
    }

    /// CPU demand plus the bandwidth demand of incident links.
    pub fn required_resources(&self, v: VNodeId) -> u64 {
        self.nodes[v.index()].cpu_demand
            + self.adjacency[v.index()]
                .iter()
                .map(|&(l, _)| self.links[l.index()].bw_demand)
                .sum::<u64>()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(_, w) in &self.adjacency[v] {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    count += 1;
                    stack.push(w.index());
                }
            }
        }
        count == self.nodes.len()
    }
}

/// A virtual network request: demand graph, arrival time and lifetime.
#[derive(Clone, Debug, PartialEq)]
pub struct VNRequest {
    pub vn: VirtualNetwork,
    pub arrival_time: f64,
    pub lifetime: f64,
}

impl VNRequest {
    pub fn new(vn: VirtualNetwork, arrival_time: f64, lifetime: f64) -> Result<Self, NetError> {
        if lifetime <= 0.0 || !lifetime.is_finite() {
            return Err(NetError::BadLifetime(lifetime));
        }
        if !vn.is_connected() {
            return Err(NetError::Disconnected);
        }
        Ok(Self {
            vn,
            arrival_time,
            lifetime,
        })
    }

    pub fn departure_time(&self) -> f64 {
        self.arrival_time + self.lifetime
    }
}

/// A loop-free walk through the substrate. `nodes` always holds
/// `links.len() + 1` entries; an empty link list is a co-location route.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubstratePath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl SubstratePath {
    pub fn colocated(at: NodeId) -> Self {
        Self {
            nodes: vec![at],
            links: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().expect("path has at least one node")
    }

    pub fn reversed(&self) -> Self {
        Self {
            nodes: self.nodes.iter().rev().copied().collect(),
            links: self.links.iter().rev().copied().collect(),
        }
    }

    /// True when the path is a simple walk over existing links of `sn`.
    pub fn is_simple_walk(&self, sn: &SubstrateNetwork) -> bool {
        if self.nodes.len() != self.links.len() + 1 {
            return false;
        }
        if self.nodes.iter().any(|n| n.index() >= sn.node_count()) {
            return false;
        }
        let mut seen = vec![false; sn.node_count()];
        for n in &self.nodes {
            if std::mem::replace(&mut seen[n.index()], true) {
                return false;
            }
        }
        self.links.iter().enumerate().all(|(i, &l)| {
            l.index() < sn.link_count() && {
                let (a, b) = sn.link(l).endpoints;
                let (u, w) = (self.nodes[i], self.nodes[i + 1]);
                (a, b) == (u, w) || (a, b) == (w, u)
            }
        })
    }
}

/// Node hosts (indexed by virtual node id) and link routes (indexed by
/// virtual link id). A `None` route marks a link still awaiting routing;
/// each route runs from the host of the link's first endpoint to the
/// host of its second.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub hosts: Vec<NodeId>,
    pub routes: Vec<Option<SubstratePath>>,
}

impl Mapping {
    pub fn is_complete(&self) -> bool {
        self.routes.iter().all(Option::is_some)
    }
}

/// Minimum-hop path from `src` to `dst` using only links whose bandwidth in
/// `bw_residual` covers `bw_demand`, at most `max_hops` links long.
/// Breadth-first search expands neighbors in ascending link id order, so
/// ties resolve deterministically.
pub fn shortest_path_within(
    sn: &SubstrateNetwork,
    bw_residual: &[u64],
    src: NodeId,
    dst: NodeId,
    bw_demand: u64,
    max_hops: usize,
) -> Option<SubstratePath> {
    if src == dst {
        return Some(SubstratePath::colocated(src));
    }
    let n = sn.node_count();
    let mut parent: Vec<Option<(LinkId, NodeId)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[src.index()] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = depth[u.index()];
        if d >= max_hops {
            continue;
        }
        for &(l, w) in sn.neighbors(u) {
            if depth[w.index()] != usize::MAX || bw_residual[l.index()] < bw_demand {
                continue;
            }
            depth[w.index()] = d + 1;
            parent[w.index()] = Some((l, u));
            if w == dst {
                return Some(trace_back(&parent, src, dst));
            }
            queue.push_back(w);
        }
    }
    None
}

fn trace_back(parent: &[Option<(LinkId, NodeId)>], src: NodeId, dst: NodeId) -> SubstratePath {
    let mut nodes = vec![dst];
    let mut links = Vec::new();
    let mut cur = dst;
    while cur != src {
        let (l, p) = parent[cur.index()].expect("reached node has a parent");
        links.push(l);
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    links.reverse();
    SubstratePath { nodes, links }
}

/// Shortest loop-free path over the live residuals of `sn`.
pub fn shortest_feasible_path(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    bw_demand: u64,
    max_hops: usize,
) -> Result<Option<SubstratePath>, NetError> {
    sn.check_node(src)?;
    sn.check_node(dst)?;
    let bw: Vec<u64> = sn.links().iter().map(|l| l.bw_residual).collect();
    Ok(shortest_path_within(sn, &bw, src, dst, bw_demand, max_hops))
}

/// Connected components of the subgraph formed by links with positive
/// residual bandwidth in `bw_residual`. Components are listed by their
/// smallest node id; members are ascending.
pub fn components_within(sn: &SubstrateNetwork, bw_residual: &[u64]) -> Vec<Vec<NodeId>> {
    let n = sn.node_count();
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let c = components.len();
        let mut members = vec![NodeId::from(start)];
        label[start] = c;
        let mut stack = vec![NodeId::from(start)];
        while let Some(u) = stack.pop() {
            for &(l, w) in sn.neighbors(u) {
                if bw_residual[l.index()] > 0 && label[w.index()] == usize::MAX {
                    label[w.index()] = c;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

pub fn residual_components(sn: &SubstrateNetwork) -> Vec<Vec<NodeId>> {
    let bw: Vec<u64> = sn.links().iter().map(|l| l.bw_residual).collect();
    components_within(sn, &bw)
}

/// Nodes reachable from `from` over the full topology, nearest first,
/// excluding `from` itself. Equal distances keep discovery order, which
/// follows ascending link ids.
pub fn nodes_by_distance(
    sn: &SubstrateNetwork,
    from: NodeId,
    max_hops: Option<usize>,
) -> Vec<(NodeId, usize)> {
    let mut depth = vec![usize::MAX; sn.node_count()];
    depth[from.index()] = 0;
    let mut queue = VecDeque::from([from]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        let d = depth[u.index()];
        if max_hops.is_some_and(|h| d >= h) {
            continue;
        }
        for &(_, w) in sn.neighbors(u) {
            if depth[w.index()] == usize::MAX {
                depth[w.index()] = d + 1;
                out.push((w, d + 1));
                queue.push_back(w);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> (SubstrateNetwork, [NodeId; 3]) {
        let mut sn = SubstrateNetwork::new();
        let a = sn.add_node(10, Position::default());
        let b = sn.add_node(10, Position::default());
        let c = sn.add_node(10, Position::default());
        sn.add_link(a, b, 10).unwrap();
        sn.add_link(b, c, 10).unwrap();
        sn.add_link(a, c, 1).unwrap();
        (sn, [a, b, c])
    }

    #[test]
    fn triangle_detours_around_thin_link() {
        let (sn, [a, b, c]) = triangle();
        let p = shortest_feasible_path(&sn, a, c, 5, 2).unwrap().unwrap();
        assert_eq!(p.links, vec![LinkId(0), LinkId(1)]);
        assert_eq!(p.nodes, vec![a, b, c]);
        assert!(p.is_simple_walk(&sn));
    }

    #[test]
    fn same_endpoint_is_colocation() {
        let (sn, [a, ..]) = triangle();
        let p = shortest_feasible_path(&sn, a, a, 1000, 0).unwrap().unwrap();
        assert!(p.is_empty());
        assert_eq!(p.source(), a);
    }

    #[test]
    fn oversized_demand_has_no_path() {
        let (sn, [a, _, c]) = triangle();
        assert_eq!(shortest_feasible_path(&sn, a, c, 11, 2).unwrap(), None);
        // hop limit applies too
        assert_eq!(shortest_feasible_path(&sn, a, c, 5, 1).unwrap(), None);
    }

    #[test]
    fn unknown_node_is_an_error() {
        let (sn, [a, ..]) = triangle();
        assert_eq!(
            shortest_feasible_path(&sn, a, NodeId(9), 1, 2),
            Err(NetError::UnknownNode(NodeId(9)))
        );
    }

    #[test]
    fn construction_rejects_loops_and_parallel_links() {
        let (mut sn, [a, b, _]) = triangle();
        assert_eq!(sn.add_link(a, a, 1), Err(NetError::SelfLoop(0)));
        assert_eq!(sn.add_link(b, a, 1), Err(NetError::ParallelLink(1, 0)));
        let mut vn = VirtualNetwork::new();
        assert_eq!(
            vn.add_node(0, Position::default()),
            Err(NetError::ZeroDemand)
        );
    }

    #[test]
    fn components_follow_positive_residual_links() {
        let (sn, _) = triangle();
        assert_eq!(residual_components(&sn).len(), 1);

        let mut two = SubstrateNetwork::new();
        let a = two.add_node(5, Position::default());
        let b = two.add_node(5, Position::default());
        two.add_link(a, b, 0).unwrap();
        assert_eq!(residual_components(&two), vec![vec![a], vec![b]]);

        let mut line = SubstrateNetwork::new();
        let a = line.add_node(1, Position::default());
        let b = line.add_node(1, Position::default());
        let c = line.add_node(1, Position::default());
        line.add_link(a, b, 0).unwrap();
        line.add_link(b, c, 5).unwrap();
        assert_eq!(residual_components(&line), vec![vec![a], vec![b, c]]);
    }

    fn pair_vn(d1: u64, d2: u64, bw: u64) -> VirtualNetwork {
        let mut vn = VirtualNetwork::new();
        let x = vn.add_node(d1, Position::default()).unwrap();
        let y = vn.add_node(d2, Position::default()).unwrap();
        vn.add_link(x, y, bw).unwrap();
        vn
    }

    #[test]
    fn colocated_nodes_share_host_cpu() {
        let (mut sn, [a, ..]) = triangle();
        let vn = pair_vn(3, 4, 2);
        let m = Mapping {
            hosts: vec![a, a],
            routes: vec![Some(SubstratePath::colocated(a))],
        };
        let id = sn.allocate(&vn, &m).unwrap();
        assert_eq!(sn.node(a).cpu_residual, 3);
        assert_eq!(sn.total_bw_residual(), 21);
        sn.release(id).unwrap();
        assert_eq!(sn.node(a).cpu_residual, 10);
    }

    #[test]
    fn two_hop_route_debits_both_links() {
        let (mut sn, [a, b, c]) = triangle();
        let before = sn.clone();
        let vn = pair_vn(1, 1, 5);
        let path = SubstratePath {
            nodes: vec![a, b, c],
            links: vec![LinkId(0), LinkId(1)],
        };
        let m = Mapping {
            hosts: vec![a, c],
            routes: vec![Some(path)],
        };
        let id = sn.allocate(&vn, &m).unwrap();
        assert_eq!(sn.link(LinkId(0)).bw_residual, 5);
        assert_eq!(sn.link(LinkId(1)).bw_residual, 5);
        assert_eq!(sn.link(LinkId(2)).bw_residual, 1);
        sn.release(id).unwrap();
        assert_eq!(sn.residuals(), before.residuals());
        assert_eq!(sn.release(id), Err(NetError::NotAllocated(id)));
    }

    #[test]
    fn failed_allocation_changes_nothing() {
        let (mut sn, [a, _, c]) = triangle();
        let before = sn.clone();
        let vn = pair_vn(1, 1, 5);
        // direct a-c link only has 1 unit
        let path = SubstratePath {
            nodes: vec![a, c],
            links: vec![LinkId(2)],
        };
        let m = Mapping {
            hosts: vec![a, c],
            routes: vec![Some(path)],
        };
        assert_eq!(
            sn.allocate(&vn, &m),
            Err(NetError::BandwidthExhausted(LinkId(2)))
        );
        assert_eq!(sn, before);

        let overload = Mapping {
            hosts: vec![a, a],
            routes: vec![Some(SubstratePath::colocated(a))],
        };
        let big = pair_vn(6, 6, 1);
        assert_eq!(sn.allocate(&big, &overload), Err(NetError::CpuExhausted(a)));
        assert_eq!(sn, before);
    }

    #[test]
    fn uncovered_link_is_reported() {
        let (mut sn, [a, ..]) = triangle();
        let vn = pair_vn(1, 1, 1);
        let m = Mapping {
            hosts: vec![a, a],
            routes: vec![None],
        };
        assert_eq!(
            sn.allocate(&vn, &m),
            Err(NetError::UncoveredLink(VLinkId(0)))
        );
    }

    #[test]
    fn request_requires_connected_vn_and_positive_lifetime() {
        let mut vn = VirtualNetwork::new();
        vn.add_node(1, Position::default()).unwrap();
        vn.add_node(1, Position::default()).unwrap();
        assert_eq!(
            VNRequest::new(vn.clone(), 0.0, 1.0),
            Err(NetError::Disconnected)
        );
        vn.add_link(VNodeId(0), VNodeId(1), 1).unwrap();
        assert_eq!(
            VNRequest::new(vn.clone(), 0.0, 0.0),
            Err(NetError::BadLifetime(0.0))
        );
        assert!(VNRequest::new(vn, 0.0, 1.0).is_ok());
    }
}
