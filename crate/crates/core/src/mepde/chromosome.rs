use std::fmt;

use crate::netmodel::{
    LinkId, Mapping, NodeId, SubstrateNetwork, VLinkId, VNodeId, VirtualNetwork,
};
use crate::objectives::ObjectiveVector;

/// One individual: a complete node assignment plus link routes. Genes are
/// stored by virtual node id; [`Chromosome::genes`] lists them in search
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome {
    pub mapping: Mapping,
    pub objectives: Option<ObjectiveVector>,
    pub feasible: bool,
}

impl Chromosome {
    /// An unevaluated chromosome.
    pub fn new(mapping: Mapping) -> Self {
        Self {
            mapping,
            objectives: None,
            feasible: false,
        }
    }

    pub fn host(&self, v: VNodeId) -> NodeId {
        self.mapping.hosts[v.index()]
    }

    pub fn genes(&self, order: &[VNodeId]) -> Vec<NodeId> {
        order.iter().map(|&v| self.host(v)).collect()
    }

    /// Same hosts and routes, regardless of evaluation state.
    pub fn same_embedding(&self, other: &Chromosome) -> bool {
        self.mapping == other.mapping
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    GeneCount {
        expected: usize,
        found: usize,
    },
    UnknownHost(VNodeId),
    MissingRoute(VLinkId),
    /// Route does not run between the hosts of the link's endpoints.
    RouteEndpoints(VLinkId),
    /// Route is not a loop-free walk over substrate links.
    BrokenRoute(VLinkId),
    CpuOverload(NodeId),
    BandwidthOverload(LinkId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GeneCount { expected, found } => {
                write!(f, "expected {expected} genes, found {found}")
            }
            Violation::UnknownHost(v) => write!(f, "{v} is hosted on an unknown substrate node"),
            Violation::MissingRoute(l) => write!(f, "{l} has no route"),
            Violation::RouteEndpoints(l) => write!(f, "route of {l} does not join its hosts"),
            Violation::BrokenRoute(l) => {
                write!(f, "route of {l} is not a loop-free substrate walk")
            }
            Violation::CpuOverload(n) => write!(f, "CPU of {n} is overcommitted"),
            Violation::BandwidthOverload(l) => write!(f, "bandwidth of {l} is overcommitted"),
        }
    }
}

/// Every invariant breach of `ch` against the live residuals of `sn`.
/// Resource checks aggregate all routes sharing a link, so jointly
/// oversubscribed links are caught.
pub fn validate(ch: &Chromosome, sn: &SubstrateNetwork, vn: &VirtualNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = &ch.mapping;
    if m.hosts.len() != vn.node_count() {
        out.push(Violation::GeneCount {
            expected: vn.node_count(),
            found: m.hosts.len(),
        });
        return out;
    }

    let mut cpu = vec![0u64; sn.node_count()];
    for v in vn.nodes() {
        let h = m.hosts[v.id.index()];
        if h.index() >= sn.node_count() {
            out.push(Violation::UnknownHost(v.id));
        } else {
            cpu[h.index()] += v.cpu_demand;
        }
    }
    if !out.is_empty() {
        return out;
    }

    let mut bw = vec![0u64; sn.link_count()];
    for l in vn.links() {
        let Some(path) = m.routes.get(l.id.index()).and_then(Option::as_ref) else {
            out.push(Violation::MissingRoute(l.id));
            continue;
        };
        if !path.is_simple_walk(sn) {
            out.push(Violation::BrokenRoute(l.id));
            continue;
        }
        let (a, b) = l.endpoints;
        if path.source() != m.hosts[a.index()] || path.target() != m.hosts[b.index()] {
            out.push(Violation::RouteEndpoints(l.id));
        }
        for sl in &path.links {
            bw[sl.index()] += l.bw_demand;
        }
    }

    for n in sn.nodes() {
        if cpu[n.id.index()] > n.cpu_residual {
            out.push(Violation::CpuOverload(n.id));
        }
    }
    for sl in sn.links() {
        if bw[sl.id.index()] > sl.bw_residual {
            out.push(Violation::BandwidthOverload(sl.id));
        }
    }
    out
}
