//! Node ordering and the bounded backtracking search that seeds the
//! initial population.

use super::{Chromosome, Instance, Rejection};
use crate::netmodel::{
    shortest_path_within, Mapping, NetError, NodeId, Residuals, SubstratePath, VLinkId, VNodeId,
    VirtualNetwork,
};

/// Breadth-first order of the virtual nodes, rooted at the node with the
/// largest demand (CPU plus incident bandwidth). Each BFS level is sorted
/// by the same measure, largest first; ties go to the lower id.
pub fn vn_bfs_order(vn: &VirtualNetwork) -> Result<Vec<VNodeId>, NetError> {
    let n = vn.node_count();
    if n == 0 || !vn.is_connected() {
        return Err(NetError::Disconnected);
    }
    let by_demand = |a: &VNodeId, b: &VNodeId| {
        vn.required_resources(*b)
            .cmp(&vn.required_resources(*a))
            .then(a.cmp(b))
    };
    let root = (0..n)
        .map(VNodeId::from)
        .min_by(by_demand)
        .expect("non-empty");

    let mut seen = vec![false; n];
    seen[root.index()] = true;
    let mut order = vec![root];
    let mut level = vec![root];
    while !level.is_empty() {
        let mut next = Vec::new();
        for &v in &level {
            for &(_, w) in vn.neighbors(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    next.push(w);
                }
            }
        }
        next.sort_by(by_demand);
        order.extend_from_slice(&next);
        level = next;
    }
    Ok(order)
}

/// Shared counter of exhausted candidate lists within one embedding
/// attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BacktrackBudget {
    pub count: u32,
    pub limit: u32,
}

impl BacktrackBudget {
    pub fn new(limit: u32) -> Self {
        Self { count: 0, limit }
    }

    pub fn exceeded(&self) -> bool {
        self.count > self.limit
    }
}

/// A mapping under construction together with the residuals left after
/// the resources it has claimed so far.
pub(crate) struct Partial {
    hosts: Vec<Option<NodeId>>,
    routes: Vec<Option<SubstratePath>>,
    res: Residuals,
}

struct Candidate {
    host: NodeId,
    routes: Vec<(VLinkId, SubstratePath)>,
    measure: u64,
}

impl Partial {
    fn new(vn: &VirtualNetwork, base: &Residuals) -> Self {
        Self {
            hosts: vec![None; vn.node_count()],
            routes: vec![None; vn.link_count()],
            res: base.clone(),
        }
    }

    fn place(&mut self, vn: &VirtualNetwork, v: VNodeId, c: Candidate) {
        self.hosts[v.index()] = Some(c.host);
        self.res.cpu[c.host.index()] -= vn.node(v).cpu_demand;
        for (l, path) in c.routes {
            self.res.claim_path(&path, vn.link(l).bw_demand);
            self.routes[l.index()] = Some(path);
        }
    }

    /// Undoes the placement of `v`, which must be the most recently placed
    /// node.
    fn unplace(&mut self, vn: &VirtualNetwork, v: VNodeId) {
        let host = self.hosts[v.index()].take().expect("node is placed");
        self.res.cpu[host.index()] += vn.node(v).cpu_demand;
        for &(l, _) in vn.neighbors(v) {
            if let Some(path) = self.routes[l.index()].take() {
                self.res.unclaim_path(&path, vn.link(l).bw_demand);
            }
        }
    }

    fn matches(&self, m: &Mapping) -> bool {
        self.hosts.iter().zip(&m.hosts).all(|(h, g)| *h == Some(*g)) && self.routes == m.routes
    }

    fn is_taboo(&self, taboo: &[Chromosome]) -> bool {
        taboo.iter().any(|t| self.matches(&t.mapping))
    }

    fn into_chromosome(self) -> Chromosome {
        let mapping = Mapping {
            hosts: self
                .hosts
                .into_iter()
                .map(|h| h.expect("all nodes placed"))
                .collect(),
            routes: self.routes,
        };
        Chromosome {
            mapping,
            objectives: None,
            feasible: true,
        }
    }
}

impl Instance<'_> {
    /// Hosts able to take `v` given what `p` already claims: enough CPU,
    /// and a route of at most `hops` links to every placed neighbour.
    /// Sorted by available resources, largest first, then by id.
    fn candidates(&self, p: &mut Partial, v: VNodeId, hops: usize) -> Vec<Candidate> {
        let demand = self.vn.node(v).cpu_demand;
        let placed: Vec<(VLinkId, NodeId)> = self
            .vn
            .neighbors(v)
            .iter()
            .filter_map(|&(l, u)| p.hosts[u.index()].map(|h| (l, h)))
            .collect();

        let mut out = Vec::new();
        for s in self.sn.nodes().iter().map(|n| n.id) {
            if p.res.cpu[s.index()] < demand {
                continue;
            }
            let measure = self.sn.available_resources(&p.res, s);
            let mut routes = Vec::with_capacity(placed.len());
            let mut routed_all = true;
            for &(l, other_host) in &placed {
                let link = self.vn.link(l);
                let (src, dst) = if link.endpoints.0 == v {
                    (s, other_host)
                } else {
                    (other_host, s)
                };
                match shortest_path_within(self.sn, &p.res.bw, src, dst, link.bw_demand, hops) {
                    Some(path) => {
                        p.res.claim_path(&path, link.bw_demand);
                        routes.push((l, path));
                    }
                    None => {
                        routed_all = false;
                        break;
                    }
                }
            }
            for (l, path) in &routes {
                p.res.unclaim_path(path, self.vn.link(*l).bw_demand);
            }
            if routed_all {
                out.push(Candidate {
                    host: s,
                    routes,
                    measure,
                });
            }
        }
        out.sort_by(|a, b| b.measure.cmp(&a.measure).then(a.host.cmp(&b.host)));
        out
    }

    /// Depth-first placement of `order[pos..]`. A complete mapping equal to
    /// a `taboo` member counts as a dead end so the search moves on to a
    /// distinct individual.
    fn extend(
        &self,
        p: &mut Partial,
        pos: usize,
        hops: usize,
        budget: &mut BacktrackBudget,
        taboo: &[Chromosome],
    ) -> bool {
        let v = self.order[pos];
        for c in self.candidates(p, v, hops) {
            p.place(self.vn, v, c);
            let done = if pos + 1 == self.order.len() {
                !p.is_taboo(taboo)
            } else {
                self.extend(p, pos + 1, hops, budget, taboo)
            };
            if done {
                return true;
            }
            p.unplace(self.vn, v);
            if budget.exceeded() {
                return false;
            }
        }
        budget.count += 1;
        self.count_backtrack();
        false
    }

    /// Runs the backtracking embedder over the whole node order, routes of
    /// at most `hops` links. `None` when the budget runs out or the search
    /// space holds nothing outside `taboo`.
    pub fn embed_backtracking(
        &self,
        hops: usize,
        budget: &mut BacktrackBudget,
        taboo: &[Chromosome],
    ) -> Option<Chromosome> {
        let mut p = Partial::new(self.vn, &self.base);
        self.extend(&mut p, 0, hops, budget, taboo)
            .then(|| p.into_chromosome())
    }

    /// Seeds the population: for hop limits `0..=hops_max`, every root host
    /// in candidate order is tried in turn until the population is full.
    /// The result may be shorter than `population_size`, or empty when the
    /// request cannot be embedded.
    pub fn init_population(&self) -> Vec<Chromosome> {
        let wanted = self.params.population_size;
        let root = self.order[0];
        let mut scratch = Partial::new(self.vn, &self.base);
        let root_hosts: Vec<NodeId> = self
            .candidates(&mut scratch, root, 0)
            .into_iter()
            .map(|c| c.host)
            .collect();

        let mut pop: Vec<Chromosome> = Vec::with_capacity(wanted);
        for hops in 0..=self.params.hops_max {
            if pop.len() >= wanted {
                break;
            }
            for &host in &root_hosts {
                let mut p = Partial::new(self.vn, &self.base);
                p.place(
                    self.vn,
                    root,
                    Candidate {
                        host,
                        routes: Vec::new(),
                        measure: 0,
                    },
                );
                let mut budget = BacktrackBudget::new(self.backtrack_limit());
                let found = if self.order.len() == 1 {
                    !p.is_taboo(&pop)
                } else {
                    self.extend(&mut p, 1, hops, &mut budget, &pop)
                };
                if found {
                    pop.push(p.into_chromosome());
                    if pop.len() >= wanted {
                        break;
                    }
                }
            }
        }
        pop
    }

    pub(super) fn empty_reason(&self) -> Rejection {
        let demand = self.vn.node(self.order[0]).cpu_demand;
        if self.base.cpu.iter().all(|&c| c < demand) {
            Rejection::NoRootHost
        } else {
            Rejection::SearchExhausted
        }
    }
}
