//! Repair of infeasible chromosomes and dominance-driven local search.

use super::{Chromosome, Instance};
use crate::netmodel::{
    nodes_by_distance, shortest_path_within, Mapping, NodeId, Residuals, SubstratePath, VLinkId,
    VNodeId,
};
use crate::objectives::ObjectiveVector;
use crate::pareto::dominates;

impl Instance<'_> {
    /// Repairs `ch` into a feasible mapping if possible, then improves it
    /// by round-robin passes over node moves and link reroutes. A move is
    /// kept only when its objectives dominate the current ones. Returns the
    /// chromosome evaluated, or marked infeasible when repair fails.
    pub fn optimize(&self, ch: Chromosome) -> Chromosome {
        let Some(mapping) = self.repair(&ch.mapping) else {
            return Chromosome {
                objectives: None,
                feasible: false,
                ..ch
            };
        };
        let mut best = Chromosome::new(mapping);
        if !self.evaluate(&mut best) {
            return best;
        }

        let cap = 10 * (self.vn.node_count() + self.vn.link_count());
        for _ in 0..cap {
            if !self.improvement_pass(&mut best) {
                break;
            }
        }
        best
    }

    /// One sweep over all virtual nodes in search order, then all virtual
    /// links by id, applying the first dominating move found for each.
    fn improvement_pass(&self, ch: &mut Chromosome) -> bool {
        let mut improved = false;
        let mut occupied = self.occupied(&ch.mapping);
        for &v in &self.order {
            let current = ch.objectives.expect("optimized chromosomes are evaluated");
            let from = ch.host(v);
            for (to, _) in nodes_by_distance(self.sn, from, Some(self.params.hops_max)) {
                if let Some(next) = self.try_move(ch, &occupied, v, to, current) {
                    *ch = next;
                    occupied = self.occupied(&ch.mapping);
                    improved = true;
                    break;
                }
            }
        }
        for l in self.vn.links() {
            let current = ch.objectives.expect("optimized chromosomes are evaluated");
            if let Some(next) = self.try_reroute(ch, &occupied, l.id, current) {
                *ch = next;
                occupied = self.occupied(&ch.mapping);
                improved = true;
            }
        }
        improved
    }

    /// Moves every virtual node whose host lacks CPU to the nearest host
    /// with room, keeps every route that is still valid and fits, and
    /// reroutes the rest within the hop limit. Hosts are settled in search
    /// order, routes in link id order.
    pub fn repair(&self, m: &Mapping) -> Option<Mapping> {
        let n = self.sn.node_count();
        if m.hosts.len() != self.vn.node_count() {
            return None;
        }
        let mut res = self.base.clone();
        let mut hosts = m.hosts.clone();
        let mut displaced = Vec::new();
        for &v in &self.order {
            let h = hosts[v.index()];
            let d = self.vn.node(v).cpu_demand;
            if h.index() < n && res.cpu[h.index()] >= d {
                res.cpu[h.index()] -= d;
            } else {
                displaced.push(v);
            }
        }
        for v in displaced {
            let d = self.vn.node(v).cpu_demand;
            let old = hosts[v.index()];
            let target = if old.index() < n {
                nodes_by_distance(self.sn, old, None)
                    .into_iter()
                    .map(|(s, _)| s)
                    .find(|s| res.cpu[s.index()] >= d)
            } else {
                (0..n).map(NodeId::from).find(|s| res.cpu[s.index()] >= d)
            }?;
            res.cpu[target.index()] -= d;
            hosts[v.index()] = target;
        }

        let mut routes: Vec<Option<SubstratePath>> = vec![None; self.vn.link_count()];
        let mut pending = Vec::new();
        for l in self.vn.links() {
            let (src, dst) = (hosts[l.endpoints.0.index()], hosts[l.endpoints.1.index()]);
            let kept = m
                .routes
                .get(l.id.index())
                .and_then(Option::as_ref)
                .and_then(|p| oriented(p, src, dst))
                .filter(|p| {
                    p.len() <= self.params.hops_max
                        && p.is_simple_walk(self.sn)
                        && res.path_fits(p, l.bw_demand)
                });
            match kept {
                Some(p) => {
                    res.claim_path(&p, l.bw_demand);
                    routes[l.id.index()] = Some(p);
                }
                None => pending.push(l.id),
            }
        }
        for id in pending {
            let l = self.vn.link(id);
            let (src, dst) = (hosts[l.endpoints.0.index()], hosts[l.endpoints.1.index()]);
            let p = shortest_path_within(
                self.sn,
                &res.bw,
                src,
                dst,
                l.bw_demand,
                self.params.hops_max,
            )?;
            res.claim_path(&p, l.bw_demand);
            routes[id.index()] = Some(p);
        }
        Some(Mapping { hosts, routes })
    }

    /// Residuals of the instance snapshot with `m` in place.
    fn occupied(&self, m: &Mapping) -> Residuals {
        let mut res = self.base.clone();
        for v in self.vn.nodes() {
            res.cpu[m.hosts[v.id.index()].index()] -= v.cpu_demand;
        }
        for l in self.vn.links() {
            if let Some(p) = &m.routes[l.id.index()] {
                res.claim_path(p, l.bw_demand);
            }
        }
        res
    }

    fn route_cost(&self, m: &Mapping, links: impl Iterator<Item = VLinkId>) -> u64 {
        links
            .map(|l| {
                self.vn.link(l).bw_demand
                    * m.routes[l.index()].as_ref().map_or(0, |p| p.len() as u64)
            })
            .sum()
    }

    fn accept(&self, trial: Mapping, current: ObjectiveVector) -> Option<Chromosome> {
        let mut t = Chromosome::new(trial);
        (self.evaluate(&mut t) && dominates(&t.objectives?, &current)).then_some(t)
    }

    fn try_move(
        &self,
        ch: &Chromosome,
        occupied: &Residuals,
        v: VNodeId,
        to: NodeId,
        current: ObjectiveVector,
    ) -> Option<Chromosome> {
        let demand = self.vn.node(v).cpu_demand;
        let from = ch.host(v);
        let mut res = occupied.clone();
        res.cpu[from.index()] += demand;
        if res.cpu[to.index()] < demand {
            return None;
        }
        res.cpu[to.index()] -= demand;
        let incident: Vec<VLinkId> = self.vn.neighbors(v).iter().map(|&(l, _)| l).collect();
        for &l in &incident {
            let p = ch.mapping.routes[l.index()].as_ref()?;
            res.unclaim_path(p, self.vn.link(l).bw_demand);
        }

        let mut trial = ch.mapping.clone();
        trial.hosts[v.index()] = to;
        for &l in &incident {
            let link = self.vn.link(l);
            let src = trial.hosts[link.endpoints.0.index()];
            let dst = trial.hosts[link.endpoints.1.index()];
            let p = shortest_path_within(
                self.sn,
                &res.bw,
                src,
                dst,
                link.bw_demand,
                self.params.hops_max,
            )?;
            res.claim_path(&p, link.bw_demand);
            trial.routes[l.index()] = Some(p);
        }
        // CPU cost is unchanged by a move, so only route cost can differ
        if self.route_cost(&trial, incident.iter().copied())
            > self.route_cost(&ch.mapping, incident.iter().copied())
        {
            return None;
        }
        self.accept(trial, current)
    }

    fn try_reroute(
        &self,
        ch: &Chromosome,
        occupied: &Residuals,
        l: VLinkId,
        current: ObjectiveVector,
    ) -> Option<Chromosome> {
        let link = self.vn.link(l);
        let old = ch.mapping.routes[l.index()].as_ref()?;
        if old.is_empty() {
            return None;
        }
        let mut res = occupied.clone();
        res.unclaim_path(old, link.bw_demand);
        let p = shortest_path_within(
            self.sn,
            &res.bw,
            old.source(),
            old.target(),
            link.bw_demand,
            self.params.hops_max,
        )?;
        if p == *old || p.len() > old.len() {
            return None;
        }
        let mut trial = ch.mapping.clone();
        trial.routes[l.index()] = Some(p);
        self.accept(trial, current)
    }
}

/// `p` oriented from `src` to `dst`, if it joins them in either direction.
fn oriented(p: &SubstratePath, src: NodeId, dst: NodeId) -> Option<SubstratePath> {
    if p.source() == src && p.target() == dst {
        Some(p.clone())
    } else if p.source() == dst && p.target() == src {
        Some(p.reversed())
    } else {
        None
    }
}
