//! Variation operators: roulette parent selection, single-point crossover
//! and host mutation.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{Chromosome, Instance};
use crate::netmodel::{shortest_path_within, Mapping, NodeId, SubstratePath, VNodeId};
use crate::pareto::RankedIndividual;

impl Instance<'_> {
    /// Roulette-wheel pick with weight `1 / (1 + rank)`.
    pub fn select_parent<R: Rng + ?Sized>(
        &self,
        ranked: &[RankedIndividual],
        rng: &mut R,
    ) -> usize {
        let weights = ranked.iter().map(|r| 1.0 / (1.0 + r.rank as f64));
        WeightedIndex::new(weights)
            .expect("population is non-empty")
            .sample(rng)
    }

    /// Single-point crossover at a uniformly drawn cut in `1..n`. With
    /// fewer than two genes the child is a copy of `p1`.
    pub fn crossover<R: Rng + ?Sized>(
        &self,
        p1: &Chromosome,
        p2: &Chromosome,
        rng: &mut R,
    ) -> Chromosome {
        let n = self.order.len();
        if n < 2 {
            return Chromosome::new(p1.mapping.clone());
        }
        self.crossover_at(p1, p2, rng.random_range(1..n))
    }

    /// The child taking the first `k` genes (in search order) from `p1` and
    /// the rest from `p2`. A link keeps its parent's route when both
    /// endpoints come from the same parent. Links spanning the cut get a
    /// shortest route within the hop limit over the bandwidth the copied
    /// routes leave, in link id order, or stay unrouted when none exists.
    pub fn crossover_at(&self, p1: &Chromosome, p2: &Chromosome, k: usize) -> Chromosome {
        let from_first = |v: VNodeId| self.position(v) < k;
        let hosts: Vec<NodeId> = self
            .vn
            .nodes()
            .iter()
            .map(|v| {
                if from_first(v.id) {
                    p1.host(v.id)
                } else {
                    p2.host(v.id)
                }
            })
            .collect();
        let mut routes: Vec<Option<SubstratePath>> = self
            .vn
            .links()
            .iter()
            .map(
                |l| match (from_first(l.endpoints.0), from_first(l.endpoints.1)) {
                    (true, true) => p1.mapping.routes[l.id.index()].clone(),
                    (false, false) => p2.mapping.routes[l.id.index()].clone(),
                    _ => None,
                },
            )
            .collect();

        let mut bw = self.base.bw.clone();
        for l in self.vn.links() {
            if let Some(p) = &routes[l.id.index()] {
                claim_saturating(&mut bw, p, l.bw_demand);
            }
        }
        for l in self.vn.links() {
            if from_first(l.endpoints.0) == from_first(l.endpoints.1) {
                continue;
            }
            let (src, dst) = (hosts[l.endpoints.0.index()], hosts[l.endpoints.1.index()]);
            if let Some(p) =
                shortest_path_within(self.sn, &bw, src, dst, l.bw_demand, self.params.hops_max)
            {
                claim_saturating(&mut bw, &p, l.bw_demand);
                routes[l.id.index()] = Some(p);
            }
        }
        Chromosome::new(Mapping { hosts, routes })
    }

    /// With the configured probability, moves one uniformly chosen virtual
    /// node to a uniformly chosen substrate node that no member of `pop`
    /// uses and that has the CPU for it, rerouting its links within the hop
    /// limit. The child comes back unchanged when no such host exists or a
    /// link cannot be rerouted.
    pub fn mutate<R: Rng + ?Sized>(
        &self,
        child: Chromosome,
        pop: &[Chromosome],
        rng: &mut R,
    ) -> Chromosome {
        if !rng.random_bool(self.params.mutation_probability) {
            return child;
        }
        let v = self.order[rng.random_range(0..self.order.len())];
        let mut used = vec![false; self.sn.node_count()];
        for h in pop.iter().flat_map(|c| &c.mapping.hosts) {
            if let Some(u) = used.get_mut(h.index()) {
                *u = true;
            }
        }
        let demand = self.vn.node(v).cpu_demand;
        let unused: Vec<NodeId> = (0..used.len())
            .filter(|&s| !used[s] && self.base.cpu[s] >= demand)
            .map(NodeId::from)
            .collect();
        if unused.is_empty() {
            return child;
        }
        let to = unused[rng.random_range(0..unused.len())];

        let mut trial = child.mapping.clone();
        trial.hosts[v.index()] = to;
        let mut bw = self.base.bw.clone();
        let incident: Vec<_> = self.vn.neighbors(v).iter().map(|&(l, _)| l).collect();
        for l in self.vn.links() {
            if incident.contains(&l.id) {
                continue;
            }
            if let Some(p) = &trial.routes[l.id.index()] {
                claim_saturating(&mut bw, p, l.bw_demand);
            }
        }
        for l in incident {
            let link = self.vn.link(l);
            let src = trial.hosts[link.endpoints.0.index()];
            let dst = trial.hosts[link.endpoints.1.index()];
            match shortest_path_within(self.sn, &bw, src, dst, link.bw_demand, self.params.hops_max)
            {
                Some(p) => {
                    claim_saturating(&mut bw, &p, link.bw_demand);
                    trial.routes[l.index()] = Some(p);
                }
                None => return child,
            }
        }
        Chromosome::new(trial)
    }
}

fn claim_saturating(bw: &mut [u64], p: &SubstratePath, amount: u64) {
    for l in &p.links {
        if let Some(r) = bw.get_mut(l.index()) {
            *r = r.saturating_sub(amount);
        }
    }
}
