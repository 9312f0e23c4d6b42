//! Pareto dominance, fast non-dominated sorting, crowding distance and
//! elitist truncation for the two minimized objectives.

use std::cmp::Ordering;

use thiserror::Error;

use crate::objectives::ObjectiveVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("cannot select {wanted} individuals from {available}")]
    TooFew { wanted: usize, available: usize },
    #[error("population has no feasible member")]
    Empty,
}

/// Sorting outcome for one population member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankedIndividual {
    pub objectives: ObjectiveVector,
    /// Front index, 0 for the non-dominated front.
    pub rank: usize,
    /// Crowding distance within its front; `f64::INFINITY` on boundaries.
    pub crowding: f64,
}

/// `a` is no worse than `b` in both objectives and strictly better in one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.cost <= b.cost
        && a.fragmentation <= b.fragmentation
        && (a.cost < b.cost || a.fragmentation < b.fragmentation)
}

/// Splits `pop` into fronts of indices. Front 0 holds the non-dominated
/// members, front k those dominated only by members of earlier fronts.
/// Indices inside each front are ascending.
pub fn fast_non_dominated_sort(pop: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&pop[i], &pop[j]) {
                dominated[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&pop[j], &pop[i]) {
                dominated[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of every member of one front, parallel to `front`.
///
/// For each objective the front is sorted (ties by position), the two
/// extremes get `INFINITY` and every interior member accumulates the
/// normalized gap between its neighbours. An objective whose values are
/// all equal adds nothing.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&ObjectiveVector) -> f64; 2] = [|o| o.cost, |o| o.fragmentation];
    for value in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            value(&front[a])
                .total_cmp(&value(&front[b]))
                .then(a.cmp(&b))
        });
        let lo = value(&front[order[0]]);
        let hi = value(&front[order[n - 1]]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let i = order[k];
            if distance[i].is_finite() {
                distance[i] += (value(&front[order[k + 1]]) - value(&front[order[k - 1]])) / range;
            }
        }
    }
    distance
}

/// Sorts `pop` and attaches rank and crowding distance to every member.
pub fn rank_population(pop: &[ObjectiveVector]) -> Vec<RankedIndividual> {
    let mut ranked: Vec<RankedIndividual> = pop
        .iter()
        .map(|&objectives| RankedIndividual {
            objectives,
            rank: usize::MAX,
            crowding: 0.0,
        })
        .collect();
    for (rank, front) in fast_non_dominated_sort(pop).iter().enumerate() {
        let members: Vec<ObjectiveVector> = front.iter().map(|&i| pop[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            ranked[i].rank = rank;
            ranked[i].crowding = d;
        }
    }
    ranked
}

/// Elitist truncation: whole fronts in rank order, then the best-spread
/// members of the first front that does not fit. Returns indices into
/// `combined`.
///
/// Members of the partial front are ordered by descending crowding; equal
/// crowding prefers lower cost, then lower fragmentation, then lower index,
/// so the cheapest extreme of a front always survives.
pub fn environmental_selection(
    combined: &[RankedIndividual],
    size: usize,
) -> Result<Vec<usize>, SelectionError> {
    if size > combined.len() || combined.is_empty() {
        return Err(SelectionError::TooFew {
            wanted: size,
            available: combined.len(),
        });
    }
    let mut by_rank: Vec<usize> = (0..combined.len()).collect();
    by_rank.sort_by_key(|&i| (combined[i].rank, i));

    let mut chosen = Vec::with_capacity(size);
    let mut start = 0;
    while start < by_rank.len() && chosen.len() < size {
        let rank = combined[by_rank[start]].rank;
        let end = by_rank[start..]
            .iter()
            .position(|&i| combined[i].rank != rank)
            .map_or(by_rank.len(), |p| start + p);
        let front = &by_rank[start..end];
        if chosen.len() + front.len() <= size {
            chosen.extend_from_slice(front);
        } else {
            let mut partial = front.to_vec();
            partial.sort_by(|&a, &b| truncation_order(combined, a, b));
            chosen.extend_from_slice(&partial[..size - chosen.len()]);
        }
        start = end;
    }
    Ok(chosen)
}

fn truncation_order(pop: &[RankedIndividual], a: usize, b: usize) -> Ordering {
    let (x, y) = (&pop[a], &pop[b]);
    y.crowding
        .total_cmp(&x.crowding)
        .then(x.objectives.cost.total_cmp(&y.objectives.cost))
        .then(
            x.objectives
                .fragmentation
                .total_cmp(&y.objectives.fragmentation),
        )
        .then(a.cmp(&b))
}

/// Index of the cheapest rank-0 member; ties go to lower fragmentation,
/// then lower index.
pub fn best_solution(pop: &[RankedIndividual]) -> Result<usize, SelectionError> {
    pop.iter()
        .enumerate()
        .filter(|(_, r)| r.rank == 0)
        .min_by(|(i, a), (j, b)| {
            a.objectives
                .cost
                .total_cmp(&b.objectives.cost)
                .then(
                    a.objectives
                        .fragmentation
                        .total_cmp(&b.objectives.fragmentation),
                )
                .then(i.cmp(j))
        })
        .map(|(i, _)| i)
        .ok_or(SelectionError::Empty)
}
