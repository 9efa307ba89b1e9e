//! Dominance, fast non-dominated sorting, crowding distance and NSGA-II
//! environmental/mating selection. All objectives are minimized.

use std::cmp::Ordering;

use rand::Rng;

use super::{EvoError, EvoParams, Individual};

/// `a` dominates `b`: no worse everywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, EvoError> {
    if a.len() != b.len() {
        return Err(EvoError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Partitions objective vectors into fronts of indices. Front 0 holds every
/// vector that no other vector dominates; each later front is non-dominated
/// once the earlier fronts are removed. Indices inside a front are ascending.
pub fn sort_fronts<V: AsRef<[f64]>>(objectives: &[V]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];

    for p in 0..n {
        for q in (p + 1)..n {
            let (a, b) = (objectives[p].as_ref(), objectives[q].as_ref());
            if dominates_unchecked(a, b) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates_unchecked(b, a) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Sorts a population in place (writing `rank`) and returns its fronts.
pub fn fast_nondominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let fronts = {
        let objs: Vec<&[f64]> = pop.iter().map(|i| i.objectives.as_slice()).collect();
        sort_fronts(&objs)
    };
    for (rank, front) in fronts.iter().enumerate() {
        for &i in front {
            pop[i].rank = Some(rank);
        }
    }
    fronts
}

/// Crowding distance of each member of one front.
///
/// Per objective the two extreme members (first and last after a stable
/// sort by value) get `+inf`; interior members accumulate the gap between
/// their neighbours divided by the objective's range. A zero range adds 0.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        let value = |i: usize| front[i].as_ref()[obj];
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let (lo, hi) = (value(order[0]), value(order[n - 1]));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            if distance[w[1]].is_finite() {
                distance[w[1]] += (value(w[2]) - value(w[0])) / range;
            }
        }
    }
    distance
}

/// Result of one environmental selection step.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    /// The `n` survivors, ranked and crowded within the union.
    pub survivors: Vec<Individual>,
    /// Rank-0 members of the union, in union order.
    pub first_front: Vec<Individual>,
}

/// NSGA-II survival over `parents ∪ offspring`.
pub fn next_generation(
    parents: &[Individual],
    offspring: &[Individual],
    params: &EvoParams,
) -> Result<Vec<Individual>, EvoError> {
    Ok(select_survivors(parents, offspring, params.population_size)?.survivors)
}

/// Fills by fronts, then truncates the last front by descending crowding
/// distance; equal distances keep the lower union index.
pub fn select_survivors(
    parents: &[Individual],
    offspring: &[Individual],
    n: usize,
) -> Result<SelectionOutcome, EvoError> {
    let mut union: Vec<Individual> = parents.iter().chain(offspring).cloned().collect();
    if let Some(first) = union.first() {
        let arity = first.objectives.len();
        if let Some(bad) = union.iter().find(|i| i.objectives.len() != arity) {
            return Err(EvoError::ArityMismatch { expected: arity, found: bad.objectives.len() });
        }
    }

    let fronts = fast_nondominated_sort(&mut union);
    for front in &fronts {
        let objs: Vec<&[f64]> = front.iter().map(|&i| union[i].objectives.as_slice()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            union[i].crowding = Some(d);
        }
    }
    let first_front = fronts.first().map(|f| f.iter().map(|&i| union[i].clone()).collect()).unwrap_or_default();

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for front in &fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            continue;
        }
        let mut last = front.clone();
        last.sort_by(|&a, &b| {
            let (da, db) = (union[a].crowding.unwrap_or(0.0), union[b].crowding.unwrap_or(0.0));
            db.partial_cmp(&da).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        chosen.extend(last.into_iter().take(n - chosen.len()));
        break;
    }
    let survivors = chosen.into_iter().map(|i| union[i].clone()).collect();
    Ok(SelectionOutcome { survivors, first_front })
}

/// Crowded-comparison order: lower rank, then larger crowding distance.
pub fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    let rank = |i: &Individual| i.rank.unwrap_or(usize::MAX);
    let crowd = |i: &Individual| i.crowding.unwrap_or(0.0);
    rank(a)
        .cmp(&rank(b))
        .then_with(|| crowd(b).partial_cmp(&crowd(a)).unwrap_or(Ordering::Equal))
}

/// Binary tournament on the crowded-comparison order; a full tie keeps the
/// first contestant.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    match crowded_cmp(&pop[a], &pop[b]) {
        Ordering::Greater => b,
        _ => a,
    }
}
