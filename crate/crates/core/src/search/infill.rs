use std::cmp::Ordering;
use std::collections::HashSet;

use crate::gates::ArchEmbedding;
use crate::genome::Genome;
use crate::surrogate::TrainingSet;

/// Euclidean distance from `e` to the closest embedding in `set`.
pub fn nearest_distance(e: &ArchEmbedding, set: &TrainingSet) -> f64 {
    set.records().iter().map(|r| e.distance(&r.embedding)).fold(f64::INFINITY, f64::min)
}

/// Picks up to `k` population indices to evaluate at high fidelity:
/// `ceil(k/2)` promising ones (lowest predicted score) and `floor(k/2)`
/// uncertain ones (farthest from their nearest neighbour in `set`). Genomes
/// already in `set` and repeated genomes are skipped; a shortfall is filled
/// with the next most promising. Ties go to the lower index.
pub fn infill_select(genomes: &[Genome], f3: &[f64], embeddings: &[ArchEmbedding], set: &TrainingSet, k: usize) -> Vec<usize> {
    assert!(genomes.len() == f3.len() && genomes.len() == embeddings.len());
    let mut seen = HashSet::new();
    let candidates: Vec<usize> = (0..genomes.len()).filter(|&i| !set.contains(&genomes[i]) && seen.insert(genomes[i])).collect();

    let mut promising = candidates.clone();
    promising.sort_by(|&a, &b| f3[a].partial_cmp(&f3[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let distance: Vec<f64> = candidates.iter().map(|&i| nearest_distance(&embeddings[i], set)).collect();
    let mut uncertain: Vec<usize> = (0..candidates.len()).collect();
    uncertain.sort_by(|&a, &b| distance[b].partial_cmp(&distance[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let uncertain: Vec<usize> = uncertain.into_iter().map(|j| candidates[j]).collect();

    let mut chosen: Vec<usize> = promising.iter().copied().take(k.div_ceil(2)).collect();
    let mut taken: HashSet<usize> = chosen.iter().copied().collect();
    let mut n_uncertain = 0;
    for &i in &uncertain {
        if n_uncertain >= k / 2 {
            break;
        }
        if taken.insert(i) {
            chosen.push(i);
            n_uncertain += 1;
        }
    }
    for &i in &promising {
        if chosen.len() >= k {
            break;
        }
        if taken.insert(i) {
            chosen.push(i);
        }
    }
    chosen
}
