use std::collections::HashSet;

use crate::evo::dominates_unchecked;
use crate::genome::Genome;

/// An archived individual with the objective vector it was admitted under.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub genome: Genome,
    /// Selection objectives at insertion time; empty when read back from disk.
    pub objectives: Vec<f64>,
    pub low: Option<(f64, f64)>,
    pub f3: Option<f64>,
    pub high: Option<(f64, f64)>,
    pub generation: usize,
}

/// Mutually non-dominated set of distinct genomes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    genomes: HashSet<Genome>,
}

impl Archive {
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, g: &Genome) -> bool {
        self.genomes.contains(g)
    }

    /// Offers one candidate; returns whether it was admitted. Known genomes
    /// are rejected, dominated candidates are rejected, and members the
    /// newcomer dominates are evicted.
    pub fn offer(&mut self, candidate: ArchiveEntry) -> bool {
        if self.genomes.contains(&candidate.genome) {
            return false;
        }
        if self.entries.iter().any(|e| dominates_unchecked(&e.objectives, &candidate.objectives)) {
            return false;
        }
        let genomes = &mut self.genomes;
        self.entries.retain(|e| {
            let keep = !dominates_unchecked(&candidate.objectives, &e.objectives);
            if !keep {
                genomes.remove(&e.genome);
            }
            keep
        });
        self.genomes.insert(candidate.genome);
        self.entries.push(candidate);
        true
    }

    pub fn update(&mut self, candidates: impl IntoIterator<Item = ArchiveEntry>) -> usize {
        candidates.into_iter().map(|c| usize::from(self.offer(c))).sum()
    }

    /// Checks the archive invariant by brute force.
    pub fn is_mutually_nondominated(&self) -> bool {
        self.entries.iter().all(|a| self.entries.iter().all(|b| !dominates_unchecked(&a.objectives, &b.objectives)))
    }
}
