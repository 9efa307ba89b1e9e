use rayon::prelude::*;

use super::archive::ArchiveEntry;
use super::evaluator::Evaluator;
use super::SearchError;
use crate::evo::sort_fronts;

/// Scores every archived genome at high fidelity and keeps the members that
/// are non-dominated on `(f1h, f2h)`, in archive order. High-fidelity values
/// already on an entry are reused.
pub fn secondary_screening(archive: &[ArchiveEntry], evaluator: &dyn Evaluator) -> Result<Vec<ArchiveEntry>, SearchError> {
    if archive.is_empty() {
        return Err(SearchError::EmptyArchive);
    }
    let scored: Vec<Result<ArchiveEntry, SearchError>> = archive
        .par_iter()
        .map(|e| {
            let high = match e.high {
                Some(h) => h,
                None => evaluator.high(&e.genome)?,
            };
            Ok(ArchiveEntry { high: Some(high), ..e.clone() })
        })
        .collect();
    let scored = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    let points: Vec<[f64; 2]> = scored.iter().map(|e| e.high.map(|(a, b)| [a, b]).expect("filled above")).collect();
    let mut front = sort_fronts(&points).swap_remove(0);
    front.sort_unstable();
    Ok(front.into_iter().map(|i| scored[i].clone()).collect())
}
