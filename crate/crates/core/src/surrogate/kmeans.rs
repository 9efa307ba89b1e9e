use rand::Rng;
use rand::SeedableRng;

use super::SurrogateError;
use crate::rng::RngStream;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_points<'a>(points: &[&'a [f64]]) -> Vec<&'a [f64]> {
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .filter(|p| seen.insert(p.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .copied()
        .collect()
}

/// Lloyd's k-means with k-means++ seeding.
///
/// When there are at most `k` distinct points the distinct points are the
/// centers, padded to `k` by repeating the last one.
pub fn kmeans(points: &[&[f64]], k: usize, seed: u64, max_iters: usize) -> Result<Vec<Vec<f64>>, SurrogateError> {
    if points.is_empty() || k == 0 {
        return Err(SurrogateError::EmptyInput);
    }
    let distinct = distinct_points(points);
    if distinct.len() <= k {
        let mut centers: Vec<Vec<f64>> = distinct.iter().map(|p| p.to_vec()).collect();
        let last = centers.last().cloned().expect("non-empty");
        centers.resize(k, last);
        return Ok(centers);
    }

    let mut rng = RngStream::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![distinct[rng.random_range(0..distinct.len())].to_vec()];
    let mut nearest: Vec<f64> = distinct.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = nearest.iter().rposition(|&d| d > 0.0).expect("more distinct points than centers");
        for (i, &d) in nearest.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        centers.push(distinct[pick].to_vec());
        for (n, p) in nearest.iter_mut().zip(&distinct) {
            *n = n.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..max_iters {
        let mut moved = false;
        for (a, p) in assignment.iter_mut().zip(points) {
            let best = (0..k)
                .min_by(|&i, &j| sq_dist(p, &centers[i]).total_cmp(&sq_dist(p, &centers[j])))
                .expect("k >= 1");
            if *a != best {
                *a = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for ((center, sum), count) in centers.iter_mut().zip(sums).zip(counts) {
            // empty clusters keep their previous center
            if count > 0 {
                *center = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    Ok(centers)
}
