use nalgebra::{DMatrix, DVector};

use super::{kmeans, SurrogateError, TrainingSet};

/// Number of Gaussian basis functions.
pub const RBF_CENTERS: usize = 128;
const KMEANS_ITERS: usize = 100;
/// Singular values below this fraction of the largest are truncated.
const RANK_TOLERANCE: f64 = 1e-10;

/// Gaussian RBF network with one shared width and a bias term.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    pub centers: Vec<Vec<f64>>,
    pub width: f64,
    /// One weight per center followed by the bias.
    pub weights: Vec<f64>,
}

impl RbfModel {
    fn features<'a>(centers: &'a [Vec<f64>], width: f64, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let denom = 2.0 * width * width;
        centers
            .iter()
            .map(move |c| {
                let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / denom).exp()
            })
            .chain(std::iter::once(1.0))
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        Self::features(&self.centers, self.width, x).zip(&self.weights).map(|(f, w)| f * w).sum()
    }
}

/// Centers from k-means, width from the largest center spread, weights by
/// pseudo-inverse least squares.
pub fn fit_rbf(set: &TrainingSet, seed: u64) -> Result<RbfModel, SurrogateError> {
    fit_rbf_with(set, RBF_CENTERS, seed)
}

pub fn fit_rbf_with(set: &TrainingSet, num_centers: usize, seed: u64) -> Result<RbfModel, SurrogateError> {
    if set.len() < 2 {
        return Err(SurrogateError::DegenerateTrainingSet(set.len()));
    }
    let points: Vec<&[f64]> = set.records().iter().map(|r| r.embedding.as_slice()).collect();
    let centers = kmeans(&points, num_centers, seed, KMEANS_ITERS)?;

    let mut width: f64 = 0.0;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            width = width.max(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
        }
    }
    if width == 0.0 {
        width = 1.0;
    }

    let cols = centers.len() + 1;
    let mut phi = DMatrix::<f64>::zeros(points.len(), cols);
    for (r, p) in points.iter().enumerate() {
        for (c, f) in RbfModel::features(&centers, width, p).enumerate() {
            phi[(r, c)] = f;
        }
    }
    let labels = DVector::from_iterator(set.len(), set.records().iter().map(|r| r.label));
    let svd = phi.svd(true, true);
    let largest = svd.singular_values.max();
    let solution = svd
        .solve(&labels, RANK_TOLERANCE * largest)
        .map_err(|e| SurrogateError::Numeric(e.to_string()))?;
    let weights: Vec<f64> = solution.iter().copied().collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(SurrogateError::Numeric("non-finite RBF weights".into()));
    }
    Ok(RbfModel { centers, width, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::ArchEmbedding;
    use crate::genome::{random_genome, Genome};
    use crate::rng::stream;
    use rand::Rng;

    fn random_set(n: usize, seed: u64, label: impl Fn(usize) -> f64) -> TrainingSet {
        let mut rng = stream(seed, &[]);
        let mut set = TrainingSet::default();
        while set.len() < n {
            let g = random_genome(&mut rng);
            let e: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l = label(set.len());
            set.insert(g, ArchEmbedding::from_vec(e).unwrap(), l, l);
        }
        set
    }

    #[test]
    fn interpolates_fewer_points_than_centers() {
        let mut rng = stream(1, &[]);
        let labels: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let set = random_set(50, 2, |i| labels[i]);
        let model = fit_rbf(&set, 3).unwrap();
        assert_eq!(model.weights.len(), 129);
        let mse: f64 = set.records().iter().map(|r| (model.predict(r.embedding.as_slice()) - r.label).powi(2)).sum::<f64>() / 50.0;
        assert!(mse.sqrt() < 1e-6, "rmse {}", mse.sqrt());
        assert_eq!(model, fit_rbf(&set, 3).unwrap());
    }

    #[test]
    fn constant_labels_are_recovered() {
        let set = random_set(60, 4, |_| 0.37);
        let model = fit_rbf(&set, 5).unwrap();
        for r in set.records() {
            assert!((model.predict(r.embedding.as_slice()) - 0.37).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_embeddings_give_constant_model() {
        let mut set = TrainingSet::default();
        let e = ArchEmbedding::from_vec(vec![0.5; 128]).unwrap();
        let mut rng = stream(6, &[]);
        for i in 0..4 {
            set.insert(random_genome(&mut rng), e.clone(), 0.1 * i as f64, 0.1 * i as f64);
        }
        let model = fit_rbf(&set, 0).unwrap();
        assert_eq!(model.width, 1.0);
        let mean = set.records().iter().map(|r| r.label).sum::<f64>() / 4.0;
        assert!((model.predict(e.as_slice()) - mean).abs() < 1e-9);
    }

    #[test]
    fn too_small_set_is_rejected() {
        let mut set = TrainingSet::default();
        set.insert(Genome::uniform(crate::genome::Operation::None), ArchEmbedding::from_vec(vec![0.0; 128]).unwrap(), 0.5, 0.5);
        assert!(matches!(fit_rbf(&set, 0), Err(SurrogateError::DegenerateTrainingSet(1))));
    }
}
