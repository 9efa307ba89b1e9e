use super::MicronetError;

/// Dense row-major tensor; the leading axis is the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, MicronetError> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || expected != data.len() {
            return Err(MicronetError::Shape(format!("shape {shape:?} does not hold {} values", data.len())));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    /// Values per batch item.
    pub fn sample_len(&self) -> usize {
        self.shape[1..].iter().product()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let n = self.sample_len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn sample_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.sample_len();
        &mut self.data[i * n..(i + 1) * n]
    }

    /// Batch items at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Tensor {
        let mut shape = self.shape.clone();
        shape[0] = indices.len();
        let data = indices.iter().flat_map(|&i| self.sample(i).iter().copied()).collect();
        Tensor { shape, data }
    }

    /// Concatenates along the batch axis.
    pub fn concat(parts: &[Tensor]) -> Result<Tensor, MicronetError> {
        let first = parts.first().ok_or_else(|| MicronetError::Shape("nothing to concatenate".into()))?;
        if parts.iter().any(|p| p.shape[1..] != first.shape[1..]) {
            return Err(MicronetError::Shape("trailing dimensions differ".into()));
        }
        let mut shape = first.shape.clone();
        shape[0] = parts.iter().map(Tensor::batch).sum();
        let data = parts.iter().flat_map(|p| p.data.iter().copied()).collect();
        Ok(Tensor { shape, data })
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks_and_batch_ops() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        let t = Tensor::new(vec![3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(t.sample(1), &[3.0, 4.0]);
        let s = t.select(&[2, 0]);
        assert_eq!(s.data(), &[5.0, 6.0, 1.0, 2.0]);
        let c = Tensor::concat(&[s.clone(), t.clone()]).unwrap();
        assert_eq!(c.shape(), &[5, 2]);
        assert!(Tensor::concat(&[t, Tensor::zeros(vec![1, 3])]).is_err());
    }
}
