use super::SearchError;

/// Exact hypervolume dominated by `front` and bounded by `reference`
/// (minimization). Dominated and duplicate points are harmless.
pub fn hypervolume<P: AsRef<[f64]>>(front: &[P], reference: &[f64]) -> Result<f64, SearchError> {
    let dim = reference.len();
    if dim != 2 && dim != 3 {
        return Err(SearchError::Dimension(dim));
    }
    for p in front {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(SearchError::Dimension(p.len()));
        }
        if p.iter().zip(reference).any(|(a, r)| a > r || a.is_nan()) {
            return Err(SearchError::PointBeyondReference { point: p.to_vec(), reference: reference.to_vec() });
        }
    }
    let points: Vec<&[f64]> = front.iter().map(AsRef::as_ref).collect();
    Ok(if dim == 2 {
        hv2(points.iter().map(|p| (p[0], p[1])).collect(), reference[0], reference[1])
    } else {
        hv3(&points, reference)
    })
}

/// Union area of the boxes `[x, rx] x [y, ry]`: a sweep in ascending `x`
/// keeping the running minimum of `y`.
fn hv2(mut pts: Vec<(f64, f64)>, rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut area = 0.0;
    let mut best_y = ry;
    for (i, &(x, y)) in pts.iter().enumerate() {
        best_y = best_y.min(y);
        let next_x = pts.get(i + 1).map_or(rx, |p| p.0);
        area += (next_x - x) * (ry - best_y);
    }
    area
}

/// Slices along the third objective and sums 2D areas.
fn hv3(points: &[&[f64]], reference: &[f64]) -> f64 {
    let mut order: Vec<&[f64]> = points.to_vec();
    order.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    for i in 0..order.len() {
        let z = order[i][2];
        let next_z = order.get(i + 1).map_or(reference[2], |p| p[2]);
        if next_z <= z {
            continue;
        }
        let slab: Vec<(f64, f64)> = order[..=i].iter().map(|p| (p[0], p[1])).collect();
        volume += (next_z - z) * hv2(slab, reference[0], reference[1]);
    }
    volume
}
