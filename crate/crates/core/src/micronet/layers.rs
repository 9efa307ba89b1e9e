//! Per-sample layer kernels over `C x H x W` buffers, each with an exact
//! backward pass. Backward functions accumulate (`+=`) into their gradient
//! outputs so that branches sharing an input can sum in place.

pub(crate) const K: usize = 3;
pub(crate) const KK: usize = K * K;

/// Output side of a 3x3 convolution with padding 1.
pub fn conv_out(size: usize, stride: usize) -> usize {
    (size - 1) / stride + 1
}

/// Geometry of a padded 3x3 convolution.
#[derive(Debug, Clone, Copy)]
pub struct Conv3x3 {
    pub cin: usize,
    pub cout: usize,
    pub h: usize,
    pub w: usize,
    pub stride: usize,
    /// One filter per channel (`cin == cout`) instead of a full mix.
    pub depthwise: bool,
}

impl Conv3x3 {
    pub fn out_hw(&self) -> (usize, usize) {
        (conv_out(self.h, self.stride), conv_out(self.w, self.stride))
    }

    pub fn weight_len(&self) -> usize {
        if self.depthwise {
            self.cout * KK
        } else {
            self.cout * self.cin * KK
        }
    }

    fn inputs_of(&self, co: usize) -> std::ops::Range<usize> {
        if self.depthwise {
            co..co + 1
        } else {
            0..self.cin
        }
    }

    fn filter(&self, co: usize, ci: usize) -> usize {
        if self.depthwise {
            co * KK
        } else {
            (co * self.cin + ci) * KK
        }
    }

    pub fn forward(&self, x: &[f64], weight: &[f64], bias: Option<&[f64]>) -> Vec<f64> {
        debug_assert_eq!(weight.len(), self.weight_len());
        let (ho, wo) = self.out_hw();
        let (h, w, s) = (self.h as isize, self.w as isize, self.stride as isize);
        let mut out = vec![0.0; self.cout * ho * wo];
        for co in 0..self.cout {
            let plane = &mut out[co * ho * wo..(co + 1) * ho * wo];
            if let Some(b) = bias {
                plane.iter_mut().for_each(|v| *v = b[co]);
            }
            for ci in self.inputs_of(co) {
                let f = &weight[self.filter(co, ci)..self.filter(co, ci) + KK];
                let xin = &x[ci * self.h * self.w..(ci + 1) * self.h * self.w];
                for oy in 0..ho {
                    for ox in 0..wo {
                        let mut acc = 0.0;
                        for ky in 0..K as isize {
                            let iy = oy as isize * s + ky - 1;
                            if iy < 0 || iy >= h {
                                continue;
                            }
                            for kx in 0..K as isize {
                                let ix = ox as isize * s + kx - 1;
                                if ix < 0 || ix >= w {
                                    continue;
                                }
                                acc += f[(ky * 3 + kx) as usize] * xin[(iy * w + ix) as usize];
                            }
                        }
                        plane[oy * wo + ox] += acc;
                    }
                }
            }
        }
        out
    }

    /// Accumulates input, weight and bias gradients for upstream `dy`.
    pub fn backward(
        &self,
        x: &[f64],
        weight: &[f64],
        dy: &[f64],
        dx: &mut [f64],
        mut dweight: Option<&mut [f64]>,
        dbias: Option<&mut [f64]>,
    ) {
        let (ho, wo) = self.out_hw();
        let (h, w, s) = (self.h as isize, self.w as isize, self.stride as isize);
        if let Some(db) = dbias {
            for co in 0..self.cout {
                db[co] += dy[co * ho * wo..(co + 1) * ho * wo].iter().sum::<f64>();
            }
        }
        for co in 0..self.cout {
            let g = &dy[co * ho * wo..(co + 1) * ho * wo];
            for ci in self.inputs_of(co) {
                let fo = self.filter(co, ci);
                let base = ci * self.h * self.w;
                for oy in 0..ho {
                    for ox in 0..wo {
                        let gv = g[oy * wo + ox];
                        if gv == 0.0 {
                            continue;
                        }
                        for ky in 0..K as isize {
                            let iy = oy as isize * s + ky - 1;
                            if iy < 0 || iy >= h {
                                continue;
                            }
                            for kx in 0..K as isize {
                                let ix = ox as isize * s + kx - 1;
                                if ix < 0 || ix >= w {
                                    continue;
                                }
                                let k = (ky * 3 + kx) as usize;
                                let xi = base + (iy * w + ix) as usize;
                                dx[xi] += weight[fo + k] * gv;
                                if let Some(dw) = dweight.as_deref_mut() {
                                    dw[fo + k] += x[xi] * gv;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// 1x1 convolution: `out[co, p] = b[co] + sum_ci W[co, ci] x[ci, p]`.
pub fn pointwise_forward(x: &[f64], cin: usize, cout: usize, hw: usize, weight: &[f64], bias: Option<&[f64]>) -> Vec<f64> {
    let mut out = vec![0.0; cout * hw];
    for co in 0..cout {
        let plane = &mut out[co * hw..(co + 1) * hw];
        if let Some(b) = bias {
            plane.iter_mut().for_each(|v| *v = b[co]);
        }
        for ci in 0..cin {
            let wv = weight[co * cin + ci];
            if wv == 0.0 {
                continue;
            }
            for (o, xv) in plane.iter_mut().zip(&x[ci * hw..(ci + 1) * hw]) {
                *o += wv * xv;
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn pointwise_backward(
    x: &[f64],
    cin: usize,
    cout: usize,
    hw: usize,
    weight: &[f64],
    dy: &[f64],
    dx: &mut [f64],
    mut dweight: Option<&mut [f64]>,
    dbias: Option<&mut [f64]>,
) {
    if let Some(db) = dbias {
        for co in 0..cout {
            db[co] += dy[co * hw..(co + 1) * hw].iter().sum::<f64>();
        }
    }
    for co in 0..cout {
        let g = &dy[co * hw..(co + 1) * hw];
        for ci in 0..cin {
            let xin = &x[ci * hw..(ci + 1) * hw];
            let wv = weight[co * cin + ci];
            if let Some(dw) = dweight.as_deref_mut() {
                dw[co * cin + ci] += g.iter().zip(xin).map(|(a, b)| a * b).sum::<f64>();
            }
            for (d, gv) in dx[ci * hw..(ci + 1) * hw].iter_mut().zip(g) {
                *d += wv * gv;
            }
        }
    }
}

pub fn relu_inplace(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Gradient through a rectifier given its output.
pub fn relu_backward(out: &[f64], dy: &[f64]) -> Vec<f64> {
    out.iter().zip(dy).map(|(&o, &g)| if o > 0.0 { g } else { 0.0 }).collect()
}

/// 2x2 average pooling with stride 2 (even sides).
pub fn avgpool2_forward(x: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let (ho, wo) = (h / 2, w / 2);
    let mut out = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let base = ch * h * w + 2 * oy * w + 2 * ox;
                out[ch * ho * wo + oy * wo + ox] = 0.25 * (x[base] + x[base + 1] + x[base + w] + x[base + w + 1]);
            }
        }
    }
    out
}

pub fn avgpool2_backward(dy: &[f64], c: usize, h: usize, w: usize, dx: &mut [f64]) {
    let (ho, wo) = (h / 2, w / 2);
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let g = 0.25 * dy[ch * ho * wo + oy * wo + ox];
                let base = ch * h * w + 2 * oy * w + 2 * ox;
                dx[base] += g;
                dx[base + 1] += g;
                dx[base + w] += g;
                dx[base + w + 1] += g;
            }
        }
    }
}

/// Global average pooling to one value per channel.
pub fn gap_forward(x: &[f64], c: usize, hw: usize) -> Vec<f64> {
    (0..c).map(|ch| x[ch * hw..(ch + 1) * hw].iter().sum::<f64>() / hw as f64).collect()
}

pub fn gap_backward(dy: &[f64], c: usize, hw: usize, dx: &mut [f64]) {
    for ch in 0..c {
        let g = dy[ch] / hw as f64;
        dx[ch * hw..(ch + 1) * hw].iter_mut().for_each(|d| *d += g);
    }
}

/// Keeps constant inputs at zero and bounds the scale of everything else.
pub const NORM_FLOOR: f64 = 1e-10;

/// Per-sample standardization `y = (z - mean(z)) / sqrt(var(z) + floor)`
/// over all entries; returns `y` and the scale `1 / sqrt(var(z) + floor)`.
pub fn sample_norm_forward(z: &[f64]) -> (Vec<f64>, f64) {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let s = 1.0 / (var + NORM_FLOOR).sqrt();
    (z.iter().map(|v| (v - mean) * s).collect(), s)
}

pub fn sample_norm_backward(z: &[f64], scale: f64, dy: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let y: Vec<f64> = z.iter().map(|v| (v - mean) * scale).collect();
    let dy_mean = dy.iter().sum::<f64>() / n;
    let dy_y = dy.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n;
    dy.iter().zip(&y).map(|(g, v)| scale * (g - dy_mean - v * dy_y)).collect()
}

/// Mean-free softmax cross-entropy of one sample; returns loss and dlogits.
pub fn softmax_xent(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = z.ln() + max - logits[label];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / z).collect();
    grad[label] -= 1.0;
    (loss, grad)
}
