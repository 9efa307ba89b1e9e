use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{self, conv_out, Conv3x3, KK};
use super::{MicronetError, Tensor};
use crate::genome::{Genome, Operation, EDGE_ENDPOINTS, GENES_PER_BLOCK, INTERNAL_NODES, NUM_BLOCKS, REDUCTION_BLOCK};
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    /// Base channel width C.
    pub width: usize,
    pub num_classes: usize,
    /// Side of the square input images (even, so the reduction halves it).
    pub image_size: usize,
    pub in_channels: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { width: 8, num_classes: 4, image_size: 8, in_channels: 1 }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), MicronetError> {
        if self.width == 0 || self.in_channels == 0 || self.num_classes < 2 {
            return Err(MicronetError::Config(format!("degenerate network shape {self:?}")));
        }
        if self.image_size < 2 || self.image_size % 2 != 0 {
            return Err(MicronetError::Config(format!("image size {} must be even and at least 2", self.image_size)));
        }
        Ok(())
    }

    /// Values in one `(block, edge, operation)` slot: depthwise, pointwise, bias.
    pub fn slot_len(&self) -> usize {
        let c = self.width;
        c * KK + c * c + c
    }
}

const NUM_INTERNAL: usize = INTERNAL_NODES.end - INTERNAL_NODES.start;
const CONV_OPS: usize = 2;
const NUM_SLOTS: usize = NUM_BLOCKS * GENES_PER_BLOCK * CONV_OPS;
/// Block inputs as feature indices: 0 is the stem, `1 + b` is block `b`.
const BLOCK_INPUTS: [(usize, usize); NUM_BLOCKS] = [(0, 0), (0, 1), (1, 2), (2, 3)];

fn slot_index(block: usize, edge: usize, op: Operation) -> Option<usize> {
    let o = match op {
        Operation::SepConv3x3 => 0,
        Operation::ResSepConv3x3 => 1,
        Operation::None | Operation::SkipConnect => return None,
    };
    Some((block * GENES_PER_BLOCK + edge) * CONV_OPS + o)
}

/// A named tensor inside a flat parameter buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Where each tensor lives in a flat parameter buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    cfg: NetConfig,
    entries: Vec<TensorEntry>,
    stem_w: usize,
    stem_b: usize,
    slots: Vec<Option<usize>>,
    proj: [usize; NUM_BLOCKS],
    head_w: usize,
    head_b: usize,
    total: usize,
}

struct Builder {
    entries: Vec<TensorEntry>,
    offset: usize,
}

impl Builder {
    fn push(&mut self, name: String, shape: Vec<usize>) -> usize {
        let offset = self.offset;
        self.offset += shape.iter().product::<usize>();
        self.entries.push(TensorEntry { name, shape, offset });
        offset
    }
}

impl ParamLayout {
    /// Every slot of the search space: the supernet layout.
    pub fn full(cfg: NetConfig) -> Self {
        Self::build(cfg, |_| true)
    }

    /// Only the slots `genome` selects: a standalone network.
    pub fn for_genome(cfg: NetConfig, genome: &Genome) -> Self {
        let mut wanted = [false; NUM_SLOTS];
        for b in 0..NUM_BLOCKS {
            for e in 0..GENES_PER_BLOCK {
                if let Some(s) = slot_index(b, e, genome.op(b, e)) {
                    wanted[s] = true;
                }
            }
        }
        Self::build(cfg, |s| wanted[s])
    }

    fn build(cfg: NetConfig, include: impl Fn(usize) -> bool) -> Self {
        let (c, k) = (cfg.width, cfg.num_classes);
        let mut b = Builder { entries: Vec::new(), offset: 0 };
        let stem_w = b.push("stem.weight".into(), vec![c, cfg.in_channels, 3, 3]);
        let stem_b = b.push("stem.bias".into(), vec![c]);
        let mut slots = vec![None; NUM_SLOTS];
        for (s, slot) in slots.iter_mut().enumerate() {
            if !include(s) {
                continue;
            }
            let (block, edge) = (s / CONV_OPS / GENES_PER_BLOCK, s / CONV_OPS % GENES_PER_BLOCK);
            let op = if s % CONV_OPS == 0 { "sep" } else { "ressep" };
            let prefix = format!("block{block}.edge{edge}.{op}");
            *slot = Some(b.push(format!("{prefix}.depthwise"), vec![c, 1, 3, 3]));
            b.push(format!("{prefix}.pointwise"), vec![c, c, 1, 1]);
            b.push(format!("{prefix}.bias"), vec![c]);
        }
        let mut proj = [0; NUM_BLOCKS];
        for (i, p) in proj.iter_mut().enumerate() {
            *p = b.push(format!("block{i}.proj"), vec![c, NUM_INTERNAL * c, 1, 1]);
        }
        let head_w = b.push("head.weight".into(), vec![k, c]);
        let head_b = b.push("head.bias".into(), vec![k]);
        ParamLayout { cfg, entries: b.entries, stem_w, stem_b, slots, proj, head_w, head_b, total: b.offset }
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Offset of the parameters of `op` on `(block, edge)`, if held.
    pub fn slot(&self, block: usize, edge: usize, op: Operation) -> Option<usize> {
        slot_index(block, edge, op).and_then(|s| self.slots[s])
    }

    /// Parameter ranges a forward pass of `genome` reads.
    pub fn active_ranges(&self, genome: &Genome) -> Vec<Range<usize>> {
        let c = self.cfg.width;
        let mut ranges = Vec::new();
        ranges.push(self.stem_w..self.stem_b + c);
        for b in 0..NUM_BLOCKS {
            for e in 0..GENES_PER_BLOCK {
                if let Some(base) = self.slot(b, e, genome.op(b, e)) {
                    ranges.push(base..base + self.cfg.slot_len());
                }
            }
        }
        for &p in &self.proj {
            ranges.push(p..p + NUM_INTERNAL * c * c);
        }
        ranges.push(self.head_w..self.head_b + self.cfg.num_classes);
        ranges
    }
}

/// A parameter buffer together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layout: ParamLayout,
    params: Vec<f64>,
}

impl Network {
    /// Weights uniform in `+-1/sqrt(fan_in)`, biases zero.
    pub fn init(layout: ParamLayout, seed: u64) -> Self {
        let mut rng = stream(seed, &[tag::SUPERNET_INIT]);
        let mut params = vec![0.0; layout.total];
        for entry in &layout.entries {
            if entry.shape.len() == 1 {
                continue;
            }
            let bound = 1.0 / (entry.shape[1..].iter().product::<usize>() as f64).sqrt();
            for p in &mut params[entry.range()] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Network { layout, params }
    }

    pub fn from_parts(layout: ParamLayout, params: Vec<f64>) -> Result<Self, MicronetError> {
        if params.len() != layout.total {
            return Err(MicronetError::Shape(format!("layout holds {} values, buffer has {}", layout.total, params.len())));
        }
        Ok(Network { layout, params })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn config(&self) -> &NetConfig {
        &self.layout.cfg
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn view(&self, genome: Genome) -> Result<SubnetView<'_>, MicronetError> {
        SubnetView::new(self, genome)
    }
}

/// Shared-weight network holding a slot for every conv operation on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Supernet(pub Network);

impl Supernet {
    pub fn init(cfg: NetConfig, seed: u64) -> Self {
        Supernet(Network::init(ParamLayout::full(cfg), seed))
    }

    pub fn network(&self) -> &Network {
        &self.0
    }

    pub fn view(&self, genome: Genome) -> SubnetView<'_> {
        SubnetView { net: &self.0, genome }
    }

    /// Standalone network holding copies of the slots `genome` selects.
    pub fn extract(&self, genome: Genome) -> StandaloneNet {
        let cfg = *self.0.config();
        let layout = ParamLayout::for_genome(cfg, &genome);
        let mut params = vec![0.0; layout.total];
        for entry in &layout.entries {
            let src = self.0.layout.entries.iter().find(|e| e.name == entry.name).expect("full layout holds every tensor");
            params[entry.range()].copy_from_slice(&self.0.params[src.range()]);
        }
        StandaloneNet { net: Network { layout, params }, genome }
    }
}

/// A network owning only the parameters of one genome.
#[derive(Debug, Clone, PartialEq)]
pub struct StandaloneNet {
    pub net: Network,
    pub genome: Genome,
}

impl StandaloneNet {
    pub fn init(cfg: NetConfig, genome: Genome, seed: u64) -> Self {
        StandaloneNet { net: Network::init(ParamLayout::for_genome(cfg, &genome), seed), genome }
    }

    pub fn view(&self) -> SubnetView<'_> {
        SubnetView { net: &self.net, genome: self.genome }
    }
}

/// Pixels are shifted by this before the stem, so that an image's mean
/// brightness does not dominate every feature.
pub const INPUT_CENTRE: f64 = 0.5;

/// Result of a batched backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    /// Mean cross-entropy over the batch.
    pub loss: f64,
    pub logits: Tensor,
    pub input: Tensor,
    /// Same layout as the network buffer; `None` when not requested.
    pub params: Option<Vec<f64>>,
}

struct EdgeTrace {
    dw: Vec<f64>,
    act: Vec<f64>,
}

struct BlockTrace {
    in_side: usize,
    out_side: usize,
    nodes: Vec<Vec<f64>>,
    edges: Vec<Option<EdgeTrace>>,
    projected: Vec<f64>,
    scale: f64,
}

struct Trace {
    centred: Vec<f64>,
    stem: Vec<f64>,
    blocks: Vec<BlockTrace>,
    pooled: Vec<f64>,
    logits: Vec<f64>,
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
}

fn sub_slice<'a>(d: &'a mut Option<&mut [f64]>, range: Range<usize>) -> Option<&'a mut [f64]> {
    d.as_deref_mut().map(|d| &mut d[range])
}

/// Two adjacent regions `[a, mid)` and `[mid, end)` of an optional buffer.
fn split_pair<'a>(d: &'a mut Option<&mut [f64]>, a: usize, mid: usize, end: usize) -> (Option<&'a mut [f64]>, Option<&'a mut [f64]>) {
    match d.as_deref_mut() {
        Some(buf) => {
            let (x, y) = buf[a..end].split_at_mut(mid - a);
            (Some(x), Some(y))
        }
        None => (None, None),
    }
}

/// A genome's path through a network's parameters.
#[derive(Debug, Clone, Copy)]
pub struct SubnetView<'a> {
    net: &'a Network,
    genome: Genome,
}

impl<'a> SubnetView<'a> {
    pub fn new(net: &'a Network, genome: Genome) -> Result<Self, MicronetError> {
        for b in 0..NUM_BLOCKS {
            for e in 0..GENES_PER_BLOCK {
                let op = genome.op(b, e);
                if op.is_conv() && net.layout.slot(b, e, op).is_none() {
                    return Err(MicronetError::MissingSlot { block: b, edge: e });
                }
            }
        }
        Ok(SubnetView { net, genome })
    }

    pub fn genome(&self) -> &Genome {
        &self.genome
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    fn cfg(&self) -> &NetConfig {
        &self.net.layout.cfg
    }

    fn p(&self, offset: usize, len: usize) -> &[f64] {
        &self.net.params[offset..offset + len]
    }

    fn stride(block: usize, src: usize) -> usize {
        if block == REDUCTION_BLOCK && src < 2 {
            2
        } else {
            1
        }
    }

    fn slot(&self, block: usize, edge: usize, op: Operation) -> usize {
        self.net.layout.slot(block, edge, op).expect("checked when the view was built")
    }

    fn stem_conv(&self) -> Conv3x3 {
        let cfg = self.cfg();
        Conv3x3 { cin: cfg.in_channels, cout: cfg.width, h: cfg.image_size, w: cfg.image_size, stride: 1, depthwise: false }
    }

    fn skip(&self, v: &[f64], side: usize, stride: usize) -> Vec<f64> {
        if stride == 1 {
            v.to_vec()
        } else {
            layers::avgpool2_forward(v, self.cfg().width, side, side)
        }
    }

    fn skip_backward(&self, dy: &[f64], dv: &mut [f64], side: usize, stride: usize) {
        if stride == 1 {
            add_into(dv, dy);
        } else {
            layers::avgpool2_backward(dy, self.cfg().width, side, side, dv);
        }
    }

    fn edge_forward(&self, block: usize, edge: usize, op: Operation, v: &[f64], side: usize, stride: usize) -> (Vec<f64>, Option<EdgeTrace>) {
        if op == Operation::SkipConnect {
            return (self.skip(v, side, stride), None);
        }
        let c = self.cfg().width;
        let base = self.slot(block, edge, op);
        let conv = Conv3x3 { cin: c, cout: c, h: side, w: side, stride, depthwise: true };
        let dw = conv.forward(v, self.p(base, c * KK), None);
        let hw = conv_out(side, stride).pow(2);
        let mut act = layers::pointwise_forward(&dw, c, c, hw, self.p(base + c * KK, c * c), Some(self.p(base + c * KK + c * c, c)));
        layers::relu_inplace(&mut act);
        let mut out = act.clone();
        if op == Operation::ResSepConv3x3 {
            add_into(&mut out, &self.skip(v, side, stride));
        }
        (out, Some(EdgeTrace { dw, act }))
    }

    #[allow(clippy::too_many_arguments)]
    fn edge_backward(
        &self,
        block: usize,
        edge: usize,
        op: Operation,
        v: &[f64],
        side: usize,
        stride: usize,
        trace: Option<&EdgeTrace>,
        dy: &[f64],
        dv: &mut [f64],
        dparams: &mut Option<&mut [f64]>,
    ) {
        if op == Operation::SkipConnect {
            self.skip_backward(dy, dv, side, stride);
            return;
        }
        let t = trace.expect("conv edges keep a trace");
        let c = self.cfg().width;
        let base = self.slot(block, edge, op);
        let hw = conv_out(side, stride).pow(2);
        let d_act = layers::relu_backward(&t.act, dy);
        let mut d_dw = vec![0.0; c * hw];
        let pw = base + c * KK;
        let pb = pw + c * c;
        {
            let (dpw, dpb) = split_pair(dparams, pw, pb, pb + c);
            layers::pointwise_backward(&t.dw, c, c, hw, self.p(pw, c * c), &d_act, &mut d_dw, dpw, dpb);
        }
        let conv = Conv3x3 { cin: c, cout: c, h: side, w: side, stride, depthwise: true };
        conv.backward(v, self.p(base, c * KK), &d_dw, dv, sub_slice(dparams, base..pw), None);
        if op == Operation::ResSepConv3x3 {
            self.skip_backward(dy, dv, side, stride);
        }
    }

    fn block_forward(&self, block: usize, in0: &[f64], in1: &[f64], side: usize) -> (BlockTrace, Vec<f64>) {
        let c = self.cfg().width;
        let out_side = if block == REDUCTION_BLOCK { conv_out(side, 2) } else { side };
        let hw = out_side * out_side;
        let mut nodes = vec![in0.to_vec(), in1.to_vec()];
        nodes.extend((0..NUM_INTERNAL).map(|_| vec![0.0; c * hw]));
        let mut edges: Vec<Option<EdgeTrace>> = (0..GENES_PER_BLOCK).map(|_| None).collect();
        for (e, &(src, dst)) in EDGE_ENDPOINTS.iter().enumerate() {
            let op = self.genome.op(block, e);
            if op == Operation::None {
                continue;
            }
            let src_side = if src < 2 { side } else { out_side };
            let (contrib, trace) = self.edge_forward(block, e, op, &nodes[src], src_side, Self::stride(block, src));
            add_into(&mut nodes[dst], &contrib);
            edges[e] = trace;
        }
        let concat = nodes[INTERNAL_NODES].concat();
        let projected = layers::pointwise_forward(&concat, NUM_INTERNAL * c, c, hw, self.p(self.net.layout.proj[block], NUM_INTERNAL * c * c), None);
        let (out, scale) = layers::sample_norm_forward(&projected);
        (BlockTrace { in_side: side, out_side, nodes, edges, projected, scale }, out)
    }

    fn block_backward(&self, block: usize, t: &BlockTrace, dout: &[f64], dparams: &mut Option<&mut [f64]>) -> (Vec<f64>, Vec<f64>) {
        let c = self.cfg().width;
        let hw = t.out_side * t.out_side;
        let concat = t.nodes[INTERNAL_NODES].concat();
        let mut dconcat = vec![0.0; NUM_INTERNAL * c * hw];
        let proj = self.net.layout.proj[block];
        let plen = NUM_INTERNAL * c * c;
        let dproj = layers::sample_norm_backward(&t.projected, t.scale, dout);
        layers::pointwise_backward(&concat, NUM_INTERNAL * c, c, hw, self.p(proj, plen), &dproj, &mut dconcat, sub_slice(dparams, proj..proj + plen), None);
        let in_len = c * t.in_side * t.in_side;
        let mut dnodes = vec![vec![0.0; in_len], vec![0.0; in_len]];
        dnodes.extend(dconcat.chunks(c * hw).map(<[f64]>::to_vec));
        // edges are listed by ascending destination, so walking them backwards
        // finishes each node's gradient before any of its incoming edges
        for e in (0..GENES_PER_BLOCK).rev() {
            let op = self.genome.op(block, e);
            if op == Operation::None {
                continue;
            }
            let (src, dst) = EDGE_ENDPOINTS[e];
            let src_side = if src < 2 { t.in_side } else { t.out_side };
            let (lo, hi) = dnodes.split_at_mut(dst);
            self.edge_backward(block, e, op, &t.nodes[src], src_side, Self::stride(block, src), t.edges[e].as_ref(), &hi[0], &mut lo[src], dparams);
        }
        let d1 = dnodes.swap_remove(1);
        let d0 = dnodes.swap_remove(0);
        (d0, d1)
    }

    fn forward_sample(&self, x: &[f64]) -> Trace {
        let cfg = *self.cfg();
        let layout = &self.net.layout;
        let c = cfg.width;
        let centred: Vec<f64> = x.iter().map(|v| v - INPUT_CENTRE).collect();
        let mut stem = self.stem_conv().forward(&centred, self.p(layout.stem_w, c * cfg.in_channels * KK), Some(self.p(layout.stem_b, c)));
        layers::relu_inplace(&mut stem);
        let mut feats: Vec<Vec<f64>> = vec![stem];
        let mut sides = vec![cfg.image_size];
        let mut blocks = Vec::with_capacity(NUM_BLOCKS);
        for (b, &(i0, i1)) in BLOCK_INPUTS.iter().enumerate() {
            let (trace, out) = self.block_forward(b, &feats[i0], &feats[i1], sides[i1]);
            sides.push(trace.out_side);
            blocks.push(trace);
            feats.push(out);
        }
        let last = sides[NUM_BLOCKS];
        let pooled = layers::gap_forward(&feats[NUM_BLOCKS], c, last * last);
        let k = cfg.num_classes;
        let w = self.p(layout.head_w, k * c);
        let logits = (0..k)
            .map(|j| self.net.params[layout.head_b + j] + w[j * c..(j + 1) * c].iter().zip(&pooled).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let stem = feats.swap_remove(0);
        Trace { centred, stem, blocks, pooled, logits }
    }

    fn backward_sample(&self, t: &Trace, dlogits: &[f64], dx: &mut [f64], dparams: &mut Option<&mut [f64]>) {
        let cfg = *self.cfg();
        let layout = &self.net.layout;
        let (c, k) = (cfg.width, cfg.num_classes);
        let w = self.p(layout.head_w, k * c);
        let mut dpooled = vec![0.0; c];
        for j in 0..k {
            for ch in 0..c {
                dpooled[ch] += w[j * c + ch] * dlogits[j];
            }
        }
        if let Some(d) = dparams.as_deref_mut() {
            for j in 0..k {
                for ch in 0..c {
                    d[layout.head_w + j * c + ch] += t.pooled[ch] * dlogits[j];
                }
                d[layout.head_b + j] += dlogits[j];
            }
        }
        let mut dfeat: Vec<Vec<f64>> = Vec::with_capacity(NUM_BLOCKS + 1);
        dfeat.push(vec![0.0; t.stem.len()]);
        for b in &t.blocks {
            dfeat.push(vec![0.0; c * b.out_side * b.out_side]);
        }
        let last = t.blocks[NUM_BLOCKS - 1].out_side;
        layers::gap_backward(&dpooled, c, last * last, &mut dfeat[NUM_BLOCKS]);
        for b in (0..NUM_BLOCKS).rev() {
            let (d0, d1) = self.block_backward(b, &t.blocks[b], &dfeat[1 + b], dparams);
            let (i0, i1) = BLOCK_INPUTS[b];
            add_into(&mut dfeat[i0], &d0);
            add_into(&mut dfeat[i1], &d1);
        }
        let dpre = layers::relu_backward(&t.stem, &dfeat[0]);
        let wlen = c * cfg.in_channels * KK;
        let (dw, db) = split_pair(dparams, layout.stem_w, layout.stem_b, layout.stem_b + c);
        self.stem_conv().backward(&t.centred, self.p(layout.stem_w, wlen), &dpre, dx, dw, db);
    }

    fn check_input(&self, x: &Tensor) -> Result<(), MicronetError> {
        let cfg = self.cfg();
        let want = [cfg.in_channels, cfg.image_size, cfg.image_size];
        if x.shape().len() != 4 || x.shape()[1..] != want || x.batch() == 0 {
            return Err(MicronetError::Shape(format!("expected (N, {}, {}, {}) input, got {:?}", want[0], want[1], want[2], x.shape())));
        }
        Ok(())
    }

    /// Class logits, shape `(N, num_classes)`.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor, MicronetError> {
        self.check_input(x)?;
        let n = x.batch();
        let mut data = Vec::with_capacity(n * self.cfg().num_classes);
        for i in 0..n {
            data.extend(self.forward_sample(x.sample(i)).logits);
        }
        Tensor::new(vec![n, self.cfg().num_classes], data)
    }

    /// Mean cross-entropy and its exact gradients.
    pub fn loss_and_grad(&self, x: &Tensor, y: &[usize], want_params: bool) -> Result<Gradients, MicronetError> {
        self.check_input(x)?;
        let n = x.batch();
        let k = self.cfg().num_classes;
        if y.len() != n {
            return Err(MicronetError::Shape(format!("{} labels for {n} inputs", y.len())));
        }
        if let Some(&label) = y.iter().find(|&&l| l >= k) {
            return Err(MicronetError::BadLabel { label, classes: k });
        }
        let mut pbuf = want_params.then(|| vec![0.0; self.net.params.len()]);
        let mut dparams = pbuf.as_deref_mut();
        let mut input = Tensor::zeros(x.shape().to_vec());
        let mut logits = Vec::with_capacity(n * k);
        let mut loss = 0.0;
        for i in 0..n {
            let trace = self.forward_sample(x.sample(i));
            let (l, mut g) = layers::softmax_xent(&trace.logits, y[i]);
            loss += l;
            g.iter_mut().for_each(|v| *v /= n as f64);
            self.backward_sample(&trace, &g, input.sample_mut(i), &mut dparams);
            logits.extend_from_slice(&trace.logits);
        }
        Ok(Gradients { loss: loss / n as f64, logits: Tensor::new(vec![n, k], logits)?, input, params: pbuf })
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, x: &Tensor, y: &[usize]) -> Result<f64, MicronetError> {
        let logits = self.forward(x)?;
        if y.len() != x.batch() {
            return Err(MicronetError::Shape(format!("{} labels for {} inputs", y.len(), x.batch())));
        }
        let mut total = 0.0;
        for (i, &label) in y.iter().enumerate() {
            if label >= self.cfg().num_classes {
                return Err(MicronetError::BadLabel { label, classes: self.cfg().num_classes });
            }
            total += layers::softmax_xent(logits.sample(i), label).0;
        }
        Ok(total / y.len() as f64)
    }
}
