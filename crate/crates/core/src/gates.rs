//! Graph encoder that embeds a cell by simulating information flow.
//!
//! Each block starts from two fixed input-node vectors. Along an edge with
//! operation `o` the source information `I_src` is linearly transformed by
//! `W_x` and gated elementwise by the mask `sigmoid(EMB(o) W_o)`; incoming
//! contributions are summed at each node. `None` edges contribute nothing.
//! A block is summarized by the mean of its internal nodes, and the four
//! block summaries are concatenated into a 128-dimensional embedding.

use rand::Rng;

use crate::genome::{BlockDag, CellArchitecture, Genome, Operation, INTERNAL_NODES, NODES_PER_BLOCK, NUM_BLOCKS, NUM_OPERATIONS};
use crate::rng::RngStream;
use rand::SeedableRng;

/// Operation-embedding width.
pub const OP_DIM: usize = 16;
/// Information width (per-block embedding length).
pub const INFO_DIM: usize = 32;
pub const EMBEDDING_DIM: usize = NUM_BLOCKS * INFO_DIM;

/// Encoder weights. Fixed at seeded initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct GatesParams {
    /// `4 x OP_DIM`, one row per operation.
    pub emb: Vec<f64>,
    /// `OP_DIM x INFO_DIM`.
    pub w_o: Vec<f64>,
    /// `INFO_DIM x INFO_DIM`.
    pub w_x: Vec<f64>,
    /// Unit-norm information of input nodes 0 and 1, shared by all blocks.
    pub input_info: [Vec<f64>; 2],
    pub seed: u64,
    masks: [Vec<f64>; NUM_OPERATIONS],
}

/// Cell embedding of length [`EMBEDDING_DIM`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArchEmbedding(Vec<f64>);

impl ArchEmbedding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn from_vec(values: Vec<f64>) -> Option<Self> {
        (values.len() == EMBEDDING_DIM).then_some(ArchEmbedding(values))
    }

    pub fn distance(&self, other: &ArchEmbedding) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `row (1 x rows) * matrix (rows x cols)`.
fn vec_mat(row: &[f64], matrix: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (r, &x) in row.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(&matrix[r * cols..(r + 1) * cols]) {
            *o += x * w;
        }
    }
    out
}

impl GatesParams {
    pub fn init(seed: u64) -> Self {
        let mut rng = RngStream::seed_from_u64(seed);
        let mut uniform = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.1..0.1)).collect() };
        let emb = uniform(NUM_OPERATIONS * OP_DIM);
        let w_o = uniform(OP_DIM * INFO_DIM);
        let w_x = uniform(INFO_DIM * INFO_DIM);
        let mut unit = || {
            let v = uniform(INFO_DIM);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect::<Vec<_>>()
        };
        let input_info = [unit(), unit()];
        Self::from_parts(emb, w_o, w_x, input_info, seed)
    }

    pub fn from_parts(emb: Vec<f64>, w_o: Vec<f64>, w_x: Vec<f64>, input_info: [Vec<f64>; 2], seed: u64) -> Self {
        assert_eq!(emb.len(), NUM_OPERATIONS * OP_DIM);
        assert_eq!(w_o.len(), OP_DIM * INFO_DIM);
        assert_eq!(w_x.len(), INFO_DIM * INFO_DIM);
        assert!(input_info.iter().all(|v| v.len() == INFO_DIM));
        let masks = std::array::from_fn(|op| {
            let row = &emb[op * OP_DIM..(op + 1) * OP_DIM];
            vec_mat(row, &w_o, INFO_DIM).into_iter().map(sigmoid).collect()
        });
        GatesParams { emb, w_o, w_x, input_info, seed, masks }
    }

    /// Soft attention mask `sigmoid(EMB(op) W_o)`.
    pub fn mask(&self, op: Operation) -> &[f64] {
        &self.masks[op as usize]
    }

    /// Node informations `I_0..I_5` of one block.
    pub fn node_infos(&self, dag: &BlockDag) -> [Vec<f64>; NODES_PER_BLOCK] {
        let mut info: [Vec<f64>; NODES_PER_BLOCK] = std::array::from_fn(|_| vec![0.0; INFO_DIM]);
        info[0].clone_from(&self.input_info[0]);
        info[1].clone_from(&self.input_info[1]);
        for dst in INTERNAL_NODES {
            let mut acc = vec![0.0; INFO_DIM];
            for edge in dag.incoming(dst).filter(|e| e.op != Operation::None) {
                let transformed = vec_mat(&info[edge.src], &self.w_x, INFO_DIM);
                for ((a, m), t) in acc.iter_mut().zip(self.mask(edge.op)).zip(transformed) {
                    *a += m * t;
                }
            }
            info[dst] = acc;
        }
        info
    }

    pub fn embed_block(&self, dag: &BlockDag) -> Vec<f64> {
        let info = self.node_infos(dag);
        let internal = INTERNAL_NODES.len() as f64;
        (0..INFO_DIM)
            .map(|d| INTERNAL_NODES.map(|n| info[n][d]).sum::<f64>() / internal)
            .collect()
    }

    pub fn embed_arch(&self, cell: &CellArchitecture) -> ArchEmbedding {
        ArchEmbedding(cell.blocks.iter().flat_map(|b| self.embed_block(b)).collect())
    }

    pub fn embed(&self, genome: &Genome) -> ArchEmbedding {
        self.embed_arch(&genome.decode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{random_genome, EDGE_ENDPOINTS, GENES_PER_BLOCK, GENOME_LEN};
    use crate::rng::stream;

    #[test]
    fn init_is_seeded_and_shaped() {
        let a = GatesParams::init(4);
        assert_eq!(a, GatesParams::init(4));
        assert_ne!(a, GatesParams::init(5));
        assert_eq!((a.emb.len(), a.w_o.len(), a.w_x.len()), (4 * 16, 16 * 32, 32 * 32));
        assert!(a.emb.iter().chain(&a.w_o).chain(&a.w_x).all(|x| x.abs() <= 0.1));
        for v in &a.input_info {
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn worked_two_edge_example() {
        // node 3 fed by o1 from node 2 and o2 from node 1; other node-3 edge absent
        let p = GatesParams::init(21);
        let (o1, o2) = (Operation::SepConv3x3, Operation::SkipConnect);
        let mut genes = [0u8; GENOME_LEN];
        genes[0] = Operation::ResSepConv3x3.gene(); // node 2 <- node 0
        genes[3] = o2.gene(); // node 3 <- node 1
        genes[4] = o1.gene(); // node 3 <- node 2
        let dag = Genome::from_genes(genes).unwrap().decode().blocks[0].clone();
        let info = p.node_infos(&dag);

        let by_hand = |mask: &[f64], src: &[f64]| -> Vec<f64> {
            (0..INFO_DIM)
                .map(|j| mask[j] * (0..INFO_DIM).map(|i| src[i] * p.w_x[i * INFO_DIM + j]).sum::<f64>())
                .collect()
        };
        let mask = |op: Operation| -> Vec<f64> {
            (0..INFO_DIM)
                .map(|j| sigmoid((0..OP_DIM).map(|k| p.emb[op as usize * OP_DIM + k] * p.w_o[k * INFO_DIM + j]).sum()))
                .collect()
        };
        let i2 = by_hand(&mask(Operation::ResSepConv3x3), &p.input_info[0]);
        let t1 = by_hand(&mask(o2), &p.input_info[1]);
        let t2 = by_hand(&mask(o1), &i2);
        for j in 0..INFO_DIM {
            assert!((info[2][j] - i2[j]).abs() < 1e-15);
            assert!((info[3][j] - (t1[j] + t2[j])).abs() < 1e-15);
        }
        assert!(info[4].iter().chain(&info[5]).all(|&x| x == 0.0));
    }

    #[test]
    fn none_edges_give_zero_embedding() {
        let p = GatesParams::init(1);
        let e = p.embed(&Genome::uniform(Operation::None));
        assert_eq!(e.as_slice().len(), EMBEDDING_DIM);
        assert!(e.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn block_locality() {
        let p = GatesParams::init(2);
        let mut genes = [0u8; GENOME_LEN];
        genes[..GENES_PER_BLOCK].fill(Operation::SepConv3x3.gene());
        let e = p.embed(&Genome::from_genes(genes).unwrap());
        assert!(e.as_slice()[..32].iter().any(|&x| x != 0.0));
        assert!(e.as_slice()[32..].iter().all(|&x| x == 0.0));

        let mut rng = stream(3, &[]);
        for _ in 0..50 {
            let g = random_genome(&mut rng);
            let idx = rng.random_range(0..GENOME_LEN);
            let flipped = g.with_gene(idx, Operation::ALL[(g.genes()[idx] as usize + 1) % 4]);
            let (a, b) = (p.embed(&g), p.embed(&flipped));
            let block = idx / GENES_PER_BLOCK;
            for d in 0..EMBEDDING_DIM {
                if d / INFO_DIM != block {
                    assert_eq!(a.as_slice()[d], b.as_slice()[d]);
                }
            }
        }
    }

    #[test]
    fn single_live_edge_change_moves_embedding() {
        let p = GatesParams::init(8);
        let mut rng = stream(9, &[]);
        let mut changed = 0;
        for _ in 0..100 {
            let g = random_genome(&mut rng);
            let cell = g.decode();
            // a non-None edge whose source carries information
            let candidates: Vec<usize> = (0..GENOME_LEN)
                .filter(|&i| {
                    let block = &cell.blocks[i / GENES_PER_BLOCK];
                    let (src, _) = EDGE_ENDPOINTS[i % GENES_PER_BLOCK];
                    g.genes()[i] != 0 && block.live_nodes()[src]
                })
                .collect();
            let idx = candidates[rng.random_range(0..candidates.len())];
            let new_op = (g.genes()[idx] + rng.random_range(1..4u8)) % 4;
            let flipped = g.with_gene(idx, Operation::ALL[new_op as usize]);
            if p.embed(&g) != p.embed(&flipped) {
                changed += 1;
            }
        }
        assert!(changed >= 99, "{changed}");
    }

    #[test]
    fn embedding_is_finite_and_bounded() {
        let p = GatesParams::init(10);
        let mut rng = stream(11, &[]);
        for _ in 0..500 {
            let e = p.embed(&random_genome(&mut rng));
            assert!(e.as_slice().iter().all(|x| x.is_finite() && x.abs() < 10.0));
        }
    }
}
