//! Stage-wise cell search space.
//!
//! A genome is 56 integer genes: four blocks (`B0`, `B1`, `B2`, `R`) of 14
//! genes each. Inside a block the genes are grouped by destination node:
//! node 2 reads from nodes 0 and 1 (2 genes), node 3 from 0..=2 (3 genes),
//! node 4 from 0..=3 (4 genes) and node 5 from 0..=4 (5 genes). Nodes 0 and
//! 1 are the outputs of the pre-previous and previous block; the block
//! output concatenates nodes 2..=5. Block `R` (index 3) is the reduction
//! block and runs its input-facing edges at stride two.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

pub const NUM_BLOCKS: usize = 4;
pub const GENES_PER_BLOCK: usize = 14;
pub const GENOME_LEN: usize = NUM_BLOCKS * GENES_PER_BLOCK;
/// Nodes per block: two inputs plus four internal nodes.
pub const NODES_PER_BLOCK: usize = 6;
pub const INTERNAL_NODES: std::ops::Range<usize> = 2..6;
/// Index of the reduction block.
pub const REDUCTION_BLOCK: usize = 3;
pub const NUM_OPERATIONS: usize = 4;

/// `(src, dst)` for each gene of a block, in canonical gene order.
pub const EDGE_ENDPOINTS: [(usize, usize); GENES_PER_BLOCK] = [
    (0, 2),
    (1, 2),
    (0, 3),
    (1, 3),
    (2, 3),
    (0, 4),
    (1, 4),
    (2, 4),
    (3, 4),
    (0, 5),
    (1, 5),
    (2, 5),
    (3, 5),
    (4, 5),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenomeError {
    #[error("genome must have {GENOME_LEN} genes, got {0}")]
    WrongLength(usize),
    #[error("gene {index} has value {value}, expected 0..=3")]
    GeneOutOfRange { index: usize, value: i64 },
    #[error("malformed genome string at position {position}: {reason}")]
    MalformedGenomeString { position: usize, reason: String },
}

/// Candidate operation on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operation {
    None = 0,
    SkipConnect = 1,
    SepConv3x3 = 2,
    ResSepConv3x3 = 3,
}

impl Operation {
    pub const ALL: [Operation; NUM_OPERATIONS] = [
        Operation::None,
        Operation::SkipConnect,
        Operation::SepConv3x3,
        Operation::ResSepConv3x3,
    ];

    pub fn from_gene(gene: u8) -> Option<Self> {
        Self::ALL.get(gene as usize).copied()
    }

    pub fn gene(self) -> u8 {
        self as u8
    }

    /// Operations that own trainable parameters.
    pub fn is_conv(self) -> bool {
        matches!(self, Operation::SepConv3x3 | Operation::ResSepConv3x3)
    }
}

/// A validated 56-gene decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome([u8; GENOME_LEN]);

impl Genome {
    /// Validates an arbitrary integer sequence.
    pub fn validate(genes: &[i64]) -> Result<Self, GenomeError> {
        if genes.len() != GENOME_LEN {
            return Err(GenomeError::WrongLength(genes.len()));
        }
        let mut out = [0u8; GENOME_LEN];
        for (index, (&value, slot)) in genes.iter().zip(out.iter_mut()).enumerate() {
            if !(0..NUM_OPERATIONS as i64).contains(&value) {
                return Err(GenomeError::GeneOutOfRange { index, value });
            }
            *slot = value as u8;
        }
        Ok(Genome(out))
    }

    pub fn from_genes(genes: [u8; GENOME_LEN]) -> Result<Self, GenomeError> {
        match genes.iter().position(|&g| g as usize >= NUM_OPERATIONS) {
            Some(index) => Err(GenomeError::GeneOutOfRange {
                index,
                value: genes[index] as i64,
            }),
            None => Ok(Genome(genes)),
        }
    }

    /// Every edge set to the same operation.
    pub fn uniform(op: Operation) -> Self {
        Genome([op.gene(); GENOME_LEN])
    }

    pub fn genes(&self) -> &[u8; GENOME_LEN] {
        &self.0
    }

    pub fn block_genes(&self, block: usize) -> &[u8] {
        &self.0[block * GENES_PER_BLOCK..(block + 1) * GENES_PER_BLOCK]
    }

    pub fn op(&self, block: usize, edge: usize) -> Operation {
        Operation::ALL[self.0[block * GENES_PER_BLOCK + edge] as usize]
    }

    /// Returns a copy with one gene replaced.
    pub fn with_gene(&self, index: usize, op: Operation) -> Self {
        let mut genes = self.0;
        genes[index] = op.gene();
        Genome(genes)
    }

    /// Number of edges carrying a parameterized convolution.
    pub fn conv_count(&self) -> usize {
        self.0.iter().filter(|&&g| Operation::ALL[g as usize].is_conv()).count()
    }

    pub fn decode(&self) -> CellArchitecture {
        CellArchitecture {
            blocks: std::array::from_fn(|b| BlockDag::from_genes(self.block_genes(b), b == REDUCTION_BLOCK)),
        }
    }
}

/// Uniform i.i.d. genes.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R) -> Genome {
    Genome(std::array::from_fn(|_| rng.random_range(0..NUM_OPERATIONS as u8)))
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in 0..NUM_BLOCKS {
            if block > 0 {
                f.write_str("/")?;
            }
            for (i, g) in self.block_genes(block).iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{g}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = GenomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let groups: Vec<&str> = s.split('/').collect();
        if groups.len() != NUM_BLOCKS {
            return Err(GenomeError::MalformedGenomeString {
                position: 0,
                reason: format!("expected {NUM_BLOCKS} '/'-separated groups, found {}", groups.len()),
            });
        }
        let mut genes = Vec::with_capacity(GENOME_LEN);
        let mut offset = 0;
        for group in groups {
            let tokens: Vec<&str> = group.split(',').collect();
            if tokens.len() != GENES_PER_BLOCK {
                return Err(GenomeError::MalformedGenomeString {
                    position: offset,
                    reason: format!("expected {GENES_PER_BLOCK} genes in group, found {}", tokens.len()),
                });
            }
            for token in tokens {
                let value: i64 = token.trim().parse().map_err(|_| GenomeError::MalformedGenomeString {
                    position: offset,
                    reason: format!("{token:?} is not an integer"),
                })?;
                genes.push(value);
                offset += token.len() + 1;
            }
        }
        Genome::validate(&genes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub op: Operation,
}

/// One block's DAG: 14 typed edges over nodes 0..=5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDag {
    pub edges: [Edge; GENES_PER_BLOCK],
    pub is_reduction: bool,
}

impl BlockDag {
    fn from_genes(genes: &[u8], is_reduction: bool) -> Self {
        BlockDag {
            edges: std::array::from_fn(|i| {
                let (src, dst) = EDGE_ENDPOINTS[i];
                Edge { src, dst, op: Operation::ALL[genes[i] as usize] }
            }),
            is_reduction,
        }
    }

    /// Edges into `dst` in canonical order.
    pub fn incoming(&self, dst: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dst == dst)
    }

    /// Longest directed path measured in non-`None` edges; always in `0..=4`.
    pub fn longest_path(&self) -> usize {
        let mut depth = [0usize; NODES_PER_BLOCK];
        for edge in &self.edges {
            // edges are sorted by dst, so every src is final before it is read
            if edge.op != Operation::None {
                depth[edge.dst] = depth[edge.dst].max(depth[edge.src] + 1);
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Whether the node receives any signal from the block inputs.
    pub fn live_nodes(&self) -> [bool; NODES_PER_BLOCK] {
        let mut live = [true, true, false, false, false, false];
        for edge in &self.edges {
            if edge.op != Operation::None && live[edge.src] {
                live[edge.dst] = true;
            }
        }
        live
    }
}

/// The decoded cell: blocks `[B0, B1, B2, R]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellArchitecture {
    pub blocks: [BlockDag; NUM_BLOCKS],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn arb_genome() -> impl Strategy<Value = Genome> {
        proptest::array::uniform32(0u8..4)
            .prop_flat_map(|a| (Just(a), proptest::array::uniform24(0u8..4)))
            .prop_map(|(a, b)| {
                let mut genes = [0u8; GENOME_LEN];
                genes[..32].copy_from_slice(&a);
                genes[32..].copy_from_slice(&b);
                Genome::from_genes(genes).unwrap()
            })
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert!(Genome::validate(&[0; 56]).is_ok());
        assert_eq!(Genome::validate(&[0; 55]), Err(GenomeError::WrongLength(55)));
        let mut genes = [0i64; 56];
        genes[7] = 4;
        assert_eq!(
            Genome::validate(&genes),
            Err(GenomeError::GeneOutOfRange { index: 7, value: 4 })
        );
        genes[7] = -1;
        assert!(matches!(Genome::validate(&genes), Err(GenomeError::GeneOutOfRange { index: 7, .. })));
    }

    #[test]
    fn decode_follows_gene_order() {
        let mut genes = [0i64; 56];
        // B1 starts at offset 14: node 2 <- (0, 1) with res_sep, node 3 <- (0, 1, 2) with skip
        genes[14..19].copy_from_slice(&[3, 3, 1, 1, 1]);
        let cell = Genome::validate(&genes).unwrap().decode();
        let b1 = &cell.blocks[1];
        let node2: Vec<_> = b1.incoming(2).map(|e| (e.src, e.op)).collect();
        assert_eq!(node2, vec![(0, Operation::ResSepConv3x3), (1, Operation::ResSepConv3x3)]);
        let node3: Vec<_> = b1.incoming(3).map(|e| (e.src, e.op)).collect();
        assert_eq!(
            node3,
            vec![(0, Operation::SkipConnect), (1, Operation::SkipConnect), (2, Operation::SkipConnect)]
        );
        assert!(cell.blocks[0].edges.iter().all(|e| e.op == Operation::None));
    }

    #[test]
    fn reduction_is_positional() {
        let cell = Genome::uniform(Operation::SepConv3x3).decode();
        let flags: Vec<bool> = cell.blocks.iter().map(|b| b.is_reduction).collect();
        assert_eq!(flags, vec![false, false, false, true]);
    }

    #[test]
    fn zero_genome_has_no_edges() {
        let cell = Genome::uniform(Operation::None).decode();
        for block in &cell.blocks {
            assert_eq!(block.edges.len(), 14);
            assert!(block.edges.iter().all(|e| e.op == Operation::None));
            assert_eq!(block.longest_path(), 0);
        }
        assert_eq!(Genome::uniform(Operation::SkipConnect).decode().blocks[2].longest_path(), 4);
    }

    #[test]
    fn text_format() {
        let zero = Genome::uniform(Operation::None);
        let group = ["0"; 14].join(",");
        assert_eq!(zero.to_string(), [group.as_str(); 4].join("/"));
        assert!(matches!(
            "1,2/3".parse::<Genome>(),
            Err(GenomeError::MalformedGenomeString { .. })
        ));
        let bad = format!("{group}/{group}/{group}/0,0,x,0,0,0,0,0,0,0,0,0,0,0");
        match bad.parse::<Genome>() {
            Err(GenomeError::MalformedGenomeString { position, .. }) => assert_eq!(position, 88),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_genome_is_seeded() {
        let a = random_genome(&mut stream(3, &[0]));
        let b = random_genome(&mut stream(3, &[0]));
        assert_eq!(a, b);
        let differing = (0..100u64)
            .filter(|&i| random_genome(&mut stream(i, &[1])) != random_genome(&mut stream(i + 1000, &[1])))
            .count();
        assert!(differing >= 1);
    }

    #[test]
    fn random_genome_frequencies() {
        let mut rng = stream(11, &[]);
        let mut counts = [[0usize; 4]; GENOME_LEN];
        let samples = 10_000;
        for _ in 0..samples {
            for (pos, &g) in random_genome(&mut rng).genes().iter().enumerate() {
                counts[pos][g as usize] += 1;
            }
        }
        for per_pos in counts {
            for c in per_pos {
                let freq = c as f64 / samples as f64;
                assert!((freq - 0.25).abs() <= 0.02, "frequency {freq}");
            }
        }
    }

    proptest! {
        #[test]
        fn text_round_trip(g in arb_genome()) {
            prop_assert_eq!(g.to_string().parse::<Genome>().unwrap(), g);
        }

        #[test]
        fn decode_is_injective_and_bounded(a in arb_genome(), b in arb_genome()) {
            let (da, db) = (a.decode(), b.decode());
            prop_assert_eq!(a == b, da == db);
            for block in &da.blocks {
                prop_assert!(block.longest_path() <= 4);
                prop_assert!(block.edges.iter().all(|e| e.src < e.dst && e.dst >= 2));
            }
        }
    }
}
