//! Space accounting for a built index, reported as bits per text
//! character. Text positions are costed at a configurable width (default
//! 40 bits) independent of how they sit in memory here, so backings can
//! be compared on what they would need, not on what a 64-bit host pads
//! them to.

use crate::dpt::DptIndex;

pub const DEFAULT_POS_WIDTH: usize = 40;

/// Bits attributed to each part of the index. Trie components are summed
/// over all PEs; the routing trie is counted once (it is replicated, the
/// per-PE cost is one copy).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceReport {
    pub pos_width: usize,
    /// Characters of the raw text, the denominator of every rate.
    pub n_chars: usize,
    pub tree_bits: u64,
    pub depth_bits: u64,
    pub label_bits: u64,
    pub leaf_map_bits: u64,
    /// Block-resident suffix arrays: one position per suffix.
    pub sa_bits: u64,
    /// One replica of the routing trie, as serialized.
    pub global_bits: u64,
}

impl SpaceReport {
    /// Bits of the local tries alone, the quantity backings differ in.
    pub fn trie_bits(&self) -> u64 {
        self.tree_bits + self.depth_bits + self.label_bits + self.leaf_map_bits
    }

    pub fn total_bits(&self) -> u64 {
        self.trie_bits() + self.sa_bits + self.global_bits
    }

    pub fn trie_bits_per_char(&self) -> f64 {
        self.trie_bits() as f64 / self.n_chars as f64
    }

    pub fn bits_per_char(&self) -> f64 {
        self.total_bits() as f64 / self.n_chars as f64
    }
}

pub fn space_report(ix: &DptIndex, pos_width: usize) -> SpaceReport {
    assert!(pos_width >= 1 && pos_width <= 64, "position width in bits");
    let mut r = SpaceReport {
        pos_width,
        n_chars: ix.n_with_sentinel() - 1,
        tree_bits: 0,
        depth_bits: 0,
        label_bits: 0,
        leaf_map_bits: 0,
        sa_bits: 0,
        global_bits: 0,
    };
    for pe in 0..ix.pe_count() {
        let s = ix.trie(pe).space(pos_width);
        r.tree_bits += s.tree_bits;
        r.depth_bits += s.depth_bits;
        r.label_bits += s.label_bits;
        r.leaf_map_bits += s.leaf_map_bits;
        r.sa_bits += (ix.block_lens()[pe] * pos_width) as u64;
    }
    let mut gt = Vec::new();
    ix.global_trie().serialize(&mut gt);
    r.global_bits = 8 * gt.len() as u64;
    r
}
