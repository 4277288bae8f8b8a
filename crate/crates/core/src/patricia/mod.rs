//! Local Patricia (blind) tries over suffix-array blocks.
//!
//! A trie stores per-node string depths and per-edge first characters only;
//! blind search follows first characters and depths without ever touching
//! the text, so a match is a candidate that still needs one verification
//! against `|P|` text characters. Leaf `k` (0-based, left to right)
//! corresponds to slot `k` of the block's suffix array.
//!
//! Backings: a plain pointer arena (arena order = preorder) and the three
//! succinct encodings. All four answer identical queries; the succinct ones
//! pack depths at `ceil(lg(n + 2))` bits and carry a leaf-indicator bit
//! vector plus, for LOUDS, the level-order-to-preorder leaf permutation.

mod build;
mod streaming;

pub use build::{build_skeleton, Skeleton};
pub use streaming::{build_skeleton_streaming_dfuds, StreamedDfuds};

use crate::codec::{self, CodecError, Reader};
use crate::succinct::{width_for, BitVector, PackedIntVec, SuccinctTree, TreeEncoding};
use crate::text::{Pos, Text};
use build::NO_REQUEST;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatriciaError {
    #[error("PE {pe_id}: cannot build a trie over an empty block")]
    EmptyBlock { pe_id: usize },
    #[error("malformed LCP block at rank {at_rank}")]
    MalformedLcp { at_rank: usize },
}

/// Which PE a block belongs to and where it sits in the global suffix
/// array. `block_start` is the 1-based global rank of the first entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMeta {
    pub pe_id: usize,
    pub block_start: usize,
    pub block_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backing {
    Pointer,
    Louds,
    Dfuds,
    Bp,
}

impl Backing {
    pub fn tag(self) -> u8 {
        match self {
            Backing::Pointer => 0,
            Backing::Louds => 1,
            Backing::Dfuds => 2,
            Backing::Bp => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Backing::Pointer,
            1 => Backing::Louds,
            2 => Backing::Dfuds,
            3 => Backing::Bp,
            _ => return None,
        })
    }

    pub const ALL: [Backing; 4] = [Backing::Pointer, Backing::Louds, Backing::Dfuds, Backing::Bp];

    pub fn name(self) -> &'static str {
        match self {
            Backing::Pointer => "pointer",
            Backing::Louds => "louds",
            Backing::Dfuds => "dfuds",
            Backing::Bp => "bp",
        }
    }
}

impl std::str::FromStr for Backing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pointer" => Ok(Backing::Pointer),
            "louds" => Ok(Backing::Louds),
            "dfuds" => Ok(Backing::Dfuds),
            "bp" => Ok(Backing::Bp),
            other => Err(format!("unknown backing '{other}' (pointer|louds|dfuds|bp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PNode {
    depth: usize,
    first_char: u8,
    children: Vec<usize>,
    leaf_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PointerRepr {
    nodes: Vec<PNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SuccinctRepr {
    tree: SuccinctTree,
    /// One bit per position of `tree`, set at leaf handles.
    leaf_bv: BitVector,
    /// String depth by canonical node number (level order for LOUDS,
    /// preorder otherwise).
    depths: PackedIntVec,
    /// Incoming-edge first character by canonical node number; root slot 0.
    chars: Vec<u8>,
    /// LOUDS only: level-order leaf index to left-to-right leaf rank.
    leaf_perm: Option<PackedIntVec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TrieRepr {
    Pointer(PointerRepr),
    Succinct(SuccinctRepr),
}

/// A searchable Patricia trie over one suffix-array block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatriciaTrie {
    meta: BlockMeta,
    n_with_sentinel: usize,
    repr: TrieRepr,
}

/// Convenience path when the whole text is at hand: build the skeleton,
/// resolve its requests locally, and assemble the backing.
pub fn build_patricia(
    meta: BlockMeta,
    sa_block: &[Pos],
    lcp_block: &[usize],
    text: &Text,
    backing: Backing,
) -> Result<PatriciaTrie, PatriciaError> {
    let sk = build_skeleton(meta, sa_block, lcp_block, text.len_with_sentinel())?;
    let labels: Vec<u8> = sk.requests().iter().map(|&p| text.padded_char(p)).collect();
    Ok(sk.into_trie(&labels, backing))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlindOutcome {
    /// The walk consumed the whole pattern; subject to verification.
    Matched,
    /// No edge matched the next pattern character.
    NoEdge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindSearchResult {
    pub outcome: BlindOutcome,
    /// Handle of the node where the walk ended.
    pub node: usize,
    /// SA value of the lexicographically smallest suffix under the node.
    pub witness: Option<Pos>,
    /// Inclusive 0-based left-to-right leaf ranks under the node.
    pub leaf_range: Option<(usize, usize)>,
    /// Descent and comparison ticks, for work accounting.
    pub steps: u64,
}

impl BlindSearchResult {
    pub fn leaf_range_count(&self) -> usize {
        self.leaf_range.map(|(a, b)| b - a + 1).unwrap_or(0)
    }
}

/// One text comparison decides the whole candidate leaf range.
pub fn verify_occurrence(pattern: &[u8], fetched: &[u8]) -> bool {
    pattern == fetched
}

impl PatriciaTrie {
    pub fn meta(&self) -> &BlockMeta {
        &self.meta
    }

    pub fn backing(&self) -> Backing {
        match &self.repr {
            TrieRepr::Pointer(_) => Backing::Pointer,
            TrieRepr::Succinct(s) => match s.tree.encoding() {
                TreeEncoding::Louds => Backing::Louds,
                TreeEncoding::Dfuds => Backing::Dfuds,
                TreeEncoding::Bp => Backing::Bp,
            },
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.repr {
            TrieRepr::Pointer(p) => p.nodes.len(),
            TrieRepr::Succinct(s) => s.tree.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.meta.block_len
    }

    pub fn n_with_sentinel(&self) -> usize {
        self.n_with_sentinel
    }

    /// Blind search for `pattern`; `sa_block` resolves leaf ranks to SA
    /// values and must be the block this trie was built over.
    pub fn blind_search(&self, pattern: &[u8], sa_block: &[Pos]) -> BlindSearchResult {
        debug_assert_eq!(sa_block.len(), self.meta.block_len);
        match &self.repr {
            TrieRepr::Pointer(p) => blind_search_impl(p, pattern, sa_block),
            TrieRepr::Succinct(s) => blind_search_impl(s, pattern, sa_block),
        }
    }

    /// Space of the resident structures in bits, with text positions and
    /// pointer-backing integers counted at `pos_width` bits.
    pub fn space(&self, pos_width: usize) -> TrieSpace {
        match &self.repr {
            TrieRepr::Pointer(p) => TrieSpace {
                // First-child plus next-sibling links, depth, and one label
                // byte per edge.
                tree_bits: (p.nodes.len() * 2 * pos_width) as u64,
                depth_bits: (p.nodes.len() * pos_width) as u64,
                label_bits: ((p.nodes.len() - 1) * 8) as u64,
                leaf_map_bits: 0,
            },
            TrieRepr::Succinct(s) => TrieSpace {
                tree_bits: (s.tree.bits().raw_bits() + s.leaf_bv.raw_bits()) as u64,
                depth_bits: s.depths.raw_bits() as u64,
                label_bits: ((s.chars.len() - 1) * 8) as u64,
                leaf_map_bits: s.leaf_perm.as_ref().map(|p| p.raw_bits()).unwrap_or(0) as u64,
            },
        }
    }

    pub fn serialize(&self, buf: &mut Vec<u8>) {
        codec::put_u8(buf, self.backing().tag());
        codec::put_u64(buf, self.meta.pe_id as u64);
        codec::put_u64(buf, self.meta.block_start as u64);
        codec::put_u64(buf, self.meta.block_len as u64);
        codec::put_u64(buf, self.n_with_sentinel as u64);
        match &self.repr {
            TrieRepr::Pointer(p) => {
                // Shape as DFUDS bits; arena order is preorder already.
                let mut bits: Vec<bool> = vec![true];
                for n in &p.nodes {
                    bits.extend(std::iter::repeat(true).take(n.children.len()));
                    bits.push(false);
                }
                let bv = BitVector::from_bits(bits);
                codec::put_u64(buf, p.nodes.len() as u64);
                codec::put_u64(buf, bv.len() as u64);
                for &w in bv.words() {
                    codec::put_u64(buf, w);
                }
                let width = width_for(self.n_with_sentinel as u64);
                let depths =
                    PackedIntVec::from_values(width, p.nodes.iter().map(|n| n.depth as u64));
                serialize_packed(buf, &depths);
                let chars: Vec<u8> = p.nodes.iter().map(|n| n.first_char).collect();
                codec::put_bytes(buf, &chars);
            }
            TrieRepr::Succinct(s) => {
                s.tree.serialize(buf);
                serialize_packed(buf, &s.depths);
                codec::put_bytes(buf, &s.chars);
            }
        }
    }

    pub fn deserialize(r: &mut Reader) -> Result<Self, CodecError> {
        let tag = r.u8()?;
        let backing = Backing::from_tag(tag).ok_or_else(|| CodecError::BadTag {
            context: format!("trie backing tag {tag}"),
        })?;
        let meta = BlockMeta {
            pe_id: r.u64()? as usize,
            block_start: r.u64()? as usize,
            block_len: r.u64()? as usize,
        };
        let n_with_sentinel = r.u64()? as usize;
        let repr = match backing {
            Backing::Pointer => {
                let node_count = r.u64()? as usize;
                let bit_len = r.u64()? as usize;
                let mut words = Vec::with_capacity((bit_len + 63) / 64);
                for _ in 0..(bit_len + 63) / 64 {
                    words.push(r.u64()?);
                }
                let bv = BitVector::from_raw_parts(words, bit_len);
                let depths = deserialize_packed(r)?;
                let chars = r.bytes()?.to_vec();
                TrieRepr::Pointer(pointer_from_parts(node_count, &bv, &depths, &chars)?)
            }
            _ => {
                let tree = SuccinctTree::deserialize(r)?;
                let depths = deserialize_packed(r)?;
                let chars = r.bytes()?.to_vec();
                let leaf_bv = leaf_indicator(&tree);
                let leaf_perm = match tree.encoding() {
                    TreeEncoding::Louds => Some(louds_leaf_perm(&tree, &leaf_bv)),
                    _ => None,
                };
                TrieRepr::Succinct(SuccinctRepr { tree, leaf_bv, depths, chars, leaf_perm })
            }
        };
        Ok(PatriciaTrie { meta, n_with_sentinel, repr })
    }
}

/// Resident size split used by the space report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrieSpace {
    pub tree_bits: u64,
    pub depth_bits: u64,
    pub label_bits: u64,
    pub leaf_map_bits: u64,
}

impl TrieSpace {
    pub fn total(&self) -> u64 {
        self.tree_bits + self.depth_bits + self.label_bits + self.leaf_map_bits
    }
}

fn serialize_packed(buf: &mut Vec<u8>, v: &PackedIntVec) {
    codec::put_u8(buf, v.width() as u8);
    codec::put_u64(buf, v.len() as u64);
    for &w in v.words() {
        codec::put_u64(buf, w);
    }
}

fn deserialize_packed(r: &mut Reader) -> Result<PackedIntVec, CodecError> {
    let width = r.u8()? as usize;
    if !(1..=64).contains(&width) {
        return Err(CodecError::BadTag { context: format!("packed width {width}") });
    }
    let len = r.u64()? as usize;
    let n_words = (len * width + 63) / 64;
    let mut words = Vec::with_capacity(n_words);
    for _ in 0..n_words {
        words.push(r.u64()?);
    }
    Ok(PackedIntVec::from_raw_parts(width, len, words))
}

/// Rebuilds a preorder pointer arena from preorder degree-run bits.
fn pointer_from_parts(
    node_count: usize,
    shape_bits: &BitVector,
    depths: &PackedIntVec,
    chars: &[u8],
) -> Result<PointerRepr, CodecError> {
    if depths.len() != node_count || chars.len() != node_count {
        return Err(CodecError::BadTag { context: "pointer arrays disagree on node count".into() });
    }
    let mut degrees = Vec::with_capacity(node_count);
    let mut run = 0usize;
    for p in 2..=shape_bits.len() {
        if shape_bits.get(p) {
            run += 1;
        } else {
            degrees.push(run);
            run = 0;
        }
    }
    if degrees.len() != node_count {
        return Err(CodecError::BadTag { context: "pointer shape bits malformed".into() });
    }
    let mut nodes: Vec<PNode> = (0..node_count)
        .map(|k| PNode {
            depth: depths.get(k) as usize,
            first_char: chars[k],
            children: Vec::with_capacity(degrees[k]),
            leaf_rank: None,
        })
        .collect();
    let mut stack: Vec<(usize, usize)> = vec![(0, degrees[0])];
    let mut next_leaf = 0usize;
    if degrees[0] == 0 {
        nodes[0].leaf_rank = Some(0);
        next_leaf = 1;
    }
    for k in 1..node_count {
        while stack.last().map(|&(_, rem)| rem == 0).unwrap_or(false) {
            stack.pop();
        }
        let top = stack.last_mut().ok_or_else(|| CodecError::BadTag {
            context: "pointer shape bits unbalanced".into(),
        })?;
        top.1 -= 1;
        let parent = top.0;
        nodes[parent].children.push(k);
        if degrees[k] == 0 {
            nodes[k].leaf_rank = Some(next_leaf);
            next_leaf += 1;
        }
        stack.push((k, degrees[k]));
    }
    Ok(PointerRepr { nodes })
}

// ---------------------------------------------------------------------------
// Assembly from skeletons

pub(crate) fn assemble(sk: Skeleton, labels: &[u8], backing: Backing) -> PatriciaTrie {
    let resolve =
        |req: usize| -> u8 { if req == NO_REQUEST { 0 } else { labels[req] } };
    let meta = sk.meta;
    let n_with_sentinel = sk.n_with_sentinel;
    let repr = match backing {
        Backing::Pointer => {
            let order = sk.preorder();
            let mut new_id = vec![0usize; sk.node_count()];
            for (k, &old) in order.iter().enumerate() {
                new_id[old] = k;
            }
            let nodes: Vec<PNode> = order
                .iter()
                .map(|&old| {
                    let n = &sk.nodes[old];
                    PNode {
                        depth: n.depth,
                        first_char: resolve(n.char_req),
                        children: n.children.iter().map(|&c| new_id[c]).collect(),
                        leaf_rank: n.leaf_rank,
                    }
                })
                .collect();
            TrieRepr::Pointer(PointerRepr { nodes })
        }
        Backing::Louds | Backing::Dfuds | Backing::Bp => {
            let encoding = match backing {
                Backing::Louds => TreeEncoding::Louds,
                Backing::Dfuds => TreeEncoding::Dfuds,
                _ => TreeEncoding::Bp,
            };
            let order = match encoding {
                TreeEncoding::Louds => sk.level_order(),
                _ => sk.preorder(),
            };
            let mut bits: Vec<bool> = Vec::with_capacity(2 * sk.node_count());
            match encoding {
                TreeEncoding::Louds => {
                    for &x in &order {
                        push_run(&mut bits, sk.nodes[x].children.len());
                    }
                }
                TreeEncoding::Dfuds => {
                    bits.push(true);
                    for &x in &order {
                        push_run(&mut bits, sk.nodes[x].children.len());
                    }
                }
                TreeEncoding::Bp => {
                    bp_bits(&sk, 0, &mut bits);
                }
            }
            let tree = succinct_from_bits(encoding, sk.node_count(), bits);
            let width = width_for(n_with_sentinel as u64);
            let depths = PackedIntVec::from_values(
                width,
                order.iter().map(|&x| sk.nodes[x].depth as u64),
            );
            let chars: Vec<u8> = order.iter().map(|&x| resolve(sk.nodes[x].char_req)).collect();
            let leaf_bv = leaf_indicator(&tree);
            let leaf_perm = match encoding {
                TreeEncoding::Louds => {
                    let m = meta.block_len;
                    let width = width_for(m.saturating_sub(1) as u64);
                    Some(PackedIntVec::from_values(
                        width,
                        order
                            .iter()
                            .filter_map(|&x| sk.nodes[x].leaf_rank)
                            .map(|r| r as u64),
                    ))
                }
                _ => None,
            };
            TrieRepr::Succinct(SuccinctRepr { tree, leaf_bv, depths, chars, leaf_perm })
        }
    };
    PatriciaTrie { meta, n_with_sentinel, repr }
}

fn push_run(bits: &mut Vec<bool>, degree: usize) {
    bits.extend(std::iter::repeat(true).take(degree));
    bits.push(false);
}

fn bp_bits(sk: &Skeleton, x: usize, bits: &mut Vec<bool>) {
    bits.push(true);
    for &c in &sk.nodes[x].children {
        bp_bits(sk, c, bits);
    }
    bits.push(false);
}

pub(crate) fn succinct_from_bits(
    encoding: TreeEncoding,
    node_count: usize,
    bits: Vec<bool>,
) -> SuccinctTree {
    // Round-trip through the serialized form to reuse the one constructor.
    let bv = BitVector::from_bits(bits);
    let mut buf = Vec::new();
    codec::put_u8(&mut buf, encoding.tag());
    codec::put_u64(&mut buf, node_count as u64);
    codec::put_u64(&mut buf, bv.len() as u64);
    for &w in bv.words() {
        codec::put_u64(&mut buf, w);
    }
    SuccinctTree::deserialize(&mut Reader::new(&buf)).expect("freshly written tree")
}

/// Marks leaf handles: run starts holding a 0 for LOUDS and DFUDS, opens
/// followed by a close for BP.
fn leaf_indicator(tree: &SuccinctTree) -> BitVector {
    let bits = tree.bits();
    let n = bits.len();
    let is_leaf_pos = |p: usize| -> bool {
        match tree.encoding() {
            TreeEncoding::Louds => !bits.get(p) && (p == 1 || !bits.get(p - 1)),
            TreeEncoding::Dfuds => p >= 2 && !bits.get(p) && (p == 2 || !bits.get(p - 1)),
            TreeEncoding::Bp => bits.get(p) && p < n && !bits.get(p + 1),
        }
    };
    BitVector::from_bits((1..=n).map(is_leaf_pos))
}

/// Left-to-right leaf rank for each level-order leaf, by one DFS.
fn louds_leaf_perm(tree: &SuccinctTree, leaf_bv: &BitVector) -> PackedIntVec {
    let leaves = leaf_bv.count_ones();
    let width = width_for(leaves.saturating_sub(1) as u64);
    let mut perm = vec![0u64; leaves];
    let mut rank = 0u64;
    let mut stack = vec![tree.root()];
    while let Some(x) = stack.pop() {
        let d = tree.outdegree(x).expect("valid handle");
        if d == 0 {
            let idx = leaf_bv.rank1(x).expect("in range") - 1;
            perm[idx] = rank;
            rank += 1;
        } else {
            for i in (1..=d).rev() {
                stack.push(tree.child(x, i).expect("child exists"));
            }
        }
    }
    PackedIntVec::from_values(width, perm)
}

// ---------------------------------------------------------------------------
// Navigation

trait Nav {
    fn root(&self) -> usize;
    fn depth(&self, x: usize) -> usize;
    fn is_leaf(&self, x: usize) -> bool;
    /// Child whose incoming edge starts with `c`; counts comparisons into
    /// `steps`.
    fn find_child(&self, x: usize, c: u8, steps: &mut u64) -> Option<usize>;
    fn leftmost_leaf(&self, x: usize) -> usize;
    fn rightmost_leaf(&self, x: usize) -> usize;
    fn leaf_rank(&self, x: usize) -> usize;
}

fn blind_search_impl<N: Nav>(nav: &N, pattern: &[u8], sa_block: &[Pos]) -> BlindSearchResult {
    let mut steps = 0u64;
    let mut node = nav.root();
    loop {
        let d = nav.depth(node);
        if d >= pattern.len() {
            let first = nav.leaf_rank(nav.leftmost_leaf(node));
            let last = nav.leaf_rank(nav.rightmost_leaf(node));
            return BlindSearchResult {
                outcome: BlindOutcome::Matched,
                node,
                witness: Some(sa_block[first]),
                leaf_range: Some((first, last)),
                steps,
            };
        }
        if nav.is_leaf(node) {
            break;
        }
        match nav.find_child(node, pattern[d], &mut steps) {
            Some(c) => {
                steps += 1;
                node = c;
            }
            None => break,
        }
    }
    BlindSearchResult {
        outcome: BlindOutcome::NoEdge,
        node,
        witness: None,
        leaf_range: None,
        steps,
    }
}

impl Nav for PointerRepr {
    fn root(&self) -> usize {
        0
    }

    fn depth(&self, x: usize) -> usize {
        self.nodes[x].depth
    }

    fn is_leaf(&self, x: usize) -> bool {
        self.nodes[x].children.is_empty()
    }

    fn find_child(&self, x: usize, c: u8, steps: &mut u64) -> Option<usize> {
        let kids = &self.nodes[x].children;
        *steps += kids.len().max(1).ilog2() as u64 + 1;
        kids.binary_search_by_key(&c, |&k| self.nodes[k].first_char)
            .ok()
            .map(|i| kids[i])
    }

    fn leftmost_leaf(&self, x: usize) -> usize {
        let mut y = x;
        while let Some(&c) = self.nodes[y].children.first() {
            y = c;
        }
        y
    }

    fn rightmost_leaf(&self, x: usize) -> usize {
        let mut y = x;
        while let Some(&c) = self.nodes[y].children.last() {
            y = c;
        }
        y
    }

    fn leaf_rank(&self, x: usize) -> usize {
        self.nodes[x].leaf_rank.expect("leaf handle")
    }
}

impl SuccinctRepr {
    fn number(&self, x: usize) -> usize {
        self.tree.node_number(x).expect("valid handle")
    }

    fn char_of(&self, x: usize) -> u8 {
        self.chars[self.number(x) - 1]
    }

    fn degree(&self, x: usize) -> usize {
        self.tree.outdegree(x).expect("valid handle")
    }

    fn nth_child(&self, x: usize, i: usize) -> usize {
        self.tree.child(x, i).expect("child exists")
    }
}

impl Nav for SuccinctRepr {
    fn root(&self) -> usize {
        self.tree.root()
    }

    fn depth(&self, x: usize) -> usize {
        self.depths.get(self.number(x) - 1) as usize
    }

    fn is_leaf(&self, x: usize) -> bool {
        self.tree.is_leaf(x)
    }

    fn find_child(&self, x: usize, c: u8, steps: &mut u64) -> Option<usize> {
        match self.tree.encoding() {
            TreeEncoding::Louds => {
                // Level-order children have consecutive numbers, so their
                // edge characters sit in one contiguous slice.
                let d = self.degree(x);
                let base = self.tree.bits().rank1(x).expect("in range");
                let slice = &self.chars[base..base + d];
                *steps += d.max(1).ilog2() as u64 + 1;
                slice.binary_search(&c).ok().map(|i| self.nth_child(x, i + 1))
            }
            TreeEncoding::Dfuds => {
                let d = self.degree(x);
                *steps += d.max(1).ilog2() as u64 + 1;
                let mut lo = 1usize;
                let mut hi = d;
                while lo <= hi {
                    let mid = (lo + hi) / 2;
                    let y = self.nth_child(x, mid);
                    match self.char_of(y).cmp(&c) {
                        std::cmp::Ordering::Equal => return Some(y),
                        std::cmp::Ordering::Less => lo = mid + 1,
                        std::cmp::Ordering::Greater => hi = mid - 1,
                    }
                }
                None
            }
            TreeEncoding::Bp => {
                // First-child then sibling hops: the described linear child
                // access of this encoding.
                let bits = self.tree.bits();
                let mut y = x + 1;
                while bits.get(y) {
                    *steps += 1;
                    let ch = self.char_of(y);
                    if ch == c {
                        return Some(y);
                    }
                    if ch > c {
                        return None;
                    }
                    y = bits.findclose(y).expect("balanced") + 1;
                }
                None
            }
        }
    }

    fn leftmost_leaf(&self, x: usize) -> usize {
        let mut y = x;
        while !self.tree.is_leaf(y) {
            y = self.nth_child(y, 1);
        }
        y
    }

    fn rightmost_leaf(&self, x: usize) -> usize {
        let mut y = x;
        while !self.tree.is_leaf(y) {
            y = self.nth_child(y, self.degree(y));
        }
        y
    }

    fn leaf_rank(&self, x: usize) -> usize {
        let idx = self.leaf_bv.rank1(x).expect("in range") - 1;
        match &self.leaf_perm {
            Some(perm) => perm.get(idx) as usize,
            None => idx,
        }
    }
}
