//! Ordinal tree encodings: a pointer tree as the navigation oracle, plus
//! level-order (LOUDS), depth-first (DFUDS), and balanced-parenthesis (BP)
//! bit encodings with child and degree queries.
//!
//! Conventions, fixed by the worked examples in the tests:
//! - LOUDS is the bare level-order degree sequence with no prefix bit:
//!   `2 * node_count - 1` bits, root at position 1, a single-node tree is
//!   "0". With inclusive rank, `child(x, i) = select0(rank1(x) + i - 1) + 1`.
//! - DFUDS prepends a 1 to the preorder degree sequence: `2 * node_count`
//!   bits, root at position 2. The printed-formula child rule is replaced by
//!   the standard `child(v, i) = findclose(v + outdegree(v) - i) + 1`,
//!   with pointer-tree equivalence as the correctness oracle.
//! - BP is the preorder open/close sequence: `2 * node_count` bits, root at
//!   position 1, i-th child by first-child plus `i - 1` sibling hops.
//!
//! A node handle is the bit position where the node's description starts
//! (its opening bit for BP). Canonical node numbering is level order for
//! LOUDS and preorder for DFUDS and BP.

use super::bitvec::{BitVector, SuccinctError};
use crate::codec::{self, CodecError, Reader};

/// Arena index of a pointer-tree node; the root is 0.
pub type NodeId = usize;

/// Plain ordered tree used as construction input and as the navigation
/// oracle for the bit encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerTree {
    children: Vec<Vec<NodeId>>,
}

impl PointerTree {
    pub fn with_root() -> Self {
        PointerTree { children: vec![Vec::new()] }
    }

    /// Appends a new rightmost child under `parent` and returns its id.
    pub fn add_child(&mut self, parent: NodeId) -> NodeId {
        let id = self.children.len();
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    pub const ROOT: NodeId = 0;

    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn outdegree(&self, x: NodeId) -> usize {
        self.children[x].len()
    }

    /// 1-based i-th child.
    pub fn child(&self, x: NodeId, i: usize) -> Option<NodeId> {
        self.children[x].get(i - 1).copied()
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        &self.children[x]
    }

    pub fn is_leaf(&self, x: NodeId) -> bool {
        self.children[x].is_empty()
    }

    /// Node ids in level order (the LOUDS canonical order).
    pub fn level_order(&self) -> Vec<NodeId> {
        let mut order = vec![Self::ROOT];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            order.extend_from_slice(&self.children[x]);
        }
        order
    }

    /// Node ids in preorder (the DFUDS and BP canonical order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![Self::ROOT];
        while let Some(x) = stack.pop() {
            order.push(x);
            for &c in self.children[x].iter().rev() {
                stack.push(c);
            }
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeEncoding {
    Louds,
    Dfuds,
    Bp,
}

impl TreeEncoding {
    pub fn tag(self) -> u8 {
        match self {
            TreeEncoding::Louds => 1,
            TreeEncoding::Dfuds => 2,
            TreeEncoding::Bp => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(TreeEncoding::Louds),
            2 => Some(TreeEncoding::Dfuds),
            3 => Some(TreeEncoding::Bp),
            _ => None,
        }
    }
}

/// A tree shape in one of the three bit encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctTree {
    encoding: TreeEncoding,
    node_count: usize,
    bits: BitVector,
}

pub fn encode(t: &PointerTree, encoding: TreeEncoding) -> SuccinctTree {
    let mut bits: Vec<bool> = Vec::with_capacity(2 * t.node_count());
    match encoding {
        TreeEncoding::Louds => {
            for x in t.level_order() {
                push_degree_run(&mut bits, t.outdegree(x));
            }
        }
        TreeEncoding::Dfuds => {
            bits.push(true);
            for x in t.preorder() {
                push_degree_run(&mut bits, t.outdegree(x));
            }
        }
        TreeEncoding::Bp => {
            encode_bp(t, PointerTree::ROOT, &mut bits);
        }
    }
    SuccinctTree {
        encoding,
        node_count: t.node_count(),
        bits: BitVector::from_bits(bits),
    }
}

fn push_degree_run(bits: &mut Vec<bool>, degree: usize) {
    bits.extend(std::iter::repeat(true).take(degree));
    bits.push(false);
}

fn encode_bp(t: &PointerTree, x: NodeId, bits: &mut Vec<bool>) {
    bits.push(true);
    for &c in t.children(x) {
        encode_bp(t, c, bits);
    }
    bits.push(false);
}

impl SuccinctTree {
    pub fn encoding(&self) -> TreeEncoding {
        self.encoding
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    /// Handle of the root node.
    pub fn root(&self) -> usize {
        match self.encoding {
            TreeEncoding::Louds | TreeEncoding::Bp => 1,
            TreeEncoding::Dfuds => 2,
        }
    }

    pub fn is_leaf(&self, x: usize) -> bool {
        match self.encoding {
            TreeEncoding::Louds | TreeEncoding::Dfuds => !self.bits.get(x),
            TreeEncoding::Bp => !self.bits.get(x + 1),
        }
    }

    pub fn outdegree(&self, x: usize) -> Result<usize, SuccinctError> {
        match self.encoding {
            TreeEncoding::Louds | TreeEncoding::Dfuds => Ok(self.next_zero(x)? - x),
            TreeEncoding::Bp => {
                let mut d = 0;
                let mut y = x + 1;
                while self.bits.get(y) {
                    d += 1;
                    y = self.bits.findclose(y)? + 1;
                }
                Ok(d)
            }
        }
    }

    /// 1-based i-th child of the node at `x`.
    pub fn child(&self, x: usize, i: usize) -> Result<usize, SuccinctError> {
        let d = self.outdegree(x)?;
        if i == 0 || i > d {
            return Err(SuccinctError::NoSuchChild { node: x, index: i });
        }
        match self.encoding {
            TreeEncoding::Louds => Ok(self.bits.select0(self.bits.rank1(x)? + i - 1)? + 1),
            TreeEncoding::Dfuds => Ok(self.bits.findclose(x + d - i)? + 1),
            TreeEncoding::Bp => {
                let mut y = x + 1;
                for _ in 1..i {
                    y = self.bits.findclose(y)? + 1;
                }
                Ok(y)
            }
        }
    }

    /// Canonical 1-based number of the node at `x`: its position in level
    /// order for LOUDS and in preorder for DFUDS and BP.
    pub fn node_number(&self, x: usize) -> Result<usize, SuccinctError> {
        match self.encoding {
            TreeEncoding::Louds => Ok(self.bits.rank0(x - 1)? + 1),
            TreeEncoding::Dfuds => Ok(self.bits.rank0(x - 1)? + 1),
            TreeEncoding::Bp => self.bits.rank1(x),
        }
    }

    /// Position of the first zero at or after `x`.
    fn next_zero(&self, x: usize) -> Result<usize, SuccinctError> {
        self.bits.select0(self.bits.rank0(x - 1)? + 1)
    }

    /// Header (encoding tag, node count, bit length) followed by the packed
    /// little-endian words.
    pub fn serialize(&self, buf: &mut Vec<u8>) {
        codec::put_u8(buf, self.encoding.tag());
        codec::put_u64(buf, self.node_count as u64);
        codec::put_u64(buf, self.bits.len() as u64);
        for &w in self.bits.words() {
            codec::put_u64(buf, w);
        }
    }

    pub fn deserialize(r: &mut Reader) -> Result<Self, CodecError> {
        let tag = r.u8()?;
        let encoding = TreeEncoding::from_tag(tag).ok_or_else(|| CodecError::BadTag {
            context: format!("tree encoding tag {tag}"),
        })?;
        let node_count = r.u64()? as usize;
        let bit_len = r.u64()? as usize;
        let n_words = (bit_len + 63) / 64;
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(r.u64()?);
        }
        Ok(SuccinctTree {
            encoding,
            node_count,
            bits: BitVector::from_raw_parts(words, bit_len),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// root -> (A, B), A -> (L1, L2): the five-node worked example.
    fn example_tree() -> PointerTree {
        let mut t = PointerTree::with_root();
        let a = t.add_child(PointerTree::ROOT);
        let _b = t.add_child(PointerTree::ROOT);
        t.add_child(a);
        t.add_child(a);
        t
    }

    fn bit_string(t: &SuccinctTree) -> String {
        (1..=t.bits().len())
            .map(|i| if t.bits().get(i) { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn example_encodings() {
        let t = example_tree();
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Louds)), "110110000");
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Dfuds)), "1110110000");
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Bp)), "1110100100");
    }

    #[test]
    fn single_node_encodings() {
        let t = PointerTree::with_root();
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Louds)), "0");
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Dfuds)), "10");
        assert_eq!(bit_string(&encode(&t, TreeEncoding::Bp)), "10");
        for e in [TreeEncoding::Louds, TreeEncoding::Dfuds, TreeEncoding::Bp] {
            let s = encode(&t, e);
            assert!(s.is_leaf(s.root()));
            assert_eq!(s.outdegree(s.root()).unwrap(), 0);
        }
    }

    #[test]
    fn louds_child_formula_examples() {
        let s = encode(&example_tree(), TreeEncoding::Louds);
        assert_eq!(s.child(1, 2).unwrap(), 7);
        assert_eq!(s.child(4, 1).unwrap(), 8);
        assert_eq!(s.outdegree(1).unwrap(), 2);
        assert_eq!(s.outdegree(7).unwrap(), 0);
        assert_eq!(s.child(1, 1).unwrap(), 4);
        assert_eq!(s.child(4, 2).unwrap(), 9);
        assert!(matches!(s.child(1, 3), Err(SuccinctError::NoSuchChild { .. })));
        assert!(matches!(s.child(7, 1), Err(SuccinctError::NoSuchChild { .. })));
    }

    #[test]
    fn dfuds_child_positions() {
        let s = encode(&example_tree(), TreeEncoding::Dfuds);
        // Preorder runs: root at 2, A at 5, L1 at 8, L2 at 9, B at 10.
        assert_eq!(s.root(), 2);
        assert_eq!(s.outdegree(2).unwrap(), 2);
        assert_eq!(s.child(2, 1).unwrap(), 5);
        assert_eq!(s.child(2, 2).unwrap(), 10);
        assert_eq!(s.child(5, 1).unwrap(), 8);
        assert_eq!(s.child(5, 2).unwrap(), 9);
        assert!(s.is_leaf(8) && s.is_leaf(9) && s.is_leaf(10));
    }

    #[test]
    fn bp_child_positions() {
        let s = encode(&example_tree(), TreeEncoding::Bp);
        // Opens: root 1, A 2, L1 3, L2 5, B 8.
        assert_eq!(s.outdegree(1).unwrap(), 2);
        assert_eq!(s.child(1, 1).unwrap(), 2);
        assert_eq!(s.child(1, 2).unwrap(), 8);
        assert_eq!(s.child(2, 1).unwrap(), 3);
        assert_eq!(s.child(2, 2).unwrap(), 5);
        assert!(s.is_leaf(3) && s.is_leaf(5) && s.is_leaf(8));
    }

    #[test]
    fn node_numbers_follow_canonical_order() {
        let louds = encode(&example_tree(), TreeEncoding::Louds);
        // Level order: root, A, B, L1, L2 at positions 1, 4, 7, 8, 9.
        for (k, x) in [(1, 1), (2, 4), (3, 7), (4, 8), (5, 9)] {
            assert_eq!(louds.node_number(x).unwrap(), k);
        }
        let dfuds = encode(&example_tree(), TreeEncoding::Dfuds);
        // Preorder: root, A, L1, L2, B at positions 2, 5, 8, 9, 10.
        for (k, x) in [(1, 2), (2, 5), (3, 8), (4, 9), (5, 10)] {
            assert_eq!(dfuds.node_number(x).unwrap(), k);
        }
        let bp = encode(&example_tree(), TreeEncoding::Bp);
        for (k, x) in [(1, 1), (2, 2), (3, 3), (4, 5), (5, 8)] {
            assert_eq!(bp.node_number(x).unwrap(), k);
        }
    }

    #[test]
    fn serialization_round_trip() {
        for e in [TreeEncoding::Louds, TreeEncoding::Dfuds, TreeEncoding::Bp] {
            let s = encode(&example_tree(), e);
            let mut buf = Vec::new();
            s.serialize(&mut buf);
            let back = SuccinctTree::deserialize(&mut Reader::new(&buf)).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn deserialize_rejects_bad_tag() {
        let s = encode(&example_tree(), TreeEncoding::Bp);
        let mut buf = Vec::new();
        s.serialize(&mut buf);
        buf[0] = 9;
        assert!(SuccinctTree::deserialize(&mut Reader::new(&buf)).is_err());
    }

    /// Walks the pointer tree and an encoding in lockstep, checking
    /// outdegree, child handles, leaf status, and canonical numbers.
    pub(crate) fn assert_navigation_equivalent(t: &PointerTree, s: &SuccinctTree) {
        let canonical: Vec<NodeId> = match s.encoding() {
            TreeEncoding::Louds => t.level_order(),
            TreeEncoding::Dfuds | TreeEncoding::Bp => t.preorder(),
        };
        let mut number_of = vec![0usize; t.node_count()];
        for (k, &id) in canonical.iter().enumerate() {
            number_of[id] = k + 1;
        }
        let mut stack = vec![(PointerTree::ROOT, s.root())];
        while let Some((pid, pos)) = stack.pop() {
            let d = t.outdegree(pid);
            assert_eq!(s.outdegree(pos).unwrap(), d);
            assert_eq!(s.is_leaf(pos), t.is_leaf(pid));
            assert_eq!(s.node_number(pos).unwrap(), number_of[pid]);
            for i in 1..=d {
                stack.push((t.child(pid, i).unwrap(), s.child(pos, i).unwrap()));
            }
        }
    }

    pub(crate) fn random_tree(rng: &mut impl rand::Rng, max_nodes: usize) -> PointerTree {
        let n = rng.gen_range(1..=max_nodes);
        let mut t = PointerTree::with_root();
        for _ in 1..n {
            let parent = rng.gen_range(0..t.node_count());
            t.add_child(parent);
        }
        t
    }

    #[test]
    fn random_trees_navigate_identically() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for _ in 0..100 {
            let t = random_tree(&mut rng, 200);
            for e in [TreeEncoding::Louds, TreeEncoding::Dfuds, TreeEncoding::Bp] {
                assert_navigation_equivalent(&t, &encode(&t, e));
            }
        }
    }
}
