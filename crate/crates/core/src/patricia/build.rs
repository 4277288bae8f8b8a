//! Left-to-right Patricia trie construction from a suffix-array block and
//! its LCP block, in one linear scan with a stack of the rightmost path.
//!
//! Construction never reads the text. Every edge records the text position
//! of its first label character; callers resolve the recorded positions
//! afterwards (locally or through remote fetches) and only then does the
//! trie become searchable. At most one position is recorded per created
//! edge, so a block of `m` suffixes records fewer than `2m` characters.

use super::{Backing, BlockMeta, PatriciaError};
use crate::text::Pos;

/// Index into the request list; the root's incoming edge has none.
pub(super) const NO_REQUEST: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(super) struct SkelNode {
    pub depth: usize,
    pub children: Vec<usize>,
    /// Request slot of the incoming edge's first character.
    pub char_req: usize,
    /// Left-to-right leaf index within the block, leaves only.
    pub leaf_rank: Option<usize>,
}

/// Pointer-shaped trie with unresolved edge characters.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub(super) nodes: Vec<SkelNode>,
    pub(super) meta: BlockMeta,
    pub(super) n_with_sentinel: usize,
    requests: Vec<Pos>,
}

impl Skeleton {
    /// Text positions whose characters are needed for edge labels, in
    /// request order.
    pub fn requests(&self) -> &[Pos] {
        &self.requests
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.meta.block_len
    }
}

/// Runs the stack construction over `sa_block` and `lcp_block`.
///
/// `lcp_block[0]` is the seam value against the previous block and takes no
/// part in the local structure; entry `i >= 1` is the LCP of the block's
/// suffixes `i - 1` and `i`. `n_with_sentinel` is the global text length
/// including the sentinel.
pub fn build_skeleton(
    meta: BlockMeta,
    sa_block: &[Pos],
    lcp_block: &[usize],
    n_with_sentinel: usize,
) -> Result<Skeleton, PatriciaError> {
    let m = sa_block.len();
    if m == 0 {
        return Err(PatriciaError::EmptyBlock { pe_id: meta.pe_id });
    }
    if lcp_block.len() != m || meta.block_len != m {
        return Err(PatriciaError::MalformedLcp { at_rank: 0 });
    }
    let suffix_len = |pos: Pos| n_with_sentinel + 1 - pos;

    let mut sk = Skeleton {
        nodes: vec![SkelNode { depth: 0, children: Vec::new(), char_req: NO_REQUEST, leaf_rank: None }],
        meta,
        n_with_sentinel,
        requests: Vec::new(),
    };
    let mut stack: Vec<usize> = vec![0];

    let request = |requests: &mut Vec<Pos>, pos: Pos| -> usize {
        requests.push(pos);
        requests.len() - 1
    };

    // First leaf hangs off the root; its edge starts at its first character.
    let req = request(&mut sk.requests, sa_block[0]);
    sk.nodes.push(SkelNode {
        depth: suffix_len(sa_block[0]),
        children: Vec::new(),
        char_req: req,
        leaf_rank: Some(0),
    });
    sk.nodes[0].children.push(1);

    for i in 1..m {
        let ell = lcp_block[i];
        // An LCP that swallows either neighbor suffix whole cannot come
        // from distinct sentinel-terminated suffixes.
        if ell >= suffix_len(sa_block[i - 1]) || ell >= suffix_len(sa_block[i]) {
            return Err(PatriciaError::MalformedLcp { at_rank: i });
        }
        while sk.nodes[*stack.last().unwrap()].depth > ell {
            stack.pop();
        }
        let v = *stack.last().unwrap();
        let attach_under = if sk.nodes[v].depth == ell {
            v
        } else {
            // Branch below v: a new inner node at depth `ell` takes over
            // v's rightmost child and inherits that edge's first character.
            let o = sk.nodes[v].children.pop().expect("rightmost path node has a child");
            let inherited = sk.nodes[o].char_req;
            let re_req = request(&mut sk.requests, sa_block[i - 1] + ell);
            sk.nodes[o].char_req = re_req;
            let w = sk.nodes.len();
            sk.nodes.push(SkelNode {
                depth: ell,
                children: vec![o],
                char_req: inherited,
                leaf_rank: None,
            });
            sk.nodes[v].children.push(w);
            stack.push(w);
            w
        };
        let req = request(&mut sk.requests, sa_block[i] + ell);
        let leaf = sk.nodes.len();
        sk.nodes.push(SkelNode {
            depth: suffix_len(sa_block[i]),
            children: Vec::new(),
            char_req: req,
            leaf_rank: Some(i),
        });
        sk.nodes[attach_under].children.push(leaf);
    }
    Ok(sk)
}

impl Skeleton {
    /// Nodes in preorder; the canonical order for pointer, DFUDS, and BP
    /// backings.
    pub(super) fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            order.push(x);
            for &c in self.nodes[x].children.iter().rev() {
                stack.push(c);
            }
        }
        order
    }

    /// Nodes in level order; the canonical order for the LOUDS backing.
    pub(super) fn level_order(&self) -> Vec<usize> {
        let mut order = vec![0usize];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            order.extend_from_slice(&self.nodes[x].children);
        }
        order
    }

    /// Resolves requested characters against the full label list and
    /// assembles the chosen backing.
    pub fn into_trie(self, labels: &[u8], backing: Backing) -> super::PatriciaTrie {
        assert_eq!(labels.len(), self.requests.len(), "one character per request");
        super::assemble(self, labels, backing)
    }
}
