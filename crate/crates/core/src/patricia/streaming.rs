//! Event-driven DFUDS construction.
//!
//! The batch path materializes a pointer skeleton and encodes it afterwards.
//! This variant consumes the same (SA, LCP) scan but only keeps the open
//! rightmost path plus a postorder log of finalized nodes, then lays the log
//! out in preorder in one linear pass. The resulting trie is identical, bit
//! for bit, to the batch DFUDS product, and the label requests are issued in
//! the same order, so one exchange schedule serves both.

use super::build::NO_REQUEST;
use super::{succinct_from_bits, BlockMeta, PatriciaError, PatriciaTrie, SuccinctRepr, TrieRepr};
use crate::succinct::{width_for, PackedIntVec, TreeEncoding};
use crate::text::Pos;

#[derive(Debug, Clone, Copy)]
struct LogEntry {
    degree: usize,
    depth: usize,
    req: usize,
}

#[derive(Debug)]
struct Open {
    depth: usize,
    req: usize,
    degree: usize,
    /// Sizes of completed child subtrees, rightmost last.
    child_sizes: Vec<usize>,
    size_sum: usize,
}

/// Preorder data of a finished DFUDS trie, labels still outstanding.
#[derive(Debug)]
pub struct StreamedDfuds {
    meta: BlockMeta,
    n_with_sentinel: usize,
    degrees: Vec<usize>,
    depths: Vec<u64>,
    reqs: Vec<usize>,
    requests: Vec<Pos>,
}

impl StreamedDfuds {
    pub fn requests(&self) -> &[Pos] {
        &self.requests
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// `labels[j]` answers `requests()[j]`.
    pub fn into_trie(self, labels: &[u8]) -> PatriciaTrie {
        let resolve =
            |req: usize| -> u8 { if req == NO_REQUEST { 0 } else { labels[req] } };
        let mut bits: Vec<bool> = Vec::with_capacity(2 * self.degrees.len());
        bits.push(true);
        for &d in &self.degrees {
            bits.extend(std::iter::repeat(true).take(d));
            bits.push(false);
        }
        let tree = succinct_from_bits(TreeEncoding::Dfuds, self.degrees.len(), bits);
        let depths =
            PackedIntVec::from_values(width_for(self.n_with_sentinel as u64), self.depths);
        let chars: Vec<u8> = self.reqs.iter().map(|&r| resolve(r)).collect();
        let leaf_bv = super::leaf_indicator(&tree);
        PatriciaTrie {
            meta: self.meta,
            n_with_sentinel: self.n_with_sentinel,
            repr: TrieRepr::Succinct(SuccinctRepr {
                tree,
                leaf_bv,
                depths,
                chars,
                leaf_perm: None,
            }),
        }
    }
}

pub fn build_skeleton_streaming_dfuds(
    meta: BlockMeta,
    sa_block: &[Pos],
    lcp_block: &[usize],
    n_with_sentinel: usize,
) -> Result<StreamedDfuds, PatriciaError> {
    let m = sa_block.len();
    if m == 0 {
        return Err(PatriciaError::EmptyBlock { pe_id: meta.pe_id });
    }
    if lcp_block.len() != m || meta.block_len != m {
        return Err(PatriciaError::MalformedLcp { at_rank: 0 });
    }
    let suffix_len = |pos: Pos| n_with_sentinel + 1 - pos;

    let mut requests: Vec<Pos> = Vec::new();
    let request = |pos: Pos, requests: &mut Vec<Pos>| -> usize {
        requests.push(pos);
        requests.len() - 1
    };
    let mut log: Vec<LogEntry> = Vec::with_capacity(2 * m);
    let mut stack: Vec<Open> = vec![Open {
        depth: 0,
        req: NO_REQUEST,
        degree: 0,
        child_sizes: Vec::new(),
        size_sum: 0,
    }];

    let complete_leaf = |log: &mut Vec<LogEntry>, top: &mut Open, depth: usize, req: usize| {
        log.push(LogEntry { degree: 0, depth, req });
        top.degree += 1;
        top.child_sizes.push(1);
        top.size_sum += 1;
    };

    let r0 = request(sa_block[0], &mut requests);
    complete_leaf(&mut log, &mut stack[0], suffix_len(sa_block[0]), r0);

    for i in 1..m {
        let ell = lcp_block[i];
        if ell >= suffix_len(sa_block[i - 1]) || ell >= suffix_len(sa_block[i]) {
            return Err(PatriciaError::MalformedLcp { at_rank: i });
        }
        while stack.last().map(|o| o.depth > ell).unwrap_or(false) {
            let v = stack.pop().expect("guarded");
            let size = v.size_sum + 1;
            log.push(LogEntry { degree: v.degree, depth: v.depth, req: v.req });
            let top = stack.last_mut().expect("root never has depth > lcp");
            top.degree += 1;
            top.child_sizes.push(size);
            top.size_sum += size;
        }
        let top_depth = stack.last().expect("nonempty").depth;
        if top_depth < ell {
            // Branch below: the rightmost completed subtree, whose root's
            // entry is the newest in the log, drops one level under a fresh
            // node that keeps the old incoming edge character.
            let top = stack.last_mut().expect("nonempty");
            let o_size = top.child_sizes.pop().expect("rightmost path node has a child");
            top.degree -= 1;
            top.size_sum -= o_size;
            let last = log.len() - 1;
            let inherited = log[last].req;
            log[last].req = request(sa_block[i - 1] + ell, &mut requests);
            stack.push(Open {
                depth: ell,
                req: inherited,
                degree: 1,
                child_sizes: vec![o_size],
                size_sum: o_size,
            });
        }
        let rl = request(sa_block[i] + ell, &mut requests);
        let top = stack.last_mut().expect("nonempty");
        complete_leaf(&mut log, top, suffix_len(sa_block[i]), rl);
    }
    while stack.len() > 1 {
        let v = stack.pop().expect("guarded");
        let size = v.size_sum + 1;
        log.push(LogEntry { degree: v.degree, depth: v.depth, req: v.req });
        let top = stack.last_mut().expect("nonempty");
        top.degree += 1;
        top.child_sizes.push(size);
        top.size_sum += size;
    }
    let root = stack.pop().expect("root");
    log.push(LogEntry { degree: root.degree, depth: root.depth, req: root.req });

    // The log is postorder. Recover child lists, then one preorder walk
    // fills the output arrays.
    let n = log.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = Vec::new();
    for (idx, e) in log.iter().enumerate() {
        let split = pending.len() - e.degree;
        children[idx] = pending.split_off(split);
        pending.push(idx);
    }
    debug_assert_eq!(pending, vec![n - 1]);

    let mut degrees = Vec::with_capacity(n);
    let mut depths = Vec::with_capacity(n);
    let mut reqs = Vec::with_capacity(n);
    let mut dfs = vec![n - 1];
    while let Some(idx) = dfs.pop() {
        degrees.push(log[idx].degree);
        depths.push(log[idx].depth as u64);
        reqs.push(log[idx].req);
        for &c in children[idx].iter().rev() {
            dfs.push(c);
        }
    }

    Ok(StreamedDfuds { meta, n_with_sentinel, degrees, depths, reqs, requests })
}
