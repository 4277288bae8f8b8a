//! Replicated routing trie over block boundary suffixes.
//!
//! Every PE contributes its lexicographically smallest and largest suffix;
//! the resulting 2c suffixes, truncated to the routing depth limit `pmax`,
//! form a small trie with full string edge labels that is replicated on
//! every PE. Routing a pattern through it yields either a proven interval
//! of PEs, a single candidate PE that must run a local search, or a proof
//! of absence, all without touching the distributed text.
//!
//! Leaf ranks are 0-based; rank `2p` is PE `p`'s minimum suffix and rank
//! `2p + 1` its maximum, so `rank / 2` maps a leaf to its PE and rank
//! parity distinguishes block interiors from the gaps between blocks.

use crate::codec::{self, CodecError, Reader};
use crate::text::{Pos, Text};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlobalError {
    #[error("pattern of length {len} exceeds the routing depth limit {pmax}")]
    PatternTooLong { len: usize, pmax: usize },
    #[error("empty pattern")]
    EmptyPattern,
}

/// The 2c boundary suffixes in global suffix order with their pairwise LCP
/// values, as assembled from the per-PE contributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySet {
    pub c: usize,
    pub n_with_sentinel: usize,
    /// Text positions `[min_0, max_0, min_1, max_1, ..]`.
    pub positions: Vec<Pos>,
    /// `lcps[i]` = LCP of boundary suffixes `i - 1` and `i`; `lcps[0] = 0`.
    /// A single-suffix block repeats one position and records the full
    /// suffix length as the self-LCP.
    pub lcps: Vec<usize>,
}

impl BoundarySet {
    pub fn suffix_len(&self, rank: usize) -> usize {
        self.n_with_sentinel + 1 - self.positions[rank]
    }

    pub fn trunc_len(&self, rank: usize, pmax: usize) -> usize {
        self.suffix_len(rank).min(pmax)
    }
}

/// Pure form of the boundary exchange: each entry of `blocks` is one PE's
/// (SA block, LCP block), where the first LCP value is the seam against
/// the previous block.
pub fn gather_boundaries(blocks: &[(&[Pos], &[usize])], n_with_sentinel: usize) -> BoundarySet {
    let c = blocks.len();
    assert!(c > 0, "at least one block");
    let mut positions = Vec::with_capacity(2 * c);
    let mut lcps = Vec::with_capacity(2 * c);
    for (i, (sa, lcp)) in blocks.iter().enumerate() {
        let m = sa.len();
        assert!(m > 0 && lcp.len() == m, "blocks must be nonempty and aligned");
        let seam = if i == 0 { 0 } else { lcp[0] };
        let cover = if m == 1 {
            n_with_sentinel + 1 - sa[0]
        } else {
            lcp[1..].iter().copied().min().expect("m > 1")
        };
        positions.push(sa[0]);
        positions.push(sa[m - 1]);
        lcps.push(seam);
        lcps.push(cover);
    }
    BoundarySet { c, n_with_sentinel, positions, lcps }
}

/// Boundary suffixes truncated to `pmax`, read straight from a local text.
pub fn boundary_strings(bs: &BoundarySet, pmax: usize, text: &Text) -> Vec<Vec<u8>> {
    (0..bs.positions.len())
        .map(|i| text.padded_slice(bs.positions[i], bs.trunc_len(i, pmax)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingResult {
    /// Every PE in `l..=r` holds at least one occurrence.
    Interval { l: usize, r: usize },
    /// Occurrence unresolved; exactly this PE may hold matches.
    Candidate { pe: usize },
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct GtNode {
    depth: usize,
    label_off: usize,
    label_len: usize,
    children: Vec<usize>,
    /// Inclusive boundary-rank interval covered by the subtree.
    cover: (usize, usize),
    /// Collapsed leaf group; `cover` spans several ranks when truncated
    /// boundary suffixes coincide.
    leaf: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalTrie {
    c: usize,
    pmax: usize,
    nodes: Vec<GtNode>,
    labels: Vec<u8>,
}

impl GlobalTrie {
    /// Builds the trie; `fetch(pos, len)` must return the padded text
    /// slice starting at `pos`.
    pub fn build(
        bs: &BoundarySet,
        pmax: usize,
        mut fetch: impl FnMut(Pos, usize) -> Vec<u8>,
    ) -> GlobalTrie {
        assert!(pmax >= 1, "routing depth limit must be positive");
        let k = bs.positions.len();
        let strings: Vec<Vec<u8>> =
            (0..k).map(|i| fetch(bs.positions[i], bs.trunc_len(i, pmax))).collect();

        // Equal truncated strings collapse into one leaf; `glcp` keeps the
        // pair LCP between adjacent surviving groups.
        let mut groups: Vec<(usize, usize, usize)> = vec![(0, 0, 0)]; // (repr, a, b)
        let mut glcp: Vec<usize> = vec![0];
        for i in 1..k {
            let e = bs.lcps[i].min(pmax);
            if e >= strings[i - 1].len() && e >= strings[i].len() {
                groups.last_mut().expect("nonempty").2 = i;
            } else {
                groups.push((i, i, i));
                glcp.push(e);
            }
        }

        let mut nodes = vec![GtNode {
            depth: 0,
            label_off: 0,
            label_len: 0,
            children: Vec::new(),
            cover: (0, k - 1),
            leaf: false,
        }];
        let mut repr = vec![0usize];
        let mut stack = vec![0usize];
        let add_leaf = |nodes: &mut Vec<GtNode>, repr: &mut Vec<usize>, g: (usize, usize, usize), under: usize| {
            let id = nodes.len();
            nodes.push(GtNode {
                depth: strings[g.0].len(),
                label_off: 0,
                label_len: 0,
                children: Vec::new(),
                cover: (g.1, g.2),
                leaf: true,
            });
            repr.push(g.0);
            nodes[under].children.push(id);
        };
        add_leaf(&mut nodes, &mut repr, groups[0], 0);
        for g in 1..groups.len() {
            let ell = glcp[g];
            while nodes[*stack.last().expect("nonempty")].depth > ell {
                stack.pop();
            }
            let v = *stack.last().expect("root depth 0");
            let attach = if nodes[v].depth == ell {
                v
            } else {
                let o = nodes[v].children.pop().expect("rightmost path node has a child");
                let w = nodes.len();
                nodes.push(GtNode {
                    depth: ell,
                    label_off: 0,
                    label_len: 0,
                    children: vec![o],
                    cover: (0, 0),
                    leaf: false,
                });
                repr.push(repr[o]);
                nodes[v].children.push(w);
                stack.push(w);
                w
            };
            add_leaf(&mut nodes, &mut repr, groups[g], attach);
        }

        // Covers bottom-up, labels top-down from representative strings.
        let mut order = vec![0usize];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            order.extend_from_slice(&nodes[x].children);
        }
        for &x in order.iter().rev() {
            if !nodes[x].leaf && !nodes[x].children.is_empty() {
                let first = nodes[*nodes[x].children.first().expect("nonempty")].cover.0;
                let last = nodes[*nodes[x].children.last().expect("nonempty")].cover.1;
                nodes[x].cover = (first, last);
            }
        }
        let mut labels = Vec::new();
        for &x in &order {
            let parent_depth = nodes[x].depth;
            for ci in 0..nodes[x].children.len() {
                let child = nodes[x].children[ci];
                let s = &strings[repr[child]];
                nodes[child].label_off = labels.len();
                nodes[child].label_len = nodes[child].depth - parent_depth;
                labels.extend_from_slice(&s[parent_depth..nodes[child].depth]);
            }
        }
        GlobalTrie { c: bs.c, pmax, nodes, labels }
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn label_bytes(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, x: usize) -> &[u8] {
        let n = &self.nodes[x];
        &self.labels[n.label_off..n.label_off + n.label_len]
    }

    fn first_char(&self, x: usize) -> u8 {
        self.labels[self.nodes[x].label_off]
    }

    /// Truncated boundary string of each leaf group, with covered ranks;
    /// concatenated edge labels root to leaf.
    pub fn leaf_strings(&self) -> Vec<(Vec<u8>, (usize, usize))> {
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Vec<u8>)> = vec![(0, Vec::new())];
        while let Some((x, prefix)) = stack.pop() {
            if self.nodes[x].leaf {
                out.push((prefix, self.nodes[x].cover));
                continue;
            }
            for &ch in self.nodes[x].children.iter().rev() {
                let mut ext = prefix.clone();
                ext.extend_from_slice(self.label(ch));
                stack.push((ch, ext));
            }
        }
        out.sort_by_key(|&(_, (a, _))| a);
        out
    }

    pub fn route(&self, p: &[u8]) -> Result<RoutingResult, GlobalError> {
        if p.is_empty() {
            return Err(GlobalError::EmptyPattern);
        }
        if p.len() > self.pmax {
            return Err(GlobalError::PatternTooLong { len: p.len(), pmax: self.pmax });
        }
        let mut node = 0usize;
        let mut pos = 0usize;
        loop {
            if pos == p.len() {
                return Ok(self.full_match(node));
            }
            let n = &self.nodes[node];
            if n.children.is_empty() {
                // The pattern strictly extends a full boundary string, so
                // it sorts just after the whole group.
                return Ok(decide(n.cover.1 + 1));
            }
            let beta = p[pos];
            match n.children.binary_search_by_key(&beta, |&ch| self.first_char(ch)) {
                Ok(idx) => {
                    let v = n.children[idx];
                    let label = self.label(v);
                    let take = label.len().min(p.len() - pos);
                    for t in 1..take {
                        let alpha = label[t];
                        if alpha != p[pos + t] {
                            return Ok(if alpha > p[pos + t] {
                                decide(self.nodes[v].cover.0)
                            } else {
                                decide(self.nodes[v].cover.1 + 1)
                            });
                        }
                    }
                    if pos + take == p.len() {
                        return Ok(self.full_match(v));
                    }
                    pos += label.len();
                    node = v;
                }
                Err(ins) => {
                    // No feasible edge: fall back to the successor edge,
                    // else the predecessor, with the same parity rule.
                    return Ok(if ins < n.children.len() {
                        decide(self.nodes[n.children[ins]].cover.0)
                    } else {
                        let last = *n.children.last().expect("nonempty");
                        decide(self.nodes[last].cover.1 + 1)
                    });
                }
            }
        }
    }

    /// Pattern fully consumed at or inside the edge into `v`.
    fn full_match(&self, v: usize) -> RoutingResult {
        let (a, b) = self.nodes[v].cover;
        if self.nodes[v].leaf && a == b {
            RoutingResult::Candidate { pe: a / 2 }
        } else {
            RoutingResult::Interval { l: a / 2, r: b / 2 }
        }
    }

    pub fn serialize(&self, buf: &mut Vec<u8>) {
        codec::put_u64(buf, self.c as u64);
        codec::put_u64(buf, self.pmax as u64);
        codec::put_u64(buf, self.nodes.len() as u64);
        for n in &self.nodes {
            codec::put_u64(buf, n.depth as u64);
            codec::put_u64(buf, n.label_off as u64);
            codec::put_u64(buf, n.label_len as u64);
            codec::put_u64(buf, n.cover.0 as u64);
            codec::put_u64(buf, n.cover.1 as u64);
            codec::put_u8(buf, n.leaf as u8);
            codec::put_u64(buf, n.children.len() as u64);
            for &ch in &n.children {
                codec::put_u64(buf, ch as u64);
            }
        }
        codec::put_bytes(buf, &self.labels);
    }

    pub fn deserialize(r: &mut Reader) -> Result<Self, CodecError> {
        let c = r.u64()? as usize;
        let pmax = r.u64()? as usize;
        let node_count = r.u64()? as usize;
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let depth = r.u64()? as usize;
            let label_off = r.u64()? as usize;
            let label_len = r.u64()? as usize;
            let cover = (r.u64()? as usize, r.u64()? as usize);
            let leaf = match r.u8()? {
                0 => false,
                1 => true,
                t => return Err(CodecError::BadTag { context: format!("leaf flag {t}") }),
            };
            let n_children = r.u64()? as usize;
            let mut children = Vec::with_capacity(n_children);
            for _ in 0..n_children {
                children.push(r.u64()? as usize);
            }
            nodes.push(GtNode { depth, label_off, label_len, children, cover, leaf });
        }
        let labels = r.bytes()?.to_vec();
        Ok(GlobalTrie { c, pmax, nodes, labels })
    }
}

fn decide(insertion_rank: usize) -> RoutingResult {
    // Even ranks fall in the gap between two blocks, odd ranks inside one.
    if insertion_rank % 2 == 0 {
        RoutingResult::Absent
    } else {
        RoutingResult::Candidate { pe: insertion_rank / 2 }
    }
}
