//! Deterministic simulated bulk-synchronous machine.
//!
//! A machine holds `c` processing elements, each with its block of the
//! suffix and LCP arrays and a padded slice of the text. Computation
//! proceeds in supersteps: every PE runs a compute closure against its own
//! state, queues messages and remote text fetches, and everything is
//! delivered atomically at the barrier. Per superstep the ledger records
//! `w` (maximum compute ticks) and `h` (maximum words any PE sent or
//! received), so a run's cost is `sum(w + h*G + L)`.
//!
//! Determinism: PEs run in id order, inboxes are sorted by (source,
//! sequence), and remote fetches are answered by the simulator at the
//! barrier in issue order. Self-addressed traffic is delivered but charged
//! zero words.

use crate::global::GlobalTrie;
use crate::patricia::PatriciaTrie;
use crate::text::{build_lcp_array, build_suffix_array, Pos, Text};
use thiserror::Error;

pub const WORD_BYTES: usize = 8;

pub fn words_for(bytes: usize) -> u64 {
    ((bytes + WORD_BYTES - 1) / WORD_BYTES) as u64
}

/// First `total % c` blocks get the extra element.
pub fn ceil_sizes(total: usize, c: usize) -> Vec<usize> {
    let q = total / c;
    let r = total % c;
    (0..c).map(|i| q + usize::from(i < r)).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("PE {src} addressed invalid PE {dst} on a machine of {pe_count}")]
    DeliveryToInvalidPe { src: usize, dst: usize, pe_count: usize },
    #[error("PE {pe} fetched [{pos}, +{len}) outside the padded slice of PE {owner}")]
    FetchOutOfSlice { pe: usize, owner: usize, pos: Pos, len: usize },
    #[error("PE {pe} fetched SA ranks [{rank}, +{len}) outside the block of PE {owner}")]
    FetchOutOfBlock { pe: usize, owner: usize, rank: usize, len: usize },
    #[error("cannot split {total} suffixes over {c} PEs without empty blocks")]
    TooManyPes { c: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    QueryForward,
    DrmaRequest,
    DrmaReply,
    PartialResult,
    LabelExchange,
    BoundaryBroadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OneSided,
    Collective,
    P2p,
}

impl MessageKind {
    pub fn mode(self) -> Mode {
        match self {
            MessageKind::DrmaRequest | MessageKind::DrmaReply => Mode::OneSided,
            MessageKind::LabelExchange | MessageKind::BoundaryBroadcast => Mode::Collective,
            MessageKind::QueryForward | MessageKind::PartialResult => Mode::P2p,
        }
    }

    fn tag(self) -> u8 {
        match self {
            MessageKind::QueryForward => 0,
            MessageKind::DrmaRequest => 1,
            MessageKind::DrmaReply => 2,
            MessageKind::PartialResult => 3,
            MessageKind::LabelExchange => 4,
            MessageKind::BoundaryBroadcast => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub src: usize,
    pub dst: usize,
    pub kind: MessageKind,
    pub payload: Vec<u8>,
    pub payload_words: u64,
}

/// One PE: its blocks, padded text slice, and index structures once built.
#[derive(Debug, Clone)]
pub struct PeState {
    pub pe_id: usize,
    /// 1-based global text position of the first owned character.
    pub text_start: Pos,
    /// Owned characters, excluding the padding.
    pub text_len: usize,
    /// `text_len + pmax` bytes; the tail pads into the next block or, on
    /// the last PE, repeats the sentinel.
    pub text_slice: Vec<u8>,
    /// 1-based global rank of the first suffix-array entry.
    pub block_start: usize,
    pub sa_block: Vec<Pos>,
    pub lcp_block: Vec<usize>,
    pub trie: Option<PatriciaTrie>,
    pub global_trie: Option<GlobalTrie>,
    pub inbox: Vec<Message>,
}

impl PeState {
    pub fn block_len(&self) -> usize {
        self.sa_block.len()
    }

    /// Reads `len` characters at global position `pos` if the padded slice
    /// covers them.
    pub fn read_slice(&self, pos: Pos, len: usize) -> Option<&[u8]> {
        if pos < self.text_start {
            return None;
        }
        let off = pos - self.text_start;
        if off + len > self.text_slice.len() {
            return None;
        }
        Some(&self.text_slice[off..off + len])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    pub superstep: usize,
    pub w: u64,
    pub h: u64,
    pub one_sided: u64,
    pub collective: u64,
    pub p2p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostLedger {
    pub rows: Vec<LedgerRow>,
    /// Per-word cost, report-time only.
    pub g: u64,
    /// Barrier cost, report-time only.
    pub l: u64,
}

impl CostLedger {
    pub fn total_cost(&self) -> u64 {
        self.rows.iter().map(|r| r.w + r.h * self.g + self.l).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("superstep\tw\th\tmode_breakdown\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\tone_sided={},collective={},p2p={}\n",
                r.superstep, r.w, r.h, r.one_sided, r.collective, r.p2p
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum FetchTarget {
    Text { pos: Pos, len: usize },
    SaRange { from_rank: usize, len: usize },
}

/// Messages and remote fetches queued by one PE during a compute phase.
#[derive(Debug, Default)]
pub struct Effects {
    sends: Vec<(usize, MessageKind, Vec<u8>)>,
    fetches: Vec<(usize, FetchTarget)>,
    next_req_id: u64,
    first_req_id: u64,
}

impl Effects {
    pub fn send(&mut self, dst: usize, kind: MessageKind, payload: Vec<u8>) {
        self.sends.push((dst, kind, payload));
    }

    /// Queues a remote read of the owner's padded text slice; the reply
    /// arrives next superstep as a DrmaReply whose payload starts with the
    /// returned request id.
    pub fn drma_fetch(&mut self, owner: usize, pos: Pos, len: usize) -> u64 {
        let id = self.next_req_id;
        self.next_req_id += 1;
        self.fetches.push((owner, FetchTarget::Text { pos, len }));
        id
    }

    /// Queues a remote read of `len` entries of the owner's SA block
    /// starting at the global rank `from_rank`. The reply payload is the
    /// request id followed by the entries as little-endian u64 words.
    pub fn drma_fetch_sa(&mut self, owner: usize, from_rank: usize, len: usize) -> u64 {
        let id = self.next_req_id;
        self.next_req_id += 1;
        self.fetches.push((owner, FetchTarget::SaRange { from_rank, len }));
        id
    }
}

/// Parses a DrmaReply payload into (request id, fetched bytes).
pub fn parse_drma_reply(payload: &[u8]) -> (u64, &[u8]) {
    let id = u64::from_le_bytes(payload[..8].try_into().expect("8-byte id prefix"));
    (id, &payload[8..])
}

/// Parses a DrmaReply to an SA-range fetch into (request id, positions).
pub fn parse_drma_reply_positions(payload: &[u8]) -> (u64, Vec<Pos>) {
    let (id, rest) = parse_drma_reply(payload);
    assert!(rest.len() % 8 == 0, "SA reply payload is whole words");
    let positions = rest
        .chunks_exact(8)
        .map(|ch| u64::from_le_bytes(ch.try_into().unwrap()) as Pos)
        .collect();
    (id, positions)
}

pub struct SuperstepCtx<'a> {
    pub pe: &'a mut PeState,
    pub fx: &'a mut Effects,
    pub superstep: usize,
    pub pe_count: usize,
}

#[derive(Debug, Clone)]
pub struct Machine {
    pes: Vec<PeState>,
    pub ledger: CostLedger,
    superstep: usize,
    pmax: usize,
    n_with_sentinel: usize,
    drma_counters: Vec<u64>,
    trace_hash: u64,
    trace_len: u64,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv_mix(h: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *h ^= b as u64;
        *h = h.wrapping_mul(FNV_PRIME);
    }
}

impl Machine {
    /// Builds the arrays for `text`, splits them into ceil-sized blocks,
    /// and hands each PE its padded text slice.
    pub fn distribute(
        text: &Text,
        c: usize,
        pmax: usize,
        g: u64,
        l: u64,
    ) -> Result<Machine, SimError> {
        assert!(c >= 1, "at least one PE");
        assert!(pmax >= 1, "positive pattern limit");
        let total = text.len_with_sentinel();
        if c > total {
            return Err(SimError::TooManyPes { c, total });
        }
        let sa = build_suffix_array(text);
        let lcp = build_lcp_array(text, &sa);
        let sizes = ceil_sizes(total, c);
        let mut pes = Vec::with_capacity(c);
        let mut rank_off = 0usize;
        let mut pos_off = 0usize;
        for (pe_id, &size) in sizes.iter().enumerate() {
            let sa_block = sa.as_slice()[rank_off..rank_off + size].to_vec();
            let lcp_block = lcp.as_slice()[rank_off..rank_off + size].to_vec();
            let text_start = 1 + pos_off;
            pes.push(PeState {
                pe_id,
                text_start,
                text_len: size,
                text_slice: text.padded_slice(text_start, size + pmax),
                block_start: 1 + rank_off,
                sa_block,
                lcp_block,
                trie: None,
                global_trie: None,
                inbox: Vec::new(),
            });
            rank_off += size;
            pos_off += size;
        }
        Ok(Machine {
            pes,
            ledger: CostLedger { rows: Vec::new(), g, l },
            superstep: 0,
            pmax,
            n_with_sentinel: total,
            drma_counters: vec![0; c],
            trace_hash: FNV_OFFSET,
            trace_len: 0,
        })
    }

    /// Reassembles a machine from previously persisted PE states. The
    /// ledger and trace start fresh; only the distribution and any built
    /// index structures carry over.
    pub(crate) fn from_loaded(
        pes: Vec<PeState>,
        pmax: usize,
        n_with_sentinel: usize,
        g: u64,
        l: u64,
    ) -> Machine {
        let c = pes.len();
        Machine {
            pes,
            ledger: CostLedger { rows: Vec::new(), g, l },
            superstep: 0,
            pmax,
            n_with_sentinel,
            drma_counters: vec![0; c],
            trace_hash: FNV_OFFSET,
            trace_len: 0,
        }
    }

    pub fn pe_count(&self) -> usize {
        self.pes.len()
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    pub fn n_with_sentinel(&self) -> usize {
        self.n_with_sentinel
    }

    pub fn pe(&self, i: usize) -> &PeState {
        &self.pes[i]
    }

    pub fn pe_mut(&mut self, i: usize) -> &mut PeState {
        &mut self.pes[i]
    }

    pub fn pes(&self) -> &[PeState] {
        &self.pes
    }

    pub fn superstep_index(&self) -> usize {
        self.superstep
    }

    /// PE whose text block contains global position `pos`.
    pub fn text_owner(&self, pos: Pos) -> usize {
        debug_assert!((1..=self.n_with_sentinel).contains(&pos));
        match self.pes.binary_search_by(|pe| pe.text_start.cmp(&pos)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// PE whose SA block contains global rank `rank` (1-based).
    pub fn rank_owner(&self, rank: usize) -> usize {
        debug_assert!((1..=self.n_with_sentinel).contains(&rank));
        match self.pes.binary_search_by(|pe| pe.block_start.cmp(&rank)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// (hash, message count) over every delivered message and fetch.
    pub fn trace_fingerprint(&self) -> (u64, u64) {
        (self.trace_hash, self.trace_len)
    }

    /// Remote fetches issued so far, summed over all PEs.
    pub fn drma_ops(&self) -> u64 {
        self.drma_counters.iter().sum()
    }

    fn trace(&mut self, src: usize, dst: usize, tag: u8, payload: &[u8]) {
        let mut head = [0u8; 24];
        head[..8].copy_from_slice(&(self.superstep as u64).to_le_bytes());
        head[8..16].copy_from_slice(&(src as u64).to_le_bytes());
        head[16..24].copy_from_slice(&(dst as u64).to_le_bytes());
        fnv_mix(&mut self.trace_hash, &head);
        fnv_mix(&mut self.trace_hash, &[tag]);
        fnv_mix(&mut self.trace_hash, payload);
        self.trace_len += 1;
    }

    /// Runs one compute phase on every PE and delivers at the barrier.
    /// The closure returns the PE's work ticks; it can only reach the
    /// machine through its own `PeState` and `Effects`.
    pub fn run_superstep<F>(&mut self, mut compute: F) -> Result<(), SimError>
    where
        F: FnMut(SuperstepCtx) -> u64,
    {
        let c = self.pes.len();
        self.superstep += 1;
        let mut ticks = vec![0u64; c];
        let mut effects: Vec<Effects> = (0..c)
            .map(|i| Effects {
                next_req_id: self.drma_counters[i],
                first_req_id: self.drma_counters[i],
                ..Effects::default()
            })
            .collect();
        for i in 0..c {
            ticks[i] = compute(SuperstepCtx {
                pe: &mut self.pes[i],
                fx: &mut effects[i],
                superstep: self.superstep,
                pe_count: c,
            });
        }

        // Barrier: validate, account, deliver. Sequence numbers are per
        // source so inboxes can be ordered by (src, seq).
        let mut sent = vec![0u64; c];
        let mut recv = vec![0u64; c];
        let mut mode_words = [0u64; 3];
        let mut seq = vec![0u64; c];
        let mut deliveries: Vec<(usize, u64, Message)> = Vec::new();
        for (src, fx) in effects.iter_mut().enumerate() {
            for (dst, kind, payload) in fx.sends.drain(..) {
                if dst >= c {
                    return Err(SimError::DeliveryToInvalidPe { src, dst, pe_count: c });
                }
                let words = words_for(payload.len());
                self.trace(src, dst, kind.tag(), &payload);
                if dst != src {
                    sent[src] += words;
                    recv[dst] += words;
                    mode_words[kind.mode() as usize] += words;
                }
                let s = seq[src];
                seq[src] += 1;
                deliveries.push((dst, s, Message { src, dst, kind, payload, payload_words: words }));
            }
            let mut req_id = fx.first_req_id;
            for &(owner, target) in &fx.fetches {
                if owner >= c {
                    return Err(SimError::DeliveryToInvalidPe { src, dst: owner, pe_count: c });
                }
                let (addr, len) = match target {
                    FetchTarget::Text { pos, len } => (pos as u64, len),
                    FetchTarget::SaRange { from_rank, len } => (from_rank as u64, len),
                };
                let request = {
                    let mut b = Vec::with_capacity(16);
                    b.extend_from_slice(&addr.to_le_bytes());
                    b.extend_from_slice(&(len as u64).to_le_bytes());
                    b
                };
                let req_words = words_for(request.len());
                self.trace(src, owner, MessageKind::DrmaRequest.tag(), &request);
                let bytes = match target {
                    FetchTarget::Text { pos, len } => self.pes[owner]
                        .read_slice(pos, len)
                        .ok_or(SimError::FetchOutOfSlice { pe: src, owner, pos, len })?
                        .to_vec(),
                    FetchTarget::SaRange { from_rank, len } => {
                        let block = &self.pes[owner];
                        let start = from_rank
                            .checked_sub(block.block_start)
                            .filter(|&o| o + len <= block.sa_block.len())
                            .ok_or(SimError::FetchOutOfBlock { pe: src, owner, rank: from_rank, len })?;
                        let mut b = Vec::with_capacity(8 * len);
                        for &p in &block.sa_block[start..start + len] {
                            b.extend_from_slice(&(p as u64).to_le_bytes());
                        }
                        b
                    }
                };
                let mut payload = Vec::with_capacity(8 + bytes.len());
                payload.extend_from_slice(&req_id.to_le_bytes());
                payload.extend_from_slice(&bytes);
                let reply_words = words_for(payload.len());
                self.trace(owner, src, MessageKind::DrmaReply.tag(), &payload);
                if owner != src {
                    sent[src] += req_words;
                    recv[owner] += req_words;
                    sent[owner] += reply_words;
                    recv[src] += reply_words;
                    mode_words[Mode::OneSided as usize] += req_words + reply_words;
                }
                let s = seq[owner];
                seq[owner] += 1;
                deliveries.push((
                    src,
                    s,
                    Message {
                        src: owner,
                        dst: src,
                        kind: MessageKind::DrmaReply,
                        payload,
                        payload_words: reply_words,
                    },
                ));
                req_id += 1;
            }
            self.drma_counters[src] = fx.next_req_id;
        }
        for pe in &mut self.pes {
            pe.inbox.clear();
        }
        deliveries.sort_by_key(|entry| (entry.0, entry.2.src, entry.1));
        for (dst, _, m) in deliveries {
            self.pes[dst].inbox.push(m);
        }

        let w = ticks.iter().copied().max().unwrap_or(0);
        let h = (0..c).map(|i| sent[i].max(recv[i])).max().unwrap_or(0);
        self.ledger.rows.push(LedgerRow {
            superstep: self.superstep,
            w,
            h,
            one_sided: mode_words[Mode::OneSided as usize],
            collective: mode_words[Mode::Collective as usize],
            p2p: mode_words[Mode::P2p as usize],
        });
        Ok(())
    }
}
