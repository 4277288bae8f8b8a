//! The two-level index assembled on the simulated machine: one Patricia
//! trie per PE over its suffix-array block, plus a replicated routing trie
//! over the 2c block-boundary suffixes truncated at `pmax`.
//!
//! Construction and all three query protocols run as explicit supersteps,
//! so the cost ledger of the owning machine reflects exactly what a real
//! bulk-synchronous run would pay. Queries are answered in batches; a
//! single query is a batch of one.

use crate::codec::{self, Reader};
use crate::global::{GlobalTrie, RoutingResult};
use crate::patricia::{
    build_skeleton, build_skeleton_streaming_dfuds, verify_occurrence, Backing, BlindOutcome,
    BlockMeta, PatriciaError, PatriciaTrie,
};
use crate::sim::{
    parse_drma_reply, parse_drma_reply_positions, words_for, Effects, Machine, Message,
    MessageKind, SimError,
};
use crate::text::{Pos, Text, SENTINEL};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DptError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Patricia(#[from] PatriciaError),
}

/// Construction parameters. `label_batch` caps how many outstanding remote
/// label fetches a PE may hold per superstep (`None` = all at once); it
/// trades supersteps for buffer space and never changes the built index.
#[derive(Debug, Clone)]
pub struct DptConfig {
    pub c: usize,
    pub pmax: usize,
    pub backing: Backing,
    pub label_batch: Option<usize>,
    pub g: u64,
    pub l: u64,
}

impl DptConfig {
    pub fn new(c: usize) -> Self {
        DptConfig {
            c,
            pmax: 30,
            backing: Backing::Louds,
            label_batch: None,
            g: 1,
            l: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Exists,
    Count,
    Enumerate,
}

#[derive(Debug, Clone)]
pub struct Query {
    pub kind: QueryKind,
    pub pattern: Vec<u8>,
    /// PE the query arrives at; routing happens there.
    pub arrival_pe: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("pattern of length {len} exceeds the routing depth limit {pmax}")]
    PatternTooLong { len: usize, pmax: usize },
    #[error("empty pattern")]
    EmptyPattern,
    #[error("pattern contains the sentinel byte")]
    SentinelInPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryValue {
    Exists(bool),
    Count(u64),
    /// Occurrence positions, ascending.
    Enumerate(Vec<Pos>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub value: Result<QueryValue, QueryError>,
    /// Supersteps from batch start until the answer was known at some PE.
    pub supersteps: usize,
    /// Words this query moved between distinct PEs.
    pub words: u64,
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub results: Vec<QueryResult>,
    /// Forwarded queries each PE received in the search superstep.
    pub received_histogram: Vec<u64>,
    /// Ledger rows the whole batch consumed.
    pub supersteps: usize,
}

const K_EXISTS: u8 = 0;
const K_COUNT: u8 = 1;
const K_ENUM: u8 = 2;

const ROLE_SINGLE: u8 = 0;
const ROLE_LEFT: u8 = 1;
const ROLE_RIGHT: u8 = 2;

/// Marks a local search whose answer is already known (blind miss), so no
/// text fetch is outstanding.
const NO_FETCH: u64 = u64::MAX;

fn kind_tag(kind: QueryKind) -> u8 {
    match kind {
        QueryKind::Exists => K_EXISTS,
        QueryKind::Count => K_COUNT,
        QueryKind::Enumerate => K_ENUM,
    }
}

fn owner_of(text_starts: &[Pos], pos: Pos) -> usize {
    debug_assert!(pos >= text_starts[0]);
    text_starts.partition_point(|&s| s <= pos) - 1
}

fn forward_payload(qid: u32, kind: u8, role: u8, arrival: usize, pattern: &[u8]) -> Vec<u8> {
    let mut b = Vec::with_capacity(9 + pattern.len());
    codec::put_u32(&mut b, qid);
    codec::put_u8(&mut b, kind * 4 + role);
    codec::put_u32(&mut b, arrival as u32);
    b.extend_from_slice(pattern);
    b
}

fn decode_forward(payload: &[u8]) -> (u32, u8, u8, usize, &[u8]) {
    let mut r = Reader::new(payload);
    let qid = r.u32().expect("query id");
    let tag = r.u8().expect("kind/role tag");
    let arrival = r.u32().expect("arrival pe") as usize;
    (qid, tag / 4, tag % 4, arrival, r.rest())
}

fn partial_payload(qid: u32, role: u8, occ: u64, positions: &[Pos]) -> Vec<u8> {
    let mut b = Vec::with_capacity(13 + 8 * positions.len());
    codec::put_u32(&mut b, qid);
    codec::put_u8(&mut b, role);
    codec::put_u64(&mut b, occ);
    for &p in positions {
        codec::put_u64(&mut b, p as u64);
    }
    b
}

fn decode_partial(payload: &[u8]) -> (u32, u8, u64, Vec<Pos>) {
    let mut r = Reader::new(payload);
    let qid = r.u32().expect("query id");
    let role = r.u8().expect("role");
    let occ = r.u64().expect("occurrence count");
    let rest = r.rest();
    let positions = rest
        .chunks_exact(8)
        .map(|ch| u64::from_le_bytes(ch.try_into().unwrap()) as Pos)
        .collect();
    (qid, role, occ, positions)
}

fn encode_label_entries(entries: &[(u32, Vec<u8>)]) -> Vec<u8> {
    let mut b = Vec::new();
    codec::put_u32(&mut b, entries.len() as u32);
    for (rank, s) in entries {
        codec::put_u32(&mut b, *rank);
        codec::put_u32(&mut b, s.len() as u32);
        b.extend_from_slice(s);
    }
    b
}

fn decode_label_entries(payload: &[u8]) -> Vec<(u32, Vec<u8>)> {
    let mut r = Reader::new(payload);
    let count = r.u32().expect("entry count") as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let rank = r.u32().expect("boundary rank");
        let len = r.u32().expect("string length") as usize;
        let mut s = vec![0u8; len];
        for byte in s.iter_mut() {
            *byte = r.u8().expect("string byte");
        }
        out.push((rank, s));
    }
    assert!(r.is_done(), "trailing bytes in label exchange payload");
    out
}

/// Per-PE state that only exists while the index is being built.
#[derive(Default)]
struct BuildScratch {
    skeleton: Option<crate::patricia::Skeleton>,
    streamed: Option<crate::patricia::StreamedDfuds>,
    requests: Vec<Pos>,
    labels: Vec<u8>,
    /// Indices into `requests` that need a remote fetch, in request order.
    remote: Vec<usize>,
    /// First unissued index into `remote`.
    cursor: usize,
    pending: Vec<(u64, usize)>,
    bset: Option<crate::global::BoundarySet>,
}

fn issue_label_batch(
    sc: &mut BuildScratch,
    fx: &mut Effects,
    text_starts: &[Pos],
    batch: Option<usize>,
) -> usize {
    let end = match batch {
        Some(s) => (sc.cursor + s).min(sc.remote.len()),
        None => sc.remote.len(),
    };
    for k in sc.cursor..end {
        let j = sc.remote[k];
        let pos = sc.requests[j];
        let id = fx.drma_fetch(owner_of(text_starts, pos), pos, 1);
        sc.pending.push((id, j));
    }
    let issued = end - sc.cursor;
    sc.cursor = end;
    issued
}

fn absorb_label_replies(sc: &mut BuildScratch, inbox: &[Message]) -> u64 {
    let mut ticks = 0;
    for msg in inbox {
        if msg.kind != MessageKind::DrmaReply {
            continue;
        }
        let (id, bytes) = parse_drma_reply(&msg.payload);
        let ix = sc
            .pending
            .iter()
            .position(|&(rid, _)| rid == id)
            .expect("label reply matches a pending fetch");
        let (_, j) = sc.pending.remove(ix);
        sc.labels[j] = bytes[0];
        ticks += 1;
    }
    ticks
}

/// Search state parked at a PE between the blind-search superstep and the
/// verification superstep.
struct SearchPending {
    qid: u32,
    kind: u8,
    role: u8,
    arrival: usize,
    pattern: Vec<u8>,
    req_id: u64,
    leaf_range: (usize, usize),
}

/// Aggregation state parked at the arrival PE of a count or enumerate
/// query until the partial results come back.
struct Pending {
    l: usize,
    r: usize,
    /// True when routing proved occurrences on every PE in `l..=r`.
    interval: bool,
    occ_l: Option<u64>,
    occ_r: Option<u64>,
    pos_l: Vec<Pos>,
    pos_r: Vec<Pos>,
    interior: Vec<Pos>,
    interior_expect: usize,
}

pub struct DptIndex {
    machine: Machine,
    backing: Backing,
    label_batch: Option<usize>,
    text_starts: Vec<Pos>,
    block_starts: Vec<usize>,
    block_lens: Vec<usize>,
    build_supersteps: usize,
    build_label_rounds: usize,
}

impl DptIndex {
    /// Distributes `text` over `cfg.c` PEs and builds both index levels on
    /// the machine. Superstep schedule: one scan superstep that also issues
    /// the first label batch, further label rounds until every remote edge
    /// character has arrived, one finalize superstep that assembles the
    /// local tries and broadcasts boundary descriptors, and three supersteps
    /// that exchange boundary strings and replicate the routing trie.
    pub fn build(text: &Text, cfg: &DptConfig) -> Result<DptIndex, DptError> {
        assert!(
            cfg.label_batch.map_or(true, |s| s >= 1),
            "label batch must be at least 1"
        );
        let mut machine = Machine::distribute(text, cfg.c, cfg.pmax, cfg.g, cfg.l)?;
        let c = machine.pe_count();
        let n1 = machine.n_with_sentinel();
        let pmax = machine.pmax();
        let text_starts: Vec<Pos> = machine.pes().iter().map(|p| p.text_start).collect();
        let block_starts: Vec<usize> = machine.pes().iter().map(|p| p.block_start).collect();
        let block_lens: Vec<usize> = machine.pes().iter().map(|p| p.block_len()).collect();

        let mut scratch: Vec<BuildScratch> = (0..c).map(|_| BuildScratch::default()).collect();
        let mut fail: Option<PatriciaError> = None;

        // Scan superstep: fold each block into a trie skeleton, resolve the
        // label characters already inside the local padded slice, and issue
        // the first batch of remote fetches.
        machine.run_superstep(|ctx| {
            let pe = &mut *ctx.pe;
            let sc = &mut scratch[pe.pe_id];
            let meta = BlockMeta {
                pe_id: pe.pe_id,
                block_start: pe.block_start,
                block_len: pe.block_len(),
            };
            let requests: Vec<Pos> = if cfg.backing == Backing::Dfuds {
                match build_skeleton_streaming_dfuds(meta, &pe.sa_block, &pe.lcp_block, n1) {
                    Ok(st) => {
                        let r = st.requests().to_vec();
                        sc.streamed = Some(st);
                        r
                    }
                    Err(e) => {
                        fail.get_or_insert(e);
                        return 0;
                    }
                }
            } else {
                match build_skeleton(meta, &pe.sa_block, &pe.lcp_block, n1) {
                    Ok(sk) => {
                        let r = sk.requests().to_vec();
                        sc.skeleton = Some(sk);
                        r
                    }
                    Err(e) => {
                        fail.get_or_insert(e);
                        return 0;
                    }
                }
            };
            sc.labels = vec![SENTINEL; requests.len()];
            for (j, &pos) in requests.iter().enumerate() {
                match pe.read_slice(pos, 1) {
                    Some(b) => sc.labels[j] = b[0],
                    None => sc.remote.push(j),
                }
            }
            sc.requests = requests;
            let issued = issue_label_batch(sc, ctx.fx, &text_starts, cfg.label_batch);
            (2 * pe.block_len() + sc.labels.len() + issued) as u64
        })?;
        if let Some(e) = fail {
            return Err(DptError::Patricia(e));
        }

        // Label rounds: absorb last round's replies, issue the next batch.
        // The final round's replies are absorbed by the finalize superstep.
        let mut label_rounds = 1;
        while scratch.iter().any(|sc| sc.cursor < sc.remote.len()) {
            label_rounds += 1;
            machine.run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let sc = &mut scratch[pe.pe_id];
                let mut ticks = absorb_label_replies(sc, &pe.inbox);
                ticks += issue_label_batch(sc, ctx.fx, &text_starts, cfg.label_batch) as u64;
                ticks
            })?;
        }

        // Finalize: assemble the per-block trie and broadcast this block's
        // boundary descriptor (min/max position, seam and cover LCPs).
        machine.run_superstep(|ctx| {
            let pe = &mut *ctx.pe;
            let sc = &mut scratch[pe.pe_id];
            let mut ticks = absorb_label_replies(sc, &pe.inbox);
            debug_assert!(sc.pending.is_empty() && sc.cursor == sc.remote.len());
            let trie = if let Some(st) = sc.streamed.take() {
                st.into_trie(&sc.labels)
            } else {
                sc.skeleton.take().expect("skeleton built").into_trie(&sc.labels, cfg.backing)
            };
            assert_eq!(trie.leaf_count(), pe.block_len(), "one leaf per block suffix");
            ticks += trie.node_count() as u64;
            pe.trie = Some(trie);

            let m = pe.block_len();
            let min = pe.sa_block[0];
            let max = pe.sa_block[m - 1];
            let seam = if pe.pe_id == 0 { 0 } else { pe.lcp_block[0] };
            let cover = if m == 1 {
                n1 + 1 - min
            } else {
                pe.lcp_block[1..].iter().copied().min().unwrap()
            };
            let mut payload = Vec::with_capacity(32);
            codec::put_u64(&mut payload, min as u64);
            codec::put_u64(&mut payload, max as u64);
            codec::put_u64(&mut payload, seam as u64);
            codec::put_u64(&mut payload, cover as u64);
            for dst in 0..ctx.pe_count {
                ctx.fx.send(dst, MessageKind::BoundaryBroadcast, payload.clone());
            }
            ticks + (m + ctx.pe_count) as u64
        })?;

        // Exchange phase one: every PE now holds all 2c boundary
        // descriptors; each PE reads the truncated strings it owns text for
        // and hands string k to distributor PE k mod c.
        machine.run_superstep(|ctx| {
            let pe = &mut *ctx.pe;
            let sc = &mut scratch[pe.pe_id];
            let mut positions = Vec::with_capacity(2 * c);
            let mut lcps = Vec::with_capacity(2 * c);
            for msg in &pe.inbox {
                if msg.kind != MessageKind::BoundaryBroadcast {
                    continue;
                }
                let mut r = Reader::new(&msg.payload);
                positions.push(r.u64().expect("min position") as Pos);
                let max = r.u64().expect("max position") as Pos;
                lcps.push(r.u64().expect("seam lcp") as usize);
                positions.push(max);
                lcps.push(r.u64().expect("cover lcp") as usize);
            }
            assert_eq!(positions.len(), 2 * c, "one descriptor per PE");
            let bs = crate::global::BoundarySet {
                c,
                n_with_sentinel: n1,
                positions,
                lcps,
            };

            let mut per_dst: Vec<Vec<(u32, Vec<u8>)>> = vec![Vec::new(); c];
            let mut ticks = (2 * c) as u64;
            for k in 0..2 * c {
                let pos = bs.positions[k];
                if owner_of(&text_starts, pos) != pe.pe_id {
                    continue;
                }
                let trunc = bs.trunc_len(k, pmax);
                let s = pe
                    .read_slice(pos, trunc)
                    .expect("padded slice covers truncated boundary strings")
                    .to_vec();
                ticks += trunc as u64;
                per_dst[k % c].push((k as u32, s));
            }
            for (dst, entries) in per_dst.into_iter().enumerate() {
                if !entries.is_empty() {
                    ctx.fx
                        .send(dst, MessageKind::LabelExchange, encode_label_entries(&entries));
                }
            }
            sc.bset = Some(bs);
            ticks
        })?;

        // Exchange phase two: each distributor rebroadcasts its share so
        // every PE ends up with all 2c truncated boundary strings.
        machine.run_superstep(|ctx| {
            let pe = &mut *ctx.pe;
            let mut mine: Vec<(u32, Vec<u8>)> = Vec::new();
            for msg in &pe.inbox {
                if msg.kind == MessageKind::LabelExchange {
                    mine.extend(decode_label_entries(&msg.payload));
                }
            }
            mine.sort_by_key(|e| e.0);
            let ticks = 1 + mine.iter().map(|e| e.1.len() as u64).sum::<u64>();
            if !mine.is_empty() {
                let payload = encode_label_entries(&mine);
                for dst in 0..ctx.pe_count {
                    ctx.fx.send(dst, MessageKind::LabelExchange, payload.clone());
                }
            }
            ticks
        })?;

        // Assembly superstep: build the routing trie locally on every PE.
        machine.run_superstep(|ctx| {
            let pe = &mut *ctx.pe;
            let sc = &mut scratch[pe.pe_id];
            let bs = sc.bset.take().expect("boundary set assembled");
            let mut table: Vec<Option<Vec<u8>>> = vec![None; 2 * c];
            for msg in &pe.inbox {
                if msg.kind != MessageKind::LabelExchange {
                    continue;
                }
                for (k, s) in decode_label_entries(&msg.payload) {
                    table[k as usize] = Some(s);
                }
            }
            let strings: Vec<Vec<u8>> = table
                .into_iter()
                .map(|o| o.expect("every boundary string delivered"))
                .collect();
            let mut ticks = strings.iter().map(|s| s.len() as u64).sum::<u64>();
            let gt = GlobalTrie::build(&bs, pmax, |pos, len| {
                let k = bs
                    .positions
                    .iter()
                    .position(|&q| q == pos)
                    .expect("fetch targets a boundary position");
                assert_eq!(strings[k].len(), len, "one truncation per position");
                strings[k].clone()
            });
            ticks += (gt.node_count() + gt.label_bytes()) as u64;
            pe.global_trie = Some(gt);
            ticks
        })?;

        // The routing trie is replicated state; every copy must be
        // bit-identical or later routing would depend on the arrival PE.
        let mut reference = Vec::new();
        machine.pe(0).global_trie.as_ref().unwrap().serialize(&mut reference);
        for i in 1..c {
            let mut b = Vec::new();
            machine.pe(i).global_trie.as_ref().unwrap().serialize(&mut b);
            assert!(b == reference, "routing trie replica diverged on PE {i}");
        }

        let build_supersteps = machine.superstep_index();
        Ok(DptIndex {
            machine,
            backing: cfg.backing,
            label_batch: cfg.label_batch,
            text_starts,
            block_starts,
            block_lens,
            build_supersteps,
            build_label_rounds: label_rounds,
        })
    }

    /// Wraps an already-populated machine (every PE holding its trie and
    /// routing-trie replica) back into an index, as the loader needs.
    pub(crate) fn from_parts(
        machine: Machine,
        backing: Backing,
        label_batch: Option<usize>,
        build_supersteps: usize,
        build_label_rounds: usize,
    ) -> DptIndex {
        let text_starts = machine.pes().iter().map(|p| p.text_start).collect();
        let block_starts = machine.pes().iter().map(|p| p.block_start).collect();
        let block_lens = machine.pes().iter().map(|p| p.block_len()).collect();
        DptIndex {
            machine,
            backing,
            label_batch,
            text_starts,
            block_starts,
            block_lens,
            build_supersteps,
            build_label_rounds,
        }
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn backing(&self) -> Backing {
        self.backing
    }

    pub fn label_batch(&self) -> Option<usize> {
        self.label_batch
    }

    pub fn pe_count(&self) -> usize {
        self.machine.pe_count()
    }

    pub fn pmax(&self) -> usize {
        self.machine.pmax()
    }

    pub fn n_with_sentinel(&self) -> usize {
        self.machine.n_with_sentinel()
    }

    pub fn block_lens(&self) -> &[usize] {
        &self.block_lens
    }

    pub fn build_supersteps(&self) -> usize {
        self.build_supersteps
    }

    pub fn build_label_rounds(&self) -> usize {
        self.build_label_rounds
    }

    pub fn trie(&self, pe: usize) -> &PatriciaTrie {
        self.machine.pe(pe).trie.as_ref().expect("index built")
    }

    pub fn global_trie(&self) -> &GlobalTrie {
        self.machine.pe(0).global_trie.as_ref().expect("index built")
    }

    pub fn query(&mut self, q: Query) -> QueryResult {
        self.run_batch(std::slice::from_ref(&q)).results.pop().unwrap()
    }

    pub fn query_exists(&mut self, pattern: &[u8], arrival_pe: usize) -> QueryResult {
        self.query(Query {
            kind: QueryKind::Exists,
            pattern: pattern.to_vec(),
            arrival_pe,
        })
    }

    pub fn query_count(&mut self, pattern: &[u8], arrival_pe: usize) -> QueryResult {
        self.query(Query {
            kind: QueryKind::Count,
            pattern: pattern.to_vec(),
            arrival_pe,
        })
    }

    pub fn query_enumerate(&mut self, pattern: &[u8], arrival_pe: usize) -> QueryResult {
        self.query(Query {
            kind: QueryKind::Enumerate,
            pattern: pattern.to_vec(),
            arrival_pe,
        })
    }

    /// Runs a batch of queries in lockstep. Supersteps: (1) route at each
    /// arrival PE and forward unresolved queries, (2) blind-search at the
    /// target PEs and fetch verification witnesses, (3) verify and send
    /// partial results, with the arrival PEs of interval enumerations
    /// fetching interior SA blocks one-sidedly, (4) aggregate. Phases that
    /// no live query needs are skipped, so an all-absent batch costs one
    /// superstep. Failures of individual queries never abort the batch.
    pub fn run_batch(&mut self, queries: &[Query]) -> BatchOutcome {
        let c = self.machine.pe_count();
        let pmax = self.machine.pmax();
        for q in queries {
            assert!(q.arrival_pe < c, "arrival PE {} out of range", q.arrival_pe);
        }
        assert!(queries.len() <= u32::MAX as usize, "batch too large");
        if queries.is_empty() {
            return BatchOutcome {
                results: Vec::new(),
                received_histogram: vec![0; c],
                supersteps: 0,
            };
        }
        let rows_before = self.machine.ledger.rows.len();

        let text_starts = &self.text_starts;
        let block_starts = &self.block_starts;
        let block_lens = &self.block_lens;
        let machine = &mut self.machine;

        let mut results: Vec<Option<(Result<QueryValue, QueryError>, usize)>> =
            vec![None; queries.len()];
        let mut words: Vec<u64> = vec![0; queries.len()];
        let mut pendings: Vec<Option<Pending>> = (0..queries.len()).map(|_| None).collect();
        let mut searches: Vec<Vec<SearchPending>> = (0..c).map(|_| Vec::new()).collect();
        let mut sa_waits: Vec<Vec<(u64, u32)>> = (0..c).map(|_| Vec::new()).collect();
        let mut histogram: Vec<u64> = vec![0; c];
        let mut qids_by_pe: Vec<Vec<u32>> = (0..c).map(|_| Vec::new()).collect();
        for (qid, q) in queries.iter().enumerate() {
            qids_by_pe[q.arrival_pe].push(qid as u32);
        }

        // Superstep 1: route every query at its arrival PE. Routing alone
        // settles errors, proven absences, and interval existence.
        machine
            .run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let gt = pe.global_trie.as_ref().expect("index built");
                let mut ticks = 0;
                for &qid in &qids_by_pe[pe.pe_id] {
                    let q = &queries[qid as usize];
                    let p = &q.pattern;
                    ticks += p.len() as u64 + 1;
                    if p.is_empty() {
                        results[qid as usize] = Some((Err(QueryError::EmptyPattern), 1));
                        continue;
                    }
                    if p.len() > pmax {
                        results[qid as usize] =
                            Some((Err(QueryError::PatternTooLong { len: p.len(), pmax }), 1));
                        continue;
                    }
                    if p.contains(&SENTINEL) {
                        results[qid as usize] = Some((Err(QueryError::SentinelInPattern), 1));
                        continue;
                    }
                    let route = gt.route(p).expect("guards cover routing errors");
                    let (l, r, interval) = match route {
                        RoutingResult::Absent => {
                            let v = match q.kind {
                                QueryKind::Exists => QueryValue::Exists(false),
                                QueryKind::Count => QueryValue::Count(0),
                                QueryKind::Enumerate => QueryValue::Enumerate(Vec::new()),
                            };
                            results[qid as usize] = Some((Ok(v), 1));
                            continue;
                        }
                        RoutingResult::Interval { l, r } => {
                            if l < r && q.kind == QueryKind::Exists {
                                results[qid as usize] = Some((Ok(QueryValue::Exists(true)), 1));
                                continue;
                            }
                            (l, r, true)
                        }
                        RoutingResult::Candidate { pe } => (pe, pe, false),
                    };
                    let targets: &[(usize, u8)] = match q.kind {
                        QueryKind::Exists => &[(l, ROLE_SINGLE)],
                        _ => &[(l, ROLE_LEFT), (r, ROLE_RIGHT)],
                    };
                    for &(dst, role) in targets {
                        let payload = forward_payload(qid, kind_tag(q.kind), role, pe.pe_id, p);
                        if dst != pe.pe_id {
                            words[qid as usize] += words_for(payload.len());
                        }
                        ctx.fx.send(dst, MessageKind::QueryForward, payload);
                    }
                    if q.kind != QueryKind::Exists {
                        pendings[qid as usize] = Some(Pending {
                            l,
                            r,
                            interval,
                            occ_l: None,
                            occ_r: None,
                            pos_l: Vec::new(),
                            pos_r: Vec::new(),
                            interior: Vec::new(),
                            interior_expect: 0,
                        });
                    }
                }
                ticks
            })
            .expect("routing superstep");

        let live = |results: &[Option<(Result<QueryValue, QueryError>, usize)>]| {
            results.iter().any(|r| r.is_none())
        };
        if !live(&results) {
            return finish(queries, results, words, histogram, machine, rows_before);
        }

        // Superstep 2: blind-search forwarded queries on the local tries
        // and fetch one witness occurrence per match for verification.
        machine
            .run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let mut ticks = 0;
                for msg in &pe.inbox {
                    if msg.kind != MessageKind::QueryForward {
                        continue;
                    }
                    histogram[pe.pe_id] += 1;
                    let (qid, kind, role, arrival, pattern) = decode_forward(&msg.payload);
                    let trie = pe.trie.as_ref().expect("index built");
                    let found = trie.blind_search(pattern, &pe.sa_block);
                    ticks += found.steps + pattern.len() as u64;
                    match found.outcome {
                        BlindOutcome::NoEdge => {
                            if kind == K_EXISTS {
                                results[qid as usize] = Some((Ok(QueryValue::Exists(false)), 2));
                            } else {
                                searches[pe.pe_id].push(SearchPending {
                                    qid,
                                    kind,
                                    role,
                                    arrival,
                                    pattern: pattern.to_vec(),
                                    req_id: NO_FETCH,
                                    leaf_range: (0, 0),
                                });
                            }
                        }
                        BlindOutcome::Matched => {
                            let w = found.witness.expect("matched search has a witness");
                            let owner = owner_of(text_starts, w);
                            let req_id = ctx.fx.drma_fetch(owner, w, pattern.len());
                            if owner != pe.pe_id {
                                words[qid as usize] += 2 + words_for(8 + pattern.len());
                            }
                            searches[pe.pe_id].push(SearchPending {
                                qid,
                                kind,
                                role,
                                arrival,
                                pattern: pattern.to_vec(),
                                req_id,
                                leaf_range: found.leaf_range.expect("matched search has a range"),
                            });
                        }
                    }
                }
                ticks
            })
            .expect("search superstep");

        // Superstep 3 runs when a verification or a partial result is still
        // owed, or an interval enumeration needs interior SA blocks.
        let need3 = searches
            .iter()
            .any(|v| v.iter().any(|s| !(s.kind == K_EXISTS && s.req_id == NO_FETCH)))
            || pendings.iter().enumerate().any(|(qid, p)| {
                results[qid].is_none()
                    && p.as_ref().is_some_and(|p| {
                        queries[qid].kind == QueryKind::Enumerate && p.interval && p.l + 1 < p.r
                    })
            });
        if !need3 {
            return finish(queries, results, words, histogram, machine, rows_before);
        }

        machine
            .run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let mut ticks = 0;
                let replies: Vec<(u64, &[u8])> = pe
                    .inbox
                    .iter()
                    .filter(|m| m.kind == MessageKind::DrmaReply)
                    .map(|m| parse_drma_reply(&m.payload))
                    .collect();
                for sp in searches[pe.pe_id].drain(..) {
                    let occ = if sp.req_id == NO_FETCH {
                        0
                    } else {
                        let (_, fetched) = replies
                            .iter()
                            .find(|&&(id, _)| id == sp.req_id)
                            .expect("witness reply arrived");
                        ticks += sp.pattern.len() as u64;
                        if verify_occurrence(&sp.pattern, fetched) {
                            (sp.leaf_range.1 - sp.leaf_range.0 + 1) as u64
                        } else {
                            0
                        }
                    };
                    match sp.kind {
                        K_EXISTS => {
                            results[sp.qid as usize] = Some((Ok(QueryValue::Exists(occ > 0)), 3));
                        }
                        K_COUNT => {
                            let payload = partial_payload(sp.qid, sp.role, occ, &[]);
                            if sp.arrival != pe.pe_id {
                                words[sp.qid as usize] += words_for(payload.len());
                            }
                            ctx.fx.send(sp.arrival, MessageKind::PartialResult, payload);
                        }
                        _ => {
                            let positions: &[Pos] = if occ > 0 {
                                &pe.sa_block[sp.leaf_range.0..=sp.leaf_range.1]
                            } else {
                                &[]
                            };
                            ticks += positions.len() as u64;
                            let payload = partial_payload(sp.qid, sp.role, occ, positions);
                            if sp.arrival != pe.pe_id {
                                words[sp.qid as usize] += words_for(payload.len());
                            }
                            ctx.fx.send(sp.arrival, MessageKind::PartialResult, payload);
                        }
                    }
                }
                // Interval enumerations: every suffix of a strictly interior
                // block matches, so pull those SA blocks whole.
                for &qid in &qids_by_pe[pe.pe_id] {
                    if results[qid as usize].is_some()
                        || queries[qid as usize].kind != QueryKind::Enumerate
                    {
                        continue;
                    }
                    let Some(p) = pendings[qid as usize].as_mut() else {
                        continue;
                    };
                    if p.interval && p.l + 1 < p.r {
                        for mid in p.l + 1..p.r {
                            let req = ctx.fx.drma_fetch_sa(mid, block_starts[mid], block_lens[mid]);
                            sa_waits[pe.pe_id].push((req, qid));
                            p.interior_expect += 1;
                            if mid != pe.pe_id {
                                words[qid as usize] += 2 + words_for(8 + 8 * block_lens[mid]);
                            }
                            ticks += 1;
                        }
                    }
                }
                ticks
            })
            .expect("verification superstep");

        let need4 = pendings
            .iter()
            .enumerate()
            .any(|(qid, p)| p.is_some() && results[qid].is_none());
        if !need4 {
            return finish(queries, results, words, histogram, machine, rows_before);
        }

        // Superstep 4: arrival PEs fold partial results and interior SA
        // blocks into final counts and position lists.
        machine
            .run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let mut ticks = 0;
                for msg in &pe.inbox {
                    match msg.kind {
                        MessageKind::PartialResult => {
                            let (qid, role, occ, positions) = decode_partial(&msg.payload);
                            let p = pendings[qid as usize].as_mut().expect("pending query");
                            if role == ROLE_LEFT {
                                p.occ_l = Some(occ);
                                p.pos_l = positions;
                            } else {
                                p.occ_r = Some(occ);
                                p.pos_r = positions;
                            }
                            ticks += 1;
                        }
                        MessageKind::DrmaReply => {
                            let (id, positions) = parse_drma_reply_positions(&msg.payload);
                            let ix = sa_waits[pe.pe_id]
                                .iter()
                                .position(|&(rid, _)| rid == id)
                                .expect("SA reply matches a pending fetch");
                            let (_, qid) = sa_waits[pe.pe_id].remove(ix);
                            let p = pendings[qid as usize].as_mut().expect("pending query");
                            ticks += positions.len() as u64;
                            p.interior.extend(positions);
                            p.interior_expect -= 1;
                        }
                        _ => {}
                    }
                }
                for &qid in &qids_by_pe[pe.pe_id] {
                    if results[qid as usize].is_some() {
                        continue;
                    }
                    let Some(p) = pendings[qid as usize].take() else {
                        continue;
                    };
                    let occ_l = p.occ_l.expect("left partial arrived");
                    let dedup = p.l == p.r;
                    match queries[qid as usize].kind {
                        QueryKind::Count => {
                            let interior: u64 = if p.interval && p.l + 1 < p.r {
                                block_lens[p.l + 1..p.r].iter().map(|&m| m as u64).sum()
                            } else {
                                0
                            };
                            let right = if dedup { 0 } else { p.occ_r.expect("right partial") };
                            results[qid as usize] =
                                Some((Ok(QueryValue::Count(occ_l + right + interior)), 4));
                            ticks += 1;
                        }
                        QueryKind::Enumerate => {
                            assert_eq!(p.interior_expect, 0, "interior fetches all answered");
                            let mut out = p.pos_l;
                            if !dedup {
                                out.extend(p.pos_r);
                            }
                            out.extend(p.interior);
                            out.sort_unstable();
                            ticks += out.len() as u64;
                            results[qid as usize] = Some((Ok(QueryValue::Enumerate(out)), 4));
                        }
                        QueryKind::Exists => unreachable!("existence settles at the searcher"),
                    }
                }
                ticks
            })
            .expect("aggregation superstep");

        finish(queries, results, words, histogram, machine, rows_before)
    }
}

fn finish(
    queries: &[Query],
    mut results: Vec<Option<(Result<QueryValue, QueryError>, usize)>>,
    words: Vec<u64>,
    histogram: Vec<u64>,
    machine: &Machine,
    rows_before: usize,
) -> BatchOutcome {
    let out = (0..queries.len())
        .map(|i| {
            let (value, supersteps) = results[i].take().expect("every query resolved");
            QueryResult {
                value,
                supersteps,
                words: words[i],
            }
        })
        .collect();
    BatchOutcome {
        results: out,
        received_histogram: histogram,
        supersteps: machine.ledger.rows.len() - rows_before,
    }
}
