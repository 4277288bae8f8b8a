//! Distributed suffix-array baseline: the same block distribution as the
//! trie index, but counting queries answered by two distributed binary
//! searches (lower and upper bound of the pattern over the global SA).
//!
//! Each probe is shipped to the PE owning the probed rank. That PE
//! compares the pattern against the pruned prefix it stores beside the SA
//! entry (the first `prune_len` suffix characters) and only fetches the
//! remainder of the suffix remotely when the prefix cannot decide the
//! comparison. Probes are sequential by nature, so a query costs a number
//! of supersteps proportional to the logarithm of the searched range;
//! that gap against the constant-superstep trie protocols is the point of
//! the baseline.

use crate::codec::{self, Reader};
use crate::sim::{parse_drma_reply, Machine, MessageKind, SimError};
use crate::text::{Pos, Text, SENTINEL};

/// Comparison verdict for one suffix against the pattern, with the
/// pattern treated as a prefix query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Less,
    PrefixMatch,
    Greater,
}

impl Cmp {
    fn tag(self) -> u8 {
        match self {
            Cmp::Less => 0,
            Cmp::PrefixMatch => 1,
            Cmp::Greater => 2,
        }
    }

    fn from_tag(t: u8) -> Cmp {
        match t {
            0 => Cmp::Less,
            1 => Cmp::PrefixMatch,
            2 => Cmp::Greater,
            _ => panic!("bad verdict tag {t}"),
        }
    }
}

/// Communication a single counting query caused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FetchStats {
    /// Suffix characters fetched across PE boundaries because a pruned
    /// prefix could not decide a comparison.
    pub remote_chars: u64,
    /// Supersteps the query occupied the machine for.
    pub supersteps: usize,
    /// Suffix comparisons issued across both binary searches.
    pub probes: u64,
}

/// Partition-point search over global ranks; `Blocks` narrows to the
/// owning block via boundary suffixes, `Within` finishes inside it.
enum Phase {
    Blocks { lo: usize, hi: usize },
    Within { lo: usize, hi: usize },
    Done { rank: usize },
}

struct SearchState {
    phase: Phase,
    outstanding: bool,
    /// Upper bound keeps prefix matches on the left of the partition.
    is_upper: bool,
}

impl SearchState {
    fn goes_right(&self, v: Cmp) -> bool {
        if self.is_upper {
            v != Cmp::Greater
        } else {
            v == Cmp::Less
        }
    }
}

/// Comparison parked at a rank owner while the suffix remainder is in
/// flight.
struct ParkedCompare {
    search_id: u8,
    req_id: u64,
    searcher: usize,
    tail: Vec<u8>,
}

pub struct DsaIndex {
    machine: Machine,
    prune_len: usize,
    /// Per PE, `block_len * prune_len` bytes: the sentinel-padded first
    /// `prune_len` characters of every local SA entry's suffix.
    stores: Vec<Vec<u8>>,
    text_starts: Vec<Pos>,
    block_starts: Vec<usize>,
    block_lens: Vec<usize>,
    build_supersteps: usize,
}

fn owner_of(text_starts: &[Pos], pos: Pos) -> usize {
    debug_assert!(pos >= text_starts[0]);
    text_starts.partition_point(|&s| s <= pos) - 1
}

/// Compares `p` against a pruned prefix. `None` means the prefix was
/// consumed with everything equal and the pattern still has characters
/// left, so the comparison is undecided.
fn compare_pruned(entry: &[u8], p: &[u8]) -> Option<Cmp> {
    let k = entry.len().min(p.len());
    for t in 0..k {
        if entry[t] < p[t] {
            return Some(Cmp::Less);
        }
        if entry[t] > p[t] {
            return Some(Cmp::Greater);
        }
    }
    if p.len() <= entry.len() {
        Some(Cmp::PrefixMatch)
    } else {
        None
    }
}

fn compare_tail(fetched: &[u8], tail: &[u8]) -> Cmp {
    debug_assert_eq!(fetched.len(), tail.len());
    for t in 0..tail.len() {
        if fetched[t] < tail[t] {
            return Cmp::Less;
        }
        if fetched[t] > tail[t] {
            return Cmp::Greater;
        }
    }
    Cmp::PrefixMatch
}

impl DsaIndex {
    /// Distributes the text like the trie index does and fills the pruned
    /// store in one bulk exchange: every PE fetches the first `prune_len`
    /// characters of each of its suffixes, remotely where the text lives
    /// elsewhere. `prune_len = 0` disables the store entirely.
    pub fn build(
        text: &Text,
        c: usize,
        prune_len: usize,
        g: u64,
        l: u64,
    ) -> Result<DsaIndex, SimError> {
        let padding = 30.max(prune_len);
        let mut machine = Machine::distribute(text, c, padding, g, l)?;
        let c = machine.pe_count();
        let text_starts: Vec<Pos> = machine.pes().iter().map(|p| p.text_start).collect();
        let block_starts: Vec<usize> = machine.pes().iter().map(|p| p.block_start).collect();
        let block_lens: Vec<usize> = machine.pes().iter().map(|p| p.block_len()).collect();

        let mut stores: Vec<Vec<u8>> = (0..c)
            .map(|i| vec![SENTINEL; block_lens[i] * prune_len])
            .collect();
        if prune_len > 0 {
            let mut pending: Vec<Vec<(u64, usize)>> = (0..c).map(|_| Vec::new()).collect();
            machine.run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let store = &mut stores[pe.pe_id];
                let mut ticks = 0;
                for j in 0..pe.block_len() {
                    let q = pe.sa_block[j];
                    match pe.read_slice(q, prune_len) {
                        Some(bytes) => {
                            store[j * prune_len..(j + 1) * prune_len].copy_from_slice(bytes);
                            ticks += prune_len as u64;
                        }
                        None => {
                            let id = ctx.fx.drma_fetch(owner_of(&text_starts, q), q, prune_len);
                            pending[pe.pe_id].push((id, j));
                        }
                    }
                }
                ticks
            })?;
            machine.run_superstep(|ctx| {
                let pe = &mut *ctx.pe;
                let store = &mut stores[pe.pe_id];
                let mut ticks = 0;
                for msg in &pe.inbox {
                    if msg.kind != MessageKind::DrmaReply {
                        continue;
                    }
                    let (id, bytes) = parse_drma_reply(&msg.payload);
                    let ix = pending[pe.pe_id]
                        .iter()
                        .position(|&(rid, _)| rid == id)
                        .expect("store reply matches a pending fetch");
                    let (_, j) = pending[pe.pe_id].remove(ix);
                    store[j * prune_len..(j + 1) * prune_len].copy_from_slice(bytes);
                    ticks += prune_len as u64;
                }
                ticks
            })?;
        }

        let build_supersteps = machine.superstep_index();
        Ok(DsaIndex {
            machine,
            prune_len,
            stores,
            text_starts,
            block_starts,
            block_lens,
            build_supersteps,
        })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn prune_len(&self) -> usize {
        self.prune_len
    }

    pub fn pe_count(&self) -> usize {
        self.machine.pe_count()
    }

    pub fn build_supersteps(&self) -> usize {
        self.build_supersteps
    }

    /// Pruned prefix stored for local SA entry `j` of PE `pe`.
    pub fn pruned_entry(&self, pe: usize, j: usize) -> &[u8] {
        &self.stores[pe][j * self.prune_len..(j + 1) * self.prune_len]
    }

    /// Counts occurrences of `p` by interleaved lower/upper-bound binary
    /// searches driven from `arrival_pe`. Probes first narrow over block
    /// boundary suffixes, then within the owning block; every probe is
    /// decided at the rank owner against its pruned prefix, with a remote
    /// remainder fetch only when the prefix ties.
    pub fn count(&mut self, p: &[u8], arrival_pe: usize) -> (u64, FetchStats) {
        assert!(!p.is_empty(), "pattern must be nonempty");
        assert!(
            p.len() <= self.machine.pmax(),
            "pattern exceeds the machine's padding reach"
        );
        let c = self.machine.pe_count();
        assert!(arrival_pe < c, "arrival PE out of range");
        let n1 = self.machine.n_with_sentinel();
        let prune_len = self.prune_len;
        let rows_before = self.machine.ledger.rows.len();

        let text_starts = &self.text_starts;
        let block_starts = &self.block_starts;
        let block_lens = &self.block_lens;
        let stores = &self.stores;
        let machine = &mut self.machine;

        let mut states = [
            SearchState { phase: Phase::Blocks { lo: 0, hi: c }, outstanding: false, is_upper: false },
            SearchState { phase: Phase::Blocks { lo: 0, hi: c }, outstanding: false, is_upper: true },
        ];
        let mut parked: Vec<Vec<ParkedCompare>> = (0..c).map(|_| Vec::new()).collect();
        let mut stats = FetchStats::default();

        let probe_rank = |st: &SearchState| -> Option<usize> {
            match st.phase {
                Phase::Blocks { lo, hi } => Some(block_starts[(lo + hi) / 2]),
                Phase::Within { lo, hi } => Some((lo + hi) / 2),
                Phase::Done { .. } => None,
            }
        };
        // Collapses empty ranges: an exhausted block search drops into the
        // candidate block, an exhausted within search fixes the rank.
        let settle = |st: &mut SearchState| loop {
            match st.phase {
                Phase::Blocks { lo, hi } if lo == hi => {
                    if lo == 0 {
                        st.phase = Phase::Done { rank: block_starts[0] };
                    } else {
                        st.phase = Phase::Within {
                            lo: block_starts[lo - 1],
                            hi: block_starts[lo - 1] + block_lens[lo - 1],
                        };
                    }
                }
                Phase::Within { lo, hi } if lo == hi => {
                    st.phase = Phase::Done { rank: lo };
                }
                _ => return,
            }
        };
        let apply = |st: &mut SearchState, v: Cmp| {
            let right = st.goes_right(v);
            match &mut st.phase {
                Phase::Blocks { lo, hi } | Phase::Within { lo, hi } => {
                    let mid = (*lo + *hi) / 2;
                    if right {
                        *lo = mid + 1;
                    } else {
                        *hi = mid;
                    }
                }
                Phase::Done { .. } => unreachable!("no verdicts after the search finished"),
            }
        };
        for st in &mut states {
            settle(st);
        }

        loop {
            let idle = states.iter().all(|s| matches!(s.phase, Phase::Done { .. }))
                && states.iter().all(|s| !s.outstanding)
                && parked.iter().all(|v| v.is_empty());
            if idle {
                break;
            }
            machine
                .run_superstep(|ctx| {
                    let pe = &mut *ctx.pe;
                    let mut ticks = 0;
                    // Finish comparisons whose suffix remainder arrived.
                    let replies: Vec<(u64, &[u8])> = pe
                        .inbox
                        .iter()
                        .filter(|m| m.kind == MessageKind::DrmaReply)
                        .map(|m| parse_drma_reply(&m.payload))
                        .collect();
                    for pc in parked[pe.pe_id].drain(..) {
                        let (_, fetched) = replies
                            .iter()
                            .find(|&&(id, _)| id == pc.req_id)
                            .expect("remainder reply arrived");
                        let v = compare_tail(fetched, &pc.tail);
                        ticks += pc.tail.len() as u64;
                        let mut payload = Vec::with_capacity(2);
                        codec::put_u8(&mut payload, pc.search_id);
                        codec::put_u8(&mut payload, v.tag());
                        ctx.fx.send(pc.searcher, MessageKind::PartialResult, payload);
                    }
                    // Decide fresh probes against the pruned store.
                    for msg in &pe.inbox {
                        if msg.kind != MessageKind::QueryForward {
                            continue;
                        }
                        let mut r = Reader::new(&msg.payload);
                        let search_id = r.u8().expect("search id");
                        let rank = r.u64().expect("probed rank") as usize;
                        let pattern = r.rest();
                        let j = rank - pe.block_start;
                        let q = pe.sa_block[j];
                        let entry = &stores[pe.pe_id][j * prune_len..(j + 1) * prune_len];
                        ticks += entry.len().min(pattern.len()) as u64 + 1;
                        match compare_pruned(entry, pattern) {
                            Some(v) => {
                                let mut payload = Vec::with_capacity(2);
                                codec::put_u8(&mut payload, search_id);
                                codec::put_u8(&mut payload, v.tag());
                                ctx.fx.send(msg.src, MessageKind::PartialResult, payload);
                            }
                            None => {
                                // Undecided ties never reach past the
                                // sentinel, so the remainder is real text.
                                let tail_at = q + prune_len;
                                debug_assert!(tail_at <= n1);
                                let len = pattern.len() - prune_len;
                                let owner = owner_of(text_starts, tail_at);
                                let req_id = ctx.fx.drma_fetch(owner, tail_at, len);
                                if owner != pe.pe_id {
                                    stats.remote_chars += len as u64;
                                }
                                parked[pe.pe_id].push(ParkedCompare {
                                    search_id,
                                    req_id,
                                    searcher: msg.src,
                                    tail: pattern[prune_len..].to_vec(),
                                });
                            }
                        }
                    }
                    // The searcher folds verdicts in and issues the next
                    // probe of each still-live search.
                    if pe.pe_id == arrival_pe {
                        for msg in &pe.inbox {
                            if msg.kind != MessageKind::PartialResult {
                                continue;
                            }
                            let mut r = Reader::new(&msg.payload);
                            let sid = r.u8().expect("search id") as usize;
                            let v = Cmp::from_tag(r.u8().expect("verdict"));
                            states[sid].outstanding = false;
                            apply(&mut states[sid], v);
                            settle(&mut states[sid]);
                            ticks += 1;
                        }
                        for (sid, st) in states.iter_mut().enumerate() {
                            if st.outstanding {
                                continue;
                            }
                            let Some(rank) = probe_rank(st) else { continue };
                            let owner = block_starts.partition_point(|&s| s <= rank) - 1;
                            let mut payload = Vec::with_capacity(9 + p.len());
                            codec::put_u8(&mut payload, sid as u8);
                            codec::put_u64(&mut payload, rank as u64);
                            payload.extend_from_slice(p);
                            ctx.fx.send(owner, MessageKind::QueryForward, payload);
                            st.outstanding = true;
                            stats.probes += 1;
                            ticks += 1;
                        }
                    }
                    ticks
                })
                .expect("distributed binary search superstep");
        }

        let lower = match states[0].phase {
            Phase::Done { rank } => rank,
            _ => unreachable!(),
        };
        let upper = match states[1].phase {
            Phase::Done { rank } => rank,
            _ => unreachable!(),
        };
        debug_assert!(lower <= upper);
        stats.supersteps = machine.ledger.rows.len() - rows_before;
        ((upper - lower) as u64, stats)
    }
}
