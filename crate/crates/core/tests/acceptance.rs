//! Acceptance suite. Each test checks one headline property end to end,
//! so the harness output reads as one pass/fail line per property. All
//! randomness is seeded; oracles are the naive scanning routines, which
//! share no code with the index.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpt_core::dsa::DsaIndex;
use dpt_core::patricia::{build_patricia, build_skeleton_streaming_dfuds, BlockMeta};
use dpt_core::report::{space_report, DEFAULT_POS_WIDTH};
use dpt_core::sim::ceil_sizes;
use dpt_core::succinct::{encode, PointerTree, SuccinctTree, TreeEncoding};
use dpt_core::text::{build_lcp_array, build_suffix_array, naive_occurrences, naive_suffix_array};
use dpt_core::{
    Backing, DptConfig, DptIndex, Query, QueryKind, QueryResult, QueryValue, RoutingResult, Text,
};

fn random_text(rng: &mut ChaCha8Rng, n: usize, sigma: u8) -> Vec<u8> {
    (0..n).map(|_| b'a' + rng.gen_range(0..sigma)).collect()
}

/// Present substrings, with a quarter mutated so many come out absent.
fn random_pattern(rng: &mut ChaCha8Rng, raw: &[u8], max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(1..=max_len.min(raw.len()));
    let start = rng.gen_range(0..=raw.len() - len);
    let mut p = raw[start..start + len].to_vec();
    if rng.gen_ratio(1, 4) {
        let i = rng.gen_range(0..p.len());
        p[i] = p[i].wrapping_add(rng.gen_range(1..=255)).max(1);
    }
    p
}

/// Mutated motif repeats: repetitive, eight-letter alphabet.
fn motif_corpus(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let motif: Vec<u8> = (0..41).map(|_| rng.gen_range(b'a'..=b'h')).collect();
    let mut out = Vec::with_capacity(len + motif.len());
    while out.len() < len {
        let mut m = motif.clone();
        for ch in &mut m {
            if rng.gen_ratio(1, 8) {
                *ch = rng.gen_range(b'a'..=b'h');
            }
        }
        out.extend_from_slice(&m);
    }
    out.truncate(len);
    out
}

fn expect_exists(r: &QueryResult) -> bool {
    match r.value.as_ref().expect("query succeeds") {
        QueryValue::Exists(b) => *b,
        v => panic!("expected exists, got {v:?}"),
    }
}

fn expect_count(r: &QueryResult) -> u64 {
    match r.value.as_ref().expect("query succeeds") {
        QueryValue::Count(n) => *n,
        v => panic!("expected count, got {v:?}"),
    }
}

fn expect_positions(r: &QueryResult) -> Vec<u64> {
    match r.value.as_ref().expect("query succeeds") {
        QueryValue::Enumerate(ps) => ps.iter().map(|&p| p as u64).collect(),
        v => panic!("expected enumeration, got {v:?}"),
    }
}

/// Occurrences of `p` per SA block, counted from the naive suffix array.
fn occ_per_block(text: &Text, p: &[u8], c: usize) -> Vec<usize> {
    let sa = naive_suffix_array(text);
    let sizes = ceil_sizes(text.len_with_sentinel(), c);
    let mut out = Vec::with_capacity(c);
    let mut rank = 0usize;
    for &len in &sizes {
        let occ = sa.as_slice()[rank..rank + len]
            .iter()
            .filter(|&&pos| text.suffix(pos).starts_with(p))
            .count();
        out.push(occ);
        rank += len;
    }
    out
}

#[test]
fn c01_exists_count_enumerate_match_the_naive_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0001);
    for _ in 0..200 {
        let n = rng.gen_range(2..=2000);
        let sigma = [2u8, 3, 4, 26][rng.gen_range(0..4)];
        let raw = random_text(&mut rng, n, sigma);
        let text = Text::from_raw(&raw).unwrap();
        let c = rng.gen_range(1..=8.min(n + 1));
        let backing = Backing::ALL[rng.gen_range(0..4)];
        let cfg = DptConfig { c, backing, ..DptConfig::new(c) };
        let mut ix = DptIndex::build(&text, &cfg).unwrap();
        for _ in 0..50 {
            let p = random_pattern(&mut rng, &raw, 12);
            let arrival = rng.gen_range(0..c);
            let truth = naive_occurrences(&text, &p);
            assert_eq!(expect_exists(&ix.query_exists(&p, arrival)), !truth.is_empty());
            assert_eq!(expect_count(&ix.query_count(&p, arrival)), truth.len() as u64);
            let got = expect_positions(&ix.query_enumerate(&p, arrival));
            let want: Vec<u64> = truth.iter().map(|&p| p as u64).collect();
            assert_eq!(got, want, "pattern {p:?} on n={n} c={c} {backing:?}");
        }
    }
    assert!(started.elapsed().as_secs() < 60, "took {:?}", started.elapsed());
}

#[test]
fn c02_supersteps_at_most_three_exists_four_count_enumerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0002);
    for _ in 0..60 {
        let n = rng.gen_range(2..=1500);
        let sigma = [2, 4, 26][rng.gen_range(0..3)];
        let raw = random_text(&mut rng, n, sigma);
        let text = Text::from_raw(&raw).unwrap();
        let c = rng.gen_range(1..=8.min(n + 1));
        let mut ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();

        let mut batch = Vec::new();
        for _ in 0..12 {
            let p = random_pattern(&mut rng, &raw, 10);
            let arrival = rng.gen_range(0..c);
            for (kind, bound) in [
                (QueryKind::Exists, 3),
                (QueryKind::Count, 4),
                (QueryKind::Enumerate, 4),
            ] {
                let before = ix.machine().ledger.rows.len();
                let r = ix.query(Query { kind, pattern: p.clone(), arrival_pe: arrival });
                let consumed = ix.machine().ledger.rows.len() - before;
                assert!(consumed <= bound, "{kind:?} used {consumed} supersteps");
                assert_eq!(r.supersteps, consumed, "result reports the ledger rows");
            }
            let kind = [QueryKind::Exists, QueryKind::Count, QueryKind::Enumerate]
                [rng.gen_range(0..3)];
            batch.push(Query { kind, pattern: p, arrival_pe: arrival });
        }
        let before = ix.machine().ledger.rows.len();
        let outcome = ix.run_batch(&batch);
        assert!(ix.machine().ledger.rows.len() - before <= 4, "whole mixed batch");
        assert_eq!(outcome.supersteps, ix.machine().ledger.rows.len() - before);
    }
}

#[test]
fn c03_words_per_query_bounded_by_4_pattern_len_plus_16() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0003);
    for n in [1_000usize, 10_000, 100_000] {
        let raw = random_text(&mut rng, n, 4);
        let text = Text::from_raw(&raw).unwrap();
        for c in [1usize, 2, 4, 8, 16] {
            let mut ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();
            for len in [1usize, 2, 3, 5, 8, 13, 21, 30] {
                for mutate in [false, true] {
                    let mut p = random_pattern(&mut rng, &raw, len.min(n));
                    while p.len() < len.min(n) {
                        p.push(b'a' + rng.gen_range(0..4));
                    }
                    if mutate {
                        let i = rng.gen_range(0..p.len());
                        p[i] = b'z';
                    }
                    let arrival = rng.gen_range(0..c);
                    let bound = (4 * p.len() + 16) as u64;
                    let e = ix.query_exists(&p, arrival);
                    assert!(e.words <= bound, "exists {} words, |P|={} c={c} n={n}", e.words, p.len());
                    let q = ix.query_count(&p, arrival);
                    assert!(q.words <= bound, "count {} words, |P|={} c={c} n={n}", q.words, p.len());
                }
            }
        }
    }
}

#[test]
fn c04_interval_endpoints_occupied_and_interior_blocks_saturated() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0004);
    let mut intervals_seen = 0usize;
    for _ in 0..150 {
        let n = rng.gen_range(6..=400);
        let sigma = [2, 2, 3][rng.gen_range(0..3)];
        let raw = random_text(&mut rng, n, sigma);
        let text = Text::from_raw(&raw).unwrap();
        let c = rng.gen_range(2..=6.min(n + 1));
        let ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();
        for _ in 0..30 {
            let p = random_pattern(&mut rng, &raw, 4);
            let (l, r) = match ix.global_trie().route(&p).unwrap() {
                RoutingResult::Interval { l, r } if l < r => (l, r),
                _ => continue,
            };
            intervals_seen += 1;
            let occ = occ_per_block(&text, &p, c);
            assert!(occ[l] >= 1, "left endpoint PE {l} empty for {p:?}");
            assert!(occ[r] >= 1, "right endpoint PE {r} empty for {p:?}");
            for (k, &o) in occ.iter().enumerate() {
                if k > l && k < r {
                    assert_eq!(o, ix.block_lens()[k], "interior PE {k} not saturated");
                } else if k < l || k > r {
                    assert_eq!(o, 0, "PE {k} outside the routed interval holds matches");
                }
            }
        }
    }
    assert!(intervals_seen >= 20, "only {intervals_seen} proper intervals exercised");
}

#[test]
fn c05_succinct_navigation_matches_pointer_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0005);
    for _ in 0..500 {
        let nodes = rng.gen_range(1..=300);
        let mut t = PointerTree::with_root();
        for _ in 1..nodes {
            let parent = rng.gen_range(0..t.node_count());
            t.add_child(parent);
        }
        for enc in [TreeEncoding::Louds, TreeEncoding::Dfuds, TreeEncoding::Bp] {
            let s: SuccinctTree = encode(&t, enc);
            let mut stack = vec![(PointerTree::ROOT, s.root())];
            while let Some((pid, pos)) = stack.pop() {
                let d = t.outdegree(pid);
                assert_eq!(s.outdegree(pos).unwrap(), d, "{enc:?}");
                assert_eq!(s.is_leaf(pos), t.is_leaf(pid), "{enc:?}");
                for i in 1..=d {
                    stack.push((t.child(pid, i).unwrap(), s.child(pos, i).unwrap()));
                }
            }
        }
    }
}

#[test]
fn c06_counting_totals_occ_ends_plus_interior_block_lengths() {
    // All-equal text: pattern "a" matches every non-sentinel suffix, so a
    // middle machine size leaves three fully interior PEs.
    let raw = vec![b'a'; 60];
    let text = Text::from_raw(&raw).unwrap();
    let mut ix = DptIndex::build(&text, &DptConfig::new(5)).unwrap();
    let (l, r) = match ix.global_trie().route(b"a").unwrap() {
        RoutingResult::Interval { l, r } => (l, r),
        other => panic!("expected an interval, got {other:?}"),
    };
    assert!(r - l >= 2, "needs at least one interior PE, got {l}..{r}");
    let occ = occ_per_block(&text, b"a", 5);
    let interior: usize = ix.block_lens()[l + 1..r].iter().sum();
    let total = occ[l] + occ[r] + interior;
    assert_eq!(expect_count(&ix.query_count(b"a", 3)), total as u64);
    assert_eq!(total, 60);

    // The same identity on every randomized proper interval.
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0006);
    for _ in 0..60 {
        let n = rng.gen_range(10..=300);
        let raw = random_text(&mut rng, n, 2);
        let text = Text::from_raw(&raw).unwrap();
        let c = rng.gen_range(3..=6.min(n + 1));
        let mut ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();
        for _ in 0..20 {
            let p = random_pattern(&mut rng, &raw, 3);
            if let RoutingResult::Interval { l, r } = ix.global_trie().route(&p).unwrap() {
                if l < r {
                    let occ = occ_per_block(&text, &p, c);
                    let interior: usize = ix.block_lens()[l + 1..r].iter().sum();
                    let want = (occ[l] + occ[r] + interior) as u64;
                    assert_eq!(expect_count(&ix.query_count(&p, 0)), want, "{p:?}");
                }
            }
        }
    }
}

#[test]
fn c07_baseline_agrees_but_pays_supersteps_and_fetches() {
    // Exact agreement with the trie index and the oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0007);
    for _ in 0..30 {
        let n = rng.gen_range(4..=1200);
        let sigma = [2, 3, 26][rng.gen_range(0..3)];
        let raw = random_text(&mut rng, n, sigma);
        let text = Text::from_raw(&raw).unwrap();
        let c = rng.gen_range(1..=6.min(n + 1));
        let prune = [0usize, 3, 5, 9][rng.gen_range(0..4)];
        let mut dsa = DsaIndex::build(&text, c, prune, 1, 1).unwrap();
        let mut ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();
        for _ in 0..15 {
            let p = random_pattern(&mut rng, &raw, 10);
            let arrival = rng.gen_range(0..c);
            let want = naive_occurrences(&text, &p).len() as u64;
            assert_eq!(dsa.count(&p, arrival).0, want);
            assert_eq!(expect_count(&ix.query_count(&p, arrival)), want);
        }
    }

    // Supersteps grow with lg n while the trie stays within four.
    let mut worst = Vec::new();
    for n in [128usize, 1 << 10, 1 << 13, 1 << 16] {
        let raw = random_text(&mut rng, n, 3);
        let text = Text::from_raw(&raw).unwrap();
        let mut dsa = DsaIndex::build(&text, 2, 5, 1, 1).unwrap();
        let mut w = 0usize;
        for _ in 0..8 {
            let p = random_pattern(&mut rng, &raw, 6);
            let (_, stats) = dsa.count(&p, 0);
            w = w.max(stats.supersteps);
        }
        assert!(w > 4, "n={n}: baseline beat the trie bound");
        worst.push(w);
    }
    assert!(
        worst.windows(2).all(|ab| ab[0] < ab[1]),
        "supersteps not growing with lg n: {worst:?}"
    );

    // Remote character fetches shrink as the pruned prefixes grow.
    let raw = random_text(&mut rng, 3000, 3);
    let text = Text::from_raw(&raw).unwrap();
    let patterns: Vec<Vec<u8>> =
        (0..25).map(|_| random_pattern(&mut rng, &raw, 25)).collect();
    let mut totals = Vec::new();
    for prune in [0usize, 5, 10, 15, 20] {
        let mut dsa = DsaIndex::build(&text, 4, prune, 1, 1).unwrap();
        let total: u64 =
            patterns.iter().map(|p| dsa.count(p, 0).1.remote_chars).sum();
        totals.push(total);
    }
    assert!(totals.windows(2).all(|ab| ab[0] >= ab[1]), "not non-increasing: {totals:?}");
    assert!(totals[0] > totals[4], "prune length never paid off: {totals:?}");
}

#[test]
fn c08_louds_tries_under_half_the_pointer_bits_on_a_mebibyte() {
    let raw = motif_corpus(1 << 20, 0xacc_0008);
    let text = Text::from_raw(&raw).unwrap();
    let mut per_char = Vec::new();
    for backing in [Backing::Pointer, Backing::Louds] {
        let cfg = DptConfig { backing, ..DptConfig::new(8) };
        let ix = DptIndex::build(&text, &cfg).unwrap();
        per_char.push(space_report(&ix, DEFAULT_POS_WIDTH).trie_bits_per_char());
    }
    assert!(
        per_char[1] < per_char[0] / 2.0,
        "louds {:.2} bits/char vs pointer {:.2}",
        per_char[1],
        per_char[0]
    );
}

#[test]
fn c09_streaming_dfuds_bit_identical_to_batch_encoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0009);
    for _ in 0..120 {
        let n = rng.gen_range(1..=1500);
        let sigma = [2u8, 3, 4, 26][rng.gen_range(0..4)];
        let raw = random_text(&mut rng, n, sigma);
        let text = Text::from_raw(&raw).unwrap();
        let sa = build_suffix_array(&text);
        let lcp = build_lcp_array(&text, &sa);
        let c = rng.gen_range(1..=4.min(n + 1));
        let sizes = ceil_sizes(text.len_with_sentinel(), c);
        let mut start = 1usize;
        for (pe_id, &len) in sizes.iter().enumerate() {
            let meta = BlockMeta { pe_id, block_start: start, block_len: len };
            let sa_block = &sa.as_slice()[start - 1..start - 1 + len];
            let lcp_block = &lcp.as_slice()[start - 1..start - 1 + len];
            let batch =
                build_patricia(meta, sa_block, lcp_block, &text, Backing::Dfuds).unwrap();
            let streamed = build_skeleton_streaming_dfuds(
                meta,
                sa_block,
                lcp_block,
                text.len_with_sentinel(),
            )
            .unwrap();
            let labels: Vec<u8> =
                streamed.requests().iter().map(|&p| text.padded_char(p)).collect();
            let mut a = Vec::new();
            let mut b = Vec::new();
            batch.serialize(&mut a);
            streamed.into_trie(&labels).serialize(&mut b);
            assert_eq!(a, b, "block {pe_id} of {c} on n={n}");
            start += len;
        }
    }
}

#[test]
fn c10_same_seed_same_bytes_for_results_ledger_and_index() {
    let raw = motif_corpus(50_000, 0xacc_0010);
    let text = Text::from_raw(&raw).unwrap();
    let cfg = DptConfig {
        backing: Backing::Dfuds,
        label_batch: Some(3),
        ..DptConfig::new(6)
    };

    let run = || {
        let mut ix = DptIndex::build(&text, &cfg).unwrap();
        let file = dpt_core::save_index(&ix);
        let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0011);
        let queries: Vec<Query> = (0..40)
            .map(|i| Query {
                kind: [QueryKind::Exists, QueryKind::Count, QueryKind::Enumerate][i % 3],
                pattern: random_pattern(&mut rng, &raw, 12),
                arrival_pe: rng.gen_range(0..6),
            })
            .collect();
        let outcome = ix.run_batch(&queries);
        let mut lines = String::new();
        for r in &outcome.results {
            lines.push_str(&format!("{:?} {} {}\n", r.value, r.supersteps, r.words));
        }
        (file, lines, ix.machine().ledger.to_tsv(), ix.machine().trace_fingerprint())
    };

    let a = run();
    let b = run();
    assert_eq!(a.0, b.0, "serialized index differs");
    assert_eq!(a.1, b.1, "result lines differ");
    assert_eq!(a.2, b.2, "ledger differs");
    assert_eq!(a.3, b.3, "message trace differs");

    let mut reloaded = dpt_core::load_index(&a.0, 1, 1).unwrap();
    assert_eq!(dpt_core::save_index(&reloaded), a.0, "reload is not stable");
    let mut fresh = DptIndex::build(&text, &cfg).unwrap();
    assert_eq!(
        expect_count(&reloaded.query_count(&raw[100..112], 1)),
        expect_count(&fresh.query_count(&raw[100..112], 1))
    );
}
