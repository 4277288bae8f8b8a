//! Randomized invariants; proptest shrinks any failure to a small case.

use proptest::collection::vec as pvec;
use proptest::prelude::*;

use dpt_core::global::{gather_boundaries, GlobalTrie};
use dpt_core::patricia::{build_patricia, verify_occurrence, BlindOutcome, BlockMeta};
use dpt_core::sim::ceil_sizes;
use dpt_core::succinct::BitVector;
use dpt_core::text::{
    build_lcp_array, build_suffix_array, naive_lcp_array, naive_occurrences, naive_suffix_array,
};
use dpt_core::{
    load_index, save_index, Backing, DptConfig, DptIndex, DsaIndex, QueryValue, RoutingResult,
    Text,
};

fn text_strategy(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        pvec(prop_oneof![Just(b'a'), Just(b'b')], 1..max),
        pvec(b'a'..=b'd', 1..max),
        pvec(1u8..=255, 1..max),
    ]
}

/// A pattern biased towards substrings of `raw`; the index and offset
/// draws are reduced modulo whatever lengths the text allows.
fn pattern_from(raw: &[u8], start_pick: usize, len_pick: usize, flip: bool) -> Vec<u8> {
    let len = 1 + len_pick % raw.len().min(8);
    let start = start_pick % (raw.len() - len + 1);
    let mut p = raw[start..start + len].to_vec();
    if flip {
        let i = start_pick % p.len();
        p[i] = p[i].wrapping_add(1).max(1);
    }
    p
}

fn occ_per_block(text: &Text, p: &[u8], c: usize) -> Vec<usize> {
    let sa = naive_suffix_array(text);
    let sizes = ceil_sizes(text.len_with_sentinel(), c);
    let mut out = Vec::with_capacity(c);
    let mut rank = 0usize;
    for &len in &sizes {
        out.push(
            sa.as_slice()[rank..rank + len]
                .iter()
                .filter(|&&pos| text.suffix(pos).starts_with(p))
                .count(),
        );
        rank += len;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn suffix_array_sorts_every_suffix(raw in text_strategy(300)) {
        let t = Text::from_raw(&raw).unwrap();
        let sa = build_suffix_array(&t);
        let naive_sa = naive_suffix_array(&t);
        prop_assert_eq!(sa.as_slice(), naive_sa.as_slice());
        for w in sa.as_slice().windows(2) {
            prop_assert!(t.suffix(w[0]) < t.suffix(w[1]));
        }
        let lcp = build_lcp_array(&t, &sa);
        let naive_lcp = naive_lcp_array(&t, &sa);
        prop_assert_eq!(lcp.as_slice(), naive_lcp.as_slice());
    }

    #[test]
    fn routing_never_misplaces_an_occurrence(
        raw in text_strategy(240),
        c_pick in 1usize..=6,
        picks in pvec((any::<usize>(), any::<usize>(), any::<bool>()), 8),
    ) {
        let t = Text::from_raw(&raw).unwrap();
        let n1 = t.len_with_sentinel();
        let c = c_pick.min(n1);
        let sa = build_suffix_array(&t);
        let lcp = build_lcp_array(&t, &sa);
        let sizes = ceil_sizes(n1, c);
        let mut blocks = Vec::new();
        let mut at = 0usize;
        for &len in &sizes {
            blocks.push((&sa.as_slice()[at..at + len], &lcp.as_slice()[at..at + len]));
            at += len;
        }
        let bs = gather_boundaries(&blocks, n1);
        let pmax = 8;
        let gt = GlobalTrie::build(&bs, pmax, |pos, len| t.padded_slice(pos, len));

        for (start_pick, len_pick, flip) in picks {
            let p = pattern_from(&raw, start_pick, len_pick, flip);
            let occ = occ_per_block(&t, &p, c);
            match gt.route(&p).unwrap() {
                RoutingResult::Absent => {
                    prop_assert_eq!(occ.iter().sum::<usize>(), 0, "absent but found {:?}", p)
                }
                RoutingResult::Candidate { pe } => {
                    for (k, &o) in occ.iter().enumerate() {
                        prop_assert!(k == pe || o == 0, "{:?} leaked to PE {}", p, k);
                    }
                }
                RoutingResult::Interval { l, r } => {
                    for (k, &o) in occ.iter().enumerate() {
                        if (l..=r).contains(&k) {
                            prop_assert!(o >= 1, "{:?} missing from PE {}", p, k);
                        } else {
                            prop_assert_eq!(o, 0, "{:?} leaked to PE {}", p, k);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn blind_search_finds_the_exact_leaf_range(
        raw in text_strategy(400),
        picks in pvec((any::<usize>(), any::<usize>(), any::<bool>()), 6),
    ) {
        let t = Text::from_raw(&raw).unwrap();
        let sa = build_suffix_array(&t);
        let lcp = build_lcp_array(&t, &sa);
        let meta = BlockMeta { pe_id: 0, block_start: 1, block_len: sa.len() };
        let trie =
            build_patricia(meta, sa.as_slice(), lcp.as_slice(), &t, Backing::Louds).unwrap();

        for (start_pick, len_pick, flip) in picks {
            let p = pattern_from(&raw, start_pick, len_pick, flip);
            let matching: Vec<usize> = sa
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, &pos)| t.suffix(pos).starts_with(&p))
                .map(|(i, _)| i)
                .collect();
            let res = trie.blind_search(&p, sa.as_slice());
            match res.outcome {
                BlindOutcome::NoEdge => prop_assert!(matching.is_empty()),
                BlindOutcome::Matched => {
                    let witness = res.witness.unwrap();
                    let verified = verify_occurrence(&p, &t.padded_slice(witness, p.len()));
                    prop_assert_eq!(verified, !matching.is_empty());
                    if verified {
                        // One verification settles the whole contiguous range.
                        let (lo, hi) = res.leaf_range.unwrap();
                        prop_assert_eq!(lo, matching[0]);
                        prop_assert_eq!(hi, *matching.last().unwrap());
                        prop_assert_eq!(hi - lo + 1, matching.len());
                    }
                }
            }
        }
    }

    #[test]
    fn rank_and_select_invert(bits in pvec(any::<bool>(), 0..2048)) {
        let bv = BitVector::from_bits(bits.iter().copied());
        let ones = bv.count_ones();
        prop_assert_eq!(ones, bits.iter().filter(|&&b| b).count());
        for k in 1..=ones {
            let p = bv.select1(k).unwrap();
            prop_assert!(bv.get(p));
            prop_assert_eq!(bv.rank1(p).unwrap(), k);
            prop_assert_eq!(bv.rank1(p - 1).unwrap(), k - 1);
        }
        let zeros = bv.len() - ones;
        for k in 1..=zeros {
            let p = bv.select0(k).unwrap();
            prop_assert!(!bv.get(p));
            prop_assert_eq!(bv.rank0(p).unwrap(), k);
        }
        prop_assert!(bv.select1(ones + 1).is_err());
        prop_assert!(bv.rank1(bv.len() + 1).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn saved_indices_reload_and_answer_identically(
        raw in text_strategy(400),
        c_pick in 1usize..=4,
        backing_pick in 0usize..4,
        picks in pvec((any::<usize>(), any::<usize>(), any::<bool>()), 4),
    ) {
        let t = Text::from_raw(&raw).unwrap();
        let c = c_pick.min(t.len_with_sentinel());
        let cfg = DptConfig { c, backing: Backing::ALL[backing_pick], ..DptConfig::new(c) };
        let mut built = DptIndex::build(&t, &cfg).unwrap();
        let twin = DptIndex::build(&t, &cfg).unwrap();
        prop_assert_eq!(
            built.machine().trace_fingerprint(),
            twin.machine().trace_fingerprint()
        );

        let file = save_index(&built);
        prop_assert_eq!(&save_index(&twin), &file);
        let mut loaded = load_index(&file, 1, 1).unwrap();
        prop_assert_eq!(&save_index(&loaded), &file);

        for (start_pick, len_pick, flip) in picks {
            let p = pattern_from(&raw, start_pick, len_pick, flip);
            let arrival = start_pick % c;
            let a = built.query_count(&p, arrival);
            let b = loaded.query_count(&p, arrival);
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.supersteps, b.supersteps);
            prop_assert_eq!(a.words, b.words);
        }
    }

    #[test]
    fn baseline_count_matches_the_scan(
        raw in text_strategy(400),
        c_pick in 1usize..=4,
        prune in 0usize..=8,
        picks in pvec((any::<usize>(), any::<usize>(), any::<bool>()), 5),
    ) {
        let t = Text::from_raw(&raw).unwrap();
        let c = c_pick.min(t.len_with_sentinel());
        let mut dsa = DsaIndex::build(&t, c, prune, 1, 1).unwrap();
        for (start_pick, len_pick, flip) in picks {
            let p = pattern_from(&raw, start_pick, len_pick, flip);
            let (got, _) = dsa.count(&p, start_pick % c);
            prop_assert_eq!(got as usize, naive_occurrences(&t, &p).len());
        }
    }

    #[test]
    fn every_backing_reports_the_same_answers_and_schedule(
        raw in text_strategy(300),
        c_pick in 1usize..=4,
        picks in pvec((any::<usize>(), any::<usize>(), any::<bool>()), 4),
    ) {
        let t = Text::from_raw(&raw).unwrap();
        let c = c_pick.min(t.len_with_sentinel());
        let mut results: Vec<Vec<(Result<QueryValue, _>, usize, u64)>> = Vec::new();
        for backing in Backing::ALL {
            let cfg = DptConfig { c, backing, ..DptConfig::new(c) };
            let mut ix = DptIndex::build(&t, &cfg).unwrap();
            let mut per = Vec::new();
            for &(start_pick, len_pick, flip) in &picks {
                let p = pattern_from(&raw, start_pick, len_pick, flip);
                let r = ix.query_enumerate(&p, start_pick % c);
                per.push((r.value, r.supersteps, r.words));
            }
            results.push(per);
        }
        for per in &results[1..] {
            prop_assert_eq!(per, &results[0]);
        }
    }
}
