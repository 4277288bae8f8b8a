//! Shared corpus and pattern generators for the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mutated repeats of a random motif: repetitive enough for interesting
/// tries, varied enough that blocks differ.
pub fn synthetic_corpus(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let motif: Vec<u8> = (0..37).map(|_| rng.gen_range(b'a'..=b'h')).collect();
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

/// Substrings of the corpus; roughly a quarter are mutated so they are
/// usually absent.
pub fn sample_patterns(corpus: &[u8], count: usize, max_len: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.min(corpus.len()));
            let start = rng.gen_range(0..=corpus.len() - len);
            let mut p = corpus[start..start + len].to_vec();
            if rng.gen_ratio(1, 4) {
                let i = rng.gen_range(0..p.len());
                p[i] = p[i].wrapping_add(rng.gen_range(1..=255)).max(1);
            }
            p
        })
        .collect()
}
