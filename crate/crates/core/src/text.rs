//! Sentinel-terminated texts with suffix arrays, LCP arrays, and the naive
//! oracles that every randomized test in this crate compares against.
//!
//! Position convention: every public position and rank in this crate is
//! 1-based. A text of raw length `n` occupies positions `1..=n` and the
//! sentinel sits at `n + 1`. The only base conversions happen here: byte
//! lookups use `bytes[pos - 1]` and array accessors use `values[rank - 1]`.
//! Everything above this module speaks 1-based.

use thiserror::Error;

/// The terminator appended to every text. Smaller than any input byte.
pub const SENTINEL: u8 = 0;

/// 1-based text position.
pub type Pos = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    /// The raw input already contains the sentinel byte.
    #[error("input contains sentinel byte 0 at position {at}")]
    SentinelInInput { at: Pos },
}

/// An input text with the sentinel appended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text {
    bytes: Vec<u8>,
}

impl Text {
    /// Validates that `raw` is sentinel-free and appends the sentinel.
    pub fn from_raw(raw: &[u8]) -> Result<Self, TextError> {
        if let Some(i) = raw.iter().position(|&b| b == SENTINEL) {
            return Err(TextError::SentinelInInput { at: i + 1 });
        }
        let mut bytes = Vec::with_capacity(raw.len() + 1);
        bytes.extend_from_slice(raw);
        bytes.push(SENTINEL);
        Ok(Text { bytes })
    }

    /// Raw length `n`, excluding the sentinel.
    pub fn raw_len(&self) -> usize {
        self.bytes.len() - 1
    }

    /// `n + 1`: the number of suffixes, including the sentinel suffix.
    pub fn len_with_sentinel(&self) -> usize {
        self.bytes.len()
    }

    /// Byte at position `pos` in `1..=n+1`.
    pub fn char_at(&self, pos: Pos) -> u8 {
        self.bytes[pos - 1]
    }

    /// Byte at `pos`, with positions past the end reading as sentinels.
    /// Padding reads are what keep truncated suffixes well defined.
    pub fn padded_char(&self, pos: Pos) -> u8 {
        if pos <= self.bytes.len() {
            self.bytes[pos - 1]
        } else {
            SENTINEL
        }
    }

    /// `len` bytes starting at `pos`, sentinel-padded past the end.
    pub fn padded_slice(&self, pos: Pos, len: usize) -> Vec<u8> {
        (pos..pos + len).map(|p| self.padded_char(p)).collect()
    }

    /// All bytes including the sentinel.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// The suffix starting at `pos`, up to and including the sentinel.
    pub fn suffix(&self, pos: Pos) -> &[u8] {
        &self.bytes[pos - 1..]
    }
}

/// Lexicographic order of the `n + 1` suffix start positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixArray {
    entries: Vec<Pos>,
}

impl SuffixArray {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position of the rank-`r` suffix, `r` in `1..=n+1`.
    pub fn at(&self, rank: usize) -> Pos {
        self.entries[rank - 1]
    }

    pub fn as_slice(&self) -> &[Pos] {
        &self.entries
    }
}

/// `lcp[r]` is the longest common prefix of the suffixes of rank `r - 1`
/// and `r`; `lcp[1] = 0`. Aligned with [`SuffixArray`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcpArray {
    values: Vec<usize>,
}

impl LcpArray {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Value at rank `r` in `1..=n+1`.
    pub fn at(&self, rank: usize) -> usize {
        self.values[rank - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.values
    }
}

/// Suffix array by prefix doubling: ranks double in resolved length each
/// round, so construction is `O(n lg^2 n)` and immune to repetitive inputs.
pub fn build_suffix_array(t: &Text) -> SuffixArray {
    let s = t.bytes();
    let n = s.len();
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<usize> = s.iter().map(|&b| b as usize).collect();
    let mut next = vec![0usize; n];
    let mut k = 1;
    loop {
        let key = |i: usize| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        next[sa[0]] = 0;
        for w in 1..n {
            next[sa[w]] = next[sa[w - 1]] + usize::from(key(sa[w]) != key(sa[w - 1]));
        }
        rank.copy_from_slice(&next);
        if rank[sa[n - 1]] == n - 1 || k >= n {
            break;
        }
        k *= 2;
    }
    SuffixArray {
        entries: sa.into_iter().map(|i| i + 1).collect(),
    }
}

/// Oracle: sort the suffixes outright. Quadratic in the worst case and kept
/// deliberately independent of [`build_suffix_array`].
pub fn naive_suffix_array(t: &Text) -> SuffixArray {
    let mut entries: Vec<Pos> = (1..=t.len_with_sentinel()).collect();
    entries.sort_by(|&a, &b| t.suffix(a).cmp(t.suffix(b)));
    SuffixArray { entries }
}

/// LCP array by Kasai's algorithm in `O(n)`.
pub fn build_lcp_array(t: &Text, sa: &SuffixArray) -> LcpArray {
    let n = t.len_with_sentinel();
    debug_assert_eq!(sa.len(), n);
    // inv[pos - 1] is the 1-based rank of the suffix at pos.
    let mut inv = vec![0usize; n];
    for r in 1..=n {
        inv[sa.at(r) - 1] = r;
    }
    let mut values = vec![0usize; n];
    let mut h = 0usize;
    for pos in 1..=n {
        let r = inv[pos - 1];
        if r > 1 {
            let prev = sa.at(r - 1);
            // The sentinel is unique, so two distinct suffixes mismatch
            // before either one runs out; char_at stays in bounds.
            while t.char_at(pos + h) == t.char_at(prev + h) {
                h += 1;
            }
            values[r - 1] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    LcpArray { values }
}

/// Oracle: pairwise character comparison of adjacent suffix-array entries.
pub fn naive_lcp_array(t: &Text, sa: &SuffixArray) -> LcpArray {
    let mut values = vec![0usize];
    for r in 2..=sa.len() {
        values.push(lcp_pair(t, sa.at(r - 1), sa.at(r)));
    }
    LcpArray { values }
}

/// Longest common prefix length of the suffixes at `i` and `j`, by direct
/// comparison. `lcp_pair(t, i, i)` is the full suffix length `n + 2 - i`.
pub fn lcp_pair(t: &Text, i: Pos, j: Pos) -> usize {
    let (a, b) = (t.suffix(i), t.suffix(j));
    let mut k = 0;
    while k < a.len() && k < b.len() && a[k] == b[k] {
        k += 1;
    }
    k
}

/// Oracle: every occurrence of `p` in the raw text by windowed scan,
/// ascending. The sentinel cannot occur in any pattern match.
pub fn naive_occurrences(t: &Text, p: &[u8]) -> Vec<Pos> {
    if p.is_empty() || p.len() > t.raw_len() {
        return Vec::new();
    }
    t.bytes()[..t.raw_len()]
        .windows(p.len())
        .enumerate()
        .filter_map(|(i, w)| (w == p).then_some(i + 1))
        .collect()
}
