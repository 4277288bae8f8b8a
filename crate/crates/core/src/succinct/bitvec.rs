//! Bit vector with rank, select, and matched-parenthesis queries.
//!
//! Positions are 1-based and rank is inclusive: `rank_b(i)` counts
//! occurrences of bit `b` in positions `1..=i`. The inclusive convention is
//! load-bearing: the level-order child formula in `tree` only holds with it.
//!
//! Acceleration is block/superblock sampling: cumulative rank and
//! parenthesis-excess summaries per 64-bit word and per 64-word superblock.

use thiserror::Error;

const WORD: usize = 64;
const SUPER_WORDS: usize = 64; // words per superblock

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuccinctError {
    #[error("{op} argument {arg} out of range (limit {limit})")]
    OutOfRange { op: &'static str, arg: usize, limit: usize },
    #[error("findclose at {at}: position does not hold an open bit")]
    NotOpen { at: usize },
    #[error("findclose at {at}: no matching close bit")]
    Unbalanced { at: usize },
    #[error("node at {node} has no child {index}")]
    NoSuchChild { node: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    // Ones before each superblock, and ones inside the superblock before
    // each word. Word excess treats 1 as +1 and 0 as -1; mins are over
    // prefixes of the word or superblock.
    super_ranks: Vec<u64>,
    word_ranks: Vec<u16>,
    super_excess: Vec<i64>,
    super_min: Vec<i64>,
    word_excess: Vec<i16>,
    word_min: Vec<i16>,
}

impl BitVector {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        let mut cur = 0u64;
        for b in bits {
            if b {
                cur |= 1u64 << (len % WORD);
            }
            len += 1;
            if len % WORD == 0 {
                words.push(cur);
                cur = 0;
            }
        }
        if len % WORD != 0 {
            words.push(cur);
        }
        Self::from_raw_parts(words, len)
    }

    /// Rebuilds acceleration structures from packed words. Bits beyond
    /// `len` in the last word must be zero.
    pub fn from_raw_parts(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), (len + WORD - 1) / WORD);
        if let Some(&last) = words.last() {
            if len % WORD != 0 {
                debug_assert_eq!(last >> (len % WORD), 0);
            }
        }
        let n_words = words.len();
        let n_super = (n_words + SUPER_WORDS - 1) / SUPER_WORDS;
        let mut v = BitVector {
            words,
            len,
            super_ranks: Vec::with_capacity(n_super),
            word_ranks: Vec::with_capacity(n_words),
            super_excess: Vec::with_capacity(n_super),
            super_min: Vec::with_capacity(n_super),
            word_excess: Vec::with_capacity(n_words),
            word_min: Vec::with_capacity(n_words),
        };
        let mut ones = 0u64;
        let mut excess = 0i64;
        for (w, &word) in v.words.iter().enumerate() {
            if w % SUPER_WORDS == 0 {
                v.super_ranks.push(ones);
                v.super_excess.push(excess);
                v.super_min.push(i64::MAX);
            }
            let sb = w / SUPER_WORDS;
            v.word_ranks.push((ones - v.super_ranks[sb]) as u16);
            v.word_excess.push((excess - v.super_excess[sb]) as i16);
            // valid bits in this word
            let valid = if (w + 1) * WORD <= len { WORD } else { len - w * WORD };
            let (wexc, wmin) = word_excess_min(word, valid);
            v.word_min.push((excess - v.super_excess[sb]) as i16 + wmin as i16);
            ones += word.count_ones() as u64;
            excess += wexc as i64;
            let abs_min = v.super_excess[sb] + v.word_min[w] as i64;
            if abs_min < v.super_min[sb] {
                v.super_min[sb] = abs_min;
            }
        }
        v
    }

    /// Parses a string of '0' and '1', most significant position first.
    pub fn from_bit_str(s: &str) -> Self {
        Self::from_bits(s.chars().map(|c| match c {
            '0' => false,
            '1' => true,
            _ => panic!("bit strings may only contain 0 and 1"),
        }))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> bool {
        debug_assert!((1..=self.len).contains(&i));
        let z = i - 1;
        self.words[z / WORD] >> (z % WORD) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.rank1(self.len).unwrap()
    }

    /// Ones in positions `1..=i` (inclusive). `i = 0` is allowed and 0.
    pub fn rank1(&self, i: usize) -> Result<usize, SuccinctError> {
        if i > self.len {
            return Err(SuccinctError::OutOfRange { op: "rank", arg: i, limit: self.len });
        }
        if i == 0 {
            return Ok(0);
        }
        let z = i - 1; // inclusive 0-based
        let w = z / WORD;
        let ones = self.super_ranks[w / SUPER_WORDS] + self.word_ranks[w] as u64;
        let mask = if z % WORD == WORD - 1 { !0u64 } else { (1u64 << (z % WORD + 1)) - 1 };
        Ok(ones as usize + (self.words[w] & mask).count_ones() as usize)
    }

    /// Zeros in positions `1..=i` (inclusive).
    pub fn rank0(&self, i: usize) -> Result<usize, SuccinctError> {
        Ok(i - self.rank1(i)?)
    }

    pub fn rank(&self, bit: bool, i: usize) -> Result<usize, SuccinctError> {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    /// Position of the `k`-th one, `k >= 1`.
    pub fn select1(&self, k: usize) -> Result<usize, SuccinctError> {
        self.select_impl(true, k)
    }

    /// Position of the `k`-th zero, `k >= 1`.
    pub fn select0(&self, k: usize) -> Result<usize, SuccinctError> {
        self.select_impl(false, k)
    }

    pub fn select(&self, bit: bool, k: usize) -> Result<usize, SuccinctError> {
        self.select_impl(bit, k)
    }

    fn select_impl(&self, bit: bool, k: usize) -> Result<usize, SuccinctError> {
        let total = if bit { self.count_ones() } else { self.len - self.count_ones() };
        if k == 0 || k > total {
            return Err(SuccinctError::OutOfRange { op: "select", arg: k, limit: total });
        }
        // Superblock holding the k-th occurrence, by binary search on the
        // cumulative counts before each superblock.
        let count_before = |sb: usize| -> usize {
            if bit {
                self.super_ranks[sb] as usize
            } else {
                sb * SUPER_WORDS * WORD - self.super_ranks[sb] as usize
            }
        };
        let mut lo = 0usize;
        let mut hi = self.super_ranks.len(); // first sb with count_before >= k
        while lo < hi {
            let mid = (lo + hi) / 2;
            if count_before(mid) >= k {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let sb = lo - 1; // k-th occurrence lies in superblock sb
        let mut remaining = k - count_before(sb);
        let w_end = ((sb + 1) * SUPER_WORDS).min(self.words.len());
        for w in sb * SUPER_WORDS..w_end {
            let valid = if (w + 1) * WORD <= self.len { WORD } else { self.len - w * WORD };
            let word = if bit { self.words[w] } else { !self.words[w] & low_mask(valid) };
            let c = word.count_ones() as usize;
            if remaining <= c {
                return Ok(w * WORD + select_in_word(word, remaining) + 1);
            }
            remaining -= c;
        }
        unreachable!("select: counted occurrence not found in its superblock");
    }

    /// Matching close position for the open bit at `i`, reading 1 as an
    /// open parenthesis and 0 as a close.
    pub fn findclose(&self, i: usize) -> Result<usize, SuccinctError> {
        if i == 0 || i > self.len {
            return Err(SuccinctError::OutOfRange { op: "findclose", arg: i, limit: self.len });
        }
        if !self.get(i) {
            return Err(SuccinctError::NotOpen { at: i });
        }
        // Need smallest j > i with excess(j) == excess(i) - 1; excess moves
        // by one per position, so the first time it reaches the target is
        // the match. Scan the rest of i's word, then hop words and
        // superblocks whose minima stay above the target.
        let target = self.excess(i) - 1;
        let z = i; // 0-based index of position i + 1
        let w0 = z / WORD;
        let mut running = self.excess(i);
        if w0 < self.words.len() {
            let valid0 = if (w0 + 1) * WORD <= self.len { WORD } else { self.len - w0 * WORD };
            if let Some(pos) =
                scan_word_for_excess(self.words[w0], z % WORD, valid0, &mut running, target)
            {
                return Ok(w0 * WORD + pos + 1);
            }
        }
        let mut w = w0 + 1;
        while w < self.words.len() {
            if w % SUPER_WORDS == 0 {
                let sb = w / SUPER_WORDS;
                if self.super_min[sb] > target {
                    let next = ((sb + 1) * SUPER_WORDS).min(self.words.len());
                    running = if next < self.words.len() {
                        self.excess_before_word(next)
                    } else {
                        self.total_excess()
                    };
                    w = next;
                    continue;
                }
            }
            let sb = w / SUPER_WORDS;
            let valid = if (w + 1) * WORD <= self.len { WORD } else { self.len - w * WORD };
            if self.super_excess[sb] + self.word_min[w] as i64 <= target {
                let pos = scan_word_for_excess(self.words[w], 0, valid, &mut running, target)
                    .expect("word minimum promised a hit");
                return Ok(w * WORD + pos + 1);
            }
            let (wexc, _) = word_excess_min(self.words[w], valid);
            running += wexc as i64;
            w += 1;
        }
        Err(SuccinctError::Unbalanced { at: i })
    }

    /// Excess (ones minus zeros) over positions `1..=i`.
    fn excess(&self, i: usize) -> i64 {
        let ones = self.rank1(i).unwrap() as i64;
        2 * ones - i as i64
    }

    fn excess_before_word(&self, w: usize) -> i64 {
        self.super_excess[w / SUPER_WORDS] + self.word_excess[w] as i16 as i64
    }

    fn total_excess(&self) -> i64 {
        self.excess(self.len)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Raw bit storage in bits, ignoring acceleration overhead.
    pub fn raw_bits(&self) -> usize {
        self.len
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        !0
    } else {
        (1u64 << bits) - 1
    }
}

/// Total excess of the `valid`-bit prefix of `word` and the minimum excess
/// over its nonempty prefixes.
fn word_excess_min(word: u64, valid: usize) -> (i32, i32) {
    let mut excess = 0i32;
    let mut min = i32::MAX;
    for b in 0..valid {
        excess += if word >> b & 1 == 1 { 1 } else { -1 };
        if excess < min {
            min = excess;
        }
    }
    if valid == 0 {
        (0, 0)
    } else {
        (excess, min)
    }
}

/// Scans `word` from bit offset `from` (0-based), updating `running` per
/// bit, returning the in-word bit index where `running == target`.
fn scan_word_for_excess(
    word: u64,
    from: usize,
    valid: usize,
    running: &mut i64,
    target: i64,
) -> Option<usize> {
    for b in from..valid {
        *running += if word >> b & 1 == 1 { 1 } else { -1 };
        if *running == target {
            return Some(b);
        }
    }
    None
}

/// 0-based index of the `k`-th set bit of `word`, `k >= 1`.
fn select_in_word(word: u64, k: usize) -> usize {
    let mut seen = 0;
    for b in 0..64 {
        if word >> b & 1 == 1 {
            seen += 1;
            if seen == k {
                return b;
            }
        }
    }
    panic!("select_in_word: fewer than k ones");
}
