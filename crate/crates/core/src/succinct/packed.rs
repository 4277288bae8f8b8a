//! Fixed-width integer array packed into 64-bit words. Used for per-node
//! string depths and leaf permutations in the succinct trie backings.

/// Bits needed to store values up to `max` inclusive; at least 1.
pub fn width_for(max: u64) -> usize {
    (64 - max.leading_zeros() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedIntVec {
    words: Vec<u64>,
    width: usize,
    len: usize,
}

impl PackedIntVec {
    pub fn new(width: usize) -> Self {
        assert!((1..=64).contains(&width), "width must be in 1..=64");
        PackedIntVec { words: Vec::new(), width, len: 0 }
    }

    pub fn from_values(width: usize, values: impl IntoIterator<Item = u64>) -> Self {
        let mut v = Self::new(width);
        for x in values {
            v.push(x);
        }
        v
    }

    pub fn push(&mut self, value: u64) {
        debug_assert!(self.width == 64 || value < 1u64 << self.width);
        let bit = self.len * self.width;
        let word = bit / 64;
        let off = bit % 64;
        if word >= self.words.len() {
            self.words.push(0);
        }
        self.words[word] |= value << off;
        if off + self.width > 64 {
            self.words.push(value >> (64 - off));
        }
        self.len += 1;
    }

    /// Value at 0-based slot `i`.
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let bit = i * self.width;
        let word = bit / 64;
        let off = bit % 64;
        let mask = if self.width == 64 { !0 } else { (1u64 << self.width) - 1 };
        let mut v = self.words[word] >> off;
        if off + self.width > 64 {
            v |= self.words[word + 1] << (64 - off);
        }
        v & mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Payload bits, ignoring the trailing word padding.
    pub fn raw_bits(&self) -> usize {
        self.len * self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn from_raw_parts(width: usize, len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), (len * width + 63) / 64);
        PackedIntVec { words, width, len }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}
