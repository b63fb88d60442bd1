/// Dense square bit matrix, one row of `u64` words per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    /// All off-diagonal bits set.
    pub fn complete(n: usize) -> Self {
        let mut m = Self::new(n);
        for u in 0..n {
            let row = &mut m.data[u * m.words..(u + 1) * m.words];
            fill_range(row, 0, n);
            row[u / 64] &= !(1u64 << (u % 64));
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.data[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn set_sym(&mut self, u: usize, v: usize) {
        self.data[u * self.words + v / 64] |= 1 << (v % 64);
        self.data[v * self.words + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn clear_sym(&mut self, u: usize, v: usize) {
        self.data[u * self.words + v / 64] &= !(1 << (v % 64));
        self.data[v * self.words + u / 64] &= !(1 << (u % 64));
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.data[u * self.words..(u + 1) * self.words]
    }

    /// Number of set bits above the diagonal.
    pub fn count_upper(&self) -> u64 {
        let total: u64 = self.data.iter().map(|w| w.count_ones() as u64).sum();
        total / 2
    }
}

/// Sets bits `lo..hi` of `row`.
pub(crate) fn fill_range(row: &mut [u64], lo: usize, hi: usize) {
    let mut i = lo;
    while i < hi {
        let w = i / 64;
        let b = i % 64;
        let span = (64 - b).min(hi - i);
        let mask = if span == 64 {
            u64::MAX
        } else {
            ((1u64 << span) - 1) << b
        };
        row[w] |= mask;
        i += span;
    }
}

/// Clears every bit outside `lo..hi`.
pub(crate) fn keep_range(row: &mut [u64], lo: usize, hi: usize) {
    for (w, word) in row.iter_mut().enumerate() {
        let start = w * 64;
        let end = start + 64;
        if end <= lo || start >= hi {
            *word = 0;
            continue;
        }
        if start < lo {
            *word &= u64::MAX << (lo - start);
        }
        if end > hi {
            let keep = hi - start;
            *word &= (1u64 << keep) - 1;
        }
    }
}

pub(crate) fn iter_ones(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(w * 64 + b)
        })
    })
}
