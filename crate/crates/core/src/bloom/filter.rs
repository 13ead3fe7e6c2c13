use std::fmt;

use crate::{Error, Result};

use super::HashSpec;

const WORD_BITS: usize = 64;

/// A length-`L` binary array.
///
/// Used for channel inputs, received arrays and signatures alike. The
/// all-zero array is the transmission of a silent user.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BloomFilter {
    len: usize,
    words: Vec<u64>,
}

impl BloomFilter {
    pub fn zeros(len: usize) -> Self {
        BloomFilter {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Array with the given positions set; duplicates collapse.
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut filter = BloomFilter::zeros(len);
        for &p in positions {
            if p >= len {
                return Err(Error::Parameter(format!(
                    "position {p} outside array of length {len}"
                )));
            }
            filter.set(p);
        }
        Ok(filter)
    }

    /// Parses a string of `0`/`1` characters, position 0 first.
    pub fn from_bit_str(bits: &str) -> Result<Self> {
        let mut filter = BloomFilter::zeros(bits.len());
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => filter.set(i),
                other => {
                    return Err(Error::Parameter(format!(
                        "unexpected character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(filter)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        debug_assert!(pos < self.len);
        self.words[pos / WORD_BITS] >> (pos % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, pos: usize) {
        debug_assert!(pos < self.len);
        self.words[pos / WORD_BITS] |= 1 << (pos % WORD_BITS);
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of zeros, `L - weight`.
    pub fn zeros_count(&self) -> usize {
        self.len - self.weight()
    }

    pub fn is_all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Positions holding a one, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// In-place positionwise OR.
    pub fn or_assign(&mut self, other: &BloomFilter) -> Result<()> {
        check_len(self.len, other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        Ok(())
    }

    /// True iff every one of `other` is a one here.
    pub fn covers(&self, other: &BloomFilter) -> Result<bool> {
        check_len(self.len, other.len)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| b & !a == 0))
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for BloomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BloomFilter({})", self.to_bit_string())
    }
}

impl fmt::Display for BloomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::Dimension { left, right });
    }
    Ok(())
}

/// A filter kept as its ordered hash-position sequence.
///
/// Containment checks walk the sequence in order and stop at the first miss,
/// so the number of probes is well defined.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    len: usize,
    positions: Vec<usize>,
}

impl Signature {
    pub fn new(len: usize, positions: Vec<usize>) -> Result<Self> {
        if len == 0 {
            return Err(Error::Parameter("array length must be at least 1".into()));
        }
        if let Some(&p) = positions.iter().find(|&&p| p >= len) {
            return Err(Error::Parameter(format!(
                "position {p} outside array of length {len}"
            )));
        }
        Ok(Signature { len, positions })
    }

    /// Hash draws of `spec` for a `(len, hashes)` filter.
    pub fn from_hash(len: usize, hashes: usize, spec: &HashSpec) -> Result<Self> {
        check_params(len, hashes)?;
        Ok(Signature {
            len,
            positions: spec.positions(len, hashes).collect(),
        })
    }

    /// Ascending ones of an existing array.
    pub fn from_filter(filter: &BloomFilter) -> Self {
        Signature {
            len: filter.len(),
            positions: filter.ones().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn to_filter(&self) -> BloomFilter {
        let mut f = BloomFilter::zeros(self.len);
        for &p in &self.positions {
            f.set(p);
        }
        f
    }
}

/// Result of a containment check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Containment {
    pub verdict: bool,
    /// Positions inspected: up to and including the first miss, or all of
    /// them on success.
    pub hashes_checked: usize,
}

impl Containment {
    /// Early-exit walk over an ordered position sequence.
    #[inline]
    pub fn probe(array: &BloomFilter, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut checked = 0;
        for p in positions {
            checked += 1;
            if !array.get(p) {
                return Containment {
                    verdict: false,
                    hashes_checked: checked,
                };
            }
        }
        Containment {
            verdict: true,
            hashes_checked: checked,
        }
    }
}

fn check_params(len: usize, hashes: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Parameter("array length L must be at least 1".into()));
    }
    if hashes == 0 {
        return Err(Error::Parameter("hash count K must be at least 1".into()));
    }
    Ok(())
}

/// Bloom filter `BF(len, hashes)` drawn by `spec`.
pub fn generate(len: usize, hashes: usize, spec: &HashSpec) -> Result<BloomFilter> {
    check_params(len, hashes)?;
    let mut f = BloomFilter::zeros(len);
    for p in spec.positions(len, hashes) {
        f.set(p);
    }
    Ok(f)
}

/// Positionwise OR of two arrays of equal length.
pub fn superpose(a: &BloomFilter, b: &BloomFilter) -> Result<BloomFilter> {
    let mut out = a.clone();
    out.or_assign(b)?;
    Ok(out)
}

/// Whether every position of `filter` is set in `array`.
pub fn contains(array: &BloomFilter, filter: &Signature) -> Result<Containment> {
    check_len(array.len(), filter.len())?;
    Ok(Containment::probe(array, filter.positions.iter().copied()))
}
