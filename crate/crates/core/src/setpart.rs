//! Set partitions of `{1..k}`, their refinement order, and the sieve
//! coefficients `(-1)^{s-1}(s-1)!`.
//!
//! Enumeration uses restricted-growth strings, which yields a canonical,
//! reproducible order and `O(Bell(k))` memory.

use num::BigRational;
use thiserror::Error;

/// Practical cap: Bell(12) is about 4.2 million.
pub const MAX_K: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetPartError {
    #[error("k = {0} outside supported range 1..={MAX_K}")]
    KOutOfRange(u32),
    #[error("partitions over different ground sets: k = {0} vs k = {1}")]
    KMismatch(u32, u32),
}

/// A partition of `{1..k}` into disjoint nonempty blocks, stored with
/// each block sorted and blocks ordered by minimum element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    k: u32,
    blocks: Vec<Vec<u32>>,
}

impl SetPartition {
    /// Build from blocks; sorts into canonical form. Callers must supply
    /// a genuine partition of `{1..k}`; this is checked.
    pub fn new(k: u32, mut blocks: Vec<Vec<u32>>) -> Result<Self, SetPartError> {
        if k == 0 || k > MAX_K {
            return Err(SetPartError::KOutOfRange(k));
        }
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b.first().copied());
        let mut seen = vec![false; k as usize + 1];
        let mut count = 0u32;
        for b in &blocks {
            assert!(!b.is_empty(), "empty block");
            for &e in b {
                assert!(
                    e >= 1 && e <= k && !seen[e as usize],
                    "not a partition of 1..=k"
                );
                seen[e as usize] = true;
                count += 1;
            }
        }
        assert_eq!(count, k, "blocks do not cover 1..=k");
        Ok(SetPartition { k, blocks })
    }

    /// The one-block partition `{1..k}`.
    pub fn trivial(k: u32) -> Result<Self, SetPartError> {
        SetPartition::new(k, vec![(1..=k).collect()])
    }

    /// The all-singletons partition.
    pub fn discrete(k: u32) -> Result<Self, SetPartError> {
        SetPartition::new(k, (1..=k).map(|i| vec![i]).collect())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `e` (1-based element).
    pub fn block_of(&self, e: u32) -> usize {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&e).is_ok())
            .unwrap()
    }

    /// `(-1)^{s-1} (s-1)!` where `s` is the number of blocks.
    pub fn sieve_coefficient(&self) -> BigRational {
        let s = self.blocks.len() as u32;
        let mut fact = num::BigInt::from(1);
        for i in 1..s {
            fact *= i as i64;
        }
        if (s - 1) % 2 == 1 {
            fact = -fact;
        }
        BigRational::from_integer(fact)
    }

    /// True iff every block of `self` is contained in some block of
    /// `other` (i.e. `self` is a refinement).
    pub fn refines(&self, other: &SetPartition) -> Result<bool, SetPartError> {
        if self.k != other.k {
            return Err(SetPartError::KMismatch(self.k, other.k));
        }
        // membership map for `other`
        let mut owner = vec![0usize; self.k as usize + 1];
        for (i, b) in other.blocks.iter().enumerate() {
            for &e in b {
                owner[e as usize] = i;
            }
        }
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&e| owner[e as usize] == owner[b[0] as usize])))
    }
}

/// All set partitions of `{1..k}` in restricted-growth-string order.
pub fn enumerate_partitions(k: u32) -> Result<Vec<SetPartition>, SetPartError> {
    if k == 0 || k > MAX_K {
        return Err(SetPartError::KOutOfRange(k));
    }
    let n = k as usize;
    let mut out = Vec::new();
    // restricted growth string: a[0] = 0, a[i] <= max(a[..i]) + 1
    let mut a = vec![0u32; n];
    loop {
        let s = (*a.iter().max().unwrap() + 1) as usize;
        let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); s];
        for (i, &c) in a.iter().enumerate() {
            blocks[c as usize].push(i as u32 + 1);
        }
        out.push(SetPartition::new(k, blocks).unwrap());
        // rightmost position that can still grow
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
            let prefix_max = *a[..i].iter().max().unwrap();
            if a[i] <= prefix_max {
                break;
            }
        }
        a[i] += 1;
        for v in a[i + 1..].iter_mut() {
            *v = 0;
        }
    }
}

/// Bell numbers for testing and sanity checks (Bell triangle).
pub fn bell_number(k: u32) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..k {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    *row.last().unwrap()
}
