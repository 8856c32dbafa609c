//! Compact element sets over a dense ground set `{0, .., n-1}`.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// A set of element indices, stored as a bitset.
///
/// Ground sets up to 64 elements stay inline; copied ground sets (several
/// hundred indices) spill to the heap. Trailing zero blocks are trimmed so
/// that equality and hashing do not depend on construction history.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ElemSet {
    blocks: SmallVec<[u64; 1]>,
}

impl ElemSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(e: usize) -> Self {
        let mut s = Self::empty();
        s.insert(e);
        s
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let mut s = Self::empty();
        for &e in indices {
            s.insert(e);
        }
        s
    }

    /// Builds the set whose characteristic vector is the low `n` bits of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        let m = if n == 64 {
            mask
        } else {
            mask & ((1u64 << n) - 1)
        };
        let mut s = Self::empty();
        if m != 0 {
            s.blocks.push(m);
        }
        s
    }

    /// The characteristic bitmask, when every element fits in one block.
    pub fn mask64(&self) -> Option<u64> {
        match self.blocks.len() {
            0 => Some(0),
            1 => Some(self.blocks[0]),
            _ => None,
        }
    }

    pub fn insert(&mut self, e: usize) {
        let (b, i) = (e / 64, e % 64);
        if self.blocks.len() <= b {
            self.blocks.resize(b + 1, 0);
        }
        self.blocks[b] |= 1u64 << i;
    }

    pub fn remove(&mut self, e: usize) {
        let (b, i) = (e / 64, e % 64);
        if b < self.blocks.len() {
            self.blocks[b] &= !(1u64 << i);
            self.trim();
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        let (b, i) = (e / 64, e % 64);
        b < self.blocks.len() && self.blocks[b] & (1u64 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn with(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    pub fn without(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.remove(e);
        s
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn union_with(&mut self, other: &Self) {
        if self.blocks.len() < other.blocks.len() {
            self.blocks.resize(other.blocks.len(), 0);
        }
        for (a, b) in self.blocks.iter_mut().zip(other.blocks.iter()) {
            *a |= *b;
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.blocks
            .iter()
            .enumerate()
            .all(|(i, b)| *b & !other.blocks.get(i).copied().unwrap_or(0) == 0)
    }

    /// Largest element index, or `None` for the empty set.
    pub fn max_elem(&self) -> Option<usize> {
        let b = self.blocks.len().checked_sub(1)?;
        Some(b * 64 + 63 - self.blocks[b].leading_zeros() as usize)
    }

    /// Iterates element indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut rest = block;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(bi * 64 + i)
            })
        })
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Orders sets as little-endian integers, i.e. by their bitmask value.
    pub fn cmp_mask(&self, other: &Self) -> Ordering {
        let len = self.blocks.len().max(other.blocks.len());
        for b in (0..len).rev() {
            let x = self.blocks.get(b).copied().unwrap_or(0);
            let y = other.blocks.get(b).copied().unwrap_or(0);
            match x.cmp(&y) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    fn trim(&mut self) {
        while self.blocks.last() == Some(&0) {
            self.blocks.pop();
        }
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::empty();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut s = ElemSet::empty();
        assert!(s.is_empty());
        s.insert(3);
        s.insert(70);
        assert!(s.contains(3) && s.contains(70) && !s.contains(4));
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_indices(), vec![3, 70]);
        assert_eq!(s.max_elem(), Some(70));
        s.remove(70);
        assert_eq!(s, ElemSet::singleton(3));
        assert_eq!(s.mask64(), Some(0b1000));
    }

    #[test]
    fn mask_round_trip() {
        let s = ElemSet::from_mask(0b10110, 5);
        assert_eq!(s.to_indices(), vec![1, 2, 4]);
        assert_eq!(s.mask64(), Some(0b10110));
    }

    #[test]
    fn trim_keeps_eq_consistent() {
        let mut a = ElemSet::singleton(100);
        a.remove(100);
        assert_eq!(a, ElemSet::empty());
        assert_eq!(a.max_elem(), None);
    }

    #[test]
    fn subset_and_union() {
        let a = ElemSet::from_indices(&[1, 5]);
        let b = ElemSet::from_indices(&[1, 5, 9]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert_eq!(a.union(&b), b);
    }

    #[test]
    fn mask_ordering() {
        let a = ElemSet::from_mask(0b011, 3);
        let b = ElemSet::from_mask(0b100, 3);
        assert_eq!(a.cmp_mask(&b), Ordering::Less);
        assert_eq!(b.cmp_mask(&b), Ordering::Equal);
    }
}
