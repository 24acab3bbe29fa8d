//! Dense bit-indexed sets of states.

use std::fmt;

use serde::Serialize;

use crate::lts::StateId;

const BITS: usize = 64;

/// A subset of `[0, capacity)` stored as a bit vector.
///
/// All binary operations expect both operands to share the same capacity;
/// mixing capacities is a logic error and panics.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    capacity: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(capacity: usize) -> Self {
        StateSet {
            capacity,
            words: vec![0; capacity.div_ceil(BITS)],
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = StateSet {
            capacity,
            words: vec![!0; capacity.div_ceil(BITS)],
        };
        s.clear_tail();
        s
    }

    pub fn singleton(capacity: usize, x: StateId) -> Self {
        let mut s = Self::empty(capacity);
        s.insert(x);
        s
    }

    pub fn from_iter_with<I: IntoIterator<Item = StateId>>(capacity: usize, it: I) -> Self {
        let mut s = Self::empty(capacity);
        for x in it {
            s.insert(x);
        }
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.capacity % BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn contains(&self, x: StateId) -> bool {
        let x = x as usize;
        x < self.capacity && self.words[x / BITS] >> (x % BITS) & 1 == 1
    }

    /// Returns `true` when `x` was not already present.
    #[inline]
    pub fn insert(&mut self, x: StateId) -> bool {
        let x = x as usize;
        assert!(x < self.capacity, "state {x} out of range {}", self.capacity);
        let w = &mut self.words[x / BITS];
        let mask = 1u64 << (x % BITS);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, x: StateId) -> bool {
        let x = x as usize;
        if x >= self.capacity {
            return false;
        }
        let w = &mut self.words[x / BITS];
        let mask = 1u64 << (x % BITS);
        let present = *w & mask != 0;
        *w &= !mask;
        present
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_cap(&self, other: &StateSet) {
        assert_eq!(
            self.capacity, other.capacity,
            "state sets over different carriers"
        );
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.check_cap(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.check_cap(other);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        self.check_cap(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.check_cap(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn subtract_with(&mut self, other: &StateSet) {
        self.check_cap(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut r = self.clone();
        r.intersect_with(other);
        r
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut r = self.clone();
        r.union_with(other);
        r
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut r = self.clone();
        r.subtract_with(other);
        r
    }

    pub fn complement(&self) -> StateSet {
        let mut r = StateSet {
            capacity: self.capacity,
            words: self.words.iter().map(|w| !w).collect(),
        };
        r.clear_tail();
        r
    }

    /// Lowest member.
    pub fn first(&self) -> Option<StateId> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| (i * BITS + w.trailing_zeros() as usize) as StateId)
    }

    /// Lowest member of `self ∩ other`, without materializing the intersection.
    pub fn first_common(&self, other: &StateSet) -> Option<StateId> {
        self.check_cap(other);
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(i, (a, b))| {
                let w = a & b;
                (w != 0).then(|| (i * BITS + w.trailing_zeros() as usize) as StateId)
            })
    }

    /// The `n`-th member in ascending order.
    pub fn nth(&self, mut n: usize) -> Option<StateId> {
        for (i, &w) in self.words.iter().enumerate() {
            let c = w.count_ones() as usize;
            if n < c {
                let mut w = w;
                for _ in 0..n {
                    w &= w - 1;
                }
                return Some((i * BITS + w.trailing_zeros() as usize) as StateId);
            }
            n -= c;
        }
        None
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<StateId> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = StateId;

    fn next(&mut self) -> Option<StateId> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some((self.idx * BITS + tz) as StateId);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a StateSet {
    type Item = StateId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

// Serialized as the sorted member list.
impl Serialize for StateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn full_respects_capacity() {
        let s = StateSet::full(70);
        assert_eq!(s.len(), 70);
        assert!(!s.contains(70));
        assert_eq!(s.complement().len(), 0);
        assert_eq!(StateSet::full(0).len(), 0);
    }

    #[test]
    fn nth_and_first() {
        let s = StateSet::from_iter_with(200, [3, 64, 65, 199]);
        assert_eq!(s.first(), Some(3));
        assert_eq!(s.nth(2), Some(65));
        assert_eq!(s.nth(3), Some(199));
        assert_eq!(s.nth(4), None);
        assert_eq!(StateSet::empty(10).first(), None);
    }

    fn arb_pair() -> impl Strategy<Value = (usize, Vec<u32>, Vec<u32>)> {
        (1usize..150).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(0..n as u32, 0..40),
                proptest::collection::vec(0..n as u32, 0..40),
            )
        })
    }

    proptest! {
        // Every operation agrees with the naive sorted-set version.
        #[test]
        fn agrees_with_btreeset((n, a, b) in arb_pair()) {
            let sa = StateSet::from_iter_with(n, a.iter().copied());
            let sb = StateSet::from_iter_with(n, b.iter().copied());
            let ta: BTreeSet<u32> = a.into_iter().collect();
            let tb: BTreeSet<u32> = b.into_iter().collect();
            prop_assert_eq!(sa.to_vec(), ta.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).to_vec(), ta.intersection(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.union(&sb).to_vec(), ta.union(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), ta.difference(&tb).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset(&sb), ta.is_subset(&tb));
            prop_assert_eq!(sa.intersects(&sb), !ta.is_disjoint(&tb));
            prop_assert_eq!(sa.is_empty(), ta.is_empty());
            prop_assert_eq!(sa.len(), ta.len());
            prop_assert_eq!(sa.first(), ta.first().copied());
            prop_assert_eq!(sa.first_common(&sb), ta.intersection(&tb).next().copied());
        }
    }
}
