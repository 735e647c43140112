//! Fixed-width bitsets over doctor indices.

use std::cmp::Ordering;
use std::fmt;

/// Largest number of doctors a [`DoctorSet`] can address.
pub const MAX_DOCTORS: usize = 128;

/// A set of doctor indices stored as a 128-bit mask.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct DoctorSet(u128);

impl DoctorSet {
    pub const EMPTY: DoctorSet = DoctorSet(0);

    pub const fn from_bits(bits: u128) -> Self {
        DoctorSet(bits)
    }

    pub const fn bits(self) -> u128 {
        self.0
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_DOCTORS, "at most {MAX_DOCTORS} doctors supported");
        if n == MAX_DOCTORS {
            DoctorSet(u128::MAX)
        } else {
            DoctorSet((1u128 << n) - 1)
        }
    }

    pub fn singleton(d: usize) -> Self {
        DoctorSet::EMPTY.with(d)
    }

    pub fn contains(self, d: usize) -> bool {
        d < MAX_DOCTORS && self.0 >> d & 1 == 1
    }

    pub fn insert(&mut self, d: usize) {
        assert!(d < MAX_DOCTORS, "doctor index {d} out of range");
        self.0 |= 1 << d;
    }

    pub fn remove(&mut self, d: usize) {
        if d < MAX_DOCTORS {
            self.0 &= !(1 << d);
        }
    }

    #[must_use]
    pub fn with(mut self, d: usize) -> Self {
        self.insert(d);
        self
    }

    #[must_use]
    pub fn without(mut self, d: usize) -> Self {
        self.remove(d);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: DoctorSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[must_use]
    pub fn union(self, other: DoctorSet) -> Self {
        DoctorSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: DoctorSet) -> Self {
        DoctorSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: DoctorSet) -> Self {
        DoctorSet(self.0 & !other.0)
    }

    /// Largest member, if any.
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros() as usize)
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, starting from the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Lexicographic order on the ascending member lists, so `{0,3} < {1,2}`
    /// and `{0} < {0,3}`.
    pub fn lex_cmp(self, other: DoctorSet) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff.trailing_zeros();
        // Members above `low` in the set that lacks it decide the order.
        let above = |x: u128| if low == 127 { 0 } else { x >> (low + 1) };
        if self.0 >> low & 1 == 1 {
            if above(other.0) != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        } else if above(self.0) != 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl FromIterator<usize> for DoctorSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = DoctorSet::EMPTY;
        for d in iter {
            s.insert(d);
        }
        s
    }
}

impl<'a> FromIterator<&'a usize> for DoctorSet {
    fn from_iter<I: IntoIterator<Item = &'a usize>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl fmt::Debug for DoctorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter(u128);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let d = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(d)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

/// Submask enumeration in increasing numeric order.
pub struct Subsets {
    mask: u128,
    next: Option<u128>,
}

impl Iterator for Subsets {
    type Item = DoctorSet;

    fn next(&mut self) -> Option<DoctorSet> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(DoctorSet(cur))
    }
}
