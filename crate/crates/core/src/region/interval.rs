//! Finite unions of integer intervals, possibly unbounded.

use std::fmt;

use serde::{Serialize, Serializer};

use super::Region;

/// Closed integer interval `[lo, hi]`; `None` bounds are infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Interval {
    pub const fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Interval { lo, hi }
    }

    fn key(self) -> (i128, i128) {
        (
            self.lo.map_or(i128::MIN, i128::from),
            self.hi.map_or(i128::MAX, i128::from),
        )
    }

    fn from_key((lo, hi): (i128, i128)) -> Self {
        Interval {
            lo: (lo != i128::MIN).then_some(lo as i64),
            hi: (hi != i128::MAX).then_some(hi as i64),
        }
    }
}

/// A set of integers kept in canonical form: sorted, non-empty, pairwise
/// non-overlapping and non-adjacent intervals. Structural equality is
/// therefore set equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalRegion {
    parts: Vec<Interval>,
}

impl IntervalRegion {
    pub fn empty() -> Self {
        IntervalRegion { parts: Vec::new() }
    }

    pub fn all() -> Self {
        IntervalRegion {
            parts: vec![Interval::new(None, None)],
        }
    }

    pub fn point(x: i64) -> Self {
        Self::closed(x, x)
    }

    pub fn closed(lo: i64, hi: i64) -> Self {
        Self::from_intervals([Interval::new(Some(lo), Some(hi))])
    }

    /// `[lo, +∞)`.
    pub fn at_least(lo: i64) -> Self {
        Self::from_intervals([Interval::new(Some(lo), None)])
    }

    /// `(−∞, hi]`.
    pub fn at_most(hi: i64) -> Self {
        Self::from_intervals([Interval::new(None, Some(hi))])
    }

    pub fn from_points(points: impl IntoIterator<Item = i64>) -> Self {
        Self::from_intervals(points.into_iter().map(|p| Interval::new(Some(p), Some(p))))
    }

    /// Canonicalizes an arbitrary list of intervals; empty intervals are dropped.
    pub fn from_intervals(parts: impl IntoIterator<Item = Interval>) -> Self {
        Self::from_keys(parts.into_iter().map(Interval::key).collect())
    }

    fn from_keys(mut keys: Vec<(i128, i128)>) -> Self {
        keys.retain(|&(l, h)| l <= h);
        keys.sort_unstable();
        let mut out: Vec<(i128, i128)> = Vec::with_capacity(keys.len());
        for (l, h) in keys {
            match out.last_mut() {
                Some(last) if l <= last.1.saturating_add(1) => last.1 = last.1.max(h),
                _ => out.push((l, h)),
            }
        }
        IntervalRegion {
            parts: out.into_iter().map(Interval::from_key).collect(),
        }
    }

    fn keys(&self) -> impl Iterator<Item = (i128, i128)> + '_ {
        self.parts.iter().map(|i| i.key())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_canonical(&self) -> bool {
        *self == Self::from_intervals(self.parts.iter().copied())
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut next = i128::MIN;
        let mut done = false;
        for (l, h) in self.keys() {
            if l > next {
                out.push((next, l - 1));
            }
            if h == i128::MAX {
                done = true;
                break;
            }
            next = h + 1;
        }
        if !done {
            out.push((next, i128::MAX));
        }
        Self::from_keys(out)
    }

    /// Translates every member by `delta`.
    pub fn shift(&self, delta: i64) -> Self {
        let d = i128::from(delta);
        let mv = |v: i128| {
            if v == i128::MIN || v == i128::MAX {
                v
            } else {
                v + d
            }
        };
        Self::from_keys(self.keys().map(|(l, h)| (mv(l), mv(h))).collect())
    }

    /// Members in ascending order when the region is bounded; `None` otherwise.
    pub fn members(&self) -> Option<Vec<i64>> {
        let mut out = Vec::new();
        for p in &self.parts {
            let (Some(l), Some(h)) = (p.lo, p.hi) else {
                return None;
            };
            out.extend(l..=h);
        }
        Some(out)
    }

    fn intersect_keys(&self, other: &Self) -> Vec<(i128, i128)> {
        let a: Vec<_> = self.keys().collect();
        let b: Vec<_> = other.keys().collect();
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        out
    }
}

impl Region for IntervalRegion {
    type Elem = i64;

    fn empty_like(&self) -> Self {
        IntervalRegion::empty()
    }

    fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    fn contains(&self, x: i64) -> bool {
        let x = i128::from(x);
        self.keys().any(|(l, h)| l <= x && x <= h)
    }

    fn intersection(&self, other: &Self) -> Self {
        Self::from_keys(self.intersect_keys(other))
    }

    fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    fn union(&self, other: &Self) -> Self {
        Self::from_keys(self.keys().chain(other.keys()).collect())
    }

    /// Lowest member when bounded below; otherwise the upper end of the first
    /// interval; 0 for the whole line.
    fn pick(&self) -> Option<i64> {
        let first = self.parts.first()?;
        Some(first.lo.or(first.hi).unwrap_or(0))
    }

    fn pick_seeded(&self, seed: u64) -> Option<i64> {
        if self.parts.is_empty() {
            return None;
        }
        let p = self.parts[(seed % self.parts.len() as u64) as usize];
        let single = IntervalRegion { parts: vec![p] };
        single.pick()
    }
}

impl fmt::Debug for IntervalRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntervalRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            match (p.lo, p.hi) {
                (Some(l), Some(h)) if l == h => write!(f, "{{{l}}}")?,
                (Some(l), Some(h)) => write!(f, "[{l}, {h}]")?,
                (Some(l), None) => write!(f, "[{l}, +∞)")?,
                (None, Some(h)) => write!(f, "(-∞, {h}]")?,
                (None, None) => write!(f, "(-∞, +∞)")?,
            }
        }
        Ok(())
    }
}

/// Serialized as a list of `[lo, hi]` pairs with `null` for infinities.
impl Serialize for IntervalRegion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.parts.iter().map(|p| (p.lo, p.hi)))
    }
}
