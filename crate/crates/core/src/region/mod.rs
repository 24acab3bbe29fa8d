//! Region algebras: the set operations the symbolic engine is written against.
//!
//! A region is an opaque value denoting a set of states. An algebra supplies
//! predecessor images, boolean operations, emptiness and successor witnesses
//! over its regions. Two instances ship with the crate:
//!
//! * [`StateSet`] over a finite [`Lts`](crate::lts::Lts);
//! * [`IntervalRegion`] over the code-defined integer systems in [`symbolic`].

mod interval;
mod state_set;
pub mod symbolic;

pub use interval::{Interval, IntervalRegion};
pub use state_set::StateSet;

use std::fmt::Debug;

use crate::lts::{LabelId, Lts, StateId};

/// Concrete-set semantics for a region type.
pub trait Region: Clone + PartialEq + Debug {
    type Elem: Copy + Ord + Debug;

    /// The empty region over the same carrier as `self`.
    fn empty_like(&self) -> Self;
    fn is_empty(&self) -> bool;
    fn contains(&self, x: Self::Elem) -> bool;
    fn intersection(&self, other: &Self) -> Self;
    fn difference(&self, other: &Self) -> Self;
    fn union(&self, other: &Self) -> Self;

    fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    fn intersects(&self, other: &Self) -> bool {
        !self.intersection(other).is_empty()
    }

    /// Deterministic representative of a non-empty region.
    fn pick(&self) -> Option<Self::Elem>;

    /// Seed-dependent representative of a non-empty region.
    fn pick_seeded(&self, seed: u64) -> Option<Self::Elem>;
}

pub type Elem<A> = <<A as RegionAlgebra>::Region as Region>::Elem;

/// A transition system presented through regions.
pub trait RegionAlgebra {
    type Region: Region;

    fn n_labels(&self) -> usize;
    fn universe(&self) -> Self::Region;
    fn initial(&self) -> Self::Region;
    fn singleton(&self, x: Elem<Self>) -> Self::Region;

    fn empty(&self) -> Self::Region {
        self.universe().empty_like()
    }

    fn labels(&self) -> Vec<LabelId> {
        (0..self.n_labels() as u32).map(LabelId).collect()
    }

    /// `⟦pre_a(r)⟧ = pre_a(⟦r⟧)`.
    fn pre(&self, a: LabelId, r: &Self::Region) -> Self::Region;

    /// Some element of `post(s) ∩ ⟦r⟧`, or `None` when the intersection is empty.
    fn successor_witness(&self, s: Elem<Self>, r: &Self::Region) -> Option<Elem<Self>>;

    /// The exact successor region of `s`, when the algebra can represent it.
    /// Engines use it to track `I ∪ post(σ)` as one region and fall back to
    /// [`successor_witness`](Self::successor_witness) otherwise.
    fn post_image(&self, _s: Elem<Self>) -> Option<Self::Region> {
        None
    }
}

impl Region for StateSet {
    type Elem = StateId;

    fn empty_like(&self) -> Self {
        StateSet::empty(self.capacity())
    }

    fn is_empty(&self) -> bool {
        StateSet::is_empty(self)
    }

    fn contains(&self, x: StateId) -> bool {
        StateSet::contains(self, x)
    }

    fn intersection(&self, other: &Self) -> Self {
        StateSet::intersection(self, other)
    }

    fn difference(&self, other: &Self) -> Self {
        StateSet::difference(self, other)
    }

    fn union(&self, other: &Self) -> Self {
        StateSet::union(self, other)
    }

    fn is_subset(&self, other: &Self) -> bool {
        StateSet::is_subset(self, other)
    }

    fn intersects(&self, other: &Self) -> bool {
        StateSet::intersects(self, other)
    }

    fn pick(&self) -> Option<StateId> {
        self.first()
    }

    fn pick_seeded(&self, seed: u64) -> Option<StateId> {
        let n = self.len();
        (n > 0).then(|| self.nth((seed % n as u64) as usize).unwrap())
    }
}

impl RegionAlgebra for Lts {
    type Region = StateSet;

    fn n_labels(&self) -> usize {
        Lts::n_labels(self)
    }

    fn universe(&self) -> StateSet {
        self.full_set()
    }

    fn initial(&self) -> StateSet {
        Lts::initial(self).clone()
    }

    fn singleton(&self, x: StateId) -> StateSet {
        StateSet::singleton(self.n_states(), x)
    }

    fn pre(&self, a: LabelId, r: &StateSet) -> StateSet {
        self.pre_a(a, r)
    }

    fn successor_witness(&self, s: StateId, r: &StateSet) -> Option<StateId> {
        self.post_of(s).filter(|&y| r.contains(y)).min()
    }

    fn post_image(&self, s: StateId) -> Option<StateSet> {
        Some(StateSet::from_iter_with(self.n_states(), self.post_of(s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_witness() {
        let lts = Lts::from_edges(4, &[(0, "a", 2), (0, "b", 3), (1, "a", 1)], &[0]).unwrap();
        let r = StateSet::from_iter_with(4, [1, 3]);
        assert_eq!(lts.successor_witness(0, &r), Some(3));
        assert_eq!(lts.successor_witness(2, &r), None);
        assert_eq!(lts.successor_witness(0, &lts.empty_set()), None);
    }
}
