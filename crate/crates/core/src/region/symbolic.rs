//! Infinite-state systems over the integers, given by code.
//!
//! Each system carries its predecessor transformer on [`IntervalRegion`]s and a
//! per-state successor function. Both are plain function pointers, so the
//! systems are constants rather than parsed models.

use crate::lts::LabelId;
use crate::relation::TwoPr;

use super::{IntervalRegion, Region, RegionAlgebra};

#[derive(Clone, Copy)]
pub struct SymbolicSystem {
    pub name: &'static str,
    pub labels: &'static [&'static str],
    pub universe: fn() -> IntervalRegion,
    pub initial: fn() -> IntervalRegion,
    /// `pre_a(r)` for each label.
    pub pre: fn(LabelId, &IntervalRegion) -> IntervalRegion,
    /// The finite successor list of a state.
    pub successors: fn(i64) -> Vec<i64>,
}

impl std::fmt::Debug for SymbolicSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolicSystem").field("name", &self.name).finish()
    }
}

impl SymbolicSystem {
    /// `pre_a` computed by enumeration over `window`, for checking [`Self::pre`].
    pub fn concrete_pre(
        &self,
        window: std::ops::RangeInclusive<i64>,
        r: &IntervalRegion,
    ) -> IntervalRegion {
        let univ = (self.universe)();
        IntervalRegion::from_points(
            window.filter(|&x| univ.contains(x) && (self.successors)(x).iter().any(|&y| r.contains(y))),
        )
    }
}

impl RegionAlgebra for SymbolicSystem {
    type Region = IntervalRegion;

    fn n_labels(&self) -> usize {
        self.labels.len()
    }

    fn universe(&self) -> IntervalRegion {
        (self.universe)()
    }

    fn initial(&self) -> IntervalRegion {
        (self.initial)()
    }

    fn singleton(&self, x: i64) -> IntervalRegion {
        IntervalRegion::point(x)
    }

    fn pre(&self, a: LabelId, r: &IntervalRegion) -> IntervalRegion {
        (self.pre)(a, r)
    }

    fn successor_witness(&self, s: i64, r: &IntervalRegion) -> Option<i64> {
        (self.successors)(s).into_iter().find(|&y| r.contains(y))
    }

    fn post_image(&self, s: i64) -> Option<IntervalRegion> {
        Some(IntervalRegion::from_points((self.successors)(s)))
    }
}

/// States `(−∞, 1]`, edges `n → n+1` for `n ≤ −2` and `0 → 1`, `I = {0}`.
pub fn left_chain() -> SymbolicSystem {
    SymbolicSystem {
        name: "left-chain",
        labels: &["a"],
        universe: || IntervalRegion::at_most(1),
        initial: || IntervalRegion::point(0),
        pre: |_, r| {
            let chain = r
                .intersection(&IntervalRegion::at_most(-1))
                .shift(-1);
            if r.contains(1) {
                chain.union(&IntervalRegion::point(0))
            } else {
                chain
            }
        },
        successors: |x| match x {
            x if x <= -2 => vec![x + 1],
            0 => vec![1],
            _ => vec![],
        },
    }
}

/// Initial preorder of [`left_chain`]: `R(0) = {0}`, `R(1) = {0, 1}` and
/// `R(n) = (−∞, −1]` for `n < 0`.
pub fn left_chain_preorder() -> TwoPr<IntervalRegion> {
    let neg = IntervalRegion::at_most(-1);
    let zero = IntervalRegion::point(0);
    let one = IntervalRegion::point(1);
    TwoPr::new(
        IntervalRegion::empty(),
        vec![zero.clone(), one.clone(), neg.clone()],
        vec![zero, one, neg],
        vec![vec![0], vec![0, 1], vec![2]],
    )
}

/// States `ℕ`, edges `i → 0` for every `i ≥ 1`, `I = {1}`.
pub fn collapse_to_zero() -> SymbolicSystem {
    SymbolicSystem {
        name: "collapse-to-zero",
        labels: &["a"],
        universe: || IntervalRegion::at_least(0),
        initial: || IntervalRegion::point(1),
        pre: |_, r| {
            if r.contains(0) {
                IntervalRegion::at_least(1)
            } else {
                IntervalRegion::empty()
            }
        },
        successors: |x| if x >= 1 { vec![0] } else { vec![] },
    }
}

/// The universal preorder on `ℕ`: `P = Q = {ℕ}`, `τ(ℕ) = {ℕ}`.
pub fn universal_on(universe: IntervalRegion) -> TwoPr<IntervalRegion> {
    TwoPr::new(
        IntervalRegion::empty(),
        vec![universe.clone()],
        vec![universe],
        vec![vec![0]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: LabelId = LabelId(0);

    fn windowed_equal(sys: &SymbolicSystem, r: &IntervalRegion) {
        let window = -50..=50;
        let sym = sys.pre(A, r).intersection(&IntervalRegion::closed(-50, 50));
        assert_eq!(sym, sys.concrete_pre(window, r), "pre({r}) on {}", sys.name);
    }

    #[test]
    fn left_chain_pre() {
        let sys = left_chain();
        assert_eq!(sys.pre(A, &IntervalRegion::at_most(-1)), IntervalRegion::at_most(-2));
        assert!(sys.pre(A, &IntervalRegion::empty()).is_empty());
        for r in [
            IntervalRegion::at_most(-1),
            IntervalRegion::point(1),
            IntervalRegion::closed(-5, 1),
            IntervalRegion::from_points([-30, -1, 0]),
        ] {
            windowed_equal(&sys, &r);
            // pre composed twice
            let twice = sys.pre(A, &sys.pre(A, &r)).intersection(&IntervalRegion::closed(-50, 50));
            let conc = sys.concrete_pre(-50..=50, &sys.concrete_pre(-52..=52, &r));
            assert_eq!(twice, conc);
        }
    }

    #[test]
    fn collapse_pre() {
        let sys = collapse_to_zero();
        assert_eq!(sys.pre(A, &IntervalRegion::point(0)), IntervalRegion::at_least(1));
        assert!(sys.pre(A, &IntervalRegion::empty()).is_empty());
        for r in [IntervalRegion::point(0), IntervalRegion::at_least(1), IntervalRegion::closed(0, 4)] {
            windowed_equal(&sys, &r);
        }
    }

    #[test]
    fn witnesses() {
        assert_eq!(left_chain().successor_witness(0, &IntervalRegion::point(1)), Some(1));
        assert_eq!(collapse_to_zero().successor_witness(3, &IntervalRegion::at_most(0)), Some(0));
        assert_eq!(collapse_to_zero().successor_witness(3, &IntervalRegion::empty()), None);
        assert_eq!(left_chain().successor_witness(-1, &IntervalRegion::all()), None);
    }

    #[test]
    fn demo_preorders_are_legal() {
        let t = left_chain_preorder();
        t.validate(&left_chain().universe()).unwrap();
        assert!(t.is_reflexive());
        let t = universal_on(collapse_to_zero().universe());
        t.validate(&collapse_to_zero().universe()).unwrap();
    }
}
