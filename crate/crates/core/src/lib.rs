//! Reachable simulation preorder and partition on labeled transition systems.
//!
//! The simulation preorder of a system relates `x` to every state that can
//! match all of `x`'s moves. This crate computes the part of it that concerns
//! reachable states while exploring the state space, so unreachable states
//! never need to be fully refined.
//!
//! Three engines are provided:
//!
//! * [`engine::explicit`] keeps one principal per state and interleaves
//!   reachability search with principal refinement;
//! * [`engine::partition`] adds frontier expansion and returns exactly the
//!   reachable blocks of the simulation partition;
//! * [`engine::twopr`] works on block pairs `⟨P, τ, Q⟩` through a
//!   [`region::RegionAlgebra`], so it runs on finite systems and on the
//!   interval-encoded infinite systems of [`region::symbolic`] alike.
//!
//! [`oracle`] holds deliberately naive reference computations.
//!
//! ```
//! use reachsim::{fixtures, engine::{explicit, EngineConfig}};
//!
//! let (lts, rel) = fixtures::example4();
//! let out = explicit::run_explicit(&lts, &rel, &lts.empty_set(), &EngineConfig::default()).unwrap();
//! assert_eq!(out.sigma.to_vec(), vec![0]);
//! assert_eq!(out.result.principal(1).to_vec(), vec![0, 1]);
//! ```

pub mod bench;
pub mod check;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod lts;
pub mod oracle;
pub mod region;
pub mod relation;

pub use error::{Error, Result};
pub use lts::{LabelId, Lts, StateId};
pub use region::{IntervalRegion, Region, RegionAlgebra, StateSet};
pub use relation::{Partition, Relation, TwoPr};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/concepts.md")]
    mod concepts {}
    #[doc = include_str!("../../../book/src/engines.md")]
    mod engines {}
    #[doc = include_str!("../../../book/src/symbolic.md")]
    mod symbolic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
