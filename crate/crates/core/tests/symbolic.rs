//! The interval engine checked against finite truncations.
//!
//! Simulation only looks at forward moves, so on a window closed under
//! successors the simulation preorder of the infinite system agrees with the
//! one of the truncated system.

use reachsim::engine::explicit::sim_fixpoint;
use reachsim::engine::twopr::run_twopr_symbolic;
use reachsim::engine::{EngineConfig, Strategy};
use reachsim::region::symbolic::{self, SymbolicSystem};
use reachsim::{IntervalRegion, Lts, Region, RegionAlgebra, Relation, StateSet, TwoPr};

/// The system restricted to `lo..=hi`, states renumbered from `lo`.
fn truncate(sys: &SymbolicSystem, lo: i64, hi: i64) -> Lts {
    let n = (hi - lo + 1) as usize;
    let mut edges = Vec::new();
    for x in lo..=hi {
        for y in (sys.successors)(x) {
            assert!((lo..=hi).contains(&y), "window is not closed under successors");
            edges.push(((x - lo) as u32, sys.labels[0], (y - lo) as u32));
        }
    }
    let init: Vec<u32> = (lo..=hi).filter(|&x| sys.initial().contains(x)).map(|x| (x - lo) as u32).collect();
    Lts::from_edges(n, &edges, &init).unwrap()
}

fn window_relation(t: &TwoPr<IntervalRegion>, lo: i64, hi: i64) -> Relation {
    let n = (hi - lo + 1) as usize;
    let w = IntervalRegion::closed(lo, hi);
    Relation::from_principals(
        (lo..=hi)
            .map(|x| {
                let u = t.tau_union(t.p_of(x).unwrap()).intersection(&w);
                StateSet::from_iter_with(n, (lo..=hi).filter(|&y| u.contains(y)).map(|y| (y - lo) as u32))
            })
            .collect(),
    )
}

fn check_window(sys: &SymbolicSystem, t0: TwoPr<IntervalRegion>, lo: i64, hi: i64) {
    let lts = truncate(sys, lo, hi);
    let ri = window_relation(&t0, lo, hi);
    let rsim = sim_fixpoint(&lts, &ri).unwrap();
    for s in Strategy::all(17) {
        let cfg = EngineConfig::with_strategy(s).traced().checked();
        let out = run_twopr_symbolic(sys, t0.clone(), [], &cfg).unwrap();
        assert!(out.is_final(), "{} did not terminate", sys.name);
        for (k, t) in out.trace.iter().enumerate() {
            t.validate(&sys.universe()).unwrap();
            let r = window_relation(t, lo, hi);
            assert!(rsim.is_subset(&r), "{} step {k}: R_sim is not below R", sys.name);
            assert!(r.is_subset(&ri), "{} step {k}: R is not below R_i", sys.name);
        }
        for &x in &out.sigma {
            assert!((lo..=hi).contains(&x));
            let xi = (x - lo) as u32;
            let mine = window_relation(&out.result, lo, hi);
            assert_eq!(mine.principal(xi), rsim.principal(xi), "{}: principal of {x}", sys.name);
        }
    }
}

#[test]
fn collapse_to_zero_on_a_window() {
    let sys = symbolic::collapse_to_zero();
    check_window(&sys, symbolic::universal_on(sys.universe()), 0, 40);
}

#[test]
fn left_chain_on_a_window() {
    let sys = symbolic::left_chain();
    check_window(&sys, symbolic::left_chain_preorder(), -40, 1);
}

#[test]
fn truncation_needs_a_refine_per_state() {
    use reachsim::engine::explicit::run_explicit;
    use reachsim::fixtures::collapse_truncation;
    let mut last = 0;
    for m in [5, 20, 80] {
        let (lts, ri) = collapse_truncation(m);
        let out = run_explicit(&lts, &ri, &lts.empty_set(), &EngineConfig::default()).unwrap();
        assert!(out.counters.refine as usize >= m - 2);
        assert!(out.counters.refine > last);
        last = out.counters.refine;
    }
}
