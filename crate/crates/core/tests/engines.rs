//! Engine results against the oracles on random systems.

mod common;

use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use reachsim::check::{check_partition, check_principals, check_twopr};
use reachsim::engine::explicit::{run_explicit, run_refalgo};
use reachsim::engine::partition::run_partition;
use reachsim::engine::twopr::{run_twopr, run_twopr_symbolic, TwoPrEngine};
use reachsim::engine::{BranchPolicy, EngineConfig, PickPolicy, Strategy};
use reachsim::oracle::GroundTruth;
use reachsim::{gen, Lts, Relation, StateSet, TwoPr};

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    (0..4usize, any::<u64>()).prop_map(|(k, seed)| Strategy::all(seed)[k])
}

fn system() -> impl proptest::strategy::Strategy<Value = (Lts, Relation)> {
    (1..=7usize, 1..=2usize, 0.0..0.4f64, 0.0..0.3f64, any::<u64>()).prop_map(|(n, k, d, pd, seed)| {
        (gen::gen_random(n, k, d, seed), gen::random_preorder(n, pd, seed.rotate_left(7)))
    })
}

fn twopr_blocks(t: &TwoPr) -> Vec<(StateSet, StateSet)> {
    t.p_handles().map(|b| (t.p_block(b).clone(), t.tau_union(b))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn explicit_meets_oracle((lts, ri) in system(), s in strategy(), with_init in any::<bool>()) {
        let truth = GroundTruth::compute(&lts, &ri).unwrap();
        let sigma0 = if with_init { lts.initial().clone() } else { lts.empty_set() };
        let out = run_explicit(&lts, &ri, &sigma0, &EngineConfig::with_strategy(s).checked()).unwrap();
        prop_assert!(out.is_final());
        let rep = check_principals(&truth, &out.result, &out.sigma);
        prop_assert!(rep.passed(), "{}", rep);
        prop_assert!(out.sigma.is_subset(&truth.reach));
        prop_assert!(sigma0.is_subset(&out.sigma));
    }

    #[test]
    fn partition_meets_oracle((lts, ri) in system(), s in strategy(), extra in any::<u64>()) {
        let truth = GroundTruth::compute(&lts, &ri).unwrap();
        let mut sigma0 = lts.initial().clone();
        for x in truth.reach.iter().filter(|&x| (extra >> (x % 64)) & 1 == 1) {
            sigma0.insert(x);
        }
        let out = run_partition(&lts, &ri, &sigma0, &EngineConfig::with_strategy(s).checked()).unwrap();
        prop_assert!(out.is_final());
        let rep = check_partition(&truth, &out.result, &out.sigma);
        prop_assert!(rep.passed(), "{}", rep);
    }

    #[test]
    fn twopr_meets_oracle((lts, ri) in system(), s in strategy()) {
        let truth = GroundTruth::compute(&lts, &ri).unwrap();
        let out = run_twopr(&lts, &ri, &lts.empty_set(), &EngineConfig::with_strategy(s).checked()).unwrap();
        prop_assert!(out.is_final());
        let rep = check_twopr(&truth, &twopr_blocks(&out.result), &out.sigma);
        prop_assert!(rep.passed(), "{}", rep);
        prop_assert!(out.result.validate(&lts.full_set()).is_ok());
    }

    #[test]
    fn counters_within_bounds((lts, ri) in system(), s in strategy()) {
        let n = lts.n_states() as u64;
        let bound = (ri.size() - lts.n_states()) as u64;
        let cfg = EngineConfig::with_strategy(s);
        let e = run_explicit(&lts, &ri, &lts.empty_set(), &cfg).unwrap().counters;
        let p = run_partition(&lts, &ri, lts.initial(), &cfg).unwrap().counters;
        let t = run_twopr(&lts, &ri, &lts.empty_set(), &cfg).unwrap().counters;
        for c in [e, p, t] {
            prop_assert!(c.search <= n, "{}", c);
            prop_assert!(c.refine <= bound, "{} > {}", c, bound);
        }
        prop_assert!(p.expand <= n);
    }

    /// Each state added to `σ` is initial or a successor of an earlier one.
    #[test]
    fn sigma_grows_along_transitions((lts, ri) in system(), s in strategy()) {
        let t0 = TwoPr::induce(&ri);
        let out = run_twopr_symbolic(&lts, t0, [], &EngineConfig::with_strategy(s)).unwrap();
        let mut seen = lts.empty_set();
        for &x in &out.sigma {
            prop_assert!(!seen.contains(x), "{} added twice", x);
            prop_assert!(lts.initial().contains(x) || lts.post(&seen).contains(x), "{} is not a successor", x);
            seen.insert(x);
        }
    }

    #[test]
    fn refalgo_restricts_to_the_simulation((lts, ri) in system(), s in strategy()) {
        let truth = GroundTruth::compute(&lts, &ri).unwrap();
        let out = run_refalgo(&lts, &ri, &truth.reach, &EngineConfig::with_strategy(s)).unwrap();
        for x in truth.reach.iter() {
            prop_assert_eq!(out.result.principal(x), truth.rsim.principal(x));
        }
    }

    #[test]
    fn property1_holds_on_traces((lts, ri) in system(), s in strategy()) {
        prop_assume!(lts.n_states() <= 6);
        let out = run_twopr(&lts, &ri, &lts.empty_set(), &EngineConfig::with_strategy(s).traced()).unwrap();
        let v = common::property1_violation(&TwoPr::induce(&ri), &out.trace);
        prop_assert!(v.is_none(), "{:?}", v);
    }

    /// After a refine on `(a, B, C)`, every `x ∈ B ∩ pre_a(C)` has principal
    /// `R(x) ∩ pre_a(R(c))` for `c ∈ C`, and no other principal moves.
    #[test]
    fn refine_matches_explicit_update((lts, ri) in system()) {
        let mut e = TwoPrEngine::new(&lts, TwoPr::induce(&ri), lts.initial().iter()).unwrap();
        for _ in 0..20 {
            let Some(&(a, b, c)) = e.v().iter().next() else { break };
            let before = e.twopr().to_relation();
            let xs = e.twopr().p_block(b).intersection(&lts.pre_a(reachsim::LabelId(a), e.twopr().p_block(c)));
            let c_rep = e.twopr().p_block(c).first().unwrap();
            let target = lts.pre_a(reachsim::LabelId(a), before.principal(c_rep));
            e.refine_step(a, b, c).unwrap();
            e.verify();
            let after = e.twopr().to_relation();
            for x in 0..lts.n_states() as u32 {
                let want = if xs.contains(x) {
                    before.principal(x).intersection(&target)
                } else {
                    before.principal(x).clone()
                };
                prop_assert_eq!(after.principal(x), &want, "state {}", x);
            }
        }
    }
}

#[test]
fn runs_repeat_exactly() {
    let lts = gen::gen_random(30, 2, 0.08, 11);
    let ri = gen::random_preorder(30, 0.05, 12);
    for s in Strategy::all(5) {
        let cfg = EngineConfig::with_strategy(s);
        let a = run_twopr(&lts, &ri, &lts.empty_set(), &cfg).unwrap();
        let b = run_twopr(&lts, &ri, &lts.empty_set(), &cfg).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.counters, b.counters);
        let a = run_partition(&lts, &ri, lts.initial(), &cfg).unwrap();
        let b = run_partition(&lts, &ri, lts.initial(), &cfg).unwrap();
        assert_eq!((a.result, a.counters), (b.result, b.counters));
    }
}

#[test]
fn cap_stops_early() {
    let (lts, ri) = reachsim::fixtures::collapse_truncation(50);
    let cfg = EngineConfig::with_strategy(Strategy::new(BranchPolicy::RefineFirst, PickPolicy::CanonicalMin, 0)).cap(2);
    let out = run_explicit(&lts, &ri, &lts.empty_set(), &cfg).unwrap();
    assert!(!out.is_final());
    assert_eq!(out.counters.iterations(), 2);
    let out = run_twopr(&lts, &ri, &lts.empty_set(), &cfg.clone().cap(1)).unwrap();
    assert!(!out.is_final());
    assert_eq!(out.counters.iterations(), 1);
}
