//! The preorder-based engine, its refinement-only specialisation, and the
//! plain greatest-simulation loop.
//!
//! The relation is kept as one principal `R(x)` per state. The guard sets
//!
//! ```text
//! U = { R(x) | R(x) ∩ σ = ∅, R(x) ∩ (I ∪ post(σ)) ≠ ∅ }
//! V = { (a, x, x') | R(x) ∩ σ ≠ ∅, x -a-> x', R(x) ⊄ pre_a(R(x')) }
//! ```
//!
//! are maintained incrementally: a Search only touches principals containing
//! the new state or one of its successors, and a Refine of `R(x)` only
//! re-examines the transitions entering and leaving `x`. `U` is stored as the
//! set of states whose principal belongs to it.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lts::{LabelId, Lts, StateId};
use crate::region::StateSet;
use crate::relation::Relation;

use super::{Branch, Budget, Chooser, Counters, EngineConfig, EngineOutcome, Stop};

/// Greatest simulation below `r0`: refines while some `x -a-> x'` has
/// `R(x) ⊄ pre_a(R(x'))`.
pub fn sim_fixpoint(lts: &Lts, r0: &Relation) -> Result<Relation> {
    check_carrier(lts, r0)?;
    r0.require_reflexive()?;
    let mut core = Explicit::new(lts, r0.clone(), lts.full_set(), false);
    let mut counters = Counters::default();
    let mut budget = Budget::new(&EngineConfig::default().cap(u64::MAX));
    let mut chooser = Chooser::new(Default::default());
    core.drive(&mut chooser, &mut budget, &mut counters, None, &mut Vec::new(), false);
    Ok(Relation::from_principals(core.r))
}

/// Interleaves reachability search with principal refinement, starting from
/// the preorder `r_init` and the known-reachable states `sigma_init`.
pub fn run_explicit(
    lts: &Lts,
    r_init: &Relation,
    sigma_init: &StateSet,
    cfg: &EngineConfig,
) -> Result<EngineOutcome<Relation>> {
    check_carrier(lts, r_init)?;
    r_init.require_preorder()?;
    check_sigma_reachable(lts, sigma_init)?;
    Ok(run_core(lts, r_init, sigma_init, true, cfg, Counters::default(), None))
}

/// Refinement only, with `σ = post*(I)` given. The input relation must be
/// reflexive; it need not be transitive.
pub fn run_refalgo(
    lts: &Lts,
    r: &Relation,
    sigma: &StateSet,
    cfg: &EngineConfig,
) -> Result<EngineOutcome<Relation>> {
    check_carrier(lts, r)?;
    r.require_reflexive()?;
    if sigma != &lts.post_star() {
        return Err(Error::Contract("σ must equal post*(I)".into()));
    }
    Ok(run_core(lts, r, sigma, false, cfg, Counters::default(), None))
}

pub(crate) fn check_carrier(lts: &Lts, r: &Relation) -> Result<()> {
    if r.n_states() != lts.n_states() {
        return Err(Error::Mismatch(format!(
            "relation over {} states, system has {}",
            r.n_states(),
            lts.n_states()
        )));
    }
    Ok(())
}

pub(crate) fn check_sigma_reachable(lts: &Lts, sigma: &StateSet) -> Result<()> {
    if sigma.capacity() != lts.n_states() {
        return Err(Error::Mismatch("σ over a different carrier".into()));
    }
    match sigma.difference(&lts.post_star()).first() {
        Some(x) => Err(Error::SigmaNotReachable(x)),
        None => Ok(()),
    }
}

/// Shared by the public entry points and the partition engine's handoff.
/// `budget` carries the caller's remaining cap when continuing a run.
pub(crate) fn run_core(
    lts: &Lts,
    r: &Relation,
    sigma: &StateSet,
    search: bool,
    cfg: &EngineConfig,
    mut counters: Counters,
    budget: Option<&mut Budget>,
) -> EngineOutcome<Relation> {
    let mut own_budget;
    let budget = match budget {
        Some(b) => b,
        None => {
            own_budget = Budget::new(cfg);
            &mut own_budget
        }
    };
    let checks = cfg.check_invariants.then(|| Checks {
        rsim: sim_fixpoint(lts, r).expect("reflexive input").into_principals(),
        r_init: r.principals().to_vec(),
        sigma_init: sigma.clone(),
        reach: lts.post_star(),
    });
    let mut core = Explicit::new(lts, r.clone(), sigma.clone(), search);
    let mut chooser = Chooser::new(cfg.strategy);
    let mut trace = Vec::new();
    let stop = core.drive(
        &mut chooser,
        budget,
        &mut counters,
        checks.as_ref(),
        &mut trace,
        cfg.record_trace,
    );
    EngineOutcome {
        result: Relation::from_principals(core.r),
        sigma: core.sigma,
        counters,
        elapsed: budget.elapsed(),
        stop,
        trace,
    }
}

struct Checks {
    rsim: Vec<StateSet>,
    r_init: Vec<StateSet>,
    sigma_init: StateSet,
    reach: StateSet,
}

struct Explicit<'a> {
    lts: &'a Lts,
    n: usize,
    r: Vec<StateSet>,
    sigma: StateSet,
    /// `I ∪ post(σ)`.
    frontier: StateSet,
    /// `R(x) ∩ σ ≠ ∅`.
    reached: Vec<bool>,
    u: BTreeSet<StateId>,
    v: BTreeSet<(u32, StateId, StateId)>,
    /// `pre_a(R(y))` at index `a·n + y`, dropped whenever `R(y)` changes.
    pre_cache: Vec<Option<StateSet>>,
    search: bool,
}

impl<'a> Explicit<'a> {
    fn new(lts: &'a Lts, r: Relation, sigma: StateSet, search: bool) -> Self {
        let n = lts.n_states();
        let r = r.into_principals();
        let mut frontier = lts.post(&sigma);
        frontier.union_with(lts.initial());
        let reached = r.iter().map(|p| p.intersects(&sigma)).collect();
        let mut e = Explicit {
            lts,
            n,
            r,
            sigma,
            frontier,
            reached,
            u: BTreeSet::new(),
            v: BTreeSet::new(),
            pre_cache: vec![None; lts.n_labels() * n],
            search,
        };
        for x in 0..n as StateId {
            e.update_u(x);
            e.recheck_source(x);
        }
        e
    }

    fn pre_index(&mut self, a: u32, y: StateId) -> usize {
        let idx = a as usize * self.n + y as usize;
        if self.pre_cache[idx].is_none() {
            self.pre_cache[idx] = Some(self.lts.pre_a(LabelId(a), &self.r[y as usize]));
        }
        idx
    }

    fn check_triple(&mut self, a: u32, x: StateId, y: StateId) {
        let unstable = self.reached[x as usize] && {
            let idx = self.pre_index(a, y);
            !self.r[x as usize].is_subset(self.pre_cache[idx].as_ref().unwrap())
        };
        if unstable {
            self.v.insert((a, x, y));
        } else {
            self.v.remove(&(a, x, y));
        }
    }

    fn recheck_source(&mut self, x: StateId) {
        let lts = self.lts;
        for a in lts.label_ids() {
            for &y in lts.successors(a, x) {
                self.check_triple(a.0, x, y);
            }
        }
    }

    fn recheck_target(&mut self, y: StateId) {
        let lts = self.lts;
        for a in lts.label_ids() {
            for &w in lts.predecessors(a, y) {
                self.check_triple(a.0, w, y);
            }
        }
    }

    fn update_u(&mut self, x: StateId) {
        let xi = x as usize;
        if self.search && !self.reached[xi] && self.r[xi].intersects(&self.frontier) {
            self.u.insert(x);
        } else {
            self.u.remove(&x);
        }
    }

    fn do_search(&mut self, s: StateId) {
        debug_assert!(!self.sigma.contains(s));
        self.sigma.insert(s);
        let fresh: Vec<StateId> = self
            .lts
            .post_of(s)
            .filter(|&y| self.frontier.insert(y))
            .collect();
        for x in 0..self.n as StateId {
            let xi = x as usize;
            if self.reached[xi] {
                continue;
            }
            if self.r[xi].contains(s) {
                self.reached[xi] = true;
                self.u.remove(&x);
                self.recheck_source(x);
            } else if self.search && fresh.iter().any(|&y| self.r[xi].contains(y)) {
                self.u.insert(x);
            }
        }
    }

    fn do_refine(&mut self, a: u32, x: StateId, y: StateId) {
        let idx = self.pre_index(a, y);
        let pre = self.pre_cache[idx].take().unwrap();
        let before = self.r[x as usize].len();
        self.r[x as usize].intersect_with(&pre);
        self.pre_cache[idx] = Some(pre);
        debug_assert!(self.r[x as usize].len() < before, "refine must shrink R(x)");
        for b in 0..self.lts.n_labels() {
            self.pre_cache[b * self.n + x as usize] = None;
        }
        self.reached[x as usize] = self.r[x as usize].intersects(&self.sigma);
        self.update_u(x);
        self.recheck_source(x);
        self.recheck_target(x);
    }

    fn drive(
        &mut self,
        chooser: &mut Chooser,
        budget: &mut Budget,
        counters: &mut Counters,
        checks: Option<&Checks>,
        trace: &mut Vec<Relation>,
        record: bool,
    ) -> Stop {
        loop {
            if let Some(c) = checks {
                self.verify(c);
            }
            let can_s = !self.u.is_empty();
            let can_r = !self.v.is_empty();
            if !can_s && !can_r {
                return Stop::Done;
            }
            if let Some(stop) = budget.exhausted(counters) {
                return stop;
            }
            match chooser.branch(can_s, can_r) {
                Branch::Search => {
                    let x = chooser.pick_from(&self.u).unwrap();
                    let cands = self.r[x as usize].intersection(&self.frontier);
                    let s = chooser.pick_state(&cands).unwrap();
                    self.do_search(s);
                    counters.search += 1;
                }
                Branch::Refine => {
                    let (a, x, y) = chooser.pick_from(&self.v).unwrap();
                    self.do_refine(a, x, y);
                    counters.refine += 1;
                }
            }
            if record {
                trace.push(Relation::from_principals(self.r.clone()));
            }
        }
    }

    /// Recomputes invariants and guard sets from their definitions.
    fn verify(&self, c: &Checks) {
        let lts = self.lts;
        for x in 0..self.n {
            assert!(
                c.rsim[x].is_subset(&self.r[x]) && self.r[x].is_subset(&c.r_init[x]),
                "R_sim(x) ⊆ R(x) ⊆ R_i(x) violated at {x}"
            );
            assert!(self.r[x].contains(x as StateId), "x ∈ R(x) violated at {x}");
        }
        assert!(
            c.sigma_init.is_subset(&self.sigma) && self.sigma.is_subset(&c.reach),
            "σ_i ⊆ σ ⊆ post*(I) violated"
        );
        let mut frontier = lts.post(&self.sigma);
        frontier.union_with(lts.initial());
        let u: BTreeSet<StateSet> = if self.search {
            self.r
                .iter()
                .filter(|p| !p.intersects(&self.sigma) && p.intersects(&frontier))
                .cloned()
                .collect()
        } else {
            BTreeSet::new()
        };
        let ours: BTreeSet<StateSet> = self.u.iter().map(|&x| self.r[x as usize].clone()).collect();
        assert_eq!(ours, u, "incremental U differs from its definition");
        let v: BTreeSet<(u32, StateId, StateId)> = lts
            .transitions()
            .into_iter()
            .filter(|&(x, a, y)| {
                self.r[x as usize].intersects(&self.sigma)
                    && !self.r[x as usize].is_subset(&lts.pre_a(a, &self.r[y as usize]))
            })
            .map(|(x, a, y)| (a.0, x, y))
            .collect();
        assert_eq!(self.v, v, "incremental V differs from its definition");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Strategy;
    use crate::fixtures;

    fn set(n: usize, xs: &[StateId]) -> StateSet {
        StateSet::from_iter_with(n, xs.iter().copied())
    }

    #[test]
    fn sim_on_self_loop_pair() {
        let (lts, ri) = fixtures::example1();
        let r = sim_fixpoint(&lts, &ri).unwrap();
        assert_eq!(r.principal(0), &set(2, &[0, 1]));
        assert_eq!(r.principal(1), &set(2, &[1]));
    }

    #[test]
    fn sim_without_transitions_is_identity_map() {
        let lts = Lts::new(3, vec![], Vec::<(StateId, LabelId, StateId)>::new(), [0]).unwrap();
        let r0 = Relation::from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 2)]);
        assert_eq!(sim_fixpoint(&lts, &r0).unwrap(), r0);
    }

    #[test]
    fn sim_rejects_non_reflexive() {
        let (lts, _) = fixtures::example1();
        let r0 = Relation::from_pairs(2, [(0, 0)]);
        assert!(matches!(sim_fixpoint(&lts, &r0), Err(Error::NotReflexive(1))));
    }

    #[test]
    fn stable_input_keeps_relation() {
        let (lts, ri) = fixtures::example3();
        for s in Strategy::all(3) {
            let out = run_explicit(&lts, &ri, &lts.empty_set(), &EngineConfig::with_strategy(s).checked()).unwrap();
            assert!(out.is_final());
            assert_eq!(out.result, ri);
            assert_eq!(out.sigma, set(2, &[0]));
            assert_eq!(out.counters.refine, 0);
        }
    }

    #[test]
    fn isolated_state_keeps_large_principal() {
        let (lts, ri) = fixtures::example4();
        let out = run_explicit(&lts, &ri, &lts.empty_set(), &EngineConfig::default().checked()).unwrap();
        assert_eq!(out.result.principal(0), &set(2, &[0]));
        assert_eq!(out.result.principal(1), &set(2, &[0, 1]));
        assert_eq!(out.sigma, set(2, &[0]));
    }

    #[test]
    fn unreachable_sigma_rejected() {
        let (lts, ri) = fixtures::example4();
        let err = run_explicit(&lts, &ri, &set(2, &[1]), &EngineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SigmaNotReachable(1)));
    }

    #[test]
    fn non_preorder_rejected() {
        let (lts, _) = fixtures::example4();
        let r = Relation::from_pairs(2, [(0, 0), (1, 1), (0, 1), (1, 0), (1, 1)]).closure();
        assert!(run_explicit(&lts, &r, &lts.empty_set(), &EngineConfig::default()).is_ok());
        let bad = Relation::from_pairs(2, [(0, 0)]);
        assert!(run_explicit(&lts, &bad, &lts.empty_set(), &EngineConfig::default()).is_err());
    }

    #[test]
    fn refalgo_finishes_handoff_state() {
        // state reached by the partition engine before it hands off
        let (lts, ri) = fixtures::example6();
        let sigma = set(4, &[0, 2]);
        let out = run_refalgo(&lts, &ri, &sigma, &EngineConfig::default().checked()).unwrap();
        assert_eq!(out.result.principal(1), &set(4, &[1]));
        assert_eq!(out.result.principal(3), &set(4, &[3]));
        assert_eq!(out.sigma, sigma);
    }

    #[test]
    fn refalgo_on_stable_relation_is_idle() {
        let (lts, ri) = fixtures::example1();
        let rsim = sim_fixpoint(&lts, &ri).unwrap();
        let out = run_refalgo(&lts, &rsim, &lts.post_star(), &EngineConfig::default()).unwrap();
        assert_eq!(out.counters.refine, 0);
        assert!(run_refalgo(&lts, &rsim, &lts.empty_set(), &EngineConfig::default()).is_err());
    }

    #[test]
    fn cap_flags_outcome() {
        let (lts, ri) = fixtures::collapse_truncation(50);
        let out = run_explicit(&lts, &ri, &lts.empty_set(), &EngineConfig::default().cap(5)).unwrap();
        assert_eq!(out.stop, Stop::Cap);
        assert_eq!(out.counters.iterations(), 5);
    }

    #[test]
    fn trace_has_one_entry_per_iteration() {
        let (lts, ri) = fixtures::example6();
        let out = run_explicit(&lts, &ri, &lts.empty_set(), &EngineConfig::default().traced()).unwrap();
        assert_eq!(out.trace.len() as u64, out.counters.iterations());
    }
}
