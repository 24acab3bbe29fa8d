//! The reachable-partition engine.
//!
//! Principals here count as reachable only when some state of `σ` generates
//! them, so the guard sets are
//!
//! ```text
//! U = { x | no s ∈ σ has R(x) = R(s), R(x) ∩ post(σ) ≠ ∅ }
//! V = { (a, x, x') | some s ∈ σ has R(x) = R(s), x -a-> x', R(x) ⊄ pre_a(R(x')) }
//! ```
//!
//! A Search that finds nothing new to add records `x` in `U_bad`. Once every
//! state of `U` is known to be useless and `V` is empty, an Expand step adds
//! all of `post(σ)`, or, when `σ` is already closed, hands the relation to the
//! refinement-only loop of [`explicit`](super::explicit).
//!
//! The guard sets are recomputed from their definitions at every iteration.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::lts::{Lts, StateId};
use crate::region::StateSet;
use crate::relation::Relation;

use super::explicit::{check_carrier, check_sigma_reachable, run_core, sim_fixpoint};
use super::{Branch, Budget, Chooser, Counters, EngineConfig, EngineOutcome, Stop};

/// The mutable part of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionEngineState {
    pub r: Relation,
    pub sigma: StateSet,
    pub u_bad: StateSet,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Guards {
    pub u: BTreeSet<StateId>,
    pub v: BTreeSet<(u32, StateId, StateId)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandResult {
    /// `σ` grew by `post(σ) ∖ σ`.
    Grew,
    /// `post(σ) ⊆ σ`: the run continues with refinement only.
    Handoff,
}

impl PartitionEngineState {
    pub fn new(r: Relation, sigma: StateSet) -> Self {
        let u_bad = StateSet::empty(sigma.capacity());
        PartitionEngineState { r, sigma, u_bad }
    }

    pub fn guards(&self, lts: &Lts) -> Guards {
        let generated: HashSet<&StateSet> = self.sigma.iter().map(|s| self.r.principal(s)).collect();
        let post = lts.post(&self.sigma);
        let mut g = Guards::default();
        let mut pre_cache: Vec<Option<StateSet>> = vec![None; lts.n_labels() * lts.n_states()];
        for x in 0..lts.n_states() as StateId {
            let rx = self.r.principal(x);
            if !generated.contains(rx) {
                if rx.intersects(&post) {
                    g.u.insert(x);
                }
                continue;
            }
            for a in lts.label_ids() {
                for &y in lts.successors(a, x) {
                    let slot = &mut pre_cache[a.index() * lts.n_states() + y as usize];
                    let pre = slot.get_or_insert_with(|| lts.pre_a(a, self.r.principal(y)));
                    if !rx.is_subset(pre) {
                        g.v.insert((a.0, x, y));
                    }
                }
            }
        }
        g
    }

    /// The Expand branch. Fails unless `U = U_bad ≠ ∅` and `V = ∅`.
    pub fn expand_step(&mut self, lts: &Lts) -> Result<ExpandResult> {
        let g = self.guards(lts);
        let u = StateSet::from_iter_with(lts.n_states(), g.u.iter().copied());
        if u.is_empty() || u != self.u_bad || !g.v.is_empty() {
            return Err(Error::Contract("Expand requires U = U_bad ≠ ∅ and V = ∅".into()));
        }
        Ok(self.expand_unchecked(lts))
    }

    pub(crate) fn expand_unchecked(&mut self, lts: &Lts) -> ExpandResult {
        let post = lts.post(&self.sigma);
        if post.is_subset(&self.sigma) {
            return ExpandResult::Handoff;
        }
        self.sigma.union_with(&post);
        self.u_bad = StateSet::empty(lts.n_states());
        ExpandResult::Grew
    }

    fn search_on(&mut self, lts: &Lts, x: StateId, chooser: &mut Chooser) -> bool {
        let mut s = self.r.principal(x).intersection(&lts.post(&self.sigma));
        s.subtract_with(&self.sigma);
        match chooser.pick_state(&s) {
            Some(s) => {
                self.sigma.insert(s);
                self.u_bad = StateSet::empty(lts.n_states());
                true
            }
            None => {
                self.u_bad.insert(x);
                false
            }
        }
    }
}

/// Runs the engine from the preorder `r_init` and `sigma_init ⊇ I`.
/// On return the blocks of states with equal principals that meet `σ` are
/// exactly the reachable blocks of the simulation partition, restricted to
/// reachable states.
pub fn run_partition(
    lts: &Lts,
    r_init: &Relation,
    sigma_init: &StateSet,
    cfg: &EngineConfig,
) -> Result<EngineOutcome<Relation>> {
    check_carrier(lts, r_init)?;
    r_init.require_preorder()?;
    check_sigma_reachable(lts, sigma_init)?;
    if let Some(x) = lts.initial().difference(sigma_init).first() {
        return Err(Error::InitialNotInSigma(x));
    }
    let checks = cfg.check_invariants.then(|| Checks {
        rsim: sim_fixpoint(lts, r_init).expect("preorder input"),
        reach: lts.post_star(),
    });

    let mut st = PartitionEngineState::new(r_init.clone(), sigma_init.clone());
    let mut chooser = Chooser::new(cfg.strategy);
    let mut budget = Budget::new(cfg);
    let mut counters = Counters::default();
    let mut trace = Vec::new();
    let stop = loop {
        let g = st.guards(lts);
        if let Some(c) = &checks {
            c.verify(lts, r_init, sigma_init, &st, &g);
        }
        let open: BTreeSet<StateId> = g.u.iter().copied().filter(|&x| !st.u_bad.contains(x)).collect();
        let can_s = !open.is_empty();
        let can_r = !g.v.is_empty();
        let can_e = !can_s && !g.u.is_empty() && !can_r;
        if g.u.is_empty() && !can_r {
            break Stop::Done;
        }
        if let Some(stop) = budget.exhausted(&counters) {
            break stop;
        }
        if can_e {
            counters.expand += 1;
            if st.expand_unchecked(lts) == ExpandResult::Handoff {
                let mut out = run_core(lts, &st.r, &st.sigma, false, cfg, counters, Some(&mut budget));
                out.counters.handoffs += 1;
                trace.append(&mut out.trace);
                out.trace = trace;
                return Ok(out);
            }
        } else {
            match chooser.branch(can_s, can_r) {
                Branch::Search => {
                    let x = chooser.pick_from(&open).unwrap();
                    if st.search_on(lts, x, &mut chooser) {
                        counters.search += 1;
                    } else {
                        counters.idle_search += 1;
                    }
                }
                Branch::Refine => {
                    let (a, x, y) = chooser.pick_from(&g.v).unwrap();
                    let pre = lts.pre_a(crate::lts::LabelId(a), st.r.principal(y));
                    st.r.principal_mut(x).intersect_with(&pre);
                    st.u_bad = StateSet::empty(lts.n_states());
                    counters.refine += 1;
                }
            }
        }
        if cfg.record_trace {
            trace.push(st.r.clone());
        }
    };
    Ok(EngineOutcome {
        result: st.r,
        sigma: st.sigma,
        counters,
        elapsed: budget.elapsed(),
        stop,
        trace,
    })
}

struct Checks {
    rsim: Relation,
    reach: StateSet,
}

impl Checks {
    fn verify(&self, lts: &Lts, r_init: &Relation, sigma_init: &StateSet, st: &PartitionEngineState, g: &Guards) {
        for x in 0..lts.n_states() as StateId {
            let rx = st.r.principal(x);
            assert!(
                self.rsim.principal(x).is_subset(rx) && rx.is_subset(r_init.principal(x)),
                "R_sim(x) ⊆ R(x) ⊆ R_i(x) violated at {x}"
            );
            assert!(rx.contains(x), "x ∈ R(x) violated at {x}");
        }
        assert!(
            sigma_init.is_subset(&st.sigma) && st.sigma.is_subset(&self.reach),
            "σ_i ⊆ σ ⊆ post*(I) violated"
        );
        assert!(
            st.u_bad.iter().all(|x| g.u.contains(&x)),
            "U_bad ⊆ U violated"
        );
    }
}
