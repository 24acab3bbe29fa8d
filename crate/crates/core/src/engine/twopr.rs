//! The block-level engine over 2PR triples `⟨P, τ, Q⟩`.
//!
//! The relation is `R(x) = ∪τ(P(x))`, so one Refine updates every state of a
//! block at once and the work per iteration is proportional to the number of
//! blocks rather than states. The guard sets are
//!
//! ```text
//! U = { B ∈ P | ∪τ(B) ∩ σ = ∅, ∪τ(B) ∩ (I ∪ post(σ)) ≠ ∅ }
//! V = { (a, B, C) | ∪τ(B) ∩ σ ≠ ∅, B ∩ pre_a(C) ≠ ∅, ∪τ(B) ⊄ pre_a(∪τ(C)) }
//! ```
//!
//! and a Refine on `(a, B, C)` with `S = pre_a(∪τ(C))` splits `B` by
//! `pre_a(C)`, splits every `Q`-block of `τ(B ∩ pre_a(C))` that straddles `S`,
//! and finally keeps in `τ(B ∩ pre_a(C))` only the blocks inside `S`.
//!
//! The engine only talks to its system through [`RegionAlgebra`], so the
//! same code runs on [`Lts`] and on the interval systems of
//! [`symbolic`](crate::region::symbolic). `σ` stays a finite list of concrete
//! states in both cases.
//!
//! `U` and `V` are kept exact between iterations. Because splitting a
//! `Q`-block leaves every `∪τ(A)` unchanged, a Refine only affects the
//! triples whose source or target is one of the (at most two) blocks it
//! produces.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lts::{LabelId, Lts};
use crate::region::{Elem, Region, RegionAlgebra, StateSet};
use crate::relation::{PHandle, QHandle, Relation, TwoPr};

use super::explicit::{check_carrier, check_sigma_reachable, sim_fixpoint};
use super::{Branch, Budget, Chooser, Counters, EngineConfig, EngineOutcome, Stop};

type Triple = (u32, PHandle, PHandle);

/// A run in progress. The public step functions check their guards, so the
/// engine can also be driven by hand.
pub struct TwoPrEngine<'a, A: RegionAlgebra> {
    alg: &'a A,
    n_labels: usize,
    t: TwoPr<A::Region>,
    /// In insertion order.
    sigma: Vec<Elem<A>>,
    sigma_set: BTreeSet<Elem<A>>,
    sigma_region: A::Region,
    /// `I ∪ post(σ)` when the algebra exposes successor regions.
    cand: Option<A::Region>,
    union: Vec<Option<A::Region>>,
    reached: Vec<bool>,
    /// `pre_a(C)` at `[C][a]`; a live handle's block never changes.
    pre_block: Vec<Vec<Option<A::Region>>>,
    /// `pre_a(∪τ(C))` at `[C][a]`; dropped when `τ(C)` is pruned.
    pre_union: Vec<Vec<Option<A::Region>>>,
    u: BTreeSet<PHandle>,
    v: BTreeSet<Triple>,
    /// `V` keyed by target first, for removing a retired target.
    v_by_target: BTreeSet<(PHandle, u32, PHandle)>,
    counters: Counters,
}

impl<'a, A: RegionAlgebra> TwoPrEngine<'a, A> {
    /// `t` must be a legal triple over the algebra's universe encoding a
    /// reflexive relation; `sigma_init` must consist of reachable states.
    pub fn new(alg: &'a A, t: TwoPr<A::Region>, sigma_init: impl IntoIterator<Item = Elem<A>>) -> Result<Self> {
        t.validate(&alg.universe())?;
        if !t.is_reflexive() {
            return Err(Error::Contract("initial triple does not encode a reflexive relation".into()));
        }
        let empty = alg.empty();
        let mut cand = Some(alg.initial());
        let mut sigma = Vec::new();
        let mut sigma_set = BTreeSet::new();
        let mut sigma_region = empty.clone();
        for s in sigma_init {
            if sigma_set.insert(s) {
                sigma.push(s);
                sigma_region = sigma_region.union(&alg.singleton(s));
                cand = cand.and_then(|c| alg.post_image(s).map(|p| c.union(&p)));
            }
        }
        sigma.sort();
        let mut e = TwoPrEngine {
            alg,
            n_labels: alg.n_labels(),
            t,
            sigma,
            sigma_set,
            sigma_region,
            cand,
            union: Vec::new(),
            reached: Vec::new(),
            pre_block: Vec::new(),
            pre_union: Vec::new(),
            u: BTreeSet::new(),
            v: BTreeSet::new(),
            v_by_target: BTreeSet::new(),
            counters: Counters::default(),
        };
        let handles: Vec<PHandle> = e.t.p_handles().collect();
        for &b in &handles {
            e.refresh_union(b);
        }
        for &b in &handles {
            e.update_u(b);
            e.recheck_row(b);
        }
        Ok(e)
    }

    pub fn twopr(&self) -> &TwoPr<A::Region> {
        &self.t
    }

    pub fn sigma(&self) -> &[Elem<A>] {
        &self.sigma
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn u(&self) -> &BTreeSet<PHandle> {
        &self.u
    }

    pub fn v(&self) -> &BTreeSet<Triple> {
        &self.v
    }

    fn ensure_slot(&mut self, b: PHandle) {
        let need = b.index() + 1;
        if self.union.len() < need {
            self.union.resize(need, None);
            self.reached.resize(need, false);
            self.pre_block.resize(need, vec![None; self.n_labels]);
            self.pre_union.resize(need, vec![None; self.n_labels]);
        }
    }

    fn refresh_union(&mut self, b: PHandle) {
        self.ensure_slot(b);
        let u = self.t.tau_union(b);
        self.reached[b.index()] = u.intersects(&self.sigma_region);
        self.union[b.index()] = Some(u);
        for slot in &mut self.pre_union[b.index()] {
            *slot = None;
        }
    }

    fn union_of(&self, b: PHandle) -> &A::Region {
        self.union[b.index()].as_ref().expect("union cached for live block")
    }

    fn ensure_pre(&mut self, a: usize, c: PHandle) {
        let ci = c.index();
        if self.pre_block[ci][a].is_none() {
            self.pre_block[ci][a] = Some(self.alg.pre(LabelId(a as u32), self.t.p_block(c)));
        }
        if self.pre_union[ci][a].is_none() {
            let u = self.union[ci].as_ref().unwrap();
            self.pre_union[ci][a] = Some(self.alg.pre(LabelId(a as u32), u));
        }
    }

    /// A state of `r ∩ (I ∪ post(σ))`, chosen by `seed` when given.
    fn witness(&self, r: &A::Region, seed: Option<u64>) -> Option<Elem<A>> {
        let pick = |x: A::Region| match seed {
            Some(s) => x.pick_seeded(s),
            None => x.pick(),
        };
        if let Some(c) = &self.cand {
            return pick(r.intersection(c));
        }
        pick(r.intersection(&self.alg.initial())).or_else(|| {
            self.sigma_set
                .iter()
                .find_map(|&t| self.alg.successor_witness(t, r))
        })
    }

    fn update_u(&mut self, b: PHandle) {
        let inside = !self.reached[b.index()] && self.witness(self.union_of(b), None).is_some();
        if inside {
            self.u.insert(b);
        } else {
            self.u.remove(&b);
        }
    }

    fn recheck(&mut self, a: usize, b: PHandle, c: PHandle) {
        let member = self.reached[b.index()] && {
            self.ensure_pre(a, c);
            let ci = c.index();
            !self.union_of(b).is_subset(self.pre_union[ci][a].as_ref().unwrap())
                && self.t.p_block(b).intersects(self.pre_block[ci][a].as_ref().unwrap())
        };
        let key = (a as u32, b, c);
        if member {
            self.v.insert(key);
            self.v_by_target.insert((c, a as u32, b));
        } else if self.v.remove(&key) {
            self.v_by_target.remove(&(c, a as u32, b));
        }
    }

    fn recheck_row(&mut self, b: PHandle) {
        if !self.reached[b.index()] {
            self.drop_row(b);
            return;
        }
        let targets: Vec<PHandle> = self.t.p_handles().collect();
        for a in 0..self.n_labels {
            for &c in &targets {
                self.recheck(a, b, c);
            }
        }
    }

    fn recheck_col(&mut self, c: PHandle) {
        let sources: Vec<PHandle> = self
            .t
            .p_handles()
            .filter(|b| self.reached[b.index()])
            .collect();
        for a in 0..self.n_labels {
            for &b in &sources {
                self.recheck(a, b, c);
            }
        }
    }

    fn drop_row(&mut self, b: PHandle) {
        for a in 0..self.n_labels as u32 {
            let row: Vec<Triple> = self
                .v
                .range((a, b, PHandle(0))..=(a, b, PHandle(u32::MAX)))
                .copied()
                .collect();
            for (a, b, c) in row {
                self.v.remove(&(a, b, c));
                self.v_by_target.remove(&(c, a, b));
            }
        }
    }

    fn drop_col(&mut self, c: PHandle) {
        let col: Vec<(PHandle, u32, PHandle)> = self
            .v_by_target
            .range((c, 0, PHandle(0))..=(c, u32::MAX, PHandle(u32::MAX)))
            .copied()
            .collect();
        for (c, a, b) in col {
            self.v_by_target.remove(&(c, a, b));
            self.v.remove(&(a, b, c));
        }
    }

    /// Search on `B ∈ U`: adds one witness of `∪τ(B) ∩ (I ∪ post(σ))` to `σ`
    /// and returns it. `seed` selects a non-minimal witness.
    pub fn search_step(&mut self, b: PHandle, seed: Option<u64>) -> Result<Elem<A>> {
        if !self.u.contains(&b) {
            return Err(Error::Contract(format!("P-block {} is not in U", b.0)));
        }
        let s = self
            .witness(self.union_of(b), seed)
            .expect("U membership guarantees a witness");
        self.add_sigma(s);
        self.counters.search += 1;
        Ok(s)
    }

    fn add_sigma(&mut self, s: Elem<A>) {
        debug_assert!(!self.sigma_set.contains(&s));
        self.sigma.push(s);
        self.sigma_set.insert(s);
        let single = self.alg.singleton(s);
        self.sigma_region = self.sigma_region.union(&single);
        self.cand = self
            .cand
            .take()
            .and_then(|c| self.alg.post_image(s).map(|p| c.union(&p)));
        let handles: Vec<PHandle> = self.t.p_handles().collect();
        for b in handles {
            if self.reached[b.index()] {
                continue;
            }
            if self.union_of(b).contains(s) {
                self.reached[b.index()] = true;
                self.u.remove(&b);
                self.recheck_row(b);
            } else {
                self.update_u(b);
            }
        }
    }

    /// Refine on `(a, B, C) ∈ V`.
    pub fn refine_step(&mut self, a: u32, b: PHandle, c: PHandle) -> Result<()> {
        if !self.v.contains(&(a, b, c)) {
            return Err(Error::Contract(format!(
                "({a}, {}, {}) is not in V",
                b.0, c.0
            )));
        }
        let ai = a as usize;
        self.ensure_pre(ai, c);
        let s = self.pre_union[c.index()][ai].clone().unwrap();
        let pc = self.pre_block[c.index()][ai].clone().unwrap();

        let split = self.t.split_p(b, &pc);
        let b1 = split.inside.expect("V guarantees B ∩ pre_a(C) ≠ ∅");
        let straddling: Vec<QHandle> = self.t.tau(b1).iter().copied().collect();
        for x in straddling {
            if self.t.split_q(x, &s).is_some() {
                self.counters.q_splits += 1;
            }
        }
        let kept: BTreeSet<QHandle> = self
            .t
            .tau(b1)
            .iter()
            .copied()
            .filter(|&e| self.t.q_block(e).is_subset(&s))
            .collect();
        self.t.set_tau(b1, kept);

        if let Some(b2) = split.outside {
            // `b` was retired: move its cached union to the half that kept it
            self.drop_row(b);
            self.drop_col(b);
            self.u.remove(&b);
            self.ensure_slot(b2);
            let old = self.union[b.index()].take();
            self.union[b2.index()] = old;
            self.reached[b2.index()] = self.reached[b.index()];
            self.pre_block[b.index()] = Vec::new();
            self.pre_union[b.index()] = Vec::new();
            self.refresh_union(b1);
            self.update_u(b1);
            self.update_u(b2);
            self.recheck_row(b1);
            self.recheck_row(b2);
            self.recheck_col(b1);
            self.recheck_col(b2);
        } else {
            self.refresh_union(b1);
            self.update_u(b1);
            self.recheck_row(b1);
            self.recheck_col(b1);
        }
        self.counters.refine += 1;
        Ok(())
    }

    /// Runs until `U = V = ∅` or the budget runs out. `inspect` is called at
    /// every loop head when invariant checking is on.
    pub fn run(
        mut self,
        cfg: &EngineConfig,
        mut inspect: impl FnMut(&TwoPr<A::Region>, &[Elem<A>]),
    ) -> EngineOutcome<TwoPr<A::Region>, Vec<Elem<A>>> {
        let mut chooser = Chooser::new(cfg.strategy);
        let mut budget = Budget::new(cfg);
        let mut trace = Vec::new();
        let stop = loop {
            if cfg.check_invariants {
                self.verify();
                inspect(&self.t, &self.sigma);
            }
            let can_s = !self.u.is_empty();
            let can_r = !self.v.is_empty();
            if !can_s && !can_r {
                break Stop::Done;
            }
            if let Some(stop) = budget.exhausted(&self.counters) {
                break stop;
            }
            match chooser.branch(can_s, can_r) {
                Branch::Search => {
                    let b = chooser.pick_from(&self.u).unwrap();
                    let seed = chooser.region_seed();
                    self.search_step(b, seed).expect("guard checked");
                }
                Branch::Refine => {
                    let (a, b, c) = chooser.pick_from(&self.v).unwrap();
                    self.refine_step(a, b, c).expect("guard checked");
                }
            }
            if cfg.record_trace {
                trace.push(self.t.clone());
            }
        };
        EngineOutcome {
            result: self.t,
            sigma: self.sigma,
            counters: self.counters,
            elapsed: budget.elapsed(),
            stop,
            trace,
        }
    }

    /// Re-derives caches and guard sets from their definitions.
    pub fn verify(&self) {
        self.t
            .validate(&self.alg.universe())
            .expect("P and Q stay partitions with live τ references");
        assert!(self.t.is_reflexive(), "∀B ∈ P. B ⊆ ∪τ(B) violated");
        let mut u = BTreeSet::new();
        let mut v = BTreeSet::new();
        let mut cand = self.alg.initial();
        let mut sigma_region = self.alg.empty();
        for &s in &self.sigma {
            sigma_region = sigma_region.union(&self.alg.singleton(s));
            if let Some(p) = self.alg.post_image(s) {
                cand = cand.union(&p);
            }
        }
        for b in self.t.p_handles() {
            let ub = self.t.tau_union(b);
            assert_eq!(&ub, self.union_of(b), "stale ∪τ cache for P-block {}", b.0);
            if !ub.intersects(&sigma_region) {
                let reachable = if self.cand.is_some() {
                    ub.intersects(&cand)
                } else {
                    self.witness(&ub, None).is_some()
                };
                if reachable {
                    u.insert(b);
                }
                continue;
            }
            for a in 0..self.n_labels as u32 {
                for c in self.t.p_handles() {
                    let pc = self.alg.pre(LabelId(a), self.t.p_block(c));
                    let pu = self.alg.pre(LabelId(a), &self.t.tau_union(c));
                    if self.t.p_block(b).intersects(&pc) && !ub.is_subset(&pu) {
                        v.insert((a, b, c));
                    }
                }
            }
        }
        assert_eq!(self.u, u, "incremental U differs from its definition");
        assert_eq!(self.v, v, "incremental V differs from its definition");
    }
}

/// Runs the engine on a finite system from the preorder `r_init`.
pub fn run_twopr(
    lts: &Lts,
    r_init: &Relation,
    sigma_init: &StateSet,
    cfg: &EngineConfig,
) -> Result<EngineOutcome<TwoPr, StateSet>> {
    check_carrier(lts, r_init)?;
    r_init.require_preorder()?;
    check_sigma_reachable(lts, sigma_init)?;
    let engine = TwoPrEngine::new(lts, TwoPr::induce(r_init), sigma_init.iter())?;
    let checks = cfg.check_invariants.then(|| {
        (
            sim_fixpoint(lts, r_init).expect("preorder input"),
            lts.post_star(),
        )
    });
    let out = engine.run(cfg, |t, sigma| {
        let Some((rsim, reach)) = &checks else { return };
        let r = t.to_relation();
        assert!(
            rsim.is_subset(&r) && r.is_subset(r_init),
            "R_sim ⊆ R⟨P,τ,Q⟩ ⊆ R_i violated"
        );
        assert!(
            sigma_init.iter().all(|s| sigma.contains(&s)) && sigma.iter().all(|&s| reach.contains(s)),
            "σ_i ⊆ σ ⊆ post*(I) violated"
        );
    });
    Ok(EngineOutcome {
        sigma: StateSet::from_iter_with(lts.n_states(), out.sigma.iter().copied()),
        result: out.result,
        counters: out.counters,
        elapsed: out.elapsed,
        stop: out.stop,
        trace: out.trace,
    })
}

/// Result of a run over a region algebra: the final triple and `σ` in
/// insertion order.
pub type SymbolicOutcome<A> = EngineOutcome<TwoPr<<A as RegionAlgebra>::Region>, Vec<Elem<A>>>;

/// Runs the engine on any region algebra from an explicit initial triple.
pub fn run_twopr_symbolic<A: RegionAlgebra>(
    alg: &A,
    t_init: TwoPr<A::Region>,
    sigma_init: impl IntoIterator<Item = Elem<A>>,
    cfg: &EngineConfig,
) -> Result<SymbolicOutcome<A>> {
    Ok(TwoPrEngine::new(alg, t_init, sigma_init)?.run(cfg, |_, _| {}))
}
