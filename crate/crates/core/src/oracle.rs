//! Reference computations for tests.
//!
//! Everything here is the plainest reading of a definition and shares no code
//! with the engines: the simulation fixpoint is computed over a boolean pair
//! matrix and reachability by a breadth-first walk over the transition list.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::Result;
use crate::lts::{Lts, StateId};
use crate::region::StateSet;
use crate::relation::{Partition, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrincipalMode {
    /// Principals that meet the reachable states.
    Eq1,
    /// Principals of reachable states.
    Eq2,
}

/// Ground truth for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct GroundTruth {
    pub reach: StateSet,
    pub rsim: Relation,
    pub psim: Partition,
    pub principals_eq1: BTreeSet<StateSet>,
    pub principals_eq2: BTreeSet<StateSet>,
    pub reachable_blocks: BTreeSet<StateSet>,
}

impl GroundTruth {
    pub fn compute(lts: &Lts, r_init: &Relation) -> Result<Self> {
        r_init.require_preorder()?;
        let reach = reachable(lts);
        let rsim = compute_rsim_pairwise(lts, r_init);
        let psim = partition_from_preorder(&rsim)?;
        Ok(GroundTruth {
            principals_eq1: reachable_principals(&rsim, &reach, PrincipalMode::Eq1),
            principals_eq2: reachable_principals(&rsim, &reach, PrincipalMode::Eq2),
            reachable_blocks: reachable_blocks(&psim, &reach),
            reach,
            rsim,
            psim,
        })
    }
}

/// States reachable from the initial states.
pub fn reachable(lts: &Lts) -> StateSet {
    let n = lts.n_states();
    let mut adj: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (x, _, y) in lts.transitions() {
        adj[x as usize].push(y);
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<StateId> = lts.initial().iter().collect();
    for &x in &queue {
        seen[x as usize] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x as usize] {
            if !seen[y as usize] {
                seen[y as usize] = true;
                queue.push_back(y);
            }
        }
    }
    StateSet::from_iter_with(n, (0..n as StateId).filter(|&x| seen[x as usize]))
}

/// The largest simulation contained in `r_init`, as pairs `(x, simulator)`.
///
/// Starts from all pairs of `r_init` and removes `(s, t)` whenever some move
/// `s -a-> s'` has no answer `t -a-> t'` with `(s', t')` still present, until
/// nothing changes.
pub fn compute_rsim_pairwise(lts: &Lts, r_init: &Relation) -> Relation {
    let n = lts.n_states();
    let mut moves: Vec<Vec<(u32, StateId)>> = vec![Vec::new(); n];
    for (x, a, y) in lts.transitions() {
        moves[x as usize].push((a.0, y));
    }
    let mut rel = vec![vec![false; n]; n];
    for (s, t) in r_init.pairs() {
        rel[s as usize][t as usize] = true;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            for t in 0..n {
                if !rel[s][t] {
                    continue;
                }
                let ok = moves[s].iter().all(|&(a, s2)| {
                    moves[t]
                        .iter()
                        .any(|&(b, t2)| a == b && rel[s2 as usize][t2 as usize])
                });
                if !ok {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
    }
    let pairs = (0..n).flat_map(|s| {
        let row = &rel[s];
        (0..n).filter(move |&t| row[t]).map(move |t| (s as StateId, t as StateId))
    });
    Relation::from_pairs(n, pairs)
}

pub fn reachable_principals(r: &Relation, reach: &StateSet, mode: PrincipalMode) -> BTreeSet<StateSet> {
    (0..r.n_states() as StateId)
        .filter(|&s| match mode {
            PrincipalMode::Eq1 => r.principal(s).intersects(reach),
            PrincipalMode::Eq2 => reach.contains(s),
        })
        .map(|s| r.principal(s).clone())
        .collect()
}

pub fn reachable_blocks(p: &Partition, reach: &StateSet) -> BTreeSet<StateSet> {
    p.blocks()
        .iter()
        .filter(|b| b.intersects(reach))
        .cloned()
        .collect()
}

/// Classes of `r ∩ r⁻¹`.
pub fn partition_from_preorder(r: &Relation) -> Result<Partition> {
    r.require_preorder()?;
    let n = r.n_states() as StateId;
    Ok(Partition::group_by_key(r.n_states(), |x| {
        (0..n)
            .filter(|&y| r.contains(x, y) && r.contains(y, x))
            .min()
            .unwrap()
    }))
}
