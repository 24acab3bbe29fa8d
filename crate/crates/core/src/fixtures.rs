//! Small hand-built systems with known answers.
//!
//! States are numbered from 0. Every system has the single label `a`.

use crate::lts::{Lts, StateId};
use crate::region::StateSet;
use crate::relation::Relation;

fn lts(n: usize, edges: &[(StateId, StateId)], initial: &[StateId]) -> Lts {
    let edges: Vec<_> = edges.iter().map(|&(x, y)| (x, "a", y)).collect();
    Lts::from_edges(n, &edges, initial).expect("fixture is well formed")
}

fn principals(n: usize, rows: &[&[StateId]]) -> Relation {
    Relation::from_principals(
        rows.iter()
            .map(|r| StateSet::from_iter_with(n, r.iter().copied()))
            .collect(),
    )
}

/// Two states, a self-loop on the initial state 1, universal preorder.
/// `R_sim(0) = {0,1}`, `R_sim(1) = {1}`.
pub fn example1() -> (Lts, Relation) {
    (lts(2, &[(1, 1)], &[1]), Relation::universal(2))
}

/// The chain `1 → 2 → … → n` with a self-loop on `n` and `I = {1}`, plus the
/// edge `n → 0` when `back_edge` is set. The simulation partition is
/// `{{0}, [1..n]}` either way; state 0 is reachable only with the back edge.
/// (The bisimulation partition differs, as states of the chain disagree on
/// whether they can reach 0 in one step.)
pub fn example2(n: usize, back_edge: bool) -> (Lts, Relation) {
    assert!(n >= 1);
    let n_id = n as StateId;
    let mut edges: Vec<(StateId, StateId)> = (1..n_id).map(|i| (i, i + 1)).collect();
    edges.push((n_id, n_id));
    if back_edge {
        edges.push((n_id, 0));
    }
    (lts(n + 1, &edges, &[1]), Relation::universal(n + 1))
}

/// `0 → 1`, `I = {0}`, `R(0) = {0}`, `R(1) = {0,1}`; this preorder is already
/// the simulation preorder.
pub fn example3() -> (Lts, Relation) {
    (lts(2, &[(0, 1)], &[0]), principals(2, &[&[0], &[0, 1]]))
}

/// Self-loop on the initial state 0, state 1 isolated, universal preorder.
pub fn example4() -> (Lts, Relation) {
    (lts(2, &[(0, 0)], &[0]), Relation::universal(2))
}

/// Four states where the partition engine must hand off to the
/// reachable-refinement loop to separate 0 from 1.
pub fn example6() -> (Lts, Relation) {
    (
        lts(4, &[(0, 2), (1, 3), (1, 2), (3, 3)], &[0]),
        principals(4, &[&[0, 1], &[0, 1], &[2], &[2, 3]]),
    )
}

/// Truncation of `i → 0 (i ≥ 1)` to `m` states, `I = {1}`, universal preorder.
pub fn collapse_truncation(m: usize) -> (Lts, Relation) {
    assert!(m >= 2);
    let edges: Vec<_> = (1..m as StateId).map(|i| (i, 0)).collect();
    (lts(m, &edges, &[1]), Relation::universal(m))
}
