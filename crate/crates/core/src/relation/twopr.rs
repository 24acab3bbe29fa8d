//! 2PR triples `⟨P, τ, Q⟩`.
//!
//! `P` and `Q` are partitions of the carrier and `τ` maps each `P`-block to a
//! set of `Q`-blocks. The triple encodes the relation
//! `R⟨P,τ,Q⟩(x) = ∪τ(P(x))`.
//!
//! Blocks are addressed by stable handles. Splitting a block retires its handle
//! and mints one handle per non-empty half; retired handles are never reused,
//! so a stale handle in `τ` is detectable rather than silently wrong.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lts::StateId;
use crate::region::{Region, StateSet};

use super::{Partition, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PHandle(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct QHandle(pub u32);

impl PHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl QHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Result of splitting a `P`-block by a region `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PSplit {
    /// The part inside `S`, if non-empty.
    pub inside: Option<PHandle>,
    /// The part outside `S`, if non-empty.
    pub outside: Option<PHandle>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPr<R = StateSet> {
    empty: R,
    p: Vec<Option<R>>,
    q: Vec<Option<R>>,
    tau: Vec<BTreeSet<QHandle>>,
}

impl<R: Region> TwoPr<R> {
    /// Builds a triple from block lists; `tau[i]` lists indices into `q`.
    /// Handles are assigned in list order. No validation is done here, see
    /// [`validate`](Self::validate).
    pub fn new(empty: R, p: Vec<R>, q: Vec<R>, tau: Vec<Vec<usize>>) -> Self {
        assert_eq!(p.len(), tau.len(), "one τ entry per P-block");
        TwoPr {
            empty,
            p: p.into_iter().map(Some).collect(),
            q: q.into_iter().map(Some).collect(),
            tau: tau
                .into_iter()
                .map(|ts| ts.into_iter().map(|i| QHandle(i as u32)).collect())
                .collect(),
        }
    }

    pub fn empty_region(&self) -> &R {
        &self.empty
    }

    /// Live `P` handles in ascending order.
    pub fn p_handles(&self) -> impl Iterator<Item = PHandle> + '_ {
        self.p
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_some())
            .map(|(i, _)| PHandle(i as u32))
    }

    /// Live `Q` handles in ascending order.
    pub fn q_handles(&self) -> impl Iterator<Item = QHandle> + '_ {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_some())
            .map(|(i, _)| QHandle(i as u32))
    }

    pub fn p_len(&self) -> usize {
        self.p.iter().filter(|b| b.is_some()).count()
    }

    pub fn q_len(&self) -> usize {
        self.q.iter().filter(|b| b.is_some()).count()
    }

    /// One past the largest `P` handle ever minted.
    pub fn p_handle_bound(&self) -> usize {
        self.p.len()
    }

    pub fn q_handle_bound(&self) -> usize {
        self.q.len()
    }

    pub fn is_live_p(&self, b: PHandle) -> bool {
        matches!(self.p.get(b.index()), Some(Some(_)))
    }

    pub fn is_live_q(&self, c: QHandle) -> bool {
        matches!(self.q.get(c.index()), Some(Some(_)))
    }

    pub fn p_block(&self, b: PHandle) -> &R {
        self.p[b.index()].as_ref().expect("retired P handle")
    }

    pub fn q_block(&self, c: QHandle) -> &R {
        self.q[c.index()].as_ref().expect("retired Q handle")
    }

    pub fn p_blocks(&self) -> impl Iterator<Item = &R> + '_ {
        self.p.iter().flatten()
    }

    pub fn q_blocks(&self) -> impl Iterator<Item = &R> + '_ {
        self.q.iter().flatten()
    }

    pub fn tau(&self, b: PHandle) -> &BTreeSet<QHandle> {
        debug_assert!(self.is_live_p(b));
        &self.tau[b.index()]
    }

    pub fn set_tau(&mut self, b: PHandle, ts: BTreeSet<QHandle>) {
        debug_assert!(self.is_live_p(b));
        self.tau[b.index()] = ts;
    }

    /// `∪τ(B)`.
    pub fn tau_union(&self, b: PHandle) -> R {
        self.tau(b)
            .iter()
            .fold(self.empty.clone(), |acc, &c| acc.union(self.q_block(c)))
    }

    /// The `P`-block containing `x`.
    pub fn p_of(&self, x: R::Elem) -> Option<PHandle> {
        self.p_handles().find(|&b| self.p_block(b).contains(x))
    }

    /// The `Q`-block containing `x`.
    pub fn q_of(&self, x: R::Elem) -> Option<QHandle> {
        self.q_handles().find(|&c| self.q_block(c).contains(x))
    }

    /// `R⟨P,τ,Q⟩(x)`.
    pub fn principal_of(&self, x: R::Elem) -> Option<R> {
        self.p_of(x).map(|b| self.tau_union(b))
    }

    /// Replaces `B` by `B ∩ S` and `B ∖ S`, copying `τ(B)` to both.
    /// When one half is empty nothing changes and `B` keeps its handle.
    pub fn split_p(&mut self, b: PHandle, s: &R) -> PSplit {
        let block = self.p_block(b);
        let inside = block.intersection(s);
        if inside.is_empty() {
            return PSplit {
                inside: None,
                outside: Some(b),
            };
        }
        let outside = block.difference(s);
        if outside.is_empty() {
            return PSplit {
                inside: Some(b),
                outside: None,
            };
        }
        let ts = std::mem::take(&mut self.tau[b.index()]);
        self.p[b.index()] = None;
        let hi = self.mint_p(inside, ts.clone());
        let ho = self.mint_p(outside, ts);
        PSplit {
            inside: Some(hi),
            outside: Some(ho),
        }
    }

    fn mint_p(&mut self, block: R, ts: BTreeSet<QHandle>) -> PHandle {
        self.p.push(Some(block));
        self.tau.push(ts);
        PHandle(self.p.len() as u32 - 1)
    }

    /// Splits `X` into `X ∩ S` and `X ∖ S` when both are non-empty, rewriting
    /// every `τ(A)` that mentions `X`. Returns the new handles `(inside, outside)`.
    pub fn split_q(&mut self, x: QHandle, s: &R) -> Option<(QHandle, QHandle)> {
        let block = self.q_block(x);
        let inside = block.intersection(s);
        if inside.is_empty() {
            return None;
        }
        let outside = block.difference(s);
        if outside.is_empty() {
            return None;
        }
        self.q[x.index()] = None;
        self.q.push(Some(inside));
        let hi = QHandle(self.q.len() as u32 - 1);
        self.q.push(Some(outside));
        let ho = QHandle(self.q.len() as u32 - 1);
        for (i, ts) in self.tau.iter_mut().enumerate() {
            if self.p[i].is_some() && ts.remove(&x) {
                ts.insert(hi);
                ts.insert(ho);
            }
        }
        Some((hi, ho))
    }

    /// `∀B ∈ P. B ⊆ ∪τ(B)`, which holds exactly when the encoded relation is
    /// reflexive.
    pub fn is_reflexive(&self) -> bool {
        self.p_handles()
            .all(|b| self.p_block(b).is_subset(&self.tau_union(b)))
    }

    /// Checks that `P` and `Q` partition `universe` and that `τ` references
    /// only live `Q` handles.
    pub fn validate(&self, universe: &R) -> Result<()> {
        check_partition("P", self.p.iter().flatten(), universe, &self.empty)?;
        check_partition("Q", self.q.iter().flatten(), universe, &self.empty)?;
        for (i, ts) in self.tau.iter().enumerate() {
            if self.p[i].is_none() {
                if !ts.is_empty() {
                    return Err(Error::Consistency(format!("retired P-block {i} keeps τ")));
                }
                continue;
            }
            if let Some(c) = ts.iter().find(|&&c| !self.is_live_q(c)) {
                return Err(Error::Consistency(format!(
                    "τ of P-block {i} references dead Q-block {}",
                    c.0
                )));
            }
        }
        Ok(())
    }

    /// `P⟨P,τ,Q⟩` as a list of regions: unions of `P`-blocks sharing `∪τ`.
    /// Groups are ordered by their first `P` handle.
    pub fn induced_blocks(&self) -> Vec<R> {
        let mut groups: Vec<(R, R)> = Vec::new();
        for b in self.p_handles() {
            let u = self.tau_union(b);
            match groups.iter_mut().find(|(k, _)| *k == u) {
                Some((_, blk)) => *blk = blk.union(self.p_block(b)),
                None => groups.push((u, self.p_block(b).clone())),
            }
        }
        groups.into_iter().map(|(_, b)| b).collect()
    }
}

fn check_partition<'a, R: Region + 'a>(
    name: &str,
    blocks: impl Iterator<Item = &'a R>,
    universe: &R,
    empty: &R,
) -> Result<()> {
    let mut seen = empty.clone();
    for b in blocks {
        if b.is_empty() {
            return Err(Error::Consistency(format!("{name} has an empty block")));
        }
        if b.intersects(&seen) {
            return Err(Error::Consistency(format!("{name} blocks overlap")));
        }
        seen = seen.union(b);
    }
    if seen != *universe {
        return Err(Error::Consistency(format!("{name} does not cover the carrier")));
    }
    Ok(())
}

impl TwoPr<StateSet> {
    /// `⟨P_R, τ_R, Q_R⟩`: `P` groups equal principals, `Q` groups equal inverse
    /// principals, and `τ(B) = {C ∈ Q | C ⊆ R(B)}`.
    pub fn induce(r: &Relation) -> Self {
        let n = r.n_states();
        let p = r.principal_partition();
        // for a preorder both partitions are the classes of R ∩ R⁻¹
        let q = if r.is_preorder() { p.clone() } else { r.inverse_partition() };
        let tau = p
            .blocks()
            .iter()
            .map(|b| {
                let rb = r.principal(b.first().unwrap());
                q.blocks()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_subset(rb))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        TwoPr::new(
            StateSet::empty(n),
            p.blocks().to_vec(),
            q.blocks().to_vec(),
            tau,
        )
    }

    pub fn n_states(&self) -> usize {
        self.empty.capacity()
    }

    /// `R⟨P,τ,Q⟩`.
    pub fn to_relation(&self) -> Relation {
        let n = self.n_states();
        let mut principals = vec![StateSet::empty(n); n];
        for b in self.p_handles() {
            let u = self.tau_union(b);
            for x in self.p_block(b) {
                principals[x as usize] = u.clone();
            }
        }
        Relation::from_principals(principals)
    }

    pub fn p_partition(&self) -> Partition {
        Partition::from_blocks(self.n_states(), self.p_blocks().cloned().collect())
            .expect("P is a partition")
    }

    pub fn q_partition(&self) -> Partition {
        Partition::from_blocks(self.n_states(), self.q_blocks().cloned().collect())
            .expect("Q is a partition")
    }

    /// `P⟨P,τ,Q⟩`: states grouped by equal `∪τ(P(x))`.
    pub fn induced_partition(&self) -> Partition {
        Partition::from_blocks(self.n_states(), self.induced_blocks())
            .expect("induced blocks partition the carrier")
    }

    /// Dense `P`-block lookup for every state.
    pub fn p_index(&self) -> Vec<PHandle> {
        let mut idx = vec![PHandle(u32::MAX); self.n_states()];
        for b in self.p_handles() {
            for x in self.p_block(b) {
                idx[x as usize] = b;
            }
        }
        idx
    }

    pub fn q_index(&self) -> Vec<QHandle> {
        let mut idx = vec![QHandle(u32::MAX); self.n_states()];
        for c in self.q_handles() {
            for x in self.q_block(c) {
                idx[x as usize] = c;
            }
        }
        idx
    }

    pub fn principal(&self, x: StateId) -> StateSet {
        self.principal_of(x).expect("state in carrier")
    }
}

/// Serialized with blocks and `τ` keyed by handle.
impl<R: Region + Serialize> Serialize for TwoPr<R> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p: BTreeMap<u32, &R> = self.p_handles().map(|b| (b.0, self.p_block(b))).collect();
        let q: BTreeMap<u32, &R> = self.q_handles().map(|c| (c.0, self.q_block(c))).collect();
        let tau: BTreeMap<u32, Vec<u32>> = self
            .p_handles()
            .map(|b| (b.0, self.tau(b).iter().map(|c| c.0).collect()))
            .collect();
        let mut st = s.serialize_struct("TwoPr", 3)?;
        st.serialize_field("p", &p)?;
        st.serialize_field("q", &q)?;
        st.serialize_field("tau", &tau)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::tests::{arb_relation, set};
    use proptest::prelude::*;

    #[test]
    fn two_state_preorder() {
        // R(0) = {0}, R(1) = {0, 1}
        let r = Relation::from_pairs(2, [(0, 0), (1, 0), (1, 1)]);
        let t = TwoPr::induce(&r);
        let blocks: Vec<_> = t.p_blocks().cloned().collect();
        assert_eq!(blocks, vec![set(2, &[0]), set(2, &[1])]);
        assert_eq!(t.q_blocks().cloned().collect::<Vec<_>>(), blocks);
        assert_eq!(t.tau(PHandle(0)), &BTreeSet::from([QHandle(0)]));
        assert_eq!(t.tau(PHandle(1)), &BTreeSet::from([QHandle(0), QHandle(1)]));
        assert_eq!(t.to_relation(), r);
    }

    #[test]
    fn identity_and_universal() {
        let t = TwoPr::induce(&Relation::identity(3));
        assert_eq!(t.p_len(), 3);
        for b in t.p_handles() {
            assert_eq!(&t.tau_union(b), t.p_block(b));
        }
        let t = TwoPr::induce(&Relation::universal(3));
        assert_eq!((t.p_len(), t.q_len()), (1, 1));
        assert_eq!(t.tau(PHandle(0)).len(), 1);
    }

    #[test]
    fn empty_tau_is_empty_relation() {
        let t = TwoPr::new(StateSet::empty(2), vec![StateSet::full(2)], vec![StateSet::full(2)], vec![vec![]]);
        assert_eq!(t.to_relation(), Relation::empty(2));
        assert!(!t.is_reflexive());
    }

    #[test]
    fn split_bookkeeping() {
        let mut t = TwoPr::induce(&Relation::universal(4));
        let s = set(4, &[0, 1]);
        let sp = t.split_p(PHandle(0), &s);
        assert_eq!(sp, PSplit { inside: Some(PHandle(1)), outside: Some(PHandle(2)) });
        assert!(!t.is_live_p(PHandle(0)));
        assert_eq!(t.tau(PHandle(1)), t.tau(PHandle(2)));
        let (qi, qo) = t.split_q(QHandle(0), &s).unwrap();
        for b in t.p_handles() {
            assert_eq!(t.tau(b), &BTreeSet::from([qi, qo]));
        }
        t.validate(&StateSet::full(4)).unwrap();
        // degenerate splits keep the handle
        assert_eq!(t.split_p(PHandle(1), &s).inside, Some(PHandle(1)));
        assert_eq!(t.split_q(qi, &s), None);
    }

    #[test]
    fn validate_catches_dead_reference() {
        let mut t = TwoPr::induce(&Relation::universal(2));
        t.split_q(QHandle(0), &set(2, &[0])).unwrap();
        t.set_tau(PHandle(0), BTreeSet::from([QHandle(0)]));
        assert!(t.validate(&StateSet::full(2)).is_err());
    }

    fn arb_twopr(max_n: usize) -> impl Strategy<Value = TwoPr> {
        (1..=max_n).prop_flat_map(|n| {
            (
                proptest::collection::vec(0..n as u32, n),
                proptest::collection::vec(0..n as u32, n),
                proptest::collection::vec(proptest::bool::weighted(0.5), n * n),
            )
                .prop_map(move |(pl, ql, bits)| {
                    let p = Partition::group_by_key(n, |x| pl[x as usize]);
                    let q = Partition::group_by_key(n, |x| ql[x as usize]);
                    let tau = (0..p.len())
                        .map(|i| (0..q.len()).filter(|&j| bits[i * n + j]).collect())
                        .collect();
                    TwoPr::new(StateSet::empty(n), p.blocks().to_vec(), q.blocks().to_vec(), tau)
                })
        })
    }

    proptest! {
        #[test]
        fn round_trip(r in arb_relation(8)) {
            let t = TwoPr::induce(&r);
            t.validate(&StateSet::full(r.n_states())).unwrap();
            prop_assert_eq!(t.to_relation(), r);
        }

        #[test]
        fn reflexive_characterization(t in arb_twopr(7)) {
            prop_assert_eq!(t.is_reflexive(), t.to_relation().is_reflexive());
        }

        #[test]
        fn preorder_has_equal_partitions(r in arb_relation(8)) {
            let t = TwoPr::induce(&r.closure());
            prop_assert_eq!(t.p_partition(), t.q_partition());
        }

        #[test]
        fn induced_partition_groups_principals(t in arb_twopr(6)) {
            let ip = t.induced_partition();
            prop_assert_eq!(&ip, &t.to_relation().principal_partition());
            prop_assert!(ip.is_coarser_than(&t.p_partition()));
        }
    }
}
