//! Explicit relations stored as principals, partitions, and 2PR triples.

mod partition;
mod twopr;

pub use partition::Partition;
pub use twopr::{PHandle, QHandle, TwoPr};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lts::StateId;
use crate::region::StateSet;

/// A relation on `[0, n)` given by its principals: `R(x) = {y | (x, y) ∈ R}`.
///
/// For simulation relations the pair `(x, y)` reads "`y` simulates `x`", so
/// `R(x)` is the set of simulators of `x`.
/// Serializes as the list of principals indexed by state.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Relation {
    principals: Vec<StateSet>,
}

/// Outcome of [`Relation::preorder_check`]; each field holds a counterexample.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PreorderReport {
    /// `x` with `x ∉ R(x)`.
    pub not_reflexive: Option<StateId>,
    /// `(x, y, z)` with `y ∈ R(x)`, `z ∈ R(y)` and `z ∉ R(x)`.
    pub not_transitive: Option<(StateId, StateId, StateId)>,
    /// `(x, y)` with `y ∈ R(x)` and `x ∉ R(y)`.
    pub not_symmetric: Option<(StateId, StateId)>,
}

impl PreorderReport {
    pub fn is_preorder(&self) -> bool {
        self.not_reflexive.is_none() && self.not_transitive.is_none()
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_preorder() && self.not_symmetric.is_none()
    }
}

impl Relation {
    pub fn from_principals(principals: Vec<StateSet>) -> Self {
        let n = principals.len();
        assert!(
            principals.iter().all(|p| p.capacity() == n),
            "principal capacity differs from state count"
        );
        Relation { principals }
    }

    pub fn empty(n: usize) -> Self {
        Relation {
            principals: vec![StateSet::empty(n); n],
        }
    }

    /// `Σ × Σ`.
    pub fn universal(n: usize) -> Self {
        Relation {
            principals: vec![StateSet::full(n); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Relation {
            principals: (0..n as StateId).map(|x| StateSet::singleton(n, x)).collect(),
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut r = Self::empty(n);
        for (x, y) in pairs {
            r.principals[x as usize].insert(y);
        }
        r
    }

    /// The equivalence whose classes are the blocks of `p`.
    pub fn from_partition(p: &Partition) -> Self {
        let n = p.n_states();
        Relation {
            principals: (0..n as StateId).map(|x| p.block_of_state(x).clone()).collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.principals.len()
    }

    pub fn principal(&self, x: StateId) -> &StateSet {
        &self.principals[x as usize]
    }

    pub fn principal_mut(&mut self, x: StateId) -> &mut StateSet {
        &mut self.principals[x as usize]
    }

    pub fn principals(&self) -> &[StateSet] {
        &self.principals
    }

    pub fn into_principals(self) -> Vec<StateSet> {
        self.principals
    }

    pub fn contains(&self, x: StateId, y: StateId) -> bool {
        self.principals[x as usize].contains(y)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.principals
            .iter()
            .enumerate()
            .flat_map(|(x, p)| p.iter().map(move |y| (x as StateId, y)))
    }

    /// `Σ_x |R(x)|`.
    pub fn size(&self) -> usize {
        self.principals.iter().map(StateSet::len).sum()
    }

    pub fn inverse(&self) -> Relation {
        let n = self.n_states();
        let mut inv = Self::empty(n);
        for (x, y) in self.pairs() {
            inv.principals[y as usize].insert(x);
        }
        inv
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.principals
            .iter()
            .zip(&other.principals)
            .all(|(a, b)| a.is_subset(b))
    }

    pub fn first_non_reflexive(&self) -> Option<StateId> {
        (0..self.n_states() as StateId).find(|&x| !self.contains(x, x))
    }

    pub fn is_reflexive(&self) -> bool {
        self.first_non_reflexive().is_none()
    }

    pub fn preorder_check(&self) -> PreorderReport {
        let not_transitive = self.first_non_transitive();
        let not_symmetric = self.pairs().find(|&(x, y)| !self.contains(y, x));
        PreorderReport {
            not_reflexive: self.first_non_reflexive(),
            not_transitive,
            not_symmetric,
        }
    }

    /// Some `(x, y, z)` with `y ∈ R(x)`, `z ∈ R(y)`, `z ∉ R(x)`. States with
    /// equal principals are checked once.
    fn first_non_transitive(&self) -> Option<(StateId, StateId, StateId)> {
        let mut ids: HashMap<&StateSet, usize> = HashMap::new();
        let mut rep = Vec::new();
        let class: Vec<usize> = self
            .principals
            .iter()
            .enumerate()
            .map(|(x, p)| {
                *ids.entry(p).or_insert_with(|| {
                    rep.push(x as StateId);
                    rep.len() - 1
                })
            })
            .collect();
        let mut seen = vec![usize::MAX; rep.len()];
        for (i, &x) in rep.iter().enumerate() {
            let rx = &self.principals[x as usize];
            for y in rx {
                let j = class[y as usize];
                if seen[j] == i {
                    continue;
                }
                seen[j] = i;
                let ry = &self.principals[y as usize];
                if !ry.is_subset(rx) {
                    return Some((x, y, ry.difference(rx).first().unwrap()));
                }
            }
        }
        None
    }

    pub fn is_preorder(&self) -> bool {
        self.first_non_reflexive().is_none() && self.first_non_transitive().is_none()
    }

    /// Reflexive-transitive closure.
    pub fn closure(&self) -> Relation {
        let n = self.n_states();
        let mut out = self.clone();
        for x in 0..n {
            out.principals[x].insert(x as StateId);
        }
        // Warshall on rows: if k ∈ R(x) then R(x) ⊇ R(k).
        for k in 0..n {
            let row_k = out.principals[k].clone();
            for x in 0..n {
                if out.principals[x].contains(k as StateId) {
                    out.principals[x].union_with(&row_k);
                }
            }
        }
        out
    }

    /// `R^σ = {R(x) | R(x) ∩ σ ≠ ∅}` as a set of sets.
    pub fn principals_meeting(&self, sigma: &StateSet) -> BTreeSet<StateSet> {
        self.principals
            .iter()
            .filter(|p| p.intersects(sigma))
            .cloned()
            .collect()
    }

    /// `{R(x) | x ∈ xs}` as a set of sets.
    pub fn principals_of(&self, xs: &StateSet) -> BTreeSet<StateSet> {
        xs.iter().map(|x| self.principal(x).clone()).collect()
    }

    /// Partition grouping states with equal principals.
    pub fn principal_partition(&self) -> Partition {
        Partition::group_by_key(self.n_states(), |x| self.principal(x).clone())
    }

    /// Partition grouping states with equal inverse principals.
    pub fn inverse_partition(&self) -> Partition {
        self.inverse().principal_partition()
    }

    /// Reads a preorder from a CLI-style source: `universal`, `identity`,
    /// `partition:FILE` or `pairs:FILE`. With `close`, a pair list is closed
    /// reflexively and transitively before validation.
    pub fn from_source(source: &str, n: usize, close: bool) -> Result<Relation> {
        match source.split_once(':') {
            None if source == "universal" => Ok(Self::universal(n)),
            None if source == "identity" => Ok(Self::identity(n)),
            Some(("partition", path)) => {
                let text = std::fs::read_to_string(Path::new(path))?;
                Ok(Self::from_partition(&Partition::parse_blocks(&text, n)?))
            }
            Some(("pairs", path)) => {
                let text = std::fs::read_to_string(Path::new(path))?;
                let r = Self::parse_pairs(&text, n)?;
                let r = if close { r.closure() } else { r };
                r.require_preorder()?;
                Ok(r)
            }
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown preorder source `{source}`"),
            }),
        }
    }

    /// Lines `x y`, meaning `(x, y) ∈ R`. Blank lines and `#` comments are skipped.
    pub fn parse_pairs(text: &str, n: usize) -> Result<Relation> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<&str> = line.split_whitespace().collect();
            let [x, y] = nums[..] else {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected two state ids".into(),
                });
            };
            let mut ids = [0 as StateId; 2];
            for (slot, tok) in ids.iter_mut().zip([x, y]) {
                let v: u64 = tok.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad state id `{tok}`"),
                })?;
                if v >= n as u64 {
                    return Err(Error::StateRange {
                        line: i + 1,
                        state: v,
                        n_states: n,
                    });
                }
                *slot = v as StateId;
            }
            pairs.push((ids[0], ids[1]));
        }
        Ok(Self::from_pairs(n, pairs))
    }

    pub fn require_preorder(&self) -> Result<()> {
        if let Some(x) = self.first_non_reflexive() {
            return Err(Error::NotPreorder(format!("({x},{x}) missing")));
        }
        if let Some((x, y, z)) = self.first_non_transitive() {
            return Err(Error::NotPreorder(format!(
                "({x},{y}) and ({y},{z}) present but ({x},{z}) missing"
            )));
        }
        Ok(())
    }

    pub fn require_reflexive(&self) -> Result<()> {
        match self.first_non_reflexive() {
            Some(x) => Err(Error::NotReflexive(x)),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.principals.iter().enumerate())
            .finish()
    }
}
