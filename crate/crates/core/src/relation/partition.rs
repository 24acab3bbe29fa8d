use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lts::StateId;
use crate::region::StateSet;

/// A partition of `[0, n)` into non-empty blocks, listed by ascending minimum.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<StateSet>,
    block_of: Vec<u32>,
}

impl Partition {
    /// Validates and canonicalizes `blocks`.
    pub fn from_blocks(n: usize, blocks: Vec<StateSet>) -> Result<Partition> {
        let mut seen = StateSet::empty(n);
        for b in &blocks {
            if b.capacity() != n {
                return Err(Error::Consistency("block over a different carrier".into()));
            }
            if b.is_empty() {
                return Err(Error::Consistency("empty block".into()));
            }
            if let Some(x) = b.first_common(&seen) {
                return Err(Error::Consistency(format!("state {x} in two blocks")));
            }
            seen.union_with(b);
        }
        if let Some(x) = seen.complement().first() {
            return Err(Error::Consistency(format!("state {x} in no block")));
        }
        Ok(Self::canonical(n, blocks))
    }

    fn canonical(n: usize, mut blocks: Vec<StateSet>) -> Partition {
        blocks.sort_by_key(|b| b.first());
        let mut block_of = vec![0u32; n];
        for (i, b) in blocks.iter().enumerate() {
            for x in b {
                block_of[x as usize] = i as u32;
            }
        }
        Partition { blocks, block_of }
    }

    /// Groups states by equal `key`.
    pub fn group_by_key<K: Ord>(n: usize, mut key: impl FnMut(StateId) -> K) -> Partition {
        let mut groups: BTreeMap<K, StateSet> = BTreeMap::new();
        for x in 0..n as StateId {
            groups
                .entry(key(x))
                .or_insert_with(|| StateSet::empty(n))
                .insert(x);
        }
        Self::canonical(n, groups.into_values().collect())
    }

    pub fn discrete(n: usize) -> Partition {
        Self::group_by_key(n, |x| x)
    }

    /// `{Σ}`, or no blocks at all when `Σ = ∅`.
    pub fn trivial(n: usize) -> Partition {
        Self::group_by_key(n, |_| ())
    }

    /// One block per non-blank line; states on no line become singletons.
    pub fn parse_blocks(text: &str, n: usize) -> Result<Partition> {
        let mut blocks = Vec::new();
        let mut listed = StateSet::empty(n);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut b = StateSet::empty(n);
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
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
                if !listed.insert(v as StateId) {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("state {v} listed twice"),
                    });
                }
                b.insert(v as StateId);
            }
            blocks.push(b);
        }
        blocks.extend(
            listed
                .complement()
                .iter()
                .map(|x| StateSet::singleton(n, x)),
        );
        Self::from_blocks(n, blocks)
    }

    pub fn n_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[StateSet] {
        &self.blocks
    }

    pub fn block_index(&self, x: StateId) -> usize {
        self.block_of[x as usize] as usize
    }

    pub fn block_of_state(&self, x: StateId) -> &StateSet {
        &self.blocks[self.block_index(x)]
    }

    pub fn same_block(&self, x: StateId, y: StateId) -> bool {
        self.block_of[x as usize] == self.block_of[y as usize]
    }

    pub fn to_set(&self) -> BTreeSet<StateSet> {
        self.blocks.iter().cloned().collect()
    }

    /// Coarsest common refinement of `self` and `other`.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        if self.n_states() != other.n_states() {
            return Err(Error::Mismatch("partitions over different carriers".into()));
        }
        Ok(Self::group_by_key(self.n_states(), |x| {
            (self.block_index(x), other.block_index(x))
        }))
    }

    /// Every block of `finer` lies inside one block of `self`.
    pub fn is_coarser_than(&self, finer: &Partition) -> bool {
        self.n_states() == finer.n_states()
            && finer.blocks.iter().all(|b| {
                let x = b.first().unwrap();
                b.is_subset(self.block_of_state(x))
            })
    }

    /// Blocks meeting `xs`.
    pub fn blocks_meeting(&self, xs: &StateSet) -> BTreeSet<StateSet> {
        self.blocks
            .iter()
            .filter(|b| b.intersects(xs))
            .cloned()
            .collect()
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.blocks).finish()
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}
