//! The refinement engines and what they share: strategies, counters, outcomes.
//!
//! Every engine is a loop over guarded branches (Search, Refine and, for the
//! partition engine, Expand). When several guards hold, the [`Strategy`]
//! decides which branch runs and which element of the chosen set is used.

pub mod explicit;
pub mod partition;
pub mod twopr;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::region::StateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    SearchFirst,
    RefineFirst,
    /// Switches branch after every iteration in which both were enabled.
    Alternating,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PickPolicy {
    /// Smallest element in the set's natural order.
    CanonicalMin,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Strategy {
    pub branch: BranchPolicy,
    pub pick: PickPolicy,
    pub seed: u64,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy {
            branch: BranchPolicy::SearchFirst,
            pick: PickPolicy::CanonicalMin,
            seed: 0,
        }
    }
}

impl Strategy {
    pub const fn new(branch: BranchPolicy, pick: PickPolicy, seed: u64) -> Self {
        Strategy { branch, pick, seed }
    }

    /// The four branch policies, each with canonical picks except `Random`.
    pub fn all(seed: u64) -> [Strategy; 4] {
        use BranchPolicy::*;
        [
            Strategy::new(SearchFirst, PickPolicy::CanonicalMin, seed),
            Strategy::new(RefineFirst, PickPolicy::CanonicalMin, seed),
            Strategy::new(Alternating, PickPolicy::CanonicalMin, seed),
            Strategy::new(Random, PickPolicy::Random, seed),
        ]
    }
}

impl FromStr for BranchPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "search-first" => Ok(BranchPolicy::SearchFirst),
            "refine-first" => Ok(BranchPolicy::RefineFirst),
            "alternating" => Ok(BranchPolicy::Alternating),
            "random" => Ok(BranchPolicy::Random),
            _ => Err(format!("unknown branch policy `{s}`")),
        }
    }
}

impl FromStr for PickPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min" | "canonical-min" => Ok(PickPolicy::CanonicalMin),
            "random" => Ok(PickPolicy::Random),
            _ => Err(format!("unknown pick policy `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Searches that added a state to `σ`.
    pub search: u64,
    /// Partition-engine searches that only recorded a state in `U_bad`.
    pub idle_search: u64,
    pub refine: u64,
    pub expand: u64,
    pub q_splits: u64,
    /// Times the partition engine passed control to the refinement-only loop.
    pub handoffs: u64,
}

impl Counters {
    pub fn iterations(&self) -> u64 {
        self.search + self.idle_search + self.refine + self.expand
    }
}

impl fmt::Display for Counters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "search={} idle_search={} refine={} expand={} q_splits={} handoffs={}",
            self.search, self.idle_search, self.refine, self.expand, self.q_splits, self.handoffs
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    /// All guards false: the result is final.
    Done,
    /// The iteration cap was reached.
    Cap,
    /// The wall-clock deadline passed.
    Timeout,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub strategy: Strategy,
    /// Bound on the number of loop iterations, all branches counted alike.
    pub cap: u64,
    pub deadline: Option<Instant>,
    /// Re-derive the loop invariants and the guard sets from scratch at every
    /// loop head and panic on a mismatch. Meant for tests.
    pub check_invariants: bool,
    /// Keep a snapshot of the relation after every iteration.
    pub record_trace: bool,
}

pub const DEFAULT_CAP: u64 = 10_000_000;

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            strategy: Strategy::default(),
            cap: DEFAULT_CAP,
            deadline: None,
            check_invariants: false,
            record_trace: false,
        }
    }
}

impl EngineConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        EngineConfig {
            strategy,
            ..Self::default()
        }
    }

    pub fn cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn timeout(mut self, t: Duration) -> Self {
        self.deadline = Some(Instant::now() + t);
        self
    }
}

/// What an engine returns. `T` is the relation representation and `S` the
/// representation of `σ`.
#[derive(Clone, Debug)]
pub struct EngineOutcome<T, S = StateSet> {
    pub result: T,
    pub sigma: S,
    pub counters: Counters,
    pub elapsed: Duration,
    pub stop: Stop,
    /// Snapshots after each iteration, when requested.
    pub trace: Vec<T>,
}

impl<T, S> EngineOutcome<T, S> {
    pub fn is_final(&self) -> bool {
        self.stop == Stop::Done
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Branch {
    Search,
    Refine,
}

/// Resolves the nondeterministic choices of one run.
pub(crate) struct Chooser {
    strategy: Strategy,
    rng: ChaCha8Rng,
    last: Branch,
}

impl Chooser {
    pub(crate) fn new(strategy: Strategy) -> Self {
        Chooser {
            strategy,
            rng: ChaCha8Rng::seed_from_u64(strategy.seed),
            last: Branch::Refine,
        }
    }

    /// At least one of the flags must be set.
    pub(crate) fn branch(&mut self, can_search: bool, can_refine: bool) -> Branch {
        debug_assert!(can_search || can_refine);
        let b = match (can_search, can_refine) {
            (true, false) => Branch::Search,
            (false, true) => Branch::Refine,
            _ => match self.strategy.branch {
                BranchPolicy::SearchFirst => Branch::Search,
                BranchPolicy::RefineFirst => Branch::Refine,
                BranchPolicy::Alternating => match self.last {
                    Branch::Search => Branch::Refine,
                    Branch::Refine => Branch::Search,
                },
                BranchPolicy::Random => {
                    if self.rng.gen_bool(0.5) {
                        Branch::Search
                    } else {
                        Branch::Refine
                    }
                }
            },
        };
        if can_search && can_refine {
            self.last = b;
        }
        b
    }

    /// Index into a collection of `len > 0` elements.
    pub(crate) fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        match self.strategy.pick {
            PickPolicy::CanonicalMin => 0,
            PickPolicy::Random => self.rng.gen_range(0..len),
        }
    }

    pub(crate) fn pick_from<T: Copy>(&mut self, set: &BTreeSet<T>) -> Option<T> {
        if set.is_empty() {
            return None;
        }
        let i = self.index(set.len());
        set.iter().nth(i).copied()
    }

    pub(crate) fn pick_state(&mut self, set: &StateSet) -> Option<u32> {
        match self.strategy.pick {
            PickPolicy::CanonicalMin => set.first(),
            PickPolicy::Random => {
                let n = set.len();
                (n > 0).then(|| set.nth(self.index(n)).unwrap())
            }
        }
    }

    /// Seed for choosing inside a region, `None` for its canonical element.
    pub(crate) fn region_seed(&mut self) -> Option<u64> {
        match self.strategy.pick {
            PickPolicy::CanonicalMin => None,
            PickPolicy::Random => Some(self.rng.gen()),
        }
    }
}

/// Cap and deadline bookkeeping shared by the loops.
pub(crate) struct Budget {
    cap: u64,
    deadline: Option<Instant>,
    start: Instant,
    ticks: u64,
}

impl Budget {
    pub(crate) fn new(cfg: &EngineConfig) -> Self {
        Budget {
            cap: cfg.cap,
            deadline: cfg.deadline,
            start: Instant::now(),
            ticks: 0,
        }
    }

    /// Checked before each iteration.
    pub(crate) fn exhausted(&mut self, counters: &Counters) -> Option<Stop> {
        if counters.iterations() >= self.cap {
            return Some(Stop::Cap);
        }
        self.ticks += 1;
        if let Some(d) = self.deadline {
            if self.ticks.is_multiple_of(64) && Instant::now() >= d {
                return Some(Stop::Timeout);
            }
        }
        None
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_switches_only_on_real_choices() {
        let mut c = Chooser::new(Strategy::new(BranchPolicy::Alternating, PickPolicy::CanonicalMin, 0));
        assert_eq!(c.branch(true, true), Branch::Search);
        assert_eq!(c.branch(false, true), Branch::Refine);
        assert_eq!(c.branch(true, true), Branch::Refine);
        assert_eq!(c.branch(true, true), Branch::Search);
    }

    #[test]
    fn seeded_choices_repeat() {
        let s = Strategy::new(BranchPolicy::Random, PickPolicy::Random, 99);
        let run = |s| {
            let mut c = Chooser::new(s);
            (0..50).map(|_| (c.branch(true, true), c.index(17))).collect::<Vec<_>>()
        };
        assert_eq!(run(s), run(s));
    }

    #[test]
    fn policy_names() {
        assert_eq!("refine-first".parse::<BranchPolicy>(), Ok(BranchPolicy::RefineFirst));
        assert_eq!("min".parse::<PickPolicy>(), Ok(PickPolicy::CanonicalMin));
        assert!("sideways".parse::<BranchPolicy>().is_err());
    }
}
