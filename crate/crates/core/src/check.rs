//! Run reports and theorem checks against the oracle.
//!
//! A [`RunReport`] is the JSON form of an engine result. [`check`] reads one
//! back, recomputes the sets each theorem talks about and compares them with
//! the [`GroundTruth`] of the same instance, clause by clause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{Counters, EngineOutcome, Stop};
use crate::error::{Error, Result};
use crate::lts::{Lts, StateId};
use crate::oracle::GroundTruth;
use crate::region::StateSet;
use crate::relation::{Relation, TwoPr};

/// Hex SHA-256 of the system (in `.aut` form with its initial states) and the
/// initial preorder.
pub fn fingerprint(lts: &Lts, r_init: &Relation) -> String {
    let mut h = Sha256::new();
    h.update(lts.to_aut());
    h.update(lts.init_sidecar());
    for (x, y) in r_init.pairs() {
        h.update(format!("{x} {y}\n"));
    }
    hex::encode(h.finalize())
}

/// `P`, `Q` and `τ` by block handle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPrJson {
    pub p: BTreeMap<u32, Vec<StateId>>,
    pub q: BTreeMap<u32, Vec<StateId>>,
    pub tau: BTreeMap<u32, Vec<u32>>,
}

impl From<&TwoPr> for TwoPrJson {
    fn from(t: &TwoPr) -> Self {
        TwoPrJson {
            p: t.p_handles().map(|b| (b.0, t.p_block(b).to_vec())).collect(),
            q: t.q_handles().map(|c| (c.0, t.q_block(c).to_vec())).collect(),
            tau: t
                .p_handles()
                .map(|b| (b.0, t.tau(b).iter().map(|c| c.0).collect()))
                .collect(),
        }
    }
}

/// Engine output in a diffable form. Principals are listed once per distinct
/// principal, keyed by the smallest state that has it; `blocks` groups states
/// with equal principals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub engine: String,
    pub states: usize,
    pub sigma: Vec<StateId>,
    pub principals: BTreeMap<StateId, Vec<StateId>>,
    pub blocks: Vec<Vec<StateId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twopr: Option<TwoPrJson>,
    pub counters: Counters,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub stop: Stop,
}

impl RunReport {
    pub fn from_relation(lts: &Lts, r_init: &Relation, engine: &str, out: &EngineOutcome<Relation>) -> Self {
        Self::build(lts, r_init, engine, &out.result, &out.sigma, None, out.counters, out.stop)
    }

    pub fn from_twopr(lts: &Lts, r_init: &Relation, engine: &str, out: &EngineOutcome<TwoPr>) -> Self {
        let r = out.result.to_relation();
        let t = Some(TwoPrJson::from(&out.result));
        Self::build(lts, r_init, engine, &r, &out.sigma, t, out.counters, out.stop)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        lts: &Lts,
        r_init: &Relation,
        engine: &str,
        r: &Relation,
        sigma: &StateSet,
        twopr: Option<TwoPrJson>,
        counters: Counters,
        stop: Stop,
    ) -> Self {
        let p = r.principal_partition();
        RunReport {
            instance: fingerprint(lts, r_init),
            engine: engine.to_string(),
            states: lts.n_states(),
            sigma: sigma.to_vec(),
            principals: p
                .blocks()
                .iter()
                .map(|b| {
                    let x = b.first().unwrap();
                    (x, r.principal(x).to_vec())
                })
                .collect(),
            blocks: p.blocks().iter().map(StateSet::to_vec).collect(),
            twopr,
            counters,
            is_final: stop == Stop::Done,
            stop,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn set(&self, xs: &[StateId]) -> Result<StateSet> {
        if let Some(&x) = xs.iter().find(|&&x| x as usize >= self.states) {
            return Err(Error::Consistency(format!("state {x} out of range in report")));
        }
        Ok(StateSet::from_iter_with(self.states, xs.iter().copied()))
    }

    pub fn sigma_set(&self) -> Result<StateSet> {
        self.set(&self.sigma)
    }

    /// The relation, rebuilt from `blocks` and `principals`.
    pub fn relation(&self) -> Result<Relation> {
        let mut principals = vec![None; self.states];
        for b in &self.blocks {
            let rep = *b.iter().min().ok_or_else(|| Error::Consistency("empty block".into()))?;
            let pr = self
                .principals
                .get(&rep)
                .ok_or_else(|| Error::Consistency(format!("no principal for block of {rep}")))?;
            let pr = self.set(pr)?;
            for &x in b {
                let slot = principals
                    .get_mut(x as usize)
                    .ok_or_else(|| Error::Consistency(format!("state {x} out of range in report")))?;
                *slot = Some(pr.clone());
            }
        }
        let principals = principals
            .into_iter()
            .enumerate()
            .map(|(x, p)| p.ok_or_else(|| Error::Consistency(format!("state {x} in no block"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Relation::from_principals(principals))
    }

    /// `P`-blocks with their `∪τ`, when the report comes from the 2PR engine.
    pub fn twopr_blocks(&self) -> Result<Option<Vec<(StateSet, StateSet)>>> {
        let Some(t) = &self.twopr else { return Ok(None) };
        let mut out = Vec::new();
        for (h, blk) in &t.p {
            let mut u = StateSet::empty(self.states);
            for c in t.tau.get(h).into_iter().flatten() {
                let q = t
                    .q
                    .get(c)
                    .ok_or_else(|| Error::Consistency(format!("τ refers to missing Q-block {c}")))?;
                u.union_with(&self.set(q)?);
            }
            out.push((self.set(blk)?, u));
        }
        Ok(Some(out))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// Reachable principals of the explicit engine.
    Principals,
    /// Reachable principals and blocks of the 2PR engine.
    TwoPr,
    /// Reachable blocks of the partition engine.
    Partition,
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" | "explicit" => Ok(Theorem::Principals),
            "3" | "twopr" => Ok(Theorem::TwoPr),
            "5" | "partition" => Ok(Theorem::Partition),
            _ => Err(format!("unknown theorem `{s}` (expected 1, 3 or 5)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub holds: bool,
    /// For inclusions: whether it is strict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub clauses: Vec<Clause>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            write!(f, "({}) {}", c.name, if c.holds { "holds" } else { "FAILS" })?;
            if c.strict == Some(true) {
                write!(f, ", strict")?;
            }
            if let Some(w) = &c.witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

type Family = BTreeSet<StateSet>;

fn equality(name: &'static str, engine: &Family, oracle: &Family) -> Clause {
    let witness = engine
        .difference(oracle)
        .next()
        .map(|s| format!("{s:?} from the engine is not expected"))
        .or_else(|| {
            oracle
                .difference(engine)
                .next()
                .map(|s| format!("{s:?} is expected but missing"))
        });
    Clause {
        name,
        holds: witness.is_none(),
        strict: None,
        witness,
    }
}

fn inclusion(name: &'static str, small: &Family, large: &Family) -> Clause {
    let witness = small
        .difference(large)
        .next()
        .map(|s| format!("{s:?} is not covered"));
    Clause {
        name,
        holds: witness.is_none(),
        strict: Some(witness.is_none() && small.len() < large.len()),
        witness,
    }
}

/// `P_sim` blocks meeting the reachable states.
fn psim_reachable(truth: &GroundTruth) -> Family {
    truth.reachable_blocks.clone()
}

/// Checks the explicit-engine result `(r, σ)`:
/// `1.a` principals meeting `σ` equal the simulation principals meeting
/// `post*(I)`; `1.b` every reachable simulation block is a block of equal
/// principals meeting `σ`.
pub fn check_principals(truth: &GroundTruth, r: &Relation, sigma: &StateSet) -> CheckReport {
    let p = r.principal_partition();
    let blocks_sigma: Family = p
        .blocks()
        .iter()
        .filter(|b| r.principal(b.first().unwrap()).intersects(sigma))
        .cloned()
        .collect();
    CheckReport {
        clauses: vec![
            equality("1.a", &r.principals_meeting(sigma), &truth.principals_eq1),
            inclusion("1.b", &psim_reachable(truth), &blocks_sigma),
        ],
    }
}

/// Checks the partition-engine result, with `P` grouping states by equal
/// principal: `3.a` principals of `σ` equal simulation principals of
/// reachable states; `3.b` reachable parts of the blocks agree; `3.c` the
/// simulation blocks around the blocks meeting `σ` are the reachable ones.
pub fn check_partition(truth: &GroundTruth, r: &Relation, sigma: &StateSet) -> CheckReport {
    let reach = &truth.reach;
    let p = r.principal_partition();
    let p_sigma: Vec<&StateSet> = p.blocks().iter().filter(|b| b.intersects(sigma)).collect();
    let principals_sigma: Family = sigma.iter().map(|s| r.principal(s).clone()).collect();
    let cut = |bs: &mut dyn Iterator<Item = &StateSet>| -> Family {
        bs.map(|b| b.intersection(reach)).filter(|b| !b.is_empty()).collect()
    };
    let around = |b: &StateSet| -> StateSet {
        let mut u = StateSet::empty(b.capacity());
        for c in truth.psim.blocks().iter().filter(|c| c.intersects(b)) {
            u.union_with(c);
        }
        u
    };
    CheckReport {
        clauses: vec![
            equality("3.a", &principals_sigma, &truth.principals_eq2),
            equality(
                "3.b",
                &cut(&mut p_sigma.iter().copied()),
                &cut(&mut truth.reachable_blocks.iter()),
            ),
            equality(
                "3.c",
                &p_sigma.iter().map(|b| around(b)).collect(),
                &truth.reachable_blocks,
            ),
        ],
    }
}

/// Checks a 2PR result given as `(P-block, ∪τ)` pairs: `3.a` as `1.a`;
/// `3.b` every reachable simulation block is a block of equal `∪τ` that
/// contains some `P`-block whose `∪τ` meets `σ`.
pub fn check_twopr(truth: &GroundTruth, blocks: &[(StateSet, StateSet)], sigma: &StateSet) -> CheckReport {
    let principals: Family = blocks
        .iter()
        .filter(|(_, u)| u.intersects(sigma))
        .map(|(_, u)| u.clone())
        .collect();
    let mut induced: BTreeMap<&StateSet, StateSet> = BTreeMap::new();
    for (b, u) in blocks {
        induced
            .entry(u)
            .and_modify(|x| x.union_with(b))
            .or_insert_with(|| b.clone());
    }
    // a block of equal ∪τ qualifies exactly when its ∪τ meets σ
    let over: Family = induced
        .into_iter()
        .filter(|(u, _)| u.intersects(sigma))
        .map(|(_, b)| b)
        .collect();
    CheckReport {
        clauses: vec![
            equality("3.a", &principals, &truth.principals_eq1),
            inclusion("3.b", &psim_reachable(truth), &over),
        ],
    }
}

/// Checks a report against the ground truth of the instance it claims to be
/// about.
pub fn check(report: &RunReport, lts: &Lts, r_init: &Relation, truth: &GroundTruth, theorem: Theorem) -> Result<CheckReport> {
    let fp = fingerprint(lts, r_init);
    if report.instance != fp || report.states != lts.n_states() {
        return Err(Error::Mismatch(format!(
            "report is for instance {}, not {}",
            report.instance, fp
        )));
    }
    let sigma = report.sigma_set()?;
    Ok(match theorem {
        Theorem::Principals => check_principals(truth, &report.relation()?, &sigma),
        Theorem::Partition => check_partition(truth, &report.relation()?, &sigma),
        Theorem::TwoPr => {
            let blocks = report
                .twopr_blocks()?
                .ok_or_else(|| Error::Consistency("report has no 2PR triple".into()))?;
            check_twopr(truth, &blocks, &sigma)
        }
    })
}
