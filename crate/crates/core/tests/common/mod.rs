//! Seeded corpus shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachsim::engine::{Counters, Strategy};
use reachsim::gen;
use reachsim::oracle::GroundTruth;
use reachsim::{Lts, Relation, StateSet, TwoPr};

pub const DENSITIES: [f64; 3] = [0.05, 0.15, 0.3];

pub struct Instance {
    pub id: usize,
    pub lts: Lts,
    pub ri: Relation,
    pub truth: GroundTruth,
}

impl Instance {
    /// `∅` for even selectors, `I` for odd ones.
    pub fn sigma_i(&self, sel: usize) -> StateSet {
        if sel.is_multiple_of(2) {
            self.lts.empty_set()
        } else {
            self.lts.initial().clone()
        }
    }

    /// `I` plus a seeded random part of `post*(I)`.
    pub fn sigma_above_initial(&self, seed: u64) -> StateSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = self.lts.initial().clone();
        for x in &self.truth.reach {
            if rng.gen_bool(0.3) {
                s.insert(x);
            }
        }
        s
    }

    pub fn strategy(&self, k: usize) -> Strategy {
        Strategy::all(self.id as u64 * 31 + k as u64)[k % 4]
    }

    /// `Σ_x |R_i(x)| − |Σ|`.
    pub fn refine_bound(&self) -> u64 {
        (self.ri.size() - self.lts.n_states()) as u64
    }

    pub fn counters_ok(&self, c: &Counters) -> Result<(), String> {
        let n = self.lts.n_states() as u64;
        if c.search > n {
            return Err(format!("instance {}: {} searches on {n} states", self.id, c.search));
        }
        if c.refine > self.refine_bound() {
            return Err(format!(
                "instance {}: {} refines, bound {}",
                self.id,
                c.refine,
                self.refine_bound()
            ));
        }
        Ok(())
    }
}

/// Instance `i` has `1 + i % 8` states, `1 + (i / 8) % 2` labels, transition
/// density `DENSITIES[(i / 16) % 3]` and a preorder closed from pairs of
/// density `[0.0, 0.1, 0.25][(i / 48) % 3]`.
pub fn instance(i: usize) -> Instance {
    let n = 1 + i % 8;
    let k = 1 + (i / 8) % 2;
    let d = DENSITIES[(i / 16) % 3];
    let pd = [0.0, 0.1, 0.25][(i / 48) % 3];
    let seed = 0x5eed_0000 + i as u64;
    let lts = gen::gen_random(n, k, d, seed);
    let ri = if pd == 0.0 {
        Relation::universal(n)
    } else {
        gen::random_preorder(n, pd, seed ^ 0xabcd)
    };
    let truth = GroundTruth::compute(&lts, &ri).expect("corpus preorders are valid");
    Instance { id: i, lts, ri, truth }
}

pub fn corpus(count: usize) -> Vec<Instance> {
    (0..count).map(instance).collect()
}

/// First violation of the block/principal link along a 2PR trace, if any:
/// whenever two states of one initial `P`-block sit in different `P`-blocks
/// after step `k`, their principals differed at some step `j ≤ k`. The dual
/// statement is checked for `Q` with inverse principals.
pub fn property1_violation(initial: &TwoPr, trace: &[TwoPr]) -> Option<String> {
    let n = initial.n_states() as u32;
    let steps: Vec<&TwoPr> = std::iter::once(initial).chain(trace).collect();
    let rels: Vec<Relation> = steps.iter().map(|t| t.to_relation()).collect();
    let invs: Vec<Relation> = rels.iter().map(|r| r.inverse()).collect();
    for x in 0..n {
        for y in x + 1..n {
            let same_p = initial.p_of(x) == initial.p_of(y);
            let same_q = initial.q_of(x) == initial.q_of(y);
            let mut p_seen = false;
            let mut q_seen = false;
            for (k, t) in steps.iter().enumerate() {
                p_seen |= rels[k].principal(x) != rels[k].principal(y);
                q_seen |= invs[k].principal(x) != invs[k].principal(y);
                if same_p && t.p_of(x) != t.p_of(y) && !p_seen {
                    return Some(format!("P separates {x} and {y} at step {k} with equal principals so far"));
                }
                if same_q && t.q_of(x) != t.q_of(y) && !q_seen {
                    return Some(format!("Q separates {x} and {y} at step {k} with equal inverse principals so far"));
                }
            }
        }
    }
    None
}
