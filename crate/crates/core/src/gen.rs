//! Seeded instance generators and the unrolling transformer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lts::{LabelId, Lts, StateId};
use crate::relation::Relation;

/// `a`, `b`, ... for up to 26 labels, `l26`, `l27`, ... after that.
pub fn label_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| match i {
            0..=25 => ((b'a' + i as u8) as char).to_string(),
            _ => format!("l{i}"),
        })
        .collect()
}

/// Each `(x, a, y)` is present independently with probability `density`.
/// The single initial state is drawn from the same generator.
pub fn gen_random(n: usize, k: usize, density: f64, seed: u64) -> Lts {
    assert!(n > 0 && density > 0.0 && density <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for x in 0..n as StateId {
        for a in 0..k as u32 {
            for y in 0..n as StateId {
                if rng.gen_bool(density) {
                    edges.push((x, LabelId(a), y));
                }
            }
        }
    }
    let init = rng.gen_range(0..n as StateId);
    Lts::new(n, label_names(k), edges, [init]).expect("generated edges are in range")
}

/// A random cycle through all states plus `extra` further random edges, so
/// every state reaches every other. Labels are drawn uniformly.
pub fn gen_strongly_connected(n: usize, k: usize, extra: usize, seed: u64) -> Lts {
    assert!(n > 0 && k > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<StateId> = (0..n as StateId).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::with_capacity(n + extra);
    for i in 0..n {
        let a = LabelId(rng.gen_range(0..k as u32));
        edges.push((order[i], a, order[(i + 1) % n]));
    }
    for _ in 0..extra {
        let x = rng.gen_range(0..n as StateId);
        let y = rng.gen_range(0..n as StateId);
        edges.push((x, LabelId(rng.gen_range(0..k as u32)), y));
    }
    let init = rng.gen_range(0..n as StateId);
    Lts::new(n, label_names(k), edges, [init]).expect("generated edges are in range")
}

/// Reflexive-transitive closure of pairs drawn with probability `density`.
pub fn random_preorder(n: usize, density: f64, seed: u64) -> Relation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for x in 0..n as StateId {
        for y in 0..n as StateId {
            if x != y && rng.gen_bool(density) {
                pairs.push((x, y));
            }
        }
    }
    Relation::from_pairs(n, pairs).closure()
}

/// `k + 1` copies of the system. State `x` of layer `j` is `j·n + x`. Each
/// transition `x -a-> y` is copied inside every layer and, for `j < k`, also
/// leads from layer `j` to layer `j + 1`. The initial states sit in layer
/// `k`, so the lower layers are unreachable.
pub fn unroll(lts: &Lts, k: usize) -> Lts {
    let n = lts.n_states();
    let at = |j: usize, x: StateId| (j * n) as StateId + x;
    let mut edges = Vec::with_capacity((2 * k + 1) * lts.n_transitions());
    for (x, a, y) in lts.transitions() {
        for j in 0..=k {
            edges.push((at(j, x), a, at(j, y)));
            if j < k {
                edges.push((at(j, x), a, at(j + 1, y)));
            }
        }
    }
    let init: Vec<StateId> = lts.initial().iter().map(|x| at(k, x)).collect();
    Lts::new((k + 1) * n, lts.labels().to_vec(), edges, init).expect("unrolled edges are in range")
}
