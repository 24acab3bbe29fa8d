//! Explicit vs 2PR timing harness.
//!
//! Every instance runs from the universal preorder with `σ_i = ∅`. A row
//! records the block counts of the result next to the wall time:
//!
//! * explicit: `p` blocks of equal principals, `r` of them with a principal
//!   meeting `σ`;
//! * 2PR: `p` and `q` blocks of the triple, `p_ptq` blocks of equal `∪τ`,
//!   `r` of them with `∪τ` meeting `σ`.
//!
//! so that `states ≥ p ≥ r` and `states ≥ p ≥ p_ptq ≥ r` must hold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::engine::explicit::run_explicit;
use crate::engine::twopr::run_twopr;
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::gen;
use crate::lts::Lts;
use crate::region::StateSet;
use crate::relation::Relation;

/// Marker for a run that hit its deadline.
pub const TIMEOUT_MARK: &str = "†";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchEngine {
    Explicit,
    TwoPr,
}

impl fmt::Display for BenchEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchEngine::Explicit => "explicit",
            BenchEngine::TwoPr => "twopr",
        })
    }
}

impl FromStr for BenchEngine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "explicit" => Ok(BenchEngine::Explicit),
            "twopr" => Ok(BenchEngine::TwoPr),
            _ => Err(format!("unknown bench engine `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub protocol: String,
    pub engine: BenchEngine,
    pub rep: usize,
    pub transitions: usize,
    pub states: usize,
    pub sigma: usize,
    pub p: usize,
    pub q: Option<usize>,
    pub p_ptq: Option<usize>,
    pub r: usize,
    pub time_s: f64,
    pub timed_out: bool,
}

impl BenchRow {
    /// Checks the block-count chain of the row.
    pub fn validate(&self) -> Result<()> {
        let ok = match self.p_ptq {
            None => self.states >= self.p && self.p >= self.r,
            Some(pt) => self.states >= self.p && self.p >= pt && pt >= self.r,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Consistency(format!(
                "{} / {}: block counts {} ≥ {} ≥ {:?} ≥ {} violated",
                self.protocol, self.engine, self.states, self.p, self.p_ptq, self.r
            )))
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub engines: Vec<BenchEngine>,
    pub repeat: usize,
    pub timeout: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            engines: vec![BenchEngine::Explicit, BenchEngine::TwoPr],
            repeat: 1,
            timeout: Duration::from_secs(60),
        }
    }
}

fn count_meeting<'a>(groups: impl Iterator<Item = &'a StateSet>, sigma: &StateSet) -> usize {
    groups.filter(|u| u.intersects(sigma)).count()
}

/// One run of one engine on one instance.
pub fn run_once(protocol: &str, lts: &Lts, engine: BenchEngine, rep: usize, timeout: Duration) -> Result<BenchRow> {
    let ri = Relation::universal(lts.n_states());
    let sigma0 = lts.empty_set();
    let cfg = EngineConfig::default().timeout(timeout);
    let start = Instant::now();
    let row = match engine {
        BenchEngine::Explicit => {
            let out = run_explicit(lts, &ri, &sigma0, &cfg)?;
            let time_s = start.elapsed().as_secs_f64();
            // one representative principal per block of equal principals
            let reps: BTreeSet<&StateSet> = out.result.principals().iter().collect();
            BenchRow {
                protocol: protocol.to_string(),
                engine,
                rep,
                transitions: lts.n_transitions(),
                states: lts.n_states(),
                sigma: out.sigma.len(),
                p: reps.len(),
                q: None,
                p_ptq: None,
                r: count_meeting(reps.into_iter(), &out.sigma),
                time_s,
                timed_out: !out.is_final(),
            }
        }
        BenchEngine::TwoPr => {
            let out = run_twopr(lts, &ri, &sigma0, &cfg)?;
            let time_s = start.elapsed().as_secs_f64();
            let t = &out.result;
            let unions: BTreeSet<StateSet> = t.p_handles().map(|b| t.tau_union(b)).collect();
            BenchRow {
                protocol: protocol.to_string(),
                engine,
                rep,
                transitions: lts.n_transitions(),
                states: lts.n_states(),
                sigma: out.sigma.len(),
                p: t.p_len(),
                q: Some(t.q_len()),
                p_ptq: Some(unions.len()),
                r: count_meeting(unions.iter(), &out.sigma),
                time_s,
                timed_out: !out.is_final(),
            }
        }
    };
    row.validate()?;
    Ok(row)
}

/// All engines and repetitions on one instance.
pub fn bench_instance(protocol: &str, lts: &Lts, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for rep in 0..cfg.repeat {
        for &e in &cfg.engines {
            rows.push(run_once(protocol, lts, e, rep, cfg.timeout)?);
        }
    }
    Ok(rows)
}

/// Every `.aut` file of `dir` in name order; initial-state sidecars are
/// picked up by [`Lts::load`].
pub fn load_suite(dir: &Path) -> Result<Vec<(String, Lts)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "aut"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok((name, Lts::load(&p)?))
        })
        .collect()
}

pub fn bench_suite(suite: &[(String, Lts)], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (name, lts) in suite {
        rows.extend(bench_instance(name, lts, cfg)?);
    }
    Ok(rows)
}

/// Mean times per engine and the relative gain `(t1 − t2) / t1` of 2PR over
/// explicit; `None` where either side timed out or did not run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gain {
    pub protocol: String,
    pub explicit_s: Option<f64>,
    pub twopr_s: Option<f64>,
    pub gain: Option<f64>,
}

pub fn gains(rows: &[BenchRow]) -> Vec<Gain> {
    let mut acc: BTreeMap<&str, BTreeMap<BenchEngine, (f64, usize, bool)>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        if !acc.contains_key(r.protocol.as_str()) {
            order.push(r.protocol.as_str());
        }
        let e = acc.entry(&r.protocol).or_default().entry(r.engine).or_insert((0.0, 0, false));
        e.0 += r.time_s;
        e.1 += 1;
        e.2 |= r.timed_out;
    }
    order
        .into_iter()
        .map(|name| {
            let m = &acc[name];
            let mean = |e| m.get(&e).and_then(|&(t, n, to)| (!to).then(|| t / n as f64));
            let t1 = mean(BenchEngine::Explicit);
            let t2 = mean(BenchEngine::TwoPr);
            Gain {
                protocol: name.to_string(),
                explicit_s: t1,
                twopr_s: t2,
                gain: t1.zip(t2).map(|(a, b)| (a - b) / a),
            }
        })
        .collect()
}

/// Writes the rows with the instance gain attached to each 2PR row. Times
/// of runs that hit the deadline are written as [`TIMEOUT_MARK`].
pub fn write_csv(rows: &[BenchRow], out: impl Write) -> Result<()> {
    let gain: BTreeMap<String, Option<f64>> = gains(rows).into_iter().map(|g| (g.protocol, g.gain)).collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "protocol", "engine", "rep", "transitions", "states", "sigma", "p", "q", "p_ptq", "r", "time_s", "timed_out", "gain",
    ])
    .map_err(csv_err)?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let g = match (r.engine, gain.get(&r.protocol).copied().flatten()) {
            (BenchEngine::TwoPr, Some(g)) => format!("{g:.4}"),
            (BenchEngine::TwoPr, None) => TIMEOUT_MARK.to_string(),
            _ => String::new(),
        };
        let time = if r.timed_out {
            TIMEOUT_MARK.to_string()
        } else {
            format!("{:.6}", r.time_s)
        };
        w.write_record([
            r.protocol.clone(),
            r.engine.to_string(),
            r.rep.to_string(),
            r.transitions.to_string(),
            r.states.to_string(),
            r.sigma.to_string(),
            r.p.to_string(),
            opt(r.q),
            opt(r.p_ptq),
            r.r.to_string(),
            time,
            r.timed_out.to_string(),
            g,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Parameters of the generated unrolled suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteSpec {
    pub instances: usize,
    pub core_states: usize,
    pub labels: usize,
    pub extra_edges: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec {
            instances: 20,
            core_states: 250,
            labels: 3,
            extra_edges: 250,
            depth: 39,
            seed: 2024,
        }
    }
}

/// Strongly connected random cores, each unrolled `depth` times.
pub fn unrolled_suite(spec: &SuiteSpec) -> Vec<(String, Lts)> {
    (0..spec.instances)
        .map(|i| {
            let seed = spec.seed.wrapping_add(i as u64);
            let core = gen::gen_strongly_connected(spec.core_states, spec.labels, spec.extra_edges, seed);
            (format!("scc{:02}", i), gen::unroll(&core, spec.depth))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteSpec {
        SuiteSpec {
            instances: 3,
            core_states: 12,
            labels: 2,
            extra_edges: 8,
            depth: 3,
            seed: 5,
        }
    }

    #[test]
    fn rows_per_instance_and_engine() {
        let suite = unrolled_suite(&small());
        let cfg = BenchConfig {
            repeat: 2,
            ..BenchConfig::default()
        };
        let rows = bench_suite(&suite, &cfg).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2);
        for r in &rows {
            r.validate().unwrap();
            assert!(!r.timed_out);
        }
        let g = gains(&rows);
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|g| g.gain.is_some()));
        // r counts distinct principals meeting σ, which both engines agree on
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].r, pair[1].r);
        }
    }

    #[test]
    fn empty_suite_has_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("protocol,engine,rep"));
    }

    #[test]
    fn timeouts_are_marked() {
        let row = BenchRow {
            protocol: "x".into(),
            engine: BenchEngine::TwoPr,
            rep: 0,
            transitions: 1,
            states: 2,
            sigma: 1,
            p: 2,
            q: Some(2),
            p_ptq: Some(1),
            r: 1,
            time_s: 60.0,
            timed_out: true,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches(TIMEOUT_MARK).count(), 2);
    }

    #[test]
    fn broken_chain_is_reported() {
        let row = BenchRow {
            protocol: "x".into(),
            engine: BenchEngine::Explicit,
            rep: 0,
            transitions: 0,
            states: 2,
            sigma: 1,
            p: 1,
            q: None,
            p_ptq: None,
            r: 2,
            time_s: 0.0,
            timed_out: false,
        };
        assert!(row.validate().is_err());
    }
}
