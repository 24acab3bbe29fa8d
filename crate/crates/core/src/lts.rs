//! Finite labeled transition systems.
//!
//! States are dense indices `0..n`. Each label keeps a forward and a backward
//! adjacency in compressed row form, so `post_a` and `pre_a` are both linear
//! in the size of their input plus the edges they touch.
//!
//! Systems are read from and written to the Aldebaran `.aut` format:
//!
//! ```text
//! des (0, 2, 3)
//! (0, "a", 1)
//! (1, "b", 2)
//! ```
//!
//! `.aut` carries a single initial state. A sidecar file with the same stem
//! and extension `.init` (one decimal state id per line) replaces it with an
//! arbitrary initial set.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::region::StateSet;

/// Dense state index.
pub type StateId = u32;

/// Index into the interned label table of an [`Lts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Compressed adjacency of one label.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<StateId>,
}

impl Adjacency {
    fn build(n: usize, edges: impl Iterator<Item = (StateId, StateId)>) -> Self {
        let mut rows: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (x, y) in edges {
            rows[x as usize].push(y);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            targets.extend(row);
            offsets.push(targets.len() as u32);
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    fn row(&self, x: StateId) -> &[StateId] {
        let x = x as usize;
        &self.targets[self.offsets[x] as usize..self.offsets[x + 1] as usize]
    }
}

/// A finite labeled transition system `(Σ, I, L, →)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    n_states: usize,
    labels: Vec<String>,
    fwd: Vec<Adjacency>,
    bwd: Vec<Adjacency>,
    initial: StateSet,
}

impl Lts {
    /// Builds a system from a transition list. Duplicate transitions are
    /// merged; out-of-range states are rejected.
    pub fn new<T, I>(n_states: usize, labels: Vec<String>, transitions: T, initial: I) -> Result<Lts>
    where
        T: IntoIterator<Item = (StateId, LabelId, StateId)>,
        I: IntoIterator<Item = StateId>,
    {
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::Consistency(format!("duplicate label {l:?}")));
            }
        }
        let mut per_label: Vec<Vec<(StateId, StateId)>> = vec![Vec::new(); labels.len()];
        for (x, a, y) in transitions {
            for s in [x, y] {
                if s as usize >= n_states {
                    return Err(Error::StateRange {
                        line: 0,
                        state: s as u64,
                        n_states,
                    });
                }
            }
            let Some(bucket) = per_label.get_mut(a.index()) else {
                return Err(Error::Consistency(format!("label index {} out of range", a.0)));
            };
            bucket.push((x, y));
        }
        let mut init = StateSet::empty(n_states);
        for s in initial {
            if s as usize >= n_states {
                return Err(Error::StateRange {
                    line: 0,
                    state: s as u64,
                    n_states,
                });
            }
            init.insert(s);
        }
        let fwd = per_label
            .iter()
            .map(|e| Adjacency::build(n_states, e.iter().copied()))
            .collect();
        let bwd = per_label
            .iter()
            .map(|e| Adjacency::build(n_states, e.iter().map(|&(x, y)| (y, x))))
            .collect();
        Ok(Lts {
            n_states,
            labels,
            fwd,
            bwd,
            initial: init,
        })
    }

    /// Convenience constructor with string labels interned in first-appearance order.
    pub fn from_edges(
        n_states: usize,
        edges: &[(StateId, &str, StateId)],
        initial: &[StateId],
    ) -> Result<Lts> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut ts = Vec::with_capacity(edges.len());
        for &(x, l, y) in edges {
            let a = *index.entry(l).or_insert_with(|| {
                labels.push(l.to_string());
                (labels.len() - 1) as u32
            });
            ts.push((x, LabelId(a), y));
        }
        Lts::new(n_states, labels, ts, initial.iter().copied())
    }

    #[inline]
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.labels.len() as u32).map(LabelId)
    }

    pub fn label(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|l| l == name)
            .map(|i| LabelId(i as u32))
    }

    pub fn n_transitions(&self) -> usize {
        self.fwd.iter().map(|f| f.targets.len()).sum()
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    /// Replaces the initial set.
    pub fn with_initial(mut self, initial: impl IntoIterator<Item = StateId>) -> Result<Lts> {
        let mut init = StateSet::empty(self.n_states);
        for s in initial {
            if s as usize >= self.n_states {
                return Err(Error::StateRange {
                    line: 0,
                    state: s as u64,
                    n_states: self.n_states,
                });
            }
            init.insert(s);
        }
        self.initial = init;
        Ok(self)
    }

    #[inline]
    pub fn successors(&self, a: LabelId, x: StateId) -> &[StateId] {
        self.fwd[a.index()].row(x)
    }

    #[inline]
    pub fn predecessors(&self, a: LabelId, y: StateId) -> &[StateId] {
        self.bwd[a.index()].row(y)
    }

    /// All transitions ordered by (source, label, target).
    pub fn transitions(&self) -> Vec<(StateId, LabelId, StateId)> {
        let mut out = Vec::with_capacity(self.n_transitions());
        for x in 0..self.n_states as StateId {
            for a in self.label_ids() {
                out.extend(self.successors(a, x).iter().map(|&y| (x, a, y)));
            }
        }
        out
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.n_states)
    }

    pub fn full_set(&self) -> StateSet {
        StateSet::full(self.n_states)
    }

    /// `post_a(X) = { y | ∃x ∈ X. x →a y }`.
    pub fn post_a(&self, a: LabelId, xs: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for x in xs {
            for &y in self.successors(a, x) {
                out.insert(y);
            }
        }
        out
    }

    /// `pre_a(Y) = { x | ∃y ∈ Y. x →a y }`.
    pub fn pre_a(&self, a: LabelId, ys: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for y in ys {
            for &x in self.predecessors(a, y) {
                out.insert(x);
            }
        }
        out
    }

    pub fn post(&self, xs: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for a in self.label_ids() {
            out.union_with(&self.post_a(a, xs));
        }
        out
    }

    pub fn pre(&self, ys: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for a in self.label_ids() {
            out.union_with(&self.pre_a(a, ys));
        }
        out
    }

    /// Successors of a single state under every label.
    pub fn post_of(&self, x: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.fwd.iter().flat_map(move |f| f.row(x).iter().copied())
    }

    /// `post*(I)`, the states reachable from the initial set.
    pub fn post_star(&self) -> StateSet {
        self.post_star_from(&self.initial)
    }

    pub fn post_star_from(&self, from: &StateSet) -> StateSet {
        let mut seen = from.clone();
        let mut work: Vec<StateId> = from.to_vec();
        while let Some(x) = work.pop() {
            for f in &self.fwd {
                for &y in f.row(x) {
                    if seen.insert(y) {
                        work.push(y);
                    }
                }
            }
        }
        seen
    }

    /// Checks that forward and backward adjacency describe the same relation
    /// and that every row is sorted and duplicate-free.
    pub fn check_adjacency(&self) -> Result<()> {
        let mut fw = Vec::new();
        let mut bw = Vec::new();
        for a in self.label_ids() {
            for x in 0..self.n_states as StateId {
                let row = self.successors(a, x);
                let back = self.predecessors(a, x);
                if row.windows(2).any(|w| w[0] >= w[1]) || back.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Consistency(format!("unsorted adjacency at state {x}")));
                }
                fw.extend(row.iter().map(|&y| (a, x, y)));
                bw.extend(back.iter().map(|&p| (a, p, x)));
            }
        }
        fw.sort_unstable();
        bw.sort_unstable();
        if fw != bw {
            return Err(Error::Consistency("forward and backward adjacency differ".into()));
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Aldebaran format

    /// Parses `.aut` text. Labels are interned in order of first appearance.
    pub fn parse_aut(text: &str) -> Result<Lts> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let Some((hline, header)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                msg: "missing `des` header".into(),
            });
        };
        let (init, n_trans, n_states) = parse_header(hline, header)?;
        if init >= n_states as u64 && n_states > 0 {
            return Err(Error::StateRange {
                line: hline,
                state: init,
                n_states,
            });
        }

        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut ts = Vec::with_capacity(n_trans);
        let mut count = 0usize;
        for (line, l) in lines {
            let (x, label, y) = parse_transition(line, l)?;
            for s in [x, y] {
                if s >= n_states as u64 {
                    return Err(Error::StateRange {
                        line,
                        state: s,
                        n_states,
                    });
                }
            }
            let a = match index.get(label) {
                Some(&a) => a,
                None => {
                    labels.push(label.to_string());
                    index.insert(label.to_string(), (labels.len() - 1) as u32);
                    (labels.len() - 1) as u32
                }
            };
            ts.push((x as StateId, LabelId(a), y as StateId));
            count += 1;
        }
        if count != n_trans {
            return Err(Error::Consistency(format!(
                "header declares {n_trans} transitions, found {count}"
            )));
        }
        let initial = (n_states > 0).then_some(init as StateId);
        Lts::new(n_states, labels, ts, initial)
    }

    /// Canonical `.aut` text: transitions sorted by (source, label string,
    /// target), so the text does not depend on label interning order.
    /// The header names the lowest initial state (0 when there is none).
    pub fn to_aut(&self) -> String {
        let mut ts = self.transitions();
        ts.sort_by(|p, q| (p.0, &self.labels[p.1.index()], p.2).cmp(&(q.0, &self.labels[q.1.index()], q.2)));
        let mut out = String::new();
        let init = self.initial.first().unwrap_or(0);
        let _ = writeln!(out, "des ({}, {}, {})", init, ts.len(), self.n_states);
        for (x, a, y) in ts {
            let _ = writeln!(out, "({}, \"{}\", {})", x, self.labels[a.index()], y);
        }
        out
    }

    /// Whether the header alone can express the initial set.
    pub fn needs_init_sidecar(&self) -> bool {
        self.initial.len() != 1
    }

    pub fn init_sidecar(&self) -> String {
        self.initial.iter().map(|s| format!("{s}\n")).collect()
    }

    /// Reads `path`, applying `path.init` (same stem) when it exists.
    pub fn load(path: &Path) -> Result<Lts> {
        let text = std::fs::read_to_string(path)?;
        let lts = Lts::parse_aut(&text)?;
        let side = path.with_extension("init");
        if side.exists() {
            let ids = parse_init(&std::fs::read_to_string(side)?)?;
            return lts.with_initial(ids);
        }
        Ok(lts)
    }

    /// Writes `path` and, when the initial set is not a single state, the
    /// `.init` sidecar next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_aut())?;
        let side = path.with_extension("init");
        if self.needs_init_sidecar() {
            std::fs::write(side, self.init_sidecar())?;
        } else if side.exists() {
            std::fs::remove_file(side)?;
        }
        Ok(())
    }
}

fn parse_u64(line: usize, s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, found {:?}", s.trim()),
    })
}

fn parse_header(line: usize, l: &str) -> Result<(u64, usize, usize)> {
    let bad = || Error::Parse {
        line,
        msg: format!("malformed header {l:?}, expected `des (init, transitions, states)`"),
    };
    let rest = l.strip_prefix("des").ok_or_else(bad)?.trim();
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parse_u64(line, parts[0])?,
        parse_u64(line, parts[1])? as usize,
        parse_u64(line, parts[2])? as usize,
    ))
}

fn parse_transition(line: usize, l: &str) -> Result<(u64, &str, u64)> {
    let bad = |why: &str| Error::Parse {
        line,
        msg: format!("malformed transition {l:?}: {why}"),
    };
    let inner = l
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad("expected `(src, \"label\", dst)`"))?;
    let first = inner.find(',').ok_or_else(|| bad("missing comma"))?;
    let last = inner.rfind(',').ok_or_else(|| bad("missing comma"))?;
    if first == last {
        return Err(bad("expected three fields"));
    }
    let src = parse_u64(line, &inner[..first])?;
    let dst = parse_u64(line, &inner[last + 1..])?;
    let raw = inner[first + 1..last].trim();
    let label = if let Some(q) = raw.strip_prefix('"') {
        q.strip_suffix('"').ok_or_else(|| bad("unterminated label"))?
    } else {
        raw
    };
    Ok((src, label, dst))
}

/// Parses an `.init` sidecar: newline-separated decimal state ids.
pub fn parse_init(text: &str) -> Result<Vec<StateId>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_u64(i + 1, l).map(|v| v as StateId))
        .collect()
}
