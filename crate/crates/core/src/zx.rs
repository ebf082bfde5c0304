//! Circuit ingestion and reduction to phased adjacency instances.
//!
//! A circuit becomes a graph-like diagram of Z spiders joined by Hadamard
//! edges; plugging the output bits turns strong simulation into evaluating
//! `scalar * <x~|H^{otimes N}|A>` on one fixed phased adjacency state. T
//! gates are pulled out into phase gadgets so the Clifford core is factored
//! once and only a small residual block varies across the 2^t terms.

use crate::gf2::BitVector;
use crate::ldl;
use crate::pgs::{ExactAmplitude, PhasedAdjacency};
use crate::sim;
use crate::treedec::TreeDecomposition;
use std::collections::BTreeSet;
use thiserror::Error;

/// Default bound on the number of T/TDG gates accepted by
/// [`clifford_t_strong`].
pub const DEFAULT_T_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    Z(usize),
    X(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
    T(usize),
    Tdg(usize),
}

impl Gate {
    fn qubits(self) -> (usize, Option<usize>) {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::Z(q) | Gate::X(q) | Gate::T(q)
            | Gate::Tdg(q) => (q, None),
            Gate::Cz(a, b) | Gate::Cnot(a, b) => (a, Some(b)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliffordCircuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl CliffordCircuit {
    /// Number of T and TDG gates.
    #[must_use]
    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::T(_) | Gate::Tdg(_))).count()
    }

    /// Whether the circuit is Clifford-only.
    #[must_use]
    pub fn is_clifford(&self) -> bool {
        self.t_count() == 0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unknown gate {token:?}")]
    UnknownGate { line: usize, token: String },
    #[error("line {line}: bad qubit index")]
    BadIndex { line: usize },
    #[error("line {line}: operands must be distinct")]
    DuplicateOperands { line: usize },
}

/// Parse the line-oriented circuit format. Blank lines and `#` comments are
/// ignored; `CNOT a b` is expanded to `H b; CZ a b; H b`; the qubit count is
/// one past the largest index mentioned.
///
/// # Errors
/// Reports unknown gates, malformed indices and repeated two-qubit operands
/// with their line number.
pub fn parse_circuit(text: &str) -> Result<CliffordCircuit, ParseError> {
    let mut gates = Vec::new();
    let mut n = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let name = toks.next().unwrap_or("").to_ascii_uppercase();
        let rest: Vec<&str> = toks.collect();
        let idx = |s: &str| -> Result<usize, ParseError> {
            s.parse::<usize>().map_err(|_| ParseError::BadIndex { line })
        };
        let one = |rest: &[&str]| -> Result<usize, ParseError> {
            if rest.len() != 1 {
                return Err(ParseError::BadIndex { line });
            }
            idx(rest[0])
        };
        let two = |rest: &[&str]| -> Result<(usize, usize), ParseError> {
            if rest.len() != 2 {
                return Err(ParseError::BadIndex { line });
            }
            let (a, b) = (idx(rest[0])?, idx(rest[1])?);
            if a == b {
                return Err(ParseError::DuplicateOperands { line });
            }
            Ok((a, b))
        };
        let mut push = |g: Gate| {
            let (a, b) = g.qubits();
            n = n.max(a + 1).max(b.map_or(0, |x| x + 1));
            gates.push(g);
        };
        match name.as_str() {
            "H" => push(Gate::H(one(&rest)?)),
            "S" => push(Gate::S(one(&rest)?)),
            "SDG" => push(Gate::Sdg(one(&rest)?)),
            "Z" => push(Gate::Z(one(&rest)?)),
            "X" => push(Gate::X(one(&rest)?)),
            "T" => push(Gate::T(one(&rest)?)),
            "TDG" => push(Gate::Tdg(one(&rest)?)),
            "CZ" => {
                let (a, b) = two(&rest)?;
                push(Gate::Cz(a, b));
            }
            "CNOT" => {
                let (a, b) = two(&rest)?;
                push(Gate::H(b));
                push(Gate::Cz(a, b));
                push(Gate::H(b));
            }
            _ => return Err(ParseError::UnknownGate { line, token: name }),
        }
    }
    Ok(CliffordCircuit { n, gates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpiderKind {
    Z,
    X,
}

/// A spider with phase as a multiple of pi/4 (mod 8).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spider {
    pub kind: SpiderKind,
    pub phase: u8,
}

/// General ZX diagram: a spider multigraph with per-edge Hadamard flags and
/// ordered open legs. Killed spiders leave `None` slots until compaction.
#[derive(Clone, Debug)]
pub struct ZxDiagram {
    pub spiders: Vec<Option<Spider>>,
    /// Edge multiset; loops and parallel edges are allowed until the
    /// diagram is normalized.
    pub edges: Vec<(usize, usize, bool)>,
    /// Open legs in boundary order: spider and pending-Hadamard flag.
    pub opens: Vec<(usize, bool)>,
    pub scalar: ExactAmplitude,
    pub graph_like: bool,
}

impl ZxDiagram {
    #[must_use]
    pub fn new() -> Self {
        Self {
            spiders: Vec::new(),
            edges: Vec::new(),
            opens: Vec::new(),
            scalar: ExactAmplitude::one(),
            graph_like: false,
        }
    }

    pub fn add_spider(&mut self, kind: SpiderKind, phase: u8) -> usize {
        self.spiders.push(Some(Spider { kind, phase: phase & 7 }));
        self.spiders.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, hadamard: bool) {
        assert!(self.spiders[u].is_some() && self.spiders[v].is_some(), "edge on dead spider");
        self.edges.push((u, v, hadamard));
    }

    #[must_use]
    pub fn live_spiders(&self) -> usize {
        self.spiders.iter().filter(|s| s.is_some()).count()
    }
}

impl Default for ZxDiagram {
    fn default() -> Self {
        Self::new()
    }
}

/// Build the raw diagram of a circuit: inputs are X(0) spiders carrying the
/// scalar 2^{-1/2} each, Hadamards ride on the wires as edge flags, phase
/// gates append fresh Z spiders, CZ joins the current wire spiders with a
/// Hadamard edge and the scalar sqrt(2).
#[must_use]
pub fn build_diagram(c: &CliffordCircuit) -> ZxDiagram {
    let mut d = ZxDiagram::new();
    let mut cur: Vec<(usize, bool)> = Vec::with_capacity(c.n);
    for _ in 0..c.n {
        let s = d.add_spider(SpiderKind::X, 0);
        d.scalar = d.scalar.mul(&ExactAmplitude::phase_form(-1, 0));
        cur.push((s, false));
    }
    let phase = |d: &mut ZxDiagram, cur: &mut Vec<(usize, bool)>, q: usize, m: u8| {
        let (s, had) = cur[q];
        let s2 = d.add_spider(SpiderKind::Z, m);
        d.add_edge(s, s2, had);
        cur[q] = (s2, false);
    };
    let plain_point = |d: &mut ZxDiagram, cur: &mut Vec<(usize, bool)>, q: usize| {
        if cur[q].1 {
            let (s, _) = cur[q];
            let s2 = d.add_spider(SpiderKind::Z, 0);
            d.add_edge(s, s2, true);
            cur[q] = (s2, false);
        }
    };
    for g in &c.gates {
        match *g {
            Gate::H(q) => cur[q].1 ^= true,
            Gate::S(q) => phase(&mut d, &mut cur, q, 2),
            Gate::Sdg(q) => phase(&mut d, &mut cur, q, 6),
            Gate::Z(q) => phase(&mut d, &mut cur, q, 4),
            Gate::T(q) => phase(&mut d, &mut cur, q, 1),
            Gate::Tdg(q) => phase(&mut d, &mut cur, q, 7),
            Gate::X(q) => {
                cur[q].1 ^= true;
                phase(&mut d, &mut cur, q, 4);
                cur[q].1 ^= true;
            }
            Gate::Cz(a, b) => {
                plain_point(&mut d, &mut cur, a);
                plain_point(&mut d, &mut cur, b);
                d.add_edge(cur[a].0, cur[b].0, true);
                d.scalar = d.scalar.mul(&ExactAmplitude::phase_form(1, 0));
            }
            Gate::Cnot(a, b) => {
                cur[b].1 ^= true;
                plain_point(&mut d, &mut cur, a);
                plain_point(&mut d, &mut cur, b);
                d.add_edge(cur[a].0, cur[b].0, true);
                d.scalar = d.scalar.mul(&ExactAmplitude::phase_form(1, 0));
                cur[b].1 ^= true;
            }
        }
    }
    d.opens = cur;
    d
}

/// Normalize to graph-like form: only Z spiders, internal edges all
/// Hadamard and simple, open legs plain with at most one per spider. The
/// represented tensor (including the scalar) is unchanged.
#[must_use]
pub fn to_graph_like(d: &ZxDiagram) -> ZxDiagram {
    let mut d = d.clone();
    // Color change: X(m) equals Z(m) with a Hadamard on every leg.
    for v in 0..d.spiders.len() {
        let Some(sp) = d.spiders[v] else { continue };
        if sp.kind == SpiderKind::X {
            d.spiders[v] = Some(Spider { kind: SpiderKind::Z, phase: sp.phase });
            for e in &mut d.edges {
                if e.0 == v {
                    e.2 ^= true;
                }
                if e.1 == v {
                    e.2 ^= true;
                }
            }
            for o in &mut d.opens {
                if o.0 == v {
                    o.1 ^= true;
                }
            }
        }
    }
    // Fuse plain edges, drop loops, cancel parallel Hadamard pairs.
    loop {
        if let Some(ei) = d.edges.iter().position(|&(a, b, h)| !h && a == b) {
            d.edges.swap_remove(ei);
            continue;
        }
        if let Some(ei) = d.edges.iter().position(|&(_, _, h)| !h) {
            let (a, b, _) = d.edges.swap_remove(ei);
            let pb = d.spiders[b].expect("edge endpoint is dead").phase;
            if let Some(sa) = &mut d.spiders[a] {
                sa.phase = (sa.phase + pb) & 7;
            }
            d.spiders[b] = None;
            for e in &mut d.edges {
                if e.0 == b {
                    e.0 = a;
                }
                if e.1 == b {
                    e.1 = a;
                }
            }
            for o in &mut d.opens {
                if o.0 == b {
                    o.0 = a;
                }
            }
            continue;
        }
        if let Some(ei) = d.edges.iter().position(|&(a, b, h)| h && a == b) {
            let (a, _, _) = d.edges.swap_remove(ei);
            if let Some(sa) = &mut d.spiders[a] {
                sa.phase = (sa.phase + 4) & 7;
            }
            d.scalar = d.scalar.mul(&ExactAmplitude::phase_form(-1, 0));
            continue;
        }
        let mut pair = None;
        'outer: for i in 0..d.edges.len() {
            for j in i + 1..d.edges.len() {
                let (a1, b1, _) = d.edges[i];
                let (a2, b2, _) = d.edges[j];
                if (a1, b1) == (a2, b2) || (a1, b1) == (b2, a2) {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        d.edges.swap_remove(j);
        d.edges.swap_remove(i);
        d.scalar = d.scalar.mul(&ExactAmplitude::phase_form(-2, 0));
    }
    // Open legs: plain flags only, one per spider, via identity splices.
    for oi in 0..d.opens.len() {
        if d.opens[oi].1 {
            let p = d.add_spider(SpiderKind::Z, 0);
            d.add_edge(d.opens[oi].0, p, true);
            d.opens[oi] = (p, false);
        }
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for oi in 0..d.opens.len() {
        if !seen.insert(d.opens[oi].0) {
            let p1 = d.add_spider(SpiderKind::Z, 0);
            let p2 = d.add_spider(SpiderKind::Z, 0);
            d.add_edge(d.opens[oi].0, p1, true);
            d.add_edge(p1, p2, true);
            d.opens[oi] = (p2, false);
            seen.insert(p2);
        }
    }
    // Compact away the fused spiders.
    let mut remap = vec![usize::MAX; d.spiders.len()];
    let mut out = ZxDiagram::new();
    out.scalar = d.scalar;
    for (v, sp) in d.spiders.iter().enumerate() {
        if let Some(sp) = sp {
            remap[v] = out.add_spider(sp.kind, sp.phase);
        }
    }
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b, h) in &d.edges {
        assert!(h, "plain edge survived normalization");
        let (x, y) = (remap[a].min(remap[b]), remap[a].max(remap[b]));
        assert!(edge_set.insert((x, y)), "parallel edge survived normalization");
    }
    for &(x, y) in &edge_set {
        out.add_edge(x, y, true);
    }
    out.opens = d.opens.iter().map(|&(v, h)| (remap[v], h)).collect();
    out.graph_like = true;
    out
}

/// Contract a diagram to its dense tensor over the open legs (index bit i
/// is open leg i), in exact arithmetic. Reference implementation for
/// validating rewrites; exponential in spiders and opens.
///
/// # Panics
/// Panics if the diagram has more than 16 live spiders or 16 opens.
#[must_use]
pub fn dense_tensor(d: &ZxDiagram) -> Vec<ExactAmplitude> {
    let live: Vec<usize> =
        (0..d.spiders.len()).filter(|&v| d.spiders[v].is_some()).collect();
    assert!(live.len() <= 16 && d.opens.len() <= 16, "diagram too large for dense contraction");
    let slot: std::collections::HashMap<usize, usize> =
        live.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Leg coupling of a spider toward wire value w: Z spiders force w equal
    // to the spider variable, X spiders couple through a Hadamard.
    let leg = |kind: SpiderKind, y: bool, w: bool| -> ExactAmplitude {
        match kind {
            SpiderKind::Z => {
                if y == w {
                    ExactAmplitude::one()
                } else {
                    ExactAmplitude::zero()
                }
            }
            SpiderKind::X => ExactAmplitude::phase_form(-1, if y && w { 4 } else { 0 }),
        }
    };
    let mut out = Vec::new();
    for ext in 0u64..1 << d.opens.len() {
        let mut total = ExactAmplitude::zero();
        for assign in 0u64..1 << live.len() {
            let y = |v: usize| assign >> slot[&v] & 1 == 1;
            let mut term = ExactAmplitude::one();
            for (i, &v) in live.iter().enumerate() {
                let sp = d.spiders[v].expect("live spider");
                if assign >> i & 1 == 1 {
                    term = term.mul(&ExactAmplitude::phase_form(0, i64::from(sp.phase)));
                }
            }
            for &(a, b, had) in &d.edges {
                let (ka, kb) = (
                    d.spiders[a].expect("live spider").kind,
                    d.spiders[b].expect("live spider").kind,
                );
                let mut f = ExactAmplitude::zero();
                for wa in [false, true] {
                    for wb in [false, true] {
                        let mid = if had {
                            ExactAmplitude::phase_form(-1, if wa && wb { 4 } else { 0 })
                        } else if wa == wb {
                            ExactAmplitude::one()
                        } else {
                            ExactAmplitude::zero()
                        };
                        f = f.add(&leg(ka, y(a), wa).mul(&mid).mul(&leg(kb, y(b), wb)));
                    }
                }
                term = term.mul(&f);
            }
            for (oi, &(v, pending)) in d.opens.iter().enumerate() {
                let kv = d.spiders[v].expect("live spider").kind;
                let bit = ext >> oi & 1 == 1;
                let mut f = ExactAmplitude::zero();
                for w in [false, true] {
                    let mid = if pending {
                        ExactAmplitude::phase_form(-1, if w && bit { 4 } else { 0 })
                    } else if w == bit {
                        ExactAmplitude::one()
                    } else {
                        ExactAmplitude::zero()
                    };
                    f = f.add(&leg(kv, y(v), w).mul(&mid));
                }
                term = term.mul(&f);
            }
            total = total.add(&term);
        }
        out.push(total.mul(&d.scalar));
    }
    out
}

/// A strong-simulation instance: the circuit amplitude at output bits `x`
/// equals `scalar * <x~|H^{otimes N}|A>` where the label `x~` carries fixed
/// bits `y` on the internal set `S` and `x` (xored with the stored
/// defaults) at the output positions.
#[derive(Clone, Debug)]
pub struct PgsInstance {
    pub a: PhasedAdjacency,
    /// Internal (fixed) vertex indices, ascending.
    pub s: Vec<usize>,
    /// Fixed label bits, one per entry of `s`.
    pub y: BitVector,
    /// Output qubit -> vertex index.
    pub output_map: Vec<usize>,
    pub scalar: ExactAmplitude,
    pub td: Option<TreeDecomposition>,
    x0: BitVector,
}

impl PgsInstance {
    /// Assemble the full evaluation label for output bits `x`.
    ///
    /// # Panics
    /// Panics if `x` has the wrong length.
    #[must_use]
    pub fn assemble_label(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.output_map.len(), "output label length mismatch");
        let mut full = self.x0.clone();
        for (q, &v) in self.output_map.iter().enumerate() {
            if x.get(q) {
                full.flip(v);
            }
        }
        full
    }

    /// Evaluate circuit amplitudes at the given output labels.
    ///
    /// # Panics
    /// Panics if a label has the wrong length.
    #[must_use]
    pub fn amplitudes(&self, xs: &[BitVector]) -> Vec<ExactAmplitude> {
        let ctx = sim::prepare(&self.a, self.td.as_ref()).expect("instance decomposition is valid");
        let labels: Vec<BitVector> = xs.iter().map(|x| self.assemble_label(x)).collect();
        sim::strong_eval(&ctx, &labels)
            .into_iter()
            .map(|amp| amp.mul(&self.scalar))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("gate {0:?} needs the Clifford+T path; use clifford_t_strong")]
    UnsupportedGate(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TCapError {
    #[error("circuit has {t} T gates, over the cap of {cap}")]
    OverCap { t: usize, cap: usize },
}

/// Direct graph-like builder: wires hold a current Z spider plus a pending
/// Hadamard flag, so the produced diagram needs no rewriting. Records bags
/// of live spiders per event for the slice decomposition.
struct InstanceBuilder {
    n_spiders: usize,
    phases: Vec<u8>,
    adj: Vec<BTreeSet<usize>>,
    scalar: ExactAmplitude,
    cur: Vec<(usize, bool)>,
    retired: Vec<bool>,
    bags: Vec<Vec<usize>>,
    td_edges: Vec<(usize, usize)>,
    last_bag: Vec<usize>,
    path_head: usize,
}

impl InstanceBuilder {
    fn new(n: usize) -> Self {
        let mut b = Self {
            n_spiders: 0,
            phases: Vec::new(),
            adj: Vec::new(),
            scalar: ExactAmplitude::one(),
            cur: Vec::new(),
            retired: vec![false; n],
            bags: Vec::new(),
            td_edges: Vec::new(),
            last_bag: Vec::new(),
            path_head: 0,
        };
        for _ in 0..n {
            let s = b.fresh(0);
            b.scalar = b.scalar.mul(&ExactAmplitude::phase_form(-1, 0));
            b.cur.push((s, true));
        }
        let inputs: Vec<usize> = (0..n).collect();
        b.bags.push(inputs.clone());
        for s in inputs {
            b.last_bag[s] = 0;
        }
        b
    }

    fn fresh(&mut self, phase: u8) -> usize {
        self.phases.push(phase & 7);
        self.adj.push(BTreeSet::new());
        self.last_bag.push(usize::MAX);
        self.n_spiders += 1;
        self.n_spiders - 1
    }

    fn push_bag(&mut self, parent: usize, mut bag: Vec<usize>) -> usize {
        bag.sort_unstable();
        bag.dedup();
        let idx = self.bags.len();
        for &s in &bag {
            self.last_bag[s] = idx;
        }
        self.bags.push(bag);
        self.td_edges.push((parent, idx));
        idx
    }

    /// Bag on the wire path: every live wire spider plus `extra`.
    fn event(&mut self, extra: &[usize]) {
        let mut bag: Vec<usize> = self
            .cur
            .iter()
            .zip(&self.retired)
            .filter(|(_, &r)| !r)
            .map(|((s, _), _)| *s)
            .collect();
        bag.extend_from_slice(extra);
        let parent = self.path_head;
        self.path_head = self.push_bag(parent, bag);
    }

    /// Leaf bag hanging off the last bag that contains `anchor`.
    fn side_event(&mut self, anchor: usize, members: Vec<usize>) {
        let parent = self.last_bag[anchor];
        assert_ne!(parent, usize::MAX, "anchor spider was never bagged");
        self.push_bag(parent, members);
    }

    fn toggle_edge(&mut self, u: usize, v: usize) -> bool {
        assert_ne!(u, v, "self-loops never arise in the direct build");
        if self.adj[u].remove(&v) {
            self.adj[v].remove(&u);
            false
        } else {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
            true
        }
    }

    fn add_phase(&mut self, q: usize, m: u8) {
        if self.cur[q].1 {
            let (s, _) = self.cur[q];
            let s2 = self.fresh(m);
            self.toggle_edge(s, s2);
            self.cur[q] = (s2, false);
            self.event(&[s]);
        } else {
            let s = self.cur[q].0;
            self.phases[s] = (self.phases[s] + m) & 7;
        }
    }

    fn plain_point(&mut self, q: usize) {
        if self.cur[q].1 {
            self.add_phase(q, 0);
        }
    }

    fn apply(&mut self, g: Gate) {
        match g {
            Gate::H(q) => self.cur[q].1 ^= true,
            Gate::S(q) => self.add_phase(q, 2),
            Gate::Sdg(q) => self.add_phase(q, 6),
            Gate::Z(q) => self.add_phase(q, 4),
            Gate::T(q) => self.add_phase(q, 1),
            Gate::Tdg(q) => self.add_phase(q, 7),
            Gate::X(q) => {
                self.cur[q].1 ^= true;
                self.add_phase(q, 4);
                self.cur[q].1 ^= true;
            }
            Gate::Cz(a, b) => {
                self.plain_point(a);
                self.plain_point(b);
                let (sa, sb) = (self.cur[a].0, self.cur[b].0);
                if self.toggle_edge(sa, sb) {
                    self.scalar = self.scalar.mul(&ExactAmplitude::phase_form(1, 0));
                } else {
                    // sqrt(2) from the new coupling times 1/2 from the
                    // cancelled parallel pair.
                    self.scalar = self.scalar.mul(&ExactAmplitude::phase_form(-1, 0));
                }
                self.event(&[]);
            }
            Gate::Cnot(a, b) => {
                self.cur[b].1 ^= true;
                self.apply(Gate::Cz(a, b));
                self.cur[b].1 ^= true;
            }
        }
    }

    /// Extract a phase gadget from every odd-phase spider: the odd part
    /// moves to a fresh leaf behind an even buffer.
    fn gadgetize(&mut self) -> Vec<usize> {
        let mut sites = Vec::new();
        for s in 0..self.n_spiders {
            if self.phases[s] & 1 == 1 {
                self.phases[s] = (self.phases[s] + 7) & 7;
                let d = self.fresh(0);
                let g = self.fresh(1);
                self.toggle_edge(s, d);
                self.toggle_edge(d, g);
                self.side_event(s, vec![s, d, g]);
                sites.push(g);
            }
        }
        sites
    }

    /// Plug the outputs: each wire ends in a dedicated plug spider that
    /// receives the output bit through the uniform Hadamard coupling.
    fn plug_outputs(&mut self) -> Vec<usize> {
        let mut map = Vec::with_capacity(self.cur.len());
        for q in 0..self.cur.len() {
            let v = if self.cur[q].1 {
                self.cur[q].0
            } else {
                let (s, _) = self.cur[q];
                let p = self.fresh(0);
                self.toggle_edge(s, p);
                p
            };
            self.event(&[v]);
            self.retired[q] = true;
            map.push(v);
        }
        map
    }

    /// Attach rank-fixing chains until the mod-2 core matrix over `kappa`
    /// (everything but `sites` and the chain spiders themselves) is
    /// invertible. Each chain is the identity on the state but flips one
    /// diagonal bit of the core; the two chain spiders must stay on the
    /// boundary, or eliminating them would undo the flip. Picking the flip
    /// inside a kernel vector's support shrinks the kernel by exactly one
    /// dimension per chain. Returns the chain spiders in ascending order.
    fn fix_core_rank(&mut self, sites: &[usize]) -> Vec<usize> {
        let mut boundary: BTreeSet<usize> = sites.iter().copied().collect();
        let mut dummies = Vec::new();
        loop {
            let kappa: Vec<usize> =
                (0..self.n_spiders).filter(|v| !boundary.contains(v)).collect();
            let m = self.core_omega1(&kappa);
            let kernel = m.kernel_basis();
            if kernel.rows() == 0 {
                break;
            }
            let pivot = kernel.row_iter_ones(0).next().expect("kernel vector is nonzero");
            let s = kappa[pivot];
            let d = self.fresh(0);
            let p = self.fresh(2);
            self.toggle_edge(s, d);
            self.toggle_edge(d, p);
            self.phases[s] = (self.phases[s] + 6) & 7;
            self.side_event(s, vec![s, d, p]);
            boundary.insert(d);
            boundary.insert(p);
            dummies.push(d);
            dummies.push(p);
        }
        dummies
    }

    fn core_omega1(&self, kappa: &[usize]) -> crate::gf2::BitMatrix {
        let mut m = crate::gf2::BitMatrix::zeros(kappa.len(), kappa.len());
        for (i, &v) in kappa.iter().enumerate() {
            let mu = self.phases[v] >> 1;
            let dv = (2 * (mu >> 1) + 4 - mu) & 3;
            if dv & 1 == 1 {
                m.set(i, i, true);
            }
            for (j, &w) in kappa.iter().enumerate() {
                if j > i && self.adj[v].contains(&w) {
                    m.set(i, j, true);
                    m.set(j, i, true);
                }
            }
        }
        m
    }

    fn finish(self, output_map: Vec<usize>, sites: &[usize], with_td: bool) -> PgsInstance {
        let n = self.n_spiders;
        let site_set: BTreeSet<usize> = sites.iter().copied().collect();
        let mut a = PhasedAdjacency::new(n);
        let mut edge_count = 0usize;
        for v in 0..n {
            for &w in &self.adj[v] {
                if w > v {
                    a.set_edge(v, w, true);
                    edge_count += 1;
                }
            }
        }
        let mut x0 = BitVector::zeros(n);
        for v in 0..n {
            if site_set.contains(&v) {
                continue;
            }
            assert!(self.phases[v] & 1 == 0, "odd phase escaped gadget extraction");
            let mu = self.phases[v] >> 1;
            a.set_diag(v, (2 * (mu >> 1) + 4 - mu) & 3);
            if mu >> 1 & 1 == 1 {
                x0.set(v, true);
            }
        }
        let out_set: BTreeSet<usize> = output_map.iter().copied().collect();
        let s: Vec<usize> = (0..n).filter(|v| !out_set.contains(v)).collect();
        let mut y = BitVector::zeros(s.len());
        for (i, &v) in s.iter().enumerate() {
            if x0.get(v) {
                y.set(i, true);
            }
        }
        let fold = 2 * n as i64 - output_map.len() as i64 - edge_count as i64;
        let scalar = self.scalar.mul(&ExactAmplitude::phase_form(fold, 0));
        let td = with_td.then(|| TreeDecomposition {
            bags: self.bags,
            edges: self.td_edges,
            root: Some(0),
        });
        PgsInstance { a, s, y, output_map, scalar, td, x0 }
    }
}

/// Reduce a Clifford circuit to a strong-simulation instance with an exact
/// scalar and a slice tree decomposition.
///
/// # Errors
/// T gates are rejected; they need [`clifford_t_strong`].
pub fn reduce_to_pgs(c: &CliffordCircuit) -> Result<PgsInstance, ReduceError> {
    if let Some(g) = c.gates.iter().find(|g| matches!(g, Gate::T(_) | Gate::Tdg(_))) {
        return Err(ReduceError::UnsupportedGate(format!("{g:?}")));
    }
    let mut b = InstanceBuilder::new(c.n);
    for &g in &c.gates {
        b.apply(g);
    }
    let map = b.plug_outputs();
    Ok(b.finish(map, &[], true))
}

/// Tree decomposition over the instance spiders of [`reduce_to_pgs`],
/// tracking which spiders are alive around each construction event. Valid
/// for the gadgetized diagram too, as long as no rank-fixing chains were
/// needed.
#[must_use]
pub fn circuit_slice_decomposition(c: &CliffordCircuit) -> TreeDecomposition {
    let mut b = InstanceBuilder::new(c.n);
    for &g in &c.gates {
        b.apply(g);
    }
    let sites = b.gadgetize();
    let map = b.plug_outputs();
    b.finish(map, &sites, true).td.expect("slice decomposition was requested")
}

/// Gadgetize a Clifford+T circuit: T phases move to gadget leaves listed in
/// the returned sites, and identity chains make the mod-2 core (all spiders
/// but the boundary) invertible. The boundary consists of the sites plus the
/// chain spiders, returned separately; the instance carries the template
/// with every site diagonal at its identity-branch value.
#[must_use]
pub fn gadgetize_t(c: &CliffordCircuit) -> (PgsInstance, Vec<usize>, Vec<usize>) {
    let mut b = InstanceBuilder::new(c.n);
    for &g in &c.gates {
        b.apply(g);
    }
    let sites = b.gadgetize();
    let map = b.plug_outputs();
    let dummies = b.fix_core_rank(&sites);
    let inst = b.finish(map, &sites, false);
    (inst, sites, dummies)
}

fn gray_flip_site(step: u64) -> usize {
    (step + 1).trailing_zeros() as usize
}

/// Exact strong simulation of a Clifford+T circuit at the given output
/// labels, with the default T cap and Gray-code term order.
///
/// # Errors
/// Fails when the T count exceeds [`DEFAULT_T_CAP`].
pub fn clifford_t_strong(
    c: &CliffordCircuit,
    xs: &[BitVector],
) -> Result<Vec<ExactAmplitude>, TCapError> {
    clifford_t_strong_with(c, xs, DEFAULT_T_CAP, true)
}

/// [`clifford_t_strong`] with an explicit cap and term order. `gray=false`
/// enumerates site masks in index order and rebuilds each residual snapshot
/// from scratch; both orders produce identical exact results.
///
/// # Errors
/// Fails when the T count exceeds `cap`.
pub fn clifford_t_strong_with(
    c: &CliffordCircuit,
    xs: &[BitVector],
    cap: usize,
    gray: bool,
) -> Result<Vec<ExactAmplitude>, TCapError> {
    let t_gates = c.t_count();
    if t_gates > cap {
        return Err(TCapError::OverCap { t: t_gates, cap });
    }
    if t_gates == 0 {
        let inst = reduce_to_pgs(c).expect("clifford circuit reduces");
        return Ok(inst.amplitudes(xs));
    }
    let (inst, sites, dummies) = gadgetize_t(c);
    let t = sites.len();
    let n = inst.a.n();
    // The boundary keeps the gadget sites and the rank-fixing chain spiders;
    // sites come first because chains are created after every site.
    let mut border = sites.clone();
    border.extend_from_slice(&dummies);
    let r = border.len();
    let mut keep = vec![false; n];
    for &sv in &border {
        keep[sv] = true;
    }
    let bord = ldl::ldl_bordered(&inst.a.omega1(), &keep);
    assert_eq!(bord.resid_vars, border, "boundary spiders are created in ascending order");
    let k_k = bord.perm.len();
    // Fold the template's second diagonal bits into the pivot constants.
    let mut v_fold = bord.v.clone();
    for pos in 0..k_k {
        if inst.a.diag(bord.perm[pos]) >> 1 & 1 == 1 {
            v_fold.flip(pos);
        }
    }
    // Per query: eliminate the core once, keeping the residual image and
    // the core's contribution to the exponent of i.
    let mut labels_t = Vec::with_capacity(xs.len());
    let mut core_scalars = Vec::with_capacity(xs.len());
    for x in xs {
        let full = inst.assemble_label(x);
        let mut rhs = BitVector::zeros(k_k);
        for pos in 0..k_k {
            if full.get(bord.perm[pos]) ^ v_fold.get(pos) {
                rhs.set(pos, true);
            }
        }
        let (g, h) = bord.forward_solve(&rhs);
        let q = bord.quad_exponent(&g);
        let alpha = (-(bord.p_count as i64) + 2 * i64::from(q)).rem_euclid(8);
        core_scalars.push(ExactAmplitude::phase_form(-(k_k as i64), alpha));
        let mut lab = BitVector::zeros(r);
        for (i, &sv) in border.iter().enumerate() {
            if full.get(sv) ^ h.get(i) {
                lab.set(i, true);
            }
        }
        labels_t.push(lab);
    }
    let y_coef = ExactAmplitude::from_coeffs([1, -1, 1, -1], 1);
    let x_coef = ExactAmplitude::one().sub(&y_coef);
    let mut xpow = vec![ExactAmplitude::one(); t + 1];
    let mut ypow = vec![ExactAmplitude::one(); t + 1];
    for i in 1..=t {
        xpow[i] = xpow[i - 1].mul(&x_coef);
        ypow[i] = ypow[i - 1].mul(&y_coef);
    }
    // Residual snapshot over the whole boundary; only the leading t site
    // slots ever change with the term mask, the chain slots are fixed. The
    // factorization ran on the mod-2 lift, so the second diagonal bits of
    // the template go back in here.
    let mut base_diag = vec![0u8; r];
    let mut snap = PhasedAdjacency::new(r);
    for i in 0..r {
        for j in i + 1..r {
            if bord.resid_off.get(i, j) {
                snap.set_edge(i, j, true);
            }
        }
        base_diag[i] = (bord.resid_diag[i] + (inst.a.diag(border[i]) >> 1 << 1)) & 3;
        snap.set_diag(i, base_diag[i]);
    }
    let mut totals = vec![ExactAmplitude::zero(); xs.len()];
    let mut mask = 0u64;
    for step in 0..1u64 << t {
        let current = if gray {
            if step > 0 {
                let site = gray_flip_site(step - 1);
                mask ^= 1 << site;
                let cur = snap.diag(site);
                snap.set_diag(site, (cur + if mask >> site & 1 == 1 { 3 } else { 1 }) & 3);
            }
            mask
        } else {
            mask = step;
            for i in 0..t {
                let tau = mask >> i & 1 == 1;
                snap.set_diag(i, (base_diag[i] + if tau { 3 } else { 0 }) & 3);
            }
            mask
        };
        let ctx = sim::prepare(&snap, None).expect("trivial decomposition is valid");
        let amps = sim::strong_eval(&ctx, &labels_t);
        let weight = current.count_ones() as usize;
        let coeff = xpow[t - weight].mul(&ypow[weight]);
        for (j, amp) in amps.iter().enumerate() {
            totals[j] = totals[j].add(&coeff.mul(&core_scalars[j]).mul(amp));
        }
    }
    Ok(totals.into_iter().map(|v| v.mul(&inst.scalar)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_bools(&bits.iter().map(|&b| b != 0).collect::<Vec<_>>())
    }

    fn all_labels(n: usize) -> Vec<BitVector> {
        (0..1u64 << n)
            .map(|idx| {
                BitVector::from_bools(&(0..n).map(|q| idx >> q & 1 == 1).collect::<Vec<_>>())
            })
            .collect()
    }

    #[test]
    fn parses_and_expands() {
        let c = parse_circuit("H 0\nCZ 0 1").unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.gates.len(), 2);
        let c = parse_circuit("CNOT 0 1").unwrap();
        assert_eq!(c.gates, vec![Gate::H(1), Gate::Cz(0, 1), Gate::H(1)]);
        let c = parse_circuit("# comment\n\n  s 2  # trailing\n").unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.gates, vec![Gate::S(2)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_circuit("FOO 0"),
            Err(ParseError::UnknownGate { line: 1, token: "FOO".into() })
        );
        assert_eq!(parse_circuit("H 0\nCZ 1 1"), Err(ParseError::DuplicateOperands { line: 2 }));
        assert_eq!(parse_circuit("H x"), Err(ParseError::BadIndex { line: 1 }));
        assert_eq!(parse_circuit("CZ 0"), Err(ParseError::BadIndex { line: 1 }));
    }

    #[test]
    fn graph_like_normalization_preserves_tensors() {
        let circuits = ["H 0", "H 0\nCZ 0 1\nH 1", "S 0\nH 0\nS 0", "X 0\nCZ 0 1\nZ 1\nH 0"];
        for text in circuits {
            let c = parse_circuit(text).unwrap();
            let raw = build_diagram(&c);
            let gl = to_graph_like(&raw);
            assert!(gl.graph_like);
            let t1 = dense_tensor(&raw);
            let t2 = dense_tensor(&gl);
            assert_eq!(t1, t2, "tensor changed for {text:?}");
        }
    }

    #[test]
    fn graph_like_form_flattens_double_hadamard() {
        let c = parse_circuit("H 0\nH 0").unwrap();
        let raw = build_diagram(&c);
        let gl = to_graph_like(&raw);
        // The pair cancels: the result is the identity wire into |0>, at
        // most one splice spider past the input, with a plain open leg.
        assert!(gl.graph_like);
        assert!(gl.live_spiders() <= 2);
        assert_eq!(gl.opens.len(), 1);
        assert!(!gl.opens[0].1);
        let tensor = dense_tensor(&gl);
        assert_eq!(tensor[0], ExactAmplitude::one());
        assert_eq!(tensor[1], ExactAmplitude::zero());
    }

    #[test]
    fn reduce_matches_dense_oracle_on_small_circuits() {
        let programs = [
            "",
            "H 0",
            "H 0\nCZ 0 1\nH 1",
            "X 0",
            "H 0\nS 0\nH 0",
            "H 0\nH 1\nCZ 0 1\nS 1\nCZ 1 2\nH 2\nZ 2",
            "CNOT 0 1\nCNOT 1 0\nSDG 1\nH 0\nCZ 0 1",
        ];
        for text in programs {
            let mut c = parse_circuit(text).unwrap();
            c.n = c.n.max(1);
            let inst = reduce_to_pgs(&c).unwrap();
            let labels = all_labels(c.n);
            let got = inst.amplitudes(&labels);
            let dense = oracle::statevector(&c);
            for (x, amp) in labels.iter().zip(&got) {
                let want = dense.amplitude(x);
                assert!(
                    (amp.to_complex() - want).norm() < 1e-9,
                    "mismatch for {text:?} at {x:?}: got {amp:?}, want {want}"
                );
            }
        }
    }

    #[test]
    fn slice_decomposition_validates_with_bounded_width() {
        let c = parse_circuit("H 0\nCZ 0 1\nS 1\nCZ 1 2\nH 2\nCZ 0 2\nZ 0").unwrap();
        let inst = reduce_to_pgs(&c).unwrap();
        let td = inst.td.as_ref().unwrap();
        let width = td.validate(&inst.a.graph()).expect("slice decomposition is valid");
        assert!(width <= c.n, "width {width} exceeds the wire count");
    }

    #[test]
    fn t_free_gadgetization_matches_reduce_path() {
        let c = parse_circuit("H 0\nCZ 0 1\nS 1\nH 1").unwrap();
        let (inst, sites, _) = gadgetize_t(&c);
        assert!(sites.is_empty());
        let labels = all_labels(2);
        let via_t = clifford_t_strong(&c, &labels).unwrap();
        let via_reduce = reduce_to_pgs(&c).unwrap().amplitudes(&labels);
        assert_eq!(via_t, via_reduce);
        let _ = inst;
    }

    #[test]
    fn branch_sum_over_full_instances_matches_dense_oracle() {
        for text in ["T 0", "H 0\nT 0"] {
            let c = parse_circuit(text).unwrap();
            let (inst, sites, _) = gadgetize_t(&c);
            let t = sites.len();
            let labels = all_labels(c.n);
            let full_labels: Vec<BitVector> =
                labels.iter().map(|x| inst.assemble_label(x)).collect();
            let y_coef = ExactAmplitude::from_coeffs([1, -1, 1, -1], 1);
            let x_coef = ExactAmplitude::one().sub(&y_coef);
            let mut totals = vec![ExactAmplitude::zero(); labels.len()];
            for mask in 0u64..1 << t {
                let mut a = inst.a.clone();
                let mut coeff = ExactAmplitude::one();
                for (i, &sv) in sites.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        a.set_diag(sv, (a.diag(sv) + 3) & 3);
                        coeff = coeff.mul(&y_coef);
                    } else {
                        coeff = coeff.mul(&x_coef);
                    }
                }
                let ctx = sim::prepare(&a, None).unwrap();
                let amps = sim::strong_eval(&ctx, &full_labels);
                for (j, amp) in amps.iter().enumerate() {
                    totals[j] = totals[j].add(&coeff.mul(amp));
                }
            }
            let dense = oracle::statevector(&c);
            for (x, tot) in labels.iter().zip(&totals) {
                let got = tot.mul(&inst.scalar).to_complex();
                let want = dense.amplitude(x);
                assert!((got - want).norm() < 1e-9, "mismatch for {text:?} at {x:?}: got {got} want {want}");
            }
        }
    }

    #[test]
    fn single_t_amplitudes_are_exact() {
        let c = parse_circuit("H 0\nT 0").unwrap();
        let amps = clifford_t_strong(&c, &all_labels(1)).unwrap();
        assert_eq!(amps[0], ExactAmplitude::phase_form(-1, 0));
        assert_eq!(amps[1], ExactAmplitude::phase_form(-1, 1));
    }

    #[test]
    fn clifford_t_matches_dense_oracle() {
        let programs = [
            "T 0",
            "H 0\nT 0\nH 0",
            "H 0\nT 0\nTDG 0\nH 0",
            "H 0\nH 1\nCZ 0 1\nT 1\nH 1\nT 0\nCZ 0 1",
            "H 0\nT 0\nH 0\nT 0\nH 0\nT 0",
            "H 0\nH 1\nH 2\nCZ 0 1\nT 2\nCZ 1 2\nTDG 1\nH 1\nT 1\nCZ 0 2",
        ];
        for text in programs {
            let c = parse_circuit(text).unwrap();
            let labels = all_labels(c.n);
            let amps = clifford_t_strong(&c, &labels).unwrap();
            let dense = oracle::statevector(&c);
            let mut norm = ExactAmplitude::zero();
            for (x, amp) in labels.iter().zip(&amps) {
                let want = dense.amplitude(x);
                assert!(
                    (amp.to_complex() - want).norm() < 1e-9,
                    "mismatch for {text:?} at {x:?}"
                );
                norm = norm.add(&amp.mag2());
            }
            assert_eq!(norm, ExactAmplitude::one(), "norm broke for {text:?}");
        }
    }

    #[test]
    fn gray_and_naive_term_orders_agree_exactly() {
        let c = parse_circuit("H 0\nH 1\nT 0\nCZ 0 1\nT 1\nH 0\nT 0\nCZ 0 1").unwrap();
        let labels = all_labels(2);
        let gray = clifford_t_strong_with(&c, &labels, 20, true).unwrap();
        let naive = clifford_t_strong_with(&c, &labels, 20, false).unwrap();
        assert_eq!(gray, naive);
    }

    #[test]
    fn t_cap_is_enforced() {
        let c = parse_circuit("T 0\nT 0\nT 0").unwrap();
        let err = clifford_t_strong_with(&c, &all_labels(1), 2, true).unwrap_err();
        assert_eq!(err, TCapError::OverCap { t: 3, cap: 2 });
    }

    #[test]
    fn decomposition_coefficients_satisfy_ring_identities() {
        let y = ExactAmplitude::from_coeffs([1, -1, 1, -1], 1);
        let x = ExactAmplitude::one().sub(&y);
        assert_eq!(x.add(&y), ExactAmplitude::one());
        let i = ExactAmplitude::phase_form(0, 2);
        assert_eq!(x.add(&i.mul(&y)), ExactAmplitude::phase_form(0, 1));
    }
}
