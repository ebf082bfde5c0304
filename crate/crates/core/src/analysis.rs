//! Local-complementation equivalence of graph states and the low-rank
//! graph-state learning protocol.
//!
//! Ground truth for LC-equivalence is breadth-first closure under
//! single-vertex local complementation; the algebraic witness (a pivoted
//! partial inversion over GF(2)) is checked against it on small instances.

use crate::gf2::{BitMatrix, BitVector};
use crate::pgs::PhasedAdjacency;
use crate::sim::{self, SampleSpec, SampleStrategy, WeakSamples};
use crate::treedec::Graph;
use crate::zx::Gate;
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

/// Largest vertex count accepted by the exhaustive orbit routines.
pub const ORBIT_MAX_N: usize = 8;

/// Largest vertex count accepted by [`orbit_diameter`].
pub const DIAMETER_MAX_N: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LcError {
    #[error("graph has {n} vertices, over the exhaustive-search limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("graphs have different vertex counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
}

/// Certificate that two graph states are LC-equivalent: under the vertex
/// orderings `pi_a` and `pi_b` (position `p` holds original vertex
/// `pi[p]`), the permuted adjacency of `a` plus `D(u)` equals the mod-2
/// part of the partial inversion of the permuted adjacency of `b` plus
/// `D(v)` over the leading `k` positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcWitness {
    pub pi_a: Vec<usize>,
    pub pi_b: Vec<usize>,
    pub u: BitVector,
    pub v: BitVector,
    pub k: usize,
}

impl LcWitness {
    /// The identity witness: no permutation, no diagonals, empty pivot block.
    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self {
            pi_a: (0..n).collect(),
            pi_b: (0..n).collect(),
            u: BitVector::zeros(n),
            v: BitVector::zeros(n),
            k: 0,
        }
    }
}

fn is_permutation(pi: &[usize], n: usize) -> bool {
    if pi.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

fn permuted_adjacency(g: &Graph, pi: &[usize]) -> BitMatrix {
    let n = g.n();
    let mut m = BitMatrix::zeros(n, n);
    for p in 0..n {
        for q in p + 1..n {
            if g.has_edge(pi[p], pi[q]) {
                m.set(p, q, true);
                m.set(q, p, true);
            }
        }
    }
    m
}

fn invert(m: &BitMatrix) -> Option<BitMatrix> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "inverse of a non-square matrix");
    let mut work = m.clone();
    let mut inv = BitMatrix::identity(n);
    for c in 0..n {
        let p = (c..n).find(|&r| work.get(r, c))?;
        if p != c {
            work.swap_rows(c, p);
            inv.swap_rows(c, p);
        }
        for r in 0..n {
            if r != c && work.get(r, c) {
                work.xor_rows(r, c);
                inv.xor_rows(r, c);
            }
        }
    }
    Some(inv)
}

/// Mod-2 partial inversion over the leading `k` block: maps
/// `[[A11, A12], [A21, A22]]` to
/// `[[A11^-1, (A21 A11^-1)^T], [A21 A11^-1, A22 + A21 A11^-1 A12]]`.
/// `None` when the leading block is singular.
fn partial_invert_f2(m: &BitMatrix, k: usize) -> Option<BitMatrix> {
    let n = m.rows();
    let lead: Vec<usize> = (0..k).collect();
    let rest: Vec<usize> = (k..n).collect();
    let a11 = m.submatrix(&lead, &lead);
    let b11 = invert(&a11)?;
    let a21 = m.submatrix(&rest, &lead);
    let a12 = m.submatrix(&lead, &rest);
    let b21 = a21.mul(&b11);
    let b22_delta = b21.mul(&a12);
    let mut out = BitMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            if b11.get(i, j) {
                out.set(i, j, true);
            }
        }
    }
    for i in 0..n - k {
        for j in 0..k {
            if b21.get(i, j) {
                out.set(k + i, j, true);
                out.set(j, k + i, true);
            }
        }
    }
    for i in 0..n - k {
        for j in 0..n - k {
            if m.get(k + i, k + j) ^ b22_delta.get(i, j) {
                out.set(k + i, k + j, true);
            }
        }
    }
    Some(out)
}

/// Check an LC-equivalence witness: permute both adjacencies, add the
/// diagonals, partially invert the `b` side over the leading `k` block and
/// compare against the `a` side, diagonal included. A singular leading
/// block or malformed witness is simply invalid.
///
/// # Panics
/// Panics if the graphs have different vertex counts.
#[must_use]
pub fn lc_verify_witness(a: &Graph, b: &Graph, wit: &LcWitness) -> bool {
    let n = a.n();
    assert_eq!(n, b.n(), "vertex count mismatch");
    if !is_permutation(&wit.pi_a, n)
        || !is_permutation(&wit.pi_b, n)
        || wit.u.len() != n
        || wit.v.len() != n
        || wit.k > n
    {
        return false;
    }
    let mut mb = permuted_adjacency(b, &wit.pi_b);
    for p in 0..n {
        if wit.v.get(p) {
            mb.flip(p, p);
        }
    }
    let Some(gk) = partial_invert_f2(&mb, wit.k) else {
        return false;
    };
    let ma = permuted_adjacency(a, &wit.pi_a);
    for p in 0..n {
        for q in 0..n {
            let want = if p == q { wit.u.get(p) } else { ma.get(p, q) };
            if gk.get(p, q) != want {
                return false;
            }
        }
    }
    true
}

fn encode(g: &Graph) -> u64 {
    let n = g.n();
    assert!(n <= ORBIT_MAX_N, "encoding supports up to {ORBIT_MAX_N} vertices");
    let mut code = 0u64;
    for &(u, v) in g.edges() {
        code |= 1 << (u * n + v);
    }
    code
}

fn decode(code: u64, n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if code >> (u * n + v) & 1 == 1 {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn tau_code(code: u64, v: usize, n: usize) -> u64 {
    let bit = |a: usize, b: usize| (a.min(b) * n + a.max(b)) as u32;
    let nbrs: Vec<usize> =
        (0..n).filter(|&w| w != v && code >> bit(v, w) & 1 == 1).collect();
    let mut out = code;
    for (i, &w1) in nbrs.iter().enumerate() {
        for &w2 in &nbrs[i + 1..] {
            out ^= 1 << bit(w1, w2);
        }
    }
    out
}

fn orbit_codes(start: u64, n: usize) -> HashSet<u64> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(code) = queue.pop_front() {
        for v in 0..n {
            let next = tau_code(code, v, n);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// The labeled local-complementation orbit of a graph, sorted by adjacency
/// encoding.
///
/// # Errors
/// Refuses graphs with more than [`ORBIT_MAX_N`] vertices.
pub fn lc_orbit(g: &Graph) -> Result<Vec<Graph>, LcError> {
    let n = g.n();
    if n > ORBIT_MAX_N {
        return Err(LcError::TooLarge { n, max: ORBIT_MAX_N });
    }
    let mut codes: Vec<u64> = orbit_codes(encode(g), n).into_iter().collect();
    codes.sort_unstable();
    Ok(codes.into_iter().map(|c| decode(c, n)).collect())
}

/// Exhaustive search for a verifying witness, shared vertex ordering on
/// both sides: enumerate the diagonal `v` and the leading pivot set, take
/// `u` from the diagonal of the partial inversion, keep the first
/// candidate that passes [`lc_verify_witness`]. `None` when no candidate
/// verifies.
///
/// # Errors
/// Refuses graphs over [`ORBIT_MAX_N`] vertices or with mismatched sizes.
pub fn find_lc_witness(a: &Graph, b: &Graph) -> Result<Option<LcWitness>, LcError> {
    let n = a.n();
    if n != b.n() {
        return Err(LcError::SizeMismatch(n, b.n()));
    }
    if n > ORBIT_MAX_N {
        return Err(LcError::TooLarge { n, max: ORBIT_MAX_N });
    }
    let ma0 = permuted_adjacency(a, &(0..n).collect::<Vec<_>>());
    for vbits in 0u64..1 << n {
        let mut v = BitVector::zeros(n);
        let mut mb0 = permuted_adjacency(b, &(0..n).collect::<Vec<_>>());
        for p in 0..n {
            if vbits >> p & 1 == 1 {
                v.set(p, true);
                mb0.flip(p, p);
            }
        }
        let max_k = mb0.rank();
        for subset in 0u64..1 << n {
            let k = subset.count_ones() as usize;
            if k > max_k {
                continue;
            }
            let mut pi: Vec<usize> = (0..n).filter(|&p| subset >> p & 1 == 1).collect();
            pi.extend((0..n).filter(|&p| subset >> p & 1 == 0));
            let perm_of = |m0: &BitMatrix| {
                let mut m = BitMatrix::zeros(n, n);
                for p in 0..n {
                    for q in 0..n {
                        if m0.get(pi[p], pi[q]) {
                            m.set(p, q, true);
                        }
                    }
                }
                m
            };
            let mb = perm_of(&mb0);
            let Some(gk) = partial_invert_f2(&mb, k) else {
                continue;
            };
            let ma = perm_of(&ma0);
            let off_match = (0..n).all(|p| {
                (0..n).all(|q| p == q || gk.get(p, q) == ma.get(p, q))
            });
            if !off_match {
                continue;
            }
            let mut u = BitVector::zeros(n);
            for p in 0..n {
                if gk.get(p, p) {
                    u.set(p, true);
                }
            }
            let mut vperm = BitVector::zeros(n);
            for p in 0..n {
                if v.get(pi[p]) {
                    vperm.set(p, true);
                }
            }
            let wit = LcWitness { pi_a: pi.clone(), pi_b: pi, u, v: vperm, k };
            if lc_verify_witness(a, b, &wit) {
                return Ok(Some(wit));
            }
        }
    }
    Ok(None)
}

/// Outcome of an LC-equivalence query.
#[derive(Clone, Debug)]
pub struct LcEquivalence {
    pub equivalent: bool,
    pub witness: Option<LcWitness>,
}

/// Decide labeled LC-equivalence by orbit closure; on equivalence, also
/// produce a verified algebraic witness.
///
/// # Errors
/// Refuses graphs over [`ORBIT_MAX_N`] vertices or with mismatched sizes.
///
/// # Panics
/// Panics if an equivalent pair admits no witness; the characterization
/// guarantees one exists.
pub fn lc_equivalent(g1: &Graph, g2: &Graph) -> Result<LcEquivalence, LcError> {
    let n = g1.n();
    if n != g2.n() {
        return Err(LcError::SizeMismatch(n, g2.n()));
    }
    if n > ORBIT_MAX_N {
        return Err(LcError::TooLarge { n, max: ORBIT_MAX_N });
    }
    if !orbit_codes(encode(g1), n).contains(&encode(g2)) {
        return Ok(LcEquivalence { equivalent: false, witness: None });
    }
    let wit = find_lc_witness(g1, g2)?
        .expect("LC-equivalent pair admits a verifying witness");
    assert!(lc_verify_witness(g1, g2, &wit), "extracted witness must verify");
    Ok(LcEquivalence { equivalent: true, witness: Some(wit) })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

fn relabel_code(code: u64, pi: &[usize], n: usize) -> u64 {
    let mut out = 0u64;
    for u in 0..n {
        for v in u + 1..n {
            if code >> (u * n + v) & 1 == 1 {
                let (a, b) = (pi[u].min(pi[v]), pi[u].max(pi[v]));
                out |= 1 << (a * n + b);
            }
        }
    }
    out
}

/// Diameter of the move graph on the unlabeled LC orbit: isomorphism
/// classes are nodes, single complementations are edges, and the result is
/// the largest shortest-path distance between classes.
///
/// # Errors
/// Refuses graphs over [`DIAMETER_MAX_N`] vertices.
///
/// # Panics
/// Panics if the diameter exceeds `3n/2` rounded down; the bound holds for
/// every orbit.
pub fn orbit_diameter(g: &Graph) -> Result<usize, LcError> {
    let n = g.n();
    if n > DIAMETER_MAX_N {
        return Err(LcError::TooLarge { n, max: DIAMETER_MAX_N });
    }
    let perms = permutations(n);
    let mut canon_memo: HashMap<u64, u64> = HashMap::new();
    let mut canon = |code: u64| -> u64 {
        if let Some(&c) = canon_memo.get(&code) {
            return c;
        }
        let c = perms.iter().map(|pi| relabel_code(code, pi, n)).min().unwrap_or(code);
        canon_memo.insert(code, c);
        c
    };
    // BFS over classes, collecting the quotient move graph.
    let start = canon(encode(g));
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut reps = vec![start];
    index.insert(start, 0);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
    let mut head = 0;
    while head < reps.len() {
        let code = reps[head];
        for v in 0..n {
            let next = canon(tau_code(code, v, n));
            let id = *index.entry(next).or_insert_with(|| {
                reps.push(next);
                adj.push(Vec::new());
                reps.len() - 1
            });
            if id != head && !adj[head].contains(&id) {
                adj[head].push(id);
                adj[id].push(head);
            }
        }
        head += 1;
    }
    let classes = reps.len();
    let mut diameter = 0;
    for s in 0..classes {
        let mut dist = vec![usize::MAX; classes];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        for &d in &dist {
            assert_ne!(d, usize::MAX, "orbit classes must be mutually reachable");
            diameter = diameter.max(d);
        }
    }
    assert!(diameter <= 3 * n / 2, "orbit diameter {diameter} breaks the 3n/2 bound");
    Ok(diameter)
}

/// Result of a learning run: the recovered rank, the disentangling circuit
/// (CNOT layer then X layer), the qubits left carrying the state, the
/// number of one-copy measurements consumed, and whether the recovered
/// span was complete.
#[derive(Clone, Debug)]
pub struct LearnResult {
    pub r: usize,
    pub gates: Vec<Gate>,
    pub data_qubits: Vec<usize>,
    pub measurements: usize,
    pub success: bool,
}

/// Simulate the low-rank learning protocol on computational-basis
/// measurements of `H^{otimes n}|G>`: outcome differences are span samples
/// of the adjacency row space; sampling stops once the accumulated rank
/// stagnates for `ceil(log2(1/delta))` consecutive draws. The emitted
/// circuit routes every dependent coordinate onto the recovered basis, so
/// on success it maps the state to (data qubits) tensor `|0...0>`.
///
/// # Panics
/// Panics unless `0 < delta < 1`.
#[must_use]
pub fn learn_graph_state(target: &Graph, delta: f64, seed: u64) -> LearnResult {
    assert!(delta > 0.0 && delta < 1.0, "delta must be a probability in (0,1)");
    let n = target.n();
    let s = ((1.0 / delta).log2().ceil() as usize).max(1);
    let budget = (n + 1) * s + 1;
    let a = PhasedAdjacency::from_graph(target);
    let ctx = sim::prepare(&a, None).expect("trivial decomposition is valid");
    let spec = SampleSpec { s: Vec::new(), y: BitVector::zeros(n), seed, count: budget };
    let WeakSamples::Samples(draws) = sim::weak_sample(&ctx, &spec, SampleStrategy::Auto)
    else {
        unreachable!("unconditioned sampling always has support")
    };
    let m0 = draws[0].clone();
    let mut basis = BitMatrix::zeros(0, n);
    let mut measurements = 1;
    let mut stagnant = 0;
    for draw in &draws[1..] {
        if stagnant >= s {
            break;
        }
        measurements += 1;
        let mut diff = draw.clone();
        diff.xor_assign(&m0);
        if basis.in_span(&diff).is_some() {
            stagnant += 1;
        } else {
            let mut grown = BitMatrix::zeros(basis.rows() + 1, n);
            for i in 0..basis.rows() {
                grown.set_row(i, &basis.row(i));
            }
            grown.set_row(basis.rows(), &diff);
            basis = grown;
            stagnant = 0;
        }
    }
    let r = basis.rows();
    // Coordinates whose basis columns are independent carry the state;
    // every other coordinate is an affine function of them.
    let mut data_qubits = Vec::with_capacity(r);
    let mut probe = BitMatrix::zeros(0, r);
    for j in 0..n {
        if probe.rows() == r {
            break;
        }
        let col = basis.column(j);
        if probe.in_span(&col).is_none() {
            let mut grown = BitMatrix::zeros(probe.rows() + 1, r);
            for i in 0..probe.rows() {
                grown.set_row(i, &probe.row(i));
            }
            grown.set_row(probe.rows(), &col);
            probe = grown;
            data_qubits.push(j);
        }
    }
    assert_eq!(data_qubits.len(), r, "basis has column rank r");
    let rest: Vec<usize> = (0..n).filter(|j| !data_qubits.contains(j)).collect();
    let vp = basis.submatrix(&(0..r).collect::<Vec<_>>(), &data_qubits).transpose();
    let vrest = basis.submatrix(&(0..r).collect::<Vec<_>>(), &rest).transpose();
    let m = vrest.mul(&invert(&vp).expect("rows at data coordinates are independent"));
    let mut gates = Vec::new();
    for (i, &tgt) in rest.iter().enumerate() {
        for (j, &ctl) in data_qubits.iter().enumerate() {
            if m.get(i, j) {
                gates.push(Gate::Cnot(ctl, tgt));
            }
        }
    }
    for (i, &tgt) in rest.iter().enumerate() {
        let mut bit = m0.get(tgt);
        for (j, &ctl) in data_qubits.iter().enumerate() {
            if m.get(i, j) && m0.get(ctl) {
                bit = !bit;
            }
        }
        if bit {
            gates.push(Gate::X(tgt));
        }
    }
    let mut adj = BitMatrix::zeros(n, n);
    for &(x, y) in target.edges() {
        adj.set(x, y, true);
        adj.set(y, x, true);
    }
    let success = r == adj.rank();
    LearnResult { r, gates, data_qubits, measurements, success }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DenseState;

    #[test]
    fn identity_witness_verifies_equal_graphs() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!(lc_verify_witness(&g, &g, &LcWitness::identity(3)));
        let h = Graph::from_edges(3, &[(0, 1)]);
        assert!(!lc_verify_witness(&g, &h, &LcWitness::identity(3)));
    }

    #[test]
    fn path_and_triangle_are_equivalent() {
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let res = lc_equivalent(&p3, &k3).unwrap();
        assert!(res.equivalent);
        let wit = res.witness.unwrap();
        assert!(lc_verify_witness(&p3, &k3, &wit));
        let empty = Graph::new(3);
        let res = lc_equivalent(&p3, &empty).unwrap();
        assert!(!res.equivalent);
        assert!(res.witness.is_none());
        assert_eq!(find_lc_witness(&p3, &empty).unwrap(), None);
    }

    #[test]
    fn empty_graph_orbit_is_a_singleton() {
        let g = Graph::new(4);
        let orbit = lc_orbit(&g).unwrap();
        assert_eq!(orbit, vec![Graph::new(4)]);
    }

    #[test]
    fn star_orbit_contains_the_complete_graph() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(lc_orbit(&star).unwrap().contains(&k4));
    }

    #[test]
    fn labeled_orbits_partition_all_four_vertex_graphs() {
        let n = 4;
        let mut seen: HashSet<u64> = HashSet::new();
        let mut total = 0usize;
        for code in 0u64..1 << 6 {
            // edge bits in pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let mut g = Graph::new(n);
            for (b, &(u, v)) in pairs.iter().enumerate() {
                if code >> b & 1 == 1 {
                    g.add_edge(u, v);
                }
            }
            let enc = encode(&g);
            if seen.contains(&enc) {
                continue;
            }
            let orbit = orbit_codes(enc, n);
            total += orbit.len();
            seen.extend(orbit);
        }
        assert_eq!(total, 64);
    }

    #[test]
    fn small_orbit_diameters_respect_the_bound() {
        assert_eq!(orbit_diameter(&Graph::new(3)).unwrap(), 0);
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!(orbit_diameter(&p3).unwrap() <= 4);
        let p5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(orbit_diameter(&p5).unwrap() <= 7);
    }

    #[test]
    fn too_large_inputs_are_refused() {
        let g = Graph::new(9);
        assert_eq!(lc_orbit(&g).unwrap_err(), LcError::TooLarge { n: 9, max: 8 });
        let h = Graph::new(8);
        assert_eq!(
            orbit_diameter(&h).unwrap_err(),
            LcError::TooLarge { n: 8, max: 7 }
        );
    }

    #[test]
    fn learning_the_empty_graph_needs_no_gates() {
        let res = learn_graph_state(&Graph::new(3), 0.01, 0);
        assert_eq!(res.r, 0);
        assert!(res.gates.is_empty());
        assert!(res.success);
        assert_eq!(res.measurements, 1 + 7);
    }

    #[test]
    fn learning_a_single_edge_recovers_rank_two() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let res = learn_graph_state(&g, 0.01, 0);
        assert!(res.success);
        assert_eq!(res.r, 2);
    }

    #[test]
    fn disentangler_zeroes_the_dependent_qubits() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (0, 4), (1, 4)]);
        for seed in 0..5 {
            let res = learn_graph_state(&g, 0.01, seed);
            assert!(res.success, "seed {seed} missed the span");
            let mut dense = DenseState::from_graph(&g);
            for q in 0..5 {
                dense.apply_h(q);
            }
            for gate in &res.gates {
                dense.apply_gate(gate);
            }
            let rest: Vec<usize> =
                (0..5).filter(|q| !res.data_qubits.contains(q)).collect();
            for (idx, amp) in dense.amps().iter().enumerate() {
                if rest.iter().any(|&q| idx >> q & 1 == 1) {
                    assert!(amp.norm() < 1e-9, "support leaked to index {idx}");
                }
            }
        }
    }
}
