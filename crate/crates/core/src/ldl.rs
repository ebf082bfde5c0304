//! Block LDL factorization of symmetric matrices over GF(2), with 1x1 and
//! anti-diagonal 2x2 pivots, in dense form or implicitly along a tree
//! decomposition.
//!
//! The elimination also tracks a mod-4 diagonal trajectory: the input is
//! lifted to integers {0,1} and every trailing update subtracts from the
//! diagonal mod 4. The second bit of a variable's diagonal at the moment it
//! is eliminated is recorded in `v` (pivots) or `z` (peeled variables); these
//! carry bits are what the amplitude formula of the simulation layer consumes.

use crate::gf2::{BitMatrix, BitVector};
use crate::treedec::{binarize_and_root, Graph, TdError, TreeDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DBlock {
    Zero,
    One,
    AntiDiag2,
}

/// One elimination event, in original variable indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Pivot1(usize),
    Pivot2(usize, usize),
    Peel(usize),
}

/// Explicit factorization: `omega1(P L D L^T P^T)` equals the input, with
/// `perm[position] = original index`, L row-permuted accordingly.
///
/// In reduced form L is n x rank and D contains no Zero blocks; the full
/// form appends a unit column and a Zero block per peeled variable.
#[derive(Clone, Debug)]
pub struct LdlFactorization {
    pub perm: Vec<usize>,
    pub l: BitMatrix,
    pub d: Vec<DBlock>,
    pub rank: usize,
    pub reduced: bool,
    /// Second diagonal bits at pivot time, one per pivot position.
    pub v: BitVector,
    /// Second diagonal bits at peel time, one per peeled position in order.
    pub z: BitVector,
    pub steps: Vec<Step>,
}

impl LdlFactorization {
    /// `omega1(P L D L^T P^T)` mapped back to original indices.
    #[must_use]
    pub fn reconstruct(&self) -> BitMatrix {
        let n = self.perm.len();
        let df2 = d_to_f2(&self.d);
        let m = self.l.mul(&df2).mul(&self.l.transpose());
        let mut out = BitMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if m.get(i, j) {
                    out.set(self.perm[i], self.perm[j], true);
                }
            }
        }
        out
    }
}

/// D blocks as an explicit square F2 matrix (Zero blocks excluded: the
/// matrix is `cols x cols` where cols counts One/AntiDiag2 positions first).
fn d_to_f2(d: &[DBlock]) -> BitMatrix {
    let width: usize = d
        .iter()
        .map(|b| match b {
            DBlock::Zero | DBlock::One => 1,
            DBlock::AntiDiag2 => 2,
        })
        .sum();
    let mut m = BitMatrix::zeros(width, width);
    let mut p = 0;
    for b in d {
        match b {
            DBlock::Zero => p += 1,
            DBlock::One => {
                m.set(p, p, true);
                p += 1;
            }
            DBlock::AntiDiag2 => {
                m.set(p, p + 1, true);
                m.set(p + 1, p, true);
                p += 2;
            }
        }
    }
    m
}

/// Accumulates elimination output across fronts.
#[derive(Default)]
struct RawAcc {
    cols: Vec<Vec<usize>>,
    col_bag: Vec<usize>,
    d: Vec<DBlock>,
    pivot_vars: Vec<usize>,
    peel_vars: Vec<usize>,
    peel_bag: Vec<usize>,
    v_bits: Vec<bool>,
    z_bits: Vec<bool>,
    steps: Vec<Step>,
}

/// Eliminate inside one front. `local` is the off-diagonal coupling matrix
/// over `vars` (zero diagonal); `diag` is the global mod-4 diagonal.
/// Variables with `eligible` false survive to the parent untouched. Returns
/// the local indices that remain (boundary plus delayed).
fn process_front(
    local: &mut BitMatrix,
    vars: &[usize],
    eligible: &[bool],
    diag: &mut [u8],
    acc: &mut RawAcc,
    bag: usize,
    mut script: Option<&mut std::slice::Iter<Step>>,
) -> Vec<usize> {
    let f = vars.len();
    let mut alive: Vec<bool> = vec![true; f];
    let li_of = |v: usize, vars: &[usize]| -> usize {
        vars.binary_search(&v).expect("variable not in front")
    };
    loop {
        let pick: Option<Step> = if let Some(it) = script.as_deref_mut() {
            it.next().copied()
        } else {
            let peel = (0..f).find(|&i| {
                alive[i] && eligible[i] && diag[vars[i]] & 1 == 0 && local.row_is_zero(i)
            });
            if let Some(i) = peel {
                Some(Step::Peel(vars[i]))
            } else if let Some(i) =
                (0..f).find(|&i| alive[i] && eligible[i] && diag[vars[i]] & 1 == 1)
            {
                Some(Step::Pivot1(vars[i]))
            } else {
                let mut found = None;
                'scan: for i in 0..f {
                    if !alive[i] || !eligible[i] || diag[vars[i]] & 1 == 1 {
                        continue;
                    }
                    for j in i + 1..f {
                        if alive[j]
                            && eligible[j]
                            && diag[vars[j]] & 1 == 0
                            && local.get(i, j)
                        {
                            found = Some((i, j));
                            break 'scan;
                        }
                    }
                }
                found.map(|(i, j)| Step::Pivot2(vars[i], vars[j]))
            }
        };
        let Some(step) = pick else { break };
        match step {
            Step::Peel(u) => {
                let i = li_of(u, vars);
                assert!(alive[i] && eligible[i], "peel of unavailable variable {u}");
                assert!(
                    diag[u] & 1 == 0 && local.row_is_zero(i),
                    "variable {u} is not peelable"
                );
                acc.z_bits.push(diag[u] >> 1 & 1 == 1);
                acc.peel_vars.push(u);
                acc.peel_bag.push(bag);
                acc.steps.push(step);
                alive[i] = false;
            }
            Step::Pivot1(u) => {
                let i = li_of(u, vars);
                assert!(alive[i] && eligible[i], "pivot on unavailable variable {u}");
                assert!(diag[u] & 1 == 1, "1x1 pivot needs an odd diagonal at {u}");
                acc.v_bits.push(diag[u] >> 1 & 1 == 1);
                let row = local.row(i);
                let mut col: Vec<usize> = row.iter_ones().map(|r| vars[r]).collect();
                col.push(u);
                col.sort_unstable();
                acc.cols.push(col);
                acc.col_bag.push(bag);
                acc.d.push(DBlock::One);
                acc.pivot_vars.push(u);
                acc.steps.push(step);
                // clear row/col of the pivot, then rank-one update the rest
                for r in row.iter_ones() {
                    local.set(r, i, false);
                }
                for word in local.row_words_mut(i) {
                    *word = 0;
                }
                for r in row.iter_ones() {
                    diag[vars[r]] = (diag[vars[r]] + 3) & 3;
                    local.xor_row_with(r, &row);
                    local.flip(r, r);
                }
                alive[i] = false;
            }
            Step::Pivot2(u, w) => {
                let (i, j) = (li_of(u, vars), li_of(w, vars));
                assert!(alive[i] && alive[j] && eligible[i] && eligible[j]);
                assert!(
                    diag[u] & 1 == 0 && diag[w] & 1 == 0 && local.get(i, j),
                    "2x2 pivot needs even diagonals and an odd coupling at ({u},{w})"
                );
                acc.v_bits.push(diag[u] >> 1 & 1 == 1);
                acc.v_bits.push(diag[w] >> 1 & 1 == 1);
                let (mut rowi, mut rowj) = (local.row(i), local.row(j));
                rowi.set(j, false);
                rowj.set(i, false);
                // the pair of L columns swaps the Schur couplings
                let mut col_u: Vec<usize> = rowj.iter_ones().map(|r| vars[r]).collect();
                col_u.push(u);
                col_u.sort_unstable();
                let mut col_w: Vec<usize> = rowi.iter_ones().map(|r| vars[r]).collect();
                col_w.push(w);
                col_w.sort_unstable();
                acc.cols.push(col_u);
                acc.cols.push(col_w);
                acc.col_bag.push(bag);
                acc.col_bag.push(bag);
                acc.d.push(DBlock::AntiDiag2);
                acc.pivot_vars.push(u);
                acc.pivot_vars.push(w);
                acc.steps.push(step);
                for r in rowi.iter_ones() {
                    local.set(r, i, false);
                }
                for r in rowj.iter_ones() {
                    local.set(r, j, false);
                }
                local.set(i, j, false);
                local.set(j, i, false);
                for word in local.row_words_mut(i) {
                    *word = 0;
                }
                for word in local.row_words_mut(j) {
                    *word = 0;
                }
                for r in rowi.iter_ones() {
                    if rowj.get(r) {
                        diag[vars[r]] = (diag[vars[r]] + 2) & 3;
                    }
                    local.xor_row_with(r, &rowj);
                }
                for r in rowj.iter_ones() {
                    local.xor_row_with(r, &rowi);
                }
                alive[i] = false;
                alive[j] = false;
            }
        }
    }
    (0..f).filter(|&i| alive[i]).collect()
}

fn finalize(n: usize, acc: RawAcc) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>, BitVector, BitVector) {
    let k = acc.pivot_vars.len();
    let mut perm = Vec::with_capacity(n);
    perm.extend_from_slice(&acc.pivot_vars);
    perm.extend_from_slice(&acc.peel_vars);
    assert_eq!(perm.len(), n, "elimination left variables unprocessed");
    let mut pos_of = vec![0usize; n];
    for (p, &orig) in perm.iter().enumerate() {
        pos_of[orig] = p;
    }
    let cols: Vec<Vec<usize>> = acc
        .cols
        .iter()
        .map(|c| {
            let mut out: Vec<usize> = c.iter().map(|&orig| pos_of[orig]).collect();
            out.sort_unstable();
            out
        })
        .collect();
    let mut v = BitVector::zeros(k);
    for (i, &b) in acc.v_bits.iter().enumerate() {
        if b {
            v.set(i, true);
        }
    }
    let mut z = BitVector::zeros(n - k);
    for (i, &b) in acc.z_bits.iter().enumerate() {
        if b {
            z.set(i, true);
        }
    }
    (perm, pos_of, cols, v, z)
}

fn explicit_l(n: usize, cols: &[Vec<usize>]) -> BitMatrix {
    let mut l = BitMatrix::zeros(n, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for &pos in col {
            l.set(pos, c, true);
        }
    }
    l
}

fn run_dense(a: &BitMatrix, script: Option<&[Step]>) -> (RawAcc, usize) {
    assert!(a.is_symmetric(), "input matrix must be symmetric");
    let n = a.rows();
    let mut diag: Vec<u8> = (0..n).map(|i| u8::from(a.get(i, i))).collect();
    let mut local = a.clone();
    for i in 0..n {
        local.set(i, i, false);
    }
    let vars: Vec<usize> = (0..n).collect();
    let eligible = vec![true; n];
    let mut acc = RawAcc::default();
    let mut it;
    let cursor = match script {
        Some(s) => {
            it = s.iter();
            Some(&mut it)
        }
        None => None,
    };
    let left = process_front(&mut local, &vars, &eligible, &mut diag, &mut acc, 0, cursor);
    assert!(left.is_empty(), "dense elimination must clear every variable");
    let k = acc.pivot_vars.len();
    (acc, k)
}

fn factorization_from(acc: RawAcc, n: usize, reduced: bool) -> LdlFactorization {
    let k = acc.pivot_vars.len();
    let steps = acc.steps.clone();
    let mut d = acc.d.clone();
    let (perm, _pos, cols, v, z) = finalize(n, acc);
    let mut l = explicit_l(n, &cols);
    if !reduced {
        let mut full = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in l.row_iter_ones(r) {
                full.set(r, c, true);
            }
        }
        for p in k..n {
            full.set(p, p, true);
            d.push(DBlock::Zero);
        }
        l = full;
    }
    LdlFactorization { perm, l, d, rank: k, reduced, v, z, steps }
}

/// Full-form factorization: L is n x n unit lower-triangular, peeled
/// variables carry Zero blocks.
///
/// # Panics
/// Panics if the input is not symmetric.
#[must_use]
pub fn ldl_dense(a: &BitMatrix) -> LdlFactorization {
    let (acc, _) = run_dense(a, None);
    factorization_from(acc, a.rows(), false)
}

/// Reduced factorization: L is n x rank, D has no Zero blocks.
#[must_use]
pub fn ldl_reduced(a: &BitMatrix) -> LdlFactorization {
    let (acc, _) = run_dense(a, None);
    factorization_from(acc, a.rows(), true)
}

/// Replay a fixed elimination script (reduced form). Used to compare two
/// factorization paths under an identical pivot order.
///
/// # Panics
/// Panics if a scripted step is inadmissible at its turn.
#[must_use]
pub fn ldl_dense_forced(a: &BitMatrix, steps: &[Step]) -> LdlFactorization {
    let (acc, _) = run_dense(a, Some(steps));
    factorization_from(acc, a.rows(), true)
}

/// Partial factorization that eliminates every variable outside `keep` and
/// leaves the kept variables as an explicit Schur-complement residual.
#[derive(Clone, Debug)]
pub struct BorderedLdl {
    /// Eliminated original indices in pivot order.
    pub perm: Vec<usize>,
    /// Strictly-below-diagonal L entries among eliminated positions, per column.
    pub cols_pivot: Vec<Vec<usize>>,
    /// L entries landing in residual slots, per column.
    pub cols_resid: Vec<Vec<usize>>,
    pub d: Vec<DBlock>,
    /// Second diagonal bits at pivot time for the pure mod-2 lift.
    pub v: BitVector,
    /// Number of 1x1 blocks.
    pub p_count: usize,
    /// Kept original indices, ascending.
    pub resid_vars: Vec<usize>,
    /// Residual off-diagonal couplings among kept variables.
    pub resid_off: BitMatrix,
    /// Residual mod-4 diagonal accumulated by the lift run.
    pub resid_diag: Vec<u8>,
}

impl BorderedLdl {
    /// Solve `L1 g = rhs` over the eliminated block and accumulate the
    /// residual-row image `h = L21 g` on the kept slots.
    ///
    /// # Panics
    /// Panics if `rhs` does not have one bit per eliminated variable.
    #[must_use]
    pub fn forward_solve(&self, rhs: &BitVector) -> (BitVector, BitVector) {
        let k = self.perm.len();
        assert_eq!(rhs.len(), k, "right-hand side length mismatch");
        let mut g = rhs.clone();
        let mut h = BitVector::zeros(self.resid_vars.len());
        for c in 0..k {
            if g.get(c) {
                for &p in &self.cols_pivot[c] {
                    g.flip(p);
                }
                for &t in &self.cols_resid[c] {
                    h.flip(t);
                }
            }
        }
        (g, h)
    }

    /// The exponent Q of i contributed by the eliminated block: the sum of
    /// `g` over 1x1 blocks plus twice the pair products over antidiagonal
    /// blocks, mod 4.
    #[must_use]
    pub fn quad_exponent(&self, g: &BitVector) -> u8 {
        let mut q = 0u8;
        let mut pos = 0usize;
        for blk in &self.d {
            match blk {
                DBlock::One => {
                    q = (q + u8::from(g.get(pos))) & 3;
                    pos += 1;
                }
                DBlock::AntiDiag2 => {
                    if g.get(pos) && g.get(pos + 1) {
                        q = (q + 2) & 3;
                    }
                    pos += 2;
                }
                DBlock::Zero => unreachable!("bordered factorization has no zero blocks"),
            }
        }
        q
    }
}

/// Eliminate exactly the variables with `keep` false, in the dense
/// deterministic order, and return the partial factorization together with
/// the residual system on the kept variables.
///
/// # Panics
/// Panics if the input is not symmetric, if the eliminated block cannot be
/// cleared without peeling (its mod-2 part must be full rank), or if
/// elimination stalls before clearing the border.
#[must_use]
pub fn ldl_bordered(a: &BitMatrix, keep: &[bool]) -> BorderedLdl {
    assert!(a.is_symmetric(), "input matrix must be symmetric");
    let n = a.rows();
    assert_eq!(keep.len(), n, "keep mask length mismatch");
    let mut diag: Vec<u8> = (0..n).map(|i| u8::from(a.get(i, i))).collect();
    let mut local = a.clone();
    for i in 0..n {
        local.set(i, i, false);
    }
    let vars: Vec<usize> = (0..n).collect();
    let eligible: Vec<bool> = keep.iter().map(|&b| !b).collect();
    let mut acc = RawAcc::default();
    let left = process_front(&mut local, &vars, &eligible, &mut diag, &mut acc, 0, None);
    assert!(acc.peel_vars.is_empty(), "eliminated block is mod-2 singular");
    let resid_vars: Vec<usize> = left;
    assert!(
        resid_vars.iter().all(|&v| keep[v])
            && resid_vars.len() == keep.iter().filter(|&&b| b).count(),
        "elimination stalled before clearing the border"
    );
    let k = acc.pivot_vars.len();
    let mut pos_of = vec![usize::MAX; n];
    for (p, &orig) in acc.pivot_vars.iter().enumerate() {
        pos_of[orig] = p;
    }
    let mut slot_of = vec![usize::MAX; n];
    for (s, &orig) in resid_vars.iter().enumerate() {
        slot_of[orig] = s;
    }
    let mut cols_pivot = vec![Vec::new(); k];
    let mut cols_resid = vec![Vec::new(); k];
    for (c, col) in acc.cols.iter().enumerate() {
        for &orig in col {
            if keep[orig] {
                cols_resid[c].push(slot_of[orig]);
            } else if pos_of[orig] != c {
                assert!(pos_of[orig] > c, "column entry above the diagonal");
                cols_pivot[c].push(pos_of[orig]);
            }
        }
    }
    let p_count = acc.d.iter().filter(|b| matches!(b, DBlock::One)).count();
    let mut v = BitVector::zeros(k);
    for (i, &b) in acc.v_bits.iter().enumerate() {
        if b {
            v.set(i, true);
        }
    }
    let resid_off = local.submatrix(&resid_vars, &resid_vars);
    let resid_diag: Vec<u8> = resid_vars.iter().map(|&vv| diag[vv]).collect();
    BorderedLdl {
        perm: acc.pivot_vars,
        cols_pivot,
        cols_resid,
        d: acc.d,
        v,
        p_count,
        resid_vars,
        resid_off,
        resid_diag,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApplyWhich {
    /// x: rank x c -> n x c
    L,
    /// x: n x c -> rank x c
    LT,
    /// x: rank x c -> rank x c, applies L1^{-1}
    L1Inv,
    /// x: rank x c -> rank x c, applies L1^{-T}
    L1InvT,
    /// x: rank x c -> (n-rank) x c
    L2L1Inv,
}

/// Implicit reduced factorization assembled along a tree decomposition.
/// Columns are stored sparsely (each touches one front), so products with
/// L, its blocks and their inverses run in output-sensitive time.
#[derive(Clone, Debug)]
pub struct ImplicitLdl {
    pub n: usize,
    pub rank: usize,
    /// perm[position] = original index; pivots first, then peeled.
    pub perm: Vec<usize>,
    pub pos_of: Vec<usize>,
    pub d: Vec<DBlock>,
    /// Per pivot position: sorted permuted row positions of the L column.
    cols: Vec<Vec<usize>>,
    pub v: BitVector,
    /// `[v; z]`: pivot carries then peel carries, in permuted order.
    pub w: BitVector,
    /// omega2 of the diagonal of L1^{-T} D L1^{-1}, one bit per pivot.
    pub secondbit_diag: BitVector,
    pub steps: Vec<Step>,
    col_bag: Vec<usize>,
    front_vars: Vec<Vec<usize>>,
    internal: TreeDecomposition,
    internal_children: Vec<Vec<usize>>,
    internal_postorder: Vec<usize>,
}

impl ImplicitLdl {
    #[must_use]
    pub fn column(&self, p: usize) -> &[usize] {
        &self.cols[p]
    }

    /// Expand to an explicit reduced factorization (testing aid).
    #[must_use]
    pub fn expand(&self) -> LdlFactorization {
        let l = explicit_l(self.n, &self.cols);
        let mut z = BitVector::zeros(self.n - self.rank);
        for i in 0..self.n - self.rank {
            if self.w.get(self.rank + i) {
                z.set(i, true);
            }
        }
        LdlFactorization {
            perm: self.perm.clone(),
            l,
            d: self.d.clone(),
            rank: self.rank,
            reduced: true,
            v: self.v.clone(),
            z,
            steps: self.steps.clone(),
        }
    }
}

/// The second bits of `d(L1^{-T} D L1^{-1})` evaluated over Z4 with 0/1 lifts.
fn secondbit_from(l1: &BitMatrix, d: &[DBlock]) -> BitVector {
    let k = l1.rows();
    let y = l1.solve_lower_unit_batch(&BitMatrix::identity(k));
    let yt = y.transpose();
    let mut ones = Vec::new();
    let mut antis = Vec::new();
    let mut p = 0;
    for b in d {
        match b {
            DBlock::One => {
                ones.push(p);
                p += 1;
            }
            DBlock::AntiDiag2 => {
                antis.push(p);
                p += 2;
            }
            DBlock::Zero => p += 1,
        }
    }
    let mut out = BitVector::zeros(k);
    for c in 0..k {
        let row = yt.row(c);
        let count: usize = ones.iter().filter(|&&p| row.get(p)).count();
        let mut pair = false;
        for &p in &antis {
            if row.get(p) && row.get(p + 1) {
                pair = !pair;
            }
        }
        if (count >> 1 & 1 == 1) ^ pair {
            out.set(c, true);
        }
    }
    out
}

/// Implicit factorization along `td` (binarized and rooted internally).
///
/// # Errors
/// Returns the validation error if `td` does not decompose the graph of
/// off-diagonal nonzeros of `a`.
pub fn ldl_tree(a: &BitMatrix, td: &TreeDecomposition) -> Result<ImplicitLdl, TdError> {
    assert!(a.is_symmetric(), "input matrix must be symmetric");
    let n = a.rows();
    let mut g = Graph::new(n);
    for r in 0..n {
        for c in a.row_iter_ones(r) {
            if c > r {
                g.add_edge(r, c);
            }
        }
    }
    let width = td.validate(&g)?;
    let mut internal = binarize_and_root(td, width);
    for bag in &mut internal.bags {
        bag.sort_unstable();
        bag.dedup();
    }
    let children = internal.children();
    let postorder = internal.postorder();
    let order_of: Vec<usize> = {
        let mut o = vec![0; internal.bags.len()];
        for (i, &b) in postorder.iter().enumerate() {
            o[b] = i;
        }
        o
    };
    let parent_of: Vec<Option<usize>> = {
        let mut p = vec![None; internal.bags.len()];
        for (b, kids) in children.iter().enumerate() {
            for &c in kids {
                p[c] = Some(b);
            }
        }
        p
    };
    // assign each off-diagonal entry and each vertex to its first postorder bag
    let bags_of_vertex: Vec<Vec<usize>> = {
        let mut bv = vec![Vec::new(); n];
        for (bi, bag) in internal.bags.iter().enumerate() {
            for &v in bag {
                bv[v].push(bi);
            }
        }
        for list in &mut bv {
            list.sort_by_key(|&b| order_of[b]);
        }
        bv
    };
    let mut assigned_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); internal.bags.len()];
    for &(u, v) in g.edges() {
        let bag = bags_of_vertex[u]
            .iter()
            .copied()
            .find(|&b| internal.bags[b].binary_search(&v).is_ok())
            .expect("validated decomposition covers every edge");
        assigned_edges[bag].push((u, v));
    }
    let mut diag: Vec<u8> = (0..n).map(|i| u8::from(a.get(i, i))).collect();
    let mut acc = RawAcc::default();
    let mut front_vars: Vec<Vec<usize>> = vec![Vec::new(); internal.bags.len()];
    // boundary blocks passed upward: (vars, coupling matrix)
    let mut pending: Vec<Vec<(Vec<usize>, BitMatrix)>> = vec![Vec::new(); internal.bags.len()];
    let mut seeded: Vec<bool> = vec![false; n];
    for &b in &postorder {
        let mut vars: std::collections::BTreeSet<usize> =
            internal.bags[b].iter().copied().collect();
        for (bvars, _) in &pending[b] {
            vars.extend(bvars.iter().copied());
        }
        let vars: Vec<usize> = vars.into_iter().collect();
        let f = vars.len();
        let mut local = BitMatrix::zeros(f, f);
        let li = |v: usize| vars.binary_search(&v).expect("front variable");
        for (bvars, mat) in pending[b].drain(..) {
            for (i, &vi) in bvars.iter().enumerate() {
                for jj in mat.row_iter_ones(i) {
                    local.flip(li(vi), li(bvars[jj]));
                }
            }
        }
        for &(u, v) in &assigned_edges[b] {
            local.flip(li(u), li(v));
            local.flip(li(v), li(u));
        }
        for &v in &vars {
            seeded[v] = true;
        }
        let eligible: Vec<bool> = vars
            .iter()
            .map(|&v| match parent_of[b] {
                None => true,
                Some(p) => internal.bags[p].binary_search(&v).is_err(),
            })
            .collect();
        front_vars[b] = vars.clone();
        let remaining = process_front(&mut local, &vars, &eligible, &mut diag, &mut acc, b, None);
        if let Some(p) = parent_of[b] {
            let bvars: Vec<usize> = remaining.iter().map(|&i| vars[i]).collect();
            let mut mat = BitMatrix::zeros(bvars.len(), bvars.len());
            for (ii, &i) in remaining.iter().enumerate() {
                for (jj, &j) in remaining.iter().enumerate() {
                    if local.get(i, j) {
                        mat.set(ii, jj, true);
                    }
                }
            }
            pending[p].push((bvars, mat));
        } else {
            assert!(
                remaining.is_empty(),
                "root front left variables uneliminated"
            );
        }
    }
    assert!(seeded.iter().all(|&s| s), "some variable never entered a front");
    let k = acc.pivot_vars.len();
    let d = acc.d.clone();
    let steps = acc.steps.clone();
    let col_bag = acc.col_bag.clone();
    let (perm, pos_of, cols, v, z) = finalize(n, acc);
    let mut w = BitVector::zeros(n);
    for i in 0..k {
        if v.get(i) {
            w.set(i, true);
        }
    }
    for i in 0..n - k {
        if z.get(i) {
            w.set(k + i, true);
        }
    }
    let l1 = {
        let mut m = BitMatrix::identity(k);
        for (c, col) in cols.iter().enumerate() {
            for &pos in col {
                if pos < k {
                    m.set(pos, c, true);
                }
            }
        }
        m
    };
    let secondbit_diag = secondbit_from(&l1, &d);
    Ok(ImplicitLdl {
        n,
        rank: k,
        perm,
        pos_of,
        d,
        cols,
        v,
        w,
        secondbit_diag,
        steps,
        col_bag,
        front_vars,
        internal,
        internal_children: children,
        internal_postorder: postorder,
    })
}

/// Product with the named operator, all shapes in permuted coordinates.
///
/// # Panics
/// Panics on shape mismatch.
#[must_use]
pub fn implicit_apply(f: &ImplicitLdl, which: ApplyWhich, x: &BitMatrix) -> BitMatrix {
    let (n, k) = (f.n, f.rank);
    match which {
        ApplyWhich::L => {
            assert_eq!(x.rows(), k, "L expects rank rows");
            let mut out = BitMatrix::zeros(n, x.cols());
            for (p, col) in f.cols.iter().enumerate() {
                let src = x.row_words(p).to_vec();
                for &pos in col {
                    for (wd, ws) in out.row_words_mut(pos).iter_mut().zip(&src) {
                        *wd ^= ws;
                    }
                }
            }
            out
        }
        ApplyWhich::LT => {
            assert_eq!(x.rows(), n, "LT expects n rows");
            let mut out = BitMatrix::zeros(k, x.cols());
            for (p, col) in f.cols.iter().enumerate() {
                for &pos in col {
                    let src = x.row_words(pos).to_vec();
                    for (wd, ws) in out.row_words_mut(p).iter_mut().zip(&src) {
                        *wd ^= ws;
                    }
                }
            }
            out
        }
        ApplyWhich::L1Inv => {
            assert_eq!(x.rows(), k, "L1Inv expects rank rows");
            let mut out = x.clone();
            for p in 0..k {
                let src = out.row_words(p).to_vec();
                for &pos in &f.cols[p] {
                    if pos > p && pos < k {
                        for (wd, ws) in out.row_words_mut(pos).iter_mut().zip(&src) {
                            *wd ^= ws;
                        }
                    }
                }
            }
            out
        }
        ApplyWhich::L1InvT => {
            assert_eq!(x.rows(), k, "L1InvT expects rank rows");
            let mut out = x.clone();
            for p in (0..k).rev() {
                let mut acc = vec![0u64; out.row_words(p).len()];
                for &pos in &f.cols[p] {
                    if pos > p && pos < k {
                        for (a, w) in acc.iter_mut().zip(out.row_words(pos)) {
                            *a ^= w;
                        }
                    }
                }
                for (wd, a) in out.row_words_mut(p).iter_mut().zip(&acc) {
                    *wd ^= a;
                }
            }
            out
        }
        ApplyWhich::L2L1Inv => {
            assert_eq!(x.rows(), k, "L2L1Inv expects rank rows");
            let y = implicit_apply(f, ApplyWhich::L1Inv, x);
            let mut out = BitMatrix::zeros(n - k, x.cols());
            for (p, col) in f.cols.iter().enumerate() {
                let src = y.row_words(p).to_vec();
                for &pos in col {
                    if pos >= k {
                        for (wd, ws) in out.row_words_mut(pos - k).iter_mut().zip(&src) {
                            *wd ^= ws;
                        }
                    }
                }
            }
            out
        }
    }
}

/// Per-bag dense blocks of the generalized inverse `P (P^T A P)^g P^T` of the
/// factored matrix, restricted to each bag of `td` (original vertex labels).
#[derive(Clone, Debug)]
pub struct PartialInverseBlocks {
    pub bags: Vec<Vec<usize>>,
    pub blocks: Vec<BitMatrix>,
}

/// Selected inversion along the factorization's internal tree: proceeds
/// root-to-leaf, solving one column recurrence per pivot inside its front.
///
/// # Panics
/// Panics if a bag of `td` is not contained in any internal front (td must
/// be the decomposition the factorization was built over).
#[must_use]
pub fn partial_inverse_blocks(f: &ImplicitLdl, td: &TreeDecomposition) -> PartialInverseBlocks {
    let k = f.rank;
    let nbags = f.internal.bags.len();
    let parent_of: Vec<Option<usize>> = {
        let mut p = vec![None; nbags];
        for (b, kids) in f.internal_children.iter().enumerate() {
            for &c in kids {
                p[c] = Some(b);
            }
        }
        p
    };
    // d-structure: for pivot column e, the position whose base entry is 1
    let dbase: Vec<usize> = {
        let mut out = vec![0usize; k];
        let mut p = 0;
        for b in &f.d {
            match b {
                DBlock::One => {
                    out[p] = p;
                    p += 1;
                }
                DBlock::AntiDiag2 => {
                    out[p] = p + 1;
                    out[p + 1] = p;
                    p += 2;
                }
                DBlock::Zero => unreachable!("reduced factorization has no Zero blocks"),
            }
        }
        out
    };
    let mut cols_at: Vec<Vec<usize>> = vec![Vec::new(); nbags];
    for (p, &b) in f.col_bag.iter().enumerate() {
        cols_at[b].push(p);
    }
    let mut gfs: Vec<Option<BitMatrix>> = vec![None; nbags];
    for &b in f.internal_postorder.iter().rev() {
        let fv = &f.front_vars[b];
        let m = fv.len();
        let mut gf = BitMatrix::zeros(m, m);
        if let Some(par) = parent_of[b] {
            let pfv = &f.front_vars[par];
            let pg = gfs[par].as_ref().expect("parent processed first");
            for (i, vi) in fv.iter().enumerate() {
                let Ok(pi) = pfv.binary_search(vi) else { continue };
                for (j, vj) in fv.iter().enumerate() {
                    let Ok(pj) = pfv.binary_search(vj) else { continue };
                    if pg.get(pi, pj) {
                        gf.set(i, j, true);
                    }
                }
            }
        }
        let li = |pos: usize| -> usize {
            fv.binary_search(&f.perm[pos]).expect("column variable in front")
        };
        let mut local_cols = cols_at[b].clone();
        local_cols.sort_unstable_by(|a, c| c.cmp(a));
        for &e in &local_cols {
            let le = li(e);
            let pivot_supp: Vec<usize> =
                f.cols[e].iter().copied().filter(|&y| y < k && y != e).collect();
            let later: Vec<usize> = fv
                .iter()
                .enumerate()
                .filter(|&(_, &v)| f.pos_of[v] > e)
                .map(|(i, _)| i)
                .collect();
            for &lx in &later {
                let posx = f.pos_of[fv[lx]];
                let mut acc = if posx >= k {
                    f.cols[e].binary_search(&posx).is_ok()
                } else {
                    posx == dbase[e]
                };
                for &y in &pivot_supp {
                    if gf.get(lx, li(y)) {
                        acc = !acc;
                    }
                }
                gf.set(lx, le, acc);
                gf.set(le, lx, acc);
            }
            let mut acc = e == dbase[e];
            for &y in &pivot_supp {
                if gf.get(le, li(y)) {
                    acc = !acc;
                }
            }
            gf.set(le, le, acc);
        }
        gfs[b] = Some(gf);
    }
    let mut bags = Vec::with_capacity(td.bags.len());
    let mut blocks = Vec::with_capacity(td.bags.len());
    for bag in &td.bags {
        let mut sorted = bag.clone();
        sorted.sort_unstable();
        let host = (0..nbags)
            .find(|&ib| sorted.iter().all(|v| f.internal.bags[ib].binary_search(v).is_ok()))
            .expect("bag not contained in any internal bag");
        let fv = &f.front_vars[host];
        let g = gfs[host].as_ref().unwrap();
        let idx: Vec<usize> = sorted
            .iter()
            .map(|v| fv.binary_search(v).expect("bag variable in front"))
            .collect();
        blocks.push(g.submatrix(&idx, &idx));
        bags.push(sorted);
    }
    PartialInverseBlocks { bags, blocks }
}

/// Dense generalized inverse from an explicit reduced factorization, in
/// original indices (testing reference for the selected inversion).
#[must_use]
pub fn generalized_inverse_dense(f: &LdlFactorization) -> BitMatrix {
    assert!(f.reduced, "expects a reduced factorization");
    let n = f.perm.len();
    let k = f.rank;
    let rows: Vec<usize> = (0..k).collect();
    let cols_all: Vec<usize> = (0..k).collect();
    let l1 = f.l.submatrix(&rows, &cols_all);
    let peel_rows: Vec<usize> = (k..n).collect();
    let l2 = f.l.submatrix(&peel_rows, &cols_all);
    let y = l1.solve_lower_unit_batch(&BitMatrix::identity(k));
    let df2 = d_to_f2(&f.d);
    let a11inv = y.transpose().mul(&df2).mul(&y);
    let b21 = l2.mul(&y);
    let mut g = BitMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            if a11inv.get(i, j) {
                g.set(f.perm[i], f.perm[j], true);
            }
        }
    }
    for i in 0..n - k {
        for j in 0..k {
            if b21.get(i, j) {
                g.set(f.perm[k + i], f.perm[j], true);
                g.set(f.perm[j], f.perm[k + i], true);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_example_two_by_two() {
        let a = BitMatrix::from_rows(&[&[1, 1], &[1, 0]]);
        let f = ldl_dense(&a);
        assert_eq!(f.perm, vec![0, 1]);
        assert_eq!(f.d, vec![DBlock::One, DBlock::One]);
        assert_eq!(f.rank, 2);
        assert!(f.l.get(1, 0));
        assert_eq!(f.reconstruct(), a);
        // second pivot's diagonal ran 0 -> -1 = 3, so its carry bit is set
        assert!(!f.v.get(0) && f.v.get(1));
    }

    #[test]
    fn zero_diagonal_forces_antidiag_block() {
        let a = BitMatrix::from_rows(&[&[0, 1], &[1, 0]]);
        let f = ldl_dense(&a);
        assert_eq!(f.perm, vec![0, 1]);
        assert_eq!(f.d, vec![DBlock::AntiDiag2]);
        assert_eq!(f.reconstruct(), a);
        assert!(!f.l.get(1, 0), "subdiagonal under a 2x2 block must be zero");
    }

    #[test]
    fn reduced_rank_one() {
        let a = BitMatrix::from_rows(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let f = ldl_reduced(&a);
        assert_eq!(f.rank, 1);
        assert_eq!(f.l.cols(), 1);
        assert_eq!(f.reconstruct(), a);
    }

    #[test]
    fn zero_matrix_all_peeled() {
        let a = BitMatrix::zeros(4, 4);
        let f = ldl_reduced(&a);
        assert_eq!(f.rank, 0);
        assert_eq!(f.l.cols(), 0);
        assert_eq!(f.z.len(), 4);
        assert!(f.z.is_zero());
    }

    #[test]
    fn bordered_with_empty_border_matches_reduced() {
        // Invertible mod 2, with one antidiagonal pair and two 1x1 pivots.
        let a = BitMatrix::from_rows(&[
            &[0, 1, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 1, 1],
            &[0, 0, 1, 0],
        ]);
        let b = ldl_bordered(&a, &[false; 4]);
        let f = ldl_reduced(&a);
        assert_eq!(b.perm, f.perm);
        assert_eq!(b.d, f.d);
        assert_eq!(b.v, f.v);
        assert!(b.resid_vars.is_empty());
    }

    #[test]
    fn bordered_residual_is_the_schur_complement() {
        // Eliminate variables 0..3 of a 6-variable system; the residual on
        // {4,5} must equal the mod-2 Schur complement A22 + A21 A11^{-1} A12.
        let a = BitMatrix::from_rows(&[
            &[1, 1, 0, 0, 1, 0],
            &[1, 1, 1, 0, 0, 1],
            &[0, 1, 0, 1, 1, 0],
            &[0, 0, 1, 1, 0, 1],
            &[1, 0, 1, 0, 0, 1],
            &[0, 1, 0, 1, 1, 1],
        ]);
        let keep = [false, false, false, false, true, true];
        let b = ldl_bordered(&a, &keep);
        assert_eq!(b.resid_vars, vec![4, 5]);
        let elim: Vec<usize> = (0..4).collect();
        let kept: Vec<usize> = vec![4, 5];
        let a11 = a.submatrix(&elim, &elim);
        let a12 = a.submatrix(&elim, &kept);
        let a21 = a.submatrix(&kept, &elim);
        let a22 = a.submatrix(&kept, &kept);
        let mut inv_cols = Vec::new();
        for j in 0..2 {
            inv_cols.push(a11.solve(&a12.column(j)).expect("block is invertible"));
        }
        let mut schur = a22.clone();
        for i in 0..2 {
            for j in 0..2 {
                let mut dot = false;
                for t in 0..4 {
                    dot ^= a21.get(i, t) & inv_cols[j].get(t);
                }
                if dot {
                    schur.flip(i, j);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let got = if i == j {
                    b.resid_diag[i] & 1 == 1
                } else {
                    b.resid_off.get(i, j)
                };
                assert_eq!(got, schur.get(i, j), "schur mismatch at ({i},{j})");
            }
        }
    }
}
