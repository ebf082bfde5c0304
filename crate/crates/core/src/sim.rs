//! Simulation contexts built on the block factorization.
//!
//! `prepare` factors the F2 reduction of a phased adjacency once; strong
//! evaluation then answers amplitude queries `<x| H^{(x)n} |A>` in
//! output-sensitive time, and weak sampling draws from the exact outcome
//! distribution. All queries against one context share the factorization.

use crate::gf2::{BitMatrix, BitVector};
use crate::ldl::{self, ApplyWhich, DBlock, ImplicitLdl};
use crate::pgs::{trim_z_vertices, ExactAmplitude, PhasedAdjacency};
use crate::treedec::{Graph, TdError, TreeDecomposition};

/// How the global scalar in front of the evaluated amplitude is chosen.
/// `PivotCount` is the production rule (one eighth-root per 1x1 pivot).
/// `SumCarries` charges one eighth-root per set carry bit instead; it is
/// kept as an injection point for the self-test harness and is measurably
/// wrong on states whose elimination produces carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaRule {
    PivotCount,
    SumCarries,
}

/// A factored phased adjacency ready for repeated queries.
#[derive(Clone, Debug)]
pub struct SimContext {
    pub source: PhasedAdjacency,
    pub factorization: ImplicitLdl,
    /// perm[position] = original vertex; pivots first.
    pub perm: Vec<usize>,
    pub k: usize,
    /// Pivot-time diagonal carries, input second bits folded in.
    pub v: BitVector,
    /// `v` plus the F2 diagonal of D.
    pub u: BitVector,
    /// Length n: `v` then the peel-time carries, permuted order.
    pub w: BitVector,
    pub secondbit_diag: BitVector,
    pub alpha_rule: AlphaRule,
    /// The scalar exponent: the amplitude at a supported `x` is
    /// `2^{-k/2} omega^{alpha_eighths + 2 Q(x)}`.
    pub alpha_eighths: i64,
    pub p_count: usize,
}

fn trivial_td(n: usize) -> TreeDecomposition {
    TreeDecomposition {
        bags: vec![(0..n).collect()],
        edges: Vec::new(),
        root: Some(0),
    }
}

/// Factor `a` for querying, optionally along a tree decomposition of its
/// coupling graph.
///
/// # Errors
/// Returns the validation error if `td` does not cover the couplings.
pub fn prepare(a: &PhasedAdjacency, td: Option<&TreeDecomposition>) -> Result<SimContext, TdError> {
    prepare_with_rule(a, td, AlphaRule::PivotCount)
}

/// `prepare` with an explicit scalar rule (the self-test harness injects
/// the wrong one here).
///
/// # Errors
/// Returns the validation error if `td` does not cover the couplings.
pub fn prepare_with_rule(
    a: &PhasedAdjacency,
    td: Option<&TreeDecomposition>,
    rule: AlphaRule,
) -> Result<SimContext, TdError> {
    let n = a.n();
    let own;
    let td = match td {
        Some(t) => t,
        None => {
            own = trivial_td(n);
            &own
        }
    };
    let f = ldl::ldl_tree(&a.omega1(), td)?;
    let k = f.rank;
    let omega2 = a.omega2_diag();
    let mut v = BitVector::zeros(k);
    let mut w = BitVector::zeros(n);
    for pos in 0..n {
        if f.w.get(pos) ^ omega2.get(f.perm[pos]) {
            w.set(pos, true);
            if pos < k {
                v.set(pos, true);
            }
        }
    }
    let mut u = v.clone();
    let mut p_count = 0usize;
    let mut pos = 0usize;
    for b in &f.d {
        match b {
            DBlock::One => {
                u.flip(pos);
                p_count += 1;
                pos += 1;
            }
            DBlock::AntiDiag2 => pos += 2,
            DBlock::Zero => unreachable!("tree factorization is reduced"),
        }
    }
    let carry_sum: i64 = (0..k).map(|i| i64::from(v.get(i))).sum();
    let alpha_eighths = match rule {
        AlphaRule::PivotCount => (-(p_count as i64)).rem_euclid(8),
        AlphaRule::SumCarries => (-carry_sum).rem_euclid(8),
    };
    Ok(SimContext {
        source: a.clone(),
        perm: f.perm.clone(),
        k,
        v,
        u,
        w,
        secondbit_diag: f.secondbit_diag.clone(),
        factorization: f,
        alpha_rule: rule,
        alpha_eighths,
        p_count,
    })
}

/// D-block layout: positions of 1x1 blocks and first positions of 2x2 blocks.
fn block_layout(d: &[DBlock]) -> (Vec<usize>, Vec<usize>) {
    let mut ones = Vec::new();
    let mut antis = Vec::new();
    let mut pos = 0;
    for b in d {
        match b {
            DBlock::One => {
                ones.push(pos);
                pos += 1;
            }
            DBlock::AntiDiag2 => {
                antis.push(pos);
                pos += 2;
            }
            DBlock::Zero => pos += 1,
        }
    }
    (ones, antis)
}

/// Amplitudes `<x| H^{(x)n} |A>` for a batch of outcome words, evaluated
/// word-parallel across the batch.
///
/// # Panics
/// Panics if any query has the wrong length.
#[must_use]
pub fn strong_eval(ctx: &SimContext, xs: &[BitVector]) -> Vec<ExactAmplitude> {
    let n = ctx.source.n();
    let k = ctx.k;
    let c = xs.len();
    if c == 0 {
        return Vec::new();
    }
    let mut t1 = BitMatrix::zeros(k, c);
    let mut x2 = BitMatrix::zeros(n - k, c);
    for (j, x) in xs.iter().enumerate() {
        assert_eq!(x.len(), n, "query length mismatch");
        for pos in 0..k {
            if x.get(ctx.perm[pos]) ^ ctx.v.get(pos) {
                t1.set(pos, j, true);
            }
        }
        for pos in k..n {
            if x.get(ctx.perm[pos]) ^ ctx.w.get(pos) {
                x2.set(pos - k, j, true);
            }
        }
    }
    let g = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L1Inv, &t1);
    let mut resid = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L2L1Inv, &t1);
    let words = c.div_ceil(64);
    let mut bad = vec![0u64; words];
    for r in 0..n - k {
        let row = resid.row_words_mut(r);
        for (b, (w, q)) in bad.iter_mut().zip(row.iter().zip(x2.row_words(r))) {
            *b |= w ^ q;
        }
    }
    let (ones, antis) = block_layout(&ctx.factorization.d);
    let mut b0 = vec![0u64; words];
    let mut b1 = vec![0u64; words];
    let mut par = vec![0u64; words];
    for &p in &ones {
        for (i, &gw) in g.row_words(p).iter().enumerate() {
            let carry = b0[i] & gw;
            b0[i] ^= gw;
            b1[i] ^= carry;
        }
    }
    for &p in &antis {
        let hi = g.row_words(p + 1).to_vec();
        for (i, &gw) in g.row_words(p).iter().enumerate() {
            par[i] ^= gw & hi[i];
        }
    }
    (0..c)
        .map(|j| {
            let (wi, sh) = (j / 64, j % 64);
            if n > k && bad[wi] >> sh & 1 == 1 {
                return ExactAmplitude::zero();
            }
            let q0 = (b0[wi] >> sh & 1) as i64;
            let q1 = ((b1[wi] ^ par[wi]) >> sh & 1) as i64;
            let q = q0 + 2 * q1;
            ExactAmplitude::phase_form(-(k as i64), (ctx.alpha_eighths + 2 * q).rem_euclid(8))
        })
        .collect()
}

/// Prepared evaluator for queries that differ from a base word only on a
/// fixed set of free coordinates: each query costs one XOR per set free bit
/// plus the quadratic-form readout.
#[derive(Clone, Debug)]
pub struct FixedStrongEval {
    k: usize,
    alpha_eighths: i64,
    g_base: BitVector,
    res_base: BitVector,
    g_cols: Vec<BitVector>,
    res_cols: Vec<BitVector>,
    ones: Vec<usize>,
    antis: Vec<usize>,
}

/// Build a fixed-pattern evaluator from a base outcome word and the list of
/// free coordinates (original vertex labels).
///
/// # Panics
/// Panics if `base` has the wrong length or a free coordinate repeats.
#[must_use]
pub fn strong_eval_fixed(ctx: &SimContext, base: &BitVector, free: &[usize]) -> FixedStrongEval {
    let n = ctx.source.n();
    let k = ctx.k;
    assert_eq!(base.len(), n, "base length mismatch");
    let mut pos_of = vec![usize::MAX; n];
    for (pos, &orig) in ctx.perm.iter().enumerate() {
        pos_of[orig] = pos;
    }
    let mut t1 = BitVector::zeros(k.max(1));
    let mut t1m = BitMatrix::zeros(k, 1);
    let mut x2 = BitVector::zeros(n - k);
    for pos in 0..k {
        if base.get(ctx.perm[pos]) ^ ctx.v.get(pos) {
            t1.set(pos, true);
            t1m.set(pos, 0, true);
        }
    }
    for pos in k..n {
        if base.get(ctx.perm[pos]) ^ ctx.w.get(pos) {
            x2.set(pos - k, true);
        }
    }
    let gb = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L1Inv, &t1m);
    let rb = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L2L1Inv, &t1m);
    let mut g_base = BitVector::zeros(k);
    for p in 0..k {
        if gb.get(p, 0) {
            g_base.set(p, true);
        }
    }
    let mut res_base = BitVector::zeros(n - k);
    for r in 0..n - k {
        if rb.get(r, 0) ^ x2.get(r) {
            res_base.set(r, true);
        }
    }
    let mut seen = vec![false; n];
    let mut unit = BitMatrix::zeros(k, free.len());
    for (j, &s) in free.iter().enumerate() {
        assert!(!seen[s], "free coordinate {s} repeats");
        seen[s] = true;
        let pos = pos_of[s];
        if pos < k {
            unit.set(pos, j, true);
        }
    }
    let gu = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L1Inv, &unit);
    let ru = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L2L1Inv, &unit);
    let mut g_cols = Vec::with_capacity(free.len());
    let mut res_cols = Vec::with_capacity(free.len());
    for (j, &s) in free.iter().enumerate() {
        let pos = pos_of[s];
        let mut gc = BitVector::zeros(k);
        let mut rc = BitVector::zeros(n - k);
        if pos < k {
            for p in 0..k {
                if gu.get(p, j) {
                    gc.set(p, true);
                }
            }
            for r in 0..n - k {
                if ru.get(r, j) {
                    rc.set(r, true);
                }
            }
        } else {
            rc.set(pos - k, true);
        }
        g_cols.push(gc);
        res_cols.push(rc);
    }
    let (ones, antis) = block_layout(&ctx.factorization.d);
    FixedStrongEval {
        k,
        alpha_eighths: ctx.alpha_eighths,
        g_base,
        res_base,
        g_cols,
        res_cols,
        ones,
        antis,
    }
}

impl FixedStrongEval {
    /// Amplitude at the base word with the given free-coordinate values.
    ///
    /// # Panics
    /// Panics if `assign` does not have one bit per free coordinate.
    #[must_use]
    pub fn eval(&self, assign: &BitVector) -> ExactAmplitude {
        assert_eq!(assign.len(), self.g_cols.len(), "assignment length mismatch");
        let mut g = self.g_base.clone();
        let mut res = self.res_base.clone();
        for j in assign.iter_ones() {
            g.xor_assign(&self.g_cols[j]);
            res.xor_assign(&self.res_cols[j]);
        }
        if !res.is_zero() {
            return ExactAmplitude::zero();
        }
        let mut count = 0usize;
        for &p in &self.ones {
            count += usize::from(g.get(p));
        }
        let mut pair = false;
        for &p in &self.antis {
            if g.get(p) && g.get(p + 1) {
                pair = !pair;
            }
        }
        let q = (count & 3) as i64 + 2 * i64::from(pair);
        ExactAmplitude::phase_form(-(self.k as i64), (self.alpha_eighths + 2 * q).rem_euclid(8))
    }
}

/// Keyed counter generator: a fixed 64-bit mixer over (seed, stream,
/// counter). Identical keys give identical streams on every platform.
#[derive(Clone, Debug)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    ctr: u64,
}

fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

impl CounterRng {
    #[must_use]
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream, ctr: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let x = self
            .seed
            .wrapping_add(self.stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add(self.ctr.wrapping_mul(0xD1B5_4A32_D192_ED03));
        self.ctr += 1;
        mix64(x)
    }

    /// Uniform value below `bound` by rejection.
    ///
    /// # Panics
    /// Panics if `bound` is zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    pub fn bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// A conditioned sampling request: draw `count` outcome words whose bits at
/// the coordinates in `s` equal the bits of `y` there.
#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub s: Vec<usize>,
    pub y: BitVector,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleStrategy {
    Auto,
    Direct,
    ExplicitBasis,
}

#[derive(Clone, Debug)]
pub enum WeakSamples {
    /// The condition has zero probability.
    Empty,
    Samples(Vec<BitVector>),
}

/// Exact conditioned sampling. The support of the outcome distribution is
/// an affine space, so a draw is one uniform kernel combination; both
/// strategies produce byte-identical output for equal seeds.
///
/// # Panics
/// Panics if `spec.y` has the wrong length or a condition coordinate is out
/// of range.
#[must_use]
pub fn weak_sample(ctx: &SimContext, spec: &SampleSpec, strategy: SampleStrategy) -> WeakSamples {
    let n = ctx.source.n();
    let k = ctx.k;
    assert_eq!(spec.y.len(), n, "condition word length mismatch");
    let mut pos_of = vec![usize::MAX; n];
    for (pos, &orig) in ctx.perm.iter().enumerate() {
        pos_of[orig] = pos;
    }
    // rows of L at the conditioned positions, right-hand side y + w there
    let m_rows = spec.s.len();
    let mut m = BitMatrix::zeros(m_rows, k);
    let mut idx_of_pos = vec![usize::MAX; n];
    for (i, &s) in spec.s.iter().enumerate() {
        assert!(s < n, "condition coordinate {s} out of range (n={n})");
        idx_of_pos[pos_of[s]] = i;
    }
    for p in 0..k {
        for &pos in ctx.factorization.column(p) {
            let i = idx_of_pos[pos];
            if i != usize::MAX {
                m.set(i, p, true);
            }
        }
    }
    let mut b = BitVector::zeros(m_rows);
    for (i, &s) in spec.s.iter().enumerate() {
        if spec.y.get(s) ^ ctx.w.get(pos_of[s]) {
            b.set(i, true);
        }
    }
    let Some(g0) = m.solve(&b) else {
        return WeakSamples::Empty;
    };
    let kernel = m.kernel_basis();
    let ell = kernel.rows();
    let mut kmat = BitMatrix::zeros(k, ell);
    for j in 0..ell {
        for p in kernel.row_iter_ones(j) {
            kmat.set(p, j, true);
        }
    }
    let count = spec.count;
    let mut rng = CounterRng::new(spec.seed, 1);
    let mut cmat = BitMatrix::zeros(ell, count);
    for r in 0..ell {
        let row = cmat.row_words_mut(r);
        for w in row.iter_mut() {
            *w = rng.next_u64();
        }
        let tail = count % 64;
        if tail != 0 {
            let last = row.len() - 1;
            row[last] &= (1u64 << tail) - 1;
        }
    }
    let use_explicit = match strategy {
        SampleStrategy::Direct => false,
        SampleStrategy::ExplicitBasis => true,
        SampleStrategy::Auto => ell < n,
    };
    // base word: w + L g0, in permuted coordinates
    let mut g0m = BitMatrix::zeros(k, 1);
    for p in g0.iter_ones() {
        g0m.set(p, 0, true);
    }
    let base_cols = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L, &g0m);
    let mut base = BitVector::zeros(n);
    for pos in 0..n {
        if base_cols.get(pos, 0) ^ ctx.w.get(pos) {
            base.set(pos, true);
        }
    }
    let xs = if use_explicit {
        let z = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L, &kmat);
        z.mul(&cmat)
    } else {
        let g = kmat.mul(&cmat);
        ldl::implicit_apply(&ctx.factorization, ApplyWhich::L, &g)
    };
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let mut x = BitVector::zeros(n);
        for pos in 0..n {
            if xs.get(pos, j) ^ base.get(pos) {
                x.set(ctx.perm[pos], true);
            }
        }
        out.push(x);
    }
    WeakSamples::Samples(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasBasis {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug)]
pub enum GraphSimMode {
    /// Amplitudes of the given full outcome words.
    Strong(Vec<BitVector>),
    /// Sample full outcome words.
    Weak { seed: u64, count: usize },
}

#[derive(Clone, Debug)]
pub enum GraphSimResult {
    Amplitudes(Vec<ExactAmplitude>),
    Samples(Vec<BitVector>),
}

/// Measure every vertex of the graph state `|G>` in its listed basis.
/// Strong mode returns the exact outcome amplitudes; weak mode returns
/// outcome words distributed per the Born rule.
///
/// # Panics
/// Panics if `basis` has the wrong length or a strong query the wrong size.
#[must_use]
pub fn graph_state_simulate(g: &Graph, basis: &[MeasBasis], mode: GraphSimMode) -> GraphSimResult {
    let n = g.n();
    assert_eq!(basis.len(), n, "one basis per vertex");
    let mut dressed = PhasedAdjacency::from_graph(g);
    for (v, b) in basis.iter().enumerate() {
        if *b == MeasBasis::Y {
            dressed.add_diag(v, 1);
        }
    }
    let zs: Vec<usize> =
        (0..n).filter(|&v| basis[v] == MeasBasis::Z).collect();
    match mode {
        GraphSimMode::Strong(queries) => {
            let amps = queries
                .iter()
                .map(|x| {
                    assert_eq!(x.len(), n, "query length mismatch");
                    let mut assignment = vec![None; n];
                    for &v in &zs {
                        assignment[v] = Some(x.get(v));
                    }
                    let (trimmed, survivors, scalar) = trim_z_vertices(&dressed, &assignment);
                    let ctx = prepare(&trimmed, None).expect("trivial decomposition");
                    let xt = BitVector::from_bools(
                        &survivors.iter().map(|&v| x.get(v)).collect::<Vec<_>>(),
                    );
                    scalar.mul(&strong_eval(&ctx, &[xt])[0])
                })
                .collect();
            GraphSimResult::Amplitudes(amps)
        }
        GraphSimMode::Weak { seed, count } => {
            // Z outcomes are exactly uniform: no product of graph-state
            // stabilizers is a nonempty Z-only word.
            let assignment: Vec<Option<bool>> =
                (0..n).map(|v| zs.binary_search(&v).ok().map(|_| false)).collect();
            let (trimmed, survivors, _) = trim_z_vertices(&dressed, &assignment);
            let ctx = prepare(&trimmed, None).expect("trivial decomposition");
            let ns = survivors.len();
            let k = ctx.k;
            let mut rng = CounterRng::new(seed, 2);
            let mut zrng = CounterRng::new(seed, 3);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut x = BitVector::zeros(n);
                let mut extra2 = BitVector::zeros(ns);
                for &zv in &zs {
                    if zrng.bit() {
                        x.set(zv, true);
                        for (si, &sv) in survivors.iter().enumerate() {
                            if dressed.has_edge(sv, zv) {
                                extra2.flip(si);
                            }
                        }
                    }
                }
                let mut g = BitVector::zeros(k.max(1));
                for p in 0..k {
                    if rng.bit() {
                        g.set(p, true);
                    }
                }
                let mut gm = BitMatrix::zeros(k, 1);
                for p in g.iter_ones() {
                    gm.set(p, 0, true);
                }
                let lg = ldl::implicit_apply(&ctx.factorization, ApplyWhich::L, &gm);
                for pos in 0..ns {
                    let orig = survivors[ctx.perm[pos]];
                    let bit =
                        lg.get(pos, 0) ^ ctx.w.get(pos) ^ extra2.get(ctx.perm[pos]);
                    if bit {
                        x.set(orig, true);
                    }
                }
                out.push(x);
            }
            GraphSimResult::Samples(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp_brute(a: &PhasedAdjacency, x: &BitVector) -> ExactAmplitude {
        // 2^{-n} sum_y (-1)^{x.y} (-i)^{q(y)}
        let n = a.n();
        let mut acc = ExactAmplitude::zero();
        for yb in 0..1u32 << n {
            let y = BitVector::from_bools(&(0..n).map(|i| yb >> i & 1 == 1).collect::<Vec<_>>());
            let sign = if x.dot(&y) { 4 } else { 0 };
            let m = (i64::from(sign) - 2 * i64::from(a.quadform(&y))).rem_euclid(8);
            acc = acc.add(&ExactAmplitude::phase_form(-2 * (n as i64), m));
        }
        acc
    }

    fn all_words(n: usize) -> Vec<BitVector> {
        (0..1u32 << n)
            .map(|xb| {
                BitVector::from_bools(&(0..n).map(|i| xb >> i & 1 == 1).collect::<Vec<_>>())
            })
            .collect()
    }

    #[test]
    fn strong_eval_matches_brute_force_small() {
        let mut cases: Vec<PhasedAdjacency> = Vec::new();
        let mut a = PhasedAdjacency::new(1);
        a.set_diag(0, 1);
        cases.push(a);
        let mut a = PhasedAdjacency::new(1);
        a.set_diag(0, 3);
        cases.push(a);
        let mut a = PhasedAdjacency::new(1);
        a.set_diag(0, 2);
        cases.push(a);
        let mut a = PhasedAdjacency::new(2);
        a.set_diag(0, 1);
        a.set_edge(0, 1, true);
        cases.push(a);
        let mut a = PhasedAdjacency::new(3);
        a.set_diag(0, 1);
        a.set_diag(1, 1);
        a.set_diag(2, 1);
        a.set_edge(0, 1, true);
        a.set_edge(0, 2, true);
        cases.push(a);
        let mut a = PhasedAdjacency::new(2);
        a.set_edge(0, 1, true);
        a.set_diag(1, 2);
        cases.push(a);
        for a in &cases {
            let ctx = prepare(a, None).unwrap();
            let xs = all_words(a.n());
            let got = strong_eval(&ctx, &xs);
            for (x, got) in xs.iter().zip(&got) {
                assert_eq!(
                    got,
                    &amp_brute(a, x),
                    "mismatch at x={x:?} for diag {:?}",
                    (0..a.n()).map(|v| a.diag(v)).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn fixed_eval_agrees_with_batch() {
        let mut a = PhasedAdjacency::new(4);
        a.set_edge(0, 1, true);
        a.set_edge(1, 2, true);
        a.set_edge(2, 3, true);
        a.set_diag(2, 1);
        let ctx = prepare(&a, None).unwrap();
        let base = BitVector::zeros(4);
        let free = vec![1, 3];
        let fe = strong_eval_fixed(&ctx, &base, &free);
        for bits in 0..4u32 {
            let assign = BitVector::from_bools(&[bits & 1 == 1, bits >> 1 & 1 == 1]);
            let mut x = base.clone();
            if assign.get(0) {
                x.flip(1);
            }
            if assign.get(1) {
                x.flip(3);
            }
            assert_eq!(fe.eval(&assign), strong_eval(&ctx, &[x])[0]);
        }
    }

    #[test]
    fn weak_samples_satisfy_condition_and_support() {
        let mut a = PhasedAdjacency::new(3);
        a.set_edge(0, 1, true);
        a.set_edge(1, 2, true);
        let ctx = prepare(&a, None).unwrap();
        let spec = SampleSpec {
            s: vec![0],
            y: BitVector::from_bits(&[1, 0, 0]),
            seed: 7,
            count: 40,
        };
        let WeakSamples::Samples(xs) = weak_sample(&ctx, &spec, SampleStrategy::Direct) else {
            panic!("support is nonempty");
        };
        let amps = strong_eval(&ctx, &xs);
        for (x, amp) in xs.iter().zip(&amps) {
            assert!(x.get(0));
            assert!(!amp.is_zero(), "sampled outside the support");
        }
        let WeakSamples::Samples(explicit) =
            weak_sample(&ctx, &spec, SampleStrategy::ExplicitBasis)
        else {
            panic!("support is nonempty");
        };
        assert_eq!(xs, explicit, "strategies must agree bit for bit");
    }

    #[test]
    fn rng_streams_are_deterministic_and_distinct() {
        let mut a = CounterRng::new(5, 1);
        let mut b = CounterRng::new(5, 1);
        let mut c = CounterRng::new(5, 2);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
