//! Bit-packed linear algebra over GF(2).
//!
//! Vectors and matrices store 64 entries per machine word. All arithmetic is
//! XOR/AND based; the unused padding bits of the last word in each row are
//! kept at zero so that whole-word operations never need a trailing mask.

/// A bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[must_use]
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Panics
    /// Panics if `i >= self.len()`.
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// XOR another vector of the same length into this one.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch in xor_assign");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Parity of the AND of two vectors: the GF(2) inner product.
    #[must_use]
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    #[must_use]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions set in both vectors.
    #[must_use]
    pub fn and_count(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in and_count");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the set bits, in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let b = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    #[must_use]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2), stored row-major with 64 entries per word.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from a slice of rows given as 0/1 bytes.
    ///
    /// # Panics
    /// Panics if the rows have unequal lengths.
    #[must_use]
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "row {i} has length {} != {c}", row.len());
            for (j, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// # Panics
    /// Panics if `r >= self.rows()` or `c >= self.cols()`.
    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.words[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let mask = 1u64 << (c % 64);
        let w = &mut self.words[r * self.words_per_row + c / 64];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.words[r * self.words_per_row + c / 64] ^= 1u64 << (c % 64);
    }

    #[must_use]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[must_use]
    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, v: &BitVector) {
        assert_eq!(v.len, self.cols, "row length mismatch");
        self.row_words_mut(r).copy_from_slice(&v.words);
    }

    #[must_use]
    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        assert!(dst != src, "xor_rows with dst == src");
        let (a, b) = if dst < src {
            let (lo, hi) = self.words.split_at_mut(src * self.words_per_row);
            (
                &mut lo[dst * self.words_per_row..(dst + 1) * self.words_per_row],
                &hi[..self.words_per_row],
            )
        } else {
            let (lo, hi) = self.words.split_at_mut(dst * self.words_per_row);
            (
                &mut hi[..self.words_per_row],
                &lo[src * self.words_per_row..(src + 1) * self.words_per_row],
            )
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    pub fn xor_row_with(&mut self, r: usize, v: &BitVector) {
        assert_eq!(v.len, self.cols, "row length mismatch");
        for (w, o) in self.row_words_mut(r).iter_mut().zip(&v.words) {
            *w ^= o;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words_per_row {
            self.words.swap(a * self.words_per_row + k, b * self.words_per_row + k);
        }
    }

    /// Indices of set bits in row `r`, in increasing column order.
    pub fn row_iter_ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(r).iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let b = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    #[must_use]
    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    #[must_use]
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_iter_ones(r) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product over GF(2).
    ///
    /// Uses the four-Russians byte-table method when the inner dimension is
    /// large enough to amortize the table construction.
    ///
    /// # Panics
    /// Panics if `self.cols() != rhs.rows()`.
    #[must_use]
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        if self.cols >= 256 && self.rows >= 64 {
            self.mul_four_russians(rhs)
        } else {
            self.mul_naive(rhs)
        }
    }

    fn mul_naive(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in self.row_iter_ones(r) {
                let (dst, src) = (r * out.words_per_row, k * rhs.words_per_row);
                for w in 0..out.words_per_row {
                    out.words[dst + w] ^= rhs.words[src + w];
                }
            }
        }
        out
    }

    fn mul_four_russians(&self, rhs: &Self) -> Self {
        let wpr = rhs.words_per_row;
        let n_blocks = self.cols.div_ceil(8);
        // table[m] = XOR of the rows of rhs selected by the bits of m,
        // within the current block of eight rows
        let mut table = vec![0u64; 256 * wpr];
        let mut out = Self::zeros(self.rows, rhs.cols);
        for blk in 0..n_blocks {
            let base = blk * 8;
            let h = (rhs.rows - base).min(8);
            for chunk in table.iter_mut() {
                *chunk = 0;
            }
            for m in 1usize..1 << h {
                let low = m.trailing_zeros() as usize;
                let rest = m & (m - 1);
                let src = (base + low) * wpr;
                for w in 0..wpr {
                    table[m * wpr + w] = table[rest * wpr + w] ^ rhs.words[src + w];
                }
            }
            for r in 0..self.rows {
                let word = self.words[r * self.words_per_row + base / 64];
                let byte = (word >> (base % 64 & !7)) as usize & 0xff;
                // blocks of 8 never straddle a word boundary
                let m = byte & ((1 << h) - 1);
                if m != 0 {
                    let dst = r * out.words_per_row;
                    for w in 0..wpr {
                        out.words[dst + w] ^= table[m * wpr + w];
                    }
                }
            }
        }
        out
    }

    #[must_use]
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len, "dimension mismatch in mul_vec");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for (w, o) in self.row_words(r).iter().zip(&v.words) {
                acc ^= w & o;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Rank over GF(2), computed on a scratch copy.
    #[must_use]
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    m.xor_rows(r, rank);
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Solve `L x = b` for unit lower-triangular `L` by forward substitution.
    ///
    /// Entries on or above the diagonal other than the implicit unit diagonal
    /// are ignored, so the matrix may carry junk there.
    #[must_use]
    pub fn solve_lower_unit(&self, b: &BitVector) -> BitVector {
        assert_eq!(self.rows, self.cols, "solve_lower_unit needs a square matrix");
        assert_eq!(self.rows, b.len, "dimension mismatch in solve_lower_unit");
        let n = self.rows;
        let mut x = BitVector::zeros(n);
        for i in 0..n {
            // only bits j < i of x are set, so the diagonal and anything
            // above it contribute nothing to the product
            let mut acc = 0u64;
            for (w, o) in self.row_words(i).iter().zip(&x.words) {
                acc ^= w & o;
            }
            let mut bit = acc.count_ones() % 2 == 1;
            if b.get(i) {
                bit = !bit;
            }
            if bit {
                x.set(i, true);
            }
        }
        x
    }

    /// Solve `L X = B` column-batched: one forward substitution pass over all
    /// columns of `B` at once.
    #[must_use]
    pub fn solve_lower_unit_batch(&self, b: &Self) -> Self {
        assert_eq!(self.rows, self.cols, "solve_lower_unit_batch needs a square matrix");
        assert_eq!(self.rows, b.rows, "dimension mismatch in solve_lower_unit_batch");
        let n = self.rows;
        let mut x = b.clone();
        for i in 0..n {
            let mut acc = vec![0u64; x.words_per_row];
            for j in self.row_iter_ones(i) {
                if j >= i {
                    break;
                }
                let src = j * x.words_per_row;
                for w in 0..x.words_per_row {
                    acc[w] ^= x.words[src + w];
                }
            }
            let dst = i * x.words_per_row;
            for w in 0..x.words_per_row {
                x.words[dst + w] ^= acc[w];
            }
        }
        x
    }

    /// Any solution of `self * x = b`, if one exists.
    #[must_use]
    pub fn solve(&self, b: &BitVector) -> Option<BitVector> {
        assert_eq!(self.rows, b.len, "dimension mismatch in solve");
        let mut m = self.clone();
        let mut rhs = b.clone();
        let mut pivot_col_of_row = Vec::new();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            let (ra, rb) = (rhs.get(rank), rhs.get(p));
            rhs.set(rank, rb);
            rhs.set(p, ra);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    m.xor_rows(r, rank);
                    if rhs.get(rank) {
                        rhs.flip(r);
                    }
                }
            }
            pivot_col_of_row.push(c);
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        for r in rank..m.rows {
            if rhs.get(r) {
                return None;
            }
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &c) in pivot_col_of_row.iter().enumerate() {
            if rhs.get(r) {
                x.set(c, true);
            }
        }
        Some(x)
    }

    /// Coefficients expressing `target` as a XOR of rows of `self`, if it
    /// lies in their span.
    #[must_use]
    pub fn in_span(&self, target: &BitVector) -> Option<BitVector> {
        assert_eq!(self.cols, target.len, "dimension mismatch in in_span");
        let mut reduced = self.clone();
        let mut combo = Self::identity(self.rows);
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        for r in 0..reduced.rows {
            for &(pc, pr) in &pivots {
                if reduced.get(r, pc) {
                    reduced.xor_rows(r, pr);
                    combo.xor_rows(r, pr);
                }
            }
            if let Some(c) = reduced.row_iter_ones(r).next() {
                pivots.push((c, r));
            }
        }
        let mut t = target.clone();
        let mut coeff = BitVector::zeros(self.rows);
        for &(pc, pr) in &pivots {
            if t.get(pc) {
                t.xor_assign(&reduced.row(pr));
                coeff.xor_assign(&combo.row(pr));
            }
        }
        t.is_zero().then_some(coeff)
    }

    /// Rows form a basis of `{x : self * x = 0}`.
    #[must_use]
    pub fn kernel_basis(&self) -> Self {
        let mut m = self.clone();
        let mut pivot_col_of_row = Vec::new();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    m.xor_rows(r, rank);
                }
            }
            pivot_col_of_row.push(c);
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        let pivot_set: std::collections::HashSet<usize> =
            pivot_col_of_row.iter().copied().collect();
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Self::zeros(free.len(), m.cols);
        for (bi, &fc) in free.iter().enumerate() {
            basis.set(bi, fc, true);
            for (r, &pc) in pivot_col_of_row.iter().enumerate() {
                if m.get(r, fc) {
                    basis.set(bi, pc, true);
                }
            }
        }
        basis
    }

    /// Copy of the submatrix selected by explicit row and column index lists.
    #[must_use]
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    #[must_use]
    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in self.row_iter_ones(r) {
                if c > r && !self.get(c, r) {
                    return false;
                }
            }
            for c in 0..r {
                if self.get(r, c) != self.get(c, r) {
                    return false;
                }
            }
        }
        true
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            if r + 1 < self.rows {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul_schoolbook(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = false;
                for k in 0..a.cols() {
                    s ^= a.get(i, k) && b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> BitMatrix {
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if next() & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    #[test]
    fn padding_bits_stay_zero() {
        let mut v = BitVector::zeros(65);
        v.set(64, true);
        assert_eq!(v.words()[1], 1);
        v.flip(64);
        assert!(v.is_zero());
    }

    #[test]
    fn four_russians_matches_naive() {
        let a = pseudo_random(70, 300, 1);
        let b = pseudo_random(300, 130, 2);
        let fast = a.mul(&b);
        assert_eq!(fast, a.mul_naive(&b));
        assert_eq!(fast, mul_schoolbook(&a, &b));
    }

    #[test]
    fn mul_on_word_straddling_blocks() {
        // inner dimension 260: last block is a partial byte
        let a = pseudo_random(64, 260, 3);
        let b = pseudo_random(260, 64, 4);
        assert_eq!(a.mul(&b), mul_schoolbook(&a, &b));
    }

    #[test]
    fn solve_lower_unit_roundtrip() {
        let n = 50;
        let mut l = pseudo_random(n, n, 5);
        for i in 0..n {
            l.set(i, i, true);
            for j in i + 1..n {
                l.set(i, j, false);
            }
        }
        let b = pseudo_random(1, n, 6).row(0);
        let x = l.solve_lower_unit(&b);
        assert_eq!(l.mul_vec(&x), b);
        let bm = pseudo_random(n, 100, 7);
        let xm = l.solve_lower_unit_batch(&bm);
        assert_eq!(l.mul(&xm), bm);
    }

    #[test]
    fn kernel_and_span() {
        let m = pseudo_random(20, 30, 8);
        let k = m.kernel_basis();
        assert_eq!(k.rows() + m.rank(), 30);
        for i in 0..k.rows() {
            assert!(m.mul_vec(&k.row(i)).is_zero());
        }
        let target = {
            let mut t = m.row(3).clone();
            t.xor_assign(&m.row(17));
            t
        };
        let coeff = m.in_span(&target).expect("row combination must be in span");
        let mut rebuilt = BitVector::zeros(30);
        for i in coeff.iter_ones() {
            rebuilt.xor_assign(&m.row(i));
        }
        assert_eq!(rebuilt, target);
    }

    #[test]
    fn solve_general() {
        let m = pseudo_random(25, 40, 9);
        let x0 = pseudo_random(1, 40, 10).row(0);
        let b = m.mul_vec(&x0);
        let x = m.solve(&b).expect("constructed system must be solvable");
        assert_eq!(m.mul_vec(&x), b);
    }
}
