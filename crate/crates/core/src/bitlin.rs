//! Bit-packed linear algebra over GF(2).
//!
//! Vectors are stored as little-endian `u64` words (bit `k` lives in word
//! `k / 64`, position `k % 64`). Bits past `len` are always zero, so derived
//! equality and hashing are exact.

use std::fmt;

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Vector with a single bit set.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        v
    }

    /// Builds a vector from the low `len` bits of `value` (bit 0 first).
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_padding();
        }
        v
    }

    /// Builds a vector from raw words; padding beyond `len` is cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { words, len };
        v.clear_padding();
        v
    }

    /// Low 64 bits as an integer. Only meaningful for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "length mismatch");
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }

    /// Number of positions where both vectors are set.
    #[inline]
    pub fn and_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bytes with bit `k` at byte `k / 8`, position `k % 8` (LSB first).
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        (0..nbytes)
            .map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8)
            .collect()
    }

    /// Inverse of [`BitVec::to_bytes`]. Returns `None` if the byte count is
    /// wrong or any padding bit is set.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut v = Self::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            v.words[i / 8] |= (byte as u64) << ((i % 8) * 8);
        }
        let before = v.words.clone();
        v.clear_padding();
        (before == v.words).then_some(v)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for b in self.iter() {
            write!(f, "{}", b as u8)?;
        }
        write!(f, "]")
    }
}

/// Dense row-major binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

/// Output of [`BitMatrix::row_echelon_with_certificate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    /// Reduced row echelon form of the input.
    pub reduced: BitMatrix,
    /// Invertible row transform with `transform * input == reduced`.
    pub transform: BitMatrix,
    pub rank: usize,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
            cols: n,
        }
    }

    /// Builds a matrix from rows that must all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        Self { rows, cols }
    }

    pub fn from_bools(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows.iter().map(|r| BitVec::from_bools(r)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let data = (0..rows)
            .map(|i| {
                let mut r = BitVec::zeros(cols);
                for j in 0..cols {
                    if f(i, j) {
                        r.set(j, true);
                    }
                }
                r
            })
            .collect();
        Self { rows: data, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows(), |i, j| self.get(j, i))
    }

    /// Row vector times matrix: XOR of the rows selected by `v`.
    pub fn left_mul(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.rows(), "vector length must equal row count");
        let mut acc = BitVec::zeros(self.cols);
        for i in v.ones() {
            acc.xor_assign(&self.rows[i]);
        }
        acc
    }

    /// Matrix product `self * rhs` over GF(2).
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows(), "inner dimension mismatch");
        Self {
            rows: self.rows.iter().map(|r| rhs.left_mul(r)).collect(),
            cols: rhs.cols,
        }
    }

    /// Horizontal concatenation `[self rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows(), rhs.rows(), "row count mismatch");
        Self::from_fn(self.rows(), self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                rhs.get(i, j - self.cols)
            }
        })
    }

    pub fn rank(&self) -> usize {
        self.row_echelon_with_certificate().rank
    }

    /// Gauss-Jordan elimination with the accumulated row transform.
    ///
    /// Pivots are taken left to right; the pivot row for a column is the
    /// topmost remaining row with a one there, which makes the output a
    /// deterministic function of the input.
    pub fn row_echelon_with_certificate(&self) -> Echelon {
        let m = self.rows();
        let mut r = self.rows.clone();
        let mut t: Vec<BitVec> = (0..m).map(|i| BitVec::unit(m, i)).collect();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == m {
                break;
            }
            let Some(p) = (next..m).find(|&i| r[i].get(col)) else {
                continue;
            };
            r.swap(next, p);
            t.swap(next, p);
            for i in 0..m {
                if i != next && r[i].get(col) {
                    let (src_r, src_t) = (r[next].clone(), t[next].clone());
                    r[i].xor_assign(&src_r);
                    t[i].xor_assign(&src_t);
                }
            }
            pivots.push(col);
            next += 1;
        }
        Echelon {
            reduced: Self {
                rows: r,
                cols: self.cols,
            },
            transform: Self { rows: t, cols: m },
            rank: next,
            pivots,
        }
    }

    /// Basis of the left null space `{v : v * self = 0}`.
    pub fn left_null_basis(&self) -> Vec<BitVec> {
        let ech = self.row_echelon_with_certificate();
        ech.transform.rows[ech.rank..].to_vec()
    }

    /// Finds `x` with `x * self == target`, or `None` if `target` is outside
    /// the row space.
    pub fn solve_or_membership(&self, target: &BitVec) -> Option<BitVec> {
        assert_eq!(target.len(), self.cols, "target length must equal column count");
        let ech = self.row_echelon_with_certificate();
        let mut residual = target.clone();
        let mut y = BitVec::zeros(self.rows());
        for (i, &col) in ech.pivots.iter().enumerate() {
            if residual.get(col) {
                residual.xor_assign(ech.reduced.row(i));
                y.set(i, true);
            }
        }
        residual.is_zero().then(|| ech.transform.left_mul(&y))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> BitMatrix {
        BitMatrix::from_fn(rows, cols, |_, _| rng.random())
    }

    /// All vectors in the row space, by enumerating every combination.
    fn row_space(m: &BitMatrix) -> std::collections::BTreeSet<u64> {
        (0u64..1 << m.rows())
            .map(|c| m.left_mul(&BitVec::from_u64(m.rows(), c)).to_u64())
            .collect()
    }

    fn is_echelon(r: &BitMatrix) -> bool {
        let mut last: Option<usize> = None;
        let mut seen_zero = false;
        for row in r.row_iter() {
            match row.first_one() {
                None => seen_zero = true,
                Some(c) => {
                    if seen_zero || last.is_some_and(|l| c <= l) {
                        return false;
                    }
                    last = Some(c);
                }
            }
        }
        true
    }

    #[test]
    fn padding_stays_clear() {
        let v = BitVec::from_words(5, vec![u64::MAX]);
        assert_eq!(v.count_ones(), 5);
        assert_eq!(v, BitVec::from_bools(&[true; 5]));
        assert!(v.xor(&v).is_zero());
    }

    #[test]
    fn bytes_reject_dirty_padding() {
        let v = BitVec::from_bools(&[true, false, true]);
        assert_eq!(v.to_bytes(), vec![0b101]);
        assert_eq!(BitVec::from_bytes(3, &[0b101]), Some(v));
        assert_eq!(BitVec::from_bytes(3, &[0b1101]), None);
        assert_eq!(BitVec::from_bytes(3, &[]), None);
    }

    #[test]
    fn identity_echelon() {
        let id = BitMatrix::identity(3);
        let e = id.row_echelon_with_certificate();
        assert_eq!(e.reduced, id);
        assert_eq!(e.transform, id);
        assert_eq!(e.rank, 3);
    }

    #[test]
    fn duplicate_rows_echelon() {
        let m = BitMatrix::from_bools(&[vec![true, true], vec![true, true]]);
        let e = m.row_echelon_with_certificate();
        assert_eq!(e.reduced, BitMatrix::from_bools(&[vec![true, true], vec![false, false]]));
        assert_eq!(e.rank, 1);
        assert_eq!(e.transform.mul(&m), e.reduced);
    }

    #[test]
    fn random_echelon_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = random_matrix(&mut rng, 8, 8);
            let e = m.row_echelon_with_certificate();
            assert_eq!(e.transform.mul(&m), e.reduced);
            assert!(is_echelon(&e.reduced));
            assert_eq!(e.transform.rank(), 8, "transform must be invertible");
            let nonzero = e.reduced.row_iter().filter(|r| !r.is_zero()).count();
            assert_eq!(e.rank, nonzero);
        }
    }

    #[test]
    fn small_rank_matches_row_space_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let rows = rng.random_range(1..=4);
            let cols = rng.random_range(1..=4);
            let m = random_matrix(&mut rng, rows, cols);
            let e = m.row_echelon_with_certificate();
            let space = row_space(&m);
            assert_eq!(space.len(), 1 << e.rank);
            assert_eq!(space, row_space(&e.reduced));
        }
    }

    #[test]
    fn null_basis_examples() {
        assert!(BitMatrix::identity(4).left_null_basis().is_empty());

        let zero = BitMatrix::zeros(2, 3);
        let basis = zero.left_null_basis();
        assert_eq!(basis.len(), 2);
        let span: std::collections::BTreeSet<u64> = (0u64..4)
            .map(|c| {
                let mut acc = BitVec::zeros(2);
                for (i, b) in basis.iter().enumerate() {
                    if c >> i & 1 == 1 {
                        acc.xor_assign(b);
                    }
                }
                acc.to_u64()
            })
            .collect();
        assert_eq!(span.len(), 4);

        let m = BitMatrix::from_bools(&[vec![true, false], vec![true, false]]);
        // Exhaustive: the only nonzero v with v*M = 0 is [1,1].
        let kernel: Vec<u64> = (1u64..4)
            .filter(|&c| m.left_mul(&BitVec::from_u64(2, c)).is_zero())
            .collect();
        assert_eq!(kernel, vec![0b11]);
        assert_eq!(m.left_null_basis(), vec![BitVec::from_bools(&[true, true])]);
    }

    #[test]
    fn solve_examples() {
        let id = BitMatrix::identity(5);
        let t = BitVec::from_bools(&[true, false, true, true, false]);
        assert_eq!(id.solve_or_membership(&t), Some(t));

        let m = BitMatrix::from_bools(&[vec![true, true]]);
        assert_eq!(m.solve_or_membership(&BitVec::from_bools(&[true, false])), None);
    }

    #[test]
    fn solve_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, 6, 6);
            for target in 0u64..64 {
                let t = BitVec::from_u64(6, target);
                let brute = (0u64..64).find(|&x| m.left_mul(&BitVec::from_u64(6, x)) == t);
                match m.solve_or_membership(&t) {
                    Some(x) => {
                        assert_eq!(m.left_mul(&x), t);
                        assert!(brute.is_some());
                    }
                    None => assert!(brute.is_none()),
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = BitMatrix> {
            (1usize..12, 1usize..80).prop_flat_map(|(r, c)| {
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
                    .prop_map(|rows| BitMatrix::from_bools(&rows))
            })
        }

        proptest! {
            #[test]
            fn rank_nullity(m in matrix()) {
                let basis = m.left_null_basis();
                prop_assert_eq!(m.rank() + basis.len(), m.rows());
                for v in &basis {
                    prop_assert!(m.left_mul(v).is_zero());
                }
                let b = BitMatrix::from_rows(m.rows(), basis.clone());
                prop_assert_eq!(b.rank(), basis.len());
            }

            #[test]
            fn transform_is_invertible(m in matrix()) {
                let e = m.row_echelon_with_certificate();
                prop_assert_eq!(e.transform.rank(), m.rows());
                prop_assert_eq!(e.transform.mul(&m), e.reduced);
            }
        }
    }
}
