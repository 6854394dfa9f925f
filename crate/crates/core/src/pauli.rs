//! Signed Pauli operators in symplectic form.
//!
//! A [`PauliString`] with bits `(x, z)` and phase exponent `k` represents
//!
//! ```text
//! i^k * prod_j X_j^{x_j} Z_j^{z_j}
//! ```
//!
//! with X written before Z on every site. Under this normal form the
//! Hermitian Y is `i * X * Z`, i.e. `x = z = 1` with one extra power of `i`.
//! All phase bookkeeping in the crate follows this single convention.

use std::fmt;
use std::str::FromStr;

use crate::bitlin::BitVec;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

/// Site-type census of a Pauli: identity, Z, and X-or-Y sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliClass {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl PauliClass {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2 + self.n3
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn from_parts(x: BitVec, z: BitVec, phase: u8) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        Self {
            x,
            z,
            phase: phase & 3,
        }
    }

    /// `Z^a`, the Z-type operator with support `a`.
    pub fn z_type(a: BitVec) -> Self {
        let n = a.len();
        Self::from_parts(BitVec::zeros(n), a, 0)
    }

    pub fn single_x(n: usize, q: usize) -> Self {
        Self::from_parts(BitVec::unit(n, q), BitVec::zeros(n), 0)
    }

    pub fn single_z(n: usize, q: usize) -> Self {
        Self::from_parts(BitVec::zeros(n), BitVec::unit(n, q), 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &BitVec {
        &self.x
    }

    pub fn z(&self) -> &BitVec {
        &self.z
    }

    /// Exponent of `i` in the prefactor (mod 4).
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// True when the operator is built from I and Z only.
    pub fn is_ztype(&self) -> bool {
        self.x.is_zero()
    }

    pub fn classify(&self) -> PauliClass {
        let n = self.num_qubits();
        let n3 = self.x.count_ones();
        let z_only = self.z.count_ones() - self.x.and_count(&self.z);
        PauliClass {
            n1: n - n3 - z_only,
            n2: z_only,
            n3,
        }
    }

    /// Hermitian iff the phase is `i^{#Y}` times a real sign.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + self.x.and_count(&self.z)) % 2 == 0
    }

    /// Sign `+1`/`-1` relative to the Hermitian representative with the same
    /// support, or `None` if the operator is anti-Hermitian.
    pub fn hermitian_sign(&self) -> Option<i8> {
        let rel = (self.phase as usize + 4 - self.x.and_count(&self.z) % 4) % 4;
        match rel {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Compares only the `(x, z)` support.
    pub fn eq_phaseless(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::SizeMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Operator product `self * other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self <- self * other`. Sizes must match.
    #[inline]
    pub(crate) fn mul_assign_right(&mut self, other: &Self) {
        // Moving Z^{z1} past X^{x2} on each site costs (-1)^{z1 x2}.
        let swaps = self.z.and_count(&other.x);
        self.phase = ((self.phase as usize + other.phase as usize + 2 * swaps) & 3) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        (self.x.and_count(&other.z) + self.z.and_count(&other.x)) % 2 == 0
    }

    /// Multiplies the prefactor by `i^k`.
    pub(crate) fn add_phase(&mut self, k: usize) {
        self.phase = ((self.phase as usize + k) & 3) as u8;
    }

    /// Exchanges the X and Z parts without touching the phase.
    pub(crate) fn swap_xz(&mut self) {
        std::mem::swap(&mut self.x, &mut self.z);
    }

    pub(crate) fn x_mut(&mut self) -> &mut BitVec {
        &mut self.x
    }

    pub(crate) fn z_mut(&mut self) -> &mut BitVec {
        &mut self.z
    }

    /// Letter on one site: 'I', 'X', 'Y' or 'Z'.
    pub fn site(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }
}

impl fmt::Display for PauliString {
    /// Prints the sign relative to the Hermitian letters, e.g. `+XIZY`,
    /// `-iZZ`. Qubit 0 is the leftmost letter.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys = self.x.and_count(&self.z);
        let rel = (self.phase as usize + 4 - ys % 4) % 4;
        f.write_str(["+", "+i", "-", "-i"][rel])?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.site(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParsePauli(s.to_string());
        let t = s.trim();
        let (rel, body) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else {
            (0, t)
        };
        if body.is_empty() {
            return Err(err());
        }
        let n = body.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        let mut ys = 0;
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x.set(q, true),
                'Z' => z.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                    ys += 1;
                }
                _ => return Err(err()),
            }
        }
        Ok(Self::from_parts(x, z, ((rel + ys) % 4) as u8))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense::pauli_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliString {
        let x = BitVec::from_u64(n, rng.random());
        let z = BitVec::from_u64(n, rng.random());
        PauliString::from_parts(x, z, rng.random_range(0..4))
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").multiply(&p("X")).unwrap(), p("I"));
        // X Z = -iY
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), p("I"));
    }

    #[test]
    fn size_mismatch_is_an_error() {
        assert!(matches!(p("XX").multiply(&p("X")), Err(Error::SizeMismatch { .. })));
        assert!(p("XX").commutes(&p("X")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("XI").commutes(&p("ZI")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
    }

    #[test]
    fn classification() {
        assert_eq!(p("IZXY").classify(), PauliClass::new(1, 1, 2));
        assert_eq!(PauliString::identity(5).classify(), PauliClass::new(5, 0, 0));
        assert_eq!(p("ZZZZ").classify(), PauliClass::new(0, 4, 0));
        assert!(p("ZIZ").is_ztype());
        assert!(!p("XI").is_ztype());
        assert!(PauliString::identity(3).is_ztype());
    }

    #[test]
    fn text_codec() {
        for s in ["+XIZY", "-iZZ", "+iY", "-XYZ", "+I"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("XZ").to_string(), "+XZ");
        assert_eq!(p("iX").to_string(), "+iX");
        assert!("".parse::<PauliString>().is_err());
        assert!("+XQ".parse::<PauliString>().is_err());
        assert!(p("Y").is_hermitian());
        assert!(!p("iY").is_hermitian());
    }

    #[test]
    fn products_match_dense_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..200 {
                let a = random_pauli(&mut rng, n);
                let b = random_pauli(&mut rng, n);
                let prod = a.multiply(&b).unwrap();
                let dense = pauli_matrix(&a).mul(&pauli_matrix(&b));
                assert!(dense.max_abs_diff(&pauli_matrix(&prod)) < 1e-12, "{a} * {b}");

                let ab = pauli_matrix(&a).mul(&pauli_matrix(&b));
                let ba = pauli_matrix(&b).mul(&pauli_matrix(&a));
                let dense_commute = ab.max_abs_diff(&ba) < 1e-12;
                assert_eq!(a.commutes(&b).unwrap(), dense_commute);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
            (any::<u64>(), any::<u64>(), 0u8..4).prop_map(move |(x, z, k)| {
                PauliString::from_parts(BitVec::from_u64(n, x), BitVec::from_u64(n, z), k)
            })
        }

        proptest! {
            #[test]
            fn associative_and_dense_exact(a in pauli(3), b in pauli(3), c in pauli(3)) {
                let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
                let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                let dense = pauli_matrix(&a).mul(&pauli_matrix(&b)).mul(&pauli_matrix(&c));
                prop_assert!(dense.max_abs_diff(&pauli_matrix(&left)) < 1e-12);
            }

            #[test]
            fn square_is_signed_identity(a in pauli(40)) {
                let sq = a.multiply(&a).unwrap();
                prop_assert!(sq.is_identity());
                prop_assert!(sq.phase() % 2 == 0);
            }

            #[test]
            fn class_ignores_phase(a in pauli(20), k in 0u8..4) {
                let shifted = a.clone().with_phase(a.phase() + k);
                prop_assert_eq!(a.classify(), shifted.classify());
                prop_assert_eq!(a.is_ztype(), a.classify().n3 == 0);
            }

            #[test]
            fn text_round_trip(a in pauli(12)) {
                let back: PauliString = a.to_string().parse().unwrap();
                prop_assert_eq!(back, a);
            }
        }
    }
}
