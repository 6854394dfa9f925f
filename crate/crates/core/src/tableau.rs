//! Clifford tableaux and stabilizer states.
//!
//! A [`CliffordTableau`] for `U` stores the conjugation images `U X_i U†`
//! and `U Z_i U†`. Applying a gate `g` replaces `U` by `g U`. The adjoint
//! direction is only available through [`CliffordTableau::inverse`].
//!
//! A [`StabState`] is the tableau of a Clifford `W` read as the state
//! `W|0…0⟩`: the images of `Z_i` are its stabilizer generators and the
//! images of `X_i` its destabilizers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::bitlin::{BitMatrix, BitVec};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// One gate of the supported Clifford set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    Cz(usize, usize),
    /// Control first, target second.
    Cnot(usize, usize),
}

impl GateOp {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            GateOp::H(q) | GateOp::S(q) | GateOp::Sdg(q) | GateOp::X(q) | GateOp::Z(q) => (q, None),
            GateOp::Cz(a, b) | GateOp::Cnot(a, b) => (a, Some(b)),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n {
                return Err(Error::InvalidTarget { index: q, n });
            }
        }
        if b == Some(a) {
            return Err(Error::RepeatedTarget(a));
        }
        Ok(())
    }

    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::S(q) => GateOp::Sdg(q),
            GateOp::Sdg(q) => GateOp::S(q),
            g => g,
        }
    }

    /// Replaces `p` by `g p g†`. Targets must already be validated.
    pub fn conjugate_in_place(&self, p: &mut PauliString) {
        match *self {
            GateOp::H(q) => {
                let (x, z) = (p.x().get(q), p.z().get(q));
                p.x_mut().set(q, z);
                p.z_mut().set(q, x);
                if x && z {
                    p.add_phase(2);
                }
            }
            GateOp::S(q) => {
                if p.x().get(q) {
                    p.z_mut().flip(q);
                    p.add_phase(1);
                }
            }
            GateOp::Sdg(q) => {
                if p.x().get(q) {
                    p.z_mut().flip(q);
                    p.add_phase(3);
                }
            }
            GateOp::X(q) => {
                if p.z().get(q) {
                    p.add_phase(2);
                }
            }
            GateOp::Z(q) => {
                if p.x().get(q) {
                    p.add_phase(2);
                }
            }
            GateOp::Cz(a, b) => {
                let (xa, xb) = (p.x().get(a), p.x().get(b));
                if xb {
                    p.z_mut().flip(a);
                }
                if xa {
                    p.z_mut().flip(b);
                }
                if xa && xb {
                    p.add_phase(2);
                }
            }
            GateOp::Cnot(c, t) => {
                if p.x().get(c) {
                    p.x_mut().flip(t);
                }
                if p.z().get(t) {
                    p.z_mut().flip(c);
                }
            }
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateOp::H(q) => write!(f, "H {q}"),
            GateOp::S(q) => write!(f, "S {q}"),
            GateOp::Sdg(q) => write!(f, "SDG {q}"),
            GateOp::X(q) => write!(f, "X {q}"),
            GateOp::Z(q) => write!(f, "Z {q}"),
            GateOp::Cz(a, b) => write!(f, "CZ {a} {b}"),
            GateOp::Cnot(a, b) => write!(f, "CNOT {a} {b}"),
        }
    }
}

/// A gate list on a fixed number of qubits, applied first to last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<GateOp>) -> Result<Self> {
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Self { n, gates })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn push(&mut self, g: GateOp) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// Parses one gate per line, e.g. `H 0`, `CZ 0 3`, `S 2`.
    ///
    /// Accepted names are `H`, `S`, `SDG`, `X`, `Z`, `CZ`, `CNOT` and `CX`
    /// (case-insensitive). `#` starts a comment.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let perr = |message: String| Error::ParseCircuit { line, message };
            let mut parts = body.split_whitespace();
            let name = parts.next().unwrap().to_ascii_uppercase();
            let args: Vec<usize> = parts
                .map(|t| t.parse::<usize>().map_err(|_| perr(format!("bad qubit index {t:?}"))))
                .collect::<Result<_>>()?;
            let arity = match name.as_str() {
                "CZ" | "CNOT" | "CX" => 2,
                _ => 1,
            };
            if args.len() != arity {
                return Err(perr(format!("{name} takes {arity} qubit index(es)")));
            }
            let g = match name.as_str() {
                "H" => GateOp::H(args[0]),
                "S" => GateOp::S(args[0]),
                "SDG" => GateOp::Sdg(args[0]),
                "X" => GateOp::X(args[0]),
                "Z" => GateOp::Z(args[0]),
                "CZ" => GateOp::Cz(args[0], args[1]),
                "CNOT" | "CX" => GateOp::Cnot(args[0], args[1]),
                other => return Err(perr(format!("unknown gate {other:?}"))),
            };
            g.validate(n).map_err(|e| perr(e.to_string()))?;
            gates.push(g);
        }
        Ok(Self { n, gates })
    }

    /// The adjoint circuit.
    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().rev().map(GateOp::inverse).collect(),
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Conjugation images of the single-qubit generators under a Clifford `U`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliffordTableau {
    n: usize,
    xrows: Vec<PauliString>,
    zrows: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            xrows: (0..n).map(|i| PauliString::single_x(n, i)).collect(),
            zrows: (0..n).map(|i| PauliString::single_z(n, i)).collect(),
        }
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        let mut t = Self::identity(c.num_qubits());
        for g in c.gates() {
            t.apply_unchecked(g);
        }
        t
    }

    /// Builds a tableau from explicit images. The images must satisfy the
    /// symplectic conditions; this is checked.
    pub fn from_images(xrows: Vec<PauliString>, zrows: Vec<PauliString>) -> Result<Self> {
        let n = xrows.len();
        if zrows.len() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: zrows.len(),
            });
        }
        for p in xrows.iter().chain(&zrows) {
            if p.num_qubits() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: p.num_qubits(),
                });
            }
            if !p.is_hermitian() {
                return Err(Error::NonHermitian);
            }
        }
        let t = Self { n, xrows, zrows };
        if !t.is_symplectic() {
            return Err(Error::Config("generator images violate commutation relations".into()));
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// `U X_i U†`.
    pub fn x_image(&self, i: usize) -> &PauliString {
        &self.xrows[i]
    }

    /// `U Z_i U†`.
    pub fn z_image(&self, i: usize) -> &PauliString {
        &self.zrows[i]
    }

    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let want_anti = i == j;
                if self.xrows[i].commutes_unchecked(&self.zrows[j]) == want_anti {
                    return false;
                }
                if !self.xrows[i].commutes_unchecked(&self.xrows[j])
                    || !self.zrows[i].commutes_unchecked(&self.zrows[j])
                {
                    return false;
                }
            }
        }
        true
    }

    /// `U <- g U`.
    pub fn apply_gate(&mut self, g: GateOp) -> Result<()> {
        g.validate(self.n)?;
        self.apply_unchecked(&g);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, g: &GateOp) {
        for p in self.xrows.iter_mut().chain(self.zrows.iter_mut()) {
            g.conjugate_in_place(p);
        }
    }

    /// Returns `U p U†` with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliString) -> PauliString {
        // p = i^k prod X^x prod Z^z, and conjugation is multiplicative.
        let mut out = PauliString::identity(self.n).with_phase(p.phase());
        for i in p.x().ones() {
            out.mul_assign_right(&self.xrows[i]);
        }
        for i in p.z().ones() {
            out.mul_assign_right(&self.zrows[i]);
        }
        out
    }

    /// Tableau of `U†`.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        // Symplectic matrix M with rows (x|z) of the images; its inverse is
        // Omega M^T Omega, which swaps the X and Z blocks of the transpose.
        let mut xrows = Vec::with_capacity(n);
        let mut zrows = Vec::with_capacity(n);
        for i in 0..n {
            // Preimage of X_i: coefficients from the Z-bit column i of images
            // under the symplectic pairing.
            let mut px = BitVec::zeros(n);
            let mut pz = BitVec::zeros(n);
            for j in 0..n {
                px.set(j, self.zrows[j].z().get(i));
                pz.set(j, self.xrows[j].z().get(i));
            }
            xrows.push(self.fix_sign(px, pz, &PauliString::single_x(n, i)));
            let mut qx = BitVec::zeros(n);
            let mut qz = BitVec::zeros(n);
            for j in 0..n {
                qx.set(j, self.zrows[j].x().get(i));
                qz.set(j, self.xrows[j].x().get(i));
            }
            zrows.push(self.fix_sign(qx, qz, &PauliString::single_z(n, i)));
        }
        Self { n, xrows, zrows }
    }

    /// Given the support of `U† target U`, finds its phase by pushing the
    /// Hermitian candidate back through `U`.
    fn fix_sign(&self, x: BitVec, z: BitVec, target: &PauliString) -> PauliString {
        let ys = x.and_count(&z);
        let cand = PauliString::from_parts(x, z, (ys % 4) as u8);
        let image = self.conjugate_unchecked(&cand);
        debug_assert!(image.eq_phaseless(target), "inverse support is wrong");
        let k = (image.phase() as usize + 4 - target.phase() as usize) % 4;
        let mut out = cand;
        out.add_phase(4 - k);
        out
    }

    /// Tableau of `second * first`, i.e. apply `first`, then `second`.
    pub fn then(&self, second: &Self) -> Result<Self> {
        if self.n != second.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: second.n,
            });
        }
        Ok(Self {
            n: self.n,
            xrows: self.xrows.iter().map(|p| second.conjugate_unchecked(p)).collect(),
            zrows: self.zrows.iter().map(|p| second.conjugate_unchecked(p)).collect(),
        })
    }

    /// Phaseless X- and Z-parts of `U Z_i U†`, one row per `i`.
    pub fn z_tableau_phaseless(&self) -> (BitMatrix, BitMatrix) {
        let c = BitMatrix::from_rows(self.n, self.zrows.iter().map(|p| p.x().clone()).collect());
        let d = BitMatrix::from_rows(self.n, self.zrows.iter().map(|p| p.z().clone()).collect());
        (c, d)
    }
}

/// Exact squared overlap `|⟨a|b⟩|²` of two stabilizer states: zero or `2^-k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overlap {
    /// `Some(k)` for `2^-k`, `None` for orthogonal states.
    pub neg_log2: Option<usize>,
}

impl Overlap {
    pub fn value(&self) -> f64 {
        match self.neg_log2 {
            Some(k) => (-(k as f64)).exp2(),
            None => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.neg_log2.is_none()
    }
}

/// Stabilizer state `W|0…0⟩` carried as the tableau of `W`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabState {
    tab: CliffordTableau,
}

impl StabState {
    pub fn zero_state(n: usize) -> Self {
        Self {
            tab: CliffordTableau::identity(n),
        }
    }

    /// Computational basis state `|b⟩`.
    pub fn basis(b: &BitVec) -> Self {
        let mut s = Self::zero_state(b.len());
        for q in b.ones() {
            s.tab.zrows[q].add_phase(2);
        }
        s
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        Self {
            tab: CliffordTableau::from_circuit(c),
        }
    }

    pub fn from_tableau(tab: CliffordTableau) -> Self {
        Self { tab }
    }

    pub fn tableau(&self) -> &CliffordTableau {
        &self.tab
    }

    pub fn num_qubits(&self) -> usize {
        self.tab.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.tab.zrows
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.tab.xrows
    }

    pub fn apply_gate(&mut self, g: GateOp) -> Result<()> {
        self.tab.apply_gate(g)
    }

    /// Applies a Clifford given by its tableau: the state becomes `U|ψ⟩`.
    pub fn evolve(&self, u: &CliffordTableau) -> Result<Self> {
        Ok(Self {
            tab: self.tab.then(u)?,
        })
    }

    pub(crate) fn rows_mut(&mut self) -> impl Iterator<Item = &mut PauliString> {
        self.tab.xrows.iter_mut().chain(self.tab.zrows.iter_mut())
    }

    /// Samples a computational-basis outcome from the Born distribution.
    /// Qubits are measured in ascending order on a scratch copy.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        let mut scratch = self.clone();
        scratch.measure_all_in_place(rng)
    }

    /// Like [`measure_all`](Self::measure_all) but collapses `self`.
    pub fn measure_all_in_place<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitVec {
        let n = self.num_qubits();
        let mut out = BitVec::zeros(n);
        for q in 0..n {
            out.set(q, self.measure_z(q, rng));
        }
        out
    }

    fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let n = self.num_qubits();
        let t = &mut self.tab;
        if let Some(p) = (0..n).find(|&i| t.zrows[i].x().get(q)) {
            let pivot = t.zrows[p].clone();
            for i in 0..n {
                if i != p && t.zrows[i].x().get(q) {
                    t.zrows[i].mul_assign_right(&pivot);
                }
                if i != p && t.xrows[i].x().get(q) {
                    t.xrows[i].mul_assign_right(&pivot);
                }
            }
            let outcome: bool = rng.random();
            t.xrows[p] = pivot;
            t.zrows[p] = PauliString::single_z(n, q).with_phase(if outcome { 2 } else { 0 });
            outcome
        } else {
            let mut acc = PauliString::identity(n);
            for i in 0..n {
                if t.xrows[i].x().get(q) {
                    acc.mul_assign_right(&t.zrows[i]);
                }
            }
            debug_assert!(acc.eq_phaseless(&PauliString::single_z(n, q)));
            acc.phase() == 2
        }
    }

    /// `⟨ψ|p|ψ⟩ ∈ {+1, −1, 0}` for Hermitian `p`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<i8> {
        if p.num_qubits() != self.num_qubits() {
            return Err(Error::SizeMismatch {
                left: self.num_qubits(),
                right: p.num_qubits(),
            });
        }
        if !p.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        Ok(self.expectation_unchecked(p))
    }

    pub(crate) fn expectation_unchecked(&self, p: &PauliString) -> i8 {
        if self.tab.zrows.iter().any(|s| !s.commutes_unchecked(p)) {
            return 0;
        }
        let mut acc = PauliString::identity(self.num_qubits());
        for (d, s) in self.tab.xrows.iter().zip(&self.tab.zrows) {
            if !d.commutes_unchecked(p) {
                acc.mul_assign_right(s);
            }
        }
        debug_assert!(acc.eq_phaseless(p));
        if (p.phase() + 4 - acc.phase()) % 4 == 0 {
            1
        } else {
            -1
        }
    }

    /// Exact `|⟨self|other⟩|²`.
    pub fn overlap_sq(&self, other: &StabState) -> Result<Overlap> {
        let n = self.num_qubits();
        if other.num_qubits() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: other.num_qubits(),
            });
        }
        let g1 = self.stabilizers();
        let g2 = other.stabilizers();
        // Products of g1 commuting with every g2 lie in ±S2.
        let m = BitMatrix::from_fn(n, n, |i, j| !g1[i].commutes_unchecked(&g2[j]));
        let basis = m.left_null_basis();
        for a in &basis {
            let mut prod = PauliString::identity(n);
            for i in a.ones() {
                prod.mul_assign_right(&g1[i]);
            }
            if other.expectation_unchecked(&prod) != 1 {
                return Ok(Overlap { neg_log2: None });
            }
        }
        Ok(Overlap {
            neg_log2: Some(n - basis.len()),
        })
    }
}

impl FromStr for GateOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let c = Circuit::parse(usize::MAX, s)?;
        match c.gates() {
            [g] => Ok(*g),
            _ => Err(Error::ParseCircuit {
                line: 1,
                message: "expected exactly one gate".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense::{gate_unitary, pauli_matrix, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    pub(crate) fn random_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
        let mut gates = Vec::with_capacity(len);
        for _ in 0..len {
            let a = rng.random_range(0..n);
            let kind = if n > 1 { rng.random_range(0..7) } else { rng.random_range(0..5) };
            let mut b = rng.random_range(0..n);
            while n > 1 && b == a {
                b = rng.random_range(0..n);
            }
            gates.push(match kind {
                0 => GateOp::H(a),
                1 => GateOp::S(a),
                2 => GateOp::Sdg(a),
                3 => GateOp::X(a),
                4 => GateOp::Z(a),
                5 => GateOp::Cz(a, b),
                _ => GateOp::Cnot(a, b),
            });
        }
        Circuit::new(n, gates).unwrap()
    }

    fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliString {
        let x = BitVec::from_u64(n, rng.random());
        let z = BitVec::from_u64(n, rng.random());
        let ys = x.and_count(&z);
        PauliString::from_parts(x, z, ((ys + 2 * rng.random_range(0..2)) % 4) as u8)
    }

    #[test]
    fn identity_examples() {
        let t = CliffordTableau::identity(2);
        assert_eq!(t.conjugate(&p("XI")).unwrap(), p("XI"));
        let s = StabState::zero_state(3);
        for q in 0..3 {
            assert_eq!(s.pauli_expectation(&PauliString::single_z(3, q)).unwrap(), 1);
        }
        assert_eq!(StabState::zero_state(1).pauli_expectation(&p("X")).unwrap(), 0);
        let one = StabState::basis(&BitVec::from_u64(1, 1));
        assert_eq!(one.pauli_expectation(&p("Z")).unwrap(), -1);
    }

    #[test]
    fn gate_examples() {
        let mut t = CliffordTableau::identity(1);
        t.apply_gate(GateOp::H(0)).unwrap();
        assert_eq!(t.z_image(0), &p("X"));
        assert_eq!(t.conjugate(&p("Z")).unwrap(), p("X"));

        let mut s = CliffordTableau::identity(1);
        s.apply_gate(GateOp::S(0)).unwrap();
        assert_eq!(s.conjugate(&p("X")).unwrap(), p("Y"));

        let mut cz = CliffordTableau::identity(2);
        cz.apply_gate(GateOp::Cz(0, 1)).unwrap();
        assert_eq!(cz.conjugate(&p("XI")).unwrap(), p("XZ"));

        assert!(matches!(t.apply_gate(GateOp::H(3)), Err(Error::InvalidTarget { .. })));
        assert!(matches!(cz.apply_gate(GateOp::Cz(1, 1)), Err(Error::RepeatedTarget(1))));
    }

    #[test]
    fn circuit_text_round_trip() {
        let text = "# prep\nH 0\ncz 0 3\nS 2  # phase\nSDG 1\nX 3\nZ 0\nCX 1 2\n";
        let c = Circuit::parse(4, text).unwrap();
        assert_eq!(c.gates().len(), 7);
        assert_eq!(c.gates()[1], GateOp::Cz(0, 3));
        assert_eq!(c.gates()[6], GateOp::Cnot(1, 2));
        assert_eq!(Circuit::parse(4, &c.to_string()).unwrap(), c);
        assert!(Circuit::parse(2, "H 2").is_err());
        assert!(Circuit::parse(2, "CZ 0").is_err());
        assert!(Circuit::parse(2, "T 0").is_err());
        assert_eq!("CZ 0 1".parse::<GateOp>().unwrap(), GateOp::Cz(0, 1));
    }

    #[test]
    fn conjugation_matches_dense_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for _ in 0..30 {
                let c = random_circuit(&mut rng, n, 20);
                let t = CliffordTableau::from_circuit(&c);
                assert!(t.is_symplectic());
                let u = gate_unitary(&c);
                for _ in 0..5 {
                    let q = random_pauli(&mut rng, n);
                    let dense = u.mul(&pauli_matrix(&q)).mul(&u.adjoint());
                    let fast = pauli_matrix(&t.conjugate(&q).unwrap());
                    assert!(dense.max_abs_diff(&fast) < 1e-12, "{c}");
                }
            }
        }
    }

    #[test]
    fn state_matches_dense_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let c = random_circuit(&mut rng, 3, 20);
            let s = StabState::from_circuit(&c);
            let mut psi = StateVector::zero(3);
            psi.apply_circuit(&c);
            for g in s.stabilizers() {
                assert!((psi.expectation(g) - 1.0).abs() < 1e-12);
            }
            for _ in 0..10 {
                let q = random_pauli(&mut rng, 3);
                let e = s.pauli_expectation(&q).unwrap() as f64;
                assert!((psi.expectation(&q) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=8 {
            for _ in 0..10 {
                let c = random_circuit(&mut rng, n, 40);
                let t = CliffordTableau::from_circuit(&c);
                let inv = t.inverse();
                assert_eq!(inv, CliffordTableau::from_circuit(&c.inverse()));
                assert_eq!(t.then(&inv).unwrap(), CliffordTableau::identity(n));
                assert_eq!(inv.then(&t).unwrap(), CliffordTableau::identity(n));
                for _ in 0..5 {
                    let q = random_pauli(&mut rng, n);
                    assert_eq!(inv.conjugate(&t.conjugate(&q).unwrap()).unwrap(), q);
                }
                let c2 = random_circuit(&mut rng, n, 10);
                let mut joined = c.clone();
                for g in c2.gates() {
                    joined.push(*g).unwrap();
                }
                assert_eq!(
                    t.then(&CliffordTableau::from_circuit(&c2)).unwrap(),
                    CliffordTableau::from_circuit(&joined)
                );
            }
        }
    }

    #[test]
    fn conjugation_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = CliffordTableau::from_circuit(&random_circuit(&mut rng, 10, 100));
        for _ in 0..100 {
            let a = random_pauli(&mut rng, 10).with_phase(rng.random_range(0..4));
            let b = random_pauli(&mut rng, 10).with_phase(rng.random_range(0..4));
            let lhs = t.conjugate(&a.multiply(&b).unwrap()).unwrap();
            let rhs = t.conjugate(&a).unwrap().multiply(&t.conjugate(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn z_tableau_examples() {
        let (c, d) = CliffordTableau::identity(3).z_tableau_phaseless();
        assert_eq!(c, BitMatrix::zeros(3, 3));
        assert_eq!(d, BitMatrix::identity(3));
        let h = Circuit::new(3, (0..3).map(GateOp::H).collect()).unwrap();
        let (c, d) = CliffordTableau::from_circuit(&h).z_tableau_phaseless();
        assert_eq!(c, BitMatrix::identity(3));
        assert_eq!(d, BitMatrix::zeros(3, 3));

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let t = CliffordTableau::from_circuit(&random_circuit(&mut rng, 3, 20));
            let (c, d) = t.z_tableau_phaseless();
            for i in 0..3 {
                let img = t.conjugate(&PauliString::single_z(3, i)).unwrap();
                assert_eq!(c.row(i), img.x());
                assert_eq!(d.row(i), img.z());
            }
        }
    }

    #[test]
    fn measurement_is_deterministic_on_basis_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = BitVec::from_u64(5, 0b10110);
        let s = StabState::basis(&b);
        for _ in 0..20 {
            assert_eq!(s.measure_all(&mut rng), b);
        }
        assert!(StabState::zero_state(4).measure_all(&mut rng).is_zero());
    }

    #[test]
    fn plus_state_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = StabState::from_circuit(&Circuit::new(1, vec![GateOp::H(0)]).unwrap());
        let draws = 100_000;
        let zeros = (0..draws).filter(|_| !s.measure_all(&mut rng).get(0)).count();
        let sd = (draws as f64 * 0.25).sqrt();
        assert!((zeros as f64 - draws as f64 / 2.0).abs() < 3.0 * sd);
    }

    #[test]
    fn born_rule_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ghz = Circuit::parse(3, "H 0\nCNOT 0 1\nCNOT 1 2\nS 2\nH 2").unwrap();
        let circuits = [ghz, random_circuit(&mut rng, 3, 30), random_circuit(&mut rng, 2, 15)];
        for c in circuits {
            let n = c.num_qubits();
            let s = StabState::from_circuit(&c);
            let mut psi = StateVector::zero(n);
            psi.apply_circuit(&c);
            let probs = psi.probabilities();
            let draws = 100_000;
            let mut counts = vec![0usize; 1 << n];
            for _ in 0..draws {
                counts[s.measure_all(&mut rng).to_u64() as usize] += 1;
            }
            let tv: f64 = counts
                .iter()
                .zip(&probs)
                .map(|(&k, &q)| (k as f64 / draws as f64 - q).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.01, "tv {tv} for\n{c}");
        }
    }

    #[test]
    fn overlap_examples() {
        let zero = StabState::zero_state(4);
        assert_eq!(zero.overlap_sq(&zero).unwrap().value(), 1.0);
        let plus = StabState::from_circuit(&Circuit::new(4, (0..4).map(GateOp::H).collect()).unwrap());
        assert_eq!(zero.overlap_sq(&plus).unwrap().neg_log2, Some(4));
        let ghz = StabState::from_circuit(&Circuit::parse(4, "H 0\nCX 0 1\nCX 0 2\nCX 0 3").unwrap());
        assert_eq!(ghz.overlap_sq(&zero).unwrap().value(), 0.5);
        let one = StabState::basis(&BitVec::from_u64(4, 1));
        assert!(zero.overlap_sq(&one).unwrap().is_zero());
    }

    #[test]
    fn overlap_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let c1 = random_circuit(&mut rng, n, 25);
            let c2 = random_circuit(&mut rng, n, 25);
            let s1 = StabState::from_circuit(&c1);
            let s2 = StabState::from_circuit(&c2);
            let mut a = StateVector::zero(n);
            a.apply_circuit(&c1);
            let mut b = StateVector::zero(n);
            b.apply_circuit(&c2);
            let dense = a.inner(&b).norm_sqr();
            assert!((s1.overlap_sq(&s2).unwrap().value() - dense).abs() < 1e-12);
            assert_eq!(s1.overlap_sq(&s1).unwrap().value(), 1.0);
        }
    }
}
