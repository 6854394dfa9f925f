//! Dense complex matrices and statevectors for brute-force checks.
//!
//! Basis index bit `k` is qubit `k`. For multi-copy operators the first copy
//! occupies the most significant bits, matching `kron(A, B)`.

use num_complex::Complex64;

use crate::pauli::PauliString;
use crate::tableau::{Circuit, GateOp};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<C64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out.data[r * d..(r + 1) * d];
                for (o, &b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        Self::from_fn(a * b, |r, c| self.get(r / b, c / b) * rhs.get(r % b, c % b))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> C64 {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for k in 0..d {
                acc += self.data[r * d + k] * rhs.data[k * d + r];
            }
        }
        acc
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn one_qubit(x: bool, z: bool) -> DenseOperator {
    // X^x Z^z on one site.
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let m = match (x, z) {
        (false, false) => [l, o, o, l],
        (true, false) => [o, l, l, o],
        (false, true) => [l, o, o, -l],
        (true, true) => [o, -l, l, o],
    };
    DenseOperator {
        dim: 2,
        data: m.to_vec(),
    }
}

/// Dense matrix of a Pauli operator, built as a Kronecker product of
/// per-site factors.
pub fn pauli_matrix(p: &PauliString) -> DenseOperator {
    let n = p.num_qubits();
    let mut m = DenseOperator::identity(1);
    for q in (0..n).rev() {
        m = m.kron(&one_qubit(p.x().get(q), p.z().get(q)));
    }
    m.scale(I.powu(p.phase() as u32))
}

/// Unitary of a gate list, assembled column by column.
pub fn gate_unitary(c: &Circuit) -> DenseOperator {
    let dim = 1usize << c.num_qubits();
    let mut m = DenseOperator::zeros(dim);
    for col in 0..dim {
        let mut v = StateVector::basis(c.num_qubits(), col);
        v.apply_circuit(c);
        for (row, &a) in v.amplitudes().iter().enumerate() {
            m.set(row, col, a);
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply_circuit(&mut self, c: &Circuit) {
        for g in c.gates() {
            self.apply_gate(g);
        }
    }

    pub fn apply_gate(&mut self, g: &GateOp) {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        match *g {
            GateOp::H(q) => {
                let m = 1 << q;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * half;
                        self.amps[i | m] = (a - b) * half;
                    }
                }
            }
            GateOp::S(q) => self.phase_where(|i| i >> q & 1 == 1, I),
            GateOp::Sdg(q) => self.phase_where(|i| i >> q & 1 == 1, -I),
            GateOp::Z(q) => self.phase_where(|i| i >> q & 1 == 1, C64::new(-1.0, 0.0)),
            GateOp::Cz(a, b) => self.phase_where(|i| (i >> a) & (i >> b) & 1 == 1, C64::new(-1.0, 0.0)),
            GateOp::X(q) => {
                let m = 1 << q;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            GateOp::Cnot(c, t) => {
                let (mc, mt) = (1 << c, 1 << t);
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
        }
    }

    fn phase_where(&mut self, pred: impl Fn(usize) -> bool, f: C64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if pred(i) {
                *a *= f;
            }
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Real part of `⟨ψ|p|ψ⟩` using the dense Pauli matrix.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let m = pauli_matrix(p);
        let d = self.amps.len();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for c in 0..d {
                row += m.get(r, c) * self.amps[c];
            }
            acc += self.amps[r].conj() * row;
        }
        acc.re
    }

    /// `⟨ψ|p|ψ⟩` by direct index arithmetic, `X^x Z^z|k⟩ = (−1)^{z·k}|k ⊕ x⟩`.
    pub fn pauli_value(&self, p: &PauliString) -> C64 {
        let x = p.x().to_u64() as usize;
        let z = p.z().to_u64() as usize;
        let mut acc = C64::new(0.0, 0.0);
        for (k, a) in self.amps.iter().enumerate() {
            let t = self.amps[k ^ x].conj() * a;
            if (z & k).count_ones() % 2 == 1 {
                acc -= t;
            } else {
                acc += t;
            }
        }
        acc * I.powu(p.phase() as u32)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn density(&self) -> DenseOperator {
        DenseOperator::outer(&self.amps, &self.amps)
    }
}
