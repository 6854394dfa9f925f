//! Brute-force reference computations at small qubit counts.
//!
//! Everything here works on dense statevectors and matrices and never calls
//! into the tableau simulator, so it can serve as ground truth for it.

pub mod channel;
pub mod dense;
pub mod estimators;
pub mod moments;

use crate::bitlin::BitVec;
use crate::ensemble::{NoiseModel, PhaseCircuit};
use crate::error::{Error, Result};
use crate::tableau::{Circuit, GateOp};

use dense::StateVector;

/// Largest number of phase circuits an enumeration may visit.
pub const MAX_CIRCUITS: usize = 1 << 15;

/// Largest total qubit count (copies times qubits) of a dense operator.
pub const MAX_OPERATOR_QUBITS: usize = 12;

/// Every phase circuit on `n` qubits.
pub fn all_phase_circuits(n: usize) -> Result<Vec<PhaseCircuit>> {
    let free = PhaseCircuit::free_bits(n);
    if free > 15 {
        return Err(Error::CapExceeded(format!(
            "{n} qubits need 2^{free} circuits, limit is {MAX_CIRCUITS}"
        )));
    }
    (0..1u64 << free)
        .map(|m| PhaseCircuit::from_upper_bits(n, &BitVec::from_u64(free, m)))
        .collect()
}

/// Error patterns of one run of `c`, expanded gate by gate without merging.
pub fn error_branches(c: &PhaseCircuit, model: &NoiseModel) -> Vec<(u64, f64)> {
    let mut out = vec![(0u64, 1.0)];
    for (i, j) in c.cz_pairs() {
        let mut next = Vec::with_capacity(out.len() * 4);
        for &(e, w) in &out {
            for (bw, zi, zj) in model.cz_branches(i, j) {
                let flip = (zi as u64) << i | (zj as u64) << j;
                next.push((e ^ flip, w * bw));
            }
        }
        out = next;
    }
    out
}

/// `U_e†|b⟩` with `U_e = H^{⊗n} Z^e U_A`, by dense gate application.
pub fn snapshot_vector(c: &PhaseCircuit, e: u64, b: usize) -> StateVector {
    let n = c.num_qubits();
    let mut v = StateVector::basis(n, b);
    for q in 0..n {
        v.apply_gate(&GateOp::H(q));
    }
    for q in 0..n {
        if e >> q & 1 == 1 {
            v.apply_gate(&GateOp::Z(q));
        }
    }
    for (i, j) in c.cz_pairs() {
        v.apply_gate(&GateOp::Cz(i, j));
    }
    for q in 0..n {
        if c.entry(q, q) {
            v.apply_gate(&GateOp::Sdg(q));
        }
    }
    v
}

/// `U_e|ψ⟩` for the same `U_e`.
pub fn evolve_vector(c: &PhaseCircuit, e: u64, psi: &StateVector) -> StateVector {
    let n = c.num_qubits();
    let mut v = psi.clone();
    for q in 0..n {
        if c.entry(q, q) {
            v.apply_gate(&GateOp::S(q));
        }
    }
    for (i, j) in c.cz_pairs() {
        v.apply_gate(&GateOp::Cz(i, j));
    }
    for q in 0..n {
        if e >> q & 1 == 1 {
            v.apply_gate(&GateOp::Z(q));
        }
    }
    for q in 0..n {
        v.apply_gate(&GateOp::H(q));
    }
    v
}

/// Dense state prepared by a gate list from `|0…0⟩`.
pub fn prepared_vector(prep: &Circuit) -> StateVector {
    let mut v = StateVector::zero(prep.num_qubits());
    v.apply_circuit(prep);
    v
}
