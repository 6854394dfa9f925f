//! Estimators evaluated term by term over the whole Pauli group, and their
//! exact expectations over the ensemble.

use super::dense::StateVector;
use super::moments::hermitian_paulis;
use super::{all_phase_circuits, error_branches, evolve_vector, prepared_vector, snapshot_vector};
use crate::bitlin::BitVec;
use crate::ensemble::{NoiseModel, Snapshot};
use crate::error::{Error, Result};
use crate::shadow::{estimate_stab_diag, estimate_stab_offdiag, StabObservable};
use crate::sigma::{Mode, SigmaEngine};
use crate::tableau::Circuit;

/// Largest qubit count for the `4ⁿ`-term sums.
pub const MAX_BRUTE_QUBITS: usize = 6;

/// Largest qubit count for exhaustive estimator expectations.
pub const MAX_EXPECTATION_QUBITS: usize = 4;

fn snapshot_state(s: &Snapshot) -> Result<StateVector> {
    let c = s.circuit().ok_or(Error::WrongSnapshotKind { expected: "offdiag" })?;
    if s.num_qubits() > MAX_BRUTE_QUBITS {
        return Err(Error::CapExceeded(format!("{} qubits for a 4^n sum", s.num_qubits())));
    }
    Ok(snapshot_vector(c, 0, s.outcome().to_u64() as usize))
}

/// `Σ_{P ∉ 𝒵_n} σ_P⁻¹ tr(Φ P) tr(Ψ P)` with dense traces over every
/// Hermitian Pauli.
pub fn brute_offdiag_estimator(s: &Snapshot, prep: &Circuit, sigma: &SigmaEngine) -> Result<f64> {
    if prep.num_qubits() != s.num_qubits() {
        return Err(Error::SizeMismatch {
            left: s.num_qubits(),
            right: prep.num_qubits(),
        });
    }
    let phi = snapshot_state(s)?;
    let psi = prepared_vector(prep);
    let mut total = 0.0;
    for p in hermitian_paulis(s.num_qubits()) {
        if p.is_ztype() {
            continue;
        }
        let tp = psi.pauli_value(&p).re;
        if tp.abs() < 0.5 {
            continue;
        }
        let tf = phi.pauli_value(&p).re;
        if tf.abs() < 0.5 {
            continue;
        }
        total += sigma.inverse(&p)? * tf * tp;
    }
    Ok(total)
}

/// `|[𝐒_U] ∩ [𝐒_V]|`: Paulis with unit expectation in both the snapshot
/// state and `Ψ`, found from dense expectations.
pub fn brute_shared_group_size(s: &Snapshot, prep: &Circuit) -> Result<usize> {
    let phi = snapshot_state(s)?;
    let psi = prepared_vector(prep);
    Ok(hermitian_paulis(s.num_qubits())
        .filter(|p| psi.pauli_value(p).re.abs() > 0.5 && phi.pauli_value(p).re.abs() > 0.5)
        .count())
}

/// `|⟨ψ|φ⟩|²` for two prepared states, densely.
pub fn dense_fidelity(a: &Circuit, b: &Circuit) -> f64 {
    prepared_vector(a).inner(&prepared_vector(b)).norm_sqr()
}

/// Exact expectation of the stabilizer-fidelity estimator for state
/// `rho_prep` and observable `obs_prep`: every circuit, every error branch
/// and every outcome weighted by its Born probability, plus the diagonal
/// part weighted by the computational-basis distribution.
pub fn exact_estimator_expectation(
    rho_prep: &Circuit,
    obs_prep: &Circuit,
    model: &NoiseModel,
    mode: Mode,
) -> Result<f64> {
    let n = rho_prep.num_qubits();
    if obs_prep.num_qubits() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: obs_prep.num_qubits(),
        });
    }
    if n > MAX_EXPECTATION_QUBITS {
        return Err(Error::CapExceeded(format!("{n} qubits for an exhaustive expectation")));
    }
    let sigma = SigmaEngine::new(n, model.clone(), mode)?;
    let obs = StabObservable::from_circuit(obs_prep);
    let rho = prepared_vector(rho_prep);
    let circuits = all_phase_circuits(n)?;
    let mut offdiag = 0.0;
    for c in &circuits {
        for (e, w) in error_branches(c, model) {
            if w == 0.0 {
                continue;
            }
            let out = evolve_vector(c, e, &rho);
            for (b, prob) in out.probabilities().into_iter().enumerate() {
                if prob < 1e-300 {
                    continue;
                }
                let s = Snapshot::offdiag(c.clone(), BitVec::from_u64(n, b as u64))?;
                offdiag += w * prob * estimate_stab_offdiag(&s, &obs, &sigma)?;
            }
        }
    }
    offdiag /= circuits.len() as f64;
    let mut diag = 0.0;
    for (b, prob) in rho.probabilities().into_iter().enumerate() {
        if prob > 1e-300 {
            diag += prob * estimate_stab_diag(&Snapshot::diag(BitVec::from_u64(n, b as u64)), &obs)?;
        }
    }
    Ok(offdiag + diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::PhaseCircuit;

    fn circuit(n: usize, text: &str) -> Circuit {
        Circuit::parse(n, text).unwrap()
    }

    #[test]
    fn worked_single_qubit_example() {
        let s = Snapshot::offdiag(PhaseCircuit::zero(1), BitVec::zeros(1)).unwrap();
        let sigma = SigmaEngine::new(1, NoiseModel::Noiseless, Mode::Plain).unwrap();
        let v = brute_offdiag_estimator(&s, &circuit(1, "H 0"), &sigma).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_has_no_offdiagonal_part() {
        let sigma = SigmaEngine::new(3, NoiseModel::Zz { p_e: 0.1 }, Mode::Robust).unwrap();
        for c in all_phase_circuits(3).unwrap() {
            for b in 0..8 {
                let s = Snapshot::offdiag(c.clone(), BitVec::from_u64(3, b)).unwrap();
                assert_eq!(brute_offdiag_estimator(&s, &Circuit::empty(3), &sigma).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn plus_state_expectation_is_one() {
        let plus = circuit(1, "H 0");
        let v = exact_estimator_expectation(&plus, &plus, &NoiseModel::Noiseless, Mode::Plain).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_estimate_exhaustive_two_qubits() {
        // ρ = |+⟩⊗|0⟩, q = X⊗I.
        let n = 2;
        let rho = prepared_vector(&circuit(n, "H 0"));
        let q = "XI".parse().unwrap();
        let sigma = SigmaEngine::new(n, NoiseModel::Noiseless, Mode::Plain).unwrap();
        let circuits = all_phase_circuits(n).unwrap();
        let mut total = 0.0;
        for c in &circuits {
            let out = evolve_vector(c, 0, &rho);
            for (b, prob) in out.probabilities().into_iter().enumerate() {
                let s = Snapshot::offdiag(c.clone(), BitVec::from_u64(n, b as u64)).unwrap();
                total += prob * crate::shadow::estimate_pauli(&s, &q, &sigma).unwrap();
            }
        }
        assert!((total / circuits.len() as f64 - 1.0).abs() < 1e-12);
    }
}
