//! Exact moment operators of the phase-circuit ensemble.
//!
//! Multi-copy operators use the `kron` layout of [`super::dense`]: copy 0
//! sits in the most significant bits of the row and column index.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::dense::DenseOperator;
use super::{all_phase_circuits, error_branches, snapshot_vector, MAX_OPERATOR_QUBITS};
use crate::ensemble::NoiseModel;
use crate::error::{Error, Result};
use crate::pauli::{PauliClass, PauliString};
use crate::sigma::{sigma_exact, sigma_extended};

fn check_dim(n: usize, m: usize) -> Result<usize> {
    if n == 0 || m * n > MAX_OPERATOR_QUBITS {
        return Err(Error::CapExceeded(format!(
            "{m} copies of {n} qubits exceed {MAX_OPERATOR_QUBITS} qubits"
        )));
    }
    Ok(1 << (m * n))
}

fn copies(index: usize, n: usize, m: usize) -> Vec<usize> {
    let mask = (1 << n) - 1;
    (0..m).map(|k| index >> ((m - 1 - k) * n) & mask).collect()
}

/// Entrywise OR of the copy permutations `V_n(π)`, `π ∈ S_m`.
///
/// Entry `(r, c)` is one exactly when the registers of `r` are a
/// rearrangement of those of `c`.
pub fn union_permutation_operator(n: usize, m: usize) -> Result<DenseOperator> {
    let dim = check_dim(n, m)?;
    Ok(DenseOperator::from_fn(dim, |r, c| {
        let mut a = copies(r, n, m);
        let mut b = copies(c, n, m);
        a.sort_unstable();
        b.sort_unstable();
        C64::new(if a == b { 1.0 } else { 0.0 }, 0.0)
    }))
}

fn tensor_power(v: &[C64], m: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..m {
        out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    }
    out
}

fn add_projector(acc: &mut [C64], v: &[C64], w: f64) {
    let d = v.len();
    for (r, a) in v.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let a = a * w;
        let row = &mut acc[r * d..(r + 1) * d];
        for (slot, b) in row.iter_mut().zip(v) {
            *slot += a * b.conj();
        }
    }
}

fn sum_over_circuits(
    n: usize,
    m: usize,
    f: impl Fn(&crate::ensemble::PhaseCircuit, &mut Vec<C64>) + Sync,
) -> Result<DenseOperator> {
    let dim = check_dim(n, m)?;
    let circuits = all_phase_circuits(n)?;
    let data = circuits
        .par_iter()
        .fold(
            || vec![C64::new(0.0, 0.0); dim * dim],
            |mut acc, c| {
                f(c, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![C64::new(0.0, 0.0); dim * dim],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let norm = 1.0 / (circuits.len() as f64 * (1usize << n) as f64);
    Ok(DenseOperator::from_fn(dim, |r, c| data[r * dim + c] * norm))
}

/// `2⁻ⁿ E_A Σ_b Φ_{U,b}^{⊗m}` by enumerating every circuit and outcome.
pub fn moment_exact(n: usize, m: usize) -> Result<DenseOperator> {
    sum_over_circuits(n, m, |c, acc| {
        for b in 0..1usize << n {
            let u = snapshot_vector(c, 0, b);
            add_projector(acc, &tensor_power(u.amplitudes(), m), 1.0);
        }
    })
}

/// `2⁻ⁿ E_A Σ_b Φ̃_{U,b} ⊗ Φ_{U,b}`, where the first copy runs through every
/// error branch of the noisy circuit with its probability.
pub fn noisy_moment2_exact(n: usize, model: &NoiseModel) -> Result<DenseOperator> {
    model.validate(n)?;
    sum_over_circuits(n, 2, |c, acc| {
        let branches = error_branches(c, model);
        for b in 0..1usize << n {
            let clean = snapshot_vector(c, 0, b);
            for &(e, w) in &branches {
                if w == 0.0 {
                    continue;
                }
                let noisy = snapshot_vector(c, e, b);
                let v: Vec<C64> = noisy
                    .amplitudes()
                    .iter()
                    .flat_map(|a| clean.amplitudes().iter().map(move |b| a * b))
                    .collect();
                add_projector(acc, &v, w);
            }
        }
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Block {
    Delta,
    IdMinusDelta,
    SwapMinusDelta,
}

/// Which of `Δ₂`, `𝕀₄ − Δ₂`, `𝕊₂ − Δ₂` holds the single-qubit entry
/// `|x, w⟩⟨y, s⟩`, if any.
fn block(x: usize, w: usize, y: usize, s: usize) -> Option<Block> {
    if x == y && w == s {
        Some(if x == w { Block::Delta } else { Block::IdMinusDelta })
    } else if x == s && w == y && x != w {
        Some(Block::SwapMinusDelta)
    } else {
        None
    }
}

/// The trinomial closed form of the noisy second moment for the uniform
/// `zz` and `extended` models.
pub fn noisy_moment2_closed_form(n: usize, model: &NoiseModel) -> Result<DenseOperator> {
    let dim = check_dim(n, 2)?;
    let weight: Box<dyn Fn(i32, i32, i32) -> f64> = match *model {
        NoiseModel::Noiseless => Box::new(|_, j, k| 0f64.powi(j * k)),
        NoiseModel::Zz { p_e } => Box::new(move |i, j, k| (1.0 - p_e).powi(i * k) * p_e.powi(j * k)),
        NoiseModel::Extended { p_e } => Box::new(move |i, j, k| {
            (1.0 - p_e / 2.0).powi(i * k + k * (k - 1) / 2) * (p_e / 2.0).powi(j * k)
        }),
        NoiseModel::ZzHet { .. } => {
            return Err(Error::InvalidNoise("closed form needs a uniform rate".into()));
        }
    };
    let norm = (0.25f64).powi(n as i32);
    let mask = (1 << n) - 1;
    Ok(DenseOperator::from_fn(dim, |r, c| {
        let (x, w, y, s) = (r >> n, r & mask, c >> n, c & mask);
        let mut counts = [0i32; 3];
        for q in 0..n {
            match block(x >> q & 1, w >> q & 1, y >> q & 1, s >> q & 1) {
                Some(Block::Delta) => counts[0] += 1,
                Some(Block::IdMinusDelta) => counts[1] += 1,
                Some(Block::SwapMinusDelta) => counts[2] += 1,
                None => return C64::new(0.0, 0.0),
            }
        }
        C64::new(norm * weight(counts[0], counts[1], counts[2]), 0.0)
    }))
}

/// Channel coefficient of a class under a uniform model.
pub fn class_sigma(cls: PauliClass, model: &NoiseModel) -> Result<f64> {
    match *model {
        NoiseModel::Noiseless => Ok(sigma_exact(cls, 0.0)),
        NoiseModel::Zz { p_e } => Ok(sigma_exact(cls, p_e)),
        NoiseModel::Extended { p_e } => Ok(sigma_extended(cls, p_e)),
        NoiseModel::ZzHet { .. } => Err(Error::InvalidNoise("exact coefficients need a uniform rate".into())),
    }
}

/// Every Hermitian Pauli on `n` qubits, `x` then `z` as the fast index.
pub fn hermitian_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    (0..1u64 << n).flat_map(move |x| {
        (0..1u64 << n).map(move |z| {
            let xb = crate::bitlin::BitVec::from_u64(n, x);
            let zb = crate::bitlin::BitVec::from_u64(n, z);
            let phase = ((x & z).count_ones() % 4) as u8;
            PauliString::from_parts(xb, zb, phase)
        })
    })
}

/// Signed column action of a Pauli: `P|k⟩ = value · |k ⊕ x⟩`.
fn pauli_column(p: &PauliString, k: usize) -> C64 {
    let z = p.z().to_u64() as usize;
    let sign = if (z & k).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    C64::new(0.0, 1.0).powu(p.phase() as u32) * sign
}

/// `D⁻³ Σ_P σ_P P ⊗ P` over all Hermitian Paulis.
pub fn pauli_decomposition_moment2(n: usize, model: &NoiseModel) -> Result<DenseOperator> {
    let dim = check_dim(n, 2)?;
    let d = 1usize << n;
    let mut m = DenseOperator::zeros(dim);
    let norm = (d as f64).powi(-3);
    for p in hermitian_paulis(n) {
        let sigma = class_sigma(p.classify(), model)?;
        if sigma == 0.0 {
            continue;
        }
        let x = p.x().to_u64() as usize;
        for k1 in 0..d {
            let v1 = pauli_column(&p, k1);
            for k2 in 0..d {
                let v = v1 * pauli_column(&p, k2) * (sigma * norm);
                let (r, c) = (((k1 ^ x) << n) | (k2 ^ x), (k1 << n) | k2);
                m.set(r, c, m.get(r, c) + v);
            }
        }
    }
    Ok(m)
}

/// `2ⁿ tr(M · P ⊗ P)` for a two-copy operator `M` on `n`-qubit registers.
pub fn pauli_coefficient(m: &DenseOperator, p: &PauliString) -> C64 {
    let n = p.num_qubits();
    let d = 1usize << n;
    let x = p.x().to_u64() as usize;
    let mut acc = C64::new(0.0, 0.0);
    for a1 in 0..d {
        for a2 in 0..d {
            let a = (a1 << n) | a2;
            let b = ((a1 ^ x) << n) | (a2 ^ x);
            acc += m.get(a, b) * pauli_column(p, a1) * pauli_column(p, a2);
        }
    }
    acc * d as f64
}
