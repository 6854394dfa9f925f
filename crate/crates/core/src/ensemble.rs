//! The random phase-circuit ensemble and noisy shot simulation.
//!
//! A [`PhaseCircuit`] is `U = H^{⊗n} · ∏ CZ_{ij}^{A_ij} · ∏ S_k^{A_kk}` for a
//! symmetric binary matrix `A`. Acting on a state, the diagonal layer comes
//! first and the Hadamard layer last.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitlin::{BitMatrix, BitVec};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::{Circuit, CliffordTableau, GateOp, StabState};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PhaseCircuit {
    n: usize,
    /// Symmetric rows of `A`, diagonal included.
    rows: Vec<BitVec>,
}

impl PhaseCircuit {
    /// The circuit with `A = 0`, i.e. `U = H^{⊗n}`.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            rows: vec![BitVec::zeros(n); n],
        }
    }

    pub fn from_matrix(a: &BitMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::SizeMismatch { left: n, right: a.cols() });
        }
        if *a != a.transpose() {
            return Err(Error::Config("phase matrix must be symmetric".into()));
        }
        Ok(Self {
            n,
            rows: a.row_iter().cloned().collect(),
        })
    }

    /// Number of free entries, `n(n+1)/2`.
    pub fn free_bits(n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// Builds `A` from its upper triangle (diagonal included), row-major.
    pub fn from_upper_bits(n: usize, bits: &BitVec) -> Result<Self> {
        if bits.len() != Self::free_bits(n) {
            return Err(Error::SizeMismatch {
                left: Self::free_bits(n),
                right: bits.len(),
            });
        }
        let mut c = Self::zero(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                if bits.get(k) {
                    c.rows[i].set(j, true);
                    c.rows[j].set(i, true);
                }
                k += 1;
            }
        }
        Ok(c)
    }

    pub fn upper_bits(&self) -> BitVec {
        let mut bits = BitVec::zeros(Self::free_bits(self.n));
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                bits.set(k, self.rows[i].get(j));
                k += 1;
            }
        }
        bits
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.n, self.rows.clone())
    }

    /// Applied CZ gates `(i, j)` with `i < j`, row-major.
    pub fn cz_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.rows[i].ones().filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Gate list of `U`: S layer, CZ layer, then H layer.
    pub fn to_circuit(&self) -> Circuit {
        let mut gates = Vec::new();
        for k in 0..self.n {
            if self.rows[k].get(k) {
                gates.push(GateOp::S(k));
            }
        }
        gates.extend(self.cz_pairs().map(|(i, j)| GateOp::Cz(i, j)));
        gates.extend((0..self.n).map(GateOp::H));
        Circuit::new(self.n, gates).expect("phase circuit gates are in range")
    }

    pub fn to_tableau(&self) -> CliffordTableau {
        CliffordTableau::from_circuit(&self.to_circuit())
    }

    /// Conjugates `p` through the diagonal layer, then `Z^zerr`, then the H
    /// layer. Without errors this is `U p U†`.
    ///
    /// All diagonal gates and Z errors commute, so their combined action on
    /// `i^k X^x Z^z` is `z ^= A x` and a phase shift read off `x`.
    pub fn conjugate_in_place(&self, p: &mut PauliString, zerr: Option<&BitVec>) {
        let x = p.x().clone();
        let mut shift = BitVec::zeros(self.n);
        let mut quad = 0usize;
        for i in x.ones() {
            shift.xor_assign(&self.rows[i]);
            quad += self.rows[i].and_count(&x);
        }
        p.z_mut().xor_assign(&shift);
        let mut k = quad;
        if let Some(e) = zerr {
            k += 2 * e.and_count(&x);
        }
        k += 2 * (p.x().and_count(p.z()) & 1);
        p.add_phase(k);
        p.swap_xz();
    }

    /// `U p U†` through the layer structure.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = p.clone();
        self.conjugate_in_place(&mut out, None);
        out
    }

    /// Conjugates every generator of `s` by the (possibly noisy) circuit.
    pub(crate) fn evolve_state(&self, s: &mut StabState, zerr: Option<&BitVec>) {
        for row in s.rows_mut() {
            self.conjugate_in_place(row, zerr);
        }
    }
}

impl fmt::Debug for PhaseCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseCircuit(n={}, A={:?})", self.n, self.matrix())
    }
}

/// Draws each free entry of `A` as an independent fair coin.
///
/// Bits are consumed from successive 64-bit words, lowest bit first.
pub fn sample_phase_circuit<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> PhaseCircuit {
    let m = PhaseCircuit::free_bits(n);
    let words = (0..m.div_ceil(64)).map(|_| rng.next_u64()).collect();
    PhaseCircuit::from_upper_bits(n, &BitVec::from_words(m, words)).expect("length matches")
}

/// Pauli noise attached to every applied CZ gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Noiseless,
    /// `Z⊗Z` with probability `p_e`.
    Zz { p_e: f64 },
    /// `Z⊗I`, `I⊗Z`, `Z⊗Z` each with probability `p_e / 4`.
    Extended { p_e: f64 },
    /// `Z⊗Z` with a per-pair probability `rates[i][j]`.
    ZzHet { rates: Vec<Vec<f64>> },
}

impl NoiseModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidNoise(format!("error rate {p} outside [0, 1]")))
            }
        };
        match self {
            NoiseModel::Noiseless => Ok(()),
            NoiseModel::Zz { p_e } | NoiseModel::Extended { p_e } => check(*p_e),
            NoiseModel::ZzHet { rates } => {
                if rates.len() != n || rates.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidNoise(format!("rate table must be {n}x{n}")));
                }
                for i in 0..n {
                    for j in 0..n {
                        check(rates[i][j])?;
                        if rates[i][j] != rates[j][i] {
                            return Err(Error::InvalidNoise("rate table must be symmetric".into()));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Uniform error rate, zero for the noiseless model.
    pub fn p_e(&self) -> Option<f64> {
        match self {
            NoiseModel::Noiseless => Some(0.0),
            NoiseModel::Zz { p_e } | NoiseModel::Extended { p_e } => Some(*p_e),
            NoiseModel::ZzHet { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Noiseless => "noiseless",
            NoiseModel::Zz { .. } => "zz",
            NoiseModel::Extended { .. } => "extended",
            NoiseModel::ZzHet { .. } => "zz_het",
        }
    }

    /// Builds a uniform model by name (`noiseless`, `zz`, `extended`).
    pub fn uniform(name: &str, p_e: f64) -> Result<Self> {
        let m = match name {
            "noiseless" => NoiseModel::Noiseless,
            "zz" => NoiseModel::Zz { p_e },
            "extended" => NoiseModel::Extended { p_e },
            other => return Err(Error::InvalidNoise(format!("unknown model {other:?}"))),
        };
        m.validate(0)?;
        Ok(m)
    }

    /// Error branches of one CZ on `(i, j)`: probability and Z pattern on
    /// `(i, j)`. The no-error branch comes first.
    pub fn cz_branches(&self, i: usize, j: usize) -> Vec<(f64, bool, bool)> {
        match self {
            NoiseModel::Noiseless => vec![(1.0, false, false)],
            NoiseModel::Zz { p_e } => vec![(1.0 - p_e, false, false), (*p_e, true, true)],
            NoiseModel::ZzHet { rates } => {
                let p = rates[i][j];
                vec![(1.0 - p, false, false), (p, true, true)]
            }
            NoiseModel::Extended { p_e } => {
                let q = p_e / 4.0;
                vec![
                    (1.0 - 3.0 * q, false, false),
                    (q, true, false),
                    (q, false, true),
                    (q, true, true),
                ]
            }
        }
    }

    /// Samples the accumulated Z error pattern of one run of `c`.
    pub fn sample_errors<R: Rng + ?Sized>(&self, c: &PhaseCircuit, rng: &mut R) -> Option<BitVec> {
        if matches!(self, NoiseModel::Noiseless) {
            return None;
        }
        let mut e = BitVec::zeros(c.num_qubits());
        for (i, j) in c.cz_pairs() {
            let branches = self.cz_branches(i, j);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for &(w, zi, zj) in &branches[1..] {
                acc += w;
                if u < acc {
                    if zi {
                        e.flip(i);
                    }
                    if zj {
                        e.flip(j);
                    }
                    break;
                }
            }
        }
        Some(e)
    }

    /// Exact distribution of the accumulated error pattern of `c`, with
    /// equal patterns merged.
    pub fn error_distribution(&self, c: &PhaseCircuit) -> Vec<(BitVec, f64)> {
        let n = c.num_qubits();
        let mut dist: Vec<(BitVec, f64)> = vec![(BitVec::zeros(n), 1.0)];
        for (i, j) in c.cz_pairs() {
            let mut next: Vec<(BitVec, f64)> = Vec::new();
            for (e, w) in &dist {
                for &(bw, zi, zj) in &self.cz_branches(i, j) {
                    if bw == 0.0 {
                        continue;
                    }
                    let mut e2 = e.clone();
                    if zi {
                        e2.flip(i);
                    }
                    if zj {
                        e2.flip(j);
                    }
                    match next.iter_mut().find(|(f, _)| *f == e2) {
                        Some(slot) => slot.1 += w * bw,
                        None => next.push((e2, w * bw)),
                    }
                }
            }
            dist = next;
        }
        dist
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Noiseless => f.write_str("noiseless"),
            NoiseModel::Zz { p_e } => write!(f, "zz({p_e})"),
            NoiseModel::Extended { p_e } => write!(f, "extended({p_e})"),
            NoiseModel::ZzHet { .. } => f.write_str("zz_het"),
        }
    }
}

/// Pauli error rate of a CZ followed by a `ZZ(θ)` rotation with
/// `θ ~ N(0, σ²)`: `½(1 − e^{−σ²/2})`.
pub fn angle_to_pe(sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq >= 0.0) {
        return Err(Error::InvalidNoise(format!("angle variance {sigma_sq} must be non-negative")));
    }
    Ok(-0.5 * (-sigma_sq / 2.0).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotKind {
    Offdiag,
    Diag,
}

impl SnapshotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SnapshotKind::Offdiag => "offdiag",
            SnapshotKind::Diag => "diag",
        }
    }
}

/// One measurement record. Diagonal records carry no circuit: they are
/// plain computational-basis measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    circuit: Option<PhaseCircuit>,
    outcome: BitVec,
}

impl Snapshot {
    pub fn offdiag(circuit: PhaseCircuit, outcome: BitVec) -> Result<Self> {
        if circuit.num_qubits() != outcome.len() {
            return Err(Error::SizeMismatch {
                left: circuit.num_qubits(),
                right: outcome.len(),
            });
        }
        Ok(Self {
            circuit: Some(circuit),
            outcome,
        })
    }

    pub fn diag(outcome: BitVec) -> Self {
        Self { circuit: None, outcome }
    }

    pub fn kind(&self) -> SnapshotKind {
        if self.circuit.is_some() {
            SnapshotKind::Offdiag
        } else {
            SnapshotKind::Diag
        }
    }

    pub fn circuit(&self) -> Option<&PhaseCircuit> {
        self.circuit.as_ref()
    }

    pub fn outcome(&self) -> &BitVec {
        &self.outcome
    }

    pub fn num_qubits(&self) -> usize {
        self.outcome.len()
    }
}

/// Runs `c` under `nm` on `prep` and measures every qubit.
pub fn simulate_shot<R: Rng + ?Sized>(
    prep: &StabState,
    c: &PhaseCircuit,
    nm: &NoiseModel,
    rng: &mut R,
) -> Result<Snapshot> {
    if prep.num_qubits() != c.num_qubits() {
        return Err(Error::SizeMismatch {
            left: prep.num_qubits(),
            right: c.num_qubits(),
        });
    }
    let e = nm.sample_errors(c, rng);
    let mut s = prep.clone();
    c.evolve_state(&mut s, e.as_ref());
    let b = s.measure_all_in_place(rng);
    Snapshot::offdiag(c.clone(), b)
}

/// Bare computational-basis measurement of `prep`.
pub fn sample_diag_shot<R: Rng + ?Sized>(prep: &StabState, rng: &mut R) -> Snapshot {
    Snapshot::diag(prep.measure_all(rng))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one shot, keyed by master seed, grid point and
/// shot index.
pub fn shot_rng(seed: u64, grid: u64, kind: SnapshotKind, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(grid)));
    let domain = match kind {
        SnapshotKind::Offdiag => 0,
        SnapshotKind::Diag => 1 << 63,
    };
    rng.set_stream(domain | index);
    rng
}

/// Samples `count` off-diagonal shots in parallel; shot `k` uses its own
/// substream, so the output does not depend on thread scheduling.
pub fn sample_offdiag_shots(
    prep: &StabState,
    nm: &NoiseModel,
    count: usize,
    seed: u64,
    grid: u64,
) -> Result<Vec<Snapshot>> {
    let n = prep.num_qubits();
    nm.validate(n)?;
    (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = shot_rng(seed, grid, SnapshotKind::Offdiag, k);
            let c = sample_phase_circuit(n, &mut rng);
            simulate_shot(prep, &c, nm, &mut rng)
        })
        .collect()
}

pub fn sample_diag_shots(prep: &StabState, count: usize, seed: u64, grid: u64) -> Vec<Snapshot> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = shot_rng(seed, grid, SnapshotKind::Diag, k);
            sample_diag_shot(prep, &mut rng)
        })
        .collect()
}
