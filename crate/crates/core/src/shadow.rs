//! Phase-shadow estimators.
//!
//! A snapshot `(U, b)` stands for `Φ = U†|b⟩⟨b|U`, so every trace
//! `tr(Φ P)` below is `⟨b|U P U†|b⟩`. Observables split into an
//! off-diagonal part, estimated from circuit snapshots with the inverse
//! channel weights `1/σ_P`, and a diagonal part, estimated from bare
//! computational-basis snapshots.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitlin::{BitMatrix, BitVec};
use crate::ensemble::{
    sample_diag_shots, sample_offdiag_shots, NoiseModel, PhaseCircuit, Snapshot, SnapshotKind,
};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::sigma::{Mode, SigmaEngine};
use crate::tableau::{Circuit, CliffordTableau, StabState};

/// `⟨b|P|b⟩` for a Pauli: zero unless `P` is Z-type.
pub(crate) fn basis_expectation(p: &PauliString, b: &BitVec) -> Result<f64> {
    if !p.is_ztype() {
        return Ok(0.0);
    }
    let sign = p.hermitian_sign().ok_or(Error::NonHermitian)? as f64;
    Ok(if p.z().dot(b) { -sign } else { sign })
}

/// Pure stabilizer state `|ψ⟩ = G|0…0⟩` used as an observable `Ψ = |ψ⟩⟨ψ|`.
///
/// In terms of `V = G†` this is `Ψ = V†|0⟩⟨0|V`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabObservable {
    prep: Option<Circuit>,
    state: StabState,
}

impl StabObservable {
    pub fn from_circuit(prep: &Circuit) -> Self {
        Self {
            state: StabState::from_circuit(prep),
            prep: Some(prep.clone()),
        }
    }

    pub fn from_state(state: StabState) -> Self {
        Self { prep: None, state }
    }

    pub fn prep(&self) -> Option<&Circuit> {
        self.prep.as_ref()
    }

    pub fn state(&self) -> &StabState {
        &self.state
    }

    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    /// Tableau of `V = G†`.
    pub fn v_tableau(&self) -> CliffordTableau {
        self.state.tableau().inverse()
    }

    /// Rank of the Z-type part of the stabilizer group.
    pub fn z_subgroup_rank(&self) -> usize {
        let n = self.num_qubits();
        let xs = BitMatrix::from_rows(n, self.state.stabilizers().iter().map(|g| g.x().clone()).collect());
        n - xs.rank()
    }

    /// `‖Ψ_f‖₂² = 1 − Σ_b ⟨b|Ψ|b⟩²`, exactly `1 − 2^{k − n}` with `k` the
    /// Z-type subgroup rank.
    pub fn offdiag_norm_sq(&self) -> f64 {
        let n = self.num_qubits() as i32;
        1.0 - 2f64.powi(self.z_subgroup_rank() as i32 - n)
    }
}

/// Exponent vectors `a` whose stabilizer products `∏ g_i^{a_i}` of `Ψ` are
/// mapped to Z-type operators by the snapshot unitary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedGroupBasis {
    pub a_basis: Vec<BitVec>,
}

impl SharedGroupBasis {
    pub fn n_g(&self) -> usize {
        self.a_basis.len()
    }
}

/// Shared phaseless group of `U` and `Ψ = V†|0⟩⟨0|V`, from tableaux.
///
/// The Z-tableau of `U V†` has rows `[U V† Z_i V U†]`; a product `Z^a` lands
/// in the Z-type set exactly when `a` is in the left null space of its
/// X-part `C`.
pub fn shared_group_basis(u: &CliffordTableau, v: &CliffordTableau) -> Result<SharedGroupBasis> {
    let w = v.inverse().then(u)?;
    let (c, _) = w.z_tableau_phaseless();
    Ok(SharedGroupBasis {
        a_basis: c.left_null_basis(),
    })
}

/// The shared group for a phase-circuit snapshot: basis products of the
/// stabilizers of `Ψ` and their images under `U`.
struct SharedGroup {
    gens: Vec<PauliString>,
    images: Vec<PauliString>,
}

impl SharedGroup {
    fn new(c: &PhaseCircuit, obs: &StabObservable) -> Self {
        let n = obs.num_qubits();
        let stabs = obs.state.stabilizers();
        let images: Vec<PauliString> = stabs.iter().map(|g| c.conjugate(g)).collect();
        let cm = BitMatrix::from_rows(n, images.iter().map(|h| h.x().clone()).collect());
        let basis = cm.left_null_basis();
        let mut gens = Vec::with_capacity(basis.len());
        let mut imgs = Vec::with_capacity(basis.len());
        for a in &basis {
            let mut p = PauliString::identity(n);
            let mut h = PauliString::identity(n);
            for i in a.ones() {
                p.mul_assign_right(&stabs[i]);
                h.mul_assign_right(&images[i]);
            }
            gens.push(p);
            imgs.push(h);
        }
        Self { gens, images: imgs }
    }

    fn n_g(&self) -> usize {
        self.gens.len()
    }

    /// Visits every group element `P` with `tr(Ψ P) = +1` together with
    /// `U P U†`, in Gray-code order starting after the identity.
    fn for_each(&self, mut f: impl FnMut(&PauliString, &PauliString) -> Result<()>) -> Result<()> {
        let n = self.gens.first().map_or(0, |g| g.num_qubits());
        let mut p = PauliString::identity(n);
        let mut h = PauliString::identity(n);
        let count: u64 = 1 << self.n_g();
        for k in 1..count {
            let j = k.trailing_zeros() as usize;
            p.mul_assign_right(&self.gens[j]);
            h.mul_assign_right(&self.images[j]);
            f(&p, &h)?;
        }
        Ok(())
    }
}

fn require_offdiag(s: &Snapshot) -> Result<&PhaseCircuit> {
    s.circuit().ok_or(Error::WrongSnapshotKind { expected: "offdiag" })
}

/// `2ⁿ σ_q⁻¹ ⟨b|U q U†|b⟩` for a Hermitian, non-Z-type Pauli `q`.
pub fn estimate_pauli(s: &Snapshot, q: &PauliString, sigma: &SigmaEngine) -> Result<f64> {
    let c = require_offdiag(s)?;
    if q.num_qubits() != s.num_qubits() {
        return Err(Error::SizeMismatch {
            left: s.num_qubits(),
            right: q.num_qubits(),
        });
    }
    if !q.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let inv = sigma.inverse(q)?;
    let t = basis_expectation(&c.conjugate(q), s.outcome())?;
    Ok((s.num_qubits() as f64).exp2() * inv * t)
}

/// Off-diagonal estimator of `tr(Ψ ρ)` from one snapshot, with the number
/// of shared generators `n_g`.
pub fn estimate_stab_offdiag_with_ng(
    s: &Snapshot,
    obs: &StabObservable,
    sigma: &SigmaEngine,
) -> Result<(f64, usize)> {
    let c = require_offdiag(s)?;
    if obs.num_qubits() != s.num_qubits() {
        return Err(Error::SizeMismatch {
            left: s.num_qubits(),
            right: obs.num_qubits(),
        });
    }
    let group = SharedGroup::new(c, obs);
    let b = s.outcome();
    let mut total = 0.0;
    group.for_each(|p, h| {
        if p.is_ztype() {
            return Ok(());
        }
        total += sigma.inverse(p)? * basis_expectation(h, b)?;
        Ok(())
    })?;
    Ok((total, group.n_g()))
}

pub fn estimate_stab_offdiag(s: &Snapshot, obs: &StabObservable, sigma: &SigmaEngine) -> Result<f64> {
    estimate_stab_offdiag_with_ng(s, obs, sigma).map(|(v, _)| v)
}

/// `⟨b|Ψ|b⟩` from a diagonal snapshot.
pub fn estimate_stab_diag(s: &Snapshot, obs: &StabObservable) -> Result<f64> {
    if s.kind() != SnapshotKind::Diag {
        return Err(Error::WrongSnapshotKind { expected: "diag" });
    }
    Ok(StabState::basis(s.outcome()).overlap_sq(obs.state())?.value())
}

/// Quantity to estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Pauli(PauliString),
    /// Real linear combination of Hermitian Paulis.
    PauliSum(Vec<(f64, PauliString)>),
    Stabilizer(StabObservable),
}

impl Observable {
    pub fn num_qubits(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.num_qubits(),
            Observable::PauliSum(terms) => terms.first().map_or(0, |(_, p)| p.num_qubits()),
            Observable::Stabilizer(o) => o.num_qubits(),
        }
    }

    fn terms(&self) -> Vec<(f64, &PauliString)> {
        match self {
            Observable::Pauli(p) => vec![(1.0, p)],
            Observable::PauliSum(t) => t.iter().map(|(w, p)| (*w, p)).collect(),
            Observable::Stabilizer(_) => Vec::new(),
        }
    }

    pub fn needs_offdiag(&self) -> bool {
        match self {
            Observable::Stabilizer(_) => true,
            _ => self.terms().iter().any(|(_, p)| !p.is_ztype()),
        }
    }

    pub fn needs_diag(&self) -> bool {
        match self {
            Observable::Stabilizer(_) => true,
            _ => self.terms().iter().any(|(_, p)| p.is_ztype()),
        }
    }

    /// Single-snapshot estimate of the off-diagonal part, and `n_g` for
    /// stabilizer observables.
    pub fn offdiag_value(&self, s: &Snapshot, sigma: &SigmaEngine) -> Result<(f64, Option<usize>)> {
        match self {
            Observable::Stabilizer(o) => estimate_stab_offdiag_with_ng(s, o, sigma).map(|(v, g)| (v, Some(g))),
            _ => {
                let mut acc = 0.0;
                for (w, p) in self.terms() {
                    if !p.is_ztype() {
                        acc += w * estimate_pauli(s, p, sigma)?;
                    }
                }
                Ok((acc, None))
            }
        }
    }

    pub fn diag_value(&self, s: &Snapshot) -> Result<f64> {
        match self {
            Observable::Stabilizer(o) => estimate_stab_diag(s, o),
            _ => {
                if s.kind() != SnapshotKind::Diag {
                    return Err(Error::WrongSnapshotKind { expected: "diag" });
                }
                let mut acc = 0.0;
                for (w, p) in self.terms() {
                    if p.is_ztype() {
                        acc += w * basis_expectation(p, s.outcome())?;
                    }
                }
                Ok(acc)
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Pauli(p) => write!(f, "{p}"),
            Observable::PauliSum(terms) => {
                for (i, (w, p)) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{w}*{p}")?;
                }
                Ok(())
            }
            Observable::Stabilizer(o) => match o.prep() {
                Some(c) => write!(f, "stabilizer[{}]", c.gates().len()),
                None => f.write_str("stabilizer"),
            },
        }
    }
}

/// Provenance stored alongside snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    pub prep: String,
}

/// Off-diagonal and diagonal snapshots of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowDataset {
    meta: DatasetMeta,
    offdiag: Vec<Snapshot>,
    diag: Vec<Snapshot>,
}

impl ShadowDataset {
    pub fn new(meta: DatasetMeta, offdiag: Vec<Snapshot>, diag: Vec<Snapshot>) -> Result<Self> {
        for s in offdiag.iter().chain(&diag) {
            if s.num_qubits() != meta.n {
                return Err(Error::SizeMismatch {
                    left: meta.n,
                    right: s.num_qubits(),
                });
            }
        }
        if offdiag.iter().any(|s| s.kind() != SnapshotKind::Offdiag) {
            return Err(Error::WrongSnapshotKind { expected: "offdiag" });
        }
        if diag.iter().any(|s| s.kind() != SnapshotKind::Diag) {
            return Err(Error::WrongSnapshotKind { expected: "diag" });
        }
        Ok(Self { meta, offdiag, diag })
    }

    /// Splits a flat list of snapshots by kind.
    pub fn from_snapshots(meta: DatasetMeta, all: Vec<Snapshot>) -> Result<Self> {
        let (offdiag, diag) = all.into_iter().partition(|s| s.kind() == SnapshotKind::Offdiag);
        Self::new(meta, offdiag, diag)
    }

    /// Simulates `n_offdiag` circuit shots and `n_diag` bare shots of `prep`.
    pub fn sample(
        prep: &StabState,
        prep_name: &str,
        noise: &NoiseModel,
        n_offdiag: usize,
        n_diag: usize,
        seed: u64,
        grid: u64,
    ) -> Result<Self> {
        let offdiag = sample_offdiag_shots(prep, noise, n_offdiag, seed, grid)?;
        let diag = sample_diag_shots(prep, n_diag, seed, grid);
        let meta = DatasetMeta {
            n: prep.num_qubits(),
            noise: noise.clone(),
            seed,
            prep: prep_name.to_string(),
        };
        Self::new(meta, offdiag, diag)
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn offdiag(&self) -> &[Snapshot] {
        &self.offdiag
    }

    pub fn diag(&self) -> &[Snapshot] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.offdiag.len() + self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits `n_total` shots into off-diagonal and diagonal counts with
/// `ratio` off-diagonal shots per diagonal one.
pub fn split_shots(n_total: usize, ratio: f64) -> (usize, usize) {
    let n_f = ((n_total as f64) * ratio / (ratio + 1.0)).round() as usize;
    (n_f.min(n_total), n_total - n_f.min(n_total))
}

/// Sum with pairwise splitting, error growing as `log N`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Mean and unbiased sample variance (zero for fewer than two values).
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, pairwise_sum(&dev) / (n - 1.0))
}

/// Median of the means of consecutive groups of `group` values. A trailing
/// partial group is dropped unless it is the only one.
pub fn median_of_means(xs: &[f64], group: usize) -> f64 {
    let group = group.max(1);
    let mut means: Vec<f64> = xs.chunks_exact(group).map(|c| pairwise_sum(c) / c.len() as f64).collect();
    if means.is_empty() {
        return mean_and_variance(xs).0;
    }
    means.sort_by(f64::total_cmp);
    let k = means.len();
    if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub mode: Mode,
    /// Group size for a median-of-means off-diagonal estimate.
    pub median_of_means: Option<usize>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Robust,
            median_of_means: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub observable: String,
    pub mode: Mode,
    pub value: f64,
    pub stderr: f64,
    pub n_offdiag: usize,
    pub n_diag: usize,
    pub model: NoiseModel,
    pub offdiag: f64,
    pub diag: f64,
    pub offdiag_variance: f64,
    pub diag_variance: f64,
    /// Mean of `2^{n_g}` over off-diagonal snapshots, for stabilizer
    /// observables.
    pub ng_mean: Option<f64>,
}

/// Combines per-snapshot estimates into `mean(offdiag) + mean(diag)`.
/// Returns `(value, stderr, offdiag part, diag part)`.
pub fn combine(offdiag: &[f64], diag: &[f64], group: Option<usize>) -> (f64, f64, f64, f64) {
    let (mf, vf) = mean_and_variance(offdiag);
    let (md, vd) = mean_and_variance(diag);
    let mf = match group {
        Some(g) if !offdiag.is_empty() => median_of_means(offdiag, g),
        _ => mf,
    };
    let mut var = 0.0;
    if !offdiag.is_empty() {
        var += vf / offdiag.len() as f64;
    }
    if !diag.is_empty() {
        var += vd / diag.len() as f64;
    }
    (mf + md, var.sqrt(), mf, md)
}

/// Per-snapshot off-diagonal values (parallel, input order preserved) and
/// the `n_g` of each when the observable is a stabilizer state.
pub fn offdiag_values(
    snaps: &[Snapshot],
    obs: &Observable,
    sigma: &SigmaEngine,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let out: Vec<(f64, Option<usize>)> = snaps
        .par_iter()
        .map(|s| obs.offdiag_value(s, sigma))
        .collect::<Result<_>>()?;
    let ng = out.iter().filter_map(|(_, g)| *g).collect();
    Ok((out.into_iter().map(|(v, _)| v).collect(), ng))
}

pub fn diag_values(snaps: &[Snapshot], obs: &Observable) -> Result<Vec<f64>> {
    snaps.par_iter().map(|s| obs.diag_value(s)).collect()
}

/// Estimates `tr(O ρ)` from a dataset.
pub fn aggregate(ds: &ShadowDataset, obs: &Observable, opts: &EstimateOptions) -> Result<Estimate> {
    let n = ds.meta.n;
    if obs.num_qubits() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: obs.num_qubits(),
        });
    }
    if obs.needs_offdiag() && ds.offdiag.is_empty() {
        return Err(Error::EmptyPart("offdiag"));
    }
    if obs.needs_diag() && ds.diag.is_empty() {
        return Err(Error::EmptyPart("diag"));
    }
    let sigma = SigmaEngine::new(n, ds.meta.noise.clone(), opts.mode)?;
    let (fv, ngs) = if obs.needs_offdiag() {
        offdiag_values(&ds.offdiag, obs, &sigma)?
    } else {
        (Vec::new(), Vec::new())
    };
    let dv = if obs.needs_diag() {
        diag_values(&ds.diag, obs)?
    } else {
        Vec::new()
    };
    let (value, stderr, mf, md) = combine(&fv, &dv, opts.median_of_means);
    let ng_mean = (!ngs.is_empty()).then(|| {
        let pows: Vec<f64> = ngs.iter().map(|&g| (g as f64).exp2()).collect();
        pairwise_sum(&pows) / pows.len() as f64
    });
    Ok(Estimate {
        observable: obs.to_string(),
        mode: opts.mode,
        value,
        stderr,
        n_offdiag: fv.len(),
        n_diag: dv.len(),
        model: ds.meta.noise.clone(),
        offdiag: mf,
        diag: md,
        offdiag_variance: mean_and_variance(&fv).1,
        diag_variance: mean_and_variance(&dv).1,
        ng_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_phase_circuit;
    use crate::prep::random_stabilizer_circuit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plain(n: usize) -> SigmaEngine {
        SigmaEngine::new(n, NoiseModel::Noiseless, Mode::Plain).unwrap()
    }

    fn obs(n: usize, text: &str) -> StabObservable {
        StabObservable::from_circuit(&Circuit::parse(n, text).unwrap())
    }

    fn snap(c: PhaseCircuit, b: u64) -> Snapshot {
        let n = c.num_qubits();
        Snapshot::offdiag(c, BitVec::from_u64(n, b)).unwrap()
    }

    #[test]
    fn single_qubit_pauli_estimate() {
        let s = snap(PhaseCircuit::zero(1), 0);
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(estimate_pauli(&s, &x, &plain(1)).unwrap(), 2.0);
        // U = H maps Y to -Y, which has no diagonal part.
        assert_eq!(estimate_pauli(&s, &"Y".parse().unwrap(), &plain(1)).unwrap(), 0.0);
        assert!(matches!(estimate_pauli(&s, &"Z".parse().unwrap(), &plain(1)), Err(Error::ZType)));
        assert!(matches!(
            estimate_pauli(&Snapshot::diag(BitVec::zeros(1)), &x, &plain(1)),
            Err(Error::WrongSnapshotKind { .. })
        ));
    }

    #[test]
    fn single_qubit_stabilizer_examples() {
        let plus = obs(1, "H 0");
        assert_eq!(estimate_stab_offdiag(&snap(PhaseCircuit::zero(1), 0), &plus, &plain(1)).unwrap(), 1.0);
        // U = H S maps X to ±Y, so nothing is shared with |+⟩.
        let with_s = PhaseCircuit::from_matrix(&BitMatrix::from_fn(1, 1, |_, _| true)).unwrap();
        let (v, ng) = estimate_stab_offdiag_with_ng(&snap(with_s, 0), &plus, &plain(1)).unwrap();
        assert_eq!((v, ng), (0.0, 0));
    }

    #[test]
    fn shared_group_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            let c = sample_phase_circuit(n, &mut rng);
            let u = c.to_tableau();
            // Ψ = U†|0⟩⟨0|U shares every Z^a.
            let same = StabObservable::from_state(StabState::from_tableau(u.inverse()));
            assert_eq!(shared_group_basis(&u, &same.v_tableau()).unwrap().n_g(), n);
            let zero = CliffordTableau::identity(n);
            let h = PhaseCircuit::zero(n).to_tableau();
            assert_eq!(shared_group_basis(&h, &zero).unwrap().n_g(), 0);
        }
    }

    /// Every element of the phaseless stabilizer group of a state.
    fn phaseless_group(stabs: &[PauliString]) -> Vec<(BitVec, BitVec)> {
        let n = stabs.len();
        (0..1u64 << n)
            .map(|m| {
                let mut p = PauliString::identity(n);
                for (i, g) in stabs.iter().enumerate() {
                    if m >> i & 1 == 1 {
                        p.mul_assign_right(g);
                    }
                }
                (p.x().clone(), p.z().clone())
            })
            .collect()
    }

    #[test]
    fn shared_group_size_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=5 {
            for _ in 0..40 {
                let c = sample_phase_circuit(n, &mut rng);
                let o = StabObservable::from_circuit(&random_stabilizer_circuit(&mut rng, n));
                let u = c.to_tableau();
                let fast = shared_group_basis(&u, &o.v_tableau()).unwrap();
                let fast_ng = SharedGroup::new(&c, &o).n_g();
                assert_eq!(fast.n_g(), fast_ng);
                // [S_U] is the group fixing U†|0⟩.
                let su = StabState::from_tableau(u.inverse());
                let g1 = phaseless_group(su.stabilizers());
                let g2 = phaseless_group(o.state().stabilizers());
                let shared = g1.iter().filter(|p| g2.contains(p)).count();
                assert_eq!(shared, 1 << fast_ng);
            }
        }
    }

    #[test]
    fn shared_elements_agree_through_both_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            for _ in 0..30 {
                let c = sample_phase_circuit(n, &mut rng);
                let o = StabObservable::from_circuit(&random_stabilizer_circuit(&mut rng, n));
                let uinv = c.to_tableau().inverse();
                let group = SharedGroup::new(&c, &o);
                group
                    .for_each(|p, h| {
                        assert!(h.is_ztype());
                        assert_eq!(o.state().pauli_expectation(p).unwrap(), 1);
                        // U† (U P U†) U = P, phase included.
                        assert_eq!(&uinv.conjugate(h).unwrap(), p);
                        Ok(())
                    })
                    .unwrap();
            }
        }
    }

    #[test]
    fn noiseless_identity_cross_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=7 {
            for _ in 0..40 {
                let c = sample_phase_circuit(n, &mut rng);
                let o = StabObservable::from_circuit(&random_stabilizer_circuit(&mut rng, n));
                let b = BitVec::from_u64(n, rng.random());
                let s = Snapshot::offdiag(c.clone(), b.clone()).unwrap();
                let f = estimate_stab_offdiag(&s, &o, &plain(n)).unwrap();
                // 2ⁿ ⟨b|U Ψ U†|b⟩ minus the Z-type shared terms.
                let evolved = StabState::from_tableau(o.state().tableau().then(&c.to_tableau()).unwrap());
                let full = (n as f64).exp2() * StabState::basis(&b).overlap_sq(&evolved).unwrap().value();
                let mut ztype = 1.0; // identity
                SharedGroup::new(&c, &o)
                    .for_each(|p, h| {
                        if p.is_ztype() {
                            ztype += basis_expectation(h, &b).unwrap();
                        }
                        Ok(())
                    })
                    .unwrap();
                assert!((f - (full - ztype)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diag_examples() {
        let n = 4;
        let zero = StabObservable::from_state(StabState::zero_state(n));
        assert_eq!(estimate_stab_diag(&Snapshot::diag(BitVec::zeros(n)), &zero).unwrap(), 1.0);
        let ghz = obs(n, "H 0\nCX 0 1\nCX 0 2\nCX 0 3");
        assert_eq!(estimate_stab_diag(&Snapshot::diag(BitVec::zeros(n)), &ghz).unwrap(), 0.5);
        let plus = obs(n, "H 0\nH 1\nH 2\nH 3");
        for b in 0..16 {
            assert_eq!(estimate_stab_diag(&Snapshot::diag(BitVec::from_u64(n, b)), &plus).unwrap(), 1.0 / 16.0);
        }
    }

    #[test]
    fn offdiag_norm() {
        assert_eq!(obs(3, "H 0\nH 1\nH 2").offdiag_norm_sq(), 1.0 - 1.0 / 8.0);
        assert_eq!(StabObservable::from_state(StabState::zero_state(3)).offdiag_norm_sq(), 0.0);
        assert_eq!(obs(3, "H 0\nCX 0 1\nCX 0 2").offdiag_norm_sq(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            let o = StabObservable::from_circuit(&random_stabilizer_circuit(&mut rng, n));
            let direct: f64 = (0..1u64 << n)
                .map(|b| estimate_stab_diag(&Snapshot::diag(BitVec::from_u64(n, b)), &o).unwrap().powi(2))
                .sum();
            assert!((o.offdiag_norm_sq() - (1.0 - direct)).abs() < 1e-14);
        }
    }

    #[test]
    fn arithmetic_contract() {
        let (value, _, mf, md) = combine(&[2.0, 0.0, -2.0, 0.0], &[1.0, 0.0], None);
        assert_eq!((value, mf, md), (0.5, 0.0, 0.5));
        assert_eq!(median_of_means(&[1.0, 3.0, 100.0, 100.0, 2.0, 2.0], 2), 2.0);
        assert_eq!(split_shots(100, 3.0), (75, 25));
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        assert!((pairwise_sum(&xs) - 49950.0).abs() < 1e-9);
        let (m, v) = mean_and_variance(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn aggregate_requires_both_parts() {
        let prep = StabState::from_circuit(&Circuit::parse(2, "H 0\nCZ 0 1\nH 1").unwrap());
        let ds = ShadowDataset::sample(&prep, "t", &NoiseModel::Noiseless, 50, 0, 1, 0).unwrap();
        let o = Observable::Stabilizer(StabObservable::from_state(prep.clone()));
        assert!(matches!(aggregate(&ds, &o, &EstimateOptions::default()), Err(Error::EmptyPart("diag"))));
        let x = Observable::Pauli("XX".parse().unwrap());
        assert!(aggregate(&ds, &x, &EstimateOptions::default()).is_ok());
    }

    #[test]
    fn noiseless_fidelity_with_itself() {
        let n = 6;
        let prep_c = Circuit::parse(n, "H 0\nH 1\nH 2\nH 3\nH 4\nH 5\nCZ 0 1\nCZ 0 2\nCZ 0 3\nCZ 0 4\nCZ 0 5").unwrap();
        let prep = StabState::from_circuit(&prep_c);
        let ds = ShadowDataset::sample(&prep, "ghz-star", &NoiseModel::Noiseless, 6000, 2000, 9, 0).unwrap();
        let o = Observable::Stabilizer(StabObservable::from_circuit(&prep_c));
        let est = aggregate(&ds, &o, &EstimateOptions::default()).unwrap();
        assert!((est.value - 1.0).abs() < 3.0 * est.stderr, "{est:?}");
        let mom = aggregate(&ds, &o, &EstimateOptions { mode: Mode::Robust, median_of_means: Some(100) }).unwrap();
        assert!((mom.value - 1.0).abs() < 5.0 * est.stderr);
        let json = serde_json::to_value(&est).unwrap();
        for key in ["observable", "mode", "value", "stderr", "n_offdiag", "n_diag", "model"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn pauli_sum_estimate() {
        let n = 3;
        let prep = StabState::from_circuit(&Circuit::parse(n, "H 0\nCX 0 1\nH 2").unwrap());
        let ds = ShadowDataset::sample(&prep, "t", &NoiseModel::Noiseless, 20_000, 5000, 3, 0).unwrap();
        let terms = vec![(0.5, "XXI".parse().unwrap()), (0.25, "ZZI".parse().unwrap()), (1.0, "IIX".parse().unwrap())];
        let est = aggregate(&ds, &Observable::PauliSum(terms), &EstimateOptions::default()).unwrap();
        assert!((est.value - 1.75).abs() < 4.0 * est.stderr, "{est:?}");
    }
}
