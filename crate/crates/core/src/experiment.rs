//! Experiment grids, result rows and the post-processing benchmark.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{shot_rng, NoiseModel, SnapshotKind};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::prep::PrepSpec;
use crate::shadow::{
    aggregate, mean_and_variance, pairwise_sum, split_shots, EstimateOptions, Observable, ShadowDataset,
    StabObservable,
};
use crate::sigma::{Mode, SigmaEngine};
use crate::tableau::{GateOp, StabState};

/// First line of every results CSV.
pub const CSV_SCHEMA: &str = "# phase-shadow results v1";

pub const CSV_COLUMNS: [&str; 11] = [
    "experiment", "n", "p_e", "mode", "N", "estimate", "stderr", "variance", "ng_mean", "time_ms", "seed",
];

fn default_noise() -> String {
    "zz".into()
}

fn default_split() -> f64 {
    3.0
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Robust]
}

/// A grid of `(n, p_e)` points. Every point gets its own dataset of
/// `shots` snapshots, estimated once per mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub prep: PrepSpec,
    /// Fidelity target; the prepared state when absent.
    #[serde(default)]
    pub observable: Option<PrepSpec>,
    pub n: Vec<usize>,
    #[serde(default = "default_noise")]
    pub noise: String,
    pub p_e: Vec<f64>,
    pub shots: usize,
    #[serde(default = "default_split")]
    pub split_ratio: f64,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub median_of_means: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.name.is_empty() || self.name.contains([',', '\n']) {
            return bad(format!("experiment name {:?} must be nonempty without commas", self.name));
        }
        if self.n.is_empty() || self.p_e.is_empty() || self.modes.is_empty() {
            return bad("n, p_e and modes must be nonempty".into());
        }
        if self.n.contains(&0) {
            return bad("qubit counts must be positive".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if !(self.split_ratio.is_finite() && self.split_ratio >= 0.0) {
            return bad(format!("split ratio {} must be finite and nonnegative", self.split_ratio));
        }
        for &p in &self.p_e {
            NoiseModel::uniform(&self.noise, p)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_EXPERIMENTS: [&str; 4] = ["variance-vs-n", "bias-vs-pe", "variance-slope", "sanity"];

/// Predefined grids. Desk scale by default; `large` selects the
/// larger qubit counts.
pub fn builtin(name: &str, large: bool) -> Result<ExperimentConfig> {
    let base = |n: Vec<usize>, noise: &str, p_e: Vec<f64>, modes: Vec<Mode>| ExperimentConfig {
        name: name.to_string(),
        prep: PrepSpec::GhzStar,
        observable: None,
        n,
        noise: noise.into(),
        p_e,
        shots: 50_000,
        split_ratio: 3.0,
        modes,
        seed: 2024,
        output: None,
        median_of_means: None,
    };
    let pe_grid = |step: f64| (0..=5).map(|k| k as f64 * step).collect::<Vec<_>>();
    Ok(match name {
        "variance-vs-n" => {
            let n = if large { vec![4, 8, 12, 16, 20, 30, 40, 50] } else { vec![4, 8, 12] };
            base(n, "noiseless", vec![0.0], vec![Mode::Robust])
        }
        "bias-vs-pe" => {
            let n = if large { vec![25, 35, 45] } else { vec![10] };
            base(n, "zz", pe_grid(0.002), vec![Mode::Plain, Mode::Robust])
        }
        "variance-slope" => {
            let n = if large { vec![20] } else { vec![16] };
            base(n, "zz", pe_grid(0.002), vec![Mode::Robust])
        }
        "sanity" => ExperimentConfig {
            prep: PrepSpec::Cluster1d,
            shots: 4000,
            ..base(vec![6], "noiseless", vec![0.0], vec![Mode::Robust])
        },
        other => return Err(Error::Config(format!("unknown experiment {other:?}"))),
    })
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub p_e: f64,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub shots: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// Single-shot variance of the off-diagonal estimator.
    pub variance: f64,
    pub ng_mean: Option<f64>,
    pub time_ms: f64,
    pub seed: u64,
}

/// Grid key of a point; independent of the other grid entries.
pub fn grid_key(n: usize, p_e: f64) -> u64 {
    ((n as u64) << 32) ^ p_e.to_bits()
}

fn observable_for(cfg: &ExperimentConfig, n: usize, prep: &StabState) -> Result<Observable> {
    let state = match &cfg.observable {
        Some(spec) => StabState::from_circuit(&spec.circuit(n)?),
        None => prep.clone(),
    };
    Ok(Observable::Stabilizer(StabObservable::from_state(state)))
}

/// Runs every grid point of `cfg` in order `n`, then `p_e`, then mode.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let prep = StabState::from_circuit(&cfg.prep.circuit(n)?);
        let obs = observable_for(cfg, n, &prep)?;
        let (n_f, n_d) = split_shots(cfg.shots, cfg.split_ratio);
        for &p_e in &cfg.p_e {
            let noise = NoiseModel::uniform(&cfg.noise, p_e)?;
            let prep_name = cfg.prep.to_string();
            let ds = ShadowDataset::sample(&prep, &prep_name, &noise, n_f, n_d, cfg.seed, grid_key(n, p_e))?;
            for &mode in &cfg.modes {
                let opts = EstimateOptions {
                    mode,
                    median_of_means: cfg.median_of_means,
                };
                let start = Instant::now();
                let est = aggregate(&ds, &obs, &opts)?;
                let time_ms = start.elapsed().as_secs_f64() * 1e3;
                rows.push(ResultRow {
                    experiment: cfg.name.clone(),
                    n,
                    p_e,
                    mode,
                    shots: cfg.shots,
                    estimate: est.value,
                    stderr: est.stderr,
                    variance: est.offdiag_variance,
                    ng_mean: est.ng_mean,
                    time_ms,
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_SCHEMA}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: BufRead>(mut input: R) -> Result<Vec<ResultRow>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim_end() != CSV_SCHEMA {
        return Err(Error::Config(format!("results file must start with {CSV_SCHEMA:?}")));
    }
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config("unexpected results columns".into()));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Least-squares slope of `ln variance` against `p_e` over rows with
/// positive variance, or `None` with fewer than two distinct rates.
pub fn log_variance_slope(rows: &[ResultRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.variance > 0.0)
        .map(|r| (r.p_e, r.variance.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times sequential post-processing of a GHZ* fidelity estimate. Each
/// entry of `ns` gets `snapshots` shots at `p_e`, split 3 : 1; sampling is
/// not timed. `time_ms` is the total post-processing time, so the mean
/// per-snapshot cost is `time_ms / N`.
pub fn bench_postprocessing(ns: &[usize], snapshots: usize, p_e: f64, seed: u64) -> Result<Vec<ResultRow>> {
    if snapshots == 0 {
        return Err(Error::Config("benchmark needs at least one snapshot".into()));
    }
    let noise = NoiseModel::uniform("zz", p_e)?;
    let mut rows = Vec::new();
    for &n in ns {
        let prep = StabState::from_circuit(&PrepSpec::GhzStar.circuit(n)?);
        let obs = Observable::Stabilizer(StabObservable::from_state(prep.clone()));
        let (n_f, n_d) = split_shots(snapshots, 3.0);
        let ds = ShadowDataset::sample(&prep, "ghz-star", &noise, n_f, n_d, seed, grid_key(n, p_e))?;
        let sigma = SigmaEngine::new(n, noise.clone(), Mode::Robust)?;

        // Warm caches and the allocator before timing.
        for s in ds.offdiag().iter().take(64) {
            obs.offdiag_value(s, &sigma)?;
        }
        let start = Instant::now();
        let mut fv = Vec::with_capacity(n_f);
        let mut pows = Vec::with_capacity(n_f);
        for s in ds.offdiag() {
            let (v, g) = obs.offdiag_value(s, &sigma)?;
            fv.push(v);
            pows.push((g.unwrap_or(0) as f64).exp2());
        }
        let mut dv = Vec::with_capacity(n_d);
        for s in ds.diag() {
            dv.push(obs.diag_value(s)?);
        }
        let time_ms = start.elapsed().as_secs_f64() * 1e3;

        let (value, stderr, _, _) = crate::shadow::combine(&fv, &dv, None);
        rows.push(ResultRow {
            experiment: "bench-postproc".into(),
            n,
            p_e,
            mode: Mode::Robust,
            shots: snapshots,
            estimate: value,
            stderr,
            variance: mean_and_variance(&fv).1,
            ng_mean: Some(pairwise_sum(&pows) / pows.len().max(1) as f64),
            time_ms,
            seed,
        });
    }
    Ok(rows)
}

/// Largest qubit count for the local-Pauli baseline, which sums over all
/// `2ⁿ` stabilizer group elements per shot.
pub const MAX_BASELINE_QUBITS: usize = 10;

/// Fidelity with `prep` from local random-basis measurements: each qubit is
/// measured in X, Y or Z uniformly and every stabilizer group element `S`
/// contributes `sign(S) ∏_{i ∈ supp S} 3 δ(basis_i, S_i) (−1)^{b_i}`, scaled
/// by `2⁻ⁿ`.
pub fn pauli_baseline_variance(prep: &PrepSpec, n: usize, shots: usize, seed: u64) -> Result<ResultRow> {
    if n > MAX_BASELINE_QUBITS {
        return Err(Error::CapExceeded(format!("{n} qubits for the local-Pauli baseline")));
    }
    let state = StabState::from_circuit(&prep.circuit(n)?);
    let group = stabilizer_group(&state)?;
    let start = Instant::now();
    let values: Vec<f64> = (0..shots as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = shot_rng(seed, u64::MAX, SnapshotKind::Offdiag, k);
            let bases: Vec<u8> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0..3u8)).collect();
            let mut s = state.clone();
            for (q, &basis) in bases.iter().enumerate() {
                if basis == 1 {
                    s.apply_gate(GateOp::Sdg(q))?;
                }
                if basis <= 1 {
                    s.apply_gate(GateOp::H(q))?;
                }
            }
            let b = s.measure_all_in_place(&mut rng);
            let mut acc = 0.0;
            for (sign, sites) in &group {
                let mut term = *sign;
                for &(q, basis) in sites {
                    if bases[q] != basis {
                        term = 0.0;
                        break;
                    }
                    term *= if b.get(q) { -3.0 } else { 3.0 };
                }
                acc += term;
            }
            Ok(acc / (n as f64).exp2())
        })
        .collect::<Result<_>>()?;
    let (mean, var) = mean_and_variance(&values);
    Ok(ResultRow {
        experiment: "pauli-baseline".into(),
        n,
        p_e: 0.0,
        mode: Mode::Plain,
        shots,
        estimate: mean,
        stderr: (var / shots.max(1) as f64).sqrt(),
        variance: var,
        ng_mean: None,
        time_ms: start.elapsed().as_secs_f64() * 1e3,
        seed,
    })
}

/// Sign and non-identity sites of a group element, each site with the
/// measurement basis it needs (0 = X, 1 = Y, 2 = Z).
type GroupElement = (f64, Vec<(usize, u8)>);

fn stabilizer_group(state: &StabState) -> Result<Vec<GroupElement>> {
    let n = state.num_qubits();
    let gens = state.stabilizers();
    let mut current = PauliString::identity(n);
    let mut out = Vec::with_capacity(1 << n);
    for k in 0u64..(1u64 << n) {
        if k > 0 {
            let flip = k.trailing_zeros() as usize;
            current = current.multiply(&gens[flip])?;
        }
        let sign = current.hermitian_sign().ok_or(Error::NonHermitian)?;
        let sites = (0..n)
            .filter_map(|q| match (current.x().get(q), current.z().get(q)) {
                (false, false) => None,
                (true, false) => Some((q, 0)),
                (true, true) => Some((q, 1)),
                (false, true) => Some((q, 2)),
            })
            .collect();
        out.push((sign as f64, sites));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str) -> ExperimentConfig {
        ExperimentConfig {
            name: name.into(),
            prep: PrepSpec::GhzStar,
            observable: None,
            n: vec![3, 5],
            noise: "zz".into(),
            p_e: vec![0.0, 0.05],
            shots: 400,
            split_ratio: 3.0,
            modes: vec![Mode::Plain, Mode::Robust],
            seed: 11,
            output: None,
            median_of_means: None,
        }
    }

    fn deterministic(rows: &[ResultRow]) -> Vec<ResultRow> {
        rows.iter().map(|r| ResultRow { time_ms: 0.0, ..r.clone() }).collect()
    }

    #[test]
    fn one_row_per_grid_point() {
        let rows = run_experiment(&small("t")).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].n, rows[0].p_e, rows[0].mode), (3, 0.0, Mode::Plain));
        assert_eq!((rows[7].n, rows[7].p_e, rows[7].mode), (5, 0.05, Mode::Robust));
        // Plain and robust coincide without noise.
        assert_eq!(rows[0].estimate, rows[1].estimate);
    }

    #[test]
    fn rows_are_reproducible_and_grid_independent() {
        let full = deterministic(&run_experiment(&small("t")).unwrap());
        assert_eq!(full, deterministic(&run_experiment(&small("t")).unwrap()));
        let mut cfg = small("t");
        cfg.n = vec![5];
        cfg.p_e = vec![0.05];
        let one = deterministic(&run_experiment(&cfg).unwrap());
        assert_eq!(one[..], full[6..]);
    }

    #[test]
    fn csv_round_trip() {
        let rows = run_experiment(&small("t")).unwrap();
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_SCHEMA));
        assert_eq!(lines.next(), Some("experiment,n,p_e,mode,N,estimate,stderr,variance,ng_mean,time_ms,seed"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small("t");
        cfg.p_e = vec![1.5];
        assert!(cfg.validate().is_err());
        let mut cfg = small("t");
        cfg.shots = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small("a,b");
        cfg.n = vec![2];
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"name":"x","prep":{"kind":"ghz-star"},"n":[3],"p_e":[0.0],"shots":10,"bogus":1}"#).is_err());
        let parsed = ExperimentConfig::from_json(
            r#"{"name":"x","prep":{"kind":"random-stabilizer","seed":3},"n":[3],"p_e":[0.0],"shots":10}"#,
        )
        .unwrap();
        assert_eq!(parsed.split_ratio, 3.0);
        assert_eq!(parsed.modes, vec![Mode::Robust]);
        for name in BUILTIN_EXPERIMENTS {
            builtin(name, false).unwrap().validate().unwrap();
            builtin(name, true).unwrap().validate().unwrap();
        }
        assert!(builtin("nonexistent", false).is_err());
    }

    #[test]
    fn noiseless_sanity_run() {
        let mut cfg = builtin("sanity", false).unwrap();
        cfg.prep = PrepSpec::RandomStabilizer { seed: 5 };
        let row = &run_experiment(&cfg).unwrap()[0];
        assert!((row.estimate - 1.0).abs() < 3.0 * row.stderr, "{row:?}");
    }

    #[test]
    fn baseline_estimates_fidelity() {
        let row = pauli_baseline_variance(&PrepSpec::GhzStar, 3, 4000, 1).unwrap();
        assert!((row.estimate - 1.0).abs() < 4.0 * row.stderr, "{row:?}");
        let row = pauli_baseline_variance(&PrepSpec::RandomStabilizer { seed: 9 }, 4, 4000, 2).unwrap();
        assert!((row.estimate - 1.0).abs() < 4.0 * row.stderr, "{row:?}");
        assert!(pauli_baseline_variance(&PrepSpec::GhzStar, 11, 1, 0).is_err());
    }

    #[test]
    fn slope_of_exact_exponential() {
        let rows: Vec<ResultRow> = [0.0, 0.01, 0.02]
            .iter()
            .map(|&p_e| ResultRow {
                experiment: "s".into(),
                n: 4,
                p_e,
                mode: Mode::Robust,
                shots: 1,
                estimate: 1.0,
                stderr: 0.0,
                variance: (50.0 * p_e).exp() * 2.0,
                ng_mean: None,
                time_ms: 0.0,
                seed: 0,
            })
            .collect();
        assert!((log_variance_slope(&rows).unwrap() - 50.0).abs() < 1e-9);
        assert_eq!(log_variance_slope(&rows[..1]), None);
    }

    #[test]
    fn bench_rows() {
        let rows = bench_postprocessing(&[4, 8], 200, 0.01, 3).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.time_ms > 0.0 && r.ng_mean.unwrap() >= 1.0));
    }
}
