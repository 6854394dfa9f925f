//! Named oracle suites: each compares a fast path against a dense or
//! enumerated reference and reports the largest deviation.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitlin::BitVec;
use crate::ensemble::{angle_to_pe, sample_phase_circuit, NoiseModel, Snapshot};
use crate::error::{Error, Result};
use crate::oracle::channel::gaussian_channel_equivalence;
use crate::oracle::estimators::{
    brute_offdiag_estimator, brute_shared_group_size, dense_fidelity, exact_estimator_expectation,
};
use crate::oracle::moments::{
    hermitian_paulis, moment_exact, noisy_moment2_closed_form, noisy_moment2_exact, pauli_coefficient,
    pauli_decomposition_moment2, union_permutation_operator,
};
use crate::pauli::PauliClass;
use crate::prep::{random_stabilizer_circuit, PrepSpec};
use crate::shadow::{estimate_stab_offdiag_with_ng, StabObservable};
use crate::sigma::{sigma_exact, sigma_extended, Mode, SigmaEngine};
use crate::tableau::Circuit;

pub const SUITES: [&str; 6] = ["moments", "noisy-moments", "sigma", "unbiased", "postproc", "channel"];

/// One comparison. Upper checks pass when `deviation <= tolerance`, lower
/// checks when `deviation > tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub lower: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            lower: false,
        }
    }

    pub fn above(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            lower: true,
        }
    }

    pub fn passed(&self) -> bool {
        if self.lower {
            self.deviation > self.tolerance
        } else {
            self.deviation <= self.tolerance
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Largest deviation among the upper-bounded checks.
    pub fn max_deviation(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.lower)
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let (status, rel) = match (c.passed(), c.lower) {
                (true, false) => ("pass", "<="),
                (false, false) => ("FAIL", "<="),
                (true, true) => ("pass", ">"),
                (false, true) => ("FAIL", ">"),
            };
            writeln!(f, "  {status}  {}: {:.3e} {rel} {:.1e}", c.name, c.deviation, c.tolerance)?;
        }
        write!(
            f,
            "{} {}: {} checks, max deviation {:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.checks.len(),
            self.max_deviation()
        )
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str) -> Result<Report> {
    let checks = match name {
        "moments" => moments()?,
        "noisy-moments" => noisy_moments()?,
        "sigma" => sigma()?,
        "unbiased" => unbiased(&[0.05, 0.2])?,
        "postproc" => postproc(2..=6, 1000, 7)?,
        "channel" => channel(1_000_000, 5)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    Ok(Report {
        suite: name.to_string(),
        checks,
    })
}

/// Enumerated moments against `D⁻ᵐ ⋃_π V_n(π)`.
pub fn moments() -> Result<Vec<Check>> {
    let grid = [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (3, 3)];
    let mut out = Vec::new();
    for (n, m) in grid {
        let exact = moment_exact(n, m)?;
        let union = union_permutation_operator(n, m)?;
        let scaled = union.scale(((-((n * m) as f64)).exp2()).into());
        out.push(Check::at_most(format!("n={n} m={m}"), exact.max_abs_diff(&scaled), 1e-12));
    }
    Ok(out)
}

fn noise_grid() -> Vec<NoiseModel> {
    let mut out = Vec::new();
    for p_e in [0.0, 0.05, 0.2] {
        out.push(NoiseModel::Zz { p_e });
        out.push(NoiseModel::Extended { p_e });
    }
    out
}

fn model_label(m: &NoiseModel) -> String {
    format!("{} p_e={}", m.name(), m.p_e().unwrap_or(f64::NAN))
}

/// Noisy second moment: enumeration, closed form and Pauli decomposition.
pub fn noisy_moments() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for model in noise_grid() {
            let exact = noisy_moment2_exact(n, &model)?;
            let label = format!("n={n} {}", model_label(&model));
            let closed = noisy_moment2_closed_form(n, &model)?;
            out.push(Check::at_most(format!("{label} closed form"), exact.max_abs_diff(&closed), 1e-10));
            let pauli = pauli_decomposition_moment2(n, &model)?;
            out.push(Check::at_most(format!("{label} Pauli sum"), exact.max_abs_diff(&pauli), 1e-10));
        }
    }
    Ok(out)
}

/// Cached coefficients against those read off the enumerated noisy moment,
/// plus the special values over every class up to 64 qubits.
pub fn sigma() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for model in noise_grid() {
            let m = noisy_moment2_exact(n, &model)?;
            let engine = SigmaEngine::new(n, model.clone(), Mode::Robust)?;
            let mut dev: f64 = 0.0;
            for p in hermitian_paulis(n) {
                let extracted = pauli_coefficient(&m, &p);
                let expected = if p.is_identity() {
                    (n as f64).exp2()
                } else if p.is_ztype() {
                    0.0
                } else {
                    engine.sigma(&p)?
                };
                dev = dev.max((extracted.re - expected).abs()).max(extracted.im.abs());
            }
            out.push(Check::at_most(format!("n={n} {}", model_label(&model)), dev, 1e-10));
        }
    }
    let mut special: f64 = 0.0;
    for n in 1..=64usize {
        for n3 in 0..=n {
            for n2 in 0..=(n - n3) {
                let cls = PauliClass::new(n - n2 - n3, n2, n3);
                for f in [sigma_exact, sigma_extended] {
                    let (v0, v) = (f(cls, 0.0), f(cls, 0.1));
                    let dev = if n3 >= 1 {
                        (v0 - 1.0).abs()
                    } else if n2 >= 1 {
                        v0.abs().max(v.abs())
                    } else {
                        let d = (n as f64).exp2();
                        (v0 - d).abs().max((v - d).abs())
                    };
                    special = special.max(dev);
                }
            }
        }
    }
    out.push(Check::at_most("special values n<=64", special, 0.0));
    Ok(out)
}

/// States used by the unbiasedness suite at three qubits.
pub fn unbiased_states() -> Vec<(String, Circuit)> {
    let mut out = vec![
        ("ghz-star".to_string(), PrepSpec::GhzStar.circuit(3).expect("valid size")),
        ("plus-product".to_string(), PrepSpec::PlusProduct.circuit(3).expect("valid size")),
    ];
    for seed in 1..=5 {
        let spec = PrepSpec::RandomStabilizer { seed };
        out.push((spec.to_string(), spec.circuit(3).expect("valid size")));
    }
    out
}

/// Exact estimator expectations at three qubits. For each state `Ψ` the
/// robust estimate of `tr(Ψρ)` is checked for `ρ = Ψ` and for `ρ` the next
/// state in the list; the plain estimate for `ρ = Ψ` must be biased.
pub fn unbiased(rates: &[f64]) -> Result<Vec<Check>> {
    let states = unbiased_states();
    let mut out = Vec::new();
    for &p_e in rates {
        let model = NoiseModel::Zz { p_e };
        for (k, (name, psi)) in states.iter().enumerate() {
            let (other_name, other) = &states[(k + 1) % states.len()];
            for (rho_name, rho) in [(name, psi), (other_name, other)] {
                let truth = dense_fidelity(psi, rho);
                let robust = exact_estimator_expectation(rho, psi, &model, Mode::Robust)?;
                out.push(Check::at_most(
                    format!("p_e={p_e} psi={name} rho={rho_name} robust"),
                    (robust - truth).abs(),
                    1e-9,
                ));
            }
            let plain = exact_estimator_expectation(psi, psi, &model, Mode::Plain)?;
            out.push(Check::above(format!("p_e={p_e} psi={name} plain |bias|"), (plain - 1.0).abs(), 1e-3));
        }
    }
    Ok(out)
}

/// Random `(A, b, V)` instances: fast estimator against the full Pauli sum
/// and `2^{n_g}` against the brute-force shared group size.
pub fn postproc(ns: impl IntoIterator<Item = usize>, instances: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in ns {
        let sigma = SigmaEngine::new(n, NoiseModel::Zz { p_e: 0.05 }, Mode::Robust)?;
        let mut dev: f64 = 0.0;
        let mut group_mismatches = 0usize;
        for _ in 0..instances {
            let prep = random_stabilizer_circuit(&mut rng, n);
            let obs = StabObservable::from_circuit(&prep);
            let b = BitVec::from_u64(n, rng.random::<u64>() & ((1 << n) - 1));
            let s = Snapshot::offdiag(sample_phase_circuit(n, &mut rng), b)?;
            let (fast, ng) = estimate_stab_offdiag_with_ng(&s, &obs, &sigma)?;
            dev = dev.max((fast - brute_offdiag_estimator(&s, &prep, &sigma)?).abs());
            if 1usize << ng != brute_shared_group_size(&s, &prep)? {
                group_mismatches += 1;
            }
        }
        out.push(Check::at_most(format!("n={n} estimator ({instances} instances)"), dev, 1e-12));
        out.push(Check::at_most(format!("n={n} group size mismatches"), group_mismatches as f64, 0.0));
    }
    Ok(out)
}

/// Gaussian rotation against its Pauli-twirled channel.
pub fn channel(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for sigma_sq in [0.0, 0.04, 0.1] {
        let (analytic, mc) = gaussian_channel_equivalence(sigma_sq, samples, seed)?;
        out.push(Check::at_most(format!("sigma^2={sigma_sq} analytic"), analytic, 1e-12));
        if let Some(mc) = mc {
            out.push(Check::at_most(format!("sigma^2={sigma_sq} Monte Carlo ({samples})"), mc, 1e-3));
        }
    }
    out.push(Check::at_most(
        "angle_to_pe(0.04)",
        (angle_to_pe(0.04)? - 0.0099007).abs(),
        1e-7,
    ));
    Ok(out)
}

/// Writes `n1,n2,n3,sigma` for every non-Z-type class.
pub fn write_sigma_table<W: Write>(n: usize, model: &NoiseModel, mut out: W) -> Result<()> {
    let engine = SigmaEngine::new(n, model.clone(), Mode::Robust)?;
    writeln!(out, "n1,n2,n3,sigma")?;
    for (cls, v) in engine.class_table() {
        writeln!(out, "{},{},{},{v:e}", cls.n1, cls.n2, cls.n3)?;
    }
    Ok(())
}
