//! Gaussian `ZZ` over-rotation versus its Pauli-twirled equivalent.
//!
//! Both channels are compared through their χ (process) matrices in the
//! two-qubit Pauli basis, `E(ρ) = Σ_ab χ_ab P_a ρ P_b`.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dense::{gate_unitary, pauli_matrix, DenseOperator};
use crate::ensemble::angle_to_pe;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::{Circuit, GateOp};

const BASIS: usize = 16;

fn basis() -> Vec<DenseOperator> {
    ["II", "XI", "YI", "ZI", "IX", "XX", "YX", "ZX", "IY", "XY", "YY", "ZY", "IZ", "XZ", "YZ", "ZZ"]
        .iter()
        .map(|s| pauli_matrix(&s.parse::<PauliString>().expect("valid literal")))
        .collect()
}

/// Pauli-basis coefficients `k_a = tr(P_a K) / 4` of an operator.
fn coefficients(k: &DenseOperator, basis: &[DenseOperator]) -> Vec<C64> {
    basis.iter().map(|p| p.trace_product(k) / 4.0).collect()
}

/// χ matrix of a Kraus set with weights.
fn chi(kraus: &[(f64, DenseOperator)]) -> DenseOperator {
    let b = basis();
    let mut out = DenseOperator::zeros(BASIS);
    for (w, k) in kraus {
        let c = coefficients(k, &b);
        out.add_scaled(&DenseOperator::outer(&c, &c), C64::new(*w, 0.0));
    }
    out
}

fn cz() -> DenseOperator {
    gate_unitary(&Circuit::new(2, vec![GateOp::Cz(0, 1)]).expect("valid gate"))
}

/// χ of `CZ` followed by the Pauli channel `(1 − p)ρ + p ZZ ρ ZZ`.
pub fn pauli_channel_chi(p_e: f64) -> DenseOperator {
    let cz = cz();
    let zz = pauli_matrix(&"ZZ".parse().expect("valid literal"));
    chi(&[(1.0 - p_e, cz.clone()), (p_e, cz.mul(&zz))])
}

/// Pauli coefficients of `CZ·exp(−iθ/2 ZZ)` as `α cos(θ/2) + β sin(θ/2)`.
fn rotation_parts() -> (Vec<C64>, Vec<C64>) {
    let b = basis();
    let cz = cz();
    let zz = pauli_matrix(&"ZZ".parse().expect("valid literal"));
    let alpha = coefficients(&cz, &b);
    let beta = coefficients(&cz.mul(&zz).scale(C64::new(0.0, -1.0)), &b);
    (alpha, beta)
}

fn rotation_outer(alpha: &[C64], beta: &[C64], theta: f64) -> Vec<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    let k: Vec<C64> = alpha.iter().zip(beta).map(|(a, b)| a * c + b * s).collect();
    let mut out = Vec::with_capacity(BASIS * BASIS);
    for a in &k {
        for b in &k {
            out.push(a * b.conj());
        }
    }
    out
}

fn from_flat(v: Vec<C64>) -> DenseOperator {
    DenseOperator::from_fn(BASIS, |r, c| v[r * BASIS + c])
}

/// χ of the Gaussian-averaged rotation by composite Simpson quadrature
/// over `θ ∈ [−L, L]`, `L = 40σ`.
pub fn gaussian_chi_quadrature(sigma_sq: f64, intervals: usize) -> DenseOperator {
    let (alpha, beta) = rotation_parts();
    if sigma_sq == 0.0 {
        return from_flat(rotation_outer(&alpha, &beta, 0.0));
    }
    let sd = sigma_sq.sqrt();
    let half = 40.0 * sd;
    let m = intervals + intervals % 2;
    let h = 2.0 * half / m as f64;
    let mut acc = vec![C64::new(0.0, 0.0); BASIS * BASIS];
    for i in 0..=m {
        let theta = -half + i as f64 * h;
        let weight = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let density = (-theta * theta / (2.0 * sigma_sq)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let w = weight * h / 3.0 * density;
        for (slot, v) in acc.iter_mut().zip(rotation_outer(&alpha, &beta, theta)) {
            *slot += v * w;
        }
    }
    from_flat(acc)
}

/// χ of the rotation averaged over `samples` Gaussian angles.
pub fn gaussian_chi_monte_carlo(sigma_sq: f64, samples: usize, seed: u64) -> Result<DenseOperator> {
    let normal = Normal::new(0.0, sigma_sq.sqrt()).map_err(|e| Error::InvalidNoise(e.to_string()))?;
    let (alpha, beta) = rotation_parts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![C64::new(0.0, 0.0); BASIS * BASIS];
    for _ in 0..samples {
        let theta = normal.sample(&mut rng);
        for (slot, v) in acc.iter_mut().zip(rotation_outer(&alpha, &beta, theta)) {
            *slot += v;
        }
    }
    let inv = 1.0 / samples.max(1) as f64;
    Ok(from_flat(acc.into_iter().map(|v| v * inv).collect()))
}

/// Frobenius distances between the Pauli-channel χ at `p_e = angle_to_pe(σ²)`
/// and the Gaussian average: `(quadrature, Monte Carlo)`. Zero samples skip
/// the Monte Carlo path.
pub fn gaussian_channel_equivalence(sigma_sq: f64, samples: usize, seed: u64) -> Result<(f64, Option<f64>)> {
    let target = pauli_channel_chi(angle_to_pe(sigma_sq)?);
    let analytic = gaussian_chi_quadrature(sigma_sq, 20_000).frobenius_distance(&target);
    let mc = if samples > 0 {
        Some(gaussian_chi_monte_carlo(sigma_sq, samples, seed)?.frobenius_distance(&target))
    } else {
        None
    };
    Ok((analytic, mc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_exact() {
        let (a, mc) = gaussian_channel_equivalence(0.0, 1000, 1).unwrap();
        assert_eq!(a, 0.0);
        assert!(mc.unwrap() < 1e-15);
    }

    #[test]
    fn pauli_chi_has_unit_trace() {
        let chi = pauli_channel_chi(0.25);
        let tr: f64 = (0..BASIS).map(|i| chi.get(i, i).re).sum();
        assert!((tr - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let (a, _) = gaussian_channel_equivalence(0.1, 0, 0).unwrap();
        assert!(a < 1e-12, "{a:e}");
    }
}
