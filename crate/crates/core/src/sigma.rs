//! Pauli eigenvalues `σ_P` of the noisy measurement channel.
//!
//! For a Pauli with `n1` identity, `n2` Z and `n3` X-or-Y sites under the
//! ZZ model with error rate `p`,
//!
//! ```text
//! σ = Σ_s c_s (1-p)^{(n1+n2-s) n3} p^{s n3},
//! c_s = Σ_t (-1)^t C(n1, s-t) C(n2, t),
//! ```
//!
//! i.e. `c_s` is the coefficient of `y^s` in `(1+y)^n1 (1-y)^n2`. The
//! extended model uses `1 - p/2` and `p/2` and adds `n3(n3-1)/2` to the
//! first exponent. `0^0` is taken as 1.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ensemble::NoiseModel;
use crate::error::{Error, Result};
use crate::pauli::{PauliClass, PauliString};

/// Robust estimation refuses to divide by coefficients below this value.
pub const SIGMA_MIN: f64 = 1e-6;

/// Relative size of the compensated sum below which the exact path runs.
const CANCELLATION_RATIO: f64 = 1e-9;

/// Whether the estimator inverts the noisy channel or assumes `σ ≡ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plain,
    Robust,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Robust => "robust",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "robust" => Ok(Mode::Robust),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

fn binomial_row(n: usize) -> Vec<i128> {
    let mut row = vec![1i128; n + 1];
    for k in 1..=n {
        row[k] = row[k - 1] * (n - k + 1) as i128 / k as i128;
    }
    row
}

/// Coefficients of `(1+y)^n1 (1-y)^n2`, exact.
fn alternating_coefficients(n1: usize, n2: usize) -> Vec<i128> {
    let b1 = binomial_row(n1);
    let b2 = binomial_row(n2);
    let mut c = vec![0i128; n1 + n2 + 1];
    for (s, cs) in c.iter_mut().enumerate() {
        let lo = s.saturating_sub(n1);
        let hi = s.min(n2);
        for t in lo..=hi {
            let term = b1[s - t] * b2[t];
            if t % 2 == 0 {
                *cs += term;
            } else {
                *cs -= term;
            }
        }
    }
    c
}

/// Shape of the weighted sum shared by both uniform models.
#[derive(Clone, Copy, Debug)]
struct WeightedSum {
    cls: PauliClass,
    /// Weight raised to the `(n1+n2-s) n3 + offset` power.
    keep: f64,
    /// Weight raised to the `s n3` power.
    flip: f64,
    offset: usize,
}

fn pow0(w: f64, e: usize) -> f64 {
    if e == 0 {
        1.0
    } else {
        w.powf(e as f64)
    }
}

impl WeightedSum {
    fn exponents(&self, s: usize) -> (usize, usize) {
        let PauliClass { n1, n2, n3 } = self.cls;
        ((n1 + n2 - s) * n3 + self.offset, s * n3)
    }

    fn evaluate(&self) -> f64 {
        let PauliClass { n1, n2, n3 } = self.cls;
        if n3 == 0 {
            // Every weight is w^0 = 1 and Σ c_s = 2^n1 * 0^n2.
            return if n2 == 0 { (n1 as f64).exp2() } else { 0.0 };
        }
        let (total, largest) = self.float_sum();
        if largest > 0.0 && total.abs() < CANCELLATION_RATIO * largest {
            self.evaluate_exact()
        } else {
            total
        }
    }

    /// Compensated sum and the largest term magnitude.
    fn float_sum(&self) -> (f64, f64) {
        let PauliClass { n1, n2, .. } = self.cls;
        let c = alternating_coefficients(n1, n2);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut largest = 0.0f64;
        for (s, &cs) in c.iter().enumerate() {
            if cs == 0 {
                continue;
            }
            let (ek, ef) = self.exponents(s);
            let term = cs as f64 * log_pow(self.keep, ek) * log_pow(self.flip, ef);
            largest = largest.max(term.abs());
            // Neumaier compensated summation.
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        (sum + comp, largest)
    }

    /// Evaluates the sum in exact integer arithmetic. Both weights are
    /// dyadic rationals with a common denominator, and every term carries the
    /// same total exponent, so the sum is an integer over a power of two.
    fn evaluate_exact(&self) -> f64 {
        let PauliClass { n1, n2, n3 } = self.cls;
        let (m, k) = dyadic(self.flip);
        let flip = BigInt::from(m);
        let keep = (BigInt::from(1) << k) - &flip;
        let total_exp = (n1 + n2) * n3 + self.offset;
        let mut acc = BigInt::zero();
        for (s, cs) in alternating_coefficients(n1, n2).into_iter().enumerate() {
            if cs == 0 {
                continue;
            }
            let (ek, ef) = self.exponents(s);
            acc += BigInt::from(cs) * num_traits::pow(keep.clone(), ek) * num_traits::pow(flip.clone(), ef);
        }
        scale_pow2(&acc, -((k as i64) * total_exp as i64))
    }
}

fn log_pow(w: f64, e: usize) -> f64 {
    if e == 0 {
        1.0
    } else if w == 0.0 {
        0.0
    } else {
        (e as f64 * w.ln()).exp()
    }
}

/// Splits a probability in `[0, 1]` into `m / 2^k` with odd `m` (or `m = 0`).
fn dyadic(p: f64) -> (u64, u32) {
    if p == 0.0 {
        return (0, 0);
    }
    let bits = p.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mut m, mut e) = if exp == 0 {
        (bits & ((1 << 52) - 1), -1074i64)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
    };
    while m % 2 == 0 {
        m /= 2;
        e += 1;
    }
    // p <= 1 keeps e <= 0.
    (m, (-e) as u32)
}

/// `v * 2^shift` rounded to `f64`.
fn scale_pow2(v: &BigInt, shift: i64) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let bits = v.bits() as i64;
    let keep = 64i64;
    let (mant, extra) = if bits > keep {
        (v >> (bits - keep) as usize, bits - keep)
    } else {
        (v.clone(), 0)
    };
    let m = mant.abs().to_u64().expect("fits in 64 bits") as f64;
    let signed = if v.is_negative() { -m } else { m };
    let e = shift + extra;
    // Split the power so intermediate values stay finite.
    let half = e / 2;
    signed * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

/// `σ` under the ZZ model with uniform rate `p_e`.
pub fn sigma_exact(cls: PauliClass, p_e: f64) -> f64 {
    if cls.n3 > 0 && p_e == 0.0 {
        return 1.0;
    }
    WeightedSum {
        cls,
        keep: 1.0 - p_e,
        flip: p_e,
        offset: 0,
    }
    .evaluate()
}

/// `σ` under the extended model (`ZI`, `IZ`, `ZZ` each at `p_e / 4`).
pub fn sigma_extended(cls: PauliClass, p_e: f64) -> f64 {
    if cls.n3 > 0 && p_e == 0.0 {
        return 1.0;
    }
    let n3 = cls.n3;
    WeightedSum {
        cls,
        keep: 1.0 - p_e / 2.0,
        flip: p_e / 2.0,
        offset: n3 * n3.saturating_sub(1) / 2,
    }
    .evaluate()
}

/// Leading-order approximation `(1 - p_e)^{n3 (n - n3)}`.
pub fn sigma_approx(cls: PauliClass, p_e: f64) -> f64 {
    pow0(1.0 - p_e, cls.n3 * (cls.n1 + cls.n2))
}

/// Leading-order approximation with per-pair rates: the product of
/// `1 - rates[s][t]` over non-X sites `s` and X-or-Y sites `t`.
pub fn sigma_approx_het(p: &PauliString, rates: &[Vec<f64>]) -> f64 {
    let n = p.num_qubits();
    let mut out = 1.0;
    for t in p.x().ones() {
        for s in 0..n {
            if !p.x().get(s) {
                out *= 1.0 - rates[s][t];
            }
        }
    }
    out
}

/// Uncached dispatch on the model. Z-type input is an error.
pub fn sigma_for(p: &PauliString, model: &NoiseModel) -> Result<f64> {
    if p.is_ztype() {
        return Err(Error::ZType);
    }
    let cls = p.classify();
    Ok(match model {
        NoiseModel::Noiseless => 1.0,
        NoiseModel::Zz { p_e } => sigma_exact(cls, *p_e),
        NoiseModel::Extended { p_e } => sigma_extended(cls, *p_e),
        NoiseModel::ZzHet { rates } => sigma_approx_het(p, rates),
    })
}

/// Cached `σ` lookups for one qubit count, model and mode.
///
/// Plain mode reports `σ ≡ 1`. Robust mode evaluates each class once.
#[derive(Debug)]
pub struct SigmaEngine {
    n: usize,
    model: NoiseModel,
    mode: Mode,
    table: Vec<OnceLock<f64>>,
}

impl SigmaEngine {
    pub fn new(n: usize, model: NoiseModel, mode: Mode) -> Result<Self> {
        model.validate(n)?;
        Ok(Self {
            n,
            model,
            mode,
            table: (0..(n + 1) * (n + 1)).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Coefficient for a non-Z-type Pauli.
    pub fn sigma(&self, p: &PauliString) -> Result<f64> {
        if p.num_qubits() != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        if p.is_ztype() {
            return Err(Error::ZType);
        }
        if self.mode == Mode::Plain {
            return Ok(1.0);
        }
        let cls = p.classify();
        let value = match &self.model {
            NoiseModel::ZzHet { rates } => sigma_approx_het(p, rates),
            model => *self.table[cls.n2 * (self.n + 1) + cls.n3].get_or_init(|| match model {
                NoiseModel::Zz { p_e } => sigma_exact(cls, *p_e),
                NoiseModel::Extended { p_e } => sigma_extended(cls, *p_e),
                _ => 1.0,
            }),
        };
        if !(value >= SIGMA_MIN) {
            return Err(Error::SigmaTooSmall {
                n1: cls.n1,
                n2: cls.n2,
                n3: cls.n3,
                value,
            });
        }
        Ok(value)
    }

    pub fn inverse(&self, p: &PauliString) -> Result<f64> {
        self.sigma(p).map(f64::recip)
    }

    /// `σ` for every non-Z-type class `(n1, n2, n3)` of this engine's size,
    /// ordered by `n2` then `n3`. Plain mode lists ones.
    pub fn class_table(&self) -> Vec<(PauliClass, f64)> {
        let n = self.n;
        let mut out = Vec::new();
        for n3 in 1..=n {
            for n2 in 0..=(n - n3) {
                let cls = PauliClass::new(n - n2 - n3, n2, n3);
                let v = match (self.mode, &self.model) {
                    (Mode::Plain, _) | (_, NoiseModel::Noiseless) => 1.0,
                    (_, NoiseModel::Zz { p_e }) => sigma_exact(cls, *p_e),
                    (_, NoiseModel::Extended { p_e }) => sigma_extended(cls, *p_e),
                    (_, NoiseModel::ZzHet { rates }) => {
                        let mut x = crate::bitlin::BitVec::zeros(n);
                        let mut z = crate::bitlin::BitVec::zeros(n);
                        for q in 0..n3 {
                            x.set(q, true);
                        }
                        for q in n3..n3 + n2 {
                            z.set(q, true);
                        }
                        sigma_approx_het(&PauliString::from_parts(x, z, 0), rates)
                    }
                };
                out.push((cls, v));
            }
        }
        out.sort_by_key(|(c, _)| (c.n2, c.n3));
        out
    }
}
