//! Named state preparations.

use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableau::{Circuit, GateOp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PrepSpec {
    /// `∏_j CZ_{0,j} |+⟩^{⊗n}`.
    GhzStar,
    /// `∏_j CZ_{j,j+1} |+⟩^{⊗n}`.
    Cluster1d,
    PlusProduct,
    RandomStabilizer { seed: u64 },
    CircuitFile { path: PathBuf },
}

impl PrepSpec {
    /// Parses `ghz-star`, `cluster-1d`, `plus-product`,
    /// `random-stabilizer:<seed>` or `file:<path>`.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "ghz-star" => PrepSpec::GhzStar,
            "cluster-1d" => PrepSpec::Cluster1d,
            "plus-product" => PrepSpec::PlusProduct,
            "random-stabilizer" => PrepSpec::RandomStabilizer { seed: 0 },
            _ => {
                if let Some(seed) = text.strip_prefix("random-stabilizer:") {
                    let seed = seed
                        .parse()
                        .map_err(|_| Error::Config(format!("bad random-stabilizer seed {seed:?}")))?;
                    PrepSpec::RandomStabilizer { seed }
                } else if let Some(path) = text.strip_prefix("file:") {
                    PrepSpec::CircuitFile { path: path.into() }
                } else {
                    return Err(Error::Config(format!("unknown preparation {text:?}")));
                }
            }
        })
    }

    pub fn circuit(&self, n: usize) -> Result<Circuit> {
        if n == 0 {
            return Err(Error::Config("preparations need at least one qubit".into()));
        }
        let plus = (0..n).map(GateOp::H);
        let gates: Vec<GateOp> = match self {
            PrepSpec::GhzStar => plus.chain((1..n).map(|j| GateOp::Cz(0, j))).collect(),
            PrepSpec::Cluster1d => plus.chain((1..n).map(|j| GateOp::Cz(j - 1, j))).collect(),
            PrepSpec::PlusProduct => plus.collect(),
            PrepSpec::RandomStabilizer { seed } => {
                return Ok(random_stabilizer_circuit(&mut ChaCha8Rng::seed_from_u64(*seed), n));
            }
            PrepSpec::CircuitFile { path } => {
                let text = std::fs::read_to_string(path)?;
                return Circuit::parse(n, &text);
            }
        };
        Circuit::new(n, gates)
    }
}

impl fmt::Display for PrepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrepSpec::GhzStar => f.write_str("ghz-star"),
            PrepSpec::Cluster1d => f.write_str("cluster-1d"),
            PrepSpec::PlusProduct => f.write_str("plus-product"),
            PrepSpec::RandomStabilizer { seed } => write!(f, "random-stabilizer:{seed}"),
            PrepSpec::CircuitFile { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// A random gate list over the full Clifford gate set, long enough to
/// scramble `n` qubits.
pub fn random_stabilizer_circuit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Circuit {
    let mut gates = Vec::with_capacity(6 * n + 4);
    for _ in 0..(6 * n + 4) {
        let a = rng.random_range(0..n);
        let roll = rng.random_range(0..6);
        let g = if n > 1 && roll >= 4 {
            let b = (a + rng.random_range(1..n)) % n;
            if roll == 4 {
                GateOp::Cnot(a, b)
            } else {
                GateOp::Cz(a, b)
            }
        } else {
            match roll % 4 {
                0 | 1 => GateOp::H(a),
                2 => GateOp::S(a),
                _ => GateOp::X(a),
            }
        };
        gates.push(g);
    }
    Circuit::new(n, gates).expect("targets are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::StabState;

    #[test]
    fn named_states() {
        let ghz = StabState::from_circuit(&PrepSpec::GhzStar.circuit(4).unwrap());
        assert_eq!(ghz.pauli_expectation(&"XZZZ".parse().unwrap()).unwrap(), 1);
        assert_eq!(ghz.pauli_expectation(&"ZXII".parse().unwrap()).unwrap(), 1);
        let cluster = StabState::from_circuit(&PrepSpec::Cluster1d.circuit(4).unwrap());
        assert_eq!(cluster.pauli_expectation(&"ZXZI".parse().unwrap()).unwrap(), 1);
        let plus = StabState::from_circuit(&PrepSpec::PlusProduct.circuit(3).unwrap());
        assert_eq!(plus.pauli_expectation(&"XXX".parse().unwrap()).unwrap(), 1);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["ghz-star", "cluster-1d", "plus-product", "random-stabilizer:7", "file:/tmp/x.txt"] {
            assert_eq!(PrepSpec::parse(text).unwrap().to_string(), text);
        }
        assert!(PrepSpec::parse("bell").is_err());
    }

    #[test]
    fn random_stabilizer_is_reproducible() {
        let a = PrepSpec::RandomStabilizer { seed: 4 }.circuit(5).unwrap();
        let b = PrepSpec::RandomStabilizer { seed: 4 }.circuit(5).unwrap();
        assert_eq!(a, b);
    }
}
