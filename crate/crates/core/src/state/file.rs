use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PureState, SchmidtState, TwoQubitState};
use crate::error::{check_unit_interval, ChshError, Result};
use crate::linalg::cmat4_zero;

/// JSON state description.
///
/// ```json
/// {"type": "schmidt", "concurrence": 0.5}
/// {"type": "pure", "amplitudes": [[0,0],[0.7071,0],[-0.7071,0],[0,0]]}
/// {"type": "mixed", "matrix": [[[0.25,0], ...], ...]}
/// {"type": "werner", "p": 0.8}
/// {"type": "mixture", "p": 0.333, "concurrence_psi": 0.6, "concurrence_phi": 0.9}
/// ```
///
/// Complex numbers are `[re, im]` pairs; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Pure { amplitudes: Vec<[f64; 2]> },
    Schmidt { concurrence: f64 },
    Mixed { matrix: Vec<Vec<[f64; 2]>> },
    Werner { p: f64 },
    Mixture { p: f64, concurrence_psi: f64, concurrence_phi: f64 },
}

fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl StateSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ChshError::InvalidState(format!("malformed state JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state spec serializes")
    }

    /// Validates and converts into a [`TwoQubitState`].
    pub fn to_state(&self) -> Result<TwoQubitState> {
        match self {
            StateSpec::Pure { amplitudes } => {
                let amps: [[f64; 2]; 4] = amplitudes.as_slice().try_into().map_err(|_| {
                    ChshError::InvalidState(format!("expected 4 amplitudes, got {}", amplitudes.len()))
                })?;
                Ok(TwoQubitState::Pure(PureState::new(amps.map(|a| complex(&a)))?))
            }
            StateSpec::Schmidt { concurrence } => Ok(TwoQubitState::Schmidt(SchmidtState::new(*concurrence)?)),
            StateSpec::Mixed { matrix } => {
                if matrix.len() != 4 || matrix.iter().any(|row| row.len() != 4) {
                    return Err(ChshError::InvalidState("density matrix must be 4×4".into()));
                }
                let mut m = cmat4_zero();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, z) in row.iter().enumerate() {
                        m[i][j] = complex(z);
                    }
                }
                Ok(TwoQubitState::Mixed(DensityMatrix::new(m)?))
            }
            StateSpec::Werner { p } => {
                check_unit_interval("p", *p)?;
                Ok(TwoQubitState::Werner { p: *p })
            }
            StateSpec::Mixture { p, concurrence_psi, concurrence_phi } => {
                check_unit_interval("p", *p)?;
                check_unit_interval("concurrence_psi", *concurrence_psi)?;
                check_unit_interval("concurrence_phi", *concurrence_phi)?;
                Ok(TwoQubitState::Mixture {
                    p: *p,
                    concurrence_psi: *concurrence_psi,
                    concurrence_phi: *concurrence_phi,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_variant() {
        let cases = [
            r#"{"type":"schmidt","concurrence":0.5}"#,
            r#"{"type":"pure","amplitudes":[[0,0],[0.7071067811865476,0],[-0.7071067811865476,0],[0,0]]}"#,
            r#"{"type":"werner","p":0.8}"#,
            r#"{"type":"mixture","p":0.3333333333333333,"concurrence_psi":0.6,"concurrence_phi":0.9}"#,
            r#"{"type":"mixed","matrix":[[[0.25,0],[0,0],[0,0],[0,0]],[[0,0],[0.25,0],[0,0],[0,0]],[[0,0],[0,0],[0.25,0],[0,0]],[[0,0],[0,0],[0,0],[0.25,0]]]}"#,
        ];
        for text in cases {
            let spec = StateSpec::from_json(text).unwrap();
            spec.to_state().unwrap().density().unwrap();
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(StateSpec::from_json(r#"{"type":"schmidt"}"#).is_err());
        assert!(StateSpec::from_json(r#"{"type":"ghz","n":3}"#).is_err());
        assert!(StateSpec::from_json("not json").is_err());
        let short = StateSpec::from_json(r#"{"type":"pure","amplitudes":[[1,0]]}"#).unwrap();
        assert!(short.to_state().is_err());
        let bad = StateSpec::from_json(r#"{"type":"werner","p":1.5}"#).unwrap();
        assert!(bad.to_state().is_err());
    }
}
