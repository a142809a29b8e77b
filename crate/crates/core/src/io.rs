//! JSON inputs: a Killing field `u ∈ su(n+1)` and a torus action.

use serde::{Deserialize, Serialize};

use crate::conformality::ActionSpec;
use crate::error::{GeomError, Result};
use crate::matkit::{su_basis, MatrixJson, SuElement};

/// Tolerance for the anti-Hermitian and trace checks on parsed matrices.
pub const PARSE_TOL: f64 = 1e-12;

/// `{"n": 1, "u": [[[re, im], ...], ...]}` or `{"n": 1, "basis_coeffs": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum KillingSpec {
    Matrix { n: usize, u: MatrixJson },
    Basis { n: usize, basis_coeffs: Vec<f64> },
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(GeomError::InvalidInput("n: must be at least 1".into()));
    }
    Ok(())
}

fn su_at(m: &MatrixJson, n: usize, path: &str) -> Result<SuElement> {
    let mat = m.to_matrix(path)?;
    if mat.nrows() != n + 1 {
        return Err(GeomError::InvalidInput(format!(
            "{path}: expected {0}x{0} for n = {n}, got {1}x{1}",
            n + 1,
            mat.nrows()
        )));
    }
    SuElement::new(mat, PARSE_TOL).map_err(|e| GeomError::InvalidInput(format!("{path}: {e}")))
}

impl KillingSpec {
    pub fn n(&self) -> usize {
        match self {
            KillingSpec::Matrix { n, .. } | KillingSpec::Basis { n, .. } => *n,
        }
    }

    pub fn element(&self) -> Result<SuElement> {
        match self {
            KillingSpec::Matrix { n, u } => {
                check_n(*n)?;
                su_at(u, *n, "u")
            }
            KillingSpec::Basis { n, basis_coeffs } => {
                check_n(*n)?;
                let basis = su_basis(n + 1)?;
                if basis_coeffs.len() != basis.len() {
                    return Err(GeomError::InvalidInput(format!(
                        "basis_coeffs: expected {} coefficients for n = {n}, got {}",
                        basis.len(),
                        basis_coeffs.len()
                    )));
                }
                if let Some(k) = basis_coeffs.iter().position(|c| !c.is_finite()) {
                    return Err(GeomError::InvalidInput(format!("basis_coeffs[{k}]: non-finite entry")));
                }
                SuElement::combination(basis_coeffs, &basis)
            }
        }
    }

    pub fn from_element(u: &SuElement) -> Self {
        KillingSpec::Matrix { n: u.dim() - 1, u: MatrixJson::from_matrix(u.as_matrix()) }
    }
}

/// `{"n": 2, "generators": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpecJson {
    pub n: usize,
    pub generators: Vec<MatrixJson>,
}

impl ActionSpecJson {
    pub fn action(&self) -> Result<ActionSpec> {
        check_n(self.n)?;
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, m)| su_at(m, self.n, &format!("generators[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        ActionSpec::new(self.n, gens)
    }

    pub fn from_action(spec: &ActionSpec) -> Self {
        ActionSpecJson {
            n: spec.n(),
            generators: spec.generators().iter().map(|u| MatrixJson::from_matrix(u.as_matrix())).collect(),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| GeomError::InvalidInput(format!("{what}: {e}")))
}

pub fn parse_killing_spec(text: &str) -> Result<SuElement> {
    parse::<KillingSpec>(text, "Killing spec")?.element()
}

pub fn parse_action_spec(text: &str) -> Result<ActionSpec> {
    parse::<ActionSpecJson>(text, "action spec")?.action()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::random_su;

    #[test]
    fn matrix_spec_round_trip() {
        let u = random_su(3, 4).unwrap();
        let text = serde_json::to_string(&KillingSpec::from_element(&u)).unwrap();
        assert_eq!(parse_killing_spec(&text).unwrap(), u);
    }

    #[test]
    fn su2_rotation_spec() {
        let text = r#"{"n": 1, "u": [[[0, 0.5], [0, 0]], [[0, 0], [0, -0.5]]]}"#;
        let u = parse_killing_spec(text).unwrap();
        assert_eq!(u.dim(), 2);
    }

    #[test]
    fn basis_spec() {
        let text = r#"{"n": 1, "basis_coeffs": [1.0, 0.0, 0.0]}"#;
        let u = parse_killing_spec(text).unwrap();
        assert_eq!(&u, &su_basis(2).unwrap()[0]);
        let err = parse_killing_spec(r#"{"n": 1, "basis_coeffs": [1.0]}"#).unwrap_err().to_string();
        assert!(err.contains("basis_coeffs"), "{err}");
    }

    #[test]
    fn bad_specs_name_the_field() {
        let not_traceless = r#"{"n": 1, "u": [[[0, 1], [0, 0]], [[0, 0], [0, 1]]]}"#;
        let err = parse_killing_spec(not_traceless).unwrap_err().to_string();
        assert!(err.starts_with("invalid input: u:") || err.contains("u:"), "{err}");
        let wrong_size = r#"{"n": 2, "u": [[[0, 1], [0, 0]], [[0, 0], [0, -1]]]}"#;
        assert!(parse_killing_spec(wrong_size).unwrap_err().to_string().contains("u:"));
        assert!(parse_killing_spec(r#"{"n": 1}"#).is_err());
        assert!(parse_killing_spec("not json").is_err());
        assert!(parse_killing_spec(r#"{"n": 0, "basis_coeffs": []}"#).unwrap_err().to_string().contains("n:"));
    }

    #[test]
    fn action_specs() {
        let torus = r#"{"n": 2, "generators": [
            [[[0, 0.5], [0, 0], [0, 0]], [[0, 0], [0, -0.5], [0, 0]], [[0, 0], [0, 0], [0, 0]]],
            [[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0.5], [0, 0]], [[0, 0], [0, 0], [0, -0.5]]]
        ]}"#;
        let spec = parse_action_spec(torus).unwrap();
        assert_eq!(spec.rank(), 2);
        let back = serde_json::to_string(&ActionSpecJson::from_action(&spec)).unwrap();
        assert_eq!(parse_action_spec(&back).unwrap(), spec);

        let a = MatrixJson::from_matrix(random_su(3, 1).unwrap().as_matrix());
        let b = MatrixJson::from_matrix(random_su(3, 2).unwrap().as_matrix());
        let text = serde_json::to_string(&ActionSpecJson { n: 2, generators: vec![a, b] }).unwrap();
        assert!(parse_action_spec(&text).unwrap_err().to_string().contains("commute"));

        let bad = r#"{"n": 1, "generators": [[[[0, 1], [0, 0]], [[0, 0], [0, 1]]]]}"#;
        assert!(parse_action_spec(bad).unwrap_err().to_string().contains("generators[0]"));
    }
}
