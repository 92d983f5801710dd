use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{AlgebraError, DecompositionMeta, LieAlgebra};

/// On-disk form of an algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<String>,
    pub structure: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaFile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaFile {
    #[serde(default)]
    pub center: Vec<Vec<f64>>,
    #[serde(default)]
    pub cartan: Vec<Vec<f64>>,
    #[serde(default)]
    pub v_space: Vec<Vec<f64>>,
    #[serde(default)]
    pub levi: Vec<Vec<f64>>,
}

fn to_vectors(rows: &[Vec<f64>]) -> Vec<DVector<f64>> {
    rows.iter().map(|r| DVector::from_vec(r.clone())).collect()
}

fn to_rows(vs: &[DVector<f64>]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.iter().cloned().collect()).collect()
}

impl AlgebraFile {
    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        serde_json::from_str(text).map_err(|e| AlgebraError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("algebra files always serialize")
    }

    /// Validates the file and builds the algebra.
    pub fn into_algebra(self) -> Result<LieAlgebra, AlgebraError> {
        if self.basis.len() != self.dim {
            return Err(AlgebraError::InvalidStructure {
                field: "basis".into(),
                reason: format!("has {} names but dim is {}", self.basis.len(), self.dim),
            });
        }
        let meta = self.meta.map(|m| DecompositionMeta {
            center: to_vectors(&m.center),
            cartan: to_vectors(&m.cartan),
            v_space: to_vectors(&m.v_space),
            levi: to_vectors(&m.levi),
        });
        LieAlgebra::from_triples(self.name, self.basis, &self.structure, meta)
    }
}

impl From<&LieAlgebra> for AlgebraFile {
    fn from(g: &LieAlgebra) -> Self {
        AlgebraFile {
            name: g.name().to_string(),
            dim: g.dim(),
            basis: g.basis_names().to_vec(),
            structure: g.triples(),
            meta: g.meta().map(|m| MetaFile {
                center: to_rows(&m.center),
                cartan: to_rows(&m.cartan),
                v_space: to_rows(&m.v_space),
                levi: to_rows(&m.levi),
            }),
        }
    }
}

impl LieAlgebra {
    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        AlgebraFile::from_json(text)?.into_algebra()
    }

    pub fn to_json(&self) -> String {
        AlgebraFile::from(self).to_json()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AlgebraError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AlgebraError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AlgebraError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| AlgebraError::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_hsp, build_osc, build_sl2};

    #[test]
    fn round_trip() {
        for g in [build_sl2(), build_osc(), build_hsp(1)] {
            let back = LieAlgebra::from_json(&g.to_json()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn parse_error_has_position() {
        let err = LieAlgebra::from_json("{\n  \"name\": \"x\",\n  \"dim\": oops\n}").unwrap_err();
        match err {
            AlgebraError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_errors() {
        let text = r#"{"name":"x","dim":2,"basis":["a","b"],"structure":[[1,0,0,1.0]]}"#;
        let err = LieAlgebra::from_json(text).unwrap_err();
        assert!(err.to_string().starts_with("structure[0]"));
        let text = r#"{"name":"x","dim":3,"basis":["a","b"],"structure":[]}"#;
        assert!(LieAlgebra::from_json(text).unwrap_err().to_string().starts_with("basis"));
        let text = r#"{"name":"x","dim":2,"basis":["a","b"],"structure":[[0,1,0,1.0]],
            "meta":{"cartan":[[1.0]]}}"#;
        assert!(LieAlgebra::from_json(text)
            .unwrap_err()
            .to_string()
            .starts_with("meta.cartan[0]"));
    }
}
