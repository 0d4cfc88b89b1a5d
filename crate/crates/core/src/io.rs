//! Graph files: `{"n": 3, "edges": [[0, 1], [1, 2]], "potential": [0, 1.5, 0]}`.
//! `potential` is optional and defaults to zero; unknown keys are ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, Potential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn from_parts(g: &Graph, q: Option<&Potential>) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges().map(|(a, b)| [a, b]).collect(),
            potential: q.map(|q| q.values().to_vec()),
        }
    }

    /// Validated graph and potential (zeros when absent).
    pub fn into_parts(&self) -> Result<(Graph, Potential)> {
        let g = Graph::new(self.n, self.edges.iter().map(|e| (e[0], e[1])))?;
        let q = match &self.potential {
            Some(v) => Potential::new(v.clone())?,
            None => Potential::zeros(self.n),
        };
        if q.len() != self.n {
            return Err(crate::error::PstError::DimensionMismatch {
                expected: self.n,
                found: q.len(),
            });
        }
        Ok((g, q))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::to_canonical_json;
    use crate::graph::path_graph;

    #[test]
    fn round_trip() {
        let g = path_graph(3).unwrap();
        let q = Potential::new(vec![0.0, 1.5, 0.0]).unwrap();
        let file = GraphFile::from_parts(&g, Some(&q));
        let text = to_canonical_json(&file).unwrap();
        assert_eq!(
            text,
            "{\n  \"edges\": [\n    [0, 1],\n    [1, 2]\n  ],\n  \"n\": 3,\n  \"potential\": [0, 1.5, 0]\n}\n"
        );
        let back = GraphFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        let (g2, q2) = back.into_parts().unwrap();
        assert_eq!(g2, g);
        assert_eq!(q2, q);
    }

    #[test]
    fn defaults_and_extra_keys() {
        let f = GraphFile::from_json(r#"{"n": 2, "edges": [[0, 1]], "name": "P2"}"#).unwrap();
        let (_, q) = f.into_parts().unwrap();
        assert_eq!(q.values(), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(GraphFile::from_json(r#"{"n": 2}"#).is_err());
        let f = GraphFile::from_json(r#"{"n": 2, "edges": [[0, 2]]}"#).unwrap();
        assert!(f.into_parts().is_err());
        let f = GraphFile::from_json(r#"{"n": 2, "edges": [], "potential": [1]}"#).unwrap();
        assert!(f.into_parts().is_err());
    }
}
