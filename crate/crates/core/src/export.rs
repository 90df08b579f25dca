//! JSON export of operator matrices.

use serde::{Deserialize, Serialize};

use crate::params::DecomposedParams;
use crate::spectral::CMat;
use crate::transforms::{GlctOperator, GlctOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorExport {
    pub n: usize,
    pub params: [f64; 4],
    pub decomposed: DecomposedParams,
    pub options: GlctOptions,
    /// Row-major `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
}

impl OperatorExport {
    pub fn from_operator(op: &GlctOperator) -> Self {
        Self {
            n: op.n(),
            params: op.params.as_array(),
            decomposed: op.decomposed,
            options: op.options,
            matrix: row_major_pairs(&op.matrix),
        }
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| {
            let [re, im] = self.matrix[i * self.n + j];
            num_complex::Complex64::new(re, im)
        })
    }
}

pub fn row_major_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn operator_json(op: &GlctOperator) -> serde_json::Result<String> {
    serde_json::to_string(&OperatorExport::from_operator(op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_graph;
    use crate::params::LctParams;
    use crate::spectral::max_abs_diff;
    use crate::transforms::glct_operator;

    #[test]
    fn json_shape_and_round_trip() {
        let g = path_graph(3).unwrap();
        let op = glct_operator(&g, &LctParams::rotation(0.5), &GlctOptions::default()).unwrap();
        let text = operator_json(&op).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["params"].as_array().unwrap().len(), 4);
        assert!(v["decomposed"]["xi"].is_number());
        assert_eq!(v["options"]["chirp_mode"], "spectral-index");
        assert_eq!(v["matrix"].as_array().unwrap().len(), 9);
        let back: OperatorExport = serde_json::from_str(&text).unwrap();
        assert_eq!(max_abs_diff(&back.matrix(), &op.matrix), 0.0);
    }
}
