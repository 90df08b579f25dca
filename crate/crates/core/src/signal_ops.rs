//! Convolution and translation in the GLCT domain.

use num_complex::Complex64;

use crate::cache::OperatorCache;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};
use crate::params::LctParams;
use crate::transforms::{GlctOperator, GlctOptions};

/// Unit vector with a one at vertex `i`.
pub fn delta(i: usize, n: usize) -> Result<GraphSignal> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[i] = Complex64::new(1.0, 0.0);
    Ok(GraphSignal::new(v))
}

/// `L⁻¹(L f ⊙ L h)` for a prebuilt operator.
pub fn convolve_with(op: &GlctOperator, f: &GraphSignal, h: &GraphSignal) -> Result<GraphSignal> {
    let spectrum = op.apply(f)?.hadamard(&op.apply(h)?)?;
    op.apply_inverse(&spectrum)
}

/// `√N · L⁻¹(L f ⊙ Lᵢ)` where `Lᵢ` is column `i` of the operator.
pub fn translate_with(op: &GlctOperator, f: &GraphSignal, i: usize) -> Result<GraphSignal> {
    let column = op.column(i)?;
    let spectrum = op.apply(f)?.hadamard(&column)?;
    let scale = Complex64::new((op.n() as f64).sqrt(), 0.0);
    Ok(op.apply_inverse(&spectrum)?.scale(scale))
}

pub fn glct_convolve(
    g: &Graph,
    f: &GraphSignal,
    h: &GraphSignal,
    params: &LctParams,
    options: &GlctOptions,
) -> Result<GraphSignal> {
    g.check_signal(f)?;
    g.check_signal(h)?;
    convolve_with(
        &*OperatorCache::global().operator(g, params, options)?,
        f,
        h,
    )
}

pub fn translate(
    g: &Graph,
    f: &GraphSignal,
    i: usize,
    params: &LctParams,
    options: &GlctOptions,
) -> Result<GraphSignal> {
    g.check_signal(f)?;
    if i >= g.n() {
        return Err(Error::IndexOutOfRange { index: i, n: g.n() });
    }
    translate_with(
        &*OperatorCache::global().operator(g, params, options)?,
        f,
        i,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_graph;

    #[test]
    fn deltas() {
        let d = delta(0, 3).unwrap();
        assert_eq!(d, GraphSignal::from_real(&[1.0, 0.0, 0.0]));
        let d = delta(2, 3).unwrap();
        assert_eq!(d, GraphSignal::from_real(&[0.0, 0.0, 1.0]));
        assert!(matches!(delta(3, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn translate_zero_is_zero() {
        let g = path_graph(5).unwrap();
        let p = LctParams::rotation(0.8);
        let t = translate(&g, &GraphSignal::zeros(5), 2, &p, &GlctOptions::default()).unwrap();
        assert_eq!(t.max_abs(), 0.0);
        assert!(translate(&g, &GraphSignal::zeros(5), 5, &p, &GlctOptions::default()).is_err());
    }
}
