//! LCT parameter matrices and their chirp · scaling · rotation decomposition.
//!
//! A parameter matrix `[[a, b], [c, d]]` with `ad − bc = 1` factors as
//!
//! ```text
//! [[1, 0], [ξ, 1]] · [[σ, 0], [0, 1/σ]] · [[cos α, sin α], [−sin α, cos α]]
//! ```
//!
//! with `σ = √(a² + b²)`, `α = atan2(b, a)` and `ξ = (ac + bd)/σ²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `ad − bc = 1` for user-supplied parameters.
pub const DETERMINANT_TOL: f64 = 1e-10;
/// Tolerance on accumulated determinant drift after composition.
pub const COMPOSE_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LctParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposedParams {
    pub xi: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl DecomposedParams {
    /// Fractional order `2α/π` of the rotation stage.
    pub fn order(&self) -> f64 {
        2.0 * self.alpha / std::f64::consts::PI
    }
}

impl LctParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::with_tolerance(a, b, c, d, DETERMINANT_TOL)
    }

    fn with_tolerance(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Determinant(f64::NAN));
        }
        let det = a * d - b * c;
        if (det - 1.0).abs() > tol {
            return Err(Error::Determinant(det));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::DegenerateParams);
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// `(0, 1, −1, 0)`: the full Fourier transform.
    pub fn fourier() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            c: -1.0,
            d: 0.0,
        }
    }

    pub fn rotation(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Self {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
    }

    pub fn chirp(xi: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: xi,
            d: 1.0,
        }
    }

    /// Rebuilds `(a, b, c, d)` from a chirp · scaling · rotation triple.
    pub fn from_decomposed(xi: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let (s, c) = alpha.sin_cos();
        let a = sigma * c;
        let b = sigma * s;
        Self::new(a, b, xi * a - s / sigma, xi * b + c / sigma)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn decompose(&self) -> Result<DecomposedParams> {
        decompose_params(self)
    }

    pub fn inverse(&self) -> LctParams {
        inverse_params(self)
    }
}

pub fn decompose_params(p: &LctParams) -> Result<DecomposedParams> {
    let det = p.determinant();
    if (det - 1.0).abs() > COMPOSE_DRIFT_TOL {
        return Err(Error::Determinant(det));
    }
    let norm2 = p.a * p.a + p.b * p.b;
    if norm2 == 0.0 {
        return Err(Error::DegenerateParams);
    }
    Ok(DecomposedParams {
        xi: (p.a * p.c + p.b * p.d) / norm2,
        sigma: norm2.sqrt(),
        alpha: p.b.atan2(p.a),
    })
}

/// Matrix product `M₂·M₁` (apply `p1` first, then `p2`).
pub fn compose_params(p2: &LctParams, p1: &LctParams) -> Result<LctParams> {
    LctParams::with_tolerance(
        p2.a * p1.a + p2.b * p1.c,
        p2.a * p1.b + p2.b * p1.d,
        p2.c * p1.a + p2.d * p1.c,
        p2.c * p1.b + p2.d * p1.d,
        COMPOSE_DRIFT_TOL,
    )
}

/// `(d, −b, −c, a)`, the inverse of a unit-determinant matrix.
pub fn inverse_params(p: &LctParams) -> LctParams {
    LctParams {
        a: p.d,
        b: -p.b,
        c: -p.c,
        d: p.a,
    }
}

impl std::str::FromStr for LctParams {
    type Err = Error;

    /// Parses `a,b,c,d`.
    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                1,
                format!("expected 4 comma-separated values, got {}", fields.len()),
            ));
        }
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .map_err(|e| Error::parse(1, format!("bad parameter {field:?}: {e}")))?;
        }
        LctParams::new(v[0], v[1], v[2], v[3])
    }
}
