//! Graph Fourier, fractional Fourier and linear canonical transforms.
//!
//! With `A = V Λ Vᴴ` (canonical, unitary `V`) the graph Fourier matrix is
//! `F = Vᴴ`. `F` is unitary, so it has its own canonical decomposition
//! `F = Q Λ_F Qᴴ`, and the GLCT operator for parameters `(a, b, c, d)` is
//!
//! ```text
//! L = diag(chirp_ξ) · Q_σ · diag(Λ_F^(2α/π)) · Qᴴ
//! ```
//!
//! where `(ξ, σ, α)` come from [`decompose_params`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cache::OperatorCache;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};
use crate::params::{decompose_params, DecomposedParams, LctParams};
use crate::spectral::{
    self, adjoint_mat_vec, c64, eig_normal, eig_normal_real, frac_unitary_power, mat_vec,
    scale_rows_cols, CMat, EigenBasis,
};

/// `σ` values this close to 1 reuse the unscaled bases.
pub const UNIT_SIGMA_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChirpMode {
    /// `exp(j·(π/2)·k·(ξ·k + f))`
    #[default]
    SpectralIndex,
    /// `exp(j·π·ξ·k²/N)`
    VertexNormalized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    /// `Q_σ` = eigenvectors of the Fourier matrix of `(1/σ)·A`.
    #[default]
    GftEigenbasis,
    /// `Q_σ` = eigenvectors of `(1/σ)·A` itself.
    AdjacencyEigenbasis,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GlctOptions {
    pub chirp_mode: ChirpMode,
    pub scaling_mode: ScalingMode,
    pub chirp_offset: f64,
}

/// Diagonal of the chirp-multiplication stage.
pub fn chirp_diag(n: usize, xi: f64, options: &GlctOptions) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let k = k as f64;
            let phase = match options.chirp_mode {
                ChirpMode::SpectralIndex => 0.5 * PI * k * (xi * k + options.chirp_offset),
                ChirpMode::VertexNormalized => PI * xi * k * k / n as f64,
            };
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Canonical eigenbasis of the adjacency matrix.
pub fn adjacency_basis(g: &Graph) -> Result<EigenBasis> {
    eig_normal_real(g.adjacency())
}

fn fourier_from_basis(v: &EigenBasis) -> CMat {
    v.eigenvectors.adjoint().to_owned()
}

/// `F = V⁻¹ = Vᴴ`.
pub fn gft_matrix(g: &Graph) -> Result<CMat> {
    Ok(fourier_from_basis(&adjacency_basis(g)?))
}

pub fn gft(g: &Graph, s: &GraphSignal) -> Result<GraphSignal> {
    g.check_signal(s)?;
    let v = adjacency_basis(g)?;
    Ok(GraphSignal::new(adjoint_mat_vec(
        &v.eigenvectors,
        s.values(),
    )))
}

pub fn igft(g: &Graph, s_hat: &GraphSignal) -> Result<GraphSignal> {
    g.check_signal(s_hat)?;
    let v = adjacency_basis(g)?;
    Ok(GraphSignal::new(mat_vec(&v.eigenvectors, s_hat.values())))
}

/// `Q · diag(λ^order) · Qᴴ` for a unitary eigenbasis.
pub fn fractional_power(basis: &EigenBasis, order: f64) -> Result<CMat> {
    let phases = frac_unitary_power(&basis.eigenvalues, order)?;
    let q = &basis.eigenvectors;
    Ok(scale_rows_cols(q, None, Some(&phases)) * q.adjoint())
}

/// `F^order` with `F` the graph Fourier matrix.
pub fn gfrft_matrix(g: &Graph, order: f64) -> Result<CMat> {
    let f = gft_matrix(g)?;
    fractional_power(&eig_normal(&f)?, order)
}

/// `Q_σ` for the scaling stage.
pub fn scaling_basis(g: &Graph, sigma: f64, options: &GlctOptions) -> Result<CMat> {
    let scaled = g.scaled(sigma)?;
    let v = adjacency_basis(&scaled)?;
    Ok(match options.scaling_mode {
        ScalingMode::GftEigenbasis => eig_normal(&fourier_from_basis(&v))?.eigenvectors,
        ScalingMode::AdjacencyEigenbasis => v.eigenvectors,
    })
}

fn sigma_key(sigma: f64) -> f64 {
    if (sigma - 1.0).abs() <= UNIT_SIGMA_TOL {
        1.0
    } else {
        sigma
    }
}

/// Where the adjacency eigenbases come from.
enum BasisSource {
    Graph(Graph),
    /// Closed-form eigenpairs of the directed cycle of this size.
    AnalyticCycle(usize),
}

/// Eigenbases of one graph, computed lazily and shared by every operator
/// built on that graph.
pub struct SpectralContext {
    source: BasisSource,
    n: usize,
    adjacency: RwLock<Option<Arc<EigenBasis>>>,
    fourier: RwLock<Option<Arc<EigenBasis>>>,
    scaling: RwLock<HashMap<(u64, ScalingMode), Arc<CMat>>>,
}

impl SpectralContext {
    pub fn new(graph: Graph) -> Self {
        let n = graph.n();
        Self::from_source(BasisSource::Graph(graph), n)
    }

    /// Context whose adjacency eigenpairs are the closed-form DFT basis of
    /// the directed `n`-cycle instead of a numerical eigendecomposition.
    pub fn analytic_cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize {
                size: n,
                reason: "cycle needs at least 2 vertices",
            });
        }
        Ok(Self::from_source(BasisSource::AnalyticCycle(n), n))
    }

    fn from_source(source: BasisSource, n: usize) -> Self {
        Self {
            source,
            n,
            adjacency: RwLock::new(None),
            fourier: RwLock::new(None),
            scaling: RwLock::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.source {
            BasisSource::Graph(g) => Some(g),
            BasisSource::AnalyticCycle(_) => None,
        }
    }

    fn scaled_adjacency_basis(&self, sigma: f64) -> Result<EigenBasis> {
        match &self.source {
            BasisSource::Graph(g) => adjacency_basis(&g.scaled(sigma)?),
            BasisSource::AnalyticCycle(n) => Ok(analytic_cycle_basis(*n, sigma)),
        }
    }

    /// Canonical eigenbasis `V` of the adjacency matrix.
    pub fn adjacency_basis(&self) -> Result<Arc<EigenBasis>> {
        cached(&self.adjacency, || self.scaled_adjacency_basis(1.0))
    }

    /// Canonical eigenbasis `(Q, Λ_F)` of `F = Vᴴ`.
    pub fn fourier_basis(&self) -> Result<Arc<EigenBasis>> {
        cached(&self.fourier, || {
            let v = self.adjacency_basis()?;
            eig_normal(&fourier_from_basis(&v))
        })
    }

    pub fn gft_matrix(&self) -> Result<CMat> {
        Ok(fourier_from_basis(&*self.adjacency_basis()?))
    }

    pub fn gfrft_matrix(&self, order: f64) -> Result<CMat> {
        fractional_power(&*self.fourier_basis()?, order)
    }

    /// `Q_σ` under the given scaling mode.
    pub fn scaling_basis(&self, sigma: f64, mode: ScalingMode) -> Result<Arc<CMat>> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let sigma = sigma_key(sigma);
        let key = (sigma.to_bits(), mode);
        if let Some(q) = self.scaling.read().unwrap().get(&key) {
            return Ok(q.clone());
        }
        let q = if sigma == 1.0 {
            match mode {
                ScalingMode::GftEigenbasis => self.fourier_basis()?.eigenvectors.clone(),
                ScalingMode::AdjacencyEigenbasis => self.adjacency_basis()?.eigenvectors.clone(),
            }
        } else {
            let v = self.scaled_adjacency_basis(sigma)?;
            match mode {
                ScalingMode::GftEigenbasis => eig_normal(&fourier_from_basis(&v))?.eigenvectors,
                ScalingMode::AdjacencyEigenbasis => v.eigenvectors,
            }
        };
        let q = Arc::new(q);
        self.scaling.write().unwrap().insert(key, q.clone());
        Ok(q)
    }

    pub fn operator(&self, params: &LctParams, options: &GlctOptions) -> Result<GlctOperator> {
        let decomposed = decompose_params(params)?;
        let adjacency = self.adjacency_basis()?;
        let fourier = self.fourier_basis()?;
        let q_sigma = self.scaling_basis(decomposed.sigma, options.scaling_mode)?;
        let chirp = chirp_diag(self.n, decomposed.xi, options);
        let phases = frac_unitary_power(&fourier.eigenvalues, decomposed.order())?;
        let matrix =
            scale_rows_cols(&q_sigma, None, Some(&phases)) * fourier.eigenvectors.adjoint();
        let matrix = scale_rows_cols(&matrix, Some(&chirp), None);
        Ok(GlctOperator {
            matrix,
            params: *params,
            decomposed,
            options: *options,
            adjacency_basis: adjacency,
            fourier_basis: fourier,
            scaling_basis: q_sigma,
            chirp,
            phases,
        })
    }
}

fn cached(
    slot: &RwLock<Option<Arc<EigenBasis>>>,
    build: impl FnOnce() -> Result<EigenBasis>,
) -> Result<Arc<EigenBasis>> {
    if let Some(b) = slot.read().unwrap().as_ref() {
        return Ok(b.clone());
    }
    let built = Arc::new(build()?);
    // Concurrent builders produce identical values; keep whichever landed first.
    let mut guard = slot.write().unwrap();
    Ok(guard.get_or_insert(built).clone())
}

/// Closed-form eigenpairs of `(1/σ)·C` for the directed `n`-cycle:
/// `u_k[m] = e^{j2πkm/n}/√n` with eigenvalue `e^{−j2πk/n}/σ`, canonicalized.
pub fn analytic_cycle_basis(n: usize, sigma: f64) -> EigenBasis {
    let scale = 1.0 / (n as f64).sqrt();
    let raw = EigenBasis {
        eigenvalues: (0..n)
            .map(|k| Complex64::from_polar(1.0 / sigma, -2.0 * PI * k as f64 / n as f64))
            .collect(),
        eigenvectors: Mat::from_fn(n, n, |m, k| {
            Complex64::from_polar(scale, 2.0 * PI * ((k * m) % n) as f64 / n as f64)
        }),
        source_kind: spectral::SourceKind::GeneralNormal,
    };
    spectral::canonicalize_eigenpairs(&raw)
}

/// The unitary DFT matrix `W[k][m] = e^{−j2πkm/n}/√n` in natural row order.
pub fn analytic_dft_matrix(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n, n, |k, m| {
        Complex64::from_polar(scale, -2.0 * PI * ((k * m) % n) as f64 / n as f64)
    })
}

/// GLCT operator together with the factors it was assembled from.
#[derive(Clone, Debug)]
pub struct GlctOperator {
    pub matrix: CMat,
    pub params: LctParams,
    pub decomposed: DecomposedParams,
    pub options: GlctOptions,
    /// `V` (eigenbasis of `A`).
    pub adjacency_basis: Arc<EigenBasis>,
    /// `Q`, `Λ_F` (eigenbasis of `F`).
    pub fourier_basis: Arc<EigenBasis>,
    /// `Q_σ`.
    pub scaling_basis: Arc<CMat>,
    chirp: Vec<Complex64>,
    phases: Vec<Complex64>,
}

impl GlctOperator {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        matrix: CMat,
        params: LctParams,
        decomposed: DecomposedParams,
        options: GlctOptions,
        adjacency_basis: Arc<EigenBasis>,
        fourier_basis: Arc<EigenBasis>,
        scaling_basis: Arc<CMat>,
        chirp: Vec<Complex64>,
        phases: Vec<Complex64>,
    ) -> Self {
        Self {
            matrix,
            params,
            decomposed,
            options,
            adjacency_basis,
            fourier_basis,
            scaling_basis,
            chirp,
            phases,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    fn check(&self, s: &GraphSignal) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: s.len(),
            });
        }
        Ok(())
    }

    /// `L·s`.
    pub fn apply(&self, s: &GraphSignal) -> Result<GraphSignal> {
        self.check(s)?;
        Ok(GraphSignal::new(mat_vec(&self.matrix, s.values())))
    }

    /// `Q · Λ^{−α} · Q_σᴴ · Λ_{−ξ} · ŝ`, evaluated factor by factor.
    pub fn apply_inverse(&self, s_hat: &GraphSignal) -> Result<GraphSignal> {
        self.check(s_hat)?;
        let x: Vec<Complex64> = s_hat
            .values()
            .iter()
            .zip(&self.chirp)
            .map(|(v, c)| v * c.conj())
            .collect();
        let y = adjoint_mat_vec(&self.scaling_basis, &x);
        let z: Vec<Complex64> = y
            .iter()
            .zip(&self.phases)
            .map(|(v, p)| v * p.conj())
            .collect();
        Ok(GraphSignal::new(mat_vec(
            &self.fourier_basis.eigenvectors,
            &z,
        )))
    }

    /// The inverse as an explicit matrix, built from the same factors.
    pub fn inverse_matrix(&self) -> CMat {
        let conj_phases: Vec<Complex64> = self.phases.iter().map(|p| p.conj()).collect();
        let conj_chirp: Vec<Complex64> = self.chirp.iter().map(|c| c.conj()).collect();
        let q = &self.fourier_basis.eigenvectors;
        let m = scale_rows_cols(q, None, Some(&conj_phases)) * self.scaling_basis.adjoint();
        scale_rows_cols(&m, None, Some(&conj_chirp))
    }

    /// Column `i`, which is also the transform of the delta at vertex `i`.
    pub fn column(&self, i: usize) -> Result<GraphSignal> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        Ok(GraphSignal::new(
            (0..self.n()).map(|r| self.matrix[(r, i)]).collect(),
        ))
    }

    pub fn chirp(&self) -> &[Complex64] {
        &self.chirp
    }

    pub fn fractional_phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn unitarity_defect(&self) -> f64 {
        spectral::unitarity_defect(&self.matrix)
    }
}

pub fn glct_operator(g: &Graph, params: &LctParams, options: &GlctOptions) -> Result<GlctOperator> {
    SpectralContext::new(g.clone()).operator(params, options)
}

pub fn glct(
    g: &Graph,
    s: &GraphSignal,
    params: &LctParams,
    options: &GlctOptions,
) -> Result<GraphSignal> {
    g.check_signal(s)?;
    OperatorCache::global()
        .operator(g, params, options)?
        .apply(s)
}

pub fn iglct(
    g: &Graph,
    s_hat: &GraphSignal,
    params: &LctParams,
    options: &GlctOptions,
) -> Result<GraphSignal> {
    g.check_signal(s_hat)?;
    OperatorCache::global()
        .operator(g, params, options)?
        .apply_inverse(s_hat)
}

/// The same three-stage cascade built from the analytic DFT basis of the
/// directed `n`-cycle. No numerical eigendecomposition of a graph is
/// involved: `V` is closed-form, and only the analytic Fourier matrix `Vᴴ`
/// is eigendecomposed.
pub fn dlct_reference(n: usize, params: &LctParams, options: &GlctOptions) -> Result<CMat> {
    if n < 2 {
        return Err(Error::InvalidSize {
            size: n,
            reason: "reference transform needs n >= 2",
        });
    }
    let dp = decompose_params(params)?;
    let v = analytic_cycle_basis(n, 1.0);
    let dft = v.eigenvectors.adjoint().to_owned();
    let q = eig_normal(&dft)?;
    let q_sigma = {
        let vs = analytic_cycle_basis(n, sigma_key(dp.sigma));
        match options.scaling_mode {
            ScalingMode::GftEigenbasis => {
                eig_normal(&vs.eigenvectors.adjoint().to_owned())?.eigenvectors
            }
            ScalingMode::AdjacencyEigenbasis => vs.eigenvectors,
        }
    };
    let chirp = chirp_diag(n, dp.xi, options);
    let rot = frac_unitary_power(&q.eigenvalues, dp.order())?;
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            let mut acc = c64(0.0, 0.0);
            for k in 0..n {
                acc += q_sigma[(r, k)] * rot[k] * q.eigenvectors[(col, k)].conj();
            }
            out[(r, col)] = chirp[r] * acc;
        }
    }
    Ok(out)
}
