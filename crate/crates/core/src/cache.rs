//! Content-addressed operator cache with an optional on-disk store.
//!
//! Operators are keyed by graph digest, the exact bits of `(a, b, c, d)` and
//! the transform options. When a store directory is configured every built
//! operator is also written there and later processes load it instead of
//! redoing the eigendecompositions.
//!
//! Store record layout (all integers and floats little-endian):
//!
//! ```text
//! b"GLCTOP1\0"
//! n: u64
//! a, b, c, d, xi, sigma, alpha: f64
//! chirp_mode: u8, scaling_mode: u8, chirp_offset: f64
//! adjacency source kind: u8, fourier source kind: u8
//! complex arrays as (re, im) f64 pairs:
//!     matrix[n²] chirp[n] phases[n]
//!     adjacency eigenvalues[n] adjacency eigenvectors[n²]
//!     fourier eigenvalues[n] fourier eigenvectors[n²]
//!     scaling basis[n²]
//! sha256 of everything above: [u8; 32]
//! ```
//! Matrices are stored row-major.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use faer::Mat;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::{DecomposedParams, LctParams};
use crate::spectral::{CMat, EigenBasis, SourceKind};
use crate::transforms::{ChirpMode, GlctOperator, GlctOptions, ScalingMode, SpectralContext};

pub const STORE_MAGIC: &[u8; 8] = b"GLCTOP1\0";
pub const CACHE_DIR_ENV: &str = "GLCT_CACHE_DIR";

const HEADER_LEN: usize = 8 + 8 + 7 * 8 + 2 + 8 + 2;
const TRAILER_LEN: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OperatorKey {
    graph: [u8; 32],
    params: [u64; 4],
    chirp_mode: ChirpMode,
    scaling_mode: ScalingMode,
    chirp_offset: u64,
}

impl OperatorKey {
    pub fn new(graph_digest: [u8; 32], params: &LctParams, options: &GlctOptions) -> Self {
        Self {
            graph: graph_digest,
            params: params.as_array().map(f64::to_bits),
            chirp_mode: options.chirp_mode,
            scaling_mode: options.scaling_mode,
            chirp_offset: options.chirp_offset.to_bits(),
        }
    }

    /// Hex file stem for the on-disk store.
    pub fn file_stem(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.graph);
        for p in self.params {
            h.update(p.to_le_bytes());
        }
        h.update([self.chirp_mode as u8, self.scaling_mode as u8]);
        h.update(self.chirp_offset.to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Default)]
pub struct OperatorCache {
    contexts: RwLock<HashMap<[u8; 32], Arc<SpectralContext>>>,
    operators: RwLock<HashMap<OperatorKey, Arc<GlctOperator>>>,
    dir: Option<PathBuf>,
}

impl OperatorCache {
    /// In-memory only.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            ..Self::default()
        }
    }

    /// Uses `GLCT_CACHE_DIR` when set and non-empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(d),
            _ => Self::new(),
        }
    }

    /// Process-wide cache, configured from the environment on first use.
    pub fn global() -> &'static OperatorCache {
        static GLOBAL: OnceLock<OperatorCache> = OnceLock::new();
        GLOBAL.get_or_init(Self::from_env)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.operators.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn context(&self, g: &Graph) -> Arc<SpectralContext> {
        let digest = g.digest();
        if let Some(c) = self.contexts.read().unwrap().get(&digest) {
            return c.clone();
        }
        let ctx = Arc::new(SpectralContext::new(g.clone()));
        self.contexts
            .write()
            .unwrap()
            .entry(digest)
            .or_insert(ctx)
            .clone()
    }

    pub fn operator(
        &self,
        g: &Graph,
        params: &LctParams,
        options: &GlctOptions,
    ) -> Result<Arc<GlctOperator>> {
        let key = OperatorKey::new(g.digest(), params, options);
        if let Some(op) = self.operators.read().unwrap().get(&key) {
            return Ok(op.clone());
        }
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(format!("{}.glctop", key.file_stem())));
        let loaded = path
            .as_ref()
            .and_then(|p| fs::read(p).ok())
            .and_then(|bytes| decode_operator(&bytes).ok())
            .filter(|op| op.n() == g.n() && op.params == *params && op.options == *options);
        let op = match loaded {
            Some(op) => op,
            None => {
                let op = self.context(g).operator(params, options)?;
                if let Some(p) = &path {
                    write_atomic(p, &encode_operator(&op))?;
                }
                op
            }
        };
        let op = Arc::new(op);
        self.operators.write().unwrap().insert(key, op.clone());
        Ok(op)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn kind_byte(k: SourceKind) -> u8 {
    match k {
        SourceKind::SymmetricReal => 0,
        SourceKind::GeneralNormal => 1,
    }
}

fn kind_from(b: u8) -> Result<SourceKind> {
    match b {
        0 => Ok(SourceKind::SymmetricReal),
        1 => Ok(SourceKind::GeneralNormal),
        _ => Err(Error::Store(format!("bad source kind {b}"))),
    }
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_vec(out: &mut Vec<u8>, v: &[Complex64]) {
    for z in v {
        put_f64(out, z.re);
        put_f64(out, z.im);
    }
}

fn put_mat(out: &mut Vec<u8>, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            put_f64(out, m[(i, j)].re);
            put_f64(out, m[(i, j)].im);
        }
    }
}

pub fn encode_operator(op: &GlctOperator) -> Vec<u8> {
    let n = op.n();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * (4 * n * n + 4 * n) + TRAILER_LEN);
    out.extend_from_slice(STORE_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for v in op.params.as_array() {
        put_f64(&mut out, v);
    }
    let d = op.decomposed;
    for v in [d.xi, d.sigma, d.alpha] {
        put_f64(&mut out, v);
    }
    out.push(op.options.chirp_mode as u8);
    out.push(op.options.scaling_mode as u8);
    put_f64(&mut out, op.options.chirp_offset);
    out.push(kind_byte(op.adjacency_basis.source_kind));
    out.push(kind_byte(op.fourier_basis.source_kind));
    put_mat(&mut out, &op.matrix);
    put_vec(&mut out, op.chirp());
    put_vec(&mut out, op.fractional_phases());
    put_vec(&mut out, &op.adjacency_basis.eigenvalues);
    put_mat(&mut out, &op.adjacency_basis.eigenvectors);
    put_vec(&mut out, &op.fourier_basis.eigenvalues);
    put_mat(&mut out, &op.fourier_basis.eigenvectors);
    put_mat(&mut out, &op.scaling_basis);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> &[u8] {
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        s
    }

    fn u8(&mut self) -> u8 {
        self.take(1)[0]
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take(8).try_into().unwrap())
    }

    fn c64(&mut self) -> Complex64 {
        let re = self.f64();
        Complex64::new(re, self.f64())
    }

    fn vec(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.c64()).collect()
    }

    fn mat(&mut self, n: usize) -> CMat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.c64();
            }
        }
        m
    }
}

fn expected_len(n: u64) -> Option<usize> {
    let n = usize::try_from(n).ok()?;
    let entries = n
        .checked_mul(n)?
        .checked_mul(4)?
        .checked_add(n.checked_mul(4)?)?;
    entries
        .checked_mul(16)?
        .checked_add(HEADER_LEN + TRAILER_LEN)
}

pub fn decode_operator(bytes: &[u8]) -> Result<GlctOperator> {
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(Error::Store(format!(
            "truncated record ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..8] != STORE_MAGIC {
        return Err(Error::Store("bad magic".into()));
    }
    let n64 = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    match expected_len(n64) {
        Some(len) if len == bytes.len() => {}
        _ => {
            return Err(Error::Store(format!(
                "length {} does not match n = {n64}",
                bytes.len()
            )))
        }
    }
    if n64 == 0 {
        return Err(Error::Store("empty operator".into()));
    }
    let body = bytes.len() - TRAILER_LEN;
    if Sha256::digest(&bytes[..body]).as_slice() != &bytes[body..] {
        return Err(Error::Store("checksum mismatch".into()));
    }
    let n = n64 as usize;
    let mut r = Reader {
        buf: bytes,
        pos: 16,
    };
    let params = LctParams {
        a: r.f64(),
        b: r.f64(),
        c: r.f64(),
        d: r.f64(),
    };
    let decomposed = DecomposedParams {
        xi: r.f64(),
        sigma: r.f64(),
        alpha: r.f64(),
    };
    let chirp_mode = match r.u8() {
        0 => ChirpMode::SpectralIndex,
        1 => ChirpMode::VertexNormalized,
        b => return Err(Error::Store(format!("bad chirp mode {b}"))),
    };
    let scaling_mode = match r.u8() {
        0 => ScalingMode::GftEigenbasis,
        1 => ScalingMode::AdjacencyEigenbasis,
        b => return Err(Error::Store(format!("bad scaling mode {b}"))),
    };
    let options = GlctOptions {
        chirp_mode,
        scaling_mode,
        chirp_offset: r.f64(),
    };
    let v_kind = kind_from(r.u8())?;
    let q_kind = kind_from(r.u8())?;
    let matrix = r.mat(n);
    let chirp = r.vec(n);
    let phases = r.vec(n);
    let adjacency = EigenBasis {
        eigenvalues: r.vec(n),
        eigenvectors: r.mat(n),
        source_kind: v_kind,
    };
    let fourier = EigenBasis {
        eigenvalues: r.vec(n),
        eigenvectors: r.mat(n),
        source_kind: q_kind,
    };
    let scaling = r.mat(n);
    Ok(GlctOperator::from_parts(
        matrix,
        params,
        decomposed,
        options,
        Arc::new(adjacency),
        Arc::new(fourier),
        Arc::new(scaling),
        chirp,
        phases,
    ))
}
