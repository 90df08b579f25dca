//! Deterministic eigendecomposition of normal matrices.
//!
//! Every transform in this crate is assembled from unitary eigenbases, so the
//! eigensolver only accepts normal input and always returns an orthonormal
//! basis in a canonical order and phase.
//!
//! Real symmetric input goes straight to a symmetric solver. Any other normal
//! matrix `M` is split into its commuting Hermitian parts
//! `H = (M + Mᴴ)/2` and `K = (M − Mᴴ)/2j`. `H` is diagonalized first; each
//! cluster of nearly equal `H` eigenvalues spans an `M`-invariant subspace,
//! and `M` restricted to that subspace is resolved by diagonalizing `K` there.
//! Both steps are Hermitian eigenproblems, so the result stays orthonormal
//! even inside degenerate clusters.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

/// Eigenvalues closer than this are one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Entries at or below this modulus are skipped by the phase rule.
pub const PHASE_TOL: f64 = 1e-10;
/// Relative tolerance of the normality precondition.
pub const NORMALITY_TOL: f64 = 1e-8;
/// Allowed deviation from unit modulus for fractional powers.
pub const UNIT_MODULUS_TOL: f64 = 1e-8;
/// Arguments within this distance of −π are read as +π.
pub const BRANCH_TOL: f64 = 1e-9;

/// Gap (relative to the spectral scale) that separates clusters of the
/// Hermitian part in the general solver.
const SPLIT_GAP: f64 = 1e-5;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    SymmetricReal,
    GeneralNormal,
}

/// Eigenvalues with a unitary eigenvector matrix (columns are eigenvectors).
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: CMat,
    pub source_kind: SourceKind,
}

impl EigenBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |M·V − V·diag(λ)|`.
    pub fn residual(&self, m: &CMat) -> f64 {
        let mv = m * &self.eigenvectors;
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let d = mv[(i, j)] - self.eigenvectors[(i, j)] * self.eigenvalues[j];
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Eigendecomposition of a normal complex matrix, canonicalized.
pub fn eig_normal(m: &CMat) -> Result<EigenBasis> {
    check_square(m.nrows(), m.ncols())?;
    check_finite_c(m)?;
    if m.col_iter().all(|c| c.iter().all(|z| z.im == 0.0)) {
        let real = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        return eig_normal_real(&real);
    }
    let n = m.nrows();
    let hermitian = (0..n).all(|j| (j..n).all(|i| m[(i, j)] == m[(j, i)].conj()));
    let raw = if hermitian {
        hermitian_eig(m)?
    } else {
        check_normal_c(m)?;
        split_eig_complex(m)?
    };
    Ok(canonicalize_eigenpairs(&raw))
}

/// Eigendecomposition of a normal real matrix, canonicalized.
pub fn eig_normal_real(m: &Mat<f64>) -> Result<EigenBasis> {
    check_square(m.nrows(), m.ncols())?;
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let symmetric = (0..n).all(|j| (j + 1..n).all(|i| m[(i, j)] == m[(j, i)]));
    let raw = if symmetric {
        symmetric_eig(m)?
    } else {
        check_normal_r(m)?;
        split_eig_real(m)?
    };
    Ok(canonicalize_eigenpairs(&raw))
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    if rows == 0 {
        return Err(Error::InvalidSize {
            size: 0,
            reason: "empty matrix",
        });
    }
    Ok(())
}

fn check_finite_c(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !(m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// `max |M·Mᴴ − Mᴴ·M|` for a complex matrix.
pub fn normality_residual(m: &CMat) -> f64 {
    let a = m * m.adjoint();
    let b = m.adjoint() * m;
    max_abs_diff(&a, &b)
}

fn normality_tolerance(max_entry: f64) -> f64 {
    NORMALITY_TOL * (1.0 + max_entry).powi(2)
}

fn check_normal_c(m: &CMat) -> Result<()> {
    let residual = normality_residual(m);
    let tolerance = normality_tolerance(max_abs(m));
    if residual > tolerance {
        return Err(Error::NonNormal {
            residual,
            tolerance,
        });
    }
    Ok(())
}

fn check_normal_r(m: &Mat<f64>) -> Result<()> {
    let a = m * m.transpose();
    let b = m.transpose() * m;
    let mut residual = 0.0f64;
    let mut max_entry = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            residual = residual.max((a[(i, j)] - b[(i, j)]).abs());
            max_entry = max_entry.max(m[(i, j)].abs());
        }
    }
    let tolerance = normality_tolerance(max_entry);
    if residual > tolerance {
        return Err(Error::NonNormal {
            residual,
            tolerance,
        });
    }
    Ok(())
}

fn symmetric_eig(m: &Mat<f64>) -> Result<EigenBasis> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = evd.S();
    let u = evd.U();
    Ok(EigenBasis {
        eigenvalues: (0..n).map(|k| c64(s[k], 0.0)).collect(),
        eigenvectors: Mat::from_fn(n, n, |i, j| c64(u[(i, j)], 0.0)),
        source_kind: SourceKind::SymmetricReal,
    })
}

fn hermitian_eig(m: &CMat) -> Result<EigenBasis> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = evd.S();
    Ok(EigenBasis {
        eigenvalues: (0..n).map(|k| c64(s[k].re, 0.0)).collect(),
        eigenvectors: evd.U().to_owned(),
        source_kind: SourceKind::GeneralNormal,
    })
}

/// Runs of consecutive ascending values whose neighbour gaps are at most `gap`.
fn ascending_runs(values: &[f64], gap: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            runs.push((start, i));
            start = i;
        }
    }
    runs
}

fn split_eig_real(m: &Mat<f64>) -> Result<EigenBasis> {
    let n = m.nrows();
    let h = Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let hs: Vec<f64> = (0..n).map(|k| evd.S()[k]).collect();
    let u = evd.U().to_owned();
    let mu = m * &u;
    let uc = Mat::from_fn(n, n, |i, j| c64(u[(i, j)], 0.0));
    let muc = Mat::from_fn(n, n, |i, j| c64(mu[(i, j)], 0.0));
    resolve_clusters(&uc, &muc, &hs)
}

fn split_eig_complex(m: &CMat) -> Result<EigenBasis> {
    let n = m.nrows();
    let h = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let hs: Vec<f64> = (0..n).map(|k| evd.S()[k].re).collect();
    let u = evd.U().to_owned();
    let mu = m * &u;
    resolve_clusters(&u, &mu, &hs)
}

/// Given an orthonormal `U` diagonalizing the Hermitian part and `M·U`,
/// resolves each cluster of the Hermitian spectrum into eigenpairs of `M`.
fn resolve_clusters(u: &CMat, mu: &CMat, hs: &[f64]) -> Result<EigenBasis> {
    let n = u.nrows();
    let scale = 1.0 + hs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut eigenvalues = vec![c64(0.0, 0.0); n];
    let mut vectors = CMat::zeros(n, n);
    for (start, end) in ascending_runs(hs, SPLIT_GAP * scale) {
        let k = end - start;
        if k == 1 {
            let mut lam = c64(0.0, 0.0);
            for i in 0..n {
                lam += u[(i, start)].conj() * mu[(i, start)];
            }
            eigenvalues[start] = lam;
            for i in 0..n {
                vectors[(i, start)] = u[(i, start)];
            }
            continue;
        }
        // Restriction of M to the cluster subspace.
        let restricted = Mat::from_fn(k, k, |a, b| {
            let mut acc = c64(0.0, 0.0);
            for i in 0..n {
                acc += u[(i, start + a)].conj() * mu[(i, start + b)];
            }
            acc
        });
        let z = diagonalize_cluster(&restricted, scale)?;
        for b in 0..k {
            let mut lam = c64(0.0, 0.0);
            for a in 0..k {
                for a2 in 0..k {
                    lam += z[(a, b)].conj() * restricted[(a, a2)] * z[(a2, b)];
                }
            }
            eigenvalues[start + b] = lam;
            for i in 0..n {
                let mut acc = c64(0.0, 0.0);
                for a in 0..k {
                    acc += u[(i, start + a)] * z[(a, b)];
                }
                vectors[(i, start + b)] = acc;
            }
        }
    }
    Ok(EigenBasis {
        eigenvalues,
        eigenvectors: vectors,
        source_kind: SourceKind::GeneralNormal,
    })
}

/// Unitary `Z` diagonalizing a small normal matrix whose Hermitian part is
/// nearly scalar: eigenvectors of the skew part `(M − Mᴴ)/2j`, with ties in
/// that spectrum split by the Hermitian part.
fn diagonalize_cluster(m: &CMat, scale: f64) -> Result<CMat> {
    let k = m.nrows();
    let skew = Mat::from_fn(k, k, |a, b| (m[(a, b)] - m[(b, a)].conj()) * c64(0.0, -0.5));
    let herm = Mat::from_fn(k, k, |a, b| (m[(a, b)] + m[(b, a)].conj()) * 0.5);
    let ks = hermitian_eig(&skew)?;
    let ksv: Vec<f64> = ks.eigenvalues.iter().map(|z| z.re).collect();
    let mut z = ks.eigenvectors;
    for (s, e) in ascending_runs(&ksv, SPLIT_GAP * scale) {
        if e - s < 2 {
            continue;
        }
        let zs = z.subcols(s, e - s).to_owned();
        let hr = zs.adjoint() * &herm * &zs;
        let hr = Mat::from_fn(e - s, e - s, |a, b| (hr[(a, b)] + hr[(b, a)].conj()) * 0.5);
        let w = hermitian_eig(&hr)?.eigenvectors;
        let rotated = &zs * &w;
        z.subcols_mut(s, e - s).copy_from(&rotated);
    }
    Ok(z)
}

/// Canonical eigenpair order: descending real part, then descending
/// imaginary part, then original index. Parts within [`DEGENERACY_TOL`] of
/// each other compare equal.
fn canonical_order(eigenvalues: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        eigenvalues[b]
            .re
            .total_cmp(&eigenvalues[a].re)
            .then(a.cmp(&b))
    });
    let mut out = Vec::with_capacity(idx.len());
    for run in tolerance_runs(&idx, |i| eigenvalues[i].re) {
        let mut run = run.to_vec();
        run.sort_by(|&a, &b| {
            eigenvalues[b]
                .im
                .total_cmp(&eigenvalues[a].im)
                .then(a.cmp(&b))
        });
        for sub in tolerance_runs(&run, |i| eigenvalues[i].im) {
            let mut sub = sub.to_vec();
            sub.sort_unstable();
            out.extend(sub);
        }
    }
    out
}

/// Splits a sorted index list into chains whose consecutive keys differ by
/// at most [`DEGENERACY_TOL`].
fn tolerance_runs(sorted: &[usize], key: impl Fn(usize) -> f64) -> Vec<&[usize]> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || (key(sorted[i]) - key(sorted[i - 1])).abs() > DEGENERACY_TOL {
            runs.push(&sorted[start..i]);
            start = i;
        }
    }
    runs
}

/// Puts an eigenbasis into canonical form.
///
/// Pairs are sorted by [`canonical_order`]. Inside each cluster of
/// eigenvalues equal within [`DEGENERACY_TOL`] the basis is rebuilt from the
/// projections of the coordinate vectors onto the cluster subspace, taken
/// sequentially (first coordinate whose remaining projection is at least half
/// the largest one), so the result depends only on the subspace. Finally each
/// vector is rotated so its first entry above [`PHASE_TOL`] is real positive.
pub fn canonicalize_eigenpairs(basis: &EigenBasis) -> EigenBasis {
    let n = basis.n();
    let order = canonical_order(&basis.eigenvalues);
    let mut eigenvalues: Vec<Complex64> = order.iter().map(|&k| basis.eigenvalues[k]).collect();
    let mut vectors = Mat::from_fn(n, n, |i, j| basis.eigenvectors[(i, order[j])]);

    let mut start = 0;
    for i in 1..=n {
        if i == n || (eigenvalues[i] - eigenvalues[i - 1]).norm() > DEGENERACY_TOL {
            if i - start > 1 {
                rebase_cluster(&mut vectors, start, i);
                let mean = eigenvalues[start..i].iter().sum::<Complex64>() / (i - start) as f64;
                eigenvalues[start..i].iter_mut().for_each(|v| *v = mean);
            }
            start = i;
        }
    }

    for j in 0..n {
        fix_phase(&mut vectors, j);
    }
    EigenBasis {
        eigenvalues,
        eigenvectors: vectors,
        source_kind: basis.source_kind,
    }
}

fn rebase_cluster(vectors: &mut CMat, start: usize, end: usize) {
    let n = vectors.nrows();
    let k = end - start;
    // Row i of the residual matrix holds the coefficients of P·e_i in the
    // cluster basis, with the chosen directions projected out.
    let mut resid: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (start..end).map(|j| vectors[(i, j)].conj()).collect())
        .collect();
    let mut chosen: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let norms: Vec<f64> = resid
            .iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let max = norms.iter().cloned().fold(0.0f64, f64::max);
        let pick = norms.iter().position(|&v| v >= 0.5 * max).unwrap_or(0);
        let mut w = resid[pick].clone();
        for prev in &chosen {
            let dot: Complex64 = prev.iter().zip(&w).map(|(p, x)| p.conj() * x).sum();
            w.iter_mut().zip(prev).for_each(|(x, p)| *x -= p * dot);
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        for r in resid.iter_mut() {
            let dot: Complex64 = w.iter().zip(r.iter()).map(|(p, x)| p.conj() * x).sum();
            r.iter_mut().zip(&w).for_each(|(x, p)| *x -= p * dot);
        }
        chosen.push(w);
    }
    let old: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (start..end).map(|j| vectors[(i, j)]).collect())
        .collect();
    for (b, w) in chosen.iter().enumerate() {
        for (i, row) in old.iter().enumerate() {
            vectors[(i, start + b)] = row.iter().zip(w).map(|(v, c)| v * c).sum();
        }
    }
}

fn fix_phase(vectors: &mut CMat, j: usize) {
    let n = vectors.nrows();
    if let Some(i) = (0..n).find(|&i| vectors[(i, j)].norm() > PHASE_TOL) {
        let z = vectors[(i, j)];
        let rot = z.conj() / z.norm();
        for r in 0..n {
            vectors[(r, j)] *= rot;
        }
        // Exactly real on the pivot entry.
        vectors[(i, j)] = c64(vectors[(i, j)].norm(), 0.0);
    }
}

/// Principal argument in (−π, π], reading anything within [`BRANCH_TOL`] of −π as +π.
pub fn principal_arg(z: Complex64) -> f64 {
    let theta = z.im.atan2(z.re);
    if theta <= -PI + BRANCH_TOL {
        PI
    } else {
        theta
    }
}

/// `λ_k^order` on the principal branch for unit-modulus `λ_k`.
pub fn frac_unitary_power(eigenvalues: &[Complex64], order: f64) -> Result<Vec<Complex64>> {
    eigenvalues
        .iter()
        .enumerate()
        .map(|(index, &lam)| {
            let modulus = lam.norm();
            if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::NotUnitModulus { index, modulus });
            }
            let theta = principal_arg(lam / modulus);
            Ok(Complex64::from_polar(1.0, order * theta))
        })
        .collect()
}

/// `max |M·Mᴴ − I|`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let p = m * m.adjoint();
    let mut worst = 0.0f64;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            let target = if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMat) -> f64 {
    m.col_iter()
        .flat_map(|c| c.iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(
        (a.nrows(), a.ncols()),
        (b.nrows(), b.ncols()),
        "shape mismatch"
    );
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(
        n,
        n,
        |i, j| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) },
    )
}

pub fn to_complex(m: &Mat<f64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64(m[(i, j)], 0.0))
}

/// `diag(left) · M · diag(right)`; either side may be omitted.
pub(crate) fn scale_rows_cols(
    m: &CMat,
    left: Option<&[Complex64]>,
    right: Option<&[Complex64]>,
) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let mut z = m[(i, j)];
        if let Some(l) = left {
            z *= l[i];
        }
        if let Some(r) = right {
            z *= r[j];
        }
        z
    })
}

pub(crate) fn mat_vec(m: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c64(0.0, 0.0); m.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == c64(0.0, 0.0) {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * xj;
        }
    }
    out
}

pub(crate) fn adjoint_mat_vec(m: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].conj() * x[i]).sum())
        .collect()
}
