//! Graph model, fixture generators and the graph shift.
//!
//! Adjacency matrices are stored dense. Entry `(n, m)` is the weight of the
//! edge from vertex `m` to vertex `n`, so the shift `A·s` pulls values along
//! incoming edges.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Mat<f64>,
    directed: bool,
    coords: Option<Vec<(f64, f64)>>,
}

impl Graph {
    /// Builds a graph from a dense adjacency matrix.
    ///
    /// Undirected graphs must have an exactly symmetric adjacency.
    pub fn new(adjacency: Mat<f64>, directed: bool) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 {
            return Err(Error::InvalidSize {
                size: 0,
                reason: "graph needs at least one vertex",
            });
        }
        if adjacency.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: adjacency.ncols(),
            });
        }
        for j in 0..n {
            for i in 0..n {
                if !adjacency[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        if !directed {
            for j in 0..n {
                for i in (j + 1)..n {
                    if adjacency[(i, j)] != adjacency[(j, i)] {
                        return Err(Error::Asymmetric { row: i, col: j });
                    }
                }
            }
        }
        Ok(Self {
            adjacency,
            directed,
            coords: None,
        })
    }

    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Mat<f64> {
        &self.adjacency
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// True when the adjacency equals its transpose entrywise.
    pub fn is_symmetric(&self) -> bool {
        let a = &self.adjacency;
        (0..self.n()).all(|j| (j + 1..self.n()).all(|i| a[(i, j)] == a[(j, i)]))
    }

    /// Number of stored (nonzero) adjacency entries.
    pub fn nnz(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .filter(|&(i, j)| self.adjacency[(i, j)] != 0.0)
            .count()
    }

    /// Content digest over size, direction flag and the exact adjacency bits.
    pub fn digest(&self) -> [u8; 32] {
        let n = self.n();
        let mut hasher = Sha256::new();
        hasher.update(b"glct-graph-v1");
        hasher.update((n as u64).to_le_bytes());
        hasher.update([self.directed as u8]);
        for i in 0..n {
            for j in 0..n {
                hasher.update(self.adjacency[(i, j)].to_bits().to_le_bytes());
            }
        }
        hasher.finalize().into()
    }

    /// Returns `A·s`.
    pub fn shift(&self, s: &GraphSignal) -> Result<GraphSignal> {
        self.check_signal(s)?;
        let n = self.n();
        let values = (0..n)
            .map(|row| {
                (0..n)
                    .filter(|&col| self.adjacency[(row, col)] != 0.0)
                    .map(|col| s.values[col] * self.adjacency[(row, col)])
                    .sum()
            })
            .collect();
        Ok(GraphSignal::new(values))
    }

    /// The graph with adjacency `(1/σ)·A`; structure flags and coordinates carry over.
    pub fn scaled(&self, sigma: f64) -> Result<Graph> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let inv = 1.0 / sigma;
        let adjacency = Mat::from_fn(self.n(), self.n(), |i, j| self.adjacency[(i, j)] * inv);
        Ok(Graph {
            adjacency,
            directed: self.directed,
            coords: self.coords.clone(),
        })
    }

    pub fn check_signal(&self, s: &GraphSignal) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: s.len(),
            });
        }
        Ok(())
    }
}

pub fn graph_shift(g: &Graph, s: &GraphSignal) -> Result<GraphSignal> {
    g.shift(s)
}

pub fn scaled_adjacency(g: &Graph, sigma: f64) -> Result<Graph> {
    g.scaled(sigma)
}

/// A complex vertex signal.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSignal {
    values: Vec<Complex64>,
}

impl GraphSignal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GraphSignal) -> f64 {
        assert_eq!(self.len(), other.len(), "signal lengths differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &GraphSignal) -> Result<GraphSignal> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(GraphSignal::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> GraphSignal {
        GraphSignal::new(self.values.iter().map(|v| v * factor).collect())
    }
}

/// Directed cycle: `A[n][m] = 1` iff `n - m ≡ 1 (mod N)`.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            size: n,
            reason: "cycle graph needs at least 2 vertices",
        });
    }
    let adjacency = Mat::from_fn(n, n, |i, j| if i == (j + 1) % n { 1.0 } else { 0.0 });
    Graph::new(adjacency, true)
}

/// Undirected path with unit weights.
pub fn path_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            size: n,
            reason: "path graph needs at least 2 vertices",
        });
    }
    let adjacency = Mat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    Graph::new(adjacency, false)
}

/// Undirected Erdős–Rényi graph. Edge weights are 1, or uniform in
/// `weight_range` when given.
pub fn erdos_renyi<R: Rng + ?Sized>(
    n: usize,
    edge_prob: f64,
    weight_range: Option<(f64, f64)>,
    rng: &mut R,
) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            size: n,
            reason: "random graph needs at least 2 vertices",
        });
    }
    let mut adjacency = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                let w = match weight_range {
                    Some((lo, hi)) => rng.gen_range(lo..hi),
                    None => 1.0,
                };
                adjacency[(i, j)] = w;
                adjacency[(j, i)] = w;
            }
        }
    }
    Graph::new(adjacency, false)
}

/// Road-network-like fixture: uniform points in the unit square, each joined
/// to its `k` nearest neighbours (symmetrized, unit weights). Coordinates are
/// attached for plotting.
pub fn geometric_knn<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            size: n,
            reason: "geometric graph needs at least 2 vertices",
        });
    }
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let k = k.min(n - 1);
    let mut adjacency = Mat::<f64>::zeros(n, n);
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (i, &(xi, yi)) in coords.iter().enumerate() {
        dists.clear();
        dists.extend(
            coords
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &(xj, yj))| ((xi - xj).powi(2) + (yi - yj).powi(2), j)),
        );
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in dists.iter().take(k) {
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
    }
    Graph::new(adjacency, false)?.with_coords(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(g: &Graph) -> Vec<Vec<f64>> {
        (0..g.n())
            .map(|i| (0..g.n()).map(|j| g.adjacency()[(i, j)]).collect())
            .collect()
    }

    #[test]
    fn cycle_three_matches_shift_rule() {
        let g = cycle_graph(3).unwrap();
        assert_eq!(
            dense(&g),
            vec![
                vec![0.0, 0.0, 1.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0]
            ]
        );
        assert!(g.is_directed());
    }

    #[test]
    fn cycle_two_and_four() {
        assert_eq!(
            dense(&cycle_graph(2).unwrap()),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        let g = cycle_graph(4).unwrap();
        for i in 0..4 {
            let row: f64 = (0..4).map(|j| g.adjacency()[(i, j)]).sum();
            let col: f64 = (0..4).map(|j| g.adjacency()[(j, i)]).sum();
            assert_eq!(row, 1.0);
            assert_eq!(col, 1.0);
        }
        assert!(cycle_graph(1).is_err());
    }

    #[test]
    fn path_fixtures() {
        assert_eq!(
            dense(&path_graph(3).unwrap()),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0]
            ]
        );
        assert_eq!(
            dense(&path_graph(2).unwrap()),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert!(matches!(path_graph(1), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn shift_examples() {
        let c = cycle_graph(3).unwrap();
        let out = c.shift(&GraphSignal::from_real(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(out, GraphSignal::from_real(&[0.0, 1.0, 0.0]));

        let p = path_graph(3).unwrap();
        let out = p.shift(&GraphSignal::from_real(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(out, GraphSignal::from_real(&[1.0, 2.0, 1.0]));

        assert_eq!(
            p.shift(&GraphSignal::zeros(3)).unwrap(),
            GraphSignal::zeros(3)
        );
        assert!(matches!(
            p.shift(&GraphSignal::zeros(2)),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn scaling() {
        let c = cycle_graph(3).unwrap();
        assert_eq!(dense(&c.scaled(1.0).unwrap()), dense(&c));
        let half = c.scaled(2.0).unwrap();
        for row in dense(&half) {
            for v in row {
                assert!(v == 0.0 || v == 0.5);
            }
        }
        assert!(half.is_directed());
        assert!(matches!(c.scaled(0.0), Err(Error::NonPositiveSigma(_))));
        assert!(c.scaled(-1.0).is_err());
    }

    #[test]
    fn rejects_asymmetric_undirected() {
        let mut a = Mat::<f64>::zeros(2, 2);
        a[(0, 1)] = 1.0;
        assert!(matches!(
            Graph::new(a.clone(), false),
            Err(Error::Asymmetric { .. })
        ));
        assert!(Graph::new(a, true).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Mat::<f64>::zeros(2, 2);
        a[(1, 1)] = f64::NAN;
        assert!(matches!(
            Graph::new(a, true),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn self_loops_allowed() {
        let mut a = Mat::<f64>::zeros(2, 2);
        a[(0, 0)] = 2.0;
        assert!(Graph::new(a, false).is_ok());
    }

    #[test]
    fn digest_tracks_content() {
        let a = path_graph(4).unwrap();
        let b = path_graph(4).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), a.scaled(2.0).unwrap().digest());
        assert_ne!(a.digest(), cycle_graph(4).unwrap().digest());
    }

    #[test]
    fn generators_are_symmetric() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let g = erdos_renyi(20, 0.3, Some((0.5, 1.5)), &mut rng).unwrap();
        assert!(g.is_symmetric());
        let g = geometric_knn(50, 2, &mut rng).unwrap();
        assert!(g.is_symmetric());
        assert_eq!(g.coords().unwrap().len(), 50);
        assert!(g.nnz() >= 50);
    }
}
