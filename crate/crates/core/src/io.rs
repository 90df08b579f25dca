//! Text formats for graphs, signals and vertex coordinates.
//!
//! Edge list:
//!
//! ```text
//! # n=4 directed=false
//! 0,1,1.0
//! 1,2,0.5
//! ```
//!
//! A row `src,dst,w` sets `A[dst][src] = w` (and `A[src][dst]` when
//! undirected). The weight column is optional and defaults to 1. Without a
//! header the graph is undirected and `n` is one past the largest index.
//!
//! Dense CSV holds `N` rows of `N` reals; the graph is directed iff the
//! matrix is asymmetric. Signals are one `re,im` pair per line (a lone `re`
//! means `im = 0`), coordinates one `x,y` pair per line. Blank lines and
//! lines starting with `#` are skipped everywhere.
//!
//! Writers print every float with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};

/// Default ceiling on the vertex count accepted by the graph parsers.
pub const MAX_VERTICES: usize = 16_384;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_index(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid vertex index {s:?}")))
}

fn check_vertex_count(n: usize, max_vertices: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize {
            size: 0,
            reason: "graph needs at least one vertex",
        });
    }
    if n > max_vertices {
        return Err(Error::InvalidSize {
            size: n,
            reason: "vertex count exceeds the parser limit",
        });
    }
    Ok(())
}

struct Header {
    n: Option<usize>,
    directed: bool,
}

fn parse_header(text: &str) -> Result<Header> {
    let mut header = Header {
        n: None,
        directed: false,
    };
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        let Some(rest) = line.strip_prefix('#') else {
            if line.is_empty() {
                continue;
            }
            break;
        };
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if !tokens.iter().any(|t| t.starts_with("n=")) {
            continue;
        }
        for t in tokens {
            if let Some(v) = t.strip_prefix("n=") {
                header.n = Some(parse_index(no + 1, v)?);
            } else if let Some(v) = t.strip_prefix("directed=") {
                header.directed = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(Error::parse(no + 1, format!("invalid directed flag {v:?}"))),
                };
            }
        }
        break;
    }
    Ok(header)
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    parse_edge_list_with_limit(text, MAX_VERTICES)
}

pub fn parse_edge_list_with_limit(text: &str, max_vertices: usize) -> Result<Graph> {
    let header = parse_header(text)?;
    let mut edges = Vec::new();
    let mut max_index = None::<usize>;
    for (no, line) in data_lines(text) {
        let f = fields(line);
        if !(2..=3).contains(&f.len()) {
            return Err(Error::parse(
                no,
                format!("expected src,dst[,weight], got {} fields", f.len()),
            ));
        }
        let src = parse_index(no, f[0])?;
        let dst = parse_index(no, f[1])?;
        let w = if f.len() == 3 {
            parse_f64(no, f[2])?
        } else {
            1.0
        };
        max_index = max_index.max(Some(src.max(dst)));
        edges.push((src, dst, w));
    }
    let n = match header.n {
        Some(n) => n,
        None => max_index.map_or(0, |m| m.saturating_add(1)),
    };
    check_vertex_count(n, max_vertices)?;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut seen = vec![false; n * n];
    for (src, dst, w) in edges {
        for index in [src, dst] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if std::mem::replace(&mut seen[dst * n + src], true) {
            return Err(Error::DuplicateEdge { src, dst });
        }
        if header.directed {
            a[(dst, src)] = w;
            continue;
        }
        if seen[src * n + dst] && src != dst && a[(src, dst)] != w {
            return Err(Error::Asymmetric { row: dst, col: src });
        }
        a[(dst, src)] = w;
        a[(src, dst)] = w;
    }
    Graph::new(a, header.directed)
}

pub fn write_edge_list(g: &Graph) -> String {
    let n = g.n();
    let a = g.adjacency();
    let mut out = format!("# n={n} directed={}\n", g.is_directed());
    for src in 0..n {
        for dst in 0..n {
            if !g.is_directed() && dst < src {
                continue;
            }
            let w = a[(dst, src)];
            if w != 0.0 {
                writeln!(out, "{src},{dst},{w:.16e}").unwrap();
            }
        }
    }
    out
}

pub fn parse_dense(text: &str) -> Result<Graph> {
    parse_dense_with_limit(text, MAX_VERTICES)
}

pub fn parse_dense_with_limit(text: &str, max_vertices: usize) -> Result<Graph> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in data_lines(text) {
        let f = fields(line);
        if rows.is_empty() {
            check_vertex_count(f.len(), max_vertices)?;
        }
        let expected = rows.first().map_or(f.len(), Vec::len);
        if f.len() != expected {
            return Err(Error::parse(
                no,
                format!("expected {expected} columns, got {}", f.len()),
            ));
        }
        if rows.len() == expected {
            return Err(Error::parse(no, format!("more than {expected} rows")));
        }
        rows.push(f.iter().map(|s| parse_f64(no, s)).collect::<Result<_>>()?);
    }
    let n = rows.len();
    check_vertex_count(n, max_vertices)?;
    if rows[0].len() != n {
        return Err(Error::DimensionMismatch {
            expected: rows[0].len(),
            found: n,
        });
    }
    let a = Mat::from_fn(n, n, |i, j| rows[i][j]);
    let directed = (0..n).any(|i| (0..i).any(|j| a[(i, j)] != a[(j, i)]));
    Graph::new(a, directed)
}

pub fn write_dense(g: &Graph) -> String {
    let a = g.adjacency();
    let mut out = String::new();
    for i in 0..g.n() {
        let row: Vec<String> = (0..g.n()).map(|j| format!("{:.16e}", a[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_signal(text: &str) -> Result<GraphSignal> {
    let mut values = Vec::new();
    for (no, line) in data_lines(text) {
        let f = fields(line);
        let v = match f.as_slice() {
            [re] => Complex64::new(parse_f64(no, re)?, 0.0),
            [re, im] => Complex64::new(parse_f64(no, re)?, parse_f64(no, im)?),
            _ => {
                return Err(Error::parse(
                    no,
                    format!("expected re,im, got {} fields", f.len()),
                ))
            }
        };
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::InvalidSize {
            size: 0,
            reason: "signal is empty",
        });
    }
    Ok(GraphSignal::new(values))
}

pub fn write_signal(s: &GraphSignal) -> String {
    let mut out = String::with_capacity(s.len() * 48);
    for v in s.values() {
        writeln!(out, "{:.16e},{:.16e}", v.re, v.im).unwrap();
    }
    out
}

pub fn parse_coords(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (no, line) in data_lines(text) {
        match fields(line).as_slice() {
            [x, y] => out.push((parse_f64(no, x)?, parse_f64(no, y)?)),
            f => {
                return Err(Error::parse(
                    no,
                    format!("expected x,y, got {} fields", f.len()),
                ))
            }
        }
    }
    Ok(out)
}

pub fn write_coords(coords: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in coords {
        writeln!(out, "{x:.16e},{y:.16e}").unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Dense,
}

pub fn load_graph(path: &Path, format: GraphFormat) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    match format {
        GraphFormat::EdgeList => parse_edge_list(&text),
        GraphFormat::Dense => parse_dense(&text),
    }
}

/// Parses a graph in either text format. Text with an `# n=` header is an
/// edge list; without one, text with as many data rows as columns is dense
/// and anything else is an edge list.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let has_header = parse_header(text)?.n.is_some();
    let rows = data_lines(text).count();
    let cols = data_lines(text).next().map_or(0, |(_, l)| fields(l).len());
    if !has_header && rows > 0 && rows == cols {
        parse_dense(text)
    } else {
        parse_edge_list(text)
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn read_signal(path: &Path) -> Result<GraphSignal> {
    parse_signal(&fs::read_to_string(path)?)
}

pub fn read_coords(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_coords(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, path_graph};

    #[test]
    fn edge_list_round_trip() {
        for g in [cycle_graph(3).unwrap(), path_graph(4).unwrap()] {
            let text = write_edge_list(&g);
            let back = parse_edge_list(&text).unwrap();
            assert_eq!(back.digest(), g.digest());
        }
    }

    #[test]
    fn cycle_edge_list_text() {
        let text = write_edge_list(&cycle_graph(3).unwrap());
        assert!(text.starts_with("# n=3 directed=true\n"));
        assert!(text.contains("0,1,1.0000000000000000e0"));
        assert!(text.contains("2,0,"));
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(
            parse_edge_list("# n=3 directed=true\n0,5,1\n"),
            Err(Error::IndexOutOfRange { index: 5, n: 3 })
        ));
        assert!(matches!(
            parse_edge_list("# n=3 directed=true\n0,1,1\n0,1,2\n"),
            Err(Error::DuplicateEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(
            parse_edge_list("# n=3 directed=false\n0,1,1\n1,0,2\n"),
            Err(Error::Asymmetric { .. })
        ));
        assert!(parse_edge_list("# n=3 directed=false\n0,1,1\n1,0,1\n").is_ok());
        assert!(parse_edge_list("0,1,x\n").is_err());
        assert!(parse_edge_list("0,1,inf\n").is_err());
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("0,99999999999,1\n").is_err());
    }

    #[test]
    fn empty_edge_list_with_header() {
        let g = parse_edge_list("# n=2 directed=false\n").unwrap();
        assert_eq!(g.nnz(), 0);
        assert_eq!(g.n(), 2);
    }

    #[test]
    fn undirected_rows_fill_both_triangles() {
        let g = parse_edge_list("# n=3 directed=false\n0,1,1\n1,2,1\n").unwrap();
        let want = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert_eq!(g.adjacency()[(i, j)], w);
            }
        }
    }

    #[test]
    fn headerless_edge_list_is_undirected() {
        let g = parse_edge_list("0,1\n1,2,2.5\n").unwrap();
        assert_eq!(g.n(), 3);
        assert!(!g.is_directed());
        assert_eq!(g.adjacency()[(2, 1)], 2.5);
        assert_eq!(g.adjacency()[(1, 2)], 2.5);
    }

    #[test]
    fn dense_round_trip_and_direction() {
        let g = parse_dense("0,1\n1,0\n").unwrap();
        assert!(!g.is_directed());
        let d = parse_dense("0,1\n0,0\n").unwrap();
        assert!(d.is_directed());
        assert_eq!(parse_dense(&write_dense(&d)).unwrap().digest(), d.digest());
        assert!(parse_dense("0,1\n1\n").is_err());
        assert!(parse_dense("0,1,2\n1,0,2\n").is_err());
        assert!(parse_dense("0,1\n1,0\n0,0\n").is_err());
    }

    #[test]
    fn signal_round_trip_is_exact() {
        let s = GraphSignal::new(vec![
            Complex64::new(0.1, -1.0 / 3.0),
            Complex64::new(f64::MIN_POSITIVE, 1e300),
            Complex64::new(-0.0, 2.0f64.sqrt()),
        ]);
        let back = parse_signal(&write_signal(&s)).unwrap();
        for (a, b) in s.values().iter().zip(back.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(
            parse_signal("1\n-1\n").unwrap(),
            GraphSignal::from_real(&[1.0, -1.0])
        );
        assert!(parse_signal("1,2,3\n").is_err());
        assert!(parse_signal("").is_err());
    }

    #[test]
    fn coords_round_trip() {
        let c = vec![(0.25, 1.0 / 7.0), (-3.0, 1e-9)];
        assert_eq!(parse_coords(&write_coords(&c)).unwrap(), c);
        assert!(parse_coords("1\n").is_err());
    }
}
