//! Matrix Market I/O.
//!
//! Adjacency matrices use `coordinate pattern symmetric` (lower triangle,
//! 1-based); real symmetric matrices use `array real symmetric` (lower
//! triangle in column-major order, as the format prescribes).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::ensembles::{AdjacencyMatrix, SymmetricMatrix};
use crate::{Error, Result};

pub fn adjacency_to_string(a: &AdjacencyMatrix) -> String {
    let edges = a.edge_list();
    let mut s = String::from("%%MatrixMarket matrix coordinate pattern symmetric\n");
    let _ = writeln!(s, "{} {} {}", a.n(), a.n(), edges.len());
    for (i, j) in edges {
        let _ = writeln!(s, "{} {}", j + 1, i + 1);
    }
    s
}

pub fn symmetric_to_string(m: &SymmetricMatrix) -> String {
    let n = m.n();
    let mut s = String::from("%%MatrixMarket matrix array real symmetric\n");
    let _ = writeln!(s, "{n} {n}");
    for j in 0..n {
        for i in j..n {
            let _ = writeln!(s, "{:e}", m.get(i, j));
        }
    }
    s
}

pub fn write_adjacency(path: &Path, a: &AdjacencyMatrix) -> Result<()> {
    fs::write(path, adjacency_to_string(a)).map_err(|e| Error::io(path, e))
}

pub fn write_symmetric(path: &Path, m: &SymmetricMatrix) -> Result<()> {
    fs::write(path, symmetric_to_string(m)).map_err(|e| Error::io(path, e))
}

pub fn read_adjacency(path: &Path) -> Result<AdjacencyMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_adjacency(&text, path)
}

pub fn read_symmetric(path: &Path) -> Result<SymmetricMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_symmetric(&text, path)
}

struct Lines<'a> {
    path: &'a Path,
    inner: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path, banner: &[&str]) -> Result<Self> {
        let mut all = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        let (_, first) = all.next().ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 1,
            msg: "empty file".into(),
        })?;
        let words: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
        if words.first().map(String::as_str) != Some("%%matrixmarket") || words[1..] != *banner {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: format!("expected banner `%%MatrixMarket {}`", banner.join(" ")),
            });
        }
        Ok(Lines {
            path,
            inner: all.filter(|(_, l)| !l.is_empty() && !l.starts_with('%')).collect(),
            pos: 0,
        })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.into(),
            line,
            msg: msg.into(),
        }
    }

    fn next_fields<T: std::str::FromStr>(&mut self, count: usize) -> Result<(usize, Vec<T>)> {
        let (line, l) = *self.inner.get(self.pos).ok_or_else(|| {
            let last = self.inner.last().map_or(1, |x| x.0);
            self.err(last, "unexpected end of file")
        })?;
        self.pos += 1;
        let vals: Vec<T> = l
            .split_whitespace()
            .map(|w| w.parse::<T>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err(line, format!("cannot parse `{l}`")))?;
        if vals.len() != count {
            return Err(self.err(line, format!("expected {count} fields, found {}", vals.len())));
        }
        Ok((line, vals))
    }
}

pub fn parse_adjacency(text: &str, path: &Path) -> Result<AdjacencyMatrix> {
    let mut lines = Lines::new(text, path, &["matrix", "coordinate", "pattern", "symmetric"])?;
    let (line, dims) = lines.next_fields::<usize>(3)?;
    if dims[0] != dims[1] {
        return Err(lines.err(line, "adjacency matrix must be square"));
    }
    let mut edges = Vec::with_capacity(dims[2]);
    for _ in 0..dims[2] {
        let (line, ij) = lines.next_fields::<usize>(2)?;
        let (i, j) = (ij[0], ij[1]);
        if i == 0 || j == 0 || i > dims[0] || j > dims[0] {
            return Err(lines.err(line, format!("index ({i}, {j}) out of range")));
        }
        if i == j {
            return Err(lines.err(line, "self-loop in adjacency matrix"));
        }
        edges.push((i.min(j) - 1, i.max(j) - 1));
    }
    AdjacencyMatrix::from_edges(dims[0], &edges)
}

pub fn parse_symmetric(text: &str, path: &Path) -> Result<SymmetricMatrix> {
    let mut lines = Lines::new(text, path, &["matrix", "array", "real", "symmetric"])?;
    let (line, dims) = lines.next_fields::<usize>(2)?;
    if dims[0] != dims[1] {
        return Err(lines.err(line, "symmetric matrix must be square"));
    }
    let n = dims[0];
    let mut m = SymmetricMatrix::zeros(n);
    for j in 0..n {
        for i in j..n {
            let (_, v) = lines.next_fields::<f64>(1)?;
            m.set(i, j, v[0]);
        }
    }
    Ok(m)
}
