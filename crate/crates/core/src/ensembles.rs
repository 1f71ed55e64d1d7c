//! Random matrix ensembles: G(n,p) graphs, their Wigner normalizations, GOE
//! and the Lindeberg diagonal interpolation.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;
use crate::{Error, Result};

/// Largest dense size the samplers accept.
pub const MAX_DENSE: usize = 4096;

fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Size(format!("n = {n} is below the minimum {min}")));
    }
    if n > MAX_DENSE {
        return Err(Error::Size(format!("n = {n} exceeds the dense cap {MAX_DENSE}")));
    }
    Ok(())
}

/// Symmetric 0/1 matrix with zero diagonal, stored densely row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = AdjacencyMatrix::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Data(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Data(format!("self-loop at vertex {i}")));
            }
            a.entries[i * n + j] = 1;
            a.entries[j * n + i] = 1;
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j] != 0
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| (e != 0).then_some(j))
    }

    /// Pairs `(i, j)` with `i < j`, in row-major order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().map(|&e| e as usize).sum::<usize>() / 2
    }

    pub fn is_valid(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            self.entries[i * n + i] == 0
                && (0..n).all(|j| {
                    let e = self.entries[i * n + j];
                    e <= 1 && e == self.entries[j * n + i]
                })
        })
    }

    pub fn to_symmetric(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.n, |i, j| self.entries[i * self.n + j] as f64)
    }
}

/// Dense symmetric matrix. Both triangles are stored and always bit-identical.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.data[i * n + i] = 1.0;
        }
        s
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut s = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            s.set(i, i, v);
        }
        s
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle `j <= i` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    /// Accepts a row-major array; fails unless it is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Size(format!("expected {} entries, got {}", n * n, data.len())));
        }
        let s = SymmetricMatrix { n, data };
        for i in 0..n {
            for j in 0..i {
                if s.get(i, j).to_bits() != s.get(j, i).to_bits() {
                    return Err(Error::Data(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut s = self.clone();
        for i in 0..self.n {
            let v = s.get(i, i) + c;
            s.set(i, i, v);
        }
        s
    }

    /// `self + c·l·lᵀ`.
    pub fn plus_rank_one(&self, c: f64, l: &[f64]) -> Self {
        SymmetricMatrix::from_fn(self.n, |i, j| self.get(i, j) + c * l[i] * l[j])
    }

    /// Principal submatrix on the given (sorted or not) index list.
    pub fn principal_minor(&self, keep: &[usize]) -> Self {
        SymmetricMatrix::from_fn(keep.len(), |a, b| self.get(keep[a], keep[b]))
    }

    /// Principal submatrix with the listed indices removed.
    pub fn remove_indices(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.n).filter(|i| !drop.contains(i)).collect();
        self.principal_minor(&keep)
    }
}

/// `[[D, Wᵀ], [W, B]]` split of a symmetric matrix with a leading 2×2 block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub d: [[f64; 2]; 2],
    /// Rows of the `(n-2)×2` coupling block.
    pub w: Vec<[f64; 2]>,
    pub b: SymmetricMatrix,
}

impl BlockDecomposition {
    /// Column `k` (0 or 1) of `W`.
    pub fn w_col(&self, k: usize) -> Vec<f64> {
        self.w.iter().map(|r| r[k]).collect()
    }

    pub fn full_size(&self) -> usize {
        self.b.n() + 2
    }

    pub fn reassemble(&self) -> SymmetricMatrix {
        let m = self.b.n();
        SymmetricMatrix::from_fn(m + 2, |i, j| match (i < 2, j < 2) {
            (true, true) => self.d[i][j],
            (false, true) => self.w[i - 2][j],
            (true, false) => self.w[j - 2][i],
            (false, false) => self.b.get(i - 2, j - 2),
        })
    }
}

pub fn block_decompose(s: &SymmetricMatrix) -> Result<BlockDecomposition> {
    let n = s.n();
    if n < 4 {
        return Err(Error::Size(format!("block decomposition needs n >= 4, got {n}")));
    }
    let d = [[s.get(0, 0), s.get(0, 1)], [s.get(1, 0), s.get(1, 1)]];
    let w = (2..n).map(|i| [s.get(i, 0), s.get(i, 1)]).collect();
    let keep: Vec<usize> = (2..n).collect();
    Ok(BlockDecomposition {
        d,
        w,
        b: s.principal_minor(&keep),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Gnp,
    Goe,
    Lindeberg,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gnp" => Ok(Ensemble::Gnp),
            "goe" => Ok(Ensemble::Goe),
            "lindeberg" => Ok(Ensemble::Lindeberg),
            other => Err(Error::Config(format!("unknown ensemble `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub ensemble: Ensemble,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        check_size(self.n, 2)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!("p = {} must lie in (0,1)", self.p)));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: EnsembleConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Draws the matrix the config describes. For G(n,p) this is the centered
    /// form `H`; Lindeberg draws the zero-diagonal GOE endpoint.
    pub fn sample(&self) -> Result<SymmetricMatrix> {
        self.validate()?;
        match self.ensemble {
            Ensemble::Gnp => {
                let a = sample_gnp(self.n, self.p, self.seed)?;
                Ok(normalize_shifted(&a, self.p)?.centered)
            }
            Ensemble::Goe => sample_goe(self.n, self.seed),
            Ensemble::Lindeberg => sample_goe_zero_diagonal(self.n, self.seed),
        }
    }
}

/// G(n,p) adjacency matrix. Pairs are visited in row-major order `i < j`.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<AdjacencyMatrix> {
    check_size(n, 2)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("p = {p} must lie in [0,1]")));
    }
    let mut rng = rng_from(seed);
    let mut a = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                a.entries[i * n + j] = 1;
                a.entries[j * n + i] = 1;
            }
        }
    }
    Ok(a)
}

/// The two normalizations of an adjacency matrix.
#[derive(Clone, Debug)]
pub struct Normalized {
    /// `Ã = A/√(p(1−p)n) + √(p/((1−p)n))·I`; same eigenvectors as `A`.
    pub shifted: SymmetricMatrix,
    /// `H = Ã − √(pn/(1−p))·𝟙𝟙ᵀ` with `𝟙` the unit equal-coordinate vector;
    /// zero diagonal, entries `√((1−p)/p)/√n` or `−√(p/(1−p))/√n`.
    pub centered: SymmetricMatrix,
    pub diagonal_shift: f64,
    /// Strength `√(pn/(1−p))` of the rank-one part.
    pub rank_one: f64,
}

pub fn normalize_shifted(a: &AdjacencyMatrix, p: f64) -> Result<Normalized> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!("p = {p} must lie in (0,1)")));
    }
    let n = a.n();
    let nf = n as f64;
    let scale = 1.0 / (p * (1.0 - p) * nf).sqrt();
    let diagonal_shift = (p / ((1.0 - p) * nf)).sqrt();
    let hi = ((1.0 - p) / p).sqrt() / nf.sqrt();
    let lo = -(p / (1.0 - p)).sqrt() / nf.sqrt();
    let shifted = SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            diagonal_shift
        } else {
            a.has_edge(i, j) as u8 as f64 * scale
        }
    });
    let centered = SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else if a.has_edge(i, j) {
            hi
        } else {
            lo
        }
    });
    Ok(Normalized {
        shifted,
        centered,
        diagonal_shift,
        rank_one: (p * nf / (1.0 - p)).sqrt(),
    })
}

/// GOE with off-diagonal variance `1/n` and diagonal variance `2/n`.
pub fn sample_goe(n: usize, seed: u64) -> Result<SymmetricMatrix> {
    check_size(n, 2)?;
    let mut rng = rng_from(seed);
    let off = (1.0 / n as f64).sqrt();
    let dia = (2.0 / n as f64).sqrt();
    Ok(SymmetricMatrix::from_fn(n, |i, j| {
        let g: f64 = StandardNormal.sample(&mut rng);
        if i == j {
            g * dia
        } else {
            g * off
        }
    }))
}

/// GOE with the diagonal set to zero; the `W̃` endpoint of the interpolation.
/// Off-diagonal entries coincide with [`sample_goe`] under the same seed.
pub fn sample_goe_zero_diagonal(n: usize, seed: u64) -> Result<SymmetricMatrix> {
    let mut s = sample_goe(n, seed)?;
    for i in 0..n {
        s.set(i, i, 0.0);
    }
    Ok(s)
}

/// `n×n` increments `h_{j,i}` (row `j−1`, column `i−1`), each `N(0, 2/n²)`.
pub fn lindeberg_increments(n: usize, seed: u64) -> Result<Vec<f64>> {
    check_size(n, 2)?;
    let mut rng = rng_from(seed);
    let sd = 2.0f64.sqrt() / n as f64;
    Ok((0..n * n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * sd
        })
        .collect())
}

/// `W_{β,γ}`: off-diagonal entries of `base`, diagonal entry `i` (1-based)
/// equal to `Σ_{j≤β} h_{j,i}` plus `h_{β+1,i}` when `i ≤ γ`.
pub fn lindeberg_matrix(
    base: &SymmetricMatrix,
    increments: &[f64],
    beta: usize,
    gamma: usize,
) -> Result<SymmetricMatrix> {
    let n = base.n();
    if increments.len() != n * n {
        return Err(Error::Size(format!(
            "increments must be {n}×{n}, got {} values",
            increments.len()
        )));
    }
    if beta > n || gamma > n || (beta == n && gamma > 0) {
        return Err(Error::Domain(format!(
            "(β, γ) = ({beta}, {gamma}) outside the path for n = {n}"
        )));
    }
    if (0..n).any(|i| base.get(i, i) != 0.0) {
        return Err(Error::Data("Lindeberg base must have zero diagonal".into()));
    }
    let mut w = base.clone();
    for i in 0..n {
        let mut d = 0.0;
        for j in 0..beta {
            d += increments[j * n + i];
        }
        if i < gamma {
            d += increments[beta * n + i];
        }
        w.set(i, i, d);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnp_extremes() {
        let k3 = sample_gnp(3, 1.0, 9).unwrap();
        assert_eq!(k3.edge_count(), 3);
        let e = sample_gnp(3, 0.0, 9).unwrap();
        assert_eq!(e.edge_count(), 0);
        assert!(sample_gnp(1, 0.5, 0).is_err());
        assert!(sample_gnp(5, 1.5, 0).is_err());
    }

    #[test]
    fn two_vertex_normalization() {
        let a = AdjacencyMatrix::from_edges(2, &[(0, 1)]).unwrap();
        let nz = normalize_shifted(&a, 0.5).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s2 = std::f64::consts::SQRT_2;
        assert!((nz.shifted.get(0, 0) - r).abs() < 1e-15);
        assert!((nz.shifted.get(0, 1) - s2).abs() < 1e-15);
        assert_eq!(nz.centered.get(0, 0), 0.0);
        assert_eq!(nz.centered.get(1, 1), 0.0);
        assert!((nz.centered.get(0, 1) - r).abs() < 1e-15);
    }

    #[test]
    fn block_of_identity() {
        let b = block_decompose(&SymmetricMatrix::identity(4)).unwrap();
        assert_eq!(b.d, [[1.0, 0.0], [0.0, 1.0]]);
        assert!(b.w.iter().all(|r| r == &[0.0, 0.0]));
        assert_eq!(b.b, SymmetricMatrix::identity(2));
        assert!(block_decompose(&SymmetricMatrix::identity(3)).is_err());
    }

    #[test]
    fn lindeberg_rejects_bad_input() {
        let base = sample_goe_zero_diagonal(5, 1).unwrap();
        let h = lindeberg_increments(5, 2).unwrap();
        assert!(lindeberg_matrix(&base, &h, 6, 0).is_err());
        assert!(lindeberg_matrix(&base, &h, 5, 1).is_err());
        assert!(lindeberg_matrix(&base, &h, 5, 0).is_ok());
        let goe = sample_goe(5, 1).unwrap();
        assert!(lindeberg_matrix(&goe, &h, 0, 0).is_err());
    }
}
