//! Eigendecomposition, Green functions and semicircle-law reference values.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::SymmetricMatrix;
use crate::rng::digest;
use crate::{Error, Result};

/// Eigenvalues `λ₁ ≥ … ≥ λ_n` with an orthonormal eigenvector for each.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column-major: eigenvector `α` occupies `vectors[α·n .. (α+1)·n]`.
    vectors: Vec<f64>,
}

impl Spectrum {
    /// Assembles a spectrum from parts. `vectors` is column-major as above.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if vectors.len() != n * n {
            return Err(Error::Size(format!(
                "{n} eigenvalues need {} vector entries, got {}",
                n * n,
                vectors.len()
            )));
        }
        Ok(Spectrum {
            eigenvalues,
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector `α` (0-based).
    pub fn vector(&self, alpha: usize) -> &[f64] {
        let n = self.n();
        &self.vectors[alpha * n..(alpha + 1) * n]
    }

    /// `⟨x, v_α⟩` for every `α`.
    pub fn overlaps(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|a| dot(self.vector(a), x)).collect()
    }

    /// `v_α(i)` for every `α`, i.e. the overlaps with `e_i`.
    pub fn coordinate_row(&self, i: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|a| self.vectors[a * n + i]).collect()
    }

    pub fn stieltjes(&self, z: ComplexPoint) -> Complex64 {
        stieltjes(&self.eigenvalues, z)
    }

    /// `⟨x, G(z) y⟩` from precomputed overlaps `⟨x,v_α⟩`, `⟨y,v_α⟩`.
    pub fn green_from_overlaps(&self, ox: &[f64], oy: &[f64], z: Complex64) -> Complex64 {
        green_sum(&self.eigenvalues, ox, oy, z)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn green_sum(eigs: &[f64], ox: &[f64], oy: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&l, &a), &b) in eigs.iter().zip(ox).zip(oy) {
        acc += a * b / (l - z);
    }
    acc
}

fn to_faer(s: &SymmetricMatrix) -> Mat<f64> {
    Mat::from_fn(s.n(), s.n(), |i, j| s.get(i, j))
}

/// Full symmetric eigendecomposition, eigenvalues non-increasing.
///
/// Each eigenvector is flipped so its largest-magnitude entry is positive,
/// ties going to the lowest index.
pub fn eigendecompose(s: &SymmetricMatrix) -> Result<Spectrum> {
    let n = s.n();
    let evd = to_faer(s)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Convergence {
            digest: digest(s.as_slice()),
        })?;
    let vals = evd.S().column_vector();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for k in (0..n).rev() {
        eigenvalues.push(vals[k]);
        let col: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        let flip = if col[best] < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(col.iter().map(|v| v * flip));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Convergence {
            digest: digest(s.as_slice()),
        });
    }
    Ok(Spectrum {
        eigenvalues,
        vectors,
    })
}

/// Eigenvalues only, non-increasing. About twice as fast as the full solve.
pub fn eigenvalues(s: &SymmetricMatrix) -> Result<Vec<f64>> {
    let mut v = to_faer(s)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Convergence {
            digest: digest(s.as_slice()),
        })?;
    v.reverse();
    Ok(v)
}

/// `z = E + iη` with `η > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub e: f64,
    pub eta: f64,
}

impl ComplexPoint {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() {
            return Err(Error::Domain(format!("need η > 0, got z = {e} + i{eta}")));
        }
        Ok(ComplexPoint { e, eta })
    }

    pub fn z(self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

/// Working scale `η = n^{−2/3−2ε}`.
pub fn default_eta(n: usize, eps_lr: f64) -> f64 {
    (n as f64).powf(-2.0 / 3.0 - 2.0 * eps_lr)
}

/// `φ_n = (ln n)^{ln ln n}`.
pub fn phi_n(n: usize) -> f64 {
    let l = (n as f64).ln();
    l.powf(l.ln())
}

/// `⟨x, (A − z)⁻¹ y⟩` through the spectral sum.
pub fn green_quadratic_form(spec: &Spectrum, x: &[f64], y: &[f64], z: ComplexPoint) -> Result<Complex64> {
    if x.len() != spec.n() || y.len() != spec.n() {
        return Err(Error::Size("direction length differs from matrix size".into()));
    }
    let z = ComplexPoint::new(z.e, z.eta)?.z();
    Ok(green_sum(&spec.eigenvalues, &spec.overlaps(x), &spec.overlaps(y), z))
}

/// `m(z) = (1/n) Σ 1/(λ_i − z)`.
pub fn stieltjes(eigs: &[f64], z: ComplexPoint) -> Complex64 {
    let z = z.z();
    let s: Complex64 = eigs.iter().map(|&l| 1.0 / (l - z)).sum();
    s / eigs.len() as f64
}

/// `ρ_sc(x) = (1/2π)√((4 − x²)₊)`.
pub fn semicircle_density(x: f64) -> f64 {
    let t = 4.0 - x * x;
    if t > 0.0 {
        t.sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// `∫_{−2}^{x} ρ_sc`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (4.0 * PI)
}

/// `m_sc` on the upper half plane, any complex argument off `[−2,2]`.
///
/// `√(z−2)·√(z+2)` with principal roots has its cut on `[−2,2]` and behaves
/// like `z` at infinity; `m = −2/(z + s)` is the root of `m² + zm + 1` with
/// `m ~ −1/z`, written without the cancellation in `(−z + s)/2`.
pub fn semicircle_stieltjes_c(z: Complex64) -> Complex64 {
    let s = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    -2.0 / (z + s)
}

pub fn semicircle_stieltjes(z: ComplexPoint) -> Result<Complex64> {
    let z = ComplexPoint::new(z.e, z.eta)?;
    Ok(semicircle_stieltjes_c(z.z()))
}

/// Classical locations `γ₁ > … > γ_n` with `∫_{γ_i}^{2} ρ_sc = i/n`.
pub fn classical_locations(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let target = 1.0 - i as f64 / n as f64;
            quantile(target)
        })
        .collect()
}

/// Solves `semicircle_cdf(x) = q` by bisection down to adjacent floats.
fn quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return -2.0;
    }
    if q >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if semicircle_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (semicircle_cdf(lo) - q).abs() <= (semicircle_cdf(hi) - q).abs() {
        lo
    } else {
        hi
    }
}

/// Header of the binary spectrum file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub n: usize,
    pub seed: u64,
    pub ensemble: String,
}

const MAGIC: &[u8; 8] = b"NLSPEC01";

/// Writes `MAGIC | u32 header length | JSON header | n eigenvalues |
/// n×n eigenvector block row-major (row i holds v_1(i) … v_n(i))`, all
/// numbers little-endian f64.
pub fn write_spectrum(path: &Path, spec: &Spectrum, meta: &SpectrumMeta) -> Result<()> {
    let n = spec.n();
    if meta.n != n {
        return Err(Error::Size(format!("header says n = {}, spectrum has {n}", meta.n)));
    }
    let header = serde_json::to_vec(meta)?;
    let mut buf = Vec::with_capacity(16 + header.len() + 8 * n * (n + 1));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(header.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header);
    for v in &spec.eigenvalues {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for i in 0..n {
        for a in 0..n {
            buf.extend_from_slice(&spec.vectors[a * n + i].to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_spectrum(path: &Path) -> Result<(Spectrum, SpectrumMeta)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Data(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("not a spectrum file"));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = bytes.get(12 + hlen..).ok_or_else(|| bad("truncated header"))?;
    let meta: SpectrumMeta = serde_json::from_slice(&bytes[12..12 + hlen])?;
    let n = meta.n;
    if body.len() != 8 * n * (n + 1) {
        return Err(bad("body length does not match n"));
    }
    let num = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
    let eigenvalues = (0..n).map(num).collect();
    let mut vectors = vec![0.0; n * n];
    for i in 0..n {
        for a in 0..n {
            vectors[a * n + i] = num(n + i * n + a);
        }
    }
    Ok((
        Spectrum {
            eigenvalues,
            vectors,
        },
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let s = SymmetricMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
        let sp = eigendecompose(&s).unwrap();
        assert!((sp.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((sp.eigenvalues[1] + 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sp.vector(0)[0] - r).abs() < 1e-14 && (sp.vector(0)[1] - r).abs() < 1e-14);
        // tie in magnitude: index 0 carries the positive sign
        assert!((sp.vector(1)[0] - r).abs() < 1e-14 && (sp.vector(1)[1] + r).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_green() {
        let sp = eigendecompose(&SymmetricMatrix::zeros(3)).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        let g = green_quadratic_form(&sp, &e1, &e1, ComplexPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert!((g - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(ComplexPoint::new(0.0, 0.0).is_err());
        assert!(semicircle_stieltjes(ComplexPoint { e: 1.0, eta: -1.0 }).is_err());
    }

    #[test]
    fn density_values() {
        assert!((semicircle_density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_density(2.0), 0.0);
        assert_eq!(semicircle_density(-2.0), 0.0);
        assert_eq!(semicircle_density(3.0), 0.0);
    }

    #[test]
    fn phi_values() {
        assert!((phi_n(300) - 20.73).abs() < 0.01);
        assert!((phi_n(1000) - 41.89).abs() < 0.01);
    }
}
