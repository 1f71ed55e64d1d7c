//! Block detection of eigenvalues, eigenvector reconstruction, the sign
//! formula, the rank-one secular equation and the `wᵀG(E)w` diagnostics.
//!
//! For `S = [[D, Wᵀ], [W, B]]` with `G(E) = (B − E)⁻¹`, a real `λ` off the
//! spectrum of `B` is an eigenvalue of `S` iff `K(λ) = WᵀG(λ)W − D + λI₂`
//! is singular, with eigenvector `[q; −G(λ)Wq]` for `q ∈ ker K(λ)`.
//! Between consecutive poles `dK/dE = WᵀG(E)²W + I` is positive definite,
//! so both eigenvalue branches of `K` increase strictly and each crosses
//! zero at most once.

use serde::{Deserialize, Serialize};

use crate::ensembles::{BlockDecomposition, SymmetricMatrix};
use crate::rng::rng_from;
use crate::spectral::{dot, eigendecompose, Spectrum};
use crate::{Error, Result};

/// Distance from a pole inside which `G(E)` is treated as singular.
pub const POLE_GUARD: f64 = 1e-12;
/// Denominators of the sign formula below this are degenerate.
pub const SIGN_DENOMINATOR_TOL: f64 = 1e-12;

/// Block system of a symmetric matrix with the spectrum of its lower block.
#[derive(Clone, Debug)]
pub struct DetectionSystem {
    pub decomposition: BlockDecomposition,
    pub b_spectrum: Spectrum,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
    o1: Vec<f64>,
    o2: Vec<f64>,
    coupled: Vec<bool>,
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    // `f(lo) < 0 < f(hi)` on entry; runs down to adjacent floats.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sym2_eigs(k: [[f64; 2]; 2]) -> (f64, f64) {
    let m = 0.5 * (k[0][0] + k[1][1]);
    let r = (0.25 * (k[0][0] - k[1][1]).powi(2) + k[0][1] * k[0][1]).sqrt();
    (m + r, m - r)
}

fn det2(k: [[f64; 2]; 2]) -> f64 {
    k[0][0] * k[1][1] - k[0][1] * k[1][0]
}

/// Rotates each cluster of numerically equal eigenvalues of `B` so that at
/// most two of its eigenvectors overlap `w₁, w₂`; the rest of the cluster
/// becomes exactly uncoupled. Cluster eigenvalues are replaced by their mean.
fn align_clusters(spec: Spectrum, w1: &[f64], w2: &[f64]) -> Result<Spectrum> {
    let n = spec.n();
    let scale = 1.0 + spec.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * scale;
    let mut eigs = spec.eigenvalues.clone();
    let mut vecs: Vec<Vec<f64>> = (0..n).map(|a| spec.vector(a).to_vec()).collect();
    let mut start = 0;
    let mut changed = false;
    while start < n {
        let mut end = start + 1;
        while end < n && eigs[end - 1] - eigs[end] <= tol {
            end += 1;
        }
        if end - start >= 2 {
            changed = true;
            let mean = eigs[start..end].iter().sum::<f64>() / (end - start) as f64;
            eigs[start..end].iter_mut().for_each(|e| *e = mean);
            // projections of w₁, w₂ onto the cluster, then the old vectors
            let mut cand: Vec<Vec<f64>> = [w1, w2]
                .iter()
                .map(|w| {
                    let mut p = vec![0.0; n];
                    for v in &vecs[start..end] {
                        let c = dot(v, w);
                        p.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
                    }
                    p
                })
                .collect();
            cand.extend(vecs[start..end].iter().cloned());
            let floor = 1e-8 * (1.0 + dot(w1, w1).sqrt() + dot(w2, w2).sqrt());
            let mut basis: Vec<Vec<f64>> = Vec::new();
            let orth = |c: &mut Vec<f64>, basis: &[Vec<f64>]| {
                for _ in 0..2 {
                    for b in basis {
                        let d = dot(c, b);
                        c.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                    }
                }
                dot(c, c).sqrt()
            };
            let mut rest = cand.split_off(2);
            for mut c in cand {
                let norm = orth(&mut c, &basis);
                if norm > floor {
                    c.iter_mut().for_each(|x| *x /= norm);
                    basis.push(c);
                }
            }
            // complete with the old vector of largest residual at each step
            while basis.len() < end - start && !rest.is_empty() {
                let norms: Vec<f64> = rest.iter_mut().map(|c| orth(c, &basis)).collect();
                let k = (0..rest.len()).max_by(|&a, &b| norms[a].total_cmp(&norms[b])).unwrap();
                let mut c = rest.swap_remove(k);
                let norm = orth(&mut c, &basis);
                if norm <= 1e-6 {
                    break;
                }
                c.iter_mut().for_each(|x| *x /= norm);
                basis.push(c);
            }
            if basis.len() != end - start {
                return Err(Error::Convergence {
                    digest: crate::rng::digest(&eigs),
                });
            }
            for (slot, b) in vecs[start..end].iter_mut().zip(basis) {
                *slot = b;
            }
        }
        start = end;
    }
    if !changed {
        return Ok(spec);
    }
    Spectrum::from_parts(eigs, vecs.concat())
}

/// Roots found in a window together with any scan warnings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionRoots {
    /// Non-increasing.
    pub roots: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Where the `(E₀, E₁)` bracket puts the root above `μ_α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub alpha: usize,
    pub e0: Option<f64>,
    pub e1: f64,
    pub root: Option<f64>,
    pub inside: bool,
}

impl DetectionSystem {
    pub fn new(decomposition: BlockDecomposition) -> Result<Self> {
        let b_spectrum = eigendecompose(&decomposition.b)?;
        Self::with_spectrum(decomposition, b_spectrum)
    }

    pub fn from_matrix(s: &SymmetricMatrix) -> Result<Self> {
        Self::new(crate::ensembles::block_decompose(s)?)
    }

    pub fn with_spectrum(decomposition: BlockDecomposition, b_spectrum: Spectrum) -> Result<Self> {
        if b_spectrum.n() != decomposition.b.n() {
            return Err(Error::Size("spectrum size differs from lower block".into()));
        }
        let w1 = decomposition.w_col(0);
        let w2 = decomposition.w_col(1);
        let b_spectrum = align_clusters(b_spectrum, &w1, &w2)?;
        let o1 = b_spectrum.overlaps(&w1);
        let o2 = b_spectrum.overlaps(&w2);
        let scale = 1.0 + dot(&w1, &w1).sqrt() + dot(&w2, &w2).sqrt();
        let coupled = o1
            .iter()
            .zip(&o2)
            .map(|(a, b)| a.abs() + b.abs() > 1e-13 * scale)
            .collect();
        let d = decomposition.d;
        Ok(DetectionSystem {
            d11: d[0][0],
            d12: d[0][1],
            d22: d[1][1],
            decomposition,
            b_spectrum,
            w1,
            w2,
            o1,
            o2,
            coupled,
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.b_spectrum.eigenvalues
    }

    /// `⟨w_i, u_α⟩` for `i ∈ {1, 2}` (1-based `i`, 0-based `α`).
    pub fn overlap(&self, i: usize, alpha: usize) -> f64 {
        if i == 1 {
            self.o1[alpha]
        } else {
            self.o2[alpha]
        }
    }

    /// Eigenvalues of `B` whose eigenvector is orthogonal to both columns of
    /// `W`; these stay eigenvalues of the full matrix.
    pub fn uncoupled_eigenvalues(&self) -> Vec<f64> {
        self.mu()
            .iter()
            .zip(&self.coupled)
            .filter_map(|(&m, &c)| (!c).then_some(m))
            .collect()
    }

    fn check_pole(&self, e: f64) -> Result<()> {
        for (a, (&m, &c)) in self.mu().iter().zip(&self.coupled).enumerate() {
            let dist = (m - e).abs();
            if c && dist <= POLE_GUARD * (1.0 + m.abs()) {
                return Err(Error::Singular {
                    energy: e,
                    index: a,
                    distance: dist,
                });
            }
        }
        Ok(())
    }

    /// `(w₁ᵀGw₁, w₁ᵀGw₂, w₂ᵀGw₂)` at real `E`, coupled terms only.
    fn wgw_unchecked(&self, e: f64) -> (f64, f64, f64) {
        let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
        for a in 0..self.o1.len() {
            if !self.coupled[a] {
                continue;
            }
            let r = 1.0 / (self.mu()[a] - e);
            let (x, y) = (self.o1[a], self.o2[a]);
            g11 += x * x * r;
            g12 += x * y * r;
            g22 += y * y * r;
        }
        (g11, g12, g22)
    }

    /// `w_iᵀ G(E) w_j`.
    pub fn wgw(&self, e: f64, i: usize, j: usize) -> Result<f64> {
        self.check_pole(e)?;
        let (g11, g12, g22) = self.wgw_unchecked(e);
        Ok(match (i, j) {
            (1, 1) => g11,
            (2, 2) => g22,
            _ => g12,
        })
    }

    fn k_unchecked(&self, e: f64) -> [[f64; 2]; 2] {
        let (g11, g12, g22) = self.wgw_unchecked(e);
        let off = g12 - self.d12;
        [[g11 - self.d11 + e, off], [off, g22 - self.d22 + e]]
    }

    /// `WᵀG(E)W − D + E·I₂`.
    pub fn detection_matrix(&self, e: f64) -> Result<[[f64; 2]; 2]> {
        self.check_pole(e)?;
        Ok(self.k_unchecked(e))
    }

    pub fn detection_det(&self, e: f64) -> Result<f64> {
        Ok(det2(self.detection_matrix(e)?))
    }

    /// Interval containing every eigenvalue of the full matrix (Gershgorin).
    pub fn spectral_bound(&self) -> (f64, f64) {
        let s = self.decomposition.reassemble();
        let n = s.n();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| s.get(i, j).abs()).sum();
            lo = lo.min(s.get(i, i) - r);
            hi = hi.max(s.get(i, i) + r);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// Every detection root of the full matrix.
    pub fn all_roots(&self) -> DetectionRoots {
        let (lo, hi) = self.spectral_bound();
        self.detection_roots(lo, hi)
    }

    /// Detection roots in `(lo, hi)`.
    ///
    /// The window is cut at every coupled pole. On each piece both branches
    /// of `K` are bisected separately; an 8-point determinant scan runs
    /// alongside and a warning is recorded when its sign-change parity
    /// disagrees with the number of roots found.
    pub fn detection_roots(&self, lo: f64, hi: f64) -> DetectionRoots {
        let mut poles: Vec<f64> = self
            .mu()
            .iter()
            .zip(&self.coupled)
            .filter_map(|(&m, &c)| (c && m > lo && m < hi).then_some(m))
            .collect();
        poles.sort_by(f64::total_cmp);
        let mut cuts = vec![lo];
        cuts.extend(&poles);
        cuts.push(hi);
        let mut out = DetectionRoots::default();
        for w in cuts.windows(2) {
            let (a0, b0) = (w[0], w[1]);
            let ga = if poles.contains(&a0) { POLE_GUARD * (1.0 + a0.abs()) } else { 0.0 };
            let gb = if poles.contains(&b0) { POLE_GUARD * (1.0 + b0.abs()) } else { 0.0 };
            let (a, b) = (a0 + ga, b0 - gb);
            if !(a < b) {
                continue;
            }
            let mut found = Vec::new();
            for branch in 0..2 {
                let kappa = |e: f64| {
                    let (k1, k2) = sym2_eigs(self.k_unchecked(e));
                    if branch == 0 {
                        k1
                    } else {
                        k2
                    }
                };
                let (fa, fb) = (kappa(a), kappa(b));
                if fa == 0.0 {
                    found.push(a);
                } else if fb == 0.0 {
                    found.push(b);
                } else if fa < 0.0 && fb > 0.0 {
                    found.push(bisect(a, b, kappa));
                }
            }
            let probes: Vec<f64> = (0..8).map(|k| a + (b - a) * k as f64 / 7.0).collect();
            let changes = probes
                .windows(2)
                .filter(|p| det2(self.k_unchecked(p[0])) * det2(self.k_unchecked(p[1])) < 0.0)
                .count();
            if changes % 2 != found.len() % 2 {
                out.warnings.push(format!(
                    "interval ({a0}, {b0}): determinant scan saw {changes} sign changes, branch search found {} roots",
                    found.len()
                ));
            }
            out.roots.extend(found);
        }
        for &m in &poles {
            self.merge_pole_root(m, &mut out.roots);
        }
        out.roots.sort_by(|x, y| y.total_cmp(x));
        out
    }

    /// A pole with rank-one coupling `o` leaves the branch along `o⊥`
    /// finite. When that branch vanishes at the pole, the pole itself is an
    /// eigenvalue of the full matrix and bisection on either side reports
    /// it at the guard; the copies are replaced by the pole.
    fn merge_pole_root(&self, m: f64, roots: &mut Vec<f64>) {
        let at: Vec<usize> = (0..self.o1.len())
            .filter(|&a| self.coupled[a] && self.mu()[a] == m)
            .collect();
        if at.len() != 1 {
            return;
        }
        let (x, y) = (self.o1[at[0]], self.o2[at[0]]);
        let norm = x.hypot(y);
        let t = [-y / norm, x / norm];
        let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
        for a in 0..self.o1.len() {
            if !self.coupled[a] || a == at[0] {
                continue;
            }
            let r = 1.0 / (self.mu()[a] - m);
            let (u, v) = (self.o1[a], self.o2[a]);
            g11 += u * u * r;
            g12 += u * v * r;
            g22 += v * v * r;
        }
        let k = [[g11 - self.d11 + m, g12 - self.d12], [g12 - self.d12, g22 - self.d22 + m]];
        let kt = t[0] * (k[0][0] * t[0] + k[0][1] * t[1]) + t[1] * (k[1][0] * t[0] + k[1][1] * t[1]);
        let scale = 1.0 + m.abs() + k[0][0].abs().max(k[1][1].abs()).max(k[0][1].abs());
        if kt.abs() > 1e-9 * scale {
            return;
        }
        let reach = 1e-8 * (1.0 + m.abs());
        let below = roots
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < m && m - r <= reach)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        let above = roots
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > m && r - m <= reach)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        let mut drop: Vec<usize> = below.into_iter().chain(above).collect();
        drop.sort_unstable_by(|a, b| b.cmp(a));
        for i in drop {
            roots.remove(i);
        }
        roots.push(m);
    }

    /// Null vector of `K(λ)` taken orthogonal to its dominant row.
    fn null_vector(&self, lambda: f64) -> Result<[f64; 2]> {
        let k = self.detection_matrix(lambda)?;
        let (k1, k2) = sym2_eigs(k);
        let scale = 1.0 + lambda.abs() + k[0][0].abs().max(k[1][1].abs()).max(k[0][1].abs());
        if k1.abs().max(k2.abs()) <= 1e-8 * scale {
            return Err(Error::Multiplicity(lambda));
        }
        let r0 = k[0][0].hypot(k[0][1]);
        let r1 = k[1][0].hypot(k[1][1]);
        Ok(if r0 >= r1 {
            [-k[0][1], k[0][0]]
        } else {
            [-k[1][1], k[1][0]]
        })
    }

    /// `q = (1, −(w₁ᵀGw₁ − d₁₁ + λ)/(w₁ᵀGw₂ − d₁₂))`, the null vector scaled
    /// to first coordinate 1.
    pub fn scaled_null_vector(&self, lambda: f64) -> Result<[f64; 2]> {
        let k = self.detection_matrix(lambda)?;
        if k[0][1].abs() <= SIGN_DENOMINATOR_TOL {
            return Err(Error::UndefinedSign {
                energy: lambda,
                denominator: k[0][1],
            });
        }
        Ok([1.0, -k[0][0] / k[0][1]])
    }

    /// Unit eigenvector `[q; −G(λ)Wq]` of the full matrix at root `λ`,
    /// signed so its largest-magnitude entry is positive.
    pub fn reconstruct_eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let q = self.null_vector(lambda)?;
        let m = self.b_spectrum.n();
        let mut v = vec![0.0; m + 2];
        v[0] = q[0];
        v[1] = q[1];
        for a in 0..m {
            if !self.coupled[a] {
                continue;
            }
            let coef = -(self.o1[a] * q[0] + self.o2[a] * q[1]) / (self.mu()[a] - lambda);
            for (x, u) in v[2..].iter_mut().zip(self.b_spectrum.vector(a)) {
                *x += coef * u;
            }
        }
        let norm = dot(&v, &v).sqrt();
        let mut best = 0;
        for i in 1..v.len() {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        let s = if v[best] < 0.0 { -1.0 / norm } else { 1.0 / norm };
        v.iter_mut().for_each(|x| *x *= s);
        Ok(v)
    }

    /// `s(E) = sign(−(w₁ᵀG(E)w₁ − d₁₁ + E)/(w₁ᵀG(E)w₂ − d₁₂))`.
    pub fn sign_formula(&self, e: f64) -> Result<i8> {
        let k = self.detection_matrix(e)?;
        let den = k[0][1];
        if den.abs() <= SIGN_DENOMINATOR_TOL {
            return Err(Error::UndefinedSign {
                energy: e,
                denominator: den,
            });
        }
        let r = -k[0][0] / den;
        Ok(if r > 0.0 {
            1
        } else if r < 0.0 {
            -1
        } else {
            0
        })
    }

    /// `f(E) = (w₁ᵀGw₁ − d₁₁ + E)(w₂ᵀGw₂ − d₂₂ + E)/(w₁ᵀGw₂ − d₁₂)²`;
    /// roots of the detection equation are the solutions of `f = 1`.
    pub fn detection_ratio(&self, e: f64) -> Result<f64> {
        let k = self.detection_matrix(e)?;
        Ok(k[0][0] * k[1][1] / (k[0][1] * k[0][1]))
    }

    /// `(E₀, E₁)` bracket on `(μ_α, μ_{α−1})` for 0-based `alpha ≥ 1`.
    pub fn bracket(&self, alpha: usize) -> Result<Bracket> {
        let mu = self.mu();
        if alpha == 0 || alpha >= mu.len() {
            return Err(Error::Domain(format!("bracket index {alpha} out of range")));
        }
        let (lo, hi) = (mu[alpha], mu[alpha - 1]);
        let a = lo + POLE_GUARD * (1.0 + lo.abs());
        let b = hi - POLE_GUARD * (1.0 + hi.abs());
        let mut e0: Option<f64> = None;
        for i in 0..2 {
            let f = |e: f64| {
                let k = self.k_unchecked(e);
                k[i][i]
            };
            if a < b && f(a) < 0.0 && f(b) > 0.0 {
                let r = bisect(a, b, f);
                e0 = Some(e0.map_or(r, |x| x.max(r)));
            }
        }
        let e1 = 2.0 * self.o1[alpha].powi(2).max(self.o2[alpha].powi(2)) + lo;
        let root = self.detection_roots(lo, hi).roots.first().copied();
        let inside = match (e0, root) {
            (Some(e0), Some(r)) => e0 < r && r < e1,
            _ => false,
        };
        Ok(Bracket {
            alpha,
            e0,
            e1,
            root,
            inside,
        })
    }

    /// `w_iᵀG(E)w_j + δ_ij − ⟨w_i,u_{α_E}⟩⟨w_j,u_{α_E}⟩/(μ_{α_E} − E)` with
    /// `α_E` the eigenvalue of `B` nearest `E`.
    pub fn wgw_residual(&self, e: f64, i: usize, j: usize) -> Result<f64> {
        if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
            return Err(Error::Domain("w indices must be 1 or 2".into()));
        }
        let mu = self.mu();
        let ae = (0..mu.len())
            .min_by(|&a, &b| (mu[a] - e).abs().total_cmp(&(mu[b] - e).abs()))
            .ok_or_else(|| Error::Size("empty lower block".into()))?;
        let dist = (mu[ae] - e).abs();
        if dist <= 1e-14 {
            return Err(Error::Singular {
                energy: e,
                index: ae,
                distance: dist,
            });
        }
        let (oi, oj) = (self.overlap(i, ae), self.overlap(j, ae));
        let delta = if i == j { 1.0 } else { 0.0 };
        let mut g = 0.0;
        for a in 0..mu.len() {
            g += self.overlap(i, a) * self.overlap(j, a) / (mu[a] - e);
        }
        Ok(g + delta - oi * oj / (mu[ae] - e))
    }
}

/// Detection report for serialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub n: usize,
    pub roots: Vec<f64>,
    /// `|det K(λ)|` at each root.
    pub det_residuals: Vec<f64>,
    /// `‖Sv − λv‖` for each reconstructed eigenvector.
    pub eigen_residuals: Vec<f64>,
    /// `s(λ)` at each root; `None` where the formula is degenerate.
    pub signs: Vec<Option<i8>>,
    pub degenerate_signs: usize,
    pub warnings: Vec<String>,
}

impl DetectionReport {
    pub fn build(sys: &DetectionSystem, roots: &DetectionRoots) -> Self {
        let s = sys.decomposition.reassemble();
        let mut det_residuals = Vec::new();
        let mut eigen_residuals = Vec::new();
        let mut signs = Vec::new();
        for &l in &roots.roots {
            det_residuals.push(sys.detection_det(l).map_or(f64::NAN, f64::abs));
            eigen_residuals.push(sys.reconstruct_eigenvector(l).map_or(f64::NAN, |v| {
                let sv = s.matvec(&v);
                sv.iter().zip(&v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt()
            }));
            signs.push(sys.sign_formula(l).ok());
        }
        DetectionReport {
            n: s.n(),
            degenerate_signs: signs.iter().filter(|s| s.is_none()).count(),
            roots: roots.roots.clone(),
            det_residuals,
            eigen_residuals,
            signs,
            warnings: roots.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `B = M + c·l·lᵀ` given the spectrum `(ν_α, v_α)` of `M`.
#[derive(Clone, Debug)]
pub struct SecularProblem {
    pub m_spectrum: Spectrum,
    pub l: Vec<f64>,
    pub c: f64,
}

/// Eigenvalues of `M + c·l·lᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularEigenvalues {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Indices `α` with `⟨l, v_α⟩ = 0`; `ν_α` carries over unchanged.
    pub persisted: Vec<usize>,
}

/// Gap and overlap ratio at an edge index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StickingReport {
    pub beta: usize,
    /// `ν_β − μ_{β+1}`; never negative by interlacing.
    pub gap: f64,
    /// `⟨l,v_β⟩²/(ν_β − μ_{β+1})`, the pole term of the secular equation
    /// at `μ_{β+1}`; `None` when the gap is 0.
    pub overlap_ratio: Option<f64>,
    /// `⟨l,v_{β+1}⟩²/(ν_β − μ_{β+1})`, the same quotient with the neighbouring
    /// overlap.
    pub overlap_ratio_next: Option<f64>,
    pub ratio_undefined: bool,
}

impl SecularProblem {
    pub fn new(m_spectrum: Spectrum, l: Vec<f64>, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("shift strength must be positive, got {c}")));
        }
        if l.len() != m_spectrum.n() {
            return Err(Error::Size("direction length differs from matrix size".into()));
        }
        Ok(SecularProblem { m_spectrum, l, c })
    }

    /// From the centered `(n+2)×(n+2)` matrix `H` of a G(n+2,p) sample:
    /// `M` is the trailing `n×n` block, `c = √(p(n+2)/(1−p))` and `l` has all
    /// coordinates `1/√(n+2)`, so `M + c·l·lᵀ` is the trailing block of `Ã`.
    pub fn from_centered(h: &SymmetricMatrix, p: f64) -> Result<Self> {
        let full = h.n();
        if full < 4 {
            return Err(Error::Size("need at least 4 vertices".into()));
        }
        let keep: Vec<usize> = (2..full).collect();
        let m = h.principal_minor(&keep);
        let c = (p * full as f64 / (1.0 - p)).sqrt();
        let l = vec![1.0 / (full as f64).sqrt(); full - 2];
        Self::new(eigendecompose(&m)?, l, c)
    }

    pub fn nu(&self) -> &[f64] {
        &self.m_spectrum.eigenvalues
    }

    /// `Σ_α ⟨l,v_α⟩²/(ν_α − μ) + 1/c`.
    pub fn secular_residual(&self, mu: f64) -> f64 {
        let z = self.m_spectrum.overlaps(&self.l);
        z.iter().zip(self.nu()).map(|(z, nu)| z * z / (nu - mu)).sum::<f64>() + 1.0 / self.c
    }

    /// One root of `1 + c·Σ z_α²/(ν_α − μ)` per gap between consecutive
    /// coupled poles plus one above the top pole; uncoupled `ν_α` persist.
    /// Each root is bisected in the offset from the nearer pole, so the
    /// result satisfies interlacing exactly.
    pub fn secular_eigenvalues(&self) -> SecularEigenvalues {
        let nu = self.nu();
        let z = self.m_spectrum.overlaps(&self.l);
        let znorm2: f64 = z.iter().map(|x| x * x).sum();
        let tol = 1e-14 * znorm2.sqrt().max(1e-300);
        let mut persisted = Vec::new();
        let mut poles: Vec<(f64, f64)> = Vec::new();
        for (a, (&v, &za)) in nu.iter().zip(&z).enumerate() {
            if za.abs() <= tol {
                persisted.push(a);
            } else {
                poles.push((v, za * za));
            }
        }
        let mut values: Vec<f64> = persisted.iter().map(|&a| nu[a]).collect();
        let c = self.c;
        // g(origin + t) with pole offsets taken relative to the origin
        let g = |origin: f64, t: f64| {
            1.0 + c * poles.iter().map(|&(v, w)| w / ((v - origin) - t)).sum::<f64>()
        };
        for k in 0..poles.len() {
            let lower = poles[k].0;
            let upper = if k == 0 { lower + c * znorm2 } else { poles[k - 1].0 };
            let width = upper - lower;
            if !(width > 0.0) {
                values.push(lower);
                continue;
            }
            let root = if k > 0 && g(lower, 0.5 * width) > 0.0 {
                // root in the lower half: offset from the lower pole
                lower + bisect(0.0, 0.5 * width, |t| g(lower, t))
            } else if k > 0 {
                upper - bisect(0.0, 0.5 * width, |t| -g(upper, -t)).min(width)
            } else {
                lower + bisect(0.0, width, |t| g(lower, t))
            };
            values.push(root.clamp(lower, upper));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        SecularEigenvalues { values, persisted }
    }

    /// Sticking statistics at 1-based edge index `beta`.
    pub fn sticking_report(&self, beta: usize) -> Result<StickingReport> {
        let n = self.m_spectrum.n();
        if beta == 0 || beta >= n {
            return Err(Error::Domain(format!("β = {beta} must satisfy 1 ≤ β < {n}")));
        }
        let mu = self.secular_eigenvalues().values;
        let nu = self.nu();
        let gap = nu[beta - 1] - mu[beta];
        let zb = dot(self.m_spectrum.vector(beta - 1), &self.l);
        let zn = dot(self.m_spectrum.vector(beta), &self.l);
        let (ratio, next) = if gap > 0.0 {
            (Some(zb * zb / gap), Some(zn * zn / gap))
        } else {
            (None, None)
        };
        Ok(StickingReport {
            beta,
            gap,
            overlap_ratio: ratio,
            overlap_ratio_next: next,
            ratio_undefined: gap <= 0.0,
        })
    }
}

/// Entry law of the centered matrix: `√((1−p)/p)/√n` with probability `p`,
/// else `−√(p/(1−p))/√n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryLaw {
    pub p: f64,
    pub n: usize,
}

impl EntryLaw {
    pub fn draw(&self, rng: &mut impl rand::Rng) -> f64 {
        let sn = (self.n as f64).sqrt();
        if rng.random::<f64>() < self.p {
            ((1.0 - self.p) / self.p).sqrt() / sn
        } else {
            -(self.p / (1.0 - self.p)).sqrt() / sn
        }
    }
}

/// Empirical sign statistics of `⟨w̃, u⟩` under resampled `w̃`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignProbability {
    pub trials: usize,
    /// Fraction of draws with `⟨w̃₁, u⟩ > 0`.
    pub p_hat: f64,
    pub p_se: f64,
    /// Mean of `sign(⟨w̃₁,u⟩⟨w̃₂,u⟩)` over independent pairs.
    pub product_mean: f64,
    pub product_se: f64,
}

/// Draws `trials` independent pairs `(w̃₁, w̃₂)` from `law`.
pub fn pair_sign_probability(u: &[f64], law: EntryLaw, trials: usize, seed: u64) -> Result<SignProbability> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if !(law.p > 0.0 && law.p < 1.0) {
        return Err(Error::Config(format!("p = {} must lie in (0,1)", law.p)));
    }
    let mut rng = rng_from(seed);
    let mut pos = 0usize;
    let mut prod = 0i64;
    let project = |rng: &mut crate::rng::Rng| u.iter().map(|&x| x * law.draw(rng)).sum::<f64>();
    for _ in 0..trials {
        let a = project(&mut rng);
        let b = project(&mut rng);
        pos += (a > 0.0) as usize;
        prod += ((a * b > 0.0) as i64) - ((a * b < 0.0) as i64);
    }
    let t = trials as f64;
    let p_hat = pos as f64 / t;
    let product_mean = prod as f64 / t;
    Ok(SignProbability {
        trials,
        p_hat,
        p_se: (p_hat * (1.0 - p_hat) / t).sqrt(),
        product_mean,
        product_se: ((1.0 - product_mean * product_mean) / t).sqrt(),
    })
}

/// Draws a vector of `len` entries from the law.
pub fn sample_entry_vector(law: EntryLaw, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..len).map(|_| law.draw(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::block_decompose;

    #[test]
    fn uncoupled_blocks() {
        let s = SymmetricMatrix::diagonal(&[3.0, -1.0, 0.5, 2.0]);
        let sys = DetectionSystem::from_matrix(&s).unwrap();
        let k = sys.detection_matrix(0.25).unwrap();
        assert_eq!(k, [[0.25 - 3.0, 0.0], [0.0, 0.25 + 1.0]]);
        let r = sys.all_roots();
        assert_eq!(r.roots.len(), 2);
        assert!((r.roots[0] - 3.0).abs() < 1e-12 && (r.roots[1] + 1.0).abs() < 1e-12);
        let mut u = sys.uncoupled_eigenvalues();
        u.sort_by(f64::total_cmp);
        assert_eq!(u, vec![0.5, 2.0]);
        let v = sys.reconstruct_eigenvector(r.roots[0]).unwrap();
        assert!(v[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_by_two_secular() {
        let m = eigendecompose(&SymmetricMatrix::diagonal(&[1.0, -1.0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let prob = SecularProblem::new(m, vec![h, h], 2.0).unwrap();
        let v = prob.secular_eigenvalues().values;
        let s2 = std::f64::consts::SQRT_2;
        assert!((v[0] - (1.0 + s2)).abs() < 1e-12, "{v:?}");
        assert!((v[1] - (1.0 - s2)).abs() < 1e-12, "{v:?}");
        assert!(SecularProblem::new(eigendecompose(&SymmetricMatrix::identity(2)).unwrap(), vec![1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn wgw_zero_column() {
        let mut s = SymmetricMatrix::from_fn(6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        for i in 2..6 {
            s.set(i, 1, 0.0);
        }
        let sys = DetectionSystem::new(block_decompose(&s).unwrap()).unwrap();
        assert_eq!(sys.wgw_residual(0.123, 1, 2).unwrap(), 0.0);
        assert!(sys.wgw_residual(0.123, 0, 2).is_err());
    }
}
