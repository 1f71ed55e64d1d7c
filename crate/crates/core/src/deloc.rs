//! Delocalization, rigidity and edge level-repulsion diagnostics, assembled
//! into typicality reports.
//!
//! The constants (`C`, `C_re`, …) have no prescribed values. They are
//! fields of [`TypicalityParams`]; the defaults come from the calibration run
//! stored in `calibration/typicality_n1000.json`.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::ensembles::SymmetricMatrix;
use crate::rng::rng_from;
use crate::spectral::{
    classical_locations, default_eta, eigendecompose, eigenvalues, phi_n, semicircle_stieltjes_c, stieltjes,
    ComplexPoint, Spectrum,
};
use crate::{Complex64, Error, Result};

/// `√n·‖v_α‖_∞` for every eigenvector.
pub fn linf_deloc(spec: &Spectrum) -> Vec<f64> {
    let sn = (spec.n() as f64).sqrt();
    (0..spec.n())
        .map(|a| sn * spec.vector(a).iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .collect()
}

/// Smallest mass `Σ_{i∈S} v_i²` over sets of `⌈fraction·n⌉` coordinates.
pub fn no_gaps_mass(v: &[f64], fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("fraction {fraction} outside (0,1]")));
    }
    let k = ((fraction * v.len() as f64).ceil() as usize).min(v.len());
    let mut sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    sq.sort_by(f64::total_cmp);
    Ok(sq[..k].iter().sum())
}

/// `max_α n⟨v_α, l⟩²`.
pub fn isotropic_overlap(spec: &Spectrum, l: &[f64]) -> Result<f64> {
    isotropic_overlap_on(spec, l, 0..spec.n())
}

/// Same maximum restricted to the listed eigenvector indices.
pub fn isotropic_overlap_on(spec: &Spectrum, l: &[f64], indices: impl IntoIterator<Item = usize>) -> Result<f64> {
    if l.len() != spec.n() {
        return Err(Error::Size("direction length differs from matrix size".into()));
    }
    let norm = l.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("direction must be a unit vector, norm is {norm}")));
    }
    let n = spec.n() as f64;
    Ok(indices
        .into_iter()
        .map(|a| {
            let o: f64 = spec.vector(a).iter().zip(l).map(|(x, y)| x * y).sum();
            n * o * o
        })
        .fold(0.0, f64::max))
}

/// `|λ_α − γ_α|·min(α, n−α+1)^{1/3}·n^{2/3}` for every `α`.
pub fn rigidity_residuals(eigs: &[f64]) -> Vec<f64> {
    let n = eigs.len();
    let gamma = classical_locations(n);
    rigidity_against(eigs, &gamma)
}

fn rigidity_against(eigs: &[f64], gamma: &[f64]) -> Vec<f64> {
    let n = gamma.len();
    let n23 = (n as f64).powf(2.0 / 3.0);
    eigs.iter()
        .zip(gamma)
        .enumerate()
        .map(|(k, (l, g))| {
            let a = k + 1;
            (l - g).abs() * (a.min(n - a + 1) as f64).cbrt() * n23
        })
        .collect()
}

/// Smallest gap between consecutive eigenvalues inside `[2 − w, 2 + w]`.
pub fn level_repulsion_min_gap(eigs: &[f64], w: f64) -> f64 {
    level_repulsion_min_gap_at(eigs, 2.0, w)
}

/// As [`level_repulsion_min_gap`] with the window centred at `center`.
/// Exact ties contribute a gap of 0; fewer than two eigenvalues give `+∞`.
pub fn level_repulsion_min_gap_at(eigs: &[f64], center: f64, w: f64) -> f64 {
    let mut inside: Vec<f64> = eigs.iter().copied().filter(|x| (x - center).abs() <= w).collect();
    inside.sort_by(f64::total_cmp);
    inside.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
}

/// `max |⟨x,G(E+iη)y⟩ − ⟨x,y⟩·m_sc(E+iη)|` over the energy grid and all
/// ordered pairs of directions.
pub fn isotropic_law_residual(spec: &Spectrum, energies: &[f64], eta: f64, directions: &[Vec<f64>]) -> Result<f64> {
    let n = spec.n();
    if directions.iter().any(|d| d.len() != n) {
        return Err(Error::Size("direction length differs from matrix size".into()));
    }
    ComplexPoint::new(0.0, eta)?;
    let k = directions.len();
    let overlaps: Vec<Vec<f64>> = directions.iter().map(|d| spec.overlaps(d)).collect();
    let mut inner = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            inner[a * k + b] = crate::spectral::dot(&directions[a], &directions[b]);
        }
    }
    let mut worst = 0.0f64;
    let mut weights = vec![Complex64::new(0.0, 0.0); n];
    for &e in energies {
        let z = Complex64::new(e, eta);
        for (w, &l) in weights.iter_mut().zip(&spec.eigenvalues) {
            *w = 1.0 / (l - z);
        }
        let msc = semicircle_stieltjes_c(z);
        for a in 0..k {
            for b in a..k {
                let mut g = Complex64::new(0.0, 0.0);
                for ((w, x), y) in weights.iter().zip(&overlaps[a]).zip(&overlaps[b]) {
                    g += w * (x * y);
                }
                worst = worst.max((g - inner[a * k + b] * msc).norm());
            }
        }
    }
    Ok(worst)
}

/// Energies `2 ± n^{−2/3+3ε}`, equispaced.
pub fn edge_energy_grid(n: usize, eps_lr: f64, points: usize) -> Vec<f64> {
    let half = (n as f64).powf(-2.0 / 3.0 + 3.0 * eps_lr);
    if points == 1 {
        return vec![2.0];
    }
    (0..points)
        .map(|k| 2.0 - half + 2.0 * half * k as f64 / (points - 1) as f64)
        .collect()
}

/// `{e_i : i ∈ sample} ∪ {l}` with `l` the unit equal-coordinate vector.
pub fn direction_set(n: usize, max_basis: usize, seed: u64) -> Vec<Vec<f64>> {
    let picks: Vec<usize> = if max_basis >= n {
        (0..n).collect()
    } else {
        let mut rng = rng_from(seed);
        let mut v = sample(&mut rng, n, max_basis).into_vec();
        v.sort_unstable();
        v
    };
    let mut dirs: Vec<Vec<f64>> = picks
        .into_iter()
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
    dirs
}

/// Which definition the report checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// Centered Wigner-type matrix, all five conditions on every eigenpair.
    Wigner,
    /// Matrix carrying a rank-one shift of strength `√(pn/(1−p))`: the leading
    /// eigenvalue is an outlier, rigidity compares `μ_{α+1}` with `γ_α`, the
    /// local law is tested on the Stieltjes transform and the eigenvector
    /// conditions on edge eigenvectors only.
    Shifted { p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub eps_lr: f64,
    pub rho: f64,
    /// Rigidity passes when the max residual is at most `φ_n^{c_re}`.
    pub c_re: f64,
    /// ℓ∞ passes when `max √n‖v‖_∞ ≤ φ_n^{c_linf}`.
    pub c_linf: f64,
    /// Isotropic delocalization passes when `max n⟨v,l⟩² ≤ n^{ε}·φ_n^{c_iso}`.
    pub c_iso: f64,
    /// Local law passes when the residual is below `law_const·n^{−1/3+3ε}`.
    pub law_const: f64,
    /// Edge window half-width `lr_window·n^{−2/3}`.
    pub lr_window: f64,
    /// Level repulsion passes when the min gap exceeds
    /// `θ·n^{−2/3−ε} − k·φ_n^{c_lr_loss}/n`.
    pub theta: f64,
    pub k: usize,
    pub c_lr_loss: f64,
    pub grid_points: usize,
    pub max_directions: usize,
    pub direction_seed: u64,
    /// Number of principal minors of each size `n−1`, `n−2` to check.
    pub minor_samples: usize,
    /// Minor edge eigenvalues must sit within `φ_n^{c_minor}/n` below a parent eigenvalue.
    pub c_minor: f64,
    pub variant: Variant,
}

impl Default for TypicalityParams {
    fn default() -> Self {
        TypicalityParams {
            eps_lr: 0.05,
            rho: 1.0,
            c_re: 1.0,
            c_linf: 1.0,
            c_iso: 1.0,
            law_const: 8.0,
            lr_window: 3.0,
            theta: 1.0,
            k: 0,
            c_lr_loss: 1.0,
            grid_points: 64,
            max_directions: 32,
            direction_seed: 0x7d1c_0001,
            minor_samples: 0,
            c_minor: 1.0,
            variant: Variant::Wigner,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub isotropic_law: f64,
    pub rigidity: f64,
    pub linf: f64,
    pub isotropic_overlap: f64,
    pub min_edge_gap: f64,
    pub edge_window: f64,
    pub eta: f64,
    pub minor_closeness: f64,
    pub leading_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub isotropic_law: bool,
    pub rigidity: bool,
    pub linf: bool,
    pub isotropic_overlap: bool,
    pub level_repulsion: bool,
    pub leading_eigenvalue: Option<bool>,
    pub minors: Option<bool>,
}

impl Flags {
    pub fn all(&self) -> bool {
        self.isotropic_law
            && self.rigidity
            && self.linf
            && self.isotropic_overlap
            && self.level_repulsion
            && self.leading_eigenvalue.unwrap_or(true)
            && self.minors.unwrap_or(true)
    }
}

/// Principal-minor consistency: exact Cauchy interlacing and closeness of
/// minor edge eigenvalues to parent eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorReport {
    pub minors_checked: usize,
    pub interlacing_violations: usize,
    /// `max n·(λ − μ)` over minor edge eigenvalues `μ`, `λ` the nearest parent
    /// eigenvalue at or above `μ`.
    pub max_scaled_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub params: TypicalityParams,
    pub thresholds: Thresholds,
    pub isotropic_law_residual: f64,
    pub rigidity_residuals: Vec<f64>,
    pub rigidity_max: f64,
    pub linf_max: f64,
    pub isotropic_overlap: f64,
    pub min_edge_gap: f64,
    pub leading_eigenvalue: Option<f64>,
    pub minors: Option<MinorReport>,
    pub flags: Flags,
}

impl TypicalityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "n,isotropic_law_residual,rigidity_max,linf_max,isotropic_overlap,min_edge_gap,\
law_pass,rigidity_pass,linf_pass,overlap_pass,repulsion_pass,all_pass";

    pub fn csv_row(&self) -> String {
        let f = &self.flags;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.isotropic_law_residual,
            self.rigidity_max,
            self.linf_max,
            self.isotropic_overlap,
            self.min_edge_gap,
            f.isotropic_law,
            f.rigidity,
            f.linf,
            f.isotropic_overlap,
            f.level_repulsion,
            f.all()
        )
    }
}

fn thresholds(n: usize, p: &TypicalityParams) -> Thresholds {
    let nf = n as f64;
    let phi = phi_n(n);
    let e = p.eps_lr;
    let shifted = matches!(p.variant, Variant::Shifted { .. });
    Thresholds {
        isotropic_law: p.law_const * nf.powf(-1.0 / 3.0 + 3.0 * e),
        rigidity: phi.powf(if shifted { 2.0 * p.c_re } else { p.c_re }),
        linf: phi.powf(p.c_linf),
        isotropic_overlap: nf.powf(e) * phi.powf(p.c_iso),
        min_edge_gap: p.theta * nf.powf(-2.0 / 3.0 - e) - p.k as f64 * phi.powf(p.c_lr_loss) / nf,
        edge_window: p.lr_window * nf.powf(-2.0 / 3.0),
        eta: default_eta(n, e),
        minor_closeness: phi.powf(p.c_minor),
        leading_eigenvalue: match p.variant {
            Variant::Shifted { p } => Some(0.5 * (p * nf / (1.0 - p)).sqrt()),
            Variant::Wigner => None,
        },
    }
}

/// Evaluates every condition of the chosen definition on `s`.
pub fn typicality_check(s: &SymmetricMatrix, params: &TypicalityParams) -> Result<TypicalityReport> {
    let spec = eigendecompose(s)?;
    typicality_from_spectrum(s, &spec, params)
}

/// As [`typicality_check`] when the spectrum is already known.
pub fn typicality_from_spectrum(s: &SymmetricMatrix, spec: &Spectrum, params: &TypicalityParams) -> Result<TypicalityReport> {
    let n = spec.n();
    if n < 2 {
        return Err(Error::Size("typicality needs n >= 2".into()));
    }
    let th = thresholds(n, params);
    let eigs = &spec.eigenvalues;
    let grid = edge_energy_grid(n, params.eps_lr, params.grid_points);
    let l = vec![1.0 / (n as f64).sqrt(); n];
    let edge: Vec<usize> = (0..n).filter(|&a| (eigs[a] - 2.0).abs() <= th.edge_window).collect();

    let (law, rig, linf, iso, leading) = match params.variant {
        Variant::Wigner => {
            let dirs = direction_set(n, params.max_directions, params.direction_seed);
            let law = isotropic_law_residual(spec, &grid, th.eta, &dirs)?;
            let rig = rigidity_residuals(eigs);
            let linf = linf_deloc(spec).into_iter().fold(0.0, f64::max);
            let iso = isotropic_overlap(spec, &l)?;
            (law, rig, linf, iso, None)
        }
        Variant::Shifted { .. } => {
            let law = grid
                .iter()
                .map(|&e| {
                    let z = ComplexPoint { e, eta: th.eta };
                    (stieltjes(eigs, z) - semicircle_stieltjes_c(z.z())).norm()
                })
                .fold(0.0, f64::max);
            let gamma = classical_locations(n);
            let rig = rigidity_against(&eigs[1..], &gamma[..n - 1]);
            let lv = linf_deloc(spec);
            let linf = edge.iter().map(|&a| lv[a]).fold(0.0, f64::max);
            let iso = isotropic_overlap_on(spec, &l, edge.iter().copied())?;
            (law, rig, linf, iso, Some(eigs[0]))
        }
    };
    let rigidity_max = rig.iter().copied().fold(0.0, f64::max);
    let min_edge_gap = level_repulsion_min_gap(eigs, th.edge_window);

    let minors = if params.minor_samples > 0 {
        Some(minor_consistency(s, eigs, params.minor_samples, th.edge_window, params.direction_seed ^ 0x3c3c)?)
    } else {
        None
    };

    let flags = Flags {
        isotropic_law: law < th.isotropic_law,
        rigidity: rigidity_max <= th.rigidity,
        linf: linf <= th.linf,
        isotropic_overlap: iso <= th.isotropic_overlap,
        level_repulsion: min_edge_gap > th.min_edge_gap,
        leading_eigenvalue: th.leading_eigenvalue.zip(leading).map(|(t, v)| v >= t),
        minors: minors
            .as_ref()
            .map(|m| m.interlacing_violations == 0 && m.max_scaled_distance <= th.minor_closeness),
    };
    Ok(TypicalityReport {
        n,
        params: params.clone(),
        thresholds: th,
        isotropic_law_residual: law,
        rigidity_residuals: rig,
        rigidity_max,
        linf_max: linf,
        isotropic_overlap: iso,
        min_edge_gap,
        leading_eigenvalue: leading,
        minors,
        flags,
    })
}

/// Number of Cauchy interlacing violations between parent eigenvalues and
/// those of a minor with `removed` rows deleted (both non-increasing).
pub fn interlacing_violations(parent: &[f64], minor: &[f64], removed: usize) -> usize {
    minor
        .iter()
        .enumerate()
        .filter(|&(i, &mu)| !(parent[i] >= mu && mu >= parent[i + removed]))
        .count()
}

/// Checks `samples` random minors of sizes `n−1` and `n−2`.
pub fn minor_consistency(
    s: &SymmetricMatrix,
    parent: &[f64],
    samples: usize,
    edge_window: f64,
    seed: u64,
) -> Result<MinorReport> {
    let n = s.n();
    let mut rng = rng_from(seed);
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for removed in [1usize, 2] {
        if n <= removed + 1 {
            continue;
        }
        for _ in 0..samples {
            let mut drop = sample(&mut rng, n, removed).into_vec();
            drop.sort_unstable();
            let mu = eigenvalues(&s.remove_indices(&drop))?;
            violations += interlacing_violations(parent, &mu, removed);
            for &m in mu.iter().filter(|m| (*m - 2.0).abs() <= edge_window) {
                let above = parent.iter().copied().filter(|&l| l >= m).fold(f64::INFINITY, f64::min);
                worst = worst.max(n as f64 * (above - m));
            }
            checked += 1;
        }
    }
    Ok(MinorReport {
        minors_checked: checked,
        interlacing_violations: violations,
        max_scaled_distance: worst,
    })
}
