//! Resolvent rank-one expansion, the diagonal-swap comparison statistic and
//! local-law sweeps along the interpolation path `W̃ = W_{0,0} → W_{n,0} = W`.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::deloc::isotropic_law_residual;
use crate::ensembles::{lindeberg_matrix, normalize_shifted, sample_gnp, sample_goe, sample_goe_zero_diagonal, SymmetricMatrix};
use crate::par::map_trials;
use crate::quad::{composite_legendre, integrate};
use crate::rng::{rng_from, substream, trial_seed};
use crate::spectral::{eigendecompose, eigenvalues, phi_n, ComplexPoint, Spectrum};
use crate::{Complex64, Error, Result};

/// Dense complex `n×n` Green function `(A − z)⁻¹`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolvent {
    n: usize,
    z: Complex64,
    data: Vec<Complex64>,
}

impl Resolvent {
    pub fn from_parts(n: usize, z: Complex64, data: Vec<Complex64>) -> Result<Self> {
        if z.im == 0.0 || !z.im.is_finite() {
            return Err(Error::Domain(format!("spectral parameter {z} is on the real axis")));
        }
        if data.len() != n * n {
            return Err(Error::Size(format!("expected {} entries, got {}", n * n, data.len())));
        }
        Ok(Resolvent { n, z, data })
    }

    /// `Σ_α v_α v_αᵀ/(λ_α − z)`.
    pub fn from_spectrum(spec: &Spectrum, z: ComplexPoint) -> Self {
        let n = spec.n();
        let zc = z.z();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (a, &l) in spec.eigenvalues.iter().enumerate() {
            let wa = 1.0 / (l - zc);
            let v = spec.vector(a);
            for i in 0..n {
                let s = wa * v[i];
                for (g, &vj) in data[i * n..(i + 1) * n].iter_mut().zip(v) {
                    *g += s * vj;
                }
            }
        }
        Resolvent { n, z: zc, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &Resolvent) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check(&self, k: usize, pivot: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Config("expansion order must be at least 1".into()));
        }
        if pivot >= self.n {
            return Err(Error::Size(format!("pivot {pivot} outside 0..{}", self.n)));
        }
        Ok(())
    }

    /// Truncated expansion for the Green function of `A + h·e_γe_γᵀ`:
    /// `R_ij − h R_iγ R_γj Σ_{l=0}^{k} (−h R_γγ)^l`, remainder dropped.
    pub fn rank_one_expand(&self, h: f64, k: usize, pivot: usize) -> Result<Resolvent> {
        self.check(k, pivot)?;
        let x = -h * self.get(pivot, pivot);
        let mut series = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..=k {
            series += term;
            term *= x;
        }
        Ok(self.update(pivot, -h * series))
    }

    /// Sherman–Morrison: `R_ij − h R_iγ R_γj / (1 + h R_γγ)`.
    pub fn rank_one_exact(&self, h: f64, pivot: usize) -> Result<Resolvent> {
        self.check(1, pivot)?;
        let den = 1.0 + h * self.get(pivot, pivot);
        Ok(self.update(pivot, -h / den))
    }

    /// Largest entry of `|S_ij − RHS_ij|` where the right side is the
    /// order-`k` identity `R_ij − h R_iγ R_γj Σ_{l=0}^{k−2}(−hR_γγ)^l
    /// + (−1)^k h^k R_iγ R_γγ^{k−1} S_γj`, exact for every `k ≥ 1`.
    pub fn expansion_identity_residual(&self, s: &Resolvent, h: f64, k: usize, pivot: usize) -> Result<f64> {
        self.check(k, pivot)?;
        if s.n != self.n {
            return Err(Error::Size("resolvents differ in size".into()));
        }
        let n = self.n;
        let rgg = self.get(pivot, pivot);
        let x = -h * rgg;
        let mut series = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..k.saturating_sub(1) {
            series += term;
            term *= x;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let tail = sign * h.powi(k as i32) * rgg.powi(k as i32 - 1);
        let mut worst = 0.0f64;
        for i in 0..n {
            let rig = self.get(i, pivot);
            for j in 0..n {
                let rhs = self.get(i, j) - h * rig * self.get(pivot, j) * series + tail * rig * s.get(pivot, j);
                worst = worst.max((s.get(i, j) - rhs).norm());
            }
        }
        Ok(worst)
    }

    /// `R_ij + coeff·R_iγ·R_γj`.
    fn update(&self, pivot: usize, coeff: Complex64) -> Resolvent {
        let n = self.n;
        let col: Vec<Complex64> = (0..n).map(|i| self.get(i, pivot) * coeff).collect();
        let row = &self.data[pivot * n..(pivot + 1) * n];
        let mut data = self.data.clone();
        for i in 0..n {
            for (d, r) in data[i * n..(i + 1) * n].iter_mut().zip(row) {
                *d += col[i] * r;
            }
        }
        Resolvent { n, z: self.z, data }
    }
}

/// Bounded smooth test functions with known derivative bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `1/(1 + e^{−x})`.
    Logistic,
    /// `e^{−x²/2}`.
    GaussianBump,
    /// `0` below 0, `3x² − 2x³` on `[0,1]`, `1` above.
    CubicCap,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::Logistic, TestFunction::GaussianBump, TestFunction::CubicCap];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::Logistic => 1.0 / (1.0 + (-x).exp()),
            TestFunction::GaussianBump => (-0.5 * x * x).exp(),
            TestFunction::CubicCap => {
                let t = x.clamp(0.0, 1.0);
                t * t * (3.0 - 2.0 * t)
            }
        }
    }

    /// `(sup|F|, sup|F′|, sup|F″|)`.
    pub fn bounds(self) -> (f64, f64, f64) {
        match self {
            TestFunction::Logistic => (1.0, 0.25, 1.0 / (6.0 * 3f64.sqrt())),
            TestFunction::GaussianBump => (1.0, (-0.5f64).exp(), 1.0),
            TestFunction::CubicCap => (1.0, 1.5, 6.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Logistic => "logistic",
            TestFunction::GaussianBump => "gaussian_bump",
            TestFunction::CubicCap => "cubic_cap",
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown test function `{s}`")))
    }
}

/// `F(n ∫_{E1}^{E2} Im m(y + iη) dy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStatistic {
    pub e1: f64,
    pub e2: f64,
    pub eta: f64,
    pub f: TestFunction,
}

impl ComparisonStatistic {
    /// `E1,2 = 2 ∓ n^{−2/3+ε}`, `η = n^{−2/3−ε}`.
    pub fn edge(n: usize, eps: f64, f: TestFunction) -> Self {
        let nf = n as f64;
        let w = nf.powf(-2.0 / 3.0 + eps);
        ComparisonStatistic {
            e1: 2.0 - w,
            e2: 2.0 + w,
            eta: nf.powf(-2.0 / 3.0 - eps),
            f,
        }
    }

    /// `n·Im m(y + iη) = Σ_α η/((λ_α − y)² + η²)`.
    pub fn n_im_m(&self, eigs: &[f64], y: f64) -> f64 {
        let e2 = self.eta * self.eta;
        eigs.iter().map(|l| self.eta / ((l - y) * (l - y) + e2)).sum()
    }

    /// `n ∫ Im m` by adaptive Gauss–Kronrod, split at the eigenvalues inside
    /// the window where the integrand peaks.
    pub fn counting_integral(&self, eigs: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = eigs.iter().copied().filter(|&l| l > self.e1 && l < self.e2).collect();
        cuts.push(self.e1);
        cuts.push(self.e2);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|p| integrate(|y| self.n_im_m(eigs, y), p[0], p[1], 1e-12))
            .sum()
    }

    /// The same integral on a fixed composite Gauss–Legendre grid.
    pub fn counting_integral_fixed(&self, eigs: &[f64], panels: usize) -> f64 {
        composite_legendre(|y| self.n_im_m(eigs, y), self.e1, self.e2, panels, 10)
    }

    pub fn value(&self, eigs: &[f64]) -> f64 {
        self.f.eval(self.counting_integral(eigs))
    }
}

/// Matrix families entering the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonEnsemble {
    Goe,
    GoeZeroDiagonal,
    /// Centered, zero-diagonal `H` of a `G(n,p)` graph.
    Gnp { p: f64 },
}

impl ComparisonEnsemble {
    pub fn sample(self, n: usize, seed: u64) -> Result<SymmetricMatrix> {
        match self {
            ComparisonEnsemble::Goe => sample_goe(n, seed),
            ComparisonEnsemble::GoeZeroDiagonal => sample_goe_zero_diagonal(n, seed),
            ComparisonEnsemble::Gnp { p } => Ok(normalize_shifted(&sample_gnp(n, p, seed)?, p)?.centered),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub trials: usize,
    pub statistic: ComparisonStatistic,
    pub mean_a: f64,
    pub mean_b: f64,
    pub gap: f64,
    /// Standard error of the mean paired difference (both ensembles use the
    /// same per-trial seed).
    pub se: f64,
    /// Standard error treating the two samples as independent.
    pub se_unpaired: f64,
    pub values_a: Vec<f64>,
    pub values_b: Vec<f64>,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// `|Ê_A F − Ê_B F|` over `trials` seeds `trial_seed(seed, t)` shared by
/// both ensembles.
pub fn lindeberg_gap(
    stat: &ComparisonStatistic,
    a: ComparisonEnsemble,
    b: ComparisonEnsemble,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<GapReport> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let rows = map_trials(trials, workers, |t| -> Result<(f64, f64)> {
        let s = trial_seed(seed, t as u64);
        let va = stat.value(&eigenvalues(&a.sample(n, s)?)?);
        let vb = if a == b {
            va
        } else {
            stat.value(&eigenvalues(&b.sample(n, s)?)?)
        };
        Ok((va, vb))
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let values_a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let values_b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diffs: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (mean_a, var_a) = mean_var(&values_a);
    let (mean_b, var_b) = mean_var(&values_b);
    let (_, var_d) = mean_var(&diffs);
    let tf = trials as f64;
    Ok(GapReport {
        n,
        trials,
        statistic: *stat,
        mean_a,
        mean_b,
        gap: (mean_a - mean_b).abs(),
        se: (var_d / tf).sqrt(),
        se_unpaired: ((var_a + var_b) / tf).sqrt(),
        values_a,
        values_b,
    })
}

/// `c·n^{−1/3+c·ε}`.
pub fn comparison_envelope(n: usize, c: f64, eps: f64) -> f64 {
    c * (n as f64).powf(-1.0 / 3.0 + c * eps)
}

/// Where the sweep evaluates the path and the local law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub betas: Vec<usize>,
    pub gammas: Vec<usize>,
    /// Evaluate `γ + 1` next to every checkpoint `γ < n` for the growth check.
    pub step_pairs: bool,
    pub eps: f64,
    pub energy_points: usize,
    /// Coordinates `i, j` whose entries `G_ij` are compared.
    pub coordinates: usize,
    pub coordinate_seed: u64,
}

impl SweepGrid {
    /// `β, γ ∈ {0, n/4, n/2, 3n/4, n}`.
    pub fn checkpoints(n: usize, eps: f64, coordinates: usize, coordinate_seed: u64) -> Self {
        let cps: Vec<usize> = (0..=4).map(|k| k * n / 4).collect();
        SweepGrid {
            betas: cps.clone(),
            gammas: cps,
            step_pairs: true,
            eps,
            energy_points: 64,
            coordinates,
            coordinate_seed,
        }
    }

    /// All `β` with checkpoint `γ`.
    pub fn full_beta(n: usize, eps: f64, coordinates: usize, coordinate_seed: u64) -> Self {
        SweepGrid {
            betas: (0..=n).collect(),
            ..Self::checkpoints(n, eps, coordinates, coordinate_seed)
        }
    }

    /// `η = n^{−2/3−2ε}`.
    pub fn eta(&self, n: usize) -> f64 {
        (n as f64).powf(-2.0 / 3.0 - 2.0 * self.eps)
    }

    /// Equispaced energies in `|E − 2| ≤ n^{−2/3+ε}`.
    pub fn energies(&self, n: usize) -> Vec<f64> {
        let w = (n as f64).powf(-2.0 / 3.0 + self.eps);
        let k = self.energy_points.max(2);
        (0..k).map(|i| 2.0 - w + 2.0 * w * i as f64 / (k - 1) as f64).collect()
    }

    /// Path points `(β, γ)` in path order, dropping those past `W_{n,0}`.
    pub fn points(&self, n: usize) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for &b in &self.betas {
            for &g in &self.gammas {
                if b > n || g > n || (b == n && g > 0) {
                    continue;
                }
                pts.push((b, g));
                if self.step_pairs && g < n && !(b == n) {
                    pts.push((b, g + 1));
                }
            }
        }
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub beta: usize,
    pub gamma: usize,
    /// Energy at which the residual is largest.
    pub e: f64,
    pub residual: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "n,beta,gamma,E,residual";

    pub fn csv(&self) -> String {
        format!("{},{},{},{:.17e},{:.17e}", self.n, self.beta, self.gamma, self.e, self.residual)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub points: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass_fraction: f64,
    pub growth_steps: usize,
    pub growth_bound: f64,
    pub growth_pass_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub coordinates: Vec<usize>,
    /// Ratios `residual(β, γ+1)/residual(β, γ)` at every step pair.
    pub growth: Vec<f64>,
}

impl SweepResult {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from(SweepRow::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    /// Pass fractions against `threshold` and against the growth bound
    /// `1 + growth_const/(φ_n n)`.
    pub fn summary(&self, threshold: f64, growth_const: f64) -> SweepSummary {
        let n = self.rows.first().map_or(0, |r| r.n);
        let bound = 1.0 + growth_const / (phi_n(n.max(3)) * n.max(1) as f64);
        let frac = |k: usize, m: usize| if m == 0 { 1.0 } else { k as f64 / m as f64 };
        SweepSummary {
            n,
            points: self.rows.len(),
            max_residual: self.max_residual(),
            threshold,
            pass_fraction: frac(self.rows.iter().filter(|r| r.residual <= threshold).count(), self.rows.len()),
            growth_steps: self.growth.len(),
            growth_bound: bound,
            growth_pass_fraction: frac(self.growth.iter().filter(|&&g| g <= bound).count(), self.growth.len()),
        }
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// `max |G_ij(E + iη) − δ_ij m_sc(E + iη)|` over the energy grid and the
/// chosen coordinates, returned with the maximizing energy.
pub fn coordinate_law_residual(spec: &Spectrum, coords: &[usize], energies: &[f64], eta: f64) -> Result<(f64, f64)> {
    let dirs: Vec<Vec<f64>> = coords.iter().map(|&i| unit(spec.n(), i)).collect();
    let mut best = (f64::NEG_INFINITY, energies.first().copied().unwrap_or(2.0));
    for &e in energies {
        let r = isotropic_law_residual(spec, &[e], eta, &dirs)?;
        if r > best.0 {
            best = (r, e);
        }
    }
    Ok(best)
}

/// Local-law residuals of `W_{β,γ}` at the grid's path points.
pub fn interpolation_local_law_sweep(base: &SymmetricMatrix, increments: &[f64], grid: &SweepGrid) -> Result<SweepResult> {
    let n = base.n();
    if grid.coordinates == 0 {
        return Err(Error::Config("the sweep needs at least one coordinate".into()));
    }
    let coords: Vec<usize> = if grid.coordinates >= n {
        (0..n).collect()
    } else {
        let mut v = sample(&mut rng_from(grid.coordinate_seed), n, grid.coordinates).into_vec();
        v.sort_unstable();
        v
    };
    let energies = grid.energies(n);
    let eta = grid.eta(n);
    let mut rows = Vec::new();
    for (b, g) in grid.points(n) {
        let w = lindeberg_matrix(base, increments, b, g)?;
        let spec = eigendecompose(&w)?;
        let (residual, e) = coordinate_law_residual(&spec, &coords, &energies, eta)?;
        rows.push(SweepRow {
            n,
            beta: b,
            gamma: g,
            e,
            residual,
        });
    }
    let mut growth = Vec::new();
    if grid.step_pairs {
        for r in &rows {
            if grid.gammas.contains(&r.gamma) {
                if let Some(next) = rows.iter().find(|q| q.beta == r.beta && q.gamma == r.gamma + 1) {
                    growth.push(next.residual / r.residual);
                }
            }
        }
    }
    Ok(SweepResult {
        rows,
        coordinates: coords,
        growth,
    })
}

/// One sweep per trial over an independent `(W̃, h)` pair.
pub fn sweep_trials(n: usize, grid: &SweepGrid, trials: usize, seed: u64, workers: usize) -> Result<Vec<SweepResult>> {
    map_trials(trials, workers, |t| {
        let s = trial_seed(seed, t as u64);
        let base = sample_goe_zero_diagonal(n, substream(s, 1))?;
        let inc = crate::ensembles::lindeberg_increments(n, substream(s, 2))?;
        let g = SweepGrid {
            coordinate_seed: substream(s, 3),
            ..grid.clone()
        };
        interpolation_local_law_sweep(&base, &inc, &g)
    })
    .into_iter()
    .collect()
}
