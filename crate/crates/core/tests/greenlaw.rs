use nodal_core::ensembles::{lindeberg_increments, sample_goe, sample_goe_zero_diagonal, SymmetricMatrix};
use nodal_core::greenlaw::*;
use nodal_core::spectral::{eigendecompose, eigenvalues, semicircle_stieltjes_c, ComplexPoint};
use nodal_core::Complex64;
use proptest::prelude::*;

mod common;
use common::complex_inverse;

fn resolvent_of(s: &SymmetricMatrix, z: ComplexPoint) -> Resolvent {
    Resolvent::from_spectrum(&eigendecompose(s).unwrap(), z)
}

fn max_diff_dense(r: &Resolvent, dense: &[Vec<Complex64>]) -> f64 {
    let n = r.n();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (r.get(i, j) - dense[i][j]).norm())
        .fold(0.0, f64::max)
}

fn bumped(s: &SymmetricMatrix, h: f64, pivot: usize) -> SymmetricMatrix {
    let mut t = s.clone();
    t.set(pivot, pivot, s.get(pivot, pivot) + h);
    t
}

#[test]
fn resolvent_matches_inverse() {
    let s = sample_goe(25, 1).unwrap();
    let z = ComplexPoint::new(1.1, 0.2).unwrap();
    let r = resolvent_of(&s, z);
    assert!(max_diff_dense(&r, &complex_inverse(&s, z.z())) < 1e-11);
}

#[test]
fn sherman_morrison_matches_inverse() {
    let s = sample_goe(25, 2).unwrap();
    let z = ComplexPoint::new(-0.4, 0.05).unwrap();
    let r = resolvent_of(&s, z);
    for (h, pivot) in [(0.3, 0), (-1.2, 7), (5.0, 24)] {
        let exact = r.rank_one_exact(h, pivot).unwrap();
        let direct = complex_inverse(&bumped(&s, h, pivot), z.z());
        assert!(max_diff_dense(&exact, &direct) < 1e-9, "h {h}");
    }
    assert!(r.rank_one_exact(1.0, 25).is_err());
    assert!(r.rank_one_expand(1.0, 0, 0).is_err());
}

#[test]
fn truncated_expansion_converges() {
    let n = 20;
    let s = sample_goe(n, 3).unwrap();
    let z = ComplexPoint::new(0.5, 0.5).unwrap();
    let r = resolvent_of(&s, z);
    let h = 0.05;
    let exact = r.rank_one_exact(h, 4).unwrap();
    let x = (h * r.get(4, 4)).norm();
    assert!(x < 0.5);
    let mut prev = f64::INFINITY;
    for k in 1..5 {
        let err = r.rank_one_expand(h, k, 4).unwrap().max_abs_diff(&exact);
        assert!(err < prev, "k {k}");
        // geometric tail of the Neumann series
        let bound = h * (0..n).map(|i| r.get(i, 4).norm()).fold(0.0, f64::max).powi(2) * x.powi(k as i32 + 1) / (1.0 - x);
        assert!(err <= bound * (1.0 + 1e-9) + 1e-15, "k {k}: {err} > {bound}");
        prev = err;
    }
}

#[test]
fn expansion_identity_is_exact() {
    let n = 30;
    let s = sample_goe(n, 4).unwrap();
    let z = ComplexPoint::new(1.9, 0.02).unwrap();
    let r = resolvent_of(&s, z);
    for (h, pivot) in [(0.1, 3), (0.8, 11), (-0.5, 29)] {
        // S from its own eigendecomposition, not from R
        let sres = resolvent_of(&bumped(&s, h, pivot), z);
        for k in 1..=6 {
            let res = r.expansion_identity_residual(&sres, h, k, pivot).unwrap();
            assert!(res <= 1e-10, "h {h}, k {k}: {res}");
        }
        // the untruncated series without remainder is not exact
        let wrong = r.rank_one_expand(h, 1, pivot).unwrap().max_abs_diff(&sres);
        assert!(wrong > 1e-8);
    }
}

#[test]
fn coordinate_residual_matches_dense_entries() {
    let n = 24;
    let s = sample_goe(n, 6).unwrap();
    let spec = eigendecompose(&s).unwrap();
    let coords = [0usize, 5, 17];
    let energies = [1.7, 2.0, 2.2];
    let eta = 0.03;
    let mut best = (0.0f64, 0.0);
    for &e in &energies {
        let z = Complex64::new(e, eta);
        let g = complex_inverse(&s, z);
        let m = semicircle_stieltjes_c(z);
        for &i in &coords {
            for &j in &coords {
                let d = if i == j { m } else { Complex64::new(0.0, 0.0) };
                let r = (g[i][j] - d).norm();
                if r > best.0 {
                    best = (r, e);
                }
            }
        }
    }
    let (res, e) = coordinate_law_residual(&spec, &coords, &energies, eta).unwrap();
    assert!((res - best.0).abs() < 1e-9);
    assert_eq!(e, best.1);
}

#[test]
fn counting_integral_closed_form() {
    // ∫ η/((λ−y)² + η²) dy = atan((E₂−λ)/η) − atan((E₁−λ)/η)
    let n = 200;
    let eigs = eigenvalues(&sample_goe(n, 7).unwrap()).unwrap();
    let stat = ComparisonStatistic::edge(n, 0.05, TestFunction::Logistic);
    let exact: f64 = eigs
        .iter()
        .map(|l| ((stat.e2 - l) / stat.eta).atan() - ((stat.e1 - l) / stat.eta).atan())
        .sum();
    let adaptive = stat.counting_integral(&eigs);
    assert!((adaptive - exact).abs() < 1e-8 * (1.0 + exact.abs()), "{adaptive} vs {exact}");
    let fixed = stat.counting_integral_fixed(&eigs, 4000);
    assert!((fixed - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{fixed} vs {exact}");
    assert!((stat.value(&eigs) - TestFunction::Logistic.eval(exact)).abs() < 1e-8);
}

#[test]
fn gap_of_identical_ensembles_is_zero() {
    let stat = ComparisonStatistic::edge(40, 0.05, TestFunction::GaussianBump);
    let g = lindeberg_gap(&stat, ComparisonEnsemble::Goe, ComparisonEnsemble::Goe, 40, 6, 1, 1).unwrap();
    assert_eq!(g.gap, 0.0);
    assert_eq!(g.se, 0.0);
    let a = lindeberg_gap(&stat, ComparisonEnsemble::Goe, ComparisonEnsemble::GoeZeroDiagonal, 40, 6, 1, 1).unwrap();
    let b = lindeberg_gap(&stat, ComparisonEnsemble::Goe, ComparisonEnsemble::GoeZeroDiagonal, 40, 6, 1, 3).unwrap();
    assert_eq!(a, b);
    assert!(lindeberg_gap(&stat, ComparisonEnsemble::Goe, ComparisonEnsemble::Goe, 40, 0, 1, 1).is_err());
    assert!("nope".parse::<TestFunction>().is_err());
}

#[test]
fn sweep_rows_match_direct_evaluation() {
    let n = 16;
    let base = sample_goe_zero_diagonal(n, 2).unwrap();
    let inc = lindeberg_increments(n, 3).unwrap();
    let grid = SweepGrid {
        energy_points: 8,
        ..SweepGrid::checkpoints(n, 0.01, 3, 5)
    };
    let res = interpolation_local_law_sweep(&base, &inc, &grid).unwrap();
    assert_eq!(res.rows.len(), grid.points(n).len());
    assert!(res.rows.iter().any(|r| r.beta == n && r.gamma == 0));
    let row = res.rows.iter().find(|r| r.beta == n / 2 && r.gamma == n / 4 + 1).unwrap();
    let w = nodal_core::ensembles::lindeberg_matrix(&base, &inc, row.beta, row.gamma).unwrap();
    let (want, _) = coordinate_law_residual(&eigendecompose(&w).unwrap(), &res.coordinates, &grid.energies(n), grid.eta(n)).unwrap();
    assert_eq!(row.residual, want);
    assert_eq!(res.csv().lines().count(), res.rows.len() + 1);
    let summary = res.summary(f64::INFINITY, 10.0);
    assert_eq!(summary.pass_fraction, 1.0);
    assert_eq!(summary.growth_steps, res.growth.len());
}

#[test]
fn sweep_trials_independent_of_workers() {
    let grid = SweepGrid {
        energy_points: 4,
        ..SweepGrid::checkpoints(12, 0.01, 2, 0)
    };
    let a = sweep_trials(12, &grid, 3, 77, 1).unwrap();
    let b = sweep_trials(12, &grid, 3, 77, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a[0].rows, a[1].rows);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_residual_small(n in 4usize..16, seed in any::<u64>(), h in -2.0f64..2.0, e in -2.5f64..2.5,
                               eta in 0.01f64..1.0, k in 1usize..6, pivot_frac in 0.0f64..1.0) {
        let s = sample_goe(n, seed).unwrap();
        let z = ComplexPoint::new(e, eta).unwrap();
        let pivot = ((pivot_frac * n as f64) as usize).min(n - 1);
        let r = resolvent_of(&s, z);
        let sres = resolvent_of(&bumped(&s, h, pivot), z);
        // entries are at most 1/η, the tail term carries |h|^k |R|^{k-1}
        let scale = (1.0 / eta).powi(k as i32 + 1) * (1.0 + h.abs()).powi(k as i32);
        let res = r.expansion_identity_residual(&sres, h, k, pivot).unwrap();
        prop_assert!(res <= 1e-12 * scale.max(1.0), "{} vs scale {}", res, scale);
    }
}
