use nodal_core::edge::*;
use nodal_core::ensembles::{block_decompose, normalize_shifted, sample_gnp, AdjacencyMatrix, SymmetricMatrix};
use nodal_core::spectral::{eigendecompose, eigenvalues};
use nodal_core::Complex64;
use proptest::prelude::*;

mod common;
use common::complex_solve;

fn shifted(n: usize, p: f64, seed: u64) -> SymmetricMatrix {
    normalize_shifted(&sample_gnp(n, p, seed).unwrap(), p).unwrap().shifted
}

/// Roots plus uncoupled eigenvalues of `B`, sorted non-increasing.
fn detected(sys: &DetectionSystem) -> Vec<f64> {
    let mut all = sys.all_roots().roots;
    all.extend(sys.uncoupled_eigenvalues());
    all.sort_by(|a, b| b.total_cmp(a));
    all
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn roots_recover_spectrum() {
    for (k, n) in [6usize, 11, 23, 40, 64].into_iter().enumerate() {
        let s = shifted(n, 0.2 + 0.15 * k as f64, 100 + k as u64);
        let sys = DetectionSystem::from_matrix(&s).unwrap();
        let direct = eigendecompose(&s).unwrap();
        let found = detected(&sys);
        assert!(max_diff(&found, &direct.eigenvalues) < 1e-8, "n {n}");
        let report = DetectionReport::build(&sys, &sys.all_roots());
        // roots sitting on an eigenvalue of B have no reconstruction
        for (r, &l) in report.eigen_residuals.iter().zip(&report.roots) {
            if r.is_finite() {
                assert!(*r < 1e-8, "n {n}: {}", report.to_json());
            } else {
                assert!(sys.mu().iter().any(|&m| (m - l).abs() < 1e-8), "n {n}: {}", report.to_json());
            }
        }
        // simple eigenvalues: reconstructed vectors agree with the direct ones
        for (a, &l) in direct.eigenvalues.iter().enumerate() {
            let isolated = direct.eigenvalues.iter().enumerate().all(|(b, &m)| b == a || (m - l).abs() > 1e-6);
            if !isolated || sys.uncoupled_eigenvalues().iter().any(|&u| (u - l).abs() < 1e-6) {
                continue;
            }
            let root = *sys.all_roots().roots.iter().min_by(|x, y| (*x - l).abs().total_cmp(&(*y - l).abs())).unwrap();
            let Ok(v) = sys.reconstruct_eigenvector(root) else {
                assert!(sys.mu().iter().any(|&m| (m - root).abs() < 1e-8));
                continue;
            };
            let cos: f64 = v.iter().zip(direct.vector(a)).map(|(x, y)| x * y).sum();
            assert!((cos.abs() - 1.0).abs() < 1e-10, "n {n}, α {a}: {cos}");
        }
    }
}

#[test]
fn complete_bipartite_multiplicities() {
    // K_{3,4}: ±√12 and 0 with multiplicity 5
    let mut edges = vec![];
    for i in 0..3 {
        for j in 3..7 {
            edges.push((i, j));
        }
    }
    let a = AdjacencyMatrix::from_edges(7, &edges).unwrap();
    let s = a.to_symmetric();
    let sys = DetectionSystem::from_matrix(&s).unwrap();
    let found = detected(&sys);
    let want = [12f64.sqrt(), 0.0, 0.0, 0.0, 0.0, 0.0, -(12f64.sqrt())];
    assert!(max_diff(&found, &want) < 1e-8, "{found:?}");
}

#[test]
fn diagonal_blocks_are_uncoupled() {
    let s = SymmetricMatrix::diagonal(&[3.0, -1.0, 0.5, 2.0, -4.0]);
    let sys = DetectionSystem::from_matrix(&s).unwrap();
    let mut u = sys.uncoupled_eigenvalues();
    u.sort_by(f64::total_cmp);
    assert_eq!(u, vec![-4.0, 0.5, 2.0]);
    assert!(max_diff(&detected(&sys), &[3.0, 2.0, 0.5, -1.0, -4.0]) < 1e-14);
}

#[test]
fn wgw_matches_linear_solve() {
    let s = shifted(30, 0.4, 8);
    let dec = block_decompose(&s).unwrap();
    let sys = DetectionSystem::new(dec.clone()).unwrap();
    let w = [dec.w_col(0), dec.w_col(1)];
    for e in [-1.3, 0.02, 0.77, 5.0] {
        for i in 1..=2 {
            for j in 1..=2 {
                let x = complex_solve(&dec.b, Complex64::new(e, 0.0), &w[j - 1]);
                let direct: f64 = w[i - 1].iter().zip(&x).map(|(a, b)| a * b.re).sum();
                let got = sys.wgw(e, i, j).unwrap();
                assert!((got - direct).abs() < 1e-9 * (1.0 + direct.abs()), "E {e} ({i},{j})");
            }
        }
        let k = sys.detection_matrix(e).unwrap();
        assert!((sys.detection_det(e).unwrap() - (k[0][0] * k[1][1] - k[0][1] * k[1][0])).abs() < 1e-12);
    }
    // at a pole the system refuses to evaluate
    let pole = sys.mu()[3];
    assert!(sys.wgw(pole, 1, 1).is_err());
    assert!(sys.bracket(0).is_err());
}

#[test]
fn secular_matches_direct() {
    for (n, p, seed) in [(10, 0.3, 1u64), (50, 0.5, 2), (120, 0.2, 3)] {
        let h = normalize_shifted(&sample_gnp(n + 2, p, seed).unwrap(), p).unwrap().centered;
        let prob = SecularProblem::from_centered(&h, p).unwrap();
        let sec = prob.secular_eigenvalues();
        // second route: the trailing block of Ã directly
        let keep: Vec<usize> = (2..n + 2).collect();
        let shifted_block = normalize_shifted(&sample_gnp(n + 2, p, seed).unwrap(), p)
            .unwrap()
            .shifted
            .principal_minor(&keep);
        // the trailing block of Ã is exactly M + c·l·lᵀ, diagonal included
        let direct = eigenvalues(&shifted_block).unwrap();
        assert!(max_diff(&sec.values, &direct) < 1e-9, "n {n}");
        for (k, &m) in sec.values.iter().enumerate() {
            assert!(m >= prob.nu()[k] - 1e-15);
            if k > 0 {
                assert!(m <= prob.nu()[k - 1] + 1e-15);
            }
        }
        let r = prob.sticking_report(2).unwrap();
        assert!(r.gap >= 0.0);
    }
}

#[test]
fn secular_persisted_eigenvalues() {
    // l orthogonal to the middle eigenvector of a diagonal M
    let m = eigendecompose(&SymmetricMatrix::diagonal(&[2.0, 1.0, -1.0])).unwrap();
    let l = vec![1.0 / 2f64.sqrt(), 0.0, 1.0 / 2f64.sqrt()];
    let prob = SecularProblem::new(m, l, 1.0).unwrap();
    let sec = prob.secular_eigenvalues();
    assert_eq!(sec.persisted, vec![1]);
    let b = SymmetricMatrix::from_row_major(3, vec![2.5, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, -0.5]).unwrap();
    assert!(max_diff(&sec.values, &eigenvalues(&b).unwrap()) < 1e-12);
    assert!(prob.secular_residual(sec.values[0]).abs() < 1e-9);
    assert!(SecularProblem::new(prob.m_spectrum.clone(), prob.l.clone(), 0.0).is_err());
}

#[test]
fn entry_law_moments() {
    let law = EntryLaw { p: 0.3, n: 100 };
    let x = sample_entry_vector(law, 200_000, 5);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64 - mean * mean;
    // entries have mean 0 and variance 1/n; the mean SE is 2.2e-4
    assert!(mean.abs() < 1e-3);
    assert!((var * 100.0 - 1.0).abs() < 0.02);
}

#[test]
fn sign_probability_reproducible_and_symmetric() {
    let u: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 0.2 } else { -0.1 }).collect();
    let law = EntryLaw { p: 0.5, n: 50 };
    let a = pair_sign_probability(&u, law, 4000, 9).unwrap();
    assert_eq!(a, pair_sign_probability(&u, law, 4000, 9).unwrap());
    assert!((a.p_hat - 0.5).abs() < 4.0 * a.p_se.max(1e-3));
    assert!(a.product_mean.abs() < 4.0 * a.product_se.max(1e-3));
    assert!(pair_sign_probability(&u, law, 0, 9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_formula_matches_direct_vector(n in 6usize..30, p in 0.2f64..0.8, seed in any::<u64>()) {
        let s = shifted(n, p, seed);
        let sys = DetectionSystem::from_matrix(&s).unwrap();
        let direct = eigendecompose(&s).unwrap();
        for root in sys.all_roots().roots {
            let a = (0..n).min_by(|&x, &y| (direct.eigenvalues[x] - root).abs().total_cmp(&(direct.eigenvalues[y] - root).abs())).unwrap();
            let simple = (0..n).all(|b| b == a || (direct.eigenvalues[b] - root).abs() > 1e-6);
            let v = direct.vector(a);
            if !simple || v[0].abs() < 1e-6 || v[1].abs() < 1e-6 {
                continue;
            }
            if let Ok(sign) = sys.sign_formula(root) {
                prop_assert_eq!(sign as f64, (v[0] * v[1]).signum());
            }
        }
    }
}
