use nodal_core::deloc::*;
use nodal_core::ensembles::{sample_goe, SymmetricMatrix};
use nodal_core::spectral::{classical_locations, eigendecompose, eigenvalues, semicircle_stieltjes_c, Spectrum};
use nodal_core::Complex64;
use proptest::prelude::*;

mod common;
use common::{complex_inverse, unit};

#[test]
fn isotropic_law_residual_matches_inverse() {
    let n = 30;
    let s = sample_goe(n, 4).unwrap();
    let spec = eigendecompose(&s).unwrap();
    let dirs = vec![
        unit((0..n).map(|i| (i as f64).cos()).collect()),
        unit((0..n).map(|i| 1.0 + i as f64).collect()),
        direction_set(n, 0, 0).pop().unwrap(),
    ];
    let energies = [-1.0, 0.2, 1.95];
    let eta = 0.1;
    let mut worst = 0.0f64;
    for &e in &energies {
        let z = Complex64::new(e, eta);
        let g = complex_inverse(&s, z);
        let m = semicircle_stieltjes_c(z);
        for x in &dirs {
            for y in &dirs {
                let mut q = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        q += g[i][j] * (x[i] * y[j]);
                    }
                }
                let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                worst = worst.max((q - xy * m).norm());
            }
        }
    }
    let got = isotropic_law_residual(&spec, &energies, eta, &dirs).unwrap();
    assert!((got - worst).abs() < 1e-10, "{got} vs {worst}");
}

#[test]
fn rigidity_zero_at_classical_locations() {
    let g = classical_locations(50);
    assert!(rigidity_residuals(&g).iter().all(|&r| r == 0.0));
    let mut moved = g.clone();
    moved[0] += 1e-3;
    let r = rigidity_residuals(&moved);
    let want = 1e-3 * 50f64.powf(2.0 / 3.0);
    assert!((r[0] - want).abs() < 1e-9);
}

#[test]
fn diagonal_matrix_quantities() {
    // identity eigenvectors: ℓ∞ norm √n, overlap with the flat vector 1
    let n = 16;
    let s = SymmetricMatrix::diagonal(&(0..n).map(|i| i as f64).collect::<Vec<_>>());
    let spec = eigendecompose(&s).unwrap();
    assert!(linf_deloc(&spec).iter().all(|&x| (x - 4.0).abs() < 1e-12));
    let flat = vec![0.25; n];
    assert!((isotropic_overlap(&spec, &flat).unwrap() - 1.0).abs() < 1e-12);
    assert!(isotropic_overlap(&spec, &[1.0; 16]).is_err());
}

#[test]
fn level_repulsion_windows() {
    let eigs = [2.3, 2.05, 2.0, 1.97, 1.5];
    assert!((level_repulsion_min_gap(&eigs, 0.1) - 0.03).abs() < 1e-12);
    assert_eq!(level_repulsion_min_gap(&eigs, 0.01), f64::INFINITY);
    assert!((level_repulsion_min_gap_at(&eigs, 2.2, 0.21) - 0.05).abs() < 1e-12);
}

#[test]
fn minors_interlace() {
    let s = sample_goe(60, 12).unwrap();
    let parent = eigenvalues(&s).unwrap();
    let r = minor_consistency(&s, &parent, 5, 0.3, 1).unwrap();
    assert_eq!(r.minors_checked, 10);
    assert_eq!(r.interlacing_violations, 0);
    assert_eq!(interlacing_violations(&[3.0, 2.0, 1.0], &[3.5, 1.5], 1), 1);
}

#[test]
fn goe_is_typical() {
    let n = 400;
    let s = sample_goe(n, 99).unwrap();
    let r = typicality_check(&s, &TypicalityParams::default()).unwrap();
    assert!(r.flags.isotropic_law && r.flags.rigidity && r.flags.linf, "{}", r.to_json());
    assert_eq!(r.rigidity_residuals.len(), n);
    assert_eq!(r.csv_row().split(',').count(), TypicalityReport::CSV_HEADER.split(',').count());
}

#[test]
fn spectrum_of_parts() {
    let sp = Spectrum::from_parts(vec![1.0, -1.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(linf_deloc(&sp), vec![2f64.sqrt(); 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_gaps_is_smallest_subset_mass(raw in prop::collection::vec(-1.0f64..1.0, 1..12), f in 0.05f64..=1.0) {
        let v = unit(raw.iter().map(|x| x + 1.5).collect());
        let k = ((f * v.len() as f64).ceil() as usize).min(v.len());
        // brute force over all subsets of size k
        let n = v.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                let m: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| v[i] * v[i]).sum();
                best = best.min(m);
            }
        }
        let got = no_gaps_mass(&v, f).unwrap();
        prop_assert!((got - best).abs() < 1e-12);
        prop_assert!(got <= k as f64 / n as f64 + 1e-12);
    }

    #[test]
    fn interlacing_for_random_minors(n in 3usize..25, seed in any::<u64>()) {
        let s = sample_goe(n, seed).unwrap();
        let parent = eigenvalues(&s).unwrap();
        let r = minor_consistency(&s, &parent, 2, 0.5, seed).unwrap();
        prop_assert_eq!(r.interlacing_violations, 0);
    }
}
