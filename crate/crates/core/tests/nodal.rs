use std::f64::consts::PI;

use nodal_core::ensembles::{normalize_shifted, sample_gnp, AdjacencyMatrix};
use nodal_core::nodal::*;
use nodal_core::spectral::eigendecompose;
use proptest::prelude::*;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Same-sign components by union-find over the edge list.
fn components_oracle(a: &AdjacencyMatrix, signs: &[i8]) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, j) in a.edge_list() {
        if signs[i] != 0 && signs[i] == signs[j] {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        if signs[v] != 0 {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

#[test]
fn path_graph_second_eigenvector() {
    let n = 10;
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let a = AdjacencyMatrix::from_edges(n, &edges).unwrap();
    let v = unit((1..=n).map(|j| (2.0 * PI * j as f64 / (n + 1) as f64).sin()).collect());
    let dec = nodal_domains(&a, &v).unwrap();
    assert_eq!(dec.domains, vec![(0..5).collect::<Vec<_>>(), (5..10).collect()]);
    let b = count_and_balance(&dec);
    assert_eq!(b.domain_count, 2);
    assert_eq!(b.balance, 0.5);
    // 20 same-sign pairs, 25 mixed, 45 total
    assert_eq!(pair_sign_expectation(&dec).unwrap().value, Rational::new(-5, 45));
}

#[test]
fn zero_coordinates() {
    // odd path: middle coordinate of the second eigenvector vanishes
    let n = 9;
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let a = AdjacencyMatrix::from_edges(n, &edges).unwrap();
    let v = unit((1..=n).map(|j| (2.0 * PI * j as f64 / (n + 1) as f64).sin()).collect());
    let dec = nodal_domains(&a, &v).unwrap();
    assert_eq!(dec.zero_count, 1);
    assert_eq!(dec.signs[4], 0);
    assert_eq!(dec.domains.len(), 2);
    assert!(pair_sign_expectation(&dec).unwrap().zeros_excluded);
    assert_eq!(sign_sum(&v, DEFAULT_ZERO_TOL).unwrap(), 0);
}

#[test]
fn input_validation() {
    let a = AdjacencyMatrix::empty(3);
    assert!(nodal_domains(&a, &[1.0, 0.0]).is_err());
    assert!(nodal_domains(&a, &[1.0, 1.0, 1.0]).is_err());
    assert!(nodal_domains(&a, &[1.0, f64::NAN, 0.0]).is_err());
    assert_eq!(Rational::new(6, -4), Rational { num: -3, den: 2 });
}

#[test]
fn random_graph_first_eigenvector_is_one_domain() {
    let (n, p) = (200, 0.3);
    let a = sample_gnp(n, p, 3).unwrap();
    let spec = eigendecompose(&normalize_shifted(&a, p).unwrap().shifted).unwrap();
    let dec = nodal_domains(&a, spec.vector(0)).unwrap();
    assert_eq!(dec.domains.len(), 1);
    let dec2 = nodal_domains(&a, spec.vector(1)).unwrap();
    assert_eq!(dec2.domains, components_oracle(&a, &dec2.signs));
    assert_eq!(NodalDecomposition::from_json(&dec2.to_json()).unwrap(), dec2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn domains_match_union_find(n in 2usize..40, p in 0.0f64..1.0, seed in any::<u64>(),
                                raw in prop::collection::vec(-1.0f64..1.0, 40)) {
        let a = sample_gnp(n, p, seed).unwrap();
        let mut v: Vec<f64> = raw[..n].to_vec();
        v[0] += 2.0; // not all zero
        let v = unit(v);
        let dec = nodal_domains(&a, &v).unwrap();
        prop_assert_eq!(&dec.domains, &components_oracle(&a, &dec.signs));
        let covered: usize = dec.domains.iter().map(Vec::len).sum();
        prop_assert_eq!(covered + dec.zero_count, n);
        prop_assert_eq!(dec.p_size + dec.n_size + dec.zero_count, n);
    }

    #[test]
    fn pair_sign_matches_enumeration(signs in prop::collection::vec(-1i8..=1, 2..60)) {
        let dec = NodalDecomposition {
            p_size: signs.iter().filter(|&&s| s > 0).count(),
            n_size: signs.iter().filter(|&&s| s < 0).count(),
            zero_count: signs.iter().filter(|&&s| s == 0).count(),
            domains: vec![],
            signs: signs.clone(),
        };
        let nz: Vec<i64> = signs.iter().filter(|&&s| s != 0).map(|&s| s as i64).collect();
        let got = pair_sign_expectation(&dec);
        if nz.len() < 2 {
            prop_assert!(got.is_err());
        } else {
            let mut sum = 0i64;
            let mut pairs = 0i64;
            for i in 0..nz.len() {
                for j in i + 1..nz.len() {
                    sum += nz[i] * nz[j];
                    pairs += 1;
                }
            }
            prop_assert_eq!(got.unwrap().value, Rational::new(sum, pairs));
        }
    }
}
