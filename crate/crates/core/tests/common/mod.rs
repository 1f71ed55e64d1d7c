#![allow(dead_code)]

use nodal_core::ensembles::SymmetricMatrix;
use nodal_core::Complex64;

/// Solves `(S − z)x = b` by Gaussian elimination with partial pivoting.
pub fn complex_solve(s: &SymmetricMatrix, z: Complex64, b: &[f64]) -> Vec<Complex64> {
    let n = s.n();
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| Complex64::new(s.get(i, j), 0.0)).collect();
            row[i] -= z;
            row.push(Complex64::new(b[i], 0.0));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        a.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                let t = a[c][k];
                a[r][k] -= f * t;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = a[i][n];
        for k in i + 1..n {
            acc -= a[i][k] * x[k];
        }
        x[i] = acc / a[i][i];
    }
    x
}

/// Dense `(S − z)^{-1}` column by column.
pub fn complex_inverse(s: &SymmetricMatrix, z: Complex64) -> Vec<Vec<Complex64>> {
    let n = s.n();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| (i == j) as u8 as f64).collect();
            complex_solve(s, z, &e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}
