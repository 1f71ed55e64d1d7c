//! Nodal domains and the pair-sign statistics behind the balance theorems.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::ensembles::AdjacencyMatrix;
use crate::{Error, Result};

/// Relative cutoff below which a coordinate counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Signs in `{−1, 0, +1}` with `|v_i| ≤ zero_tol·max|v_j|` mapped to 0.
pub fn sign_vector(v: &[f64], zero_tol: f64) -> Result<Vec<i8>> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Data(format!("coordinate {i} is not finite")));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("expected a unit vector, norm is {norm}")));
    }
    let cut = zero_tol * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(v.iter()
        .map(|&x| {
            if x.abs() <= cut {
                0
            } else if x > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// `Σ_i sign(v_i)`.
pub fn sign_sum(v: &[f64], zero_tol: f64) -> Result<i64> {
    Ok(sign_vector(v, zero_tol)?.iter().map(|&s| s as i64).sum())
}

/// Sign pattern of a vector on a graph together with its nodal domains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalDecomposition {
    pub signs: Vec<i8>,
    /// Same-sign connected components, each sorted, listed by smallest vertex.
    pub domains: Vec<Vec<usize>>,
    pub p_size: usize,
    pub n_size: usize,
    pub zero_count: usize,
}

impl NodalDecomposition {
    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn nodal_domains(a: &AdjacencyMatrix, v: &[f64]) -> Result<NodalDecomposition> {
    nodal_domains_with_tol(a, v, DEFAULT_ZERO_TOL)
}

/// Breadth-first search over edges joining equal nonzero signs.
pub fn nodal_domains_with_tol(a: &AdjacencyMatrix, v: &[f64], zero_tol: f64) -> Result<NodalDecomposition> {
    let n = a.n();
    if v.len() != n {
        return Err(Error::Size(format!("vector has {} entries, graph has {n} vertices", v.len())));
    }
    let signs = sign_vector(v, zero_tol)?;
    let mut seen = vec![false; n];
    let mut domains = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] || signs[start] == 0 {
            continue;
        }
        let s = signs[start];
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for w in a.neighbors(u) {
                if !seen[w] && signs[w] == s {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        domains.push(comp);
    }
    let p_size = signs.iter().filter(|&&s| s > 0).count();
    let n_size = signs.iter().filter(|&&s| s < 0).count();
    Ok(NodalDecomposition {
        zero_count: n - p_size - n_size,
        signs,
        domains,
        p_size,
        n_size,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub domain_count: usize,
    /// `max(|P|, |N|)/n`.
    pub balance: f64,
}

pub fn count_and_balance(dec: &NodalDecomposition) -> Balance {
    Balance {
        domain_count: dec.domains.len(),
        balance: dec.p_size.max(dec.n_size) as f64 / dec.n() as f64,
    }
}

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Expectation of `sign(v(k)v(l))` over a uniformly random pair of distinct
/// vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSign {
    pub value: Rational,
    /// Set when zero coordinates were present and the pairs were restricted
    /// to nonzero vertices.
    pub zeros_excluded: bool,
}

/// `[C(|P|,2) + C(|N|,2) − |P||N|] / C(|P|+|N|, 2)`.
pub fn pair_sign_expectation(dec: &NodalDecomposition) -> Result<PairSign> {
    let (p, q) = (dec.p_size as i64, dec.n_size as i64);
    let m = p + q;
    if m < 2 {
        return Err(Error::Size(format!("need at least 2 nonzero vertices, have {m}")));
    }
    let c2 = |k: i64| k * (k - 1) / 2;
    Ok(PairSign {
        value: Rational::new(c2(p) + c2(q) - p * q, c2(m)),
        zeros_excluded: dec.zero_count > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(p: usize, q: usize) -> NodalDecomposition {
        let mut signs = vec![1i8; p];
        signs.extend(std::iter::repeat_n(-1i8, q));
        NodalDecomposition {
            signs,
            domains: vec![],
            p_size: p,
            n_size: q,
            zero_count: 0,
        }
    }

    #[test]
    fn pair_sign_small_cases() {
        assert_eq!(pair_sign_expectation(&dec(1, 1)).unwrap().value, Rational::new(-1, 1));
        assert_eq!(pair_sign_expectation(&dec(3, 1)).unwrap().value, Rational::new(0, 1));
        assert_eq!(pair_sign_expectation(&dec(7, 0)).unwrap().value, Rational::new(1, 1));
        assert!(pair_sign_expectation(&dec(1, 0)).is_err());
    }

    #[test]
    fn balance_cases() {
        assert_eq!(count_and_balance(&dec(5, 5)).balance, 0.5);
        assert_eq!(count_and_balance(&dec(5, 0)).balance, 1.0);
    }

    #[test]
    fn signs_of_simple_vectors() {
        let r = 1.0 / 3f64.sqrt();
        assert_eq!(sign_vector(&[r, r, r], 0.5).unwrap(), vec![1, 1, 1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(sign_vector(&[h, 0.0, -h], 1e-12).unwrap(), vec![1, 0, -1]);
        assert!(sign_vector(&[f64::NAN, 1.0], 1e-12).is_err());
        assert_eq!(sign_sum(&[0.5, 0.5, -0.5, -0.5], 1e-12).unwrap(), 0);
    }
}
