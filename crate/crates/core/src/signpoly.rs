//! Weighted Sobolev space `H` with `‖f‖²_H = ∫f²η + ∫(f′)²ψ`, odd polynomial
//! projection of a smoothed sign, and expectations under the law of `g₁g₂`.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::quad::{gauss_hermite, gauss_laguerre, gauss_legendre, integrate, integrate_to_infinity};
use crate::rng::rng_from;
use crate::{Error, Result};

/// Even weights `η ≥ ψ > 0`, both `(1/π)e^{−|x|/2}` for `|x| ≥ tail_start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub tail_start: f64,
}

/// `ψ(x) = (1/π)e^{−s(x)/2}` with `s = x²/4 + 1` on `[−2, 2]` and `s = |x|`
/// outside; value and slope match at `±2`. `η = ψ`.
pub fn default_weights() -> WeightPair {
    WeightPair { tail_start: 2.0 }
}

impl WeightPair {
    pub fn psi(&self, x: f64) -> f64 {
        let a = x.abs();
        let s = if a <= self.tail_start { a * a / 4.0 + 1.0 } else { a };
        (-s / 2.0).exp() / PI
    }

    pub fn eta(&self, x: f64) -> f64 {
        self.psi(x)
    }

    /// `min ψ` on `[−m, m]`.
    pub fn psi_min(&self, m: f64) -> f64 {
        self.psi(m)
    }

    /// `max ψ`, attained at 0.
    pub fn psi_max(&self) -> f64 {
        self.psi(0.0)
    }
}

/// A function on ℝ with a derivative, piecewise smooth between the listed
/// nonnegative breakpoints (mirrored to the negative axis).
pub trait HFunction {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `x^k`.
#[derive(Clone, Copy, Debug)]
pub struct Monomial(pub u32);

impl HFunction for Monomial {
    fn value(&self, x: f64) -> f64 {
        x.powi(self.0 as i32)
    }
    fn deriv(&self, x: f64) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            self.0 as f64 * x.powi(self.0 as i32 - 1)
        }
    }
}

/// Odd C¹ (indeed C²) function equal to `sign(x)` for `|x| ≥ r`, the quintic
/// `(15t − 10t³ + 3t⁵)/8`, `t = x/r`, inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSign {
    pub r: f64,
}

pub fn smoothed_sign(r: f64) -> Result<SmoothedSign> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("flat radius must be positive, got {r}")));
    }
    Ok(SmoothedSign { r })
}

impl HFunction for SmoothedSign {
    fn value(&self, x: f64) -> f64 {
        let t = x / self.r;
        if t >= 1.0 {
            1.0
        } else if t <= -1.0 {
            -1.0
        } else {
            let t2 = t * t;
            t * (15.0 - 10.0 * t2 + 3.0 * t2 * t2) / 8.0
        }
    }
    fn deriv(&self, x: f64) -> f64 {
        let t = x / self.r;
        if t.abs() >= 1.0 {
            0.0
        } else {
            let u = 1.0 - t * t;
            15.0 * u * u / (8.0 * self.r)
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.r]
    }
}

/// Odd polynomial `Σ c_k x^{2k+1}` given by its coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OddPolynomial {
    pub coeffs: Vec<f64>,
}

impl HFunction for OddPolynomial {
    fn value(&self, x: f64) -> f64 {
        let x2 = x * x;
        x * self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
    }
    fn deriv(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x2 + (2 * k + 1) as f64 * c)
    }
}

fn split_points(w: &WeightPair, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0, w.tail_start];
    pts.extend(extra.iter().copied().filter(|&b| b > 0.0 && b.is_finite()));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `⟨f, g⟩_H` by adaptive Gauss–Kronrod on each smooth piece of both half
/// lines, the last piece mapped to a finite interval.
pub fn sobolev_inner(f: &dyn HFunction, g: &dyn HFunction, w: &WeightPair) -> Result<f64> {
    let mut bps = f.breakpoints();
    bps.extend(g.breakpoints());
    let pts = split_points(w, &bps);
    let integrand = |x: f64| f.value(x) * g.value(x) * w.eta(x) + f.deriv(x) * g.deriv(x) * w.psi(x);
    let tol = 1e-13;
    let mut total = 0.0;
    for sgn in [1.0, -1.0] {
        let h = |x: f64| integrand(sgn * x);
        for p in pts.windows(2) {
            total += integrate(h, p[0], p[1], tol);
        }
        total += integrate_to_infinity(h, *pts.last().unwrap(), tol);
    }
    if !total.is_finite() {
        return Err(Error::Domain("Sobolev integral did not converge".into()));
    }
    Ok(total)
}

pub fn sobolev_norm(f: &dyn HFunction, w: &WeightPair) -> Result<f64> {
    Ok(sobolev_inner(f, f, w)?.max(0.0).sqrt())
}

/// `γ(s, x)` by its power series; fine for the small `x` used here.
fn lower_gamma(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    for k in 1..500 {
        term *= x / (s + k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum * x.powf(s) * (-x).exp()
}

/// `∫_0^{t} x^m e^{−x²/8} dx` with `t ≤ 2` via `u = x²/8`.
fn interior_moment(m: u32, t: f64) -> f64 {
    let s = (m as f64 + 1.0) / 2.0;
    0.5 * 8f64.powf(s) * lower_gamma(s, t * t / 8.0)
}

/// `∫_a^∞ x^m e^{−x/2} dx = 2^{m+1} Γ(m+1, a/2)`, with the upper incomplete
/// gamma of integer order reduced to `m!·e^{−y}·Σ_{k≤m} y^k/k!`.
fn tail_moment(m: u32, a: f64) -> f64 {
    let y = a / 2.0;
    let mut term = 1.0; // y^k / k! · m! built as m!/k!·y^k, summed from k = m down
    let mut sum = 0.0;
    // Σ_k m!/k! y^k computed top-down to avoid overflow in m!
    for k in (0..=m).rev() {
        sum += term * y.powi(k as i32);
        term *= k as f64;
    }
    2f64.powi(m as i32 + 1) * (-y).exp() * sum
}

/// `∫_{−∞}^{∞} x^m ψ(x) dx` for the default weights, from the closed forms.
fn weighted_moment(m: u32, w: &WeightPair) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    assert_eq!(w.tail_start, 2.0, "closed form assumes the default bridge");
    let interior = (-0.5f64).exp() / PI * interior_moment(m, 2.0);
    let tail = tail_moment(m, 2.0) / PI;
    2.0 * (interior + tail)
}

/// `⟨x^j, x^k⟩_H` from closed-form moments: the interior through the lower
/// incomplete gamma, the tail through the upper incomplete gamma.
pub fn monomial_inner_closed(j: u32, k: u32, w: &WeightPair) -> f64 {
    let value = weighted_moment(j + k, w);
    let der = if j == 0 || k == 0 {
        0.0
    } else {
        (j * k) as f64 * weighted_moment(j + k - 2, w)
    };
    value + der
}

/// Discrete rule on `[0, ∞)` reproducing `∫ f η` and `∫ f ψ` for the
/// piecewise smooth integrands met in the projection.
#[derive(Clone, Debug)]
struct HalfLineRule {
    x: Vec<f64>,
    w_eta: Vec<f64>,
    w_psi: Vec<f64>,
}

impl HalfLineRule {
    fn new(w: &WeightPair, breakpoints: &[f64], legendre: usize, laguerre: usize) -> Self {
        let pts = split_points(w, breakpoints);
        let (gx, gw) = gauss_legendre(legendre);
        let mut rule = HalfLineRule {
            x: Vec::new(),
            w_eta: Vec::new(),
            w_psi: Vec::new(),
        };
        for p in pts.windows(2) {
            let (a, b) = (p[0], p[1]);
            for (t, wt) in gx.iter().zip(&gw) {
                let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let base = 0.5 * (b - a) * wt;
                rule.x.push(x);
                rule.w_eta.push(base * w.eta(x));
                rule.w_psi.push(base * w.psi(x));
            }
        }
        // tail: ∫_a^∞ f(x) e^{−x/2}/π dx = (2/π) e^{−a/2} ∫_0^∞ f(a + 2t) e^{−t} dt
        let a = *pts.last().unwrap();
        let (lx, lw) = gauss_laguerre(laguerre);
        for (t, wt) in lx.iter().zip(&lw) {
            let x = a + 2.0 * t;
            let base = 2.0 / PI * (-a / 2.0).exp() * wt;
            rule.x.push(x);
            rule.w_eta.push(base);
            rule.w_psi.push(base);
        }
        rule
    }
}

/// How the projection was solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    /// Cholesky on the equilibrated Gram matrix of odd monomials.
    Monomial,
    /// H-orthonormal basis `q_0 = x/h_00`,
    /// `q_k = (x²q_{k−1} − Σ_{j<k} h_jk q_j)/h_kk`, built by twice-repeated
    /// Gram–Schmidt on the discretized inner product.
    Orthogonal,
}

/// Three-term-free recurrence of the orthogonal basis with the expansion
/// coefficients of the projection in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OddRecurrence {
    /// `h[k][j]` for `j ≤ k`.
    pub h: Vec<Vec<f64>>,
    pub coeffs: Vec<f64>,
}

impl OddRecurrence {
    fn eval_both(&self, x: f64) -> (f64, f64) {
        let k = self.coeffs.len();
        let x2 = x * x;
        let mut q: Vec<(f64, f64)> = Vec::with_capacity(k);
        let (mut v, mut d) = (0.0, 0.0);
        for i in 0..k {
            let (mut qv, mut qd) = if i == 0 {
                (x, 1.0)
            } else {
                let (pv, pd) = q[i - 1];
                (x2 * pv, 2.0 * x * pv + x2 * pd)
            };
            for j in 0..i {
                qv -= self.h[i][j] * q[j].0;
                qd -= self.h[i][j] * q[j].1;
            }
            qv /= self.h[i][i];
            qd /= self.h[i][i];
            q.push((qv, qd));
            v += self.coeffs[i] * qv;
            d += self.coeffs[i] * qd;
        }
        (v, d)
    }

    /// Monomial coefficients of the expansion. Exact in exact arithmetic;
    /// in floating point the high coefficients lose relative accuracy.
    fn monomial_coeffs(&self) -> Vec<f64> {
        let k = self.coeffs.len();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut out = vec![0.0; k];
        for i in 0..k {
            let mut c = vec![0.0; k];
            if i == 0 {
                c[0] = 1.0;
            } else {
                c[1..].copy_from_slice(&basis[i - 1][..k - 1]);
            }
            for j in 0..i {
                for (a, b) in c.iter_mut().zip(&basis[j]) {
                    *a -= self.h[i][j] * b;
                }
            }
            c.iter_mut().for_each(|a| *a /= self.h[i][i]);
            for (o, a) in out.iter_mut().zip(&c) {
                *o += self.coeffs[i] * a;
            }
            basis.push(c);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrors {
    /// `‖h − Q‖_H`.
    pub sobolev: f64,
    /// `max |h − Q|` on `[−R, −r] ∪ [r, R]`.
    pub sup: f64,
    /// `(E (h − Q)²(g₁g₂))^{1/2}`.
    pub l2mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignPolynomial {
    /// Coefficients of `x, x³, …, x^{2m+1}`.
    pub odd_coeffs: Vec<f64>,
    pub degree: usize,
    pub r: f64,
    pub sup_range: f64,
    pub errors: ApproxErrors,
    pub basis: BasisMode,
    /// Condition number of the equilibrated monomial Gram matrix.
    pub gram_condition: f64,
    pub recurrence: Option<OddRecurrence>,
}

impl SignPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        match &self.recurrence {
            Some(r) => r.eval_both(x).0,
            None => OddPolynomial {
                coeffs: self.odd_coeffs.clone(),
            }
            .value(x),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomial serializes")
    }
}

impl HFunction for SignPolynomial {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn deriv(&self, x: f64) -> f64 {
        match &self.recurrence {
            Some(r) => r.eval_both(x).1,
            None => OddPolynomial {
                coeffs: self.odd_coeffs.clone(),
            }
            .deriv(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub legendre_points: usize,
    pub laguerre_points: usize,
    /// Above this equilibrated Gram condition number the orthogonal basis is used.
    pub max_condition: f64,
    pub force_orthogonal: bool,
    /// `R` of the sup-error range.
    pub sup_range: f64,
    pub sup_grid: usize,
    pub hermite_points: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            legendre_points: 80,
            laguerre_points: 90,
            max_condition: 1e12,
            force_orthogonal: false,
            sup_range: 10.0,
            sup_grid: 20_001,
            hermite_points: 120,
        }
    }
}

/// Discretized `⟨·,·⟩_H` on odd functions: twice the half-line integral.
struct OddInner<'a> {
    rule: &'a HalfLineRule,
}

impl OddInner<'_> {
    fn ip(&self, a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
        let r = self.rule;
        let mut s = 0.0;
        for i in 0..r.x.len() {
            s += r.w_eta[i] * a.0[i] * b.0[i] + r.w_psi[i] * a.1[i] * b.1[i];
        }
        2.0 * s
    }
}

/// Least-squares projection of `h` onto odd polynomials of degree ≤ `degree`
/// in the norm of `H`.
pub fn project_odd(h: &dyn HFunction, degree: usize, w: &WeightPair, r: f64, opts: &ProjectionOptions) -> Result<SignPolynomial> {
    if degree % 2 == 0 {
        return Err(Error::Config(format!("degree cap must be odd, got {degree}")));
    }
    let k = degree.div_ceil(2);
    let rule = HalfLineRule::new(w, &h.breakpoints(), opts.legendre_points, opts.laguerre_points);
    let ip = OddInner { rule: &rule };
    let hv: Vec<f64> = rule.x.iter().map(|&x| h.value(x)).collect();
    let hd: Vec<f64> = rule.x.iter().map(|&x| h.deriv(x)).collect();

    // monomial columns, equilibrated
    let cols: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
        .map(|j| {
            let m = Monomial(2 * j as u32 + 1);
            (
                rule.x.iter().map(|&x| m.value(x)).collect(),
                rule.x.iter().map(|&x| m.deriv(x)).collect(),
            )
        })
        .collect();
    let diag: Vec<f64> = cols.iter().map(|c| ip.ip((&c.0, &c.1), (&c.0, &c.1)).sqrt()).collect();
    let gram = Mat::from_fn(k, k, |a, b| ip.ip((&cols[a].0, &cols[a].1), (&cols[b].0, &cols[b].1)) / (diag[a] * diag[b]));
    let ev = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Convergence { digest: 0 })?;
    let gram_condition = if ev[0] > 0.0 { ev[k - 1] / ev[0] } else { f64::INFINITY };

    let use_orth = opts.force_orthogonal || !(gram_condition <= opts.max_condition);
    let (odd_coeffs, recurrence, basis) = if !use_orth {
        let rhs = Mat::from_fn(k, 1, |a, _| ip.ip((&cols[a].0, &cols[a].1), (&hv, &hd)) / diag[a]);
        let llt = gram
            .llt(Side::Lower)
            .map_err(|_| Error::Domain("Gram matrix is not positive definite".into()))?;
        let sol = llt.solve(&rhs);
        let coeffs: Vec<f64> = (0..k).map(|a| sol[(a, 0)] / diag[a]).collect();
        (coeffs, None, BasisMode::Monomial)
    } else {
        let mut qs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k);
        let mut hm: Vec<Vec<f64>> = Vec::with_capacity(k);
        for i in 0..k {
            let (mut v, mut d): (Vec<f64>, Vec<f64>) = if i == 0 {
                (rule.x.clone(), vec![1.0; rule.x.len()])
            } else {
                let (pv, pd) = &qs[i - 1];
                (
                    rule.x.iter().zip(pv).map(|(x, p)| x * x * p).collect(),
                    rule.x.iter().zip(pv).zip(pd).map(|((x, p), q)| 2.0 * x * p + x * x * q).collect(),
                )
            };
            let mut row = vec![0.0; i + 1];
            for _ in 0..2 {
                for j in 0..i {
                    let c = ip.ip((&v, &d), (&qs[j].0, &qs[j].1));
                    row[j] += c;
                    for t in 0..v.len() {
                        v[t] -= c * qs[j].0[t];
                        d[t] -= c * qs[j].1[t];
                    }
                }
            }
            let nrm = ip.ip((&v, &d), (&v, &d)).sqrt();
            if !(nrm > 0.0) {
                return Err(Error::Domain(format!("orthogonal basis broke down at index {i}")));
            }
            row[i] = nrm;
            v.iter_mut().for_each(|a| *a /= nrm);
            d.iter_mut().for_each(|a| *a /= nrm);
            qs.push((v, d));
            hm.push(row);
        }
        let coeffs: Vec<f64> = qs.iter().map(|q| ip.ip((&q.0, &q.1), (&hv, &hd))).collect();
        let rec = OddRecurrence { h: hm, coeffs };
        (rec.monomial_coeffs(), Some(rec), BasisMode::Orthogonal)
    };

    let mut q = SignPolynomial {
        odd_coeffs,
        degree,
        r,
        sup_range: opts.sup_range,
        errors: ApproxErrors {
            sobolev: 0.0,
            sup: 0.0,
            l2mu: 0.0,
        },
        basis,
        gram_condition,
        recurrence,
    };
    let qv: Vec<f64> = rule.x.iter().map(|&x| q.value(x)).collect();
    let qd: Vec<f64> = rule.x.iter().map(|&x| q.deriv(x)).collect();
    let ev: Vec<f64> = hv.iter().zip(&qv).map(|(a, b)| a - b).collect();
    let ed: Vec<f64> = hd.iter().zip(&qd).map(|(a, b)| a - b).collect();
    q.errors.sobolev = ip.ip((&ev, &ed), (&ev, &ed)).max(0.0).sqrt();
    q.errors.sup = sup_error(h, &q, r, opts.sup_range, opts.sup_grid);
    q.errors.l2mu = gauss_product_expectation(&|y| (h.value(y) - q.value(y)).powi(2), 0, Some(opts.hermite_points))?.sqrt();
    Ok(q)
}

/// `max |h − Q|` on `[−R, −r] ∪ [r, R]` over an even grid; by oddness of both
/// the negative half mirrors the positive one.
pub fn sup_error(h: &dyn HFunction, q: &dyn HFunction, r: f64, big_r: f64, points: usize) -> f64 {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let x = r + (big_r - r) * i as f64 / (points - 1) as f64;
            (h.value(x) - q.value(x)).abs().max((h.value(-x) - q.value(-x)).abs())
        })
        .fold(0.0, f64::max)
}

/// `⟨h − Q, x^m⟩_H / ‖x^m‖_H` on the projection rule, for odd `m`.
pub fn residual_against_monomial(h: &dyn HFunction, q: &dyn HFunction, m: u32, w: &WeightPair, opts: &ProjectionOptions) -> f64 {
    let rule = HalfLineRule::new(w, &h.breakpoints(), opts.legendre_points, opts.laguerre_points);
    let ip = OddInner { rule: &rule };
    let mono = Monomial(m);
    let ev: Vec<f64> = rule.x.iter().map(|&x| h.value(x) - q.value(x)).collect();
    let ed: Vec<f64> = rule.x.iter().map(|&x| h.deriv(x) - q.deriv(x)).collect();
    let mv: Vec<f64> = rule.x.iter().map(|&x| mono.value(x)).collect();
    let md: Vec<f64> = rule.x.iter().map(|&x| mono.deriv(x)).collect();
    ip.ip((&ev, &ed), (&mv, &md)) / ip.ip((&mv, &md), (&mv, &md)).sqrt()
}

/// Equilibrated Gram matrix of `x, x³, …, x^{degree}` from the closed forms.
pub fn monomial_gram(degree: usize, w: &WeightPair) -> Vec<Vec<f64>> {
    let k = degree.div_ceil(2);
    let raw: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| monomial_inner_closed(2 * a as u32 + 1, 2 * b as u32 + 1, w)).collect())
        .collect();
    (0..k)
        .map(|a| (0..k).map(|b| raw[a][b] / (raw[a][a] * raw[b][b]).sqrt()).collect())
        .collect()
}

/// `E f(g₁g₂)` for independent standard normals by a tensor Gauss–Hermite
/// rule. `degree` is the polynomial degree of `f` (0 for non-polynomial
/// `f`); `order` defaults to the smallest rule exact at `degree + 4`.
pub fn gauss_product_expectation(f: &dyn Fn(f64) -> f64, degree: usize, order: Option<usize>) -> Result<f64> {
    let need = (degree + 4).div_ceil(2) + 1;
    let n = order.unwrap_or(need);
    if 2 * n - 1 < degree + 4 {
        return Err(Error::Config(format!(
            "Gauss–Hermite order {n} is exact only to degree {}, need {}",
            2 * n - 1,
            degree + 4
        )));
    }
    let (x, w) = gauss_hermite(n);
    let s2 = std::f64::consts::SQRT_2;
    // nodes in ±pairs: fold f(y) and f(−y) before summing
    let mut total = 0.0;
    for i in 0..n {
        let (xi, wi) = (s2 * x[i], w[i]);
        for j in 0..n {
            let (xj, wj) = (s2 * x[j], w[j]);
            if x[j] < 0.0 || (x[j] == 0.0 && j < n / 2) {
                continue;
            }
            let y = xi * xj;
            let pair = if x[j] == 0.0 { f(y) } else { f(y) + f(-y) };
            total += wi * wj * pair;
        }
    }
    Ok(total / PI)
}

/// Outcome of the Hölder-type continuity estimate on one interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|f(b) − f(a)| ≤ (min_{[−M,M]} ψ)⁻¹·‖f‖_H·(max ψ)^{1/2}·(b − a)^{1/2}`.
pub fn holder_bound_check(f: &dyn HFunction, a: f64, b: f64, m: f64, w: &WeightPair) -> Result<HolderCheck> {
    holder_with_norm(f, a, b, m, w, sobolev_norm(f, w)?)
}

fn holder_with_norm(f: &dyn HFunction, a: f64, b: f64, m: f64, w: &WeightPair, norm: f64) -> Result<HolderCheck> {
    if !(a <= b && a >= -m && b <= m) {
        return Err(Error::Domain(format!("[{a}, {b}] is not inside [−{m}, {m}]")));
    }
    let lhs = (f.value(b) - f.value(a)).abs();
    let rhs = norm * w.psi_max().sqrt() * (b - a).sqrt() / w.psi_min(m);
    Ok(HolderCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Checks the estimate on `pairs` random subintervals of `[−M, M]`.
pub fn holder_sampled(f: &dyn HFunction, m: f64, pairs: usize, seed: u64, w: &WeightPair) -> Result<Vec<HolderCheck>> {
    use rand::Rng as _;
    let norm = sobolev_norm(f, w)?;
    let mut rng = rng_from(seed);
    (0..pairs)
        .map(|_| {
            let x = rng.random_range(-m..=m);
            let y = rng.random_range(-m..=m);
            holder_with_norm(f, x.min(y), x.max(y), m, w, norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_boundary() {
        let w = default_weights();
        assert!((w.psi(2.0) - (-1.0f64).exp() / PI).abs() < 1e-16);
        assert!((w.psi(-5.0) - (-2.5f64).exp() / PI).abs() < 1e-16);
    }

    #[test]
    fn smoothed_sign_ends() {
        let h = smoothed_sign(0.3).unwrap();
        assert_eq!(h.value(0.3), 1.0);
        assert_eq!(h.value(-0.3), -1.0);
        assert_eq!(h.value(0.0), 0.0);
        assert!(smoothed_sign(0.0).is_err());
    }

    #[test]
    fn product_moments() {
        let m2 = gauss_product_expectation(&|y| y * y, 2, None).unwrap();
        assert!((m2 - 1.0).abs() < 1e-12);
        let m4 = gauss_product_expectation(&|y| y.powi(4), 4, None).unwrap();
        assert!((m4 - 9.0).abs() < 1e-11);
        assert!(gauss_product_expectation(&|y| y, 40, Some(5)).is_err());
    }

    #[test]
    fn incomplete_gamma_pieces() {
        // ∫_2^∞ e^{−x/2} = 2e^{−1}; ∫_2^∞ x e^{−x/2} = 8e^{−1}
        assert!((tail_moment(0, 2.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((tail_moment(1, 2.0) - 8.0 * (-1.0f64).exp()).abs() < 1e-14);
        let direct = integrate(|x: f64| x * x * (-x * x / 8.0).exp(), 0.0, 2.0, 1e-14);
        assert!((interior_moment(2, 2.0) - direct).abs() < 1e-13);
    }
}
