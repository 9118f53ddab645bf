//! Closed-form covariance evolution for the (b,d)-regular ensemble.
//!
//! All entries are normalized by the edge count of the original graph. The
//! `y^-1` and `y^-2` factors are grouped with `x = ε y^(b-1)` so that `x/y`
//! is evaluated as the single power `ε y^(b-2)`; together with the
//! cancellation-free `G_1` this keeps the formulas accurate down to
//! `y ~ 1e-4` and below.

use crate::ensemble::{binomial, check_epsilon, g_unchecked, ipow, EnsembleParams, StatePoint};
use crate::error::{Error, Result};
use crate::matrix::{CovarianceMatrix, Label};

/// `b ε (1-ε)`, the variance of the variable-side count. Constant in `y`.
pub fn delta_ll(params: EnsembleParams, epsilon: f64) -> f64 {
    f64::from(params.b()) * epsilon * (1.0 - epsilon)
}

/// Covariances at `y = 1`, right after the channel.
pub fn initial_covariance(params: EnsembleParams, epsilon: f64) -> Result<CovarianceMatrix> {
    check_epsilon(epsilon)?;
    let (b, d) = (params.b(), params.d());
    let bf = f64::from(b);
    let df = f64::from(d);
    let et = 1.0 - epsilon;
    let mut m = CovarianceMatrix::zeros(d as usize);
    m.set(0, 0, delta_ll(params, epsilon));
    for j in 1..d {
        let cj = binomial(d - 1, j - 1) as f64;
        let v = -bf * cj * ipow(epsilon, j) * ipow(et, d - j) * (df * epsilon - f64::from(j));
        m.set(0, j as usize, v);
    }
    for j in 1..d {
        let cj = binomial(d - 1, j - 1) as f64;
        for k in j..d {
            let ck = binomial(d - 1, k - 1) as f64;
            let mut v = 0.0;
            if j == k {
                v += f64::from(j) * cj * ipow(epsilon, j) * ipow(et, d - j);
            }
            v -= df * cj * ck * ipow(epsilon, j + k) * ipow(et, 2 * d - j - k);
            v += (bf - 1.0)
                * cj
                * ck
                * ipow(epsilon, j + k - 1)
                * ipow(et, 2 * d - j - k - 1)
                * (df * epsilon - f64::from(j))
                * (df * epsilon - f64::from(k));
            m.set(j as usize, k as usize, v);
        }
    }
    Ok(m)
}

/// Shared subexpressions at one state point.
struct Terms {
    b: f64,
    d: u32,
    /// `G_1 ..= G_d`, stored at index `j - 1`.
    g: Vec<f64>,
    /// `εε̃(b-1)/y + ε̃x`
    lin: f64,
    /// `εε̃(b-1)/y² - (ε-ε̃)x/y + x²`
    quad: f64,
    /// `εε̃(b-1)/y - εx + x²`
    mixed: f64,
    x: f64,
    xt: f64,
    eet: f64,
}

impl Terms {
    fn new(params: EnsembleParams, sp: &StatePoint) -> Terms {
        let (b, d) = (params.b(), params.d());
        let bf = f64::from(b);
        let (eps, et, x, y) = (sp.epsilon, sp.eps_tilde, sp.x, sp.y);
        let eet = eps * et;
        let x_over_y = eps * ipow(y, b - 2);
        let inv_y = 1.0 / y;
        let g = (1..=d).map(|j| g_unchecked(d, j, x, sp.x_tilde)).collect();
        Terms {
            b: bf,
            d,
            g,
            lin: eet * (bf - 1.0) * inv_y + et * x,
            quad: eet * (bf - 1.0) * inv_y * inv_y - (eps - et) * x_over_y + x * x,
            mixed: eet * (bf - 1.0) * inv_y - eps * x + x * x,
            x,
            xt: sp.x_tilde,
            eet,
        }
    }

    #[inline]
    fn g(&self, j: u32) -> f64 {
        self.g[j as usize - 1]
    }

    fn lr(&self, j: u32) -> f64 {
        let mut v = -self.g(j) * self.lin;
        if j == 1 {
            v += self.b * self.eet;
        }
        v
    }

    /// The five summands of the closed form, added left to right.
    fn rr(&self, k: u32, j: u32) -> f64 {
        let d = self.d;
        let df = f64::from(d);
        let (ck, cj) = (binomial(d - 1, k - 1) as f64, binomial(d - 1, j - 1) as f64);
        let s1 = (self.b - 1.0) / self.b * (self.g(k) * self.g(j)) * self.quad;
        let s2 = -df * (ck * cj) * ipow(self.x, k + j) * ipow(self.xt, 2 * d - k - j);
        let s3 = if k == j { ck * f64::from(k) * ipow(self.x, k) * ipow(self.xt, d - k) } else { 0.0 };
        let s4 = if k == 1 && j == 1 { self.b * self.eet - self.x * self.xt } else { 0.0 };
        let gsum = if k == 1 { self.g(j) } else { 0.0 } + if j == 1 { self.g(k) } else { 0.0 };
        let s5 = -gsum * self.mixed;
        s1 + s2 + s3 + s4 + s5
    }
}

fn check_check_index(params: EnsembleParams, j: u32) -> Result<()> {
    if j >= 1 && j < params.d() {
        Ok(())
    } else {
        Err(Error::Index { index: j, lo: 1, hi: params.d() - 1 })
    }
}

/// `δ^{l,r_j} = -G_j {εε̃(b-1)/y + ε̃x} + [j=1] b ε ε̃`.
pub fn delta_lr(params: EnsembleParams, j: u32, sp: &StatePoint) -> Result<f64> {
    check_check_index(params, j)?;
    Ok(Terms::new(params, sp).lr(j))
}

/// `δ^{r_k,r_j}`; bit-exactly symmetric in `(k, j)`.
pub fn delta_rr(params: EnsembleParams, k: u32, j: u32, sp: &StatePoint) -> Result<f64> {
    check_check_index(params, k)?;
    check_check_index(params, j)?;
    Ok(Terms::new(params, sp).rr(k, j))
}

/// Full `d x d` covariance matrix at `(ε, y)`.
pub fn covariance_matrix(params: EnsembleParams, sp: &StatePoint) -> CovarianceMatrix {
    let d = params.d();
    let t = Terms::new(params, sp);
    let mut m = CovarianceMatrix::zeros(d as usize);
    m.set(0, 0, t.b * t.eet);
    for j in 1..d {
        m.set(0, j as usize, t.lr(j));
    }
    for k in 1..d {
        for j in k..d {
            m.set(k as usize, j as usize, t.rr(k, j));
        }
    }
    m
}

/// Closed form of `Σ_{j=1}^{d-1} δ^{l,r_j}`.
pub fn sum_oracle_a(params: EnsembleParams, sp: &StatePoint) -> f64 {
    let t = Terms::new(params, sp);
    t.g(params.d()) * t.lin + t.b * t.eet
}

/// Closed form of `Σ_{j,k=1}^{d-1} δ^{r_j,r_k}`.
pub fn sum_oracle_b_total(params: EnsembleParams, sp: &StatePoint) -> f64 {
    let t = Terms::new(params, sp);
    let d = params.d();
    let df = f64::from(d);
    let gd = t.g(d);
    let full_quad = t.quad;
    (t.b - 1.0) / t.b * gd * gd * full_quad + 2.0 * gd * t.lin + df * ipow(t.x, d)
        - df * ipow(t.x, 2 * d)
        + t.b * t.eet
}

/// Closed form of the row sum `Σ_{k=1}^{d-1} δ^{r_j,r_k}`.
pub fn sum_oracle_b_row(params: EnsembleParams, j: u32, sp: &StatePoint) -> Result<f64> {
    check_check_index(params, j)?;
    let t = Terms::new(params, sp);
    let d = params.d();
    let df = f64::from(d);
    let (gd, gj) = (t.g(d), t.g(j));
    let common = -(t.b - 1.0) / t.b * gd * gj * t.quad - gj * t.lin;
    if j == 1 {
        Ok(common + df * ipow(t.x, d + 1) * ipow(t.xt, d - 1)
            + gd * t.lin
            + df * ipow(t.x, d) * t.xt
            + t.b * t.eet)
    } else {
        let cj = binomial(d - 1, j - 1) as f64;
        Ok(common + cj * df * ipow(t.x, d + j) * ipow(t.xt, d - j))
    }
}

/// Limit of the covariance matrix as `y -> 0`.
pub fn limit_y0(params: EnsembleParams, epsilon: f64) -> Result<CovarianceMatrix> {
    check_epsilon(epsilon)?;
    let d = params.d();
    let v = delta_ll(params, epsilon);
    let mut m = CovarianceMatrix::zeros(d as usize);
    m.set(0, 0, v);
    if params.b() >= 3 {
        m.set(0, 1, v);
        m.set(1, 1, v);
        return Ok(m);
    }
    let dm1 = f64::from(d - 1);
    let s = 1.0 - dm1 * epsilon;
    m.set(0, 1, v * s);
    m.set(1, 1, v * s * s);
    if d >= 3 {
        m.set(0, 2, v * dm1 * epsilon);
        m.set(1, 2, v * epsilon * dm1 * s);
        m.set(2, 2, v * dm1 * dm1 * epsilon * epsilon);
    }
    Ok(m)
}

/// `lim_{y->0} δ^{i,j} / sqrt(δ^{i,i} δ^{j,j})`.
///
/// `None` when either limiting variance is exactly zero (for instance
/// `b = 2`, `ε = 1/(d-1)`, where the ratio is 0/0).
pub fn correlation_rho(params: EnsembleParams, i: Label, j: Label, epsilon: f64) -> Result<Option<f64>> {
    let lim = limit_y0(params, epsilon)?;
    let cov = lim.try_get(i, j)?;
    let (vi, vj) = (lim.get(i, i), lim.get(j, j));
    if vi == 0.0 || vj == 0.0 {
        return Ok(None);
    }
    Ok(Some((cov / (vi * vj).sqrt()).clamp(-1.0, 1.0)))
}

/// Channel parameter at which `ρ_{l,r_1}` flips sign: `1/(d-1)` for `b = 2`,
/// none for `b >= 3`.
pub fn stability_threshold(params: EnsembleParams) -> Option<f64> {
    (params.b() == 2).then(|| 1.0 / f64::from(params.d() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::state_point;

    fn p(b: u32, d: u32) -> EnsembleParams {
        EnsembleParams::new(b, d).unwrap()
    }

    #[test]
    fn delta_ll_examples() {
        assert_eq!(delta_ll(p(3, 6), 0.5), 0.75);
        let m = initial_covariance(p(4, 8), 0.5).unwrap();
        assert_eq!(m.get(Label::VarEdges, Label::VarEdges), 1.0);
        let a = covariance_matrix(p(3, 6), &state_point(p(3, 6), 0.4, 0.3).unwrap());
        let b = covariance_matrix(p(3, 6), &state_point(p(3, 6), 0.4, 1.0).unwrap());
        assert_eq!(a.at(0, 0), b.at(0, 0));
    }

    #[test]
    fn initial_covariance_vanishes_with_epsilon() {
        let m = initial_covariance(p(3, 6), 1e-12).unwrap();
        assert!(m.as_slice().iter().all(|v| v.abs() < 1e-10));
        assert!(initial_covariance(p(3, 6), 0.0).is_err());
    }

    #[test]
    fn index_errors() {
        let pr = p(3, 6);
        let sp = state_point(pr, 0.4, 0.5).unwrap();
        assert!(delta_lr(pr, 0, &sp).is_err());
        assert!(delta_lr(pr, 6, &sp).is_err());
        assert!(delta_rr(pr, 1, 6, &sp).is_err());
        assert!(sum_oracle_b_row(pr, 6, &sp).is_err());
    }

    #[test]
    fn rr_symmetric_bit_exact() {
        let pr = p(4, 8);
        for &(eps, y) in &[(0.3, 0.7), (0.41, 0.13), (0.8, 0.95)] {
            let sp = state_point(pr, eps, y).unwrap();
            for k in 1..8 {
                for j in 1..8 {
                    let a = delta_rr(pr, k, j, &sp).unwrap();
                    let b = delta_rr(pr, j, k, &sp).unwrap();
                    assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }

    #[test]
    fn lr_vanishes_for_j_above_one_as_y_to_zero() {
        let pr = p(3, 6);
        // δ^{l,r_2} ~ 20 ε² ε̃ y for (3,6).
        let sp = state_point(pr, 0.3, 1e-9).unwrap();
        assert!(delta_lr(pr, 2, &sp).unwrap().abs() < 1e-8);
        assert!((delta_lr(pr, 1, &sp).unwrap() - 0.63).abs() < 1e-5);
    }

    #[test]
    fn limit_examples() {
        let lim = limit_y0(p(3, 6), 0.3).unwrap();
        assert_eq!(lim.at(2, 2), 0.0);
        assert!((lim.at(1, 1) - 0.63).abs() < 1e-15);
        let lim = limit_y0(p(2, 4), 1.0 / 3.0).unwrap();
        assert_eq!(lim.at(1, 1), 0.0);
    }

    #[test]
    fn rho_examples() {
        let (l, r1) = (Label::VarEdges, Label::CheckEdges(1));
        for eps in [0.05, 0.3, 0.6, 0.95] {
            assert_eq!(correlation_rho(p(3, 6), l, r1, eps).unwrap(), Some(1.0));
        }
        assert_eq!(correlation_rho(p(2, 4), l, r1, 0.4).unwrap(), Some(-1.0));
        assert_eq!(correlation_rho(p(2, 4), l, r1, 0.2).unwrap(), Some(1.0));
        assert_eq!(correlation_rho(p(2, 4), l, r1, 1.0 / 3.0).unwrap(), None);
        assert_eq!(correlation_rho(p(2, 6), l, r1, 0.2).unwrap(), None);
        // r_2 has zero limiting variance for b >= 3.
        assert_eq!(correlation_rho(p(3, 6), l, Label::CheckEdges(2), 0.3).unwrap(), None);
        assert!(correlation_rho(p(3, 6), l, Label::CheckEdges(6), 0.3).is_err());
    }

    #[test]
    fn stability_threshold_examples() {
        assert!((stability_threshold(p(2, 4)).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(stability_threshold(p(3, 6)), None);
        assert!((stability_threshold(p(2, 6)).unwrap() - 0.2).abs() < 1e-16);
    }
}
