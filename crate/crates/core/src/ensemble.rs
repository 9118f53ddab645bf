//! Density-evolution primitives of the (b,d)-regular ensemble.
//!
//! Peeling is parametrized by `y`, with `y = 1` at the start of decoding and
//! `dy/dτ = -1/(ε y^(b-1))` where `τ` is the number of peeled variables
//! divided by the edge count of the original graph. Everything else is a
//! closed-form function of `x = ε y^(b-1)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest check degree supported by the binomial table. `C(63, 31)` still
/// fits in a `u64`.
pub const MAX_DEGREE: u32 = 64;

fn pascal() -> &'static [Vec<u64>] {
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(MAX_DEGREE as usize);
        for n in 0..MAX_DEGREE as usize {
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        rows
    })
}

/// Exact binomial coefficient `C(n, k)` for `n < MAX_DEGREE`, zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    pascal()[n as usize][k as usize]
}

/// `base^exp` by repeated squaring.
#[inline]
pub fn ipow(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// Variable degree `b` and check degree `d` of a regular ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleParams {
    b: u32,
    d: u32,
}

impl EnsembleParams {
    pub fn new(b: u32, d: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidEnsemble { b, d, reason: "variable degree must be at least 2" });
        }
        if d < 2 {
            return Err(Error::InvalidEnsemble { b, d, reason: "check degree must be at least 2" });
        }
        if d > MAX_DEGREE {
            return Err(Error::InvalidEnsemble { b, d, reason: "check degree above 64 is not supported" });
        }
        Ok(Self { b, d })
    }

    #[inline]
    pub fn b(&self) -> u32 {
        self.b
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    /// Edges per variable node; `ξ/n` for this ensemble.
    #[inline]
    pub fn edges_per_variable(&self) -> f64 {
        f64::from(self.b)
    }
}

/// A point `(ε, y)` on the decoding trajectory together with the derived
/// quantities `x`, `1 - x` and `1 - ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub epsilon: f64,
    pub y: f64,
    pub x: f64,
    pub x_tilde: f64,
    pub eps_tilde: f64,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name: "epsilon", value: epsilon, domain: "(0, 1)" })
    }
}

pub fn state_point(params: EnsembleParams, epsilon: f64, y: f64) -> Result<StatePoint> {
    check_epsilon(epsilon)?;
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain { name: "y", value: y, domain: "(0, 1]" });
    }
    let x = epsilon * ipow(y, params.b - 1);
    Ok(StatePoint { epsilon, y, x, x_tilde: 1.0 - x, eps_tilde: 1.0 - epsilon })
}

/// Solves `dy/dτ = -1/(ε y^(b-1))`, `y(0) = 1`: `y = (1 - bτ/ε)^(1/b)`.
pub fn y_of_tau(params: EnsembleParams, epsilon: f64, tau: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let b = f64::from(params.b);
    let end = epsilon / b;
    if !(tau >= 0.0 && tau <= end) {
        return Err(Error::Domain { name: "tau", value: tau, domain: "[0, epsilon/b]" });
    }
    let base = (1.0 - b * tau / epsilon).max(0.0);
    Ok(base.powf(1.0 / b))
}

/// Inverse of [`y_of_tau`]: `τ = ε (1 - y^b) / b`.
pub fn tau_of_y(params: EnsembleParams, epsilon: f64, y: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain { name: "y", value: y, domain: "[0, 1]" });
    }
    Ok(epsilon * (1.0 - ipow(y, params.b)) / f64::from(params.b))
}

/// Expected residual edge counts normalized by the original edge count.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFractions {
    /// Variable-side edges, `x y`.
    pub e: f64,
    r: Vec<f64>,
}

impl EdgeFractions {
    /// Edges attached to checks of residual degree `j`, `1 <= j <= d`.
    #[inline]
    pub fn r(&self, j: u32) -> f64 {
        self.r[j as usize - 1]
    }

    pub fn check_side_total(&self) -> f64 {
        self.r.iter().sum()
    }
}

pub fn edge_fractions(params: EnsembleParams, sp: &StatePoint) -> EdgeFractions {
    let d = params.d;
    let (x, xt) = (sp.x, sp.x_tilde);
    let mut r = Vec::with_capacity(d as usize);
    r.push(x * (sp.y - 1.0 + ipow(xt, d - 1)));
    for j in 2..=d {
        r.push(binomial(d - 1, j - 1) as f64 * ipow(x, j) * ipow(xt, d - j));
    }
    EdgeFractions { e: x * sp.y, r }
}

/// `G_j = C(d-1, j-1) x^(j-1) (1-x)^(d-j-1) (d x - j) + [j = 1]`.
///
/// `G_1` is evaluated as `d x (1-x)^(d-2) + (1 - (1-x)^(d-2))` with the
/// bracket taken through `expm1`/`ln_1p`, so it keeps full relative accuracy
/// as `x -> 0`. `G_d` reduces to `-d x^(d-1)`.
pub fn g_coeff(params: EnsembleParams, j: u32, sp: &StatePoint) -> Result<f64> {
    let d = params.d;
    if j < 1 || j > d {
        return Err(Error::Index { index: j, lo: 1, hi: d });
    }
    Ok(g_unchecked(d, j, sp.x, sp.x_tilde))
}

#[inline]
pub(crate) fn g_unchecked(d: u32, j: u32, x: f64, xt: f64) -> f64 {
    let df = f64::from(d);
    if j == d {
        return -df * ipow(x, d - 1);
    }
    if j == 1 {
        let one_minus_pow = -(f64::from(d - 2) * (-x).ln_1p()).exp_m1();
        return df * x * ipow(xt, d - 2) + one_minus_pow;
    }
    binomial(d - 1, j - 1) as f64 * ipow(x, j - 1) * ipow(xt, d - j - 1) * (df * x - f64::from(j))
}
