//! Direct numerical integration of the covariance-evolution system
//!
//! `dδ^{i,j}/dy = -(e/y) [ Σ_k (∂f^(i)/∂e_k δ^{j,k} + ∂f^(j)/∂e_k δ^{i,k}) + f^(i,j) ]`
//!
//! in decreasing `y` from the initial covariances at `y = 1`. It shares no
//! code with the closed form besides the density-evolution fractions, and is
//! used to cross-check it.

use crate::analytic::covariance_matrix;
use crate::ensemble::{edge_fractions, state_point, EdgeFractions, EnsembleParams};
use crate::error::{Error, Result};
use crate::matrix::{CovarianceMatrix, Label};

/// Drift partials and diffusion sources at one `y`, indexed in label order
/// (`0 = l`, `j = r_j`).
#[derive(Debug, Clone)]
pub struct CERhsTables {
    dim: usize,
    /// `partials[i * dim + k] = ∂f^(i)/∂e_k`; the `l` row is identically zero.
    partials: Vec<f64>,
    /// `source[k * dim + j] = f^(k,j)`; the `l` row and column are zero.
    source: Vec<f64>,
}

impl CERhsTables {
    pub fn build(params: EnsembleParams, fr: &EdgeFractions) -> CERhsTables {
        let d = params.d();
        let dim = d as usize;
        let bm1 = f64::from(params.b() - 1);
        let l = fr.e;
        let r = |j: u32| fr.r(j);
        let mut partials = vec![0.0; dim * dim];
        for j in 1..d {
            let jf = f64::from(j);
            let row = j as usize * dim;
            if j < d - 1 {
                partials[row] = -jf * bm1 * (r(j + 1) - r(j)) / (l * l);
                partials[row + j as usize] = -jf * bm1 / l;
                partials[row + j as usize + 1] = jf * bm1 / l;
            } else {
                // r_d eliminated through r_d = l - Σ_{k<d} r_k.
                let c = f64::from(d - 1) * bm1;
                partials[row] = c * (l + r(d - 1) - r(d)) / (l * l);
                for k in 1..d {
                    let twice = if k == d - 1 { 2.0 } else { 1.0 };
                    partials[row + k as usize] = -twice * c / l;
                }
            }
        }
        let mut source = vec![0.0; dim * dim];
        for k in 1..d {
            for j in k..d {
                let (kf, jf) = (f64::from(k), f64::from(j));
                let mut brace = -(r(k + 1) - r(k)) * (r(j + 1) - r(j)) / l;
                if k == j {
                    brace += r(j + 1) + r(j);
                }
                if k == j + 1 {
                    brace -= r(k);
                }
                if j == k + 1 {
                    brace -= r(j);
                }
                let v = kf * jf * bm1 / l * brace;
                source[k as usize * dim + j as usize] = v;
                source[j as usize * dim + k as usize] = v;
            }
        }
        CERhsTables { dim, partials, source }
    }

    #[inline]
    pub fn partial(&self, i: Label, k: Label) -> f64 {
        self.partials[i.index() * self.dim + k.index()]
    }

    #[inline]
    pub fn source(&self, k: Label, j: Label) -> f64 {
        self.source[k.index() * self.dim + j.index()]
    }
}

fn rhs_into(params: EnsembleParams, epsilon: f64, y: f64, cov: &CovarianceMatrix, out: &mut CovarianceMatrix) -> Result<()> {
    if !(y > 0.0) {
        return Err(Error::Domain { name: "y", value: y, domain: "(0, 1]" });
    }
    let sp = state_point(params, epsilon, y.min(1.0))?;
    let fr = edge_fractions(params, &sp);
    if !(fr.e > 0.0) || !fr.e.is_finite() {
        return Err(Error::StepFailure { y, reason: "variable-side fraction underflowed to zero" });
    }
    let tables = CERhsTables::build(params, &fr);
    let dim = cov.dim();
    let scale = -fr.e / y;
    let p = &tables.partials;
    let c = cov.as_slice();
    for i in 0..dim {
        for j in i..dim {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += p[i * dim + k] * c[j * dim + k] + p[j * dim + k] * c[i * dim + k];
            }
            acc += tables.source[i * dim + j];
            out.set(i, j, scale * acc);
        }
    }
    Ok(())
}

/// Right-hand side `dδ/dy` of the covariance-evolution system.
pub fn ce_rhs(params: EnsembleParams, epsilon: f64, y: f64, cov: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let mut out = CovarianceMatrix::zeros(cov.dim());
    rhs_into(params, epsilon, y, cov, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMode {
    FixedRk4,
    /// Also integrates at half the step and reports the largest discrepancy
    /// at the shared grid points.
    Rk4Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub y_end: f64,
    pub step: f64,
    pub mode: IntegrationMode,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { y_end: 0.05, step: 1e-4, mode: IntegrationMode::FixedRk4 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_end > 0.0 && self.y_end <= 1.0) {
            return Err(Error::Domain { name: "y_end", value: self.y_end, domain: "(0, 1]" });
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Domain { name: "step", value: self.step, domain: "(0, inf)" });
        }
        if self.y_end < 1.0 && self.step >= 1.0 - self.y_end {
            return Err(Error::Domain { name: "step", value: self.step, domain: "(0, 1 - y_end)" });
        }
        Ok(())
    }

    /// Number of equal steps covering `[y_end, 1]`; the step is shrunk so
    /// that the grid lands exactly on `y_end`.
    fn steps(&self) -> usize {
        let span = 1.0 - self.y_end;
        if span <= 0.0 {
            return 0;
        }
        (span / self.step - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub y: f64,
    pub fractions: EdgeFractions,
    pub cov: CovarianceMatrix,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Largest entrywise gap between the full-step and half-step runs.
    pub richardson_error: Option<f64>,
}

fn run_rk4(params: EnsembleParams, epsilon: f64, cov0: &CovarianceMatrix, y_end: f64, steps: usize) -> Result<Vec<TrajectorySample>> {
    let dim = cov0.dim();
    let h = if steps == 0 { 0.0 } else { (1.0 - y_end) / steps as f64 };
    let sample = |y: f64, cov: CovarianceMatrix| -> Result<TrajectorySample> {
        let sp = state_point(params, epsilon, y)?;
        Ok(TrajectorySample { y, fractions: edge_fractions(params, &sp), cov })
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sample(1.0, cov0.clone())?);
    let mut cur = cov0.clone();
    let mut k1 = CovarianceMatrix::zeros(dim);
    let mut k2 = CovarianceMatrix::zeros(dim);
    let mut k3 = CovarianceMatrix::zeros(dim);
    let mut k4 = CovarianceMatrix::zeros(dim);
    let mut tmp = CovarianceMatrix::zeros(dim);
    let combine = |dst: &mut CovarianceMatrix, base: &CovarianceMatrix, k: &CovarianceMatrix, a: f64| {
        for ((o, &b), &kv) in dst.as_mut_slice().iter_mut().zip(base.as_slice()).zip(k.as_slice()) {
            *o = b + a * kv;
        }
    };
    for n in 0..steps {
        // Integrating toward smaller y: the step in y is -h.
        let y = 1.0 - n as f64 * h;
        let y_next = if n + 1 == steps { y_end } else { 1.0 - (n + 1) as f64 * h };
        let y_mid = y - 0.5 * h;
        rhs_into(params, epsilon, y, &cur, &mut k1)?;
        combine(&mut tmp, &cur, &k1, -0.5 * h);
        rhs_into(params, epsilon, y_mid, &tmp, &mut k2)?;
        combine(&mut tmp, &cur, &k2, -0.5 * h);
        rhs_into(params, epsilon, y_mid, &tmp, &mut k3)?;
        combine(&mut tmp, &cur, &k3, -h);
        rhs_into(params, epsilon, y_next, &tmp, &mut k4)?;
        let slices = (k1.as_slice(), k2.as_slice(), k3.as_slice(), k4.as_slice());
        for (idx, c) in cur.as_mut_slice().iter_mut().enumerate() {
            let incr = slices.0[idx] + 2.0 * slices.1[idx] + 2.0 * slices.2[idx] + slices.3[idx];
            *c -= h / 6.0 * incr;
        }
        debug_assert!(cur.is_symmetric());
        out.push(sample(y_next, cur.clone())?);
    }
    Ok(out)
}

/// Classical fixed-step RK4 from `y = 1` down to `config.y_end`.
pub fn integrate(params: EnsembleParams, epsilon: f64, cov0: &CovarianceMatrix, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate()?;
    let steps = config.steps();
    let samples = run_rk4(params, epsilon, cov0, config.y_end, steps)?;
    let richardson_error = match config.mode {
        IntegrationMode::FixedRk4 => None,
        IntegrationMode::Rk4Richardson => {
            let fine = run_rk4(params, epsilon, cov0, config.y_end, 2 * steps)?;
            let worst = samples
                .iter()
                .zip(fine.iter().step_by(2))
                .map(|(a, b)| a.cov.max_abs_diff(&b.cov).0)
                .fold(0.0, f64::max);
            Some(worst)
        }
    };
    Ok(Trajectory { samples, richardson_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub max_abs_err: f64,
    pub y: f64,
    pub i: Label,
    pub j: Label,
}

/// Worst entrywise deviation of a trajectory from the closed form.
pub fn compare_with_analytic(trajectory: &Trajectory, params: EnsembleParams, epsilon: f64) -> Result<ComparisonReport> {
    let mut report = ComparisonReport { max_abs_err: 0.0, y: 1.0, i: Label::VarEdges, j: Label::VarEdges };
    for s in &trajectory.samples {
        let exact = covariance_matrix(params, &state_point(params, epsilon, s.y)?);
        let (err, i, j) = s.cov.max_abs_diff(&exact);
        if err > report.max_abs_err || err.is_nan() {
            report = ComparisonReport { max_abs_err: err, y: s.y, i: Label::from_index(i), j: Label::from_index(j) };
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::initial_covariance;

    fn p(b: u32, d: u32) -> EnsembleParams {
        EnsembleParams::new(b, d).unwrap()
    }

    #[test]
    fn var_row_partials_are_zero_and_source_symmetric() {
        let pr = p(3, 6);
        let sp = state_point(pr, 0.42, 0.7).unwrap();
        let t = CERhsTables::build(pr, &edge_fractions(pr, &sp));
        for k in Label::all(6) {
            assert_eq!(t.partial(Label::VarEdges, k), 0.0);
            assert_eq!(t.source(Label::VarEdges, k), 0.0);
            for j in Label::all(6) {
                assert_eq!(t.source(k, j), t.source(j, k));
            }
        }
    }

    #[test]
    fn var_var_rhs_is_zero() {
        let pr = p(3, 6);
        let cov = initial_covariance(pr, 0.4294398).unwrap();
        for y in [1.0, 0.7, 0.3] {
            let rhs = ce_rhs(pr, 0.4294398, y, &cov).unwrap();
            assert_eq!(rhs.at(0, 0), 0.0);
        }
        assert!(ce_rhs(pr, 0.4, 0.0, &cov).is_err());
    }

    #[test]
    fn rhs_at_start_matches_one_sided_difference() {
        let (pr, eps) = (p(3, 6), 0.4294398);
        let cov = initial_covariance(pr, eps).unwrap();
        let rhs = ce_rhs(pr, eps, 1.0, &cov).unwrap();
        // Second-order one-sided difference at y = 1 (the closed form is
        // smooth through y = 1, but y > 1 is outside the domain).
        let h = 1e-5;
        let f = |y: f64| covariance_matrix(pr, &state_point(pr, eps, y).unwrap());
        let (f0, f1, f2) = (f(1.0), f(1.0 - h), f(1.0 - 2.0 * h));
        for i in 0..6 {
            for j in 0..6 {
                let fd = (3.0 * f0.at(i, j) - 4.0 * f1.at(i, j) + f2.at(i, j)) / (2.0 * h);
                assert!((fd - rhs.at(i, j)).abs() < 1e-6, "({i},{j}) fd {fd} rhs {}", rhs.at(i, j));
            }
        }
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let (pr, eps) = (p(3, 6), 0.4);
        let cov0 = initial_covariance(pr, eps).unwrap();
        let cfg = IntegratorConfig { y_end: 1.0, step: 1e-4, mode: IntegrationMode::FixedRk4 };
        let traj = integrate(pr, eps, &cov0, &cfg).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].cov, cov0);
        let rep = compare_with_analytic(&traj, pr, eps).unwrap();
        assert!(rep.max_abs_err < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = [
            IntegratorConfig { y_end: 0.0, ..Default::default() },
            IntegratorConfig { y_end: 1.2, ..Default::default() },
            IntegratorConfig { step: 0.0, ..Default::default() },
            IntegratorConfig { y_end: 0.5, step: 0.6, mode: IntegrationMode::FixedRk4 },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(IntegratorConfig::default().validate().is_ok());
    }

    #[test]
    fn corrupted_entry_is_located() {
        let (pr, eps) = (p(3, 6), 0.4294398);
        let cov0 = initial_covariance(pr, eps).unwrap();
        let cfg = IntegratorConfig { y_end: 0.5, step: 1e-3, mode: IntegrationMode::FixedRk4 };
        let mut traj = integrate(pr, eps, &cov0, &cfg).unwrap();
        let idx = 200;
        let target = &mut traj.samples[idx];
        let v = target.cov.at(2, 4);
        target.cov.set(2, 4, v + 0.01);
        let y = target.y;
        let rep = compare_with_analytic(&traj, pr, eps).unwrap();
        assert_eq!(rep.y, y);
        assert_eq!((rep.i, rep.j), (Label::CheckEdges(2), Label::CheckEdges(4)));
        assert!((rep.max_abs_err - 0.01).abs() < 1e-6);
    }

    #[test]
    fn richardson_reports_small_gap() {
        let (pr, eps) = (p(2, 4), 0.333333);
        let cov0 = initial_covariance(pr, eps).unwrap();
        let cfg = IntegratorConfig { y_end: 0.3, step: 1e-3, mode: IntegrationMode::Rk4Richardson };
        let traj = integrate(pr, eps, &cov0, &cfg).unwrap();
        let gap = traj.richardson_error.unwrap();
        assert!(gap > 0.0 && gap < 1e-8, "gap {gap}");
        assert!((traj.samples.last().unwrap().y - 0.3).abs() < 1e-15);
    }
}
