//! Monte Carlo peeling on sampled Tanner graphs.
//!
//! One iteration peels one variable, which removes exactly `b` variable-side
//! edges; with `τ = t/ξ` this matches `dy/dτ = -1/(ε y^(b-1))`. A checkpoint
//! at normalized time `τ_c` records the counters after `round(τ_c ξ)` peels.
//! Only trials that actually performed that many peels contribute to a
//! checkpoint; trials that halted or emptied the graph earlier are counted
//! separately.

mod decoder;
mod graph;
mod moments;

pub use decoder::{DecoderState, StepReport};
pub use graph::{sample_graph, TannerGraph};
pub use moments::{jackknife_cov_stderr, tree_reduce, Moments};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::covariance_matrix;
use crate::ensemble::{state_point, tau_of_y, y_of_tau, EnsembleParams};
use crate::error::{Error, Result};
use crate::matrix::{CovarianceMatrix, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: EnsembleParams,
    /// Variable nodes per graph.
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Normalized times `τ`, strictly increasing, each in `[0, ε/b]`.
    pub checkpoints: Vec<f64>,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl SimConfig {
    pub fn new(params: EnsembleParams, n: usize, epsilon: f64, trials: usize, seed: u64, checkpoints: Vec<f64>) -> Result<Self> {
        let cfg = SimConfig { params, n, epsilon, trials, seed, checkpoints, threads: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same as [`SimConfig::new`] with checkpoints given as `y` values
    /// (strictly decreasing, in `[0, 1]`).
    pub fn with_y_checkpoints(params: EnsembleParams, n: usize, epsilon: f64, trials: usize, seed: u64, ys: &[f64]) -> Result<Self> {
        let taus = ys.iter().map(|&y| tau_of_y(params, epsilon, y)).collect::<Result<Vec<_>>>()?;
        Self::new(params, n, epsilon, trials, seed, taus)
    }

    pub fn validate(&self) -> Result<()> {
        graph::check_divisible(self.params, self.n)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon = {} outside (0, 1)", self.epsilon)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        let end = self.epsilon / f64::from(self.params.b());
        for (k, &tau) in self.checkpoints.iter().enumerate() {
            if !(tau >= 0.0 && tau <= end) {
                return Err(Error::Config(format!("checkpoint tau = {tau} outside [0, epsilon/b]")));
            }
            if k > 0 && tau <= self.checkpoints[k - 1] {
                return Err(Error::Config("checkpoints must be strictly increasing in tau".into()));
            }
        }
        Ok(())
    }

    /// Total edges `ξ = n b`.
    pub fn xi(&self) -> u64 {
        (self.n * self.params.b() as usize) as u64
    }

    /// Peel count at which each checkpoint is recorded.
    pub fn checkpoint_iterations(&self) -> Vec<u64> {
        let xi = self.xi() as f64;
        self.checkpoints.iter().map(|&tau| (tau * xi).round() as u64).collect()
    }

    /// Independent RNG stream for a trial.
    pub fn trial_rng(&self, trial_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial_index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    /// Stopped after the last checkpoint with decoding still in progress.
    Running,
    /// Residual graph emptied after this many peels.
    Completed(u64),
    /// Ran out of degree-one checks after this many peels.
    Halted(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    /// Counters `(l, r_1, ..., r_{d-1})` at each checkpoint reached.
    pub counters: Vec<Option<Vec<u64>>>,
    pub status: TrialStatus,
}

pub fn run_trial(config: &SimConfig, trial_index: u64) -> Result<TrialRecord> {
    let mut rng = config.trial_rng(trial_index);
    let graph = sample_graph(config.params, config.n, &mut rng)?;
    let mut state = DecoderState::apply_channel_and_init(graph, config.epsilon, &mut rng);
    let targets = config.checkpoint_iterations();
    let mut counters = Vec::with_capacity(targets.len());
    let mut status = TrialStatus::Running;
    'checkpoints: for &t in &targets {
        while state.iteration() < t {
            match state.peel_step(&mut rng) {
                StepReport::Peeled { .. } => {}
                StepReport::Halted => {
                    status = TrialStatus::Halted(state.iteration());
                    break 'checkpoints;
                }
                StepReport::Finished => {
                    status = TrialStatus::Completed(state.iteration());
                    break 'checkpoints;
                }
            }
        }
        counters.push(Some(state.counters()));
    }
    counters.resize(targets.len(), None);
    Ok(TrialRecord { counters, status })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEstimate {
    pub tau: f64,
    pub y: f64,
    pub iteration: u64,
    pub trials_used: usize,
    /// Trials that halted before reaching this checkpoint.
    pub halted: usize,
    /// Trials whose residual graph emptied before this checkpoint.
    pub completed: usize,
    /// Sample means divided by `ξ`.
    pub mean: Vec<f64>,
    /// Sample covariances divided by `ξ`.
    pub cov: CovarianceMatrix,
    /// Jackknife standard errors of `cov`.
    pub stderr: CovarianceMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub xi: u64,
    pub trials: usize,
    /// Trials that halted at any point before the last checkpoint.
    pub halted_trials: usize,
    pub checkpoints: Vec<CheckpointEstimate>,
}

impl CovarianceEstimate {
    pub fn halted_fraction(&self) -> f64 {
        self.halted_trials as f64 / self.trials as f64
    }
}

fn run_all(config: &SimConfig) -> Result<Vec<TrialRecord>> {
    let work = || (0..config.trials as u64).into_par_iter().map(|i| run_trial(config, i)).collect::<Result<Vec<_>>>();
    if config.threads == 0 {
        work()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(work)
    }
}

/// Runs every trial and estimates per-checkpoint means and covariances.
/// The reduction order is fixed by trial index, so the result does not
/// depend on the number of worker threads.
pub fn estimate_covariance(config: &SimConfig) -> Result<CovarianceEstimate> {
    config.validate()?;
    if config.trials < 2 {
        return Err(Error::InsufficientTrials { needed: 2, got: config.trials });
    }
    let records = run_all(config)?;
    let xi = config.xi();
    let xif = xi as f64;
    let dim = config.params.d() as usize;
    let iterations = config.checkpoint_iterations();
    let mut checkpoints = Vec::with_capacity(iterations.len());
    for (c, (&tau, &iteration)) in config.checkpoints.iter().zip(&iterations).enumerate() {
        let samples: Vec<Vec<f64>> = records
            .iter()
            .filter_map(|r| r.counters[c].as_ref())
            .map(|v| v.iter().map(|&k| k as f64).collect())
            .collect();
        let ended_before = |r: &&TrialRecord| r.counters[c].is_none();
        let halted = records.iter().filter(ended_before).filter(|r| matches!(r.status, TrialStatus::Halted(_))).count();
        let completed = records.iter().filter(ended_before).filter(|r| matches!(r.status, TrialStatus::Completed(_))).count();
        let moments = tree_reduce(dim, &samples);
        let se = jackknife_cov_stderr(&samples, &moments);
        let mut cov = CovarianceMatrix::zeros(dim);
        let mut stderr = CovarianceMatrix::zeros(dim);
        for (i, j) in CovarianceMatrix::upper_pairs(dim) {
            cov.set(i, j, moments.covariance(i, j) / xif);
            stderr.set(i, j, se[i * dim + j] / xif);
        }
        let mean = if moments.count() == 0 {
            vec![f64::NAN; dim]
        } else {
            moments.mean().iter().map(|m| m / xif).collect()
        };
        checkpoints.push(CheckpointEstimate {
            tau,
            y: y_of_tau(config.params, config.epsilon, tau)?,
            iteration,
            trials_used: samples.len(),
            halted,
            completed,
            mean,
            cov,
            stderr,
        });
    }
    let last = iterations.last().copied().unwrap_or(0);
    let halted_trials = records
        .iter()
        .filter(|r| matches!(r.status, TrialStatus::Halted(t) if t < last))
        .count();
    Ok(CovarianceEstimate { xi, trials: config.trials, halted_trials, checkpoints })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub y: f64,
    pub i: Label,
    pub j: Label,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// NaN when the standard error is not finite and positive.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ZScore>,
}

impl ComparisonTable {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, |a, z| if z.is_nan() { f64::NAN } else { a.max(z) })
    }

    /// Fraction of entries with `|z| <= limit`; NaN scores count as misses.
    pub fn fraction_within(&self, limit: f64) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.z.abs() <= limit).count() as f64 / self.rows.len() as f64
    }
}

/// z-scores of the estimate against arbitrary reference matrices, one per
/// checkpoint.
pub fn compare_against(estimate: &CovarianceEstimate, reference: &[CovarianceMatrix]) -> ComparisonTable {
    assert_eq!(estimate.checkpoints.len(), reference.len());
    let mut rows = Vec::new();
    for (cp, exact) in estimate.checkpoints.iter().zip(reference) {
        for (i, j) in CovarianceMatrix::upper_pairs(exact.dim()) {
            let (analytic, empirical, stderr) = (exact.at(i, j), cp.cov.at(i, j), cp.stderr.at(i, j));
            let z = if stderr.is_finite() && stderr > 0.0 { (empirical - analytic) / stderr } else { f64::NAN };
            rows.push(ZScore { y: cp.y, i: Label::from_index(i), j: Label::from_index(j), analytic, empirical, stderr, z });
        }
    }
    ComparisonTable { rows }
}

/// z-scores of the estimate against the closed-form covariances.
pub fn compare_report(estimate: &CovarianceEstimate, params: EnsembleParams, epsilon: f64) -> Result<ComparisonTable> {
    let reference = estimate
        .checkpoints
        .iter()
        .map(|cp| state_point(params, epsilon, cp.y).map(|sp| covariance_matrix(params, &sp)))
        .collect::<Result<Vec<_>>>()?;
    Ok(compare_against(estimate, &reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(b: u32, d: u32) -> EnsembleParams {
        EnsembleParams::new(b, d).unwrap()
    }

    #[test]
    fn config_validation() {
        let pr = p(3, 6);
        assert!(SimConfig::new(pr, 101, 0.4, 10, 0, vec![0.0]).is_err());
        assert!(SimConfig::new(pr, 100, 0.4, 10, 0, vec![0.1, 0.05]).is_err());
        assert!(SimConfig::new(pr, 100, 0.4, 10, 0, vec![0.2]).is_err());
        assert!(SimConfig::new(pr, 100, 1.0, 10, 0, vec![0.0]).is_err());
        let cfg = SimConfig::with_y_checkpoints(pr, 100, 0.4, 10, 0, &[1.0, 0.9]).unwrap();
        assert_eq!(cfg.xi(), 300);
        assert_eq!(cfg.checkpoint_iterations()[0], 0);
    }

    #[test]
    fn needs_two_trials() {
        let cfg = SimConfig::new(p(3, 6), 100, 0.4, 1, 0, vec![0.0]).unwrap();
        assert_eq!(estimate_covariance(&cfg), Err(Error::InsufficientTrials { needed: 2, got: 1 }));
    }

    #[test]
    fn first_checkpoint_is_post_channel_state() {
        let cfg = SimConfig::with_y_checkpoints(p(3, 6), 1000, 0.4, 4, 9, &[1.0, 0.9]).unwrap();
        for t in 0..4 {
            let rec = run_trial(&cfg, t).unwrap();
            let mut rng = cfg.trial_rng(t);
            let g = sample_graph(cfg.params, cfg.n, &mut rng).unwrap();
            let st = DecoderState::apply_channel_and_init(g, cfg.epsilon, &mut rng);
            assert_eq!(rec.counters[0].as_ref().unwrap(), &st.counters());
        }
    }

    #[test]
    fn trial_is_reproducible() {
        let cfg = SimConfig::with_y_checkpoints(p(3, 6), 2000, 0.42, 3, 77, &[0.9, 0.6, 0.3]).unwrap();
        for t in 0..3 {
            assert_eq!(run_trial(&cfg, t).unwrap(), run_trial(&cfg, t).unwrap());
        }
        assert_ne!(run_trial(&cfg, 0).unwrap(), run_trial(&cfg, 1).unwrap());
    }

    #[test]
    fn self_comparison_gives_zero_z() {
        let cfg = SimConfig::with_y_checkpoints(p(3, 6), 600, 0.4, 50, 3, &[0.95, 0.8]).unwrap();
        let est = estimate_covariance(&cfg).unwrap();
        let reference: Vec<CovarianceMatrix> = est.checkpoints.iter().map(|c| c.cov.clone()).collect();
        let table = compare_against(&est, &reference);
        assert!(table.rows.iter().all(|r| r.z == 0.0));
        assert_eq!(table.fraction_within(4.0), 1.0);
    }

    #[test]
    fn corrupted_reference_entry_shows_up() {
        let cfg = SimConfig::with_y_checkpoints(p(3, 6), 600, 0.4, 50, 3, &[0.95, 0.8]).unwrap();
        let est = estimate_covariance(&cfg).unwrap();
        let mut reference: Vec<CovarianceMatrix> = est.checkpoints.iter().map(|c| c.cov.clone()).collect();
        let se = est.checkpoints[1].stderr.at(1, 2);
        let v = reference[1].at(1, 2);
        reference[1].set(1, 2, v + 10.0 * se);
        let table = compare_against(&est, &reference);
        let hit = table.rows.iter().find(|r| r.y == est.checkpoints[1].y && r.i == Label::CheckEdges(1) && r.j == Label::CheckEdges(2)).unwrap();
        assert!((hit.z.abs() - 10.0).abs() < 1e-9);
        assert!((table.max_abs_z() - 10.0).abs() < 1e-9);
    }
}
