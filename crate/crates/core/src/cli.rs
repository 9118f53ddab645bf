//! `covevo` command-line front end.
//!
//! Tables go out as CSV (header line, comma separated, LF endings) with
//! numbers printed to a fixed count of significant digits in `%g` style.
//! Exit codes: 0 success, 1 gate failure, 2 invalid invocation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analytic::{correlation_rho, covariance_matrix, limit_y0};
use crate::ensemble::{state_point, EnsembleParams};
use crate::error::Error;
use crate::matrix::{CovarianceMatrix, Label};
use crate::ode::{compare_with_analytic, integrate, IntegrationMode, IntegratorConfig};
use crate::sim::{compare_report, estimate_covariance, SimConfig};
use crate::threshold::{alpha_from_definition, scaling_alpha, solve_threshold, ThresholdKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Rectangular numeric table; the first column is the sweep variable.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl OutputTable {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row arity must match the header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_sig(v, precision)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "covevo", version, about = "Covariance evolution of peeling decoding on regular LDPC ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form covariances along y (CSV).
    Solve(SolveArgs),
    /// y -> 0 limits and the correlation ρ_{l,r1} across ε (CSV).
    Stability(StabilityArgs),
    /// Threshold point and scaling parameter α.
    Threshold(ThresholdArgs),
    /// RK4 integration of the covariance evolution against the closed form.
    OdeCheck(OdeCheckArgs),
    /// Monte Carlo peeling against the closed form (CSV + summary).
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Variable-node degree.
    #[arg(long = "b")]
    pub b: u32,
    /// Check-node degree.
    #[arg(long = "d")]
    pub d: u32,
}

impl EnsembleArgs {
    fn params(&self) -> Result<EnsembleParams, Error> {
        EnsembleParams::new(self.b, self.d)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significant digits in CSV output.
    #[arg(long, default_value_t = 9)]
    pub precision: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long = "y-min", default_value_t = 0.05)]
    pub y_min: f64,
    /// Number of intervals between y = 1 and y-min.
    #[arg(long = "y-steps", default_value_t = 200)]
    pub y_steps: usize,
    /// Comma-separated entries such as `r1:r1,l:r2`; default is every (r_j, r_j).
    #[arg(long)]
    pub entries: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Interior grid points; ε_i = i / (eps-steps + 1).
    #[arg(long = "eps-steps", default_value_t = 99)]
    pub eps_steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OdeCheckArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long = "y-end", default_value_t = 0.05)]
    pub y_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Also integrate at half the step and report the gap and observed order.
    #[arg(long)]
    pub richardson: bool,
    /// Pass when the max error against the closed form is below this.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub epsilon: f64,
    /// Variable nodes per graph.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated y values, decreasing.
    #[arg(long, default_value = "0.95,0.9,0.8,0.7")]
    pub checkpoints: String,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// |z| limit; at least 95% of entries must fall within it. 0 disables the gate.
    #[arg(long = "gate-z", default_value_t = 4.0)]
    pub gate_z: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Fraction of entries that must satisfy the z gate.
pub const GATE_FRACTION: f64 = 0.95;

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_epsilon_flag(epsilon: f64) -> Result<(), Error> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--epsilon {epsilon} must lie in (0, 1)")))
    }
}

pub fn parse_entries(list: &str, d: u32) -> Result<Vec<(Label, Label)>, Error> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair.split_once(':').ok_or_else(|| usage(format!("entry `{pair}` must look like `r1:r2`")))?;
            let a: Label = a.parse().map_err(usage)?;
            let b: Label = b.parse().map_err(usage)?;
            if !a.is_valid_for(d) || !b.is_valid_for(d) {
                return Err(usage(format!("entry `{pair}` refers to a label outside l, r1..r{}", d - 1)));
            }
            Ok((a, b))
        })
        .collect()
}

pub fn solve_table(args: &SolveArgs) -> Result<OutputTable, Error> {
    let params = args.ensemble.params()?;
    check_epsilon_flag(args.epsilon)?;
    if !(args.y_min > 0.0 && args.y_min <= 1.0) {
        return Err(usage(format!("--y-min {} must lie in (0, 1]", args.y_min)));
    }
    let entries = match &args.entries {
        Some(list) => parse_entries(list, params.d())?,
        None => (1..params.d()).map(|j| (Label::CheckEdges(j), Label::CheckEdges(j))).collect(),
    };
    if entries.is_empty() {
        return Err(usage("--entries selects nothing"));
    }
    let mut header = vec!["y".to_string()];
    header.extend(entries.iter().map(|(a, b)| format!("delta_{a}_{b}")));
    let mut table = OutputTable::new(header);
    for k in 0..=args.y_steps {
        let y = if k == args.y_steps && k > 0 {
            args.y_min
        } else {
            1.0 - k as f64 * (1.0 - args.y_min) / args.y_steps.max(1) as f64
        };
        let m = covariance_matrix(params, &state_point(params, args.epsilon, y)?);
        let mut row = vec![y];
        row.extend(entries.iter().map(|&(a, b)| m.get(a, b)));
        table.push_row(row);
    }
    Ok(table)
}

pub fn stability_table(args: &StabilityArgs) -> Result<OutputTable, Error> {
    let params = args.ensemble.params()?;
    if params.d() < 3 {
        return Err(usage("stability sweep needs d >= 3 (uses r2)"));
    }
    if args.eps_steps == 0 {
        return Err(usage("--eps-steps must be positive"));
    }
    let header = ["eps", "lim_l_r1", "lim_r2_r1", "lim_r1_r1", "rho_l_r1"];
    let mut table = OutputTable::new(header.iter().map(|s| s.to_string()).collect());
    let (l, r1, r2) = (Label::VarEdges, Label::CheckEdges(1), Label::CheckEdges(2));
    for i in 1..=args.eps_steps {
        let eps = i as f64 / (args.eps_steps + 1) as f64;
        let lim = limit_y0(params, eps)?;
        let rho = correlation_rho(params, l, r1, eps)?.unwrap_or(f64::NAN);
        table.push_row(vec![eps, lim.get(l, r1), lim.get(r2, r1), lim.get(r1, r1), rho]);
    }
    Ok(table)
}

pub fn threshold_report(args: &ThresholdArgs) -> Result<String, Error> {
    let params = args.ensemble.params()?;
    let p = args.precision;
    let tp = solve_threshold(params)?;
    let mut out = String::new();
    let _ = writeln!(out, "ensemble: ({},{})", params.b(), params.d());
    let _ = writeln!(out, "eps_star: {}", format_sig(tp.eps_star, p));
    match tp.kind {
        ThresholdKind::StabilityLimit => {
            let _ = writeln!(out, "kind: stability limit 1/(d-1)");
            let _ = writeln!(out, "y_star: degenerate (critical point at y -> 0)");
            let _ = writeln!(out, "alpha: undefined for b = 2 (the critical point degenerates to y* = 0)");
        }
        ThresholdKind::Critical => {
            let (res_zero, res_tangent) = tp.residuals(params);
            let closed = scaling_alpha(params)?;
            let assembled = alpha_from_definition(params, &tp)?;
            let _ = writeln!(out, "kind: critical point");
            let _ = writeln!(out, "y_star: {}", format_sig(tp.y_star, p));
            let _ = writeln!(out, "x_star: {}", format_sig(tp.x_star, p));
            let _ = writeln!(out, "residual_y_star_zero: {}", format_sig(res_zero, 3));
            let _ = writeln!(out, "residual_y_star_tangent: {}", format_sig(res_tangent, 3));
            let _ = writeln!(out, "alpha: {}", format_sig(closed, p));
            let _ = writeln!(out, "alpha_from_definition: {}", format_sig(assembled, p));
            let _ = writeln!(out, "alpha_path_gap: {}", format_sig((closed - assembled).abs(), 3));
        }
    }
    Ok(out)
}

/// Returns the report and whether the error gate passed.
pub fn ode_check_report(args: &OdeCheckArgs) -> Result<(String, bool), Error> {
    let params = args.ensemble.params()?;
    check_epsilon_flag(args.epsilon)?;
    let mode = if args.richardson { IntegrationMode::Rk4Richardson } else { IntegrationMode::FixedRk4 };
    let config = IntegratorConfig { y_end: args.y_end, step: args.step, mode };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let cov0 = crate::analytic::initial_covariance(params, args.epsilon)?;
    let traj = integrate(params, args.epsilon, &cov0, &config)?;
    let rep = compare_with_analytic(&traj, params, args.epsilon)?;
    let pass = rep.max_abs_err < args.tolerance;
    let mut out = String::new();
    let _ = writeln!(out, "ensemble: ({},{}) epsilon: {}", params.b(), params.d(), args.epsilon);
    let _ = writeln!(out, "steps: {} (y from 1 to {}, step {})", traj.samples.len() - 1, args.y_end, args.step);
    let _ = writeln!(out, "max_abs_err: {}", format_sig(rep.max_abs_err, 4));
    let _ = writeln!(out, "at: y = {} entry ({}, {})", format_sig(rep.y, 6), rep.i, rep.j);
    if args.richardson {
        let half = IntegratorConfig { step: args.step / 2.0, mode: IntegrationMode::FixedRk4, ..config };
        let fine = integrate(params, args.epsilon, &cov0, &half)?;
        let fine_err = compare_with_analytic(&fine, params, args.epsilon)?.max_abs_err;
        let _ = writeln!(out, "half_step_gap: {}", format_sig(traj.richardson_error.unwrap_or(f64::NAN), 4));
        let _ = writeln!(out, "half_step_max_abs_err: {}", format_sig(fine_err, 4));
        let _ = writeln!(out, "error_ratio: {}", format_sig(rep.max_abs_err / fine_err, 4));
        let _ = writeln!(out, "observed_order: {}", format_sig((rep.max_abs_err / fine_err).log2(), 3));
    }
    let _ = writeln!(out, "gate: max_abs_err < {} -> {}", args.tolerance, if pass { "PASS" } else { "FAIL" });
    Ok((out, pass))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub entries: usize,
    pub within: usize,
    pub max_abs_z: f64,
    pub halted_fraction: f64,
    pub gate_z: f64,
    pub pass: bool,
}

impl SimulateSummary {
    pub fn line(&self) -> String {
        let gate = if self.gate_z > 0.0 {
            format!("{} (need {:.0}% within |z| <= {})", if self.pass { "PASS" } else { "FAIL" }, GATE_FRACTION * 100.0, self.gate_z)
        } else {
            "gate disabled".to_string()
        };
        format!(
            "entries within |z| <= {}: {}/{} ({:.1}%), max |z| = {}, halted fraction = {:.4}; {}",
            if self.gate_z > 0.0 { self.gate_z } else { 4.0 },
            self.within,
            self.entries,
            100.0 * self.within as f64 / self.entries.max(1) as f64,
            format_sig(self.max_abs_z, 4),
            self.halted_fraction,
            gate
        )
    }
}

pub fn parse_checkpoints(list: &str) -> Result<Vec<f64>, Error> {
    let ys = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("bad checkpoint `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if ys.is_empty() {
        return Err(usage("--checkpoints is empty"));
    }
    Ok(ys)
}

pub fn simulate_table(args: &SimulateArgs) -> Result<(OutputTable, SimulateSummary), Error> {
    let params = args.ensemble.params()?;
    check_epsilon_flag(args.epsilon)?;
    let ys = parse_checkpoints(&args.checkpoints)?;
    if args.trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    let mut config = SimConfig::with_y_checkpoints(params, args.n, args.epsilon, args.trials, args.seed, &ys)?;
    config.threads = args.threads;
    let estimate = estimate_covariance(&config)?;
    let cmp = compare_report(&estimate, params, args.epsilon)?;
    let dim = params.d() as usize;
    let pairs: Vec<(usize, usize)> = CovarianceMatrix::upper_pairs(dim).collect();
    let mut header: Vec<String> = ["y", "tau", "trials_used", "halted"].iter().map(|s| s.to_string()).collect();
    for &(i, j) in &pairs {
        let (a, b) = (Label::from_index(i), Label::from_index(j));
        for prefix in ["analytic", "empirical", "stderr", "z"] {
            header.push(format!("{prefix}_{a}_{b}"));
        }
    }
    let mut table = OutputTable::new(header);
    for (c, cp) in estimate.checkpoints.iter().enumerate() {
        let mut row = vec![ys[c], cp.tau, cp.trials_used as f64, cp.halted as f64];
        for z in &cmp.rows[c * pairs.len()..(c + 1) * pairs.len()] {
            row.extend([z.analytic, z.empirical, z.stderr, z.z]);
        }
        table.push_row(row);
    }
    let limit = if args.gate_z > 0.0 { args.gate_z } else { 4.0 };
    let within = cmp.rows.iter().filter(|r| r.z.abs() <= limit).count();
    let entries = cmp.rows.len();
    let gate_ok = within as f64 >= GATE_FRACTION * entries as f64;
    let summary = SimulateSummary {
        entries,
        within,
        max_abs_z: cmp.max_abs_z(),
        halted_fraction: estimate.halted_fraction(),
        gate_z: args.gate_z,
        pass: args.gate_z <= 0.0 || gate_ok,
    };
    Ok((table, summary))
}

fn emit(output: &OutputArgs, text: &str) -> i32 {
    let result = match &output.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            EXIT_GATE
        }
    }
}

fn fail_usage(e: Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first}");
            return EXIT_USAGE;
        }
    };
    match cli.command {
        Command::Solve(a) => match solve_table(&a) {
            Ok(t) => emit(&a.output, &t.to_csv(a.output.precision)),
            Err(e) => fail_usage(e),
        },
        Command::Stability(a) => match stability_table(&a) {
            Ok(t) => emit(&a.output, &t.to_csv(a.output.precision)),
            Err(e) => fail_usage(e),
        },
        Command::Threshold(a) => match threshold_report(&a) {
            Ok(text) => {
                print!("{text}");
                EXIT_OK
            }
            Err(e) => fail_usage(e),
        },
        Command::OdeCheck(a) => match ode_check_report(&a) {
            Ok((text, pass)) => {
                print!("{text}");
                if pass {
                    EXIT_OK
                } else {
                    EXIT_GATE
                }
            }
            Err(e) => fail_usage(e),
        },
        Command::Simulate(a) => match simulate_table(&a) {
            Ok((table, summary)) => {
                let code = emit(&a.output, &table.to_csv(a.output.precision));
                eprintln!("{}", summary.line());
                if code != EXIT_OK {
                    code
                } else if summary.pass {
                    EXIT_OK
                } else {
                    EXIT_GATE
                }
            }
            Err(e) => fail_usage(e),
        },
    }
}
