//! Simulates peeling on sampled graphs and compares the empirical covariance
//! of the edge counts with the closed form.
//!
//! cargo run --release --example monte_carlo -- [n] [trials]

use covevo::sim::{compare_report, estimate_covariance, SimConfig};
use covevo::EnsembleParams;

fn main() -> covevo::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("integer")).collect();
    let n = args.first().copied().unwrap_or(6000);
    let trials = args.get(1).copied().unwrap_or(500);
    let params = EnsembleParams::new(3, 6)?;
    let eps = 0.40;
    let config = SimConfig::with_y_checkpoints(params, n, eps, trials, 1, &[0.95, 0.9, 0.8, 0.7])?;
    let estimate = estimate_covariance(&config)?;
    let table = compare_report(&estimate, params, eps)?;

    println!("(3,6), eps = {eps}, n = {n}, trials = {trials}, halted fraction = {:.4}", estimate.halted_fraction());
    println!("{:>5} {:>4} {:>4} {:>11} {:>11} {:>10} {:>7}", "y", "i", "j", "analytic", "empirical", "stderr", "z");
    for r in table.rows.iter().filter(|r| r.i == r.j) {
        println!("{:>5.2} {:>4} {:>4} {:>11.5} {:>11.5} {:>10.5} {:>7.2}", r.y, r.i, r.j, r.analytic, r.empirical, r.stderr, r.z);
    }
    println!(
        "all {} entries: max |z| = {:.3}, within |z| <= 4: {:.1}%",
        table.rows.len(),
        table.max_abs_z(),
        100.0 * table.fraction_within(4.0)
    );
    Ok(())
}
