//! Integrates the covariance ODE numerically and compares with the closed form,
//! showing fourth-order convergence of the integrator.
//!
//! cargo run --release --example ode_crosscheck

use covevo::analytic::initial_covariance;
use covevo::ode::{compare_with_analytic, integrate, IntegrationMode, IntegratorConfig};
use covevo::EnsembleParams;

fn main() -> covevo::Result<()> {
    let params = EnsembleParams::new(3, 6)?;
    let eps = 0.4294398;
    let cov0 = initial_covariance(params, eps)?;
    println!("(3,6), eps = {eps}, y from 1 to 0.1");
    println!("{:>8} {:>12} {:>8} {:>7} {:>7}  ratio", "step", "max error", "at y", "i", "j");
    let mut prev: Option<f64> = None;
    for step in [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4] {
        let cfg = IntegratorConfig { y_end: 0.1, step, mode: IntegrationMode::FixedRk4 };
        let traj = integrate(params, eps, &cov0, &cfg)?;
        let rep = compare_with_analytic(&traj, params, eps)?;
        let ratio = prev.map_or(String::new(), |p| format!("{:.2}", p / rep.max_abs_err));
        println!("{step:>8.2e} {:>12.3e} {:>8.3} {:>7} {:>7}  {ratio}", rep.max_abs_err, rep.y, rep.i, rep.j);
        prev = Some(rep.max_abs_err);
    }
    Ok(())
}
