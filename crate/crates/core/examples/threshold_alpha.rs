//! Threshold point and scaling parameter for a set of ensembles, with the
//! two independent evaluations of alpha side by side.
//!
//! cargo run --example threshold_alpha

use covevo::threshold::{alpha_from_definition, delta_r1r1_at_threshold, scaling_alpha, solve_threshold, ThresholdKind};
use covevo::EnsembleParams;

fn main() -> covevo::Result<()> {
    println!("{:>7} {:>12} {:>10} {:>10} {:>12} {:>10} {:>10}", "(b,d)", "eps*", "y*", "x*", "var r1", "alpha", "gap");
    for (b, d) in [(3, 6), (4, 8), (3, 4), (5, 10), (3, 5), (4, 6), (2, 4)] {
        let params = EnsembleParams::new(b, d)?;
        let tp = solve_threshold(params)?;
        let name = format!("({b},{d})");
        if tp.kind == ThresholdKind::StabilityLimit {
            println!("{name:>7} {:>12.9}  stability-limited, alpha undefined", tp.eps_star);
            continue;
        }
        let alpha = scaling_alpha(params)?;
        let gap = (alpha - alpha_from_definition(params, &tp)?).abs();
        println!(
            "{name:>7} {:>12.9} {:>10.6} {:>10.6} {:>12.6} {:>10.6} {:>10.1e}",
            tp.eps_star,
            tp.y_star,
            tp.x_star,
            delta_r1r1_at_threshold(&tp, params)?,
            alpha,
            gap
        );
    }
    Ok(())
}
