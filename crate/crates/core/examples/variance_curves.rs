//! Variances of the degree-j check-edge counts along the decoding, for
//! (3,6) and (2,4) at their thresholds, with an ASCII sketch of r1.
//!
//! cargo run --example variance_curves

use covevo::analytic::delta_rr;
use covevo::threshold::solve_threshold;
use covevo::{state_point, EnsembleParams};

fn curves(b: u32, d: u32) -> covevo::Result<()> {
    let params = EnsembleParams::new(b, d)?;
    let eps = solve_threshold(params)?.eps_star;
    println!("# ({b},{d}) at eps* = {eps:.7}");
    print!("{:>6}", "y");
    for j in 1..d {
        print!("{:>12}", format!("r{j},r{j}"));
    }
    println!();
    let mut r1 = Vec::new();
    for k in 0..=19 {
        let y = 1.0 - 0.05 * k as f64;
        let sp = state_point(params, eps, y)?;
        print!("{y:>6.2}");
        for j in 1..d {
            let v = delta_rr(params, j, j, &sp)?;
            if j == 1 {
                r1.push((y, v));
            }
            print!("{v:>12.6}");
        }
        println!();
    }
    let top = r1.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    println!("\n# r1,r1 sketch");
    for (y, v) in r1 {
        let bar = (50.0 * v / top).round().max(0.0) as usize;
        println!("{y:>6.2} |{}", "#".repeat(bar));
    }
    println!();
    Ok(())
}

fn main() -> covevo::Result<()> {
    curves(3, 6)?;
    curves(2, 4)
}
