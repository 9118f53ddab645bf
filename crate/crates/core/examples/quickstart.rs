//! Closed-form covariance matrix for one ensemble at one point in time.
//!
//! cargo run --example quickstart -- [b] [d] [epsilon] [y]

use covevo::analytic::covariance_matrix;
use covevo::{edge_fractions, state_point, EnsembleParams, Label};

fn main() -> covevo::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let get = |i: usize, default: &str| args.get(i).map_or(default.to_string(), |s| s.clone());
    let b: u32 = get(0, "3").parse().expect("b");
    let d: u32 = get(1, "6").parse().expect("d");
    let eps: f64 = get(2, "0.4").parse().expect("epsilon");
    let y: f64 = get(3, "0.8").parse().expect("y");

    let params = EnsembleParams::new(b, d)?;
    let sp = state_point(params, eps, y)?;
    let fr = edge_fractions(params, &sp);
    println!("({b},{d}) ensemble, eps = {eps}, y = {y}, x = {:.6}", sp.x);
    print!("mean fractions:  l = {:.6}", fr.e);
    for j in 1..d {
        print!("  r{j} = {:.6}", fr.r(j));
    }
    println!("\n");

    let m = covariance_matrix(params, &sp);
    print!("{:>8}", "");
    for a in Label::all(d) {
        print!("{:>13}", a.to_string());
    }
    println!();
    for a in Label::all(d) {
        print!("{:>8}", a.to_string());
        for c in Label::all(d) {
            print!("{:>13.6e}", m.get(a, c));
        }
        println!();
    }
    Ok(())
}
