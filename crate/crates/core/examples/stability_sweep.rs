//! Limits as y -> 0 across the channel parameter for (2,4): the sign change
//! at 1/(d-1) and the correlation between l and r1.
//!
//! cargo run --example stability_sweep

use covevo::analytic::{correlation_rho, limit_y0, stability_threshold};
use covevo::{EnsembleParams, Label};

fn main() -> covevo::Result<()> {
    let params = EnsembleParams::new(2, 4)?;
    let limit = stability_threshold(params).expect("b = 2 has a stability limit");
    println!("stability limit 1/(d-1) = {limit:.6}");
    println!("{:>6} {:>12} {:>12} {:>12} {:>9}", "eps", "l,r1", "r2,r1", "r1,r1", "rho");
    for i in 1..=19 {
        let eps = i as f64 / 20.0;
        let lim = limit_y0(params, eps)?;
        let rho = correlation_rho(params, Label::VarEdges, Label::CheckEdges(1), eps)?;
        let r1 = Label::CheckEdges(1);
        println!(
            "{eps:>6.2} {:>12.6} {:>12.6} {:>12.6} {:>9}",
            lim.get(Label::VarEdges, r1),
            lim.get(Label::CheckEdges(2), r1),
            lim.get(r1, r1),
            rho.map_or("undef".to_string(), |r| format!("{r:+.3}"))
        );
    }
    let rho = correlation_rho(EnsembleParams::new(3, 6)?, Label::VarEdges, Label::CheckEdges(1), 0.3)?;
    println!("\n(3,6) rho at eps = 0.3: {rho:?} (b >= 3 is always fully correlated)");
    Ok(())
}
