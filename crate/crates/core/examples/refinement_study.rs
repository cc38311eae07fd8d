//! W1 errors against the finest grid and the fitted order, before and after
//! the blow-up of `vpfp_one_bump`.

use aggrekin::diagnostics::refinement_study;
use aggrekin::{preset, Closure, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let p = preset("vpfp_one_bump")?;
    let grids = [100, 200, 400, 800, 1600];
    for horizon in [0.5, 2.0, 5.0] {
        let table = refinement_study(&p, &grids, horizon, VelocityMode::VolpertLiteral, Closure::FarField)?;
        println!("t = {horizon} (reference nx = {})", table.reference_nx);
        for r in &table.rows {
            println!("  nx = {:>5}  dx = {:.5}  W1 = {:.3e}", r.nx, r.dx, r.error);
        }
        match table.order {
            Some(o) => println!("  fitted order {o:.3}"),
            None => println!("  no fitted order"),
        }
    }
    Ok(())
}
