//! The two-speed kinetic scheme approaches the macroscopic scheme with
//! viscosity `V_M` as the relaxation time goes to zero, at a fixed time step.

use aggrekin::diagnostics::compare_ap;
use aggrekin::preset;

fn main() -> aggrekin::Result<()> {
    let p = preset("chemo_kinetic_two_speed")?;
    let eps = [1.0, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-10];
    println!("{:>8} {:>10} {:>12}", "eps", "dt", "max gap");
    for row in compare_ap(&p, &eps, 400, 100)? {
        println!("{:>8.0e} {:>10.3e} {:>12.3e}", row.eps, row.dt, row.gap);
    }
    Ok(())
}
