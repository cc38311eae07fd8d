//! With `W = -|x|/2` and `a = id`, the field `d_x S` of the macroscopic
//! scheme follows the Lax-Friedrichs scheme for Burgers' equation.

use aggrekin::grid::total_mass;
use aggrekin::models::burgers_reference_step;
use aggrekin::{preset, Closure, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let p = preset("vpfp_one_bump")?;
    let mut scheme = p.macro_scheme(400, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY)?;
    let rho0 = p.initial_density(scheme.grid());
    let mass = total_mass(&rho0, scheme.grid().dx);
    scheme.c = mass;
    let scheme = scheme.with_dt(scheme.stable_dt(f64::INFINITY))?;
    let g = *scheme.grid();

    let mut state = scheme.state(0.0, rho0)?;
    let mut u = state.field.centered.clone();
    for n in 1..=400 {
        state = scheme.step(&state)?;
        u = burgers_reference_step(&u, mass, &g)?;
        if n % 50 == 0 {
            let gap = u.iter().zip(&state.field.centered).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("step {n:>3}  t = {:.3}  max |d_x S - u| = {gap:.2e}", state.t);
        }
    }
    Ok(())
}
