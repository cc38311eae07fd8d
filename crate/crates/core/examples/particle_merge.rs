//! Two point masses on the grid against the particle system: the grid
//! centroids, the particle positions, and the two merge times.

use aggrekin::diagnostics::{centroid, count_peaks};
use aggrekin::models::{particle_evolve, InitialData, ParticleKernel, ParticleSystem};
use aggrekin::{preset, Closure, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let mut p = preset("chemo_two_bumps")?;
    p.initial = InitialData::diracs(&[(0.5, -0.7), (0.5, 0.7)]);
    let scheme = p.macro_scheme(1000, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY)?;
    let g = *scheme.grid();
    let mid = g.nearest_node(0.0);

    // Scheme time t is particle time t/2.
    let sys = ParticleSystem::new(vec![0.5, 0.5], vec![-0.7, 0.7], p.law.clone(), ParticleKernel::ExpHalf)?;
    let particles = particle_evolve(&sys, 0.25 * g.dt, 0.5 * p.horizon)?;
    if let Some(m) = particles.merges.first() {
        println!("particles merge at t = {:.4} (scheme time)", 2.0 * m.t);
    }

    let mut state = scheme.state(0.0, p.initial_density(&g))?;
    let mut merged = false;
    let steps = (p.horizon / g.dt) as usize;
    for n in 1..=steps {
        state = scheme.step(&state)?;
        if !merged && count_peaks(&state.rho, 1e-3) == 1 {
            merged = true;
            println!("grid merges at t = {:.4}", state.t);
        }
        if n % 200 == 0 {
            let l = centroid(&state.rho, &g, 0..mid);
            let r = centroid(&state.rho, &g, mid + 1..g.len());
            let pos = particles.positions_at(0.5 * state.t).unwrap_or_default();
            println!("t = {:.3}  grid {l:+.4} {r:+.4}  particles {pos:+.4?}", state.t);
        }
    }
    Ok(())
}
