//! User-supplied velocity law and interaction kernel.

use std::sync::Arc;

use aggrekin::macro_scheme::run_macro;
use aggrekin::models::InitialData;
use aggrekin::{preset, Closure, PointyPotential, RunControl, VelocityLaw, VelocityMode};

fn main() -> aggrekin::Result<()> {
    // Saturating attraction a(x) = tanh(5x), kernel w(z) = exp(-z^2)/4.
    let law = VelocityLaw::custom("tanh(5x)", Arc::new(|x: f64| (5.0 * x).tanh()), 4.0);
    let potential = PointyPotential::custom(Arc::new(|z: f64| 0.25 * (-z * z).exp()), 5.0);
    println!("law {}: alpha = {:.4}, attractive = {}", law.name(), law.alpha, law.attractive);

    let mut p = preset("chemo_two_bumps")?;
    p.law = law;
    p.potential = potential;
    p.initial = InitialData::bumps(&[(1.0, -0.6, 15.0), (0.6, 0.8, 15.0)]);
    let s = p.macro_scheme(600, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY)?;
    let control = RunControl { horizon: 3.0, snapshot_every: 0.5, keep_going: false };
    let traj = run_macro(&s, p.initial_density(s.grid()), &control)?;
    for snap in &traj.snapshots {
        let max = snap.rho.iter().copied().fold(0.0, f64::max);
        println!("t = {:.2}  max rho = {max:.3}", snap.t);
    }
    Ok(())
}
