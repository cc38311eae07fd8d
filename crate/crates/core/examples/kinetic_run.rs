//! Full kinetic run with both splittings, reporting mass and the density
//! peak; the smooth continuous-velocity equilibrium is used when asked.
//!
//!     cargo run --release --example kinetic_run [two_speed|smooth] [eps]

use aggrekin::kinetic::run_kinetic;
use aggrekin::models::KineticSpec;
use aggrekin::{preset, Closure, EquilibriumModel, RunControl, Splitting, VelocityGrid, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let mut args = std::env::args().skip(1);
    let model = args.next().unwrap_or_else(|| "two_speed".into());
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.1);

    let p = preset("chemo_kinetic_two_speed")?;
    let spec = if model == "smooth" {
        KineticSpec {
            vgrid: VelocityGrid::continuous(1.0, 32)?,
            model: EquilibriumModel::Smooth { vmax: 1.0, k: 10.0, beta: 1.0 },
            eps,
        }
    } else {
        KineticSpec { eps, ..p.kinetic.clone().expect("kinetic preset") }
    };
    for splitting in [Splitting::Lie, Splitting::Strang] {
        let scheme = p.kinetic_scheme(400, Some(&spec), VelocityMode::VolpertLiteral, splitting, Closure::FarField)?;
        let control = RunControl { horizon: 2.0, snapshot_every: 0.5, keep_going: false };
        let traj = run_kinetic(&scheme, p.initial_density(scheme.grid()), &control, false)?;
        println!("{splitting:?}, {model}, eps = {eps}, dt = {:.4}", scheme.grid().dt);
        for s in &traj.snapshots {
            let max = s.rho.iter().copied().fold(0.0, f64::max);
            let mass = aggrekin::grid::total_mass(&s.rho, scheme.grid().dx);
            println!("  t = {:.2}  mass = {mass:.12}  max rho = {max:.4}", s.t);
        }
    }
    Ok(())
}
