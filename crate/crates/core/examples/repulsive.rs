//! Repulsive velocity laws: the density spreads, no cell ever collects a
//! finite share of the mass. No convergence theory covers this case.

use aggrekin::diagnostics::{blowup_indicator, BLOWUP_FRACTION};
use aggrekin::macro_scheme::run_macro;
use aggrekin::{preset, Closure, RunControl, VelocityMode};

fn main() -> aggrekin::Result<()> {
    for name in ["repulsive_k10", "repulsive_k50", "repulsive_two_bumps"] {
        let p = preset(name)?;
        let s = p.macro_scheme(800, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY)?;
        let control = RunControl { horizon: p.horizon, snapshot_every: 0.5, keep_going: false };
        let traj = run_macro(&s, p.initial_density(s.grid()), &control)?;
        let peaks: Vec<String> =
            traj.snapshots.iter().map(|s| format!("{:.3}", s.rho.iter().copied().fold(0.0, f64::max))).collect();
        let blow = blowup_indicator(&traj.reports, s.grid().dx, BLOWUP_FRACTION)?;
        println!("{name:<20} max rho every 0.5: [{}]  blow-up: {blow:?}", peaks.join(", "));
    }
    Ok(())
}
