//! Smooth data collapsing into a Dirac mass under the macroscopic scheme.
//!
//!     cargo run --release --example macro_blowup [preset] [nx]

use aggrekin::diagnostics::{blowup_indicator, cluster_fraction, count_peaks, BLOWUP_FRACTION};
use aggrekin::macro_scheme::run_macro;
use aggrekin::{preset, Closure, RunControl, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "vpfp_one_bump".into());
    let nx: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(800);

    let p = preset(&name)?;
    let scheme = p.macro_scheme(nx, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY)?;
    let g = *scheme.grid();
    println!("{name}: nx = {nx}, dx = {:.4}, dt = {:.5}, c = {:.4}", g.dx, g.dt, scheme.c);

    let control = RunControl { horizon: p.horizon, snapshot_every: p.horizon / 8.0, keep_going: false };
    let traj = run_macro(&scheme, p.initial_density(&g), &control)?;
    println!("{:>7} {:>10} {:>12} {:>6}", "t", "max rho", "5-cell mass", "peaks");
    for s in &traj.snapshots {
        let max = s.rho.iter().copied().fold(0.0, f64::max);
        println!(
            "{:>7.3} {max:>10.3} {:>11.1}% {:>6}",
            s.t,
            100.0 * cluster_fraction(&s.rho, 5),
            count_peaks(&s.rho, 1e-3)
        );
    }
    match blowup_indicator(&traj.reports, g.dx, BLOWUP_FRACTION)? {
        Some(t) => println!("one cell holds {BLOWUP_FRACTION} of the mass from t = {t:.3}"),
        None => println!("no cell reached {BLOWUP_FRACTION} of the mass before t = {}", p.horizon),
    }
    Ok(())
}
