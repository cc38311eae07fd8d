//! The naive face velocity `a(d_x S)` against the chain-rule one: the two
//! schemes agree before blow-up and split apart after it.

use aggrekin::macro_scheme::run_macro;
use aggrekin::{preset, Closure, RunControl, VelocityMode};

fn main() -> aggrekin::Result<()> {
    let p = preset("chemo_two_bumps")?;
    let control = RunControl { horizon: p.horizon, snapshot_every: 0.5, keep_going: true };
    let run = |mode| -> aggrekin::Result<_> {
        let s = p.macro_scheme(800, mode, Closure::FarField, f64::INFINITY)?;
        run_macro(&s, p.initial_density(s.grid()), &control)
    };
    let good = run(VelocityMode::VolpertLiteral)?;
    let naive = run(VelocityMode::Naive)?;
    println!("{:>6} {:>12} {:>12} {:>10}", "t", "max literal", "max naive", "gap/max");
    for (a, b) in good.snapshots.iter().zip(&naive.snapshots) {
        let top = a.rho.iter().copied().fold(0.0, f64::max);
        let gap = a.rho.iter().zip(&b.rho).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let top_b = b.rho.iter().copied().fold(0.0, f64::max);
        println!("{:>6.2} {top:>12.3} {top_b:>12.3} {:>10.3}", a.t, gap / top);
    }
    Ok(())
}
