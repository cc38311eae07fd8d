//! Drives a run from configuration text, as the `aggrekin` binary does,
//! writing CSV output into a scratch directory.

use aggrekin::app;
use aggrekin::config::parse_config;

const CONFIG: &str = "
preset = chemo_two_bumps
nx = 400
horizon = 1
snapshot_every = 0.25
deterministic = true
";

fn main() -> aggrekin::Result<()> {
    let mut cfg = parse_config(CONFIG)?;
    cfg.output_dir = std::env::temp_dir().join("aggrekin-config-run");
    let summary = app::run(&cfg, false)?;
    println!("{} steps, dt = {}", summary.steps, app::fmt_f64(summary.dt));
    for file in ["snapshots.csv", "diagnostics.csv", "meta.txt"] {
        let path = summary.output_dir.join(file);
        let lines = std::fs::read_to_string(&path)?.lines().count();
        println!("{} ({lines} lines)", path.display());
    }
    print!("{}", std::fs::read_to_string(summary.output_dir.join("meta.txt"))?);
    Ok(())
}
