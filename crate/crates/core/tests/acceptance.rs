//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every criterion reports even
//! when an earlier one fails; the exit status is nonzero if any fails.

use std::time::Instant;

use aggrekin::diagnostics::{
    blowup_indicator, centroid, cluster_fraction, compare_ap, count_peaks, report, BLOWUP_FRACTION,
};
use aggrekin::grid::total_mass;
use aggrekin::kinetic::{kinetic_dt, normalize_rows};
use aggrekin::macro_scheme::run_macro;
use aggrekin::models::{burgers_reference_step, particle_evolve, InitialData, ParticleKernel, ParticleSystem};
use aggrekin::{
    preset, trapezoid, Closure, EquilibriumModel, FieldSolver, Grid1D, MacroScheme, PointyPotential, RunControl,
    VelocityGrid, VelocityLaw, VelocityMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Random nonnegative compactly supported data: 1-4 smooth bumps
/// `amp (1 - ((x - c)/r)^2)^2` on `[-1.5, 1.5]`.
fn random_corpus(n: usize, grid: &Grid1D, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let r = rng.gen_range(0.1..0.6);
                    (rng.gen_range(0.2..1.5), rng.gen_range(-1.5 + r..1.5 - r), r)
                })
                .collect();
            let mut rho: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| {
                    bumps
                        .iter()
                        .map(|&(a, c, r)| {
                            let s = (x - c) / r;
                            if s.abs() < 1.0 {
                                a * (1.0 - s * s).powi(2)
                            } else {
                                0.0
                            }
                        })
                        .sum()
                })
                .collect();
            let n = rho.len();
            rho[0] = 0.0;
            rho[n - 1] = 0.0;
            rho
        })
        .collect()
}

struct CorpusStats {
    min_rho_rel: f64,
    max_velocity_excess: f64,
    mass_drift: f64,
    tv_growth: bool,
    osl_excess: f64,
}

fn corpus_run(law: VelocityLaw, potential: PointyPotential, seed: u64) -> CorpusStats {
    let grid = Grid1D::new(-2.5, 2.5, 400, 1.0).unwrap();
    let mut st = CorpusStats {
        min_rho_rel: 0.0,
        max_velocity_excess: f64::NEG_INFINITY,
        mass_drift: 0.0,
        tv_growth: false,
        osl_excess: f64::NEG_INFINITY,
    };
    for rho0 in random_corpus(200, &grid, seed) {
        let sup = rho0.iter().copied().fold(0.0, f64::max);
        let solver = FieldSolver::new(potential.clone(), grid, Closure::FarField).unwrap();
        let mass = total_mass(&rho0, grid.dx);
        let scheme = MacroScheme::new(law.clone(), solver, VelocityMode::VolpertLiteral, mass);
        let scheme = scheme.with_dt(0.95 * 2.0 / (3.0 * scheme.c) * grid.dx).unwrap();
        let mut state = scheme.state(0.0, rho0).unwrap();
        let mut prev = report(&state, &scheme);
        let m0 = state.mass;
        for _ in 0..500 {
            state = scheme.step(&state).unwrap_or_else(|e| panic!("step failed: {e}"));
            let r = report(&state, &scheme);
            st.min_rho_rel = st.min_rho_rel.min(r.min_rho / sup);
            st.max_velocity_excess = st.max_velocity_excess.max(r.max_abs_velocity - scheme.c);
            let drift = ((r.mass - m0) / m0).abs();
            if r.support_leak == 0.0 {
                st.mass_drift = st.mass_drift.max(drift);
            } else {
                st.mass_drift = st.mass_drift.max(((r.mass - prev.mass).abs() - r.support_leak).max(0.0) / m0);
            }
            st.tv_growth |= r.tv_cumulative > prev.tv_cumulative * (1.0 + 1e-12);
            st.osl_excess = st.osl_excess.max(r.osl_max - r.osl_bound);
            prev = r;
        }
    }
    st
}

fn criteria_1_to_3() -> [Outcome; 3] {
    let vpfp = corpus_run(VelocityLaw::identity(), PointyPotential::zero(), 11);
    let chemo = corpus_run(VelocityLaw::arctan(10.0), PointyPotential::exp_half(), 12);
    let min_rel = vpfp.min_rho_rel.min(chemo.min_rho_rel);
    let v_excess = vpfp.max_velocity_excess.max(chemo.max_velocity_excess);
    let c1 = outcome(
        min_rel >= -1e-14 && v_excess <= 1e-12,
        format!("min rho/|rho0|_inf = {min_rel:e}, max(|a| - c) = {v_excess:e} over 2 x 200 data x 500 steps"),
    );
    let drift = vpfp.mass_drift.max(chemo.mass_drift);
    let tv = vpfp.tv_growth || chemo.tv_growth;
    let c2 = outcome(drift <= 1e-12 && !tv, format!("max relative mass drift {drift:e}, TV(M) ever grew: {tv}"));
    let c3 = outcome(
        chemo.osl_excess <= 1e-10,
        format!("max over steps of osl - 2 alpha max|nu| = {:e} (chemo law)", chemo.osl_excess),
    );
    [c1, c2, c3]
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for name in ["vpfp_one_bump", "vpfp_three_bumps"] {
        let p = preset(name).unwrap();
        let mut scheme = p.macro_scheme(400, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
        let rho0 = p.initial_density(scheme.grid());
        let mass = total_mass(&rho0, scheme.grid().dx);
        // Both schemes share the viscosity c = M.
        scheme.c = mass;
        let scheme = scheme.with_dt(scheme.stable_dt(f64::INFINITY)).unwrap();
        let g = *scheme.grid();
        let mut state = scheme.state(0.0, rho0).unwrap();
        let mut u = state.field.centered.clone();
        let mut gap = 0.0f64;
        for _ in 0..200 {
            state = scheme.step(&state).unwrap();
            u = burgers_reference_step(&u, mass, &g).unwrap();
            gap = u.iter().zip(&state.field.centered).map(|(a, b)| (a - b).abs()).fold(gap, f64::max);
        }
        worst = worst.max(gap);
        notes.push(format!("{name}: {gap:.2e} (mass lost through the ends {:.1e})", mass - state.mass));
    }
    outcome(worst <= 1e-12, format!("max |d_x S - u_Burgers| over 200 steps, nx = 400: {}", notes.join(", ")))
}

fn criterion_5() -> Outcome {
    let p = preset("chemo_kinetic_two_speed").unwrap();
    let eps_list = [0.1, 1e-2, 1e-3, 1e-10];
    let rows = compare_ap(&p, &eps_list, 400, 100).unwrap();
    let dx = p.grid(400).unwrap().dx;
    let want_dt = kinetic_dt(dx, 1.0);
    let dt_ok = rows.iter().all(|r| r.dt == want_dt) && (want_dt - 0.95 * dx).abs() < 1e-18;
    let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let last = rows.last().unwrap().gap;
    let gaps: Vec<String> = rows.iter().map(|r| format!("{:e}:{:.3e}", r.eps, r.gap)).collect();
    outcome(
        last <= 1e-8 && decreasing && dt_ok,
        format!("gaps [{}], strictly decreasing {decreasing}, dt = 0.95 dx/V_M for all eps {dt_ok}", gaps.join(", ")),
    )
}

fn criterion_6() -> Outcome {
    let mut rho_dev = 0.0f64;
    let mut pi_dev = 0.0f64;
    let p = preset("chemo_kinetic_two_speed").unwrap();
    let two = p.kinetic_scheme(400, None, VelocityMode::VolpertLiteral, Default::default(), Closure::FarField).unwrap();
    let smooth_spec = aggrekin::models::KineticSpec {
        vgrid: VelocityGrid::continuous(1.0, 32).unwrap(),
        model: EquilibriumModel::Smooth { vmax: 1.0, k: 10.0, beta: 1.0 },
        eps: 0.05,
    };
    let smooth = p
        .kinetic_scheme(400, Some(&smooth_spec), VelocityMode::VolpertLiteral, Default::default(), Closure::FarField)
        .unwrap();
    for s in [&two, &smooth] {
        let nvel = s.vgrid.len();
        let rho0 = p.initial_density(s.grid());
        let mut st = s.isotropic_state(0.0, rho0).unwrap();
        for _ in 0..5 {
            st = s.step(&st).unwrap();
        }
        for dt in [1e-3, 0.05, 1.0] {
            let r = s.relax_step(&st, dt);
            let (rho, _, _) = s.moments(&r);
            for (a, b) in rho.iter().zip(&st.rho) {
                if *b > 0.0 {
                    rho_dev = rho_dev.max((a - b).abs() / b);
                }
            }
        }
        let full = s.relax_step(&st, 700.0 * st.eps);
        let e = s.equilibrium_rows(&st.field);
        for (k, f) in full.f.iter().enumerate() {
            pi_dev = pi_dev.max((f - e[k] * st.rho[k / nvel]).abs());
        }
    }
    outcome(
        rho_dev <= 1e-14 && pi_dev <= 1e-15,
        format!("max relative rho change {rho_dev:e}, max |f - Pi| after dt/eps = 700: {pi_dev:e}"),
    )
}

fn criterion_7() -> Outcome {
    let model = EquilibriumModel::Smooth { vmax: 1.0, k: 10.0, beta: 1.0 };
    let mut pts = Vec::new();
    for nv in [8usize, 16, 32, 64, 128] {
        let vg = VelocityGrid::continuous(1.0, nv).unwrap();
        let err = [-0.3, 0.05, 0.4]
            .iter()
            .map(|&x| {
                let vals: Vec<f64> = vg.velocities().iter().map(|&v| model.e(v, x)).collect();
                (trapezoid(&vals, &vg).unwrap() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        pts.push((vg.dv().unwrap(), err));
    }
    let slope = aggrekin::diagnostics::fitted_order(&pts).unwrap_or(f64::NAN);
    // The row normalization used by the scheme removes this error entirely.
    let vg = VelocityGrid::continuous(1.0, 8).unwrap();
    let row: Vec<f64> = vg.velocities().iter().map(|&v| model.e(v, 0.05)).collect();
    let normalized = trapezoid(&normalize_rows(&row, &vg).unwrap(), &vg).unwrap();
    outcome(
        slope >= 1.9,
        format!(
            "log-log slope {slope:.4} over N_v 8..128 (errors {:.2e} .. {:.2e}); normalized rows integrate to 1 {:+e}",
            pts[0].1,
            pts[4].1,
            normalized - 1.0
        ),
    )
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let mut p = preset("chemo_two_bumps").unwrap();
    p.initial = InitialData::diracs(&[(0.5, -0.7), (0.5, 0.7)]);
    let scheme = p.macro_scheme(1000, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
    let g = *scheme.grid();
    let mid = g.nearest_node(0.0);
    let rho0 = p.initial_density(&g);
    let xl = g.x(g.nearest_node(-0.7));
    let xr = g.x(g.nearest_node(0.7));
    let sys = ParticleSystem::new(vec![0.5, 0.5], vec![xl, xr], p.law.clone(), ParticleKernel::ExpHalf).unwrap();
    // The scheme advances at half the speed of the particle system: scheme
    // time t corresponds to particle time t/2.
    let horizon = p.horizon;
    let particles = particle_evolve(&sys, 0.25 * g.dt, 0.5 * horizon).unwrap();
    let merge_t = particles.merges.first().map(|m| 2.0 * m.t);

    let mut state = scheme.state(0.0, rho0).unwrap();
    let mut max_gap = 0.0f64;
    let mut grid_merge = None;
    let mut post_motion = 0.0f64;
    let mut last_c = centroid(&state.rho, &g, 0..g.len());
    let steps = (horizon / g.dt).floor() as usize;
    for _ in 0..steps {
        state = scheme.step(&state).unwrap();
        let t = state.t;
        let c = centroid(&state.rho, &g, 0..g.len());
        if grid_merge.is_none() && count_peaks(&state.rho, 1e-3) <= 1 {
            grid_merge = Some(t);
        }
        match merge_t {
            Some(tm) if t >= tm => post_motion = post_motion.max((c - last_c).abs()),
            _ => {
                if grid_merge.is_none() {
                    if let Some(pos) = particles.positions_at(0.5 * t) {
                        if pos.len() == 2 {
                            let l = centroid(&state.rho, &g, 0..mid);
                            let r = centroid(&state.rho, &g, mid + 1..g.len());
                            max_gap = max_gap.max((l - pos[0]).abs()).max((r - pos[1]).abs());
                        }
                    }
                }
            }
        }
        last_c = c;
    }
    let merge_gap = match (merge_t, grid_merge) {
        (Some(a), Some(b)) => (a - b).abs() / g.dt,
        _ => f64::INFINITY,
    };
    let secs = started.elapsed().as_secs_f64();
    outcome(
        max_gap <= 3.0 * g.dx && merge_gap <= 5.0 && post_motion < 1e-10 && secs <= 60.0,
        format!(
            "centroid gap {:.3} dx (<= 3), merge particle {:?} vs grid {:?}: {merge_gap:.1} dt (<= 5), post-merge motion {post_motion:e}/step, {secs:.1}s",
            max_gap / g.dx,
            merge_t,
            grid_merge
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut p = preset("chemo_two_bumps").unwrap();
    p.initial = InitialData::diracs(&[(1.0, 0.3)]);
    let scheme = p.macro_scheme(400, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
    let g = *scheme.grid();
    let mut state = scheme.state(0.0, p.initial_density(&g)).unwrap();
    let mut c = centroid(&state.rho, &g, 0..g.len());
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        state = scheme.step(&state).unwrap();
        let next = centroid(&state.rho, &g, 0..g.len());
        worst = worst.max((next - c).abs());
        c = next;
    }
    outcome(worst < 1e-10, format!("max centroid motion {worst:e} per step over 1e4 steps"))
}

fn criterion_10() -> Outcome {
    let p = preset("chemo_two_bumps").unwrap();
    let control = RunControl { horizon: p.horizon, snapshot_every: 0.0, keep_going: true };
    let run = |mode| {
        let s = p.macro_scheme(800, mode, Closure::FarField, f64::INFINITY).unwrap();
        let rho0 = p.initial_density(s.grid());
        run_macro(&s, rho0, &control).unwrap().last().unwrap().rho.clone()
    };
    let good = run(VelocityMode::VolpertLiteral);
    let naive = run(VelocityMode::Naive);
    let top = good.iter().copied().fold(0.0, f64::max);
    let gap = good.iter().zip(&naive).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(gap > 0.1 * top, format!("max |naive - literal| = {:.3} max rho at t = {}", gap / top, p.horizon))
}

fn criterion_11() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in ["vpfp_one_bump", "vpfp_three_bumps", "chemo_two_bumps", "chemo_three_bumps"] {
        let p = preset(name).unwrap();
        let s = p.macro_scheme(800, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
        let control = RunControl { horizon: p.horizon, snapshot_every: 0.0, keep_going: true };
        let tr = run_macro(&s, p.initial_density(s.grid()), &control).unwrap();
        let rho = &tr.last().unwrap().rho;
        let frac = cluster_fraction(rho, 5);
        let peaks = count_peaks(rho, 1e-3);
        pass &= frac >= 0.99;
        notes.push(format!("{name}: {:.1}% in 5 cells, {peaks} peak(s)", 100.0 * frac));
    }
    for name in ["repulsive_k10", "repulsive_k50", "repulsive_two_bumps"] {
        let p = preset(name).unwrap();
        let s = p.macro_scheme(800, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
        let control = RunControl { horizon: p.horizon, snapshot_every: 0.0, keep_going: true };
        let tr = run_macro(&s, p.initial_density(s.grid()), &control).unwrap();
        let blow = blowup_indicator(&tr.reports, s.grid().dx, BLOWUP_FRACTION).unwrap();
        let transient = 0.1 * p.horizon;
        let after: Vec<f64> = tr.reports.iter().filter(|r| r.t >= transient).map(|r| r.max_rho).collect();
        let monotone = after.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        pass &= blow.is_none() && monotone && tr.failures.is_empty();
        notes.push(format!("{name}: blow-up {blow:?}, max rho nonincreasing after t = {transient}: {monotone}"));
    }
    // The smeared Dirac passes the cell-fraction threshold only after the
    // preset's horizon, so the onset runs go on to t = 5.
    let onset = |nx| {
        let p = preset("vpfp_one_bump").unwrap();
        let s = p.macro_scheme(nx, VelocityMode::VolpertLiteral, Closure::FarField, f64::INFINITY).unwrap();
        let control = RunControl { horizon: 5.0, snapshot_every: 0.0, keep_going: true };
        let tr = run_macro(&s, p.initial_density(s.grid()), &control).unwrap();
        blowup_indicator(&tr.reports, s.grid().dx, BLOWUP_FRACTION).unwrap()
    };
    let (a, b) = (onset(400), onset(800));
    let stable = matches!((a, b), (Some(a), Some(b)) if (a - b).abs() <= 0.1 * b);
    pass &= stable;
    notes.push(format!("vpfp_one_bump onset nx=400 {a:?} vs nx=800 {b:?}: within 10% {stable}"));
    outcome(pass, notes.join("; "))
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let [c1, c2, c3] = criteria_1_to_3();
    results.push((1, "positivity and velocity bound", c1));
    results.push((2, "conservation and TVD", c2));
    results.push((3, "discrete one-sided Lipschitz bound", c3));
    type Check = (usize, &'static str, fn() -> Outcome);
    let checks: [Check; 8] = [
        (4, "Burgers equivalence", criterion_4),
        (5, "asymptotic-preserving limit", criterion_5),
        (6, "relaxation exactness", criterion_6),
        (7, "velocity quadrature order", criterion_7),
        (8, "Dirac dynamics vs particles", criterion_8),
        (9, "single Dirac equilibrium", criterion_9),
        (10, "wrong-velocity counterexample", criterion_10),
        (11, "qualitative figure reproduction", criterion_11),
    ];
    for (n, name, f) in checks {
        results.push((n, name, f()));
    }
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} criterion {n:>2} ({name}): {}", o.detail);
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
