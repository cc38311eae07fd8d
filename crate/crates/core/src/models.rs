//! Preset problems and the two independent oracles: Dirac-particle
//! dynamics and the Lax-Friedrichs Burgers scheme for `u = d_x S`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre5, Grid1D, VelocityGrid};
use crate::kinetic::{kinetic_dt, EquilibriumModel, KineticScheme, Splitting};
use crate::law::VelocityLaw;
use crate::macro_scheme::{MacroScheme, VelocityMode};
use crate::potential::{Closure, FieldSolver, PointyPotential};

/// `amp * exp(-k (x - center)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amp: f64,
    pub center: f64,
    pub k: f64,
}

/// Point mass `mass * delta(x - pos)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dirac {
    pub mass: f64,
    pub pos: f64,
}

/// Initial measure: Gaussian bumps plus point masses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialData {
    pub bumps: Vec<Bump>,
    pub diracs: Vec<Dirac>,
}

impl InitialData {
    pub fn bumps(list: &[(f64, f64, f64)]) -> Self {
        Self { bumps: list.iter().map(|&(amp, center, k)| Bump { amp, center, k }).collect(), diracs: Vec::new() }
    }

    pub fn diracs(list: &[(f64, f64)]) -> Self {
        Self { bumps: Vec::new(), diracs: list.iter().map(|&(mass, pos)| Dirac { mass, pos }).collect() }
    }

    /// Smooth part of the density.
    pub fn density(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.amp * (-b.k * (x - b.center).powi(2)).exp()).sum()
    }

    /// `rho_i = (1/dx) int_{x_i}^{x_{i+1}} rho_ini`; point masses go to the
    /// nearest node. The end nodes are left empty.
    pub fn cell_averages(&self, grid: &Grid1D) -> Vec<f64> {
        let mut rho: Vec<f64> = (0..=grid.nx)
            .map(|i| {
                let (l, m, r) = (grid.x(i), grid.x(i) + 0.5 * grid.dx, grid.x(i) + grid.dx);
                (gauss_legendre5(|x| self.density(x), l, m) + gauss_legendre5(|x| self.density(x), m, r)) / grid.dx
            })
            .collect();
        for d in &self.diracs {
            rho[grid.nearest_node(d.pos)] += d.mass / grid.dx;
        }
        rho[0] = 0.0;
        rho[grid.nx] = 0.0;
        rho
    }
}

/// Kinetic part of a preset.
#[derive(Debug, Clone)]
pub struct KineticSpec {
    pub vgrid: VelocityGrid,
    pub model: EquilibriumModel,
    pub eps: f64,
}

/// A fully wired problem.
#[derive(Debug, Clone)]
pub struct ProblemPreset {
    pub name: String,
    pub potential: PointyPotential,
    pub law: VelocityLaw,
    pub kinetic: Option<KineticSpec>,
    pub domain: (f64, f64),
    pub initial: InitialData,
    /// Default final time (scheme time).
    pub horizon: f64,
}

pub const PRESET_NAMES: [&str; 8] = [
    "vpfp_one_bump",
    "vpfp_three_bumps",
    "chemo_two_bumps",
    "chemo_three_bumps",
    "chemo_kinetic_two_speed",
    "repulsive_k10",
    "repulsive_k50",
    "repulsive_two_bumps",
];

const DOMAIN: (f64, f64) = (-2.5, 2.5);

fn one_bump() -> InitialData {
    InitialData::bumps(&[(1.0, 0.0, 10.0)])
}

fn two_bumps() -> InitialData {
    InitialData::bumps(&[(1.0, 0.7, 10.0), (1.0, -0.7, 10.0)])
}

fn three_bumps() -> InitialData {
    InitialData::bumps(&[(1.0, 1.25, 10.0), (0.8, 0.0, 20.0), (1.0, -1.0, 10.0)])
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<ProblemPreset> {
    let chemo = || VelocityLaw::arctan(10.0);
    let (potential, law, initial, horizon, kinetic) = match name {
        "vpfp_one_bump" => (PointyPotential::zero(), VelocityLaw::identity(), one_bump(), 2.0, None),
        "vpfp_three_bumps" => (PointyPotential::zero(), VelocityLaw::identity(), three_bumps(), 4.0, None),
        "chemo_two_bumps" => (PointyPotential::exp_half(), chemo(), two_bumps(), 5.0, None),
        "chemo_three_bumps" => (PointyPotential::exp_half(), chemo(), three_bumps(), 5.0, None),
        "chemo_kinetic_two_speed" => (
            PointyPotential::exp_half(),
            chemo(),
            two_bumps(),
            4.0,
            Some(KineticSpec {
                vgrid: VelocityGrid::TwoSpeed { speed: 1.0 },
                model: EquilibriumModel::TwoSpeedChemo { k: 10.0 },
                eps: 0.1,
            }),
        ),
        "repulsive_k10" => (PointyPotential::exp_half(), VelocityLaw::repulsive_arctan(10.0), one_bump(), 2.0, None),
        "repulsive_k50" => (PointyPotential::exp_half(), VelocityLaw::repulsive_arctan(50.0), one_bump(), 2.0, None),
        "repulsive_two_bumps" => {
            // Spreads to the domain ends soon after t = 1.
            (PointyPotential::exp_half(), VelocityLaw::repulsive_arctan(10.0), two_bumps(), 1.0, None)
        }
        other => {
            return Err(Error::Config(format!("unknown preset '{other}'; valid presets: {}", PRESET_NAMES.join(", "))))
        }
    };
    Ok(ProblemPreset { name: name.into(), potential, law, kinetic, domain: DOMAIN, initial, horizon })
}

impl ProblemPreset {
    /// Grid with `nx` intervals and a placeholder time step.
    pub fn grid(&self, nx: usize) -> Result<Grid1D> {
        Grid1D::new(self.domain.0, self.domain.1, nx, 1.0)
    }

    pub fn initial_density(&self, grid: &Grid1D) -> Vec<f64> {
        self.initial.cell_averages(grid)
    }

    /// Macroscopic scheme at its CFL time step (capped by `dt_max`).
    pub fn macro_scheme(&self, nx: usize, mode: VelocityMode, closure: Closure, dt_max: f64) -> Result<MacroScheme> {
        let grid = self.grid(nx)?;
        let mass = crate::grid::total_mass(&self.initial_density(&grid), grid.dx);
        let solver = FieldSolver::new(self.potential.clone(), grid, closure)?;
        let scheme = MacroScheme::new(self.law.clone(), solver, mode, mass);
        let dt = scheme.stable_dt(dt_max);
        scheme.with_dt(dt)
    }

    /// Kinetic scheme at `0.95 dx / V_M`; `spec` overrides the preset's
    /// kinetic part.
    pub fn kinetic_scheme(
        &self,
        nx: usize,
        spec: Option<&KineticSpec>,
        mode: VelocityMode,
        splitting: Splitting,
        closure: Closure,
    ) -> Result<KineticScheme> {
        let spec = spec
            .or(self.kinetic.as_ref())
            .ok_or_else(|| Error::Config(format!("preset '{}' has no kinetic model", self.name)))?;
        let grid = self.grid(nx)?;
        let grid = grid.with_dt(kinetic_dt(grid.dx, spec.vgrid.vmax()))?;
        let solver = FieldSolver::new(self.potential.clone(), grid, closure)?;
        KineticScheme::new(spec.vgrid, spec.model.clone(), solver, spec.eps, mode, splitting)
    }
}

/// Interaction kernel of a particle system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleKernel {
    /// `W = exp(-|x|)/2`.
    ExpHalf,
    /// `W = -|x|/2`. Not derived in the source model; unverified extra.
    Heaviside,
}

/// Point masses `sum m_i delta(x - x_i)`, positions increasing.
#[derive(Clone)]
pub struct ParticleSystem {
    pub masses: Vec<f64>,
    pub positions: Vec<f64>,
    pub law: VelocityLaw,
    pub kernel: ParticleKernel,
}

impl fmt::Debug for ParticleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParticleSystem")
            .field("masses", &self.masses)
            .field("positions", &self.positions)
            .field("kernel", &self.kernel)
            .finish()
    }
}

const MERGE_GAP: f64 = 1e-9;

impl ParticleSystem {
    pub fn new(masses: Vec<f64>, positions: Vec<f64>, law: VelocityLaw, kernel: ParticleKernel) -> Result<Self> {
        if masses.len() != positions.len() || masses.is_empty() {
            return Err(Error::Contract("need as many masses as positions, at least one".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Contract("particle masses must be positive".into()));
        }
        if positions.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Contract("particle positions must be strictly increasing".into()));
        }
        Ok(Self { masses, positions, law, kernel })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass-weighted mean position.
    pub fn centroid(&self) -> f64 {
        self.masses.iter().zip(&self.positions).map(|(m, x)| m * x).sum::<f64>() / self.total_mass()
    }
}

fn kernel_factor(kernel: ParticleKernel, d: f64) -> f64 {
    match kernel {
        ParticleKernel::ExpHalf => (-d.abs()).exp(),
        ParticleKernel::Heaviside => 1.0,
    }
}

/// One-sided slopes `(d_x S(x_i-), d_x S(x_i+))` at every particle.
pub fn particle_slopes(masses: &[f64], positions: &[f64], kernel: ParticleKernel) -> Vec<(f64, f64)> {
    (0..masses.len())
        .map(|i| {
            let others: f64 = (0..masses.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let d = positions[j] - positions[i];
                    0.5 * masses[j] * d.signum() * kernel_factor(kernel, d)
                })
                .sum();
            (others + 0.5 * masses[i], others - 0.5 * masses[i])
        })
        .collect()
}

fn rhs(sys: &ParticleSystem, positions: &[f64]) -> Vec<f64> {
    particle_slopes(&sys.masses, positions, sys.kernel)
        .iter()
        .zip(&sys.masses)
        .map(|(&(minus, plus), m)| -(sys.law.big_a(plus) - sys.law.big_a(minus)) / m)
        .collect()
}

/// `x_i' = -[A(d_x S)]_{x_i} / m_i`.
pub fn particle_rhs(sys: &ParticleSystem) -> Result<Vec<f64>> {
    if sys.positions.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Contract("coincident or unsorted particles: merge first".into()));
    }
    Ok(rhs(sys, &sys.positions))
}

/// A collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    pub t: f64,
    pub position: f64,
    pub mass: f64,
}

/// Sampled particle trajectory.
#[derive(Debug, Clone, Default)]
pub struct ParticleTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub masses: Vec<Vec<f64>>,
    pub merges: Vec<MergeEvent>,
}

impl ParticleTrajectory {
    /// Positions at time `t`, linearly interpolated between samples taken
    /// with the same particle count.
    pub fn positions_at(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.positions.first().cloned();
        }
        if k == self.times.len() {
            return None;
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (&self.positions[k - 1], &self.positions[k]);
        if p0.len() != p1.len() || t1 == t0 {
            return Some(p1.clone());
        }
        let s = (t - t0) / (t1 - t0);
        Some(p0.iter().zip(p1).map(|(a, b)| a + s * (b - a)).collect())
    }
}

fn rk4(sys: &ParticleSystem, x: &[f64], h: f64) -> Vec<f64> {
    let add = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = rhs(sys, x);
    let k2 = rhs(sys, &add(x, &k1, 0.5 * h));
    let k3 = rhs(sys, &add(x, &k2, 0.5 * h));
    let k4 = rhs(sys, &add(x, &k3, h));
    (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

fn min_gap(x: &[f64]) -> f64 {
    x.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
}

/// RK4 integration up to `horizon` with step `min(dt, 0.01/max speed)`,
/// shortened near contact.
/// Particles closer than `1e-9` merge at their mass-weighted mean; the
/// collision time is located by bisection on the step length.
pub fn particle_evolve(sys: &ParticleSystem, dt: f64, horizon: f64) -> Result<ParticleTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("dt must be positive, got {dt}")));
    }
    let mut sys = sys.clone();
    let mut t = 0.0;
    let mut out = ParticleTrajectory::default();
    let record = |out: &mut ParticleTrajectory, t: f64, s: &ParticleSystem| {
        out.times.push(t);
        out.positions.push(s.positions.clone());
        out.masses.push(s.masses.clone());
    };
    record(&mut out, t, &sys);
    while t < horizon * (1.0 - 1e-15) {
        let vel = rhs(&sys, &sys.positions);
        let speed = vel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut h = dt.min(if speed > 0.0 { 0.01 / speed } else { dt }).min(horizon - t);
        // No RK4 stage may see crossed particles: at most half the time to
        // contact of any approaching pair.
        for (p, v) in sys.positions.windows(2).zip(vel.windows(2)) {
            let closing = v[0] - v[1];
            if closing > 0.0 {
                h = h.min(0.5 * (p[1] - p[0]) / closing);
            }
        }
        let mut next = rk4(&sys, &sys.positions, h);
        let collided = sys.positions.len() > 1 && min_gap(&next) <= MERGE_GAP;
        if collided {
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > 1e-15 * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if min_gap(&rk4(&sys, &sys.positions, mid)) > MERGE_GAP {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            h = hi;
            next = rk4(&sys, &sys.positions, h);
        }
        t += h;
        sys.positions = next;
        if collided {
            // Record the pre-merge configuration, then merge.
            record(&mut out, t, &sys);
            merge_close(&mut sys, t, &mut out.merges);
        }
        record(&mut out, t, &sys);
    }
    Ok(out)
}

fn merge_close(sys: &mut ParticleSystem, t: f64, merges: &mut Vec<MergeEvent>) {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new(); // (mass, first moment, members)
    let mut last = f64::NEG_INFINITY;
    for (&m, &x) in sys.masses.iter().zip(&sys.positions) {
        match groups.last_mut() {
            Some(g) if x - last <= MERGE_GAP => {
                g.0 += m;
                g.1 += m * x;
                g.2 += 1;
            }
            _ => groups.push((m, m * x, 1)),
        }
        last = x;
    }
    sys.masses = groups.iter().map(|g| g.0).collect();
    sys.positions = groups.iter().map(|g| g.1 / g.0).collect();
    for g in groups.iter().filter(|g| g.2 > 1) {
        merges.push(MergeEvent { t, position: g.1 / g.0, mass: g.0 });
    }
}

/// Lax-Friedrichs step for Burgers' equation on `u = d_x S`:
/// `u_i' = u_i (1 - l c) + (l c/2)(u_{i-1} + u_{i+1}) - (l/4)(A(u_{i+1}) - A(u_{i-1}))`
/// with `A(u) = u^2/2`; the end values are held fixed.
pub fn burgers_reference_step(u: &[f64], c: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len("u", u.len())?;
    let l = grid.lambda;
    let a = |x: f64| 0.5 * x * x;
    let mut out = u.to_vec();
    for i in 1..grid.nx {
        out[i] = u[i] * (1.0 - l * c) + 0.5 * l * c * (u[i - 1] + u[i + 1]) - 0.25 * l * (a(u[i + 1]) - a(u[i - 1]));
    }
    Ok(out)
}
