//! Asymptotic-preserving splitting for the BGK model
//! `eps (d_t f + v d_x f) = rho E(v, d_x S) - f`.
//!
//! A step is an exact relaxation towards `Pi_ij = e_ij rho_i` followed by a
//! Lax-Friedrichs transport with viscosity `V_M`; the time step
//! `0.95 dx / V_M` does not depend on `eps`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use log::warn;

use crate::diagnostics::kinetic_report;
use crate::error::{Error, Result};
use crate::grid::{chord_slope, gauss_legendre5, total_mass, Grid1D, VelocityGrid};
use crate::macro_scheme::{check_positive, step_plan, RunControl, Snapshot, SnapshotClock, Trajectory, VelocityMode};
use crate::potential::{FieldSolver, PotentialField};

/// User-supplied equilibrium `E(v, x)`.
pub type EquilibriumFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Equilibrium profile `E(v, x) >= 0` with `int_V E(., x) = 1`, and its
/// antiderivative `calE(v, x) = int_0^x E(v, y) dy`.
#[derive(Clone)]
pub enum EquilibriumModel {
    /// Two-speed run-and-tumble chemotaxis:
    /// `E(v, x) = phi(-v x)`, `phi(y) = 1/2 - (2/pi) atan(k y)`.
    TwoSpeedChemo { k: f64 },
    /// Smooth profile on `[-V, V]`:
    /// `E = (1/2V) [1 + beta (cosh(v/V) - sinh 1) + g(x) v/V]`,
    /// `g(x) = atan(k x)/pi`. Its macroscopic velocity is `g(x) V/3`.
    Smooth { vmax: f64, k: f64, beta: f64 },
    /// Arbitrary `E`; `calE` by composite Gauss-Legendre from 0.
    Custom { name: String, e: EquilibriumFn },
}

impl fmt::Debug for EquilibriumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwoSpeedChemo { k } => write!(f, "TwoSpeedChemo {{ k: {k} }}"),
            Self::Smooth { vmax, k, beta } => write!(f, "Smooth {{ vmax: {vmax}, k: {k}, beta: {beta} }}"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl EquilibriumModel {
    pub fn e(&self, v: f64, x: f64) -> f64 {
        match self {
            Self::TwoSpeedChemo { k } => 0.5 + 2.0 / PI * (k * v * x).atan(),
            Self::Smooth { vmax, k, beta } => {
                let s = v / vmax;
                (1.0 + beta * (s.cosh() - 1f64.sinh()) + (k * x).atan() / PI * s) / (2.0 * vmax)
            }
            Self::Custom { e, .. } => e(v, x),
        }
    }

    pub fn cal_e(&self, v: f64, x: f64) -> f64 {
        match self {
            Self::TwoSpeedChemo { k } => {
                let kv = k * v;
                if kv == 0.0 {
                    return 0.5 * x;
                }
                let y = kv * x;
                0.5 * x + 2.0 / PI * (x * y.atan() - y.mul_add(y, 1.0).ln() / (2.0 * kv))
            }
            Self::Smooth { vmax, k, beta } => {
                let s = v / vmax;
                let g = if *k == 0.0 {
                    0.0
                } else {
                    let y = k * x;
                    (x * y.atan() - y.mul_add(y, 1.0).ln() / (2.0 * k)) / PI
                };
                ((1.0 + beta * (s.cosh() - 1f64.sinh())) * x + g * s) / (2.0 * vmax)
            }
            Self::Custom { e, .. } => {
                let pieces = 16;
                let h = x / pieces as f64;
                (0..pieces).map(|p| gauss_legendre5(|y| e(v, y), p as f64 * h, (p + 1) as f64 * h)).sum()
            }
        }
    }

    /// Macroscopic velocity `a(x) = int v E(v, x) dv` of the continuous model.
    pub fn limit_velocity(&self, x: f64, vgrid: &VelocityGrid) -> f64 {
        match self {
            Self::TwoSpeedChemo { .. } => {
                let v = vgrid.vmax();
                v * (self.e(v, x) - self.e(-v, x))
            }
            Self::Smooth { vmax, k, .. } => (k * x).atan() / PI * vmax / 3.0,
            Self::Custom { .. } => {
                let vals: Vec<f64> = vgrid.velocities().iter().map(|&v| self.e(v, x)).collect();
                vgrid.first_moment(&vals)
            }
        }
    }
}

/// Discrete equilibrium from the half-face slopes around a node: the chord
/// of `calE(v, .)` over `[u_left, u_right]`, 0 for equal slopes.
pub fn equilibrium_e_discrete(model: &EquilibriumModel, v: f64, u_left: f64, u_right: f64) -> f64 {
    if u_left == u_right {
        return 0.0;
    }
    chord_slope(|x| model.cal_e(v, x), |x| model.e(v, x), u_left, u_right)
}

/// Scales a row to unit trapezoid integral; an all-zero row becomes the
/// uniform profile `1/(N_v dv)` (one half per speed for two speeds).
pub fn normalize_rows(row: &[f64], vgrid: &VelocityGrid) -> Result<Vec<f64>> {
    let total = crate::grid::trapezoid(row, vgrid)?;
    if total != 0.0 {
        return Ok(row.iter().map(|e| e / total).collect());
    }
    let fill = match vgrid.dv() {
        Some(dv) => 1.0 / ((vgrid.len() - 1) as f64 * dv),
        None => 0.5,
    };
    Ok(vec![fill; row.len()])
}

/// Distribution on the space x velocity grid, `f[i * nvel + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub t: f64,
    pub eps: f64,
    pub f: Vec<f64>,
    pub rho: Vec<f64>,
    pub field: PotentialField,
}

impl KineticState {
    pub fn f_at(&self, i: usize, j: usize, nvel: usize) -> f64 {
        self.f[i * nvel + j]
    }

    /// Rows `f[i][.]`.
    pub fn rows(&self, nvel: usize) -> Vec<Vec<f64>> {
        self.f.chunks(nvel).map(<[f64]>::to_vec).collect()
    }
}

/// Splitting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// The kinetic scheme bound to its grids, model and relaxation time.
#[derive(Debug, Clone)]
pub struct KineticScheme {
    pub vgrid: VelocityGrid,
    pub model: EquilibriumModel,
    pub solver: FieldSolver,
    pub eps: f64,
    pub mode: VelocityMode,
    pub splitting: Splitting,
}

impl KineticScheme {
    pub fn new(
        vgrid: VelocityGrid,
        model: EquilibriumModel,
        solver: FieldSolver,
        eps: f64,
        mode: VelocityMode,
        splitting: Splitting,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps must be > 0, got {eps}")));
        }
        Ok(Self { vgrid, model, solver, eps, mode, splitting })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.solver.grid
    }

    /// `0.95 dx / V_M`.
    pub fn stable_dt(&self) -> f64 {
        kinetic_dt(self.grid().dx, self.vgrid.vmax())
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        let grid = self.grid().with_dt(dt)?;
        Ok(Self { solver: self.solver.regrid(grid)?, ..self.clone() })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.vgrid, self.model.clone(), self.solver.clone(), eps, self.mode, self.splitting)
    }

    fn nvel(&self) -> usize {
        self.vgrid.len()
    }

    /// Normalized equilibrium rows `e_ij` for the given field.
    pub fn equilibrium_rows(&self, field: &PotentialField) -> Vec<f64> {
        let n = self.grid().len();
        let vel = self.vgrid.velocities();
        let mut out = Vec::with_capacity(n * vel.len());
        let mut row = vec![0.0; vel.len()];
        for i in 0..n {
            let (ul, ur) = (field.half[i], field.half[i + 1]);
            let mut clamped = None;
            for (j, &v) in vel.iter().enumerate() {
                let e = match self.mode {
                    VelocityMode::Naive => self.model.e(v, field.centered[i]),
                    VelocityMode::VolpertSmooth if ul == ur => self.model.e(v, ul),
                    _ => equilibrium_e_discrete(&self.model, v, ul, ur),
                };
                row[j] = if e < 0.0 {
                    clamped = Some(ul.min(ur));
                    0.0
                } else {
                    e
                };
            }
            if let Some(u) = clamped {
                if !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
                    warn!("negative equilibrium clamped to 0 near slope {u:.6} (node {i}); rows are renormalized");
                }
            }
            let total = self.vgrid.integrate(&row);
            if total != 0.0 {
                out.extend(row.iter().map(|e| e / total));
            } else {
                let fill = match self.vgrid.dv() {
                    Some(dv) => 1.0 / ((vel.len() - 1) as f64 * dv),
                    None => 0.5,
                };
                out.extend(std::iter::repeat_n(fill, vel.len()));
            }
        }
        out
    }

    /// Local equilibrium `Pi_ij = e_ij rho_i` as an initial state.
    pub fn equilibrium_state(&self, t: f64, rho: Vec<f64>) -> Result<KineticState> {
        self.grid().check_len("rho", rho.len())?;
        let field = self.solver.solve(&rho)?;
        let e = self.equilibrium_rows(&field);
        let nvel = self.nvel();
        let f = e.iter().enumerate().map(|(k, e)| e * rho[k / nvel]).collect::<Vec<f64>>();
        let rho = densities(&f, &self.vgrid);
        Ok(KineticState { t, eps: self.eps, f, rho, field })
    }

    /// Isotropic start `f_ij = rho_i / I(1)`.
    pub fn isotropic_state(&self, t: f64, rho: Vec<f64>) -> Result<KineticState> {
        self.grid().check_len("rho", rho.len())?;
        let field = self.solver.solve(&rho)?;
        let nvel = self.nvel();
        let measure = self.vgrid.integrate(&vec![1.0; nvel]);
        let f = (0..rho.len() * nvel).map(|k| rho[k / nvel] / measure).collect::<Vec<f64>>();
        let rho = densities(&f, &self.vgrid);
        Ok(KineticState { t, eps: self.eps, f, rho, field })
    }

    /// `f <- exp(-dt/eps) f + (1 - exp(-dt/eps)) Pi`; `rho` and the field
    /// are untouched.
    pub fn relax_step(&self, state: &KineticState, dt: f64) -> KineticState {
        let nvel = self.nvel();
        let e = self.equilibrium_rows(&state.field);
        let keep = (-dt / state.eps).exp();
        let give = -(-dt / state.eps).exp_m1();
        let f =
            state.f.iter().zip(&e).enumerate().map(|(k, (f, e))| keep * f + give * e * state.rho[k / nvel]).collect();
        KineticState { f, ..state.clone() }
    }

    /// Lax-Friedrichs transport with zero ghosts; recomputes `rho` but not
    /// the field.
    pub fn transport_step(&self, state: &KineticState, dt: f64) -> Result<KineticState> {
        let grid = self.grid();
        let lambda = dt / grid.dx;
        let vm = self.vgrid.vmax();
        if lambda * vm > 1.0 + 1e-12 {
            return Err(Error::Cfl { lambda, limit: 1.0 / vm });
        }
        let nvel = self.nvel();
        let n = grid.len();
        let vel = self.vgrid.velocities();
        let mut f = vec![0.0; state.f.len()];
        let d = 0.5 * lambda * vm;
        for i in 0..n {
            for (j, &v) in vel.iter().enumerate() {
                let c = state.f[i * nvel + j];
                let l = if i > 0 { state.f[(i - 1) * nvel + j] } else { 0.0 };
                let r = if i + 1 < n { state.f[(i + 1) * nvel + j] } else { 0.0 };
                f[i * nvel + j] = c - 0.5 * lambda * v * (r - l) + d * (r - 2.0 * c + l);
            }
        }
        let rho = densities(&f, &self.vgrid);
        Ok(KineticState { f, rho, ..state.clone() })
    }

    fn refresh(&self, mut state: KineticState) -> Result<KineticState> {
        state.field = self.solver.solve(&state.rho)?;
        Ok(state)
    }

    /// Relax, transport, recompute the field.
    pub fn ap_step_lie(&self, state: &KineticState, dt: f64) -> Result<KineticState> {
        let half = self.relax_step(state, dt);
        let mut next = self.refresh(self.transport_step(&half, dt)?)?;
        next.t = state.t + dt;
        Ok(next)
    }

    /// Relax `dt/2`, transport, recompute the field, relax `dt/2`.
    pub fn ap_step_strang(&self, state: &KineticState, dt: f64) -> Result<KineticState> {
        let a = self.relax_step(state, 0.5 * dt);
        let b = self.refresh(self.transport_step(&a, dt)?)?;
        let mut next = self.relax_step(&b, 0.5 * dt);
        next.t = state.t + dt;
        Ok(next)
    }

    pub fn step_dt(&self, state: &KineticState, dt: f64) -> Result<KineticState> {
        let next = match self.splitting {
            Splitting::Lie => self.ap_step_lie(state, dt)?,
            Splitting::Strang => self.ap_step_strang(state, dt)?,
        };
        check_positive(&next.f, next.t)?;
        Ok(next)
    }

    pub fn step(&self, state: &KineticState) -> Result<KineticState> {
        self.step_dt(state, self.grid().dt)
    }

    /// `(rho_i, J_i, q_i)` by the velocity quadrature.
    pub fn moments(&self, state: &KineticState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let nvel = self.nvel();
        let vel = self.vgrid.velocities();
        let mut rho = Vec::new();
        let mut j = Vec::new();
        let mut q = Vec::new();
        for row in state.f.chunks(nvel) {
            rho.push(self.vgrid.integrate(row));
            j.push(self.vgrid.first_moment(row));
            let v2: Vec<f64> = row.iter().zip(&vel).map(|(f, v)| f * v * v).collect();
            q.push(self.vgrid.integrate(&v2));
        }
        (rho, j, q)
    }

    /// `a_hat_i = I(v_j e_ij)`, the velocity of the limit scheme.
    pub fn ap_velocity(&self, field: &PotentialField) -> Vec<f64> {
        let nvel = self.nvel();
        self.equilibrium_rows(field).chunks(nvel).map(|row| self.vgrid.first_moment(row)).collect()
    }

    /// `a_hat_i` from the quadrature of `v calE`:
    /// `(A(u_r) - A(u_l)) / ((u_r - u_l) I(E_row))`, `A(x) = I(v calE(v, x))`;
    /// 0 at equal slopes or vanishing rows. Agrees with
    /// [`ap_velocity`](Self::ap_velocity) wherever no clamping occurs.
    pub fn ap_velocity_from_potential(&self, field: &PotentialField) -> Vec<f64> {
        let vel = self.vgrid.velocities();
        let big_a = |x: f64| {
            let vals: Vec<f64> = vel.iter().map(|&v| v * self.model.cal_e(v, x)).collect();
            self.vgrid.integrate(&vals)
        };
        (0..self.grid().len())
            .map(|i| {
                let (ul, ur) = (field.half[i], field.half[i + 1]);
                if ul == ur {
                    return 0.0;
                }
                let row: Vec<f64> = vel.iter().map(|&v| equilibrium_e_discrete(&self.model, v, ul, ur)).collect();
                let total = self.vgrid.integrate(&row);
                if total == 0.0 {
                    return 0.0;
                }
                (big_a(ur) - big_a(ul)) / ((ur - ul) * total)
            })
            .collect()
    }

    /// One step of the `eps -> 0` limit of the scheme at fixed mesh:
    /// `rho_i + (l V_M/2) D^2 rho_i - (l/2)(a_{i+1} rho_{i+1} - a_{i-1} rho_{i-1})`.
    pub fn limit_step(&self, rho: &[f64], field: &PotentialField, dt: f64) -> Vec<f64> {
        let lambda = dt / self.grid().dx;
        let vm = self.vgrid.vmax();
        let a = self.ap_velocity(field);
        limit_update(rho, &a, lambda, vm)
    }

    /// Density-only run of the limit scheme (the macroscopic comparator).
    pub fn run_limit(&self, rho0: Vec<f64>, steps: usize) -> Result<Vec<Vec<f64>>> {
        let dt = self.grid().dt;
        let mut rho = rho0;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(rho.clone());
        for _ in 0..steps {
            let field = self.solver.solve(&rho)?;
            rho = self.limit_step(&rho, &field, dt);
            out.push(rho.clone());
        }
        Ok(out)
    }
}

/// Nodal limit update with zero ghosts.
pub fn limit_update(rho: &[f64], a_hat: &[f64], lambda: f64, vmax: f64) -> Vec<f64> {
    let n = rho.len();
    let at = |k: isize| if k < 0 || k as usize >= n { 0.0 } else { rho[k as usize] };
    let av = |k: isize| if k < 0 || k as usize >= n { 0.0 } else { a_hat[k as usize] };
    (0..n as isize)
        .map(|i| {
            at(i) + 0.5 * lambda * vmax * (at(i + 1) - 2.0 * at(i) + at(i - 1))
                - 0.5 * lambda * (av(i + 1) * at(i + 1) - av(i - 1) * at(i - 1))
        })
        .collect()
}

/// `0.95 dx / V_M`.
pub fn kinetic_dt(dx: f64, vmax: f64) -> f64 {
    0.95 * dx / vmax
}

fn densities(f: &[f64], vgrid: &VelocityGrid) -> Vec<f64> {
    f.chunks(vgrid.len()).map(|row| vgrid.integrate(row)).collect()
}

/// Runs the kinetic scheme from the isotropic state to `control.horizon`.
pub fn run_kinetic(scheme: &KineticScheme, rho0: Vec<f64>, control: &RunControl, dump_f: bool) -> Result<Trajectory> {
    let dt = scheme.grid().dt;
    let nvel = scheme.vgrid.len();
    let mut state = scheme.isotropic_state(0.0, rho0)?;
    let snap = |s: &KineticState| Snapshot { t: s.t, rho: s.rho.clone(), f: dump_f.then(|| s.rows(nvel)) };
    let mut traj = Trajectory::default();
    traj.snapshots.push(snap(&state));
    traj.reports.push(kinetic_report(&state, scheme));
    let (full, rest) = step_plan(control.horizon, dt);
    let total = full + usize::from(rest > 0.0);
    let mut clock = SnapshotClock::new(control.snapshot_every);
    for n in 0..total {
        let h = if n < full { dt } else { rest };
        let mut next = scheme.step_dt(&state, h)?;
        next.t = if n + 1 == total { control.horizon } else { (n + 1) as f64 * dt };
        state = next;
        let rep = kinetic_report(&state, scheme);
        let prev = &traj.reports[traj.reports.len() - 1];
        if let Some(what) = rep.violation(prev, scheme.vgrid.vmax(), false) {
            if !control.keep_going {
                return Err(Error::Invariant { t: state.t, what: format!("{what}; report: {rep}") });
            }
            traj.failures.push(format!("t = {}: {what}", state.t));
        }
        traj.reports.push(rep);
        traj.steps += 1;
        if clock.due(state.t) || n + 1 == total {
            traj.snapshots.push(snap(&state));
        }
    }
    Ok(traj)
}

/// Mass of a kinetic state.
pub fn kinetic_mass(state: &KineticState, grid: &Grid1D) -> f64 {
    total_mass(&state.rho, grid.dx)
}
