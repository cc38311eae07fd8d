//! Space, time and velocity grids, the velocity-space trapezoid rule,
//! cumulative masses and the 1-D Wasserstein distance used by diagnostics.
//!
//! Space nodes are `x_i = x0 + i*dx` for `i = 0..=nx`; every nodal array in
//! the crate has length `nx + 1`. Nodes `0` and `nx` carry zero density.

use crate::error::{Error, Result};

/// Uniform space grid together with the time step of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub dt: f64,
    /// `dt / dx`, cached.
    pub lambda: f64,
}

impl Grid1D {
    /// Grid covering `[left, right]` with `nx` intervals.
    pub fn new(left: f64, right: f64, nx: usize, dt: f64) -> Result<Self> {
        if nx < 3 {
            return Err(Error::Contract(format!("nx must be >= 3, got {nx}")));
        }
        if !(right > left) {
            return Err(Error::Contract(format!("empty domain [{left}, {right}]")));
        }
        let dx = (right - left) / nx as f64;
        Self::from_spacing(left, dx, nx, dt)
    }

    pub fn from_spacing(x0: f64, dx: f64, nx: usize, dt: f64) -> Result<Self> {
        if nx < 3 {
            return Err(Error::Contract(format!("nx must be >= 3, got {nx}")));
        }
        if !(dx > 0.0) || !(dt > 0.0) {
            return Err(Error::Contract(format!("need dx > 0 and dt > 0, got dx = {dx}, dt = {dt}")));
        }
        Ok(Self { x0, dx, nx, dt, lambda: dt / dx })
    }

    /// Same space grid, new time step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::from_spacing(self.x0, self.dx, self.nx, dt)
    }

    /// Number of nodes (`nx + 1`).
    pub fn len(&self) -> usize {
        self.nx + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn right(&self) -> f64 {
        self.x(self.nx)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest_node(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx).round();
        k.clamp(0.0, self.nx as f64) as usize
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Contract(format!("{what} has length {len}, expected {}", self.len())));
        }
        Ok(())
    }
}

/// Discrete velocity set of a kinetic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityGrid {
    /// `v_j = -vmax + j*dv`, `j = 0..=nv`, `dv = 2*vmax/nv`.
    Continuous { vmax: f64, nv: usize },
    /// The two velocities `-speed` and `+speed` (in that order).
    TwoSpeed { speed: f64 },
}

impl VelocityGrid {
    pub fn continuous(vmax: f64, nv: usize) -> Result<Self> {
        if !(vmax > 0.0) || nv < 1 {
            return Err(Error::Contract(format!("need vmax > 0 and nv >= 1, got {vmax}, {nv}")));
        }
        Ok(Self::Continuous { vmax, nv })
    }

    pub fn two_speed(speed: f64) -> Result<Self> {
        if !(speed > 0.0) {
            return Err(Error::Contract(format!("two-speed model needs speed > 0, got {speed}")));
        }
        Ok(Self::TwoSpeed { speed })
    }

    /// Number of velocity nodes.
    pub fn len(&self) -> usize {
        match *self {
            Self::Continuous { nv, .. } => nv + 1,
            Self::TwoSpeed { .. } => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest speed `V_M`.
    pub fn vmax(&self) -> f64 {
        match *self {
            Self::Continuous { vmax, .. } => vmax,
            Self::TwoSpeed { speed } => speed,
        }
    }

    /// Spacing `dv`; `None` for the two-speed set.
    pub fn dv(&self) -> Option<f64> {
        match *self {
            Self::Continuous { vmax, nv } => Some(2.0 * vmax / nv as f64),
            Self::TwoSpeed { .. } => None,
        }
    }

    pub fn velocity(&self, j: usize) -> f64 {
        match *self {
            Self::Continuous { vmax, nv } => -vmax + j as f64 * (2.0 * vmax / nv as f64),
            Self::TwoSpeed { speed } => {
                if j == 0 {
                    -speed
                } else {
                    speed
                }
            }
        }
    }

    pub fn velocities(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.velocity(j)).collect()
    }

    /// Trapezoid rule on nodal values, without the length check.
    pub(crate) fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        match *self {
            Self::Continuous { .. } => {
                let dv = self.dv().unwrap_or_default();
                let n = values.len() - 1;
                let interior: f64 = values[1..n].iter().sum();
                0.5 * dv * (values[0] + values[n]) + dv * interior
            }
            Self::TwoSpeed { .. } => values[0] + values[1],
        }
    }

    /// Trapezoid rule of `v_j * values_j`.
    pub(crate) fn first_moment(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        match *self {
            Self::Continuous { .. } => {
                let dv = self.dv().unwrap_or_default();
                let n = values.len() - 1;
                let interior: f64 = (1..n).map(|j| self.velocity(j) * values[j]).sum();
                0.5 * dv * (self.velocity(0) * values[0] + self.velocity(n) * values[n]) + dv * interior
            }
            Self::TwoSpeed { speed } => speed * (values[1] - values[0]),
        }
    }
}

/// Trapezoid rule over the velocity grid.
///
/// The two-speed set has no quadrature: the result is the plain sum
/// `F(-v) + F(+v)`.
pub fn trapezoid(values: &[f64], grid: &VelocityGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::Contract(format!("trapezoid: {} values for {} velocity nodes", values.len(), grid.len())));
    }
    Ok(grid.integrate(values))
}

/// `M_i = dx * sum_{k <= i} rho_k`.
pub fn cumulative_mass(rho: &[f64], grid: &Grid1D) -> Vec<f64> {
    let mut acc = 0.0;
    rho.iter()
        .map(|&r| {
            acc += r;
            grid.dx * acc
        })
        .collect()
}

/// Total mass `dx * sum rho`.
pub fn total_mass(rho: &[f64], dx: f64) -> f64 {
    dx * rho.iter().sum::<f64>()
}

/// W1 distance between two nodal densities on the same grid: the L1 distance
/// of their cumulative masses.
pub fn wasserstein1(rho1: &[f64], rho2: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check_len("rho1", rho1.len())?;
    grid.check_len("rho2", rho2.len())?;
    let m1 = cumulative_mass(rho1, grid);
    let m2 = cumulative_mass(rho2, grid);
    let (a, b) = (m1[grid.nx], m2[grid.nx]);
    check_masses(a, b)?;
    Ok(grid.dx * m1.iter().zip(&m2).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

/// W1 distance between densities living on two different grids, each node
/// carrying a point mass `dx * rho_i` at `x_i`.
pub fn wasserstein1_between(grid_a: &Grid1D, rho_a: &[f64], grid_b: &Grid1D, rho_b: &[f64]) -> Result<f64> {
    grid_a.check_len("rho_a", rho_a.len())?;
    grid_b.check_len("rho_b", rho_b.len())?;
    let (ma, mb) = (total_mass(rho_a, grid_a.dx), total_mass(rho_b, grid_b.dx));
    check_masses(ma, mb)?;
    // Merge the two sorted atom lists and integrate |F_a - F_b| between atoms.
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0_f64, 0.0_f64);
    let mut prev: Option<f64> = None;
    let mut dist = 0.0;
    while i < rho_a.len() || j < rho_b.len() {
        let xa = if i < rho_a.len() { grid_a.x(i) } else { f64::INFINITY };
        let xb = if j < rho_b.len() { grid_b.x(j) } else { f64::INFINITY };
        let x = xa.min(xb);
        if let Some(p) = prev {
            dist += (fa - fb).abs() * (x - p);
        }
        if xa <= x {
            fa += grid_a.dx * rho_a[i];
            i += 1;
        }
        if xb <= x {
            fb += grid_b.dx * rho_b[j];
            j += 1;
        }
        prev = Some(x);
    }
    Ok(dist)
}

fn check_masses(a: f64, b: f64) -> Result<()> {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() > 1e-10 * scale {
        return Err(Error::MassMismatch(a, b));
    }
    Ok(())
}

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub(crate) fn gauss_legendre5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] =
        [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * NODES.iter().zip(WEIGHTS.iter()).map(|(t, w)| w * f(mid + half * t)).sum::<f64>()
}

/// Mean of `f` over the segment between `a` and `b` by three-point
/// Gauss-Legendre; used when a difference quotient would cancel.
pub(crate) fn segment_mean3(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const T: f64 = 0.774_596_669_241_483_4;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (5.0 * f(mid - half * T) + 8.0 * f(mid) + 5.0 * f(mid + half * T)) / 18.0
}

/// Difference quotient `(F(u2) - F(u1)) / (u2 - u1)` of an antiderivative
/// `F` of `f`. Nearly equal arguments fall back to averaging `f` so the
/// result stays accurate to roundoff. Equal arguments return `f(u1)`.
pub(crate) fn chord_slope(
    antiderivative: impl Fn(f64) -> f64,
    derivative: impl Fn(f64) -> f64,
    u1: f64,
    u2: f64,
) -> f64 {
    let gap = u2 - u1;
    if gap == 0.0 {
        return derivative(u1);
    }
    let scale = 1.0f64.max(u1.abs()).max(u2.abs());
    if gap.abs() <= 1e-5 * scale {
        segment_mean3(derivative, u1, u2)
    } else {
        (antiderivative(u2) - antiderivative(u1)) / gap
    }
}
