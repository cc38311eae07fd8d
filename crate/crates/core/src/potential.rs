//! Pointy potentials `W'' = -delta_0 + w`, the convolution `nu = w * rho` and
//! the discrete elliptic problem for `S`.
//!
//! Half-face slopes are stored with an offset: `half[k]` is
//! `dxS_{k-1/2} = (S_k - S_{k-1})/dx` for `k = 0..=nx+1`, so both ghost faces
//! (`-1/2` and `nx+1/2`) are present. The centred slope at node `i` is the
//! mean of its two faces, i.e. `(S_{i+1} - S_{i-1})/(2 dx)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre5, total_mass, Grid1D};
use crate::law::ScalarFn;

#[derive(Clone)]
pub enum WKind {
    /// `w = 0`, i.e. `W = -|x|/2`.
    Zero,
    /// `w(z) = exp(-|z|)/2`, so that `W = w`.
    ExpHalf,
    /// Any continuous bounded `w`.
    Custom(ScalarFn),
}

impl fmt::Debug for WKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::ExpHalf => write!(f, "ExpHalf"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// The pair `(w, w0)`, `w0 = ||w||_1`.
#[derive(Debug, Clone)]
pub struct PointyPotential {
    pub w_kind: WKind,
    pub w0: f64,
    /// For `ExpHalf`: take `nu = S` from the screened equation
    /// `-S'' + S = rho` instead of convolving.
    pub screened: bool,
}

impl PointyPotential {
    pub fn zero() -> Self {
        Self { w_kind: WKind::Zero, w0: 0.0, screened: false }
    }

    /// `w = W = exp(-|x|)/2`, solved through the screened equation.
    pub fn exp_half() -> Self {
        Self { w_kind: WKind::ExpHalf, w0: 1.0, screened: true }
    }

    /// `w = exp(-|x|)/2` applied as an explicit convolution.
    pub fn exp_half_convolved() -> Self {
        Self { w_kind: WKind::ExpHalf, w0: 1.0, screened: false }
    }

    /// Custom `w`; `w0` is estimated by integrating `|w|` over
    /// `[-half_width, half_width]`.
    pub fn custom(w: ScalarFn, half_width: f64) -> Self {
        let pieces = 4096;
        let h = 2.0 * half_width / pieces as f64;
        let w0 = (0..pieces)
            .map(|p| {
                let l = -half_width + p as f64 * h;
                gauss_legendre5(|z| w(z).abs(), l, l + h)
            })
            .sum();
        Self { w_kind: WKind::Custom(w), w0, screened: false }
    }

    /// `w(z)`.
    pub fn w(&self, z: f64) -> f64 {
        match &self.w_kind {
            WKind::Zero => 0.0,
            WKind::ExpHalf => 0.5 * (-z.abs()).exp(),
            WKind::Custom(w) => w(z),
        }
    }
}

/// How the elliptic problem is closed at the ends of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Boundary data of the free-space solution: for compactly supported
    /// data the slope outside the support is `+-(1/2) dx sum(rho - nu)`, and
    /// the screened solution decays geometrically past the ends.
    #[default]
    FarField,
    /// `S_0 = S_1 = 0` marched to the right, with `dxS_{-1/2} = 0`.
    /// Unscreened problems only.
    Anchored,
}

/// Convolution weights `w_{ki} = int_{(i-1-k)dx}^{(i-k)dx} w`.
///
/// They depend on `i - k` only and are stored as the Toeplitz band
/// `band[d + nx]`, `d = i - k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    nx: usize,
    band: Vec<f64>,
}

impl Weights {
    /// `w_{ki}`.
    pub fn entry(&self, k: usize, i: usize) -> f64 {
        self.band[i + self.nx - k]
    }

    /// Dense `(nx+1) x (nx+1)` matrix, row `k`, column `i`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..=self.nx).map(|k| (0..=self.nx).map(|i| self.entry(k, i)).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.band.iter().all(|&b| b == 0.0)
    }
}

/// Builds the convolution weights for `pot` on `grid`.
pub fn build_weights(pot: &PointyPotential, grid: &Grid1D) -> Weights {
    let nx = grid.nx;
    let dx = grid.dx;
    let mut band = vec![0.0; 2 * nx + 1];
    for (slot, b) in band.iter_mut().enumerate() {
        let d = slot as f64 - nx as f64;
        let (lo, hi) = ((d - 1.0) * dx, d * dx);
        let v = match &pot.w_kind {
            WKind::Zero => 0.0,
            WKind::ExpHalf => exp_half_integral(lo, hi),
            WKind::Custom(w) => gauss_legendre5(&**w, lo, hi),
        };
        *b = if v.abs() < 1e-16 { 0.0 } else { v };
    }
    Weights { nx, band }
}

/// `int_lo^hi exp(-|z|)/2 dz` in closed form.
fn exp_half_integral(lo: f64, hi: f64) -> f64 {
    // Antiderivative: sign(z) (1 - exp(-|z|)) / 2.
    let prim = |z: f64| 0.5 * z.signum() * (-(-z.abs()).exp_m1());
    prim(hi) - prim(lo)
}

/// `nu_i = sum_k rho_k w_{ki}`.
pub fn convolve_nu(weights: &Weights, rho: &[f64]) -> Result<Vec<f64>> {
    let n = weights.nx + 1;
    if rho.len() != n {
        return Err(Error::Contract(format!("rho has length {}, weights expect {n}", rho.len())));
    }
    if weights.is_zero() {
        return Ok(vec![0.0; n]);
    }
    let support: Vec<usize> = (0..n).filter(|&k| rho[k] != 0.0).collect();
    Ok((0..n).map(|i| support.iter().map(|&k| rho[k] * weights.entry(k, i)).sum()).collect())
}

/// Potential, convolution and slopes at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub s: Vec<f64>,
    pub nu: Vec<f64>,
    /// `half[k] = dxS_{k-1/2}`, `k = 0..=nx+1`.
    pub half: Vec<f64>,
    /// `centered[i]` = centred slope at node `i`.
    pub centered: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(grid: &Grid1D) -> Self {
        let n = grid.len();
        Self { s: vec![0.0; n], nu: vec![0.0; n], half: vec![0.0; n + 1], centered: vec![0.0; n] }
    }

    /// `dxS_{i+1/2}` for `i = -1..=nx`.
    pub fn half_slope(&self, i: isize) -> f64 {
        self.half[(i + 1) as usize]
    }

    fn from_half(s: Vec<f64>, nu: Vec<f64>, half: Vec<f64>) -> Self {
        let centered = half.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        Self { s, nu, half, centered }
    }
}

/// Solves `-(S_{i+1} - 2S_i + S_{i-1})/dx^2 + nu_i = rho_i` with the given
/// closure. `S_0 = 0` fixes the additive constant.
pub fn solve_potential(rho: &[f64], nu: &[f64], grid: &Grid1D, closure: Closure) -> Result<PotentialField> {
    grid.check_len("rho", rho.len())?;
    grid.check_len("nu", nu.len())?;
    let dx = grid.dx;
    let n = grid.nx;
    let mut half = vec![0.0; n + 2];
    half[0] = match closure {
        Closure::FarField => 0.5 * dx * rho.iter().zip(nu).map(|(r, v)| r - v).sum::<f64>(),
        Closure::Anchored => 0.0,
    };
    for i in 0..=n {
        half[i + 1] = half[i] - dx * (rho[i] - nu[i]);
    }
    if closure == Closure::Anchored {
        // S_1 = S_0.
        half[1] = 0.0;
        for i in 1..=n {
            half[i + 1] = half[i] - dx * (rho[i] - nu[i]);
        }
    }
    let mut s = vec![0.0; n + 1];
    for i in 0..n {
        s[i + 1] = s[i] + dx * half[i + 1];
    }
    Ok(PotentialField::from_half(s, nu.to_vec(), half))
}

/// Solves `-(S_{i+1} - 2S_i + S_{i-1})/dx^2 + S_i = rho_i` and returns the
/// field with `nu = S`. The ends use the decaying free-space solution,
/// `S_{-1} = S_0/mu`, `S_{nx+1} = S_nx/mu`.
pub fn solve_potential_self(
    rho: &[f64],
    pot: &PointyPotential,
    grid: &Grid1D,
    closure: Closure,
) -> Result<PotentialField> {
    if !matches!(pot.w_kind, WKind::ExpHalf) {
        return Err(Error::Config("the screened solve needs w = exp(-|x|)/2".into()));
    }
    if closure != Closure::FarField {
        return Err(Error::Config("the anchored closure is unstable for the screened equation; use far_field".into()));
    }
    grid.check_len("rho", rho.len())?;
    let n = grid.nx;
    let dx2 = grid.dx * grid.dx;
    let b = 2.0 + dx2;
    let mu = 0.5 * (b + (b * b - 4.0).sqrt());
    let mut diag = vec![b; n + 1];
    diag[0] -= 1.0 / mu;
    diag[n] -= 1.0 / mu;
    let off = vec![-1.0; n];
    let rhs: Vec<f64> = rho.iter().map(|r| r * dx2).collect();
    let s = thomas(&off, &diag, &off, &rhs)?;
    let mut half = vec![0.0; n + 2];
    half[0] = (s[0] - s[0] / mu) / grid.dx;
    for i in 0..n {
        half[i + 1] = (s[i + 1] - s[i]) / grid.dx;
    }
    half[n + 1] = (s[n] / mu - s[n]) / grid.dx;
    Ok(PotentialField::from_half(s.clone(), s, half))
}

/// Centred differences `(S_{i+1} - S_{i-1})/(2dx)` at interior nodes; the
/// two end entries are 0.
pub fn dx_centered(s: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len("S", s.len())?;
    let mut out = vec![0.0; s.len()];
    for i in 1..grid.nx {
        out[i] = (s[i + 1] - s[i - 1]) / (2.0 * grid.dx);
    }
    Ok(out)
}

/// Half-face differences `(S_{i+1} - S_i)/dx`, `i = 0..nx-1`.
pub fn dx_half(s: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len("S", s.len())?;
    Ok(s.windows(2).map(|p| (p[1] - p[0]) / grid.dx).collect())
}

/// Tridiagonal solve; `sub[i]` couples row `i+1` to `i`, `sup[i]` row `i`
/// to `i+1`.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        return Err(Error::Contract("tridiagonal band lengths disagree".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    for i in 0..n {
        if i > 0 {
            piv = diag[i] - sub[i - 1] * c[i - 1];
        }
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Contract(format!("singular tridiagonal system at row {i}")));
        }
        if i + 1 < n {
            c[i] = sup[i] / piv;
        }
        d[i] = if i == 0 { rhs[0] / piv } else { (rhs[i] - sub[i - 1] * d[i - 1]) / piv };
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Field solver bound to one potential, grid and closure; caches the
/// convolution weights.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    pub potential: PointyPotential,
    pub grid: Grid1D,
    pub closure: Closure,
    weights: Option<Arc<Weights>>,
}

impl FieldSolver {
    pub fn new(potential: PointyPotential, grid: Grid1D, closure: Closure) -> Result<Self> {
        let self_mode = potential.screened && matches!(potential.w_kind, WKind::ExpHalf);
        if self_mode && closure != Closure::FarField {
            return Err(Error::Config(
                "the anchored closure is unstable for the screened equation; use far_field".into(),
            ));
        }
        let weights = match potential.w_kind {
            WKind::Zero => None,
            _ if self_mode => None,
            _ => Some(Arc::new(build_weights(&potential, &grid))),
        };
        Ok(Self { potential, grid, closure, weights })
    }

    /// Same potential and closure on another grid.
    pub fn regrid(&self, grid: Grid1D) -> Result<Self> {
        if grid.dx == self.grid.dx && grid.nx == self.grid.nx && grid.x0 == self.grid.x0 {
            return Ok(Self { grid, ..self.clone() });
        }
        Self::new(self.potential.clone(), grid, self.closure)
    }

    pub fn solve(&self, rho: &[f64]) -> Result<PotentialField> {
        match &self.weights {
            None if matches!(self.potential.w_kind, WKind::Zero) => {
                solve_potential(rho, &vec![0.0; rho.len()], &self.grid, self.closure)
            }
            None => solve_potential_self(rho, &self.potential, &self.grid, self.closure),
            Some(w) => {
                let nu = convolve_nu(w, rho)?;
                solve_potential(rho, &nu, &self.grid, self.closure)
            }
        }
    }

    /// `max |nu|` bound used by the discrete OSL check.
    pub fn w0(&self) -> f64 {
        self.potential.w0
    }
}

/// Mass held in the `cells` nodes at either end of the grid.
pub fn boundary_mass(rho: &[f64], dx: f64, cells: usize) -> f64 {
    let n = rho.len();
    let cells = cells.min(n / 2);
    total_mass(&rho[..cells], dx) + total_mass(&rho[n - cells..], dx)
}
