//! Velocity laws `a` with their antiderivatives `A` (`A(0) = 0`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::grid::{chord_slope, gauss_legendre5};

/// User-supplied scalar function.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Lookup table for the antiderivative of a user-supplied `a`.
///
/// `A` is tabulated on a uniform grid symmetric about 0 by cumulative
/// Gauss-Legendre integration; between nodes the remainder is integrated
/// directly, so `A` is exact up to quadrature error everywhere.
struct AntiderivativeTable {
    a: ScalarFn,
    half_width: f64,
    h: f64,
    /// Values at `-half_width + k*h`.
    values: Vec<f64>,
}

const TABLE_INTERVALS: usize = 16_384;

impl AntiderivativeTable {
    fn new(a: ScalarFn, half_width: f64) -> Self {
        let n = TABLE_INTERVALS;
        let h = 2.0 * half_width / n as f64;
        let mid = n / 2;
        let mut values = vec![0.0; n + 1];
        for k in mid..n {
            let (l, r) = (-half_width + k as f64 * h, -half_width + (k + 1) as f64 * h);
            values[k + 1] = values[k] + gauss_legendre5(&*a, l, r);
        }
        for k in (0..mid).rev() {
            let (l, r) = (-half_width + k as f64 * h, -half_width + (k + 1) as f64 * h);
            values[k] = values[k + 1] - gauss_legendre5(&*a, l, r);
        }
        Self { a, half_width, h, values }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = TABLE_INTERVALS;
        let pos = (x + self.half_width) / self.h;
        let k = pos.round().clamp(0.0, n as f64) as usize;
        let node = -self.half_width + k as f64 * self.h;
        let gap = x - node;
        if gap.abs() <= self.h {
            self.values[k] + gauss_legendre5(&*self.a, node, x)
        } else {
            // Outside the table: composite rule from the end node.
            let pieces = (gap.abs() / self.h).ceil() as usize;
            let step = gap / pieces as f64;
            let mut acc = self.values[k];
            for p in 0..pieces {
                let l = node + p as f64 * step;
                acc += gauss_legendre5(&*self.a, l, l + step);
            }
            acc
        }
    }
}

#[derive(Clone)]
enum Kind {
    Zero,
    Identity,
    /// `sign * (2/pi) atan(k x)`.
    Arctan {
        k: f64,
        sign: f64,
    },
    Custom(Arc<AntiderivativeTable>),
}

/// A velocity law `a` together with its antiderivative, Lipschitz bound and
/// monotonicity flag.
#[derive(Clone)]
pub struct VelocityLaw {
    kind: Kind,
    name: String,
    /// Lipschitz bound on `a`.
    pub alpha: f64,
    /// `a` nondecreasing (the attractive case).
    pub attractive: bool,
}

impl fmt::Debug for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityLaw")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("attractive", &self.attractive)
            .finish()
    }
}

impl VelocityLaw {
    /// `a = 0`.
    pub fn zero() -> Self {
        Self { kind: Kind::Zero, name: "zero".into(), alpha: 0.0, attractive: true }
    }

    /// `a(x) = x`, `A(x) = x^2/2`.
    pub fn identity() -> Self {
        Self { kind: Kind::Identity, name: "identity".into(), alpha: 1.0, attractive: true }
    }

    /// `a(x) = (2/pi) atan(k x)`.
    pub fn arctan(k: f64) -> Self {
        Self {
            kind: Kind::Arctan { k, sign: 1.0 },
            name: format!("arctan(k={k})"),
            alpha: 2.0 * k.abs() / PI,
            attractive: k >= 0.0,
        }
    }

    /// `a(x) = -(2/pi) atan(k x)`: non-increasing, no convergence theory.
    pub fn repulsive_arctan(k: f64) -> Self {
        Self {
            kind: Kind::Arctan { k, sign: -1.0 },
            name: format!("repulsive_arctan(k={k})"),
            alpha: 2.0 * k.abs() / PI,
            attractive: k <= 0.0,
        }
    }

    /// Arbitrary continuous `a`. `A` is tabulated on `[-half_width, half_width]`
    /// (which should cover the slope bound `M(1 + w0)`); `alpha` and
    /// monotonicity are estimated by sampling that interval.
    pub fn custom(name: &str, a: ScalarFn, half_width: f64) -> Self {
        let samples = 8192;
        let h = 2.0 * half_width / samples as f64;
        let mut alpha: f64 = 0.0;
        let mut attractive = true;
        let mut prev = a(-half_width);
        for s in 1..=samples {
            let cur = a(-half_width + s as f64 * h);
            let slope = (cur - prev) / h;
            alpha = alpha.max(slope.abs());
            if cur < prev - 1e-14 * prev.abs().max(1.0) {
                attractive = false;
            }
            prev = cur;
        }
        let table = AntiderivativeTable::new(a, half_width);
        Self { kind: Kind::Custom(Arc::new(table)), name: name.into(), alpha, attractive }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `a(x)`.
    pub fn a(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Identity => x,
            Kind::Arctan { k, sign } => sign * 2.0 / PI * (k * x).atan(),
            Kind::Custom(t) => (t.a)(x),
        }
    }

    /// `A(x)`, the antiderivative with `A(0) = 0`.
    pub fn big_a(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Identity => 0.5 * x * x,
            Kind::Arctan { k, sign } => {
                if *k == 0.0 {
                    return 0.0;
                }
                let kx = k * x;
                sign * 2.0 / (PI * k) * (kx * kx.atan() - 0.5 * kx.mul_add(kx, 1.0).ln())
            }
            Kind::Custom(t) => t.eval(x),
        }
    }

    /// `(A(u2) - A(u1)) / (u2 - u1)`, accurate also for nearly equal
    /// arguments; `a(u1)` when they are equal.
    pub fn chord(&self, u1: f64, u2: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Identity => 0.5 * (u1 + u2),
            _ => chord_slope(|x| self.big_a(x), |x| self.a(x), u1, u2),
        }
    }
}

/// `c = max |a|` over `[-M(1+w0), M(1+w0)]`, by sampling 4096 points plus
/// the endpoints, inflated by `1 + 1e-9`.
pub fn sup_velocity_bound(law: &VelocityLaw, mass: f64, w0: f64) -> f64 {
    let r = mass * (1.0 + w0);
    if r == 0.0 {
        return law.a(0.0).abs() * (1.0 + 1e-9);
    }
    let n = 4096;
    let mut c = law.a(-r).abs().max(law.a(r).abs());
    for s in 0..n {
        let x = -r + 2.0 * r * (s as f64 + 0.5) / n as f64;
        c = c.max(law.a(x).abs());
    }
    c * (1.0 + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint_mean(law: &VelocityLaw, u1: f64, u2: f64, n: usize) -> f64 {
        let h = (u2 - u1) / n as f64;
        (0..n).map(|s| law.a(u1 + (s as f64 + 0.5) * h)).sum::<f64>() / n as f64
    }

    #[test]
    fn antiderivatives_vanish_at_zero_and_differentiate_to_a() {
        let custom = VelocityLaw::custom("sinh", Arc::new(|x: f64| x.sinh()), 3.0);
        for law in [
            VelocityLaw::identity(),
            VelocityLaw::arctan(10.0),
            VelocityLaw::repulsive_arctan(50.0),
            VelocityLaw::zero(),
            custom,
        ] {
            assert_eq!(law.big_a(0.0), 0.0, "{}", law.name());
            for &x in &[-1.3, -0.2, 0.05, 0.7, 2.0] {
                let h = 1e-5;
                let d = (law.big_a(x + h) - law.big_a(x - h)) / (2.0 * h);
                assert!((d - law.a(x)).abs() <= 1e-6 * law.a(x).abs().max(1.0), "{} at {x}", law.name());
            }
        }
    }

    #[test]
    fn sup_bound_examples() {
        let c = sup_velocity_bound(&VelocityLaw::identity(), 1.0, 0.0);
        assert!((c - 1.0).abs() < 1e-8);
        let c = sup_velocity_bound(&VelocityLaw::arctan(10.0), 1.0, 1.0);
        let want = 2.0 / PI * 20f64.atan();
        assert!(c >= want && c <= want * (1.0 + 2e-9));
        assert_eq!(sup_velocity_bound(&VelocityLaw::zero(), 1.0, 1.0), 0.0);
    }

    #[test]
    fn chord_matches_midpoint_average() {
        let law = VelocityLaw::arctan(10.0);
        let direct = (law.big_a(0.3) - law.big_a(-0.2)) / 0.5;
        assert!((law.chord(-0.2, 0.3) - direct).abs() < 1e-14);
        assert!((direct - midpoint_mean(&law, -0.2, 0.3, 10_000)).abs() < 1e-7);
        assert_eq!(VelocityLaw::identity().chord(1.0, 3.0), 2.0);
    }

    #[test]
    fn custom_table_matches_closed_form() {
        let exact = VelocityLaw::arctan(10.0);
        let custom = VelocityLaw::custom("atan10", Arc::new(|x: f64| 2.0 / PI * (10.0 * x).atan()), 2.0);
        assert!((custom.alpha - exact.alpha).abs() < 1e-3 * exact.alpha);
        assert!(custom.attractive);
        for &x in &[-1.9, -0.33, 0.0, 1e-7, 0.41, 1.99, 2.5] {
            assert!((custom.big_a(x) - exact.big_a(x)).abs() < 1e-12, "x = {x}");
        }
        let rep = VelocityLaw::custom("rep", Arc::new(|x: f64| -x), 1.0);
        assert!(!rep.attractive);
    }
}
