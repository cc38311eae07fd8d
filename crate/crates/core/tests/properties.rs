use aggrekin::grid::{total_mass, wasserstein1_between};
use aggrekin::{trapezoid, wasserstein1, Closure, FieldSolver, Grid1D, MacroScheme, PointyPotential, VelocityGrid};
use aggrekin::{VelocityLaw, VelocityMode};
use proptest::prelude::*;

fn density(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2.0, n).prop_map(|mut v| {
        let last = v.len() - 1;
        v[0] = 0.0;
        v[last] = 0.0;
        v
    })
}

fn grid(nx: usize) -> Grid1D {
    Grid1D::new(-2.5, 2.5, nx, 0.01).unwrap()
}

proptest! {
    #[test]
    fn trapezoid_is_linear(nv in 1usize..40, a in -3.0f64..3.0, b in -3.0f64..3.0,
                           f in prop::collection::vec(-1.0f64..1.0, 41), g in prop::collection::vec(-1.0f64..1.0, 41)) {
        let vg = VelocityGrid::continuous(1.0, nv).unwrap();
        let n = vg.len();
        let mix: Vec<f64> = (0..n).map(|j| a * f[j] + b * g[j]).collect();
        let lhs = trapezoid(&mix, &vg).unwrap();
        let rhs = a * trapezoid(&f[..n], &vg).unwrap() + b * trapezoid(&g[..n], &vg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_for_affine(nv in 1usize..60, vmax in 0.1f64..5.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let vg = VelocityGrid::continuous(vmax, nv).unwrap();
        let vals: Vec<f64> = vg.velocities().iter().map(|v| a + b * v).collect();
        let exact = 2.0 * vmax * a;
        prop_assert!((trapezoid(&vals, &vg).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn w1_is_a_metric(r1 in density(41), r2 in density(41), r3 in density(41)) {
        let g = grid(40);
        let scale = |r: &Vec<f64>| { let m = total_mass(r, g.dx); r.iter().map(|x| x / m).collect::<Vec<_>>() };
        prop_assume!(total_mass(&r1, g.dx) > 1e-3 && total_mass(&r2, g.dx) > 1e-3 && total_mass(&r3, g.dx) > 1e-3);
        let (a, b, c) = (scale(&r1), scale(&r2), scale(&r3));
        let ab = wasserstein1(&a, &b, &g).unwrap();
        let ba = wasserstein1(&b, &a, &g).unwrap();
        let bc = wasserstein1(&b, &c, &g).unwrap();
        let ac = wasserstein1(&a, &c, &g).unwrap();
        prop_assert!(wasserstein1(&a, &a, &g).unwrap().abs() <= 1e-14);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-14);
        prop_assert!(ac <= ab + bc + 1e-13);
    }

    #[test]
    fn w1_same_grid_agrees_with_cross_grid(r1 in density(31), r2 in density(31)) {
        let g = grid(30);
        prop_assume!(total_mass(&r1, g.dx) > 1e-3 && total_mass(&r2, g.dx) > 1e-3);
        let m1 = total_mass(&r1, g.dx);
        let m2 = total_mass(&r2, g.dx);
        let b: Vec<f64> = r2.iter().map(|x| x * m1 / m2).collect();
        let same = wasserstein1(&r1, &b, &g).unwrap();
        let cross = wasserstein1_between(&g, &r1, &g, &b).unwrap();
        prop_assert!((same - cross).abs() <= 1e-12 * (1.0 + same));
    }

    #[test]
    fn macro_steps_keep_positivity_and_mass(rho in density(81), k in 1.0f64..30.0, steps in 1usize..40) {
        let g = grid(80);
        let mass = total_mass(&rho, g.dx);
        prop_assume!(mass > 1e-3);
        let solver = FieldSolver::new(PointyPotential::exp_half(), g, Closure::FarField).unwrap();
        let s = MacroScheme::new(VelocityLaw::arctan(k), solver, VelocityMode::VolpertLiteral, mass);
        let s = s.with_dt(s.stable_dt(f64::INFINITY)).unwrap();
        let mut st = s.state(0.0, rho).unwrap();
        for _ in 0..steps {
            let prev = st.rho.clone();
            st = s.step(&st).unwrap();
            let leak = s.grid().lambda * s.c * (prev[1] + prev[79]) * g.dx;
            prop_assert!(st.rho.iter().all(|&r| r >= 0.0));
            prop_assert!((total_mass(&st.rho, g.dx) - total_mass(&prev, g.dx)).abs() <= 1e-12 * mass + leak);
        }
    }
}
