use hmcf::calculus::{envelopes, exact_jet, horizontal_gradient, horizontal_hessian, mcf_operator};
use hmcf::expr::{Expr, ScalarField};
use hmcf::grid::{DomainBox, GridField};
use hmcf::solver::{extract_front, Scheme, Solver, SolverConfig};
use hmcf::verify::five_dim_spec;
use hmcf::viscosity::{check_point, distance4_field};
use hmcf::GroupSpec;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn groups() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![Just(GroupSpec::heisenberg()), Just(five_dim_spec())]
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn sym(m: usize, v: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(m, m, &v[..m * m]);
    (&a + a.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms((g, x, y, z) in groups().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), coords(n), coords(n), coords(n))
    })) {
        let xy_z = g.compose(g.compose(&x, &y).unwrap().as_slice(), &z).unwrap();
        let x_yz = g.compose(&x, g.compose(&y, &z).unwrap().as_slice()).unwrap();
        prop_assert!(close(xy_z.as_slice(), x_yz.as_slice(), 1e-12));
        let e = vec![0.0; g.n()];
        prop_assert_eq!(g.compose(&x, &e).unwrap().into_vec(), x.clone());
        prop_assert_eq!(g.compose(&e, &x).unwrap().into_vec(), x.clone());
        let inv = g.inverse(&x);
        prop_assert!(close(g.compose(&x, inv.as_slice()).unwrap().as_slice(), &e, 1e-12));
        prop_assert!(close(g.compose(inv.as_slice(), &x).unwrap().as_slice(), &e, 1e-12));
    }

    #[test]
    fn gauge_distance_is_left_invariant((g, x, y, z) in groups().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), coords(n), coords(n), coords(n))
    })) {
        let d = g.gauge_distance(&x, &y).unwrap();
        let zx = g.compose(&z, &x).unwrap();
        let zy = g.compose(&z, &y).unwrap();
        let dz = g.gauge_distance(zx.as_slice(), zy.as_slice()).unwrap();
        prop_assert!((d - dz).abs() <= 1e-12 * d.max(1.0));
        prop_assert_eq!(g.gauge_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn norm_is_homogeneous((g, x) in groups().prop_flat_map(|g| { let n = g.n(); (Just(g), coords(n)) }),
                           lambda in 0.05..20.0f64) {
        let dx = g.dilate(lambda, &x).unwrap();
        let lhs = g.homogeneous_norm(dx.as_slice());
        let rhs = lambda * g.homogeneous_norm(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn operator_is_geometric(m in 2usize..4, q in coords(3), a in coords(9),
                             lambda in 0.01..10.0f64, mu in -10.0..10.0f64) {
        let q = DVector::from_column_slice(&q[..m]);
        prop_assume!(q.norm() > 1e-3);
        let a = sym(m, &a);
        let f = mcf_operator(&q, &a).unwrap();
        let shifted = &a * lambda + &q * q.transpose() * mu;
        let g = mcf_operator(&(&q * lambda), &shifted).unwrap();
        prop_assert!((g - lambda * f).abs() <= 1e-10 * (1.0 + (lambda * f).abs() + mu.abs() * q.norm_squared()));
    }

    #[test]
    fn operator_is_degenerate_elliptic(m in 2usize..4, q in coords(3), a in coords(9), p in coords(9)) {
        let q = DVector::from_column_slice(&q[..m]);
        prop_assume!(q.norm() > 1e-3);
        let a = sym(m, &a);
        let r = DMatrix::from_row_slice(m, m, &p[..m * m]);
        let psd = &r * r.transpose();
        let lhs = mcf_operator(&q, &(&a + psd)).unwrap();
        prop_assert!(lhs <= mcf_operator(&q, &a).unwrap() + 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn envelopes_bracket_the_operator(m in 2usize..4, q in coords(3), a in coords(9)) {
        let q = DVector::from_column_slice(&q[..m]);
        prop_assume!(q.norm() > 1e-6);
        let a = sym(m, &a);
        let f = mcf_operator(&q, &a).unwrap();
        let e = envelopes(&a);
        prop_assert!(e.lower <= f + 1e-12 && f <= e.upper + 1e-12);
    }

    #[test]
    fn horizontal_hessian_is_symmetric((g, x, y) in groups().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), coords(n), coords(n))
    })) {
        let f = distance4_field(&g);
        let mut xy = x.clone();
        xy.extend_from_slice(&y);
        let jet = exact_jet(&f, &xy, 0.0).unwrap();
        let hx = horizontal_hessian(&g, &jet.block(0, g.n()), &x);
        prop_assert!((&hx - hx.transpose()).amax() <= 1e-12 * (1.0 + hx.amax()));
        let qx = horizontal_gradient(&g, &jet.block(0, g.n()), &x);
        let qy = horizontal_gradient(&g, &jet.block(g.n(), g.n()), &y);
        prop_assert!((qx.norm() - qy.norm()).abs() <= 1e-10 * (1.0 + qx.norm()));
    }

    #[test]
    fn verdicts_scale_under_dilation(x in coords(3), t in 0.0..0.3f64, c in -8.0..8.0f64,
                                     lambda in prop_oneof![Just(0.5), Just(2.0)]) {
        let g = GroupSpec::heisenberg();
        let field = |l: f64| {
            let xh = Expr::sum_of_squares(vec![l * Expr::var(0), l * Expr::var(1)]);
            let xv = Expr::sum_of_squares(vec![(l * l) * Expr::var(2)]);
            ScalarField::new((c * l * l) * Expr::time() + 1.0 - (xh.powi(2) + xv), 3).unwrap()
        };
        let dx = g.dilate(lambda, &x).unwrap();
        let base = check_point(&g, &field(1.0), dx.as_slice(), lambda * lambda * t, 1e-10).unwrap();
        let pulled = check_point(&g, &field(lambda), &x, t, 1e-10).unwrap();
        prop_assert_eq!(base.regime, pulled.regime);
        let expect = lambda * lambda * base.sub_residual;
        prop_assert!((pulled.sub_residual - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }
}

fn small_solver() -> Solver {
    let mut c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 12, 1.0);
    c.t_end = 0.02;
    c.snapshot_every = 0.01;
    Solver::new(c).unwrap()
}

fn smooth(coef: &[f64]) -> impl Fn(&[f64]) -> hmcf::Result<f64> + '_ {
    move |x: &[f64]| {
        Ok(coef[0] * (coef[1] * x[0] + coef[2] * x[1]).cos()
            + coef[3] * x[2] * x[2] * 0.1
            + coef[4] * (x[0] * x[1] + coef[5]).sin())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn adding_a_constant_commutes_with_stepping(coef in coords(6), k in -5.0..5.0f64) {
        let s = small_solver();
        let u = GridField::from_fn(s.config().domain.clone(), s.config().resolution.clone(), 0.0, smooth(&coef)).unwrap();
        let shifted = u.with_values(u.values().iter().map(|v| v + k).collect(), 0.0).unwrap();
        for scheme in Scheme::ALL {
            let a = s.step_with(&u, scheme, s.dt()).unwrap();
            let b = s.step_with(&shifted, scheme, s.dt()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((y - x - k).abs() <= 1e-12 * (1.0 + x.abs() + k.abs()));
            }
        }
    }

    #[test]
    fn maximum_does_not_grow(coef in coords(6), scheme in prop::sample::select(Scheme::ALL.to_vec())) {
        let s = small_solver();
        let mut u = GridField::from_fn(s.config().domain.clone(), s.config().resolution.clone(), 0.0, smooth(&coef)).unwrap();
        let bound = u.max_abs() + 1e-9;
        for _ in 0..20 {
            u = s.step_with(&u, scheme, s.dt()).unwrap();
            prop_assert!(u.max_abs() <= bound, "{} > {}", u.max_abs(), bound);
        }
    }

    #[test]
    fn front_points_lie_on_bracketing_edges(coef in coords(6)) {
        let grid = GridField::from_fn(DomainBox::cube(3, 2.0), vec![9, 8, 7], 0.0, smooth(&coef)).unwrap();
        let front = extract_front(&grid, 0.0);
        for p in &front.points {
            // exactly one coordinate is off the node lattice, and its two neighbors bracket zero
            let mut idx = vec![0usize; 3];
            let mut off = None;
            for a in 0..3 {
                let h = grid.spacing()[a];
                let s = (p[a] - grid.coord(a, 0)) / h;
                let r = s.round();
                if (s - r).abs() < 1e-9 {
                    idx[a] = r as usize;
                } else {
                    prop_assert!(off.is_none());
                    off = Some(a);
                    idx[a] = s.floor() as usize;
                }
            }
            let lo = grid.value_at(&idx);
            match off {
                Some(a) => {
                    let mut j = idx.clone();
                    j[a] += 1;
                    prop_assert!((lo > 0.0) != (grid.value_at(&j) > 0.0));
                }
                None => prop_assert!(lo == 0.0 || lo.abs() < 1e-12),
            }
        }
    }
}

#[test]
fn evolution_is_deterministic_across_pool_sizes() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| small_solver().evolve().unwrap())
    };
    let a = run(1);
    for threads in [2, 4, 8] {
        let b = run(threads);
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            let same = x.values().iter().zip(y.values()).all(|(p, q)| p.to_bits() == q.to_bits());
            assert!(same, "{threads} threads differ at t = {}", x.time());
        }
    }
}
