use hmcf::barriers::{extinction_time, gauge_value, BarrierEval, BarrierKind, BarrierSpec};
use hmcf::grid::{DomainBox, GridField};
use hmcf::solver::{
    evolve, extract_front, indicator_fields, residual_on_exact, InitialCondition, ResidualOptions, Scheme, SolverConfig,
};
use hmcf::GroupSpec;

fn gauge_ball(scheme: Scheme) -> SolverConfig {
    let mut c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 32, 1.0);
    c.initial = InitialCondition::new(BarrierKind::Gauge, 1.0);
    c.scheme = scheme;
    c.t_end = 0.6;
    c.snapshot_every = 0.6;
    c
}

#[test]
fn gauge_ball_extinction_lies_between_barrier_bounds() {
    let g = GroupSpec::heisenberg();
    // sqrt gauge subsolution with the same zero set gives the lower bound,
    // the enclosing unit Euclid ball supersolution the upper one
    let lower = extinction_time(&BarrierSpec::new(BarrierKind::SqrtGauge, -2.0 * g.n() as f64, 1.0), &g).unwrap();
    let upper = extinction_time(&BarrierSpec::new(BarrierKind::EuclidBall, -2.0, 1.0), &g).unwrap();
    assert!((lower - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(upper, 0.5);
    let mut times = Vec::new();
    for scheme in Scheme::ALL {
        let t = evolve(&gauge_ball(scheme)).unwrap().extinction_time.expect("gauge ball goes extinct");
        assert!(t >= lower && t <= upper, "{scheme}: extinction at {t} outside [{lower}, {upper}]");
        times.push(t);
    }
    let (reg, lo, hi) = (times[0], times[1], times[2]);
    assert!(hi <= reg && reg <= lo, "envelope runs do not bracket: min {lo}, reg {reg}, max {hi}");
}

#[test]
fn gauge_ball_front_is_close_to_the_level_set() {
    let g = GroupSpec::heisenberg();
    let c = gauge_ball(Scheme::Regularized);
    let grid = hmcf::solver::init(&c).unwrap();
    let front = extract_front(&grid, 0.0);
    assert!(!front.is_empty());
    let h = grid.max_spacing();
    let worst = front.points.iter().map(|p| (gauge_value(&g, p) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 4.0 * h, "{worst} > {}", 4.0 * h);
}

#[test]
fn indicator_gap_is_confined_to_the_front_shell() {
    let mut c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 16, 1.0);
    c.t_end = 0.2;
    c.snapshot_every = 0.1;
    let evo = evolve(&c).unwrap();
    let h = evo.snapshots[0].max_spacing();
    for pair in indicator_fields(&evo.snapshots) {
        assert!(pair.gap <= h, "gap {} at t = {}", pair.gap, pair.time);
        for (a, b) in pair.upper.values().iter().zip(pair.lower.values()) {
            assert!(a >= b);
        }
    }
}

#[test]
fn indicator_gap_measures_a_zero_plateau() {
    let grid = GridField::from_fn(DomainBox::cube(3, 1.0), vec![10, 10, 10], 0.0, |x| {
        Ok(if x[0].abs() < 0.5 { 0.0 } else { x[0] })
    })
    .unwrap();
    let pairs = indicator_fields(&[grid]);
    assert_eq!(pairs[0].gap, 0.4);
    let strict = GridField::from_fn(DomainBox::cube(3, 1.0), vec![10, 10, 10], 0.0, |x| Ok(x[0])).unwrap();
    assert_eq!(indicator_fields(&[strict])[0].gap, 0.0);
}

#[test]
fn regularization_error_vanishes_with_delta() {
    let g = GroupSpec::heisenberg();
    let exact = BarrierEval::new(BarrierSpec::new(BarrierKind::Cylinder, -2.0, 1.0), &g).unwrap();
    let opts = ResidualOptions { times: vec![0.0, 0.2], axis_exclusion: 0.25 };
    let mut last = f64::INFINITY;
    for delta in [1e-3, 1e-5, 1e-7] {
        let mut c = SolverConfig::cylinder(g.clone(), 2.0, 32, 1.0);
        c.delta_reg = Some(delta);
        let r = residual_on_exact(exact.field(), &c, &opts).unwrap().max_residual;
        assert!(r <= 1e-2 * last, "delta {delta}: residual {r} after {last}");
        last = r;
    }
    assert!(last < 1e-12);
}

#[test]
fn relabeled_fronts_agree_on_a_coarse_grid() {
    let mut c = SolverConfig::cylinder(GroupSpec::heisenberg(), 2.0, 16, 1.0);
    c.t_end = 0.3;
    c.snapshot_every = 0.1;
    let base = evolve(&c).unwrap();
    c.initial = c.initial.with_relabel(hmcf::expr::Relabel::Cubic { a: 1.0 });
    let relabeled = evolve(&c).unwrap();
    assert_eq!(base.snapshots.len(), relabeled.snapshots.len());
    for (a, b) in base.snapshots.iter().zip(&relabeled.snapshots) {
        let h = a.max_spacing();
        let d = hmcf::solver::hausdorff_distance(&extract_front(a, 0.0), &extract_front(b, 0.0), h);
        assert!(d <= h, "t = {}: {d} > {h}", a.time());
    }
}
