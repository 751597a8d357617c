use std::ffi::{CStr, CString};
use std::ptr;

use hmcf_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hmcf_last_error_message()) }.to_string_lossy().into_owned()
}

fn heisenberg() -> *mut HmcfGroup {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hmcf_group_heisenberg(&mut g) }, HmcfStatus::Ok);
    g
}

#[test]
fn heisenberg_group_law() {
    let g = heisenberg();
    unsafe {
        let (mut m, mut n) = (0, 0);
        assert_eq!(hmcf_group_dims(g, &mut m, &mut n), HmcfStatus::Ok);
        assert_eq!((m, n), (2, 3));
        let x = [1.0, 2.0, 3.0];
        let y = [-0.5, 4.0, 1.0];
        let mut xy = [0.0; 3];
        assert_eq!(hmcf_group_compose(g, x.as_ptr(), y.as_ptr(), xy.as_mut_ptr()), HmcfStatus::Ok);
        // <B x_h, y_h> = (2, -1).(-0.5, 4) = -5 for B = [[0, 1], [-1, 0]]
        assert_eq!(xy, [0.5, 6.0, -1.0]);
        let mut inv = [0.0; 3];
        assert_eq!(hmcf_group_inverse(g, x.as_ptr(), inv.as_mut_ptr()), HmcfStatus::Ok);
        let mut e = [9.0; 3];
        hmcf_group_compose(g, x.as_ptr(), inv.as_ptr(), e.as_mut_ptr());
        assert_eq!(e, [0.0; 3]);
        let mut d = [0.0; 3];
        assert_eq!(hmcf_group_dilate(g, 2.0, x.as_ptr(), d.as_mut_ptr()), HmcfStatus::Ok);
        assert_eq!(d, [2.0, 4.0, 12.0]);
        let mut norm = 0.0;
        assert_eq!(hmcf_group_norm(g, x.as_ptr(), &mut norm), HmcfStatus::Ok);
        assert!((norm - (25.0f64 + 9.0).powf(0.25)).abs() < 1e-14);
        let mut dist = 0.0;
        assert_eq!(hmcf_group_distance(g, x.as_ptr(), x.as_ptr(), &mut dist), HmcfStatus::Ok);
        assert_eq!(dist, 0.0);
        hmcf_group_free(g);
    }
}

#[test]
fn custom_group_and_bad_dimensions() {
    let b = [0.0, 1.0, -1.0, 0.0];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(hmcf_group_new(2, 3, b.as_ptr(), 4, &mut g), HmcfStatus::Ok);
        hmcf_group_free(g);
        let mut h = ptr::null_mut();
        assert_eq!(hmcf_group_new(2, 3, b.as_ptr(), 3, &mut h), HmcfStatus::DimensionMismatch);
        assert!(h.is_null());
        assert!(last_error().contains("expected 4"));
        let sym = [0.0, 1.0, 1.0, 0.0];
        assert_ne!(hmcf_group_new(2, 3, sym.as_ptr(), 4, &mut h), HmcfStatus::Ok);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn null_pointers_are_reported() {
    let x = [0.0; 3];
    let mut out = 0.0;
    unsafe {
        assert_eq!(hmcf_group_norm(ptr::null(), x.as_ptr(), &mut out), HmcfStatus::NullPointer);
        assert!(last_error().contains("group"));
        let g = heisenberg();
        assert_eq!(hmcf_group_norm(g, ptr::null(), &mut out), HmcfStatus::NullPointer);
        assert_eq!(hmcf_group_heisenberg(ptr::null_mut()), HmcfStatus::NullPointer);
        hmcf_group_free(g);
        hmcf_group_free(ptr::null_mut());
    }
}

#[test]
fn operator_and_envelopes() {
    let a = [1.0, 0.0, 0.0, 3.0];
    let mut f = 0.0;
    unsafe {
        assert_eq!(hmcf_mcf_operator(2, [1.0, 0.0].as_ptr(), a.as_ptr(), &mut f), HmcfStatus::Ok);
        assert_eq!(f, -3.0);
        assert_eq!(hmcf_mcf_operator(2, [0.0, 0.0].as_ptr(), a.as_ptr(), &mut f), HmcfStatus::Singular);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(hmcf_envelopes(2, a.as_ptr(), &mut lo, &mut hi), HmcfStatus::Ok);
        assert_eq!((lo, hi), (-3.0, -1.0));
    }
}

#[test]
fn barrier_operator_matches_closed_form() {
    let g = heisenberg();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(hmcf_barrier_new(g, HmcfBarrierKind::Cylinder, -2.0, 1.0, &mut b), HmcfStatus::Ok);
        let (mut cf, mut cp) = (f64::NAN, f64::NAN);
        let x = [0.3, -0.4, 0.7];
        assert_eq!(hmcf_barrier_operator(b, x.as_ptr(), 0.0, &mut cf, &mut cp), HmcfStatus::Ok);
        assert!((cf - cp).abs() < 1e-12, "{cf} vs {cp}");
        let origin = [0.0, 0.0, 0.5];
        assert_eq!(hmcf_barrier_operator(b, origin.as_ptr(), 0.0, &mut cf, &mut cp), HmcfStatus::Singular);
        let mut t = 0.0;
        assert_eq!(hmcf_barrier_extinction_time(b, &mut t), HmcfStatus::Ok);
        assert_eq!(t, 0.5);
        hmcf_barrier_free(b);
        hmcf_group_free(g);
    }
}

#[test]
fn config_evolution_round_trip() {
    let toml = CString::new(
        "[domain]\nmin = [-2.0, -2.0, -2.0]\nmax = [2.0, 2.0, 2.0]\nresolution = [12, 12, 6]\n\
         [run]\nt_end = 0.02\nsnapshot_every = 0.01\n",
    )
    .unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(hmcf_config_from_toml(toml.as_ptr(), &mut cfg), HmcfStatus::Ok, "{}", last_error());
        let mut run = ptr::null_mut();
        assert_eq!(hmcf_evolve(cfg, &mut run), HmcfStatus::Ok, "{}", last_error());
        let (mut count, mut nodes) = (0, 0);
        assert_eq!(hmcf_run_shape(run, &mut count, &mut nodes), HmcfStatus::Ok);
        assert_eq!((count, nodes), (3, 12 * 12 * 6));
        let mut values = vec![0.0; nodes];
        let mut t = -1.0;
        assert_eq!(hmcf_run_snapshot(run, 2, values.as_mut_ptr(), nodes, &mut t), HmcfStatus::Ok);
        assert_eq!(t, 0.02);
        assert!(values.iter().any(|v| *v > 0.0));
        assert_eq!(hmcf_run_snapshot(run, 3, values.as_mut_ptr(), nodes, &mut t), HmcfStatus::InvalidArgument);
        assert_eq!(hmcf_run_snapshot(run, 0, values.as_mut_ptr(), nodes - 1, &mut t), HmcfStatus::DimensionMismatch);
        let mut ext = -1;
        assert_eq!(hmcf_run_extinction_time(run, &mut ext, &mut t), HmcfStatus::Ok);
        assert_eq!(ext, 0);
        hmcf_run_free(run);
        hmcf_config_free(cfg);
    }
}

#[test]
fn bad_config_is_a_config_error() {
    let toml = CString::new("[run]\nt_end = \"soon\"\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { hmcf_config_from_toml(toml.as_ptr(), &mut cfg) }, HmcfStatus::ConfigError);
    assert!(cfg.is_null());
    assert!(last_error().contains("t_end"), "{}", last_error());
}
