use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toeplitz_lowrank::filters::{build_filter_g, build_filter_h, validate_g, validate_h, FilterG, FilterH};

#[test]
fn taper_centre_and_shoulder() {
    let h = build_filter_h(1, 1e-3, 1024).unwrap();
    let c = h.eval(512);
    assert!((1.0 - 1e-3..=1.0).contains(&c), "H(d/2) = {c}");
    let s3 = h.params().s3;
    let edge = (1024.0 * s3 / 2.0) as i64;
    for t in (512 - edge..=512 + edge).step_by(7) {
        let v = h.eval(t);
        assert!((0.0..=1.0).contains(&v), "H({t}) = {v}");
    }
}

#[test]
fn taper_even_about_centre() {
    let h = build_filter_h(2, 1e-2, 2048).unwrap();
    for u in [0, 1, 17, 300, 1023, 5000] {
        assert_eq!(h.eval(1024 - u), h.eval(1024 + u));
    }
}

#[test]
fn far_tail_below_envelope() {
    let h = build_filter_h(1, 1e-3, 1024).unwrap();
    let p = h.params();
    let bound = p.s0 * (p.s1 / 2.0 + 2.0).powi(-(p.l as i32));
    for t in [512 + 1024, 512 - 1024] {
        assert!(h.eval(t) <= bound, "H({t}) = {} above {bound}", h.eval(t));
    }
}

#[test]
fn constant_signal_leaks_little_outside_window() {
    let d = 4096i64;
    let h = build_filter_h(2, 1e-2, d as usize).unwrap();
    let leak: f64 = (-8 * d..0).chain(d..=8 * d).map(|t| h.eval(t).powi(2)).sum();
    assert!(leak <= 1e-2 * d as f64, "leak {leak}");
}

#[test]
fn four_sparse_signals_validate() {
    let h = build_filter_h(4, 1e-2, 4096).unwrap();
    let report = validate_h(&h, 20, &mut ChaCha8Rng::seed_from_u64(3));
    assert!(report.pass, "{report:?}");
}

#[test]
fn support_width_formula() {
    let h = build_filter_h(2, 1e-2, 4096).unwrap();
    let p = h.params();
    let want = p.s1 * p.l as f64 / (p.d as f64 * p.s3);
    assert!((p.support_width - want).abs() < 1e-15);
    assert!(p.support_width < 0.5);
}

#[test]
fn small_dimension_refused() {
    assert!(build_filter_h(4, 1e-2, 128).is_err());
}

#[test]
fn bucket_filter_masks() {
    for (b, k, delta) in [(4usize, 1usize, 1e-2), (16, 4, 1e-3)] {
        let g = build_filter_g(b, 0.5, delta, k).unwrap();
        let tol = delta / k as f64;
        let g0 = g.eval_freq(0.0);
        assert!((1.0 - tol..=1.0).contains(&g0), "Ĝ(0) = {g0}");
        assert!(g.eval_freq(1.0 / b as f64).abs() <= tol);
        assert_eq!(g.tap(g.time_support() as i64 + 1), 0.0);
        assert!(validate_g(&g).pass);
    }
}

#[test]
fn filters_round_trip_through_json() {
    let h = build_filter_h(1, 1e-2, 1024).unwrap();
    let h2 = FilterH::from_json(&h.to_json().unwrap()).unwrap();
    assert_eq!(h.params(), h2.params());
    assert_eq!(h.eval(100), h2.eval(100));
    let g = build_filter_g(8, 0.5, 1e-2, 2).unwrap();
    let g2 = FilterG::from_json(&g.to_json().unwrap()).unwrap();
    assert_eq!(g.eval_freq(0.03), g2.eval_freq(0.03));
}
