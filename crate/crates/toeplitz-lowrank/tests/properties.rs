mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toeplitz_lowrank::filters::{build_filter_g, FilterH};
use toeplitz_lowrank::hashing::{hash_freq, hash_to_bins, HashParams};
use toeplitz_lowrank::io::{matrix_from_text, matrix_to_text};
use toeplitz_lowrank::recovery::{expand_grid, GridSpec};
use toeplitz_lowrank::regression::{
    draw_sampling_rows, leverage_bounds, sampling_distribution, weight_vector, ConjugatePairing,
};
use toeplitz_lowrank::sfft::circular_median;
use toeplitz_lowrank::toeplitz::{wrap_dist, FourierToeplitz, SymToeplitz};

fn column(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_len).prop_flat_map(|d| prop::collection::vec(-10.0..10.0f64, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_identity(a in column(64), seed in any::<u64>()) {
        let d = a.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::random_symmetric_toeplitz(d, &mut rng);
        let a = SymToeplitz::new(a).unwrap();
        let w = weight_vector(d).w;
        let weighted: f64 = a.col().iter().zip(b.col()).zip(&w)
            .map(|((x, y), w)| (w * (x - y)).powi(2)).sum::<f64>().sqrt();
        let dense = (a.to_dense() - b.to_dense()).norm();
        prop_assert!((weighted - dense).abs() <= 1e-10 * dense.max(1.0));
    }

    #[test]
    fn wrap_dist_is_a_circle_metric(f in 0.0..1.0f64, g in 0.0..1.0f64, shift in -3i32..3) {
        let d = wrap_dist(f, g);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - wrap_dist(g, f)).abs() < 1e-15);
        prop_assert!((d - wrap_dist(f + shift as f64, g)).abs() < 1e-12);
    }

    #[test]
    fn hash_bucket_in_range(sigma in 1u64..5000, b in 0.0..1.0f64, buckets in 1usize..64, f in 0.0..1.0f64) {
        let p = HashParams::new(sigma, b, buckets).unwrap();
        prop_assert!(hash_freq(&p, f) < buckets);
    }

    #[test]
    fn hashing_is_linear(f1 in 0.0..1.0f64, f2 in 0.0..1.0f64, a in -2.0..2.0f64, sigma in 1u64..6, alpha in 0i64..100) {
        let len = 256;
        let h = FilterH::recovery_taper(len, 1, 1e-2).unwrap();
        let g = build_filter_g(4, 0.5, 1e-2, 1).unwrap();
        let p = HashParams::new(sigma, 0.0625, 4).unwrap();
        let x1 = common_tone(len, f1, Complex64::new(a, 0.3));
        let x2 = common_tone(len, f2, Complex64::new(0.7, -a));
        let sum: Vec<Complex64> = x1.iter().zip(&x2).map(|(u, v)| u + v).collect();
        let u1 = hash_to_bins(&x1, &h, &g, &p, alpha).unwrap();
        let u2 = hash_to_bins(&x2, &h, &g, &p, alpha).unwrap();
        let us = hash_to_bins(&sum, &h, &g, &p, alpha).unwrap();
        for j in 0..4 {
            prop_assert!((us[j] - u1[j] - u2[j]).norm() <= 1e-9);
        }
    }

    #[test]
    fn median_stays_in_input_arc(centre in 0.0..1.0f64, offs in prop::collection::vec(-0.1..0.1f64, 1..15)) {
        let values: Vec<f64> = offs.iter().map(|o| (centre + o).rem_euclid(1.0)).collect();
        let m = circular_median(&values, centre);
        let lo = offs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rel = toeplitz_lowrank::toeplitz::wrap_signed(m, centre);
        prop_assert!(rel >= lo - 1e-12 && rel <= hi + 1e-12);
    }

    #[test]
    fn conjugate_closed_models_are_real_symmetric(
        pairs in prop::collection::vec((0.0..0.5f64, -3.0..3.0f64), 1..5),
        d in 2usize..40,
    ) {
        let mut freqs = Vec::new();
        let mut weights = Vec::new();
        for (f, w) in pairs {
            freqs.extend([f, 1.0 - f]);
            weights.extend([w, w]);
        }
        let m = FourierToeplitz::new(d, freqs, weights).unwrap();
        for i in 0..d {
            for j in 0..d {
                prop_assert!((m.entry(i, j).unwrap() - m.entry(j, i).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pairing_ties_every_conjugate(fs in prop::collection::vec(0.001..0.499f64, 1..6), d in 8usize..512) {
        let freqs: Vec<f64> = fs.iter().flat_map(|f| [*f, 1.0 - f]).collect();
        let pairing = ConjugatePairing::new(d, &freqs).unwrap();
        let r = pairing.collapse_matrix();
        for c in 0..r.ncols() {
            let members: Vec<usize> = (0..r.nrows()).filter(|&i| r[(i, c)] != 0.0).collect();
            for &i in &members {
                let f = pairing.freqs[i];
                prop_assert!(members.iter().any(|&j| wrap_dist(pairing.freqs[j], 1.0 - f) < 1e-9));
            }
        }
    }

    #[test]
    fn sampling_distribution_is_normalized(d in 4usize..2048, r in 1usize..16) {
        let r = r.min(d);
        let p = sampling_distribution(&leverage_bounds(d, r));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn leverage_bounds_in_unit_interval(d in 4usize..4096, r in 1usize..32) {
        let prof = leverage_bounds(d, r.min(d));
        prop_assert!(prof.tau.iter().all(|t| *t > 0.0 && *t <= 1.0));
        prop_assert!((prof.tau.iter().sum::<f64>() - prof.total).abs() < 1e-9 * prof.total);
    }

    #[test]
    fn sampled_rows_have_matching_scales(seed in any::<u64>(), m in 1usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = draw_sampling_rows(&leverage_bounds(128, 4), m, &mut rng).unwrap();
        prop_assert_eq!(rows.rows.len(), m);
        for (j, s) in rows.rows {
            prop_assert!((s - 1.0 / (m as f64 * rows.p[j]).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_expansion_stays_near_list(list in prop::collection::vec(0.0..1.0f64, 0..10), cells in 0.5..4.0f64) {
        let d = 1024;
        let grid = GridSpec::new(d, 1e-2);
        let window = cells / d as f64;
        let out = expand_grid(&list, &grid, window);
        let slack = grid.gamma * grid.offsets as f64 + 1e-12;
        for f in &out {
            let near = list.iter().any(|g| wrap_dist(*f, *g) <= window + slack || wrap_dist(1.0 - f, *g) <= window + slack);
            prop_assert!(near);
            prop_assert!(out.iter().any(|g| wrap_dist(*g, 1.0 - f) <= 1e-15));
        }
        prop_assert!(out.len() <= 4 * grid.offsets * list.len() * (2 * (cells.ceil() as usize) + 1));
    }

    #[test]
    fn matrix_text_round_trips(col in column(40)) {
        let t = SymToeplitz::new(col).unwrap();
        prop_assert_eq!(matrix_from_text(&matrix_to_text(&t)).unwrap(), t);
    }

    #[test]
    fn psd_norm_compression(d in 2usize..48, rank in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(d, rank, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng));
        let a = &g * g.transpose();
        let h = d / 2;
        let tl = a.view((0, 0), (h, h)).norm();
        let br = a.view((h, h), (d - h, d - h)).norm();
        prop_assert!(a.norm() <= tl + br + 1e-9 * a.norm());
    }
}

fn common_tone(len: usize, f: f64, a: Complex64) -> Vec<Complex64> {
    (0..len).map(|t| a * toeplitz_lowrank::toeplitz::cis(f * t as f64)).collect()
}
