mod common;

use eigenbeam::eigenbeams::{discarded_power, profile_from_singular_values, svd_of};
use eigenbeam::{
    build_array, build_long_term_channel, build_observation_grid, cumulative_power, effective_precoder,
    extract_eigenbeams, truncate, CMatrix, CellLayout, Complex64, ElementPattern, SectorPattern,
};
use proptest::prelude::*;

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn assert_gram_match(h: &CMatrix, t: usize, tol: f64) {
    let svd = svd_of(h).unwrap();
    let gram = common::matmul(&common::adjoint(h), h);
    let (values, vectors) = common::hermitian_eigen(&gram);
    let scale = values[0];
    for (j, lambda) in values.iter().enumerate().take(t) {
        let s2 = svd.singular_values[j] * svd.singular_values[j];
        assert!((s2 - lambda).abs() <= 1e-9 * scale, "σ² {s2} vs λ {lambda}");
        let want = common::phase_normalized(&common::column(&vectors, j));
        let got = common::column(&svd.v, j);
        let err = want.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < tol, "column {j}: {err}");
    }
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut rng = common::rng(1);
    let h = common::random_matrix(&mut rng, 20, 8);
    assert_gram_match(&h, 8, 1e-8);
}

#[test]
fn eigenbeams_match_covariance_eigenvectors_on_random_instances() {
    let mut rng = common::rng(2);
    for _ in 0..20 {
        let h = common::random_matrix(&mut rng, 40, 12);
        assert_gram_match(&h, 8, 1e-8);
    }
}

#[test]
fn eigenbeams_are_orthonormal() {
    let mut rng = common::rng(3);
    let h = common::random_matrix(&mut rng, 30, 10);
    let svd = svd_of(&h).unwrap();
    for t in 1..=10 {
        let w = extract_eigenbeams(&svd, t).unwrap().w;
        let g = common::matmul(&common::adjoint(&w), &w) - CMatrix::identity(t, t);
        assert!(max_entry(&g) < 1e-10);
    }
}

#[test]
fn truncation_error_equals_discarded_power() {
    let mut rng = common::rng(4);
    for (l, n) in [(40, 16), (16, 40), (7, 7), (1, 5), (5, 1)] {
        let h = common::random_matrix(&mut rng, l, n);
        let svd = svd_of(&h).unwrap();
        for t in 1..=l.min(n) {
            let ht = truncate(&svd, t).unwrap().matrix;
            let resid = common::frobenius(&(&h - &ht)).powi(2);
            let want = discarded_power(&svd, t);
            if t == l.min(n) {
                assert!(resid <= 1e-20 * common::frobenius(&h).powi(2));
            } else {
                assert!((resid - want).abs() <= 1e-9 * want, "t={t}: {resid} vs {want}");
            }
        }
    }
}

#[test]
fn truncation_beats_perturbed_competitors() {
    let mut rng = common::rng(5);
    let h = common::random_matrix(&mut rng, 24, 10);
    let svd = svd_of(&h).unwrap();
    for t in 1..10 {
        let best = truncate(&svd, t).unwrap();
        let best_err = common::frobenius(&(&h - &best.matrix));
        for _ in 0..50 {
            let eps = 1e-3;
            let du = common::random_matrix(&mut rng, 24, t) * Complex64::new(eps, 0.0);
            let u = &best.u_t + du;
            let sigma = CMatrix::from_fn(t, t, |i, j| if i == j { Complex64::new(best.sigma_t[i], 0.0) } else { Complex64::new(0.0, 0.0) });
            let competitor = common::matmul(&common::matmul(&u, &sigma), &common::adjoint(&best.v_t));
            assert!(common::frobenius(&(&h - competitor)) >= best_err);
        }
    }
}

#[test]
fn profile_is_scale_invariant() {
    let mut rng = common::rng(6);
    let h = common::random_matrix(&mut rng, 30, 8);
    let p = cumulative_power(&svd_of(&h).unwrap()).unwrap();
    for c in [Complex64::new(1e-6, 0.0), Complex64::new(-3.0, 2.0), Complex64::new(0.0, 1e5)] {
        let q = cumulative_power(&svd_of(&(&h * c)).unwrap()).unwrap();
        for (a, b) in p.cumulative_power.iter().zip(&q.cumulative_power) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn profile_shape() {
    let p = profile_from_singular_values(&[3.0, 2.0, 1.0]).unwrap();
    assert_eq!(p.cumulative_power, vec![9.0 / 14.0, 13.0 / 14.0, 1.0]);
    assert!(profile_from_singular_values(&[0.0, 0.0]).is_err());
    assert!(profile_from_singular_values(&[]).is_err());
}

#[test]
fn eigenbeam_sets_are_prefixes() {
    let mut rng = common::rng(7);
    let h = common::random_matrix(&mut rng, 25, 9);
    let svd = svd_of(&h).unwrap();
    let big = extract_eigenbeams(&svd, 9).unwrap();
    for t in 1..9 {
        let small = extract_eigenbeams(&svd, t).unwrap();
        assert_eq!(small.w, big.w.columns(0, t).into_owned());
        assert_eq!(small.sigma_t, big.sigma_t[..t]);
    }
}

#[test]
fn svd_is_deterministic() {
    let mut rng = common::rng(8);
    let h = common::random_matrix(&mut rng, 50, 12);
    assert_eq!(svd_of(&h).unwrap(), svd_of(&h).unwrap());
}

#[test]
fn invalid_rank_budgets() {
    let mut rng = common::rng(9);
    let svd = svd_of(&common::random_matrix(&mut rng, 6, 4)).unwrap();
    assert!(truncate(&svd, 0).is_err());
    assert!(truncate(&svd, 5).is_err());
    assert!(extract_eigenbeams(&svd, 0).is_err());
    assert!(extract_eigenbeams(&svd, 5).is_err());
}

#[test]
fn effective_precoder_recovers_projection() {
    let mut rng = common::rng(10);
    let h = common::random_matrix(&mut rng, 20, 6);
    let svd = svd_of(&h).unwrap();
    let beams = extract_eigenbeams(&svd, 3).unwrap();
    let d = common::random_matrix(&mut rng, 6, 3);
    let f = &effective_precoder(&beams, std::slice::from_ref(&d)).unwrap()[0];
    let want = common::matmul(&common::adjoint(&beams.w), &d);
    assert!(common::frobenius(&(f - want)) < 1e-13);
    assert!(effective_precoder(&beams, &[common::random_matrix(&mut rng, 5, 3)]).is_err());
}

#[test]
fn default_geometry_eigenbeams_match_covariance() {
    let array = build_array(4, 12, 2e9).unwrap();
    let layout = CellLayout::hexagonal(2, 1732.0, 32.0, 6.0).unwrap();
    let grid = build_observation_grid(&layout, 0, 38.7, &[1.5, 5.0, 8.5]).unwrap();
    let h = build_long_term_channel(&array, &grid, 32.0, 3.76, &ElementPattern::Sector(SectorPattern::default()))
        .unwrap()
        .matrix;
    // Normalizing the channel keeps the Gram entries O(1) for the oracle.
    let h = &h / Complex64::new(common::frobenius(&h), 0.0);
    assert_gram_match(&h, 8, 1e-8);
    let svd = svd_of(&h).unwrap();
    let w = extract_eigenbeams(&svd, 8).unwrap().w;
    let g = common::matmul(&common::adjoint(&w), &w) - CMatrix::identity(8, 8);
    assert!(max_entry(&g) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eckart_young_against_random_rank_t(l in 1usize..12, n in 1usize..8, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let h = common::random_matrix(&mut rng, l, n);
        let svd = svd_of(&h).unwrap();
        prop_assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        for t in 1..=l.min(n) {
            let best = common::frobenius(&(&h - truncate(&svd, t).unwrap().matrix));
            prop_assert!((best * best - discarded_power(&svd, t)).abs() <= 1e-9 * common::frobenius(&h).powi(2));
            for _ in 0..10 {
                let x = common::matmul(&common::random_matrix(&mut rng, l, t), &common::random_matrix(&mut rng, t, n));
                prop_assert!(common::frobenius(&(&h - x)) >= best);
            }
        }
    }

    #[test]
    fn reconstruction_is_exact(l in 1usize..10, n in 1usize..10, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let h = common::random_matrix(&mut rng, l, n);
        let svd = svd_of(&h).unwrap();
        prop_assert!(common::frobenius(&(svd.reconstruct() - &h)) <= 1e-12 * common::frobenius(&h));
        for j in 0..svd.rank_capacity() {
            let col = common::column(&svd.v, j);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = col.iter().find(|z| z.norm() == big).unwrap();
            prop_assert!(pivot.im == 0.0 && pivot.re > 0.0);
        }
    }
}
