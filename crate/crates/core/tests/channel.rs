mod common;

use std::f64::consts::PI;

use eigenbeam::eigenbeams::svd_of;
use eigenbeam::export::{read_matrices_binary, read_matrices_csv, write_matrices_binary, write_matrices_csv};
use eigenbeam::{
    build_array, build_long_term_channel, build_observation_grid, compose_channel, sample_local_scatter, truncate,
    ArrayGeometry, CMatrix, CellLayout, Complex64, ElementPattern, ObservationGrid, ScatterModel, SectorPattern,
    SubbandScatterChannel,
};
use proptest::prelude::*;

fn default_channel(pattern: ElementPattern) -> CMatrix {
    let array = build_array(4, 12, 2e9).unwrap();
    let layout = CellLayout::hexagonal(2, 1732.0, 32.0, 6.0).unwrap();
    let grid = build_observation_grid(&layout, 0, 80.0, &[1.5, 5.0, 8.5]).unwrap();
    build_long_term_channel(&array, &grid, 32.0, 3.76, &pattern).unwrap().matrix
}

#[test]
fn rows_have_constant_magnitude() {
    for pattern in [ElementPattern::Isotropic, ElementPattern::Sector(SectorPattern::default())] {
        let h = default_channel(pattern);
        for row in h.row_iter() {
            let m0 = row[0].norm();
            for z in row.iter() {
                assert!((z.norm() - m0).abs() <= 1e-9 * m0);
            }
        }
    }
}

#[test]
fn far_field_phase_progression() {
    let f = 2e9;
    let lambda = eigenbeam::SPEED_OF_LIGHT / f;
    let array = ArrayGeometry::from_positions(vec![[0.0, 0.0, 0.0], [0.0, lambda / 2.0, 0.0]], 2, 1, f).unwrap();
    let thetas = [-60.0f64, -25.0, 0.0, 10.0, 45.0];
    let points = thetas
        .iter()
        .map(|t| {
            let (s, c) = t.to_radians().sin_cos();
            [1000.0 * c, 1000.0 * s, 32.0]
        })
        .collect();
    let grid = ObservationGrid {
        points,
        height_range: [32.0, 32.0],
        sector_id: 0,
        site: [0.0, 0.0],
        boresight: 0.0,
        horizontal_spacing: 1.0,
    };
    let h = build_long_term_channel(&array, &grid, 32.0, 2.0, &ElementPattern::Isotropic).unwrap();
    for (l, t) in thetas.iter().enumerate() {
        let got = (h.matrix[(l, 1)] / h.matrix[(l, 0)]).arg();
        let want = PI * t.to_radians().sin();
        assert!((got - want).abs() < 1e-3, "theta {t}: {got} vs {want}");
    }
}

#[test]
fn diagonal_fading_has_unit_mean_power() {
    let hs = sample_local_scatter(50, 100, ScatterModel::DiagonalFading, 2024).unwrap();
    let total: f64 = hs
        .iter()
        .map(|h| {
            let d = h.to_dense();
            (0..50).map(|i| d[(i, i)].norm_sqr()).sum::<f64>()
        })
        .sum();
    let mean = total / 5000.0;
    assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn identity_scatter_is_a_no_op() {
    let h = default_channel(ElementPattern::Isotropic);
    let hs = sample_local_scatter(h.nrows(), 3, ScatterModel::Identity, 0).unwrap();
    let c = compose_channel(&hs, &h).unwrap();
    for hk in &c.subbands {
        assert_eq!(hk, &h);
    }
}

#[test]
fn scatter_does_not_raise_rank() {
    let mut rng = common::rng(5);
    let hr = common::random_matrix(&mut rng, 60, 12);
    let svd = svd_of(&hr).unwrap();
    for model in [ScatterModel::DiagonalFading, ScatterModel::BandedMixing] {
        for t in [1, 3, 7] {
            let ht = truncate(&svd, t).unwrap().matrix;
            let hs = sample_local_scatter(60, 5, model, t as u64).unwrap();
            for hk in compose_channel(&hs, &ht).unwrap().subbands {
                let s = svd_of(&hk).unwrap().singular_values;
                assert!(s[t..].iter().all(|&x| x < 1e-10 * s[0]), "{model:?} t={t}: {:?}", &s[t..]);
            }
        }
    }
}

#[test]
fn compose_matches_reference_product() {
    let mut rng = common::rng(6);
    let hr = common::random_matrix(&mut rng, 9, 4);
    let hs = sample_local_scatter(9, 2, ScatterModel::BandedMixing, 4).unwrap();
    let c = compose_channel(&hs, &hr).unwrap();
    for (hl, hk) in hs.iter().zip(&c.subbands) {
        let want = common::matmul(&hl.to_dense(), &hr);
        assert!(common::frobenius(&(hk - want)) < 1e-13);
    }
}

#[test]
fn banded_model_is_tridiagonal() {
    let hs = sample_local_scatter(8, 3, ScatterModel::BandedMixing, 1).unwrap();
    for h in &hs {
        let d = h.to_dense();
        for i in 0..8 {
            for j in 0..8 {
                let z = d[(i, j)];
                if i.abs_diff(j) > 1 {
                    assert_eq!(z, Complex64::new(0.0, 0.0));
                } else {
                    assert_ne!(z, Complex64::new(0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn subbands_depend_only_on_their_index() {
    let short = sample_local_scatter(20, 3, ScatterModel::DiagonalFading, 8).unwrap();
    let long = sample_local_scatter(20, 10, ScatterModel::DiagonalFading, 8).unwrap();
    assert_eq!(&long[..3], &short[..]);
    assert_eq!(long[4].subband, 5);
}

#[test]
fn csv_stack_round_trip_through_file() {
    let mut rng = common::rng(9);
    let stack: Vec<CMatrix> = (0..3).map(|_| common::random_matrix(&mut rng, 4, 5)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    write_matrices_csv(std::fs::File::create(&path).unwrap(), &stack).unwrap();
    let back = read_matrices_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, stack);
}

#[test]
fn mismatched_tridiagonal_rejected() {
    let one = Complex64::new(1.0, 0.0);
    assert!(SubbandScatterChannel::tridiagonal(1, vec![one; 3], vec![one; 1], vec![one; 2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_stack_round_trip(
        rows in 1usize..6,
        cols in 1usize..6,
        count in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = common::rng(seed);
        let stack: Vec<CMatrix> = (0..count).map(|_| common::random_matrix(&mut rng, rows, cols)).collect();
        let mut buf = Vec::new();
        write_matrices_binary(&mut buf, &stack).unwrap();
        prop_assert_eq!(buf.len(), 24 + count * rows * cols * 16);
        prop_assert_eq!(read_matrices_binary(&buf[..]).unwrap(), stack);
    }

    #[test]
    fn apply_equals_dense(l in 1usize..12, seed in any::<u64>(), banded in any::<bool>()) {
        let model = if banded { ScatterModel::BandedMixing } else { ScatterModel::DiagonalFading };
        let hs = sample_local_scatter(l, 1, model, seed).unwrap();
        let mut rng = common::rng(seed ^ 1);
        let rhs = common::random_matrix(&mut rng, l, 3);
        let fast = hs[0].apply(&rhs).unwrap();
        let slow = common::matmul(&hs[0].to_dense(), &rhs);
        prop_assert!(common::frobenius(&(fast - slow)) < 1e-12);
    }
}
