mod common;

use eigenbeam::eigenbeams::svd_of;
use eigenbeam::patterns::{angle_grid, direction};
use eigenbeam::{
    beam_pattern, build_array, build_long_term_channel, build_observation_grid, element_power, extract_eigenbeams,
    steering_vector, transmit_pattern, ArrayGeometry, CVector, CellLayout, Complex64, ElementPattern, SectorPattern,
};
use proptest::prelude::*;

fn default_array() -> ArrayGeometry {
    build_array(4, 12, 2e9).unwrap()
}

fn random_weights(n: usize, seed: u64) -> CVector {
    let mut rng = common::rng(seed);
    CVector::from_iterator(n, (0..n).map(|_| common::cgauss(&mut rng)))
}

#[test]
fn broadside_pair_has_endfire_null() {
    let f = 2e9;
    let lambda = eigenbeam::SPEED_OF_LIGHT / f;
    let pair = ArrayGeometry::from_positions(vec![[0.0, 0.0, 0.0], [0.0, lambda / 2.0, 0.0]], 2, 1, f).unwrap();
    let w = CVector::from_element(2, Complex64::new(1.0, 0.0));
    for az in [90.0, -90.0] {
        let p = beam_pattern(&pair, &w, &[az], &[0.0]).unwrap();
        assert!(p.gain_db(0, 0) < -40.0, "{}", p.gain_db(0, 0));
    }
}

#[test]
fn steering_phase_follows_path_difference() {
    let array = default_array();
    let (az, el) = (23.0, -7.0);
    let a = steering_vector(&array, az, el);
    let u = direction(az, el);
    let k0 = 2.0 * std::f64::consts::PI / array.wavelength;
    for (n, p) in array.element_positions.iter().enumerate() {
        let want = Complex64::from_polar(1.0, k0 * (u[0] * p[0] + u[1] * p[1] + u[2] * p[2]));
        assert!((a[n] - want).norm() < 1e-12);
    }
}

#[test]
fn matched_weights_peak_at_target() {
    let array = default_array();
    let az = angle_grid(-90.0, 90.0, 1.0).unwrap();
    let el = angle_grid(-90.0, 30.0, 1.0).unwrap();
    for (az0, el0) in [(0.0, 0.0), (20.0, -10.0), (-45.0, 5.0), (60.0, -20.0)] {
        let w = steering_vector(&array, az0, el0);
        let p = beam_pattern(&array, &w, &az, &el).unwrap();
        let (paz, pel, g) = p.peak();
        assert_eq!((paz, pel), (az0, el0));
        assert!((g - 48.0).abs() < 1e-9);
    }
}

#[test]
fn pattern_agrees_with_direct_inner_product() {
    let array = default_array();
    let w = random_weights(48, 3);
    let az = angle_grid(-90.0, 90.0, 7.5).unwrap();
    let el = angle_grid(-60.0, 30.0, 5.0).unwrap();
    let p = beam_pattern(&array, &w, &az, &el).unwrap();
    for (e, &elv) in el.iter().enumerate() {
        for (i, &azv) in az.iter().enumerate() {
            let a = steering_vector(&array, azv, elv);
            assert_eq!(p.gain[(e, i)], a.dotc(&w).norm_sqr() / w.norm_squared());
        }
    }
}

#[test]
fn power_map_sums_to_weight_energy() {
    let array = default_array();
    for seed in 0..10 {
        let w = random_weights(48, seed) * Complex64::new(0.0, 2.5);
        let m = element_power(&array, &w).unwrap();
        assert!((m.total() - w.norm_squared()).abs() <= 1e-12 * w.norm_squared());
        assert_eq!(m.power.max(), 1.0);
    }
}

#[test]
fn leading_eigenbeams_point_differently() {
    let array = default_array();
    let layout = CellLayout::hexagonal(2, 1732.0, 32.0, 6.0).unwrap();
    let grid = build_observation_grid(&layout, 0, 38.7, &[1.5, 5.0, 8.5]).unwrap();
    let h = build_long_term_channel(&array, &grid, 32.0, 3.76, &ElementPattern::Sector(SectorPattern::default()))
        .unwrap();
    let beams = extract_eigenbeams(&svd_of(&h.matrix).unwrap(), 2).unwrap();
    let az = angle_grid(-90.0, 90.0, 1.0).unwrap();
    let el = angle_grid(-90.0, 30.0, 1.0).unwrap();
    let p1 = transmit_pattern(&array, &beams.beam(0), &az, &el).unwrap().peak();
    let p2 = transmit_pattern(&array, &beams.beam(1), &az, &el).unwrap().peak();
    assert_ne!((p1.0, p1.1), (p2.0, p2.1));
    // The strongest beam serves the ground in front of the array.
    assert!(p1.0.abs() <= 60.0 && p1.1 < 0.0, "{p1:?}");
}

#[test]
fn transmit_pattern_follows_the_channel() {
    // The field a weight vector puts at a far point is the channel row times w.
    let array = default_array();
    let (az0, el0) = (-30.0f64, -12.0f64);
    let d = 2000.0;
    let u = direction(az0, el0);
    let point = [d * u[0], d * u[1], 32.0 + d * u[2]];
    let grid = eigenbeam::ObservationGrid {
        points: vec![point],
        height_range: [point[2], point[2]],
        sector_id: 0,
        site: [0.0, 0.0],
        boresight: 0.0,
        horizontal_spacing: 1.0,
    };
    let h = build_long_term_channel(&array, &grid, 32.0, 2.0, &ElementPattern::Isotropic).unwrap().matrix;
    let w = CVector::from_iterator(48, h.row(0).iter().map(|z| z.conj()));
    let az = angle_grid(-90.0, 90.0, 1.0).unwrap();
    let el = angle_grid(-90.0, 30.0, 1.0).unwrap();
    let (paz, pel, _) = transmit_pattern(&array, &w, &az, &el).unwrap().peak();
    assert_eq!((paz, pel), (az0, el0));
}

#[test]
fn bad_pattern_inputs() {
    let array = default_array();
    let w = random_weights(48, 1);
    assert!(beam_pattern(&array, &random_weights(47, 1), &[0.0], &[0.0]).is_err());
    assert!(beam_pattern(&array, &w, &[1.0, 0.0], &[0.0]).is_err());
    assert!(beam_pattern(&array, &w, &[], &[0.0]).is_err());
    assert!(element_power(&array, &random_weights(5, 1)).is_err());
    assert!(angle_grid(0.0, -1.0, 1.0).is_err());
    assert!(angle_grid(0.0, 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pattern_invariant_to_phase_and_scale(seed in any::<u64>(), phase in -3.2..3.2f64, scale in 1e-3..1e3f64) {
        let array = build_array(2, 3, 2e9).unwrap();
        let w = random_weights(6, seed);
        let w2 = &w * Complex64::from_polar(scale, phase);
        let az = angle_grid(-90.0, 90.0, 15.0).unwrap();
        let el = angle_grid(-60.0, 30.0, 15.0).unwrap();
        let p = beam_pattern(&array, &w, &az, &el).unwrap();
        let q = beam_pattern(&array, &w2, &az, &el).unwrap();
        for e in 0..el.len() {
            for a in 0..az.len() {
                prop_assert!((p.gain_db(e, a) - q.gain_db(e, a)).abs() < 1e-12 || p.gain[(e, a)] < 1e-3);
            }
        }
    }
}
