//! Far-field patterns and per-element power maps for beamforming weights.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, shape, Result};
use crate::geometry::ArrayGeometry;
use crate::{CVector, Complex64};

/// Lower clamp applied to exported pattern values, dB.
pub const EXPORT_FLOOR_DB: f64 = -60.0;

/// Unit direction in the array frame (+x is broadside, +y horizontal, +z up).
pub fn direction(azimuth_deg: f64, elevation_deg: f64) -> [f64; 3] {
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    [ce * ca, ce * sa, se]
}

/// `a_n = exp(+j 2π (u · p_n) / λ)`.
pub fn steering_vector(array: &ArrayGeometry, azimuth_deg: f64, elevation_deg: f64) -> CVector {
    let u = direction(azimuth_deg, elevation_deg);
    let k0 = 2.0 * PI / array.wavelength;
    CVector::from_iterator(
        array.len(),
        array
            .element_positions
            .iter()
            .map(|p| Complex64::from_polar(1.0, k0 * (u[0] * p[0] + u[1] * p[1] + u[2] * p[2]))),
    )
}

/// Normalized array response `|aᴴ w|² / ‖w‖²` in one direction (linear).
pub fn pattern_gain(array: &ArrayGeometry, w: &CVector, azimuth_deg: f64, elevation_deg: f64) -> f64 {
    let a = steering_vector(array, azimuth_deg, elevation_deg);
    a.dotc(w).norm_sqr() / w.norm_squared()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub azimuth: Vec<f64>,
    pub elevation: Vec<f64>,
    /// Linear gain, `elevation.len() x azimuth.len()`.
    pub gain: DMatrix<f64>,
    pub weight_norm: f64,
}

impl BeamPattern {
    pub fn gain_db(&self, el_idx: usize, az_idx: usize) -> f64 {
        10.0 * self.gain[(el_idx, az_idx)].log10()
    }

    /// Gain in dB clamped at [`EXPORT_FLOOR_DB`].
    pub fn gain_db_clamped(&self, el_idx: usize, az_idx: usize) -> f64 {
        self.gain_db(el_idx, az_idx).max(EXPORT_FLOOR_DB)
    }

    /// `(azimuth, elevation, linear gain)` of the strongest cell; first in
    /// grid order on ties.
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (0, 0);
        for e in 0..self.elevation.len() {
            for a in 0..self.azimuth.len() {
                if self.gain[(e, a)] > self.gain[best] {
                    best = (e, a);
                }
            }
        }
        (self.azimuth[best.1], self.elevation[best.0], self.gain[best])
    }
}

/// Inclusive grid `start, start + step, ..., stop`.
pub fn angle_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(invalid(format!("angle grid {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub fn beam_pattern(array: &ArrayGeometry, w: &CVector, azimuth: &[f64], elevation: &[f64]) -> Result<BeamPattern> {
    if w.len() != array.len() {
        return Err(shape(format!("{} weights for {} elements", w.len(), array.len())));
    }
    let weight_norm = w.norm();
    if !(weight_norm > 0.0) {
        return Err(invalid("zero weight vector"));
    }
    if azimuth.is_empty() || elevation.is_empty() {
        return Err(invalid("empty angle grid"));
    }
    if !strictly_increasing(azimuth) || !strictly_increasing(elevation) {
        return Err(invalid("angle grids must be strictly increasing"));
    }
    let mut gain = DMatrix::zeros(elevation.len(), azimuth.len());
    for (e, &el) in elevation.iter().enumerate() {
        for (a, &az) in azimuth.iter().enumerate() {
            gain[(e, a)] = pattern_gain(array, w, az, el);
        }
    }
    Ok(BeamPattern { azimuth: azimuth.to_vec(), elevation: elevation.to_vec(), gain, weight_norm })
}

/// Pattern of the field radiated by transmit weights `w`, `|aᵀ w|² / ‖w‖²`.
///
/// A row of the long-term channel toward direction `u` is `aᵀ(u)` up to a
/// common factor, so this is the pattern that matches the channel; it is
/// [`beam_pattern`] evaluated on `conj(w)`.
pub fn transmit_pattern(array: &ArrayGeometry, w: &CVector, azimuth: &[f64], elevation: &[f64]) -> Result<BeamPattern> {
    beam_pattern(array, &w.conjugate(), azimuth, elevation)
}

/// Per-element output power `|w_n|²` laid out as `rows x columns`.
///
/// Row 0 is the bottom row of the array; column 0 is the first column
/// along +y.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementPowerMap {
    /// Normalized to a peak of 1.
    pub power: DMatrix<f64>,
    /// Unnormalized `|w_n|²` in the same layout.
    pub raw: DMatrix<f64>,
}

impl ElementPowerMap {
    /// `Σ |w_n|²`.
    pub fn total(&self) -> f64 {
        self.raw.iter().sum()
    }
}

pub fn element_power(array: &ArrayGeometry, w: &CVector) -> Result<ElementPowerMap> {
    if w.len() != array.len() {
        return Err(shape(format!("{} weights for {} elements", w.len(), array.len())));
    }
    let rows = array.rows_per_column;
    let cols = array.columns;
    let raw = DMatrix::from_fn(rows, cols, |r, c| w[array.element_index(r, c)].norm_sqr());
    let peak = raw.max();
    let power = if peak > 0.0 { &raw / peak } else { raw.clone() };
    Ok(ElementPowerMap { power, raw })
}
