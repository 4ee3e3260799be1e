//! Long-term line-of-sight channel, per-subband local scattering, and their
//! product `H[k] = H_L[k] * H_R`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, shape, Result};
use crate::geometry::{departure_geometry, distance3, ArrayGeometry, ObservationGrid};
use crate::netmap::{sector_gain, SectorPattern};
use crate::rng::{complex_gaussian, stream_rng, Stream};
use crate::{CMatrix, Complex64};

/// Reference distance of the path-gain law, m.
pub const REFERENCE_DISTANCE: f64 = 1.0;

/// Mean power of each first off-diagonal entry in the banded scatter model.
pub const BANDED_COUPLING_POWER: f64 = 0.25;

/// Amplitude path gain: free-space loss at the 1 m reference distance, then
/// a `(d_ref / d)^exponent` power decay.
pub fn path_gain(distance: f64, wavelength: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(invalid(format!("distance {distance} m")));
    }
    if !(wavelength > 0.0) {
        return Err(invalid(format!("wavelength {wavelength} m")));
    }
    let reference = wavelength / (4.0 * PI * REFERENCE_DISTANCE);
    Ok(reference * (REFERENCE_DISTANCE / distance).powf(exponent / 2.0))
}

/// Path loss in dB (positive number) for the same law as [`path_gain`].
pub fn path_loss_db(distance: f64, wavelength: f64, exponent: f64) -> Result<f64> {
    Ok(-20.0 * path_gain(distance, wavelength, exponent)?.log10())
}

/// Radiation pattern applied per observation point when building `H_R`.
///
/// The pattern is evaluated at the array reference point, so it scales whole
/// rows and leaves every row a pure-phase element response.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ElementPattern {
    #[default]
    Isotropic,
    Sector(SectorPattern),
}

impl ElementPattern {
    fn amplitude(&self, azimuth: f64, elevation: f64) -> f64 {
        match self {
            Self::Isotropic => 1.0,
            Self::Sector(p) => {
                let g = sector_gain(p, azimuth, elevation + p.downtilt);
                10f64.powf(g / 20.0)
            }
        }
    }
}

/// `L x N` line-of-sight channel from array elements to observation points.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTermChannel {
    pub matrix: CMatrix,
    pub wavelength: f64,
    pub path_loss_exponent: f64,
}

impl LongTermChannel {
    pub fn locations(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn elements(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Entry `(l, n)` is `gain(d_l) * pattern(l) * exp(-j 2π d_ln / λ)` where
/// `d_l` is measured from the array reference and `d_ln` is the exact
/// element-to-point distance.
pub fn build_long_term_channel(
    array: &ArrayGeometry,
    grid: &ObservationGrid,
    tower_height: f64,
    exponent: f64,
    pattern: &ElementPattern,
) -> Result<LongTermChannel> {
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(invalid(format!("path-loss exponent {exponent}")));
    }
    let reference = [grid.site[0], grid.site[1], tower_height];
    let elements = array.world_positions(reference, grid.boresight);
    let lambda = array.wavelength;
    let k0 = 2.0 * PI / lambda;

    let mut matrix = CMatrix::zeros(grid.len(), elements.len());
    for (l, &point) in grid.points.iter().enumerate() {
        let dep = departure_geometry(grid.site, tower_height, grid.boresight, point)?;
        let amplitude = path_gain(dep.distance, lambda, exponent)?
            * pattern.amplitude(dep.azimuth, dep.elevation);
        for (n, &element) in elements.iter().enumerate() {
            let d = distance3(point, element);
            if d == 0.0 {
                return Err(invalid(format!("observation point {l} coincides with element {n}")));
            }
            matrix[(l, n)] = Complex64::from_polar(amplitude, -k0 * d);
        }
    }
    Ok(LongTermChannel { matrix, wavelength: lambda, path_loss_exponent: exponent })
}

/// Structure of the local-scatter matrices `H_L[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum ScatterModel {
    #[serde(rename = "identity")]
    Identity,
    /// Independent Rayleigh fading per location, unit mean power.
    #[default]
    #[serde(rename = "diagonal")]
    DiagonalFading,
    /// Tridiagonal: Rayleigh diagonal plus weaker coupling to neighboring
    /// locations in grid order.
    #[serde(rename = "banded")]
    BandedMixing,
}

impl ScatterModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::DiagonalFading => "diagonal",
            Self::BandedMixing => "banded",
        }
    }
}

impl fmt::Display for ScatterModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScatterModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "diagonal" | "diagonal-fading" => Ok(Self::DiagonalFading),
            "banded" | "banded-mixing" => Ok(Self::BandedMixing),
            other => Err(invalid(format!("unknown scatter model `{other}`"))),
        }
    }
}

/// One `L x L` local-scatter matrix stored by its nonzero diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandScatterChannel {
    /// Subband index, 1-based.
    pub subband: usize,
    pub model: ScatterModel,
    dim: usize,
    /// `(offset, values)`: entry `(i, i + offset)` is `values[min(i, i + offset)]`.
    diagonals: Vec<(isize, Vec<Complex64>)>,
}

impl SubbandScatterChannel {
    pub fn identity(subband: usize, dim: usize) -> Self {
        Self { subband, model: ScatterModel::Identity, dim, diagonals: Vec::new() }
    }

    pub fn diagonal(subband: usize, values: Vec<Complex64>) -> Self {
        Self {
            subband,
            model: ScatterModel::DiagonalFading,
            dim: values.len(),
            diagonals: vec![(0, values)],
        }
    }

    /// Tridiagonal matrix from its main, upper and lower diagonals.
    pub fn tridiagonal(
        subband: usize,
        main: Vec<Complex64>,
        upper: Vec<Complex64>,
        lower: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = main.len();
        let off = dim.saturating_sub(1);
        if upper.len() != off || lower.len() != off {
            return Err(shape(format!(
                "off-diagonals of length {}/{} for dimension {dim}",
                upper.len(),
                lower.len()
            )));
        }
        Ok(Self {
            subband,
            model: ScatterModel::BandedMixing,
            dim,
            diagonals: vec![(0, main), (1, upper), (-1, lower)],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = match self.model {
            ScatterModel::Identity => CMatrix::identity(self.dim, self.dim),
            _ => CMatrix::zeros(self.dim, self.dim),
        };
        for (offset, values) in &self.diagonals {
            for (idx, v) in values.iter().enumerate() {
                let (i, j) = diagonal_position(*offset, idx);
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// `H_L * rhs` without materializing `H_L`.
    pub fn apply(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.nrows() != self.dim {
            return Err(shape(format!(
                "scatter matrix is {0}x{0}, right factor has {1} rows",
                self.dim,
                rhs.nrows()
            )));
        }
        if self.model == ScatterModel::Identity {
            return Ok(rhs.clone());
        }
        let mut out = CMatrix::zeros(rhs.nrows(), rhs.ncols());
        for c in 0..rhs.ncols() {
            for (offset, values) in &self.diagonals {
                for (idx, v) in values.iter().enumerate() {
                    let (i, j) = diagonal_position(*offset, idx);
                    out[(i, c)] += v * rhs[(j, c)];
                }
            }
        }
        Ok(out)
    }
}

fn diagonal_position(offset: isize, idx: usize) -> (usize, usize) {
    if offset >= 0 {
        (idx, idx + offset as usize)
    } else {
        (idx + offset.unsigned_abs(), idx)
    }
}

/// `K` local-scatter matrices for `L` locations. Subband `k` draws from its
/// own random stream, so each matrix depends only on `(seed, k, L, model)`.
pub fn sample_local_scatter(
    locations: usize,
    subbands: usize,
    model: ScatterModel,
    seed: u64,
) -> Result<Vec<SubbandScatterChannel>> {
    if locations == 0 || subbands == 0 {
        return Err(invalid(format!("L = {locations}, K = {subbands}")));
    }
    let channels = (1..=subbands)
        .map(|k| {
            let mut rng = stream_rng(seed, Stream::Scatter, k as u64);
            match model {
                ScatterModel::Identity => SubbandScatterChannel::identity(k, locations),
                ScatterModel::DiagonalFading => SubbandScatterChannel::diagonal(
                    k,
                    (0..locations).map(|_| complex_gaussian(&mut rng, 1.0)).collect(),
                ),
                ScatterModel::BandedMixing => {
                    let main = (0..locations).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                    let mut off = || -> Vec<Complex64> {
                        (1..locations)
                            .map(|_| complex_gaussian(&mut rng, BANDED_COUPLING_POWER))
                            .collect()
                    };
                    let upper = off();
                    let lower = off();
                    SubbandScatterChannel::tridiagonal(k, main, upper, lower)
                        .expect("diagonal lengths are consistent by construction")
                }
            }
        })
        .collect();
    Ok(channels)
}

/// Per-subband channels together with the factors they were built from.
#[derive(Debug, Clone)]
pub struct CompositeChannel {
    pub scatter: Vec<SubbandScatterChannel>,
    pub longterm: CMatrix,
    pub subbands: Vec<CMatrix>,
}

impl CompositeChannel {
    pub fn num_subbands(&self) -> usize {
        self.subbands.len()
    }

    pub fn locations(&self) -> usize {
        self.longterm.nrows()
    }

    pub fn elements(&self) -> usize {
        self.longterm.ncols()
    }
}

pub fn compose_channel(scatter: &[SubbandScatterChannel], longterm: &CMatrix) -> Result<CompositeChannel> {
    if scatter.is_empty() {
        return Err(invalid("no subbands"));
    }
    let subbands = scatter
        .iter()
        .map(|h| h.apply(longterm))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositeChannel { scatter: scatter.to_vec(), longterm: longterm.clone(), subbands })
}
