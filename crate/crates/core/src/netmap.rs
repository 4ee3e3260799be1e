//! Network-level SINR over the hexagonal layout, using a parabolic sector
//! antenna pattern with downtilt.

use crate::channel::path_loss_db;
use crate::error::{invalid, Error, Result};
use crate::geometry::{departure_geometry, wrap_degrees, CellLayout, Point2};

/// Thermal noise density, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Parabolic macro-sector pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPattern {
    /// Horizontal 3 dB beamwidth, degrees.
    pub h_beamwidth: f64,
    /// Vertical 3 dB beamwidth, degrees.
    pub v_beamwidth: f64,
    /// Maximum attenuation, dB.
    pub front_to_back: f64,
    /// Boresight gain, dBi.
    pub max_gain: f64,
    /// Electrical downtilt, degrees below the horizon.
    pub downtilt: f64,
}

impl Default for SectorPattern {
    fn default() -> Self {
        Self { h_beamwidth: 65.0, v_beamwidth: 10.0, front_to_back: 30.0, max_gain: 15.0, downtilt: 6.0 }
    }
}

impl SectorPattern {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_beamwidth > 0.0 && self.v_beamwidth > 0.0) {
            return Err(invalid("sector beamwidths must be positive"));
        }
        if !(self.front_to_back > 0.0) {
            return Err(invalid("front-to-back ratio must be positive"));
        }
        Ok(())
    }
}

/// Gain in dBi at `azimuth` off boresight and `elevation` off the
/// downtilted boresight, both in degrees.
pub fn sector_gain(pattern: &SectorPattern, azimuth: f64, elevation: f64) -> f64 {
    let az = wrap_degrees(azimuth) / pattern.h_beamwidth;
    let el = elevation / pattern.v_beamwidth;
    let attenuation = (12.0 * az * az + 12.0 * el * el).min(pattern.front_to_back);
    pattern.max_gain - attenuation
}

/// Link-budget parameters for [`compute_sinr_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Transmit power per sector, W.
    pub tx_power: f64,
    /// Hz.
    pub bandwidth: f64,
    /// dB.
    pub noise_figure: f64,
    pub path_loss_exponent: f64,
    /// Carrier wavelength, m.
    pub wavelength: f64,
    /// Receiver height above ground, m.
    pub receiver_height: f64,
}

impl LinkBudget {
    pub fn noise_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth.log10() + self.noise_figure
    }

    pub fn tx_power_dbm(&self) -> f64 {
        10.0 * (self.tx_power * 1e3).log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrMap {
    pub points: Vec<Point2>,
    pub sinr_db: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// Flat sector index `site * sectors_per_site + sector`.
    pub serving_sector: Vec<usize>,
    pub noise_dbm: f64,
}

impl SinrMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Per-sector received power in dBm at one ground point.
pub fn received_powers_dbm(
    layout: &CellLayout,
    pattern: &SectorPattern,
    budget: &LinkBudget,
    point: Point2,
) -> Result<Vec<f64>> {
    let rx = [point[0], point[1], budget.receiver_height];
    let tx_dbm = budget.tx_power_dbm();
    let mut out = Vec::with_capacity(layout.site_positions.len() * layout.sectors_per_site);
    for &site in &layout.site_positions {
        for &boresight in &layout.boresight_azimuths {
            let dep = departure_geometry(site, layout.tower_height, boresight, rx)?;
            let gain = sector_gain(pattern, dep.azimuth, dep.elevation + layout.downtilt);
            let loss = path_loss_db(dep.distance, budget.wavelength, budget.path_loss_exponent)?;
            out.push(tx_dbm + gain - loss);
        }
    }
    Ok(out)
}

/// Best-server SINR at every grid point; all other sectors interfere.
pub fn compute_sinr_map(
    layout: &CellLayout,
    pattern: &SectorPattern,
    budget: &LinkBudget,
    grid: &[Point2],
) -> Result<SinrMap> {
    pattern.validate()?;
    if !(budget.tx_power > 0.0 && budget.bandwidth > 0.0) {
        return Err(invalid("transmit power and bandwidth must be positive"));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let noise_dbm = budget.noise_dbm();
    let noise_mw = 10f64.powf(noise_dbm / 10.0);

    let mut sinr_db = Vec::with_capacity(grid.len());
    let mut snr_db = Vec::with_capacity(grid.len());
    let mut serving_sector = Vec::with_capacity(grid.len());
    for &p in grid {
        let powers = received_powers_dbm(layout, pattern, budget, p)?;
        let (best, best_dbm) = powers
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let interference_mw: f64 = powers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != best)
            .map(|(_, v)| 10f64.powf(v / 10.0))
            .sum();
        let signal_mw = 10f64.powf(best_dbm / 10.0);
        sinr_db.push(10.0 * (signal_mw / (interference_mw + noise_mw)).log10());
        snr_db.push(10.0 * (signal_mw / noise_mw).log10());
        serving_sector.push(best);
    }
    Ok(SinrMap { points: grid.to_vec(), sinr_db, snr_db, serving_sector, noise_dbm })
}

/// Square-lattice points within `radius` of the origin, replicated under
/// 120° rotations.
///
/// The base lattice covers azimuths in `[0°, 120°)`; the output holds the
/// base points followed by their 120° and 240° images, so rows `i`,
/// `i + n` and `i + 2n` are rotations of each other.
pub fn symmetric_map_grid(radius: f64, spacing: f64) -> Result<Vec<Point2>> {
    if !(radius > 0.0 && spacing > 0.0) {
        return Err(invalid(format!("map radius {radius} m, spacing {spacing} m")));
    }
    let span = (radius / spacing).ceil() as i64;
    let mut base = Vec::new();
    for i in -span..=span {
        for j in -span..=span {
            let p = [(i as f64 + 0.5) * spacing, (j as f64 + 0.5) * spacing];
            let az = p[1].atan2(p[0]).to_degrees().rem_euclid(360.0);
            if p[0].hypot(p[1]) <= radius && az < 120.0 {
                base.push(p);
            }
        }
    }
    if base.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut out = base.clone();
    for rot in [120.0, 240.0] {
        out.extend(base.iter().map(|&p| crate::geometry::rotate2(p, rot)));
    }
    Ok(out)
}
