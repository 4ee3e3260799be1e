//! Array, cell and observation-grid geometry.
//!
//! Frame conventions: the center site sits at the origin of a flat x-y
//! ground plane with z up. Each sector's array reference point is at
//! `(site.x, site.y, tower_height)`. Array element positions are stored in
//! the array's own frame, facing +x, with columns along y and rows along z;
//! they are rotated by the sector boresight when placed in the world.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::SPEED_OF_LIGHT;

/// Vertical pitch within a column, in wavelengths.
pub const VERTICAL_PITCH_WAVELENGTHS: f64 = 0.7;
/// Horizontal pitch between columns, in wavelengths.
pub const HORIZONTAL_PITCH_WAVELENGTHS: f64 = 0.5;

/// Maximum observation height (top of the local-scatterer layer).
pub const MAX_OBSERVATION_HEIGHT: f64 = 10.0;

pub type Point3 = [f64; 3];
pub type Point2 = [f64; 2];

/// Planar staggered array.
///
/// Elements are indexed column-major: element `c * rows_per_column + r` is
/// row `r` (counted from the bottom) of column `c` (counted along +y).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub element_positions: Vec<Point3>,
    pub carrier_frequency: f64,
    pub wavelength: f64,
    pub columns: usize,
    pub rows_per_column: usize,
}

impl ArrayGeometry {
    /// Array with explicit element positions (array frame, meters).
    ///
    /// `columns * rows_per_column` must equal the number of positions.
    pub fn from_positions(
        positions: Vec<Point3>,
        columns: usize,
        rows_per_column: usize,
        carrier_frequency: f64,
    ) -> Result<Self> {
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(invalid(format!("carrier frequency {carrier_frequency} Hz")));
        }
        if positions.is_empty() || columns * rows_per_column != positions.len() {
            return Err(invalid(format!(
                "{} positions do not fill a {rows_per_column}x{columns} layout",
                positions.len()
            )));
        }
        Ok(Self {
            element_positions: positions,
            carrier_frequency,
            wavelength: SPEED_OF_LIGHT / carrier_frequency,
            columns,
            rows_per_column,
        })
    }

    pub fn len(&self) -> usize {
        self.element_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_positions.is_empty()
    }

    pub fn element_index(&self, row: usize, column: usize) -> usize {
        column * self.rows_per_column + row
    }

    /// Element positions in world coordinates for an array mounted at
    /// `reference` and facing `boresight_deg` azimuth.
    pub fn world_positions(&self, reference: Point3, boresight_deg: f64) -> Vec<Point3> {
        let (s, c) = boresight_deg.to_radians().sin_cos();
        self.element_positions
            .iter()
            .map(|p| {
                [
                    reference[0] + c * p[0] - s * p[1],
                    reference[1] + s * p[0] + c * p[1],
                    reference[2] + p[2],
                ]
            })
            .collect()
    }
}

/// Staggered `columns x rows` array at `carrier_frequency`, centered on its
/// centroid. Odd columns are raised by half the vertical pitch.
pub fn build_array(columns: usize, rows: usize, carrier_frequency: f64) -> Result<ArrayGeometry> {
    if columns == 0 || rows == 0 {
        return Err(invalid(format!("array dimensions {columns}x{rows}")));
    }
    if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
        return Err(invalid(format!("carrier frequency {carrier_frequency} Hz")));
    }
    let wavelength = SPEED_OF_LIGHT / carrier_frequency;
    let dy = HORIZONTAL_PITCH_WAVELENGTHS * wavelength;
    let dz = VERTICAL_PITCH_WAVELENGTHS * wavelength;

    let mut positions = Vec::with_capacity(columns * rows);
    for c in 0..columns {
        let stagger = if c % 2 == 1 { dz / 2.0 } else { 0.0 };
        for r in 0..rows {
            positions.push([0.0, c as f64 * dy, r as f64 * dz + stagger]);
        }
    }
    let n = positions.len() as f64;
    let mut centroid = [0.0; 3];
    for p in &positions {
        for (acc, v) in centroid.iter_mut().zip(p) {
            *acc += v / n;
        }
    }
    for p in &mut positions {
        for (v, m) in p.iter_mut().zip(&centroid) {
            *v -= m;
        }
    }
    ArrayGeometry::from_positions(positions, columns, rows, carrier_frequency)
}

/// Hexagonal multi-site layout.
///
/// Each site is the center of a hexagon with circumradius
/// `inter_site_distance / sqrt(3)` whose vertices point at azimuths
/// 0°, 60°, ..., so that three sectors with boresights 0°, 120°, 240° each
/// own one rhombus-shaped third of the hexagon.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    pub site_positions: Vec<Point2>,
    pub inter_site_distance: f64,
    pub sectors_per_site: usize,
    pub tower_height: f64,
    pub boresight_azimuths: Vec<f64>,
    pub downtilt: f64,
}

impl CellLayout {
    /// Center site plus `rings` rings of neighbors (19 sites for 2 rings),
    /// three sectors per site.
    pub fn hexagonal(rings: usize, inter_site_distance: f64, tower_height: f64, downtilt: f64) -> Result<Self> {
        let sites = hex_sites(rings, inter_site_distance);
        Self::new(sites, inter_site_distance, tower_height, vec![0.0, 120.0, 240.0], downtilt)
    }

    pub fn new(
        site_positions: Vec<Point2>,
        inter_site_distance: f64,
        tower_height: f64,
        boresight_azimuths: Vec<f64>,
        downtilt: f64,
    ) -> Result<Self> {
        if site_positions.is_empty() {
            return Err(invalid("layout has no sites"));
        }
        if !(inter_site_distance > 0.0) {
            return Err(invalid(format!("inter-site distance {inter_site_distance} m")));
        }
        if !(tower_height > 0.0) {
            return Err(invalid(format!("tower height {tower_height} m")));
        }
        if boresight_azimuths.is_empty() {
            return Err(invalid("layout has no sectors"));
        }
        Ok(Self {
            site_positions,
            inter_site_distance,
            sectors_per_site: boresight_azimuths.len(),
            tower_height,
            boresight_azimuths,
            downtilt,
        })
    }

    /// Circumradius of the per-site hexagon.
    pub fn cell_radius(&self) -> f64 {
        self.inter_site_distance / 3f64.sqrt()
    }

    /// Array reference point of a site.
    pub fn array_reference(&self, site: usize) -> Point3 {
        let s = self.site_positions[site];
        [s[0], s[1], self.tower_height]
    }

    /// Counter-clockwise polygon of sector `sector` at `site`: the third of
    /// the site hexagon within ±60° of the sector boresight.
    pub fn sector_polygon(&self, site: usize, sector: usize) -> Vec<Point2> {
        let s = self.site_positions[site];
        let b = self.boresight_azimuths[sector];
        let r = self.cell_radius();
        let vertex = |deg: f64| {
            let (sn, cs) = deg.to_radians().sin_cos();
            [s[0] + r * cs, s[1] + r * sn]
        };
        vec![s, vertex(b - 60.0), vertex(b), vertex(b + 60.0)]
    }
}

fn hex_sites(rings: usize, isd: f64) -> Vec<Point2> {
    // Axial hex coordinates; neighbor directions at 30° + 60°·i.
    let basis_a = [isd * (30f64).to_radians().cos(), isd * (30f64).to_radians().sin()];
    let basis_b = [isd * (90f64).to_radians().cos(), isd * (90f64).to_radians().sin()];
    let r = rings as i64;
    let mut sites = vec![[0.0, 0.0]];
    for ring in 1..=r {
        // Walk the ring starting from direction 30° scaled by `ring`.
        let dirs: [(i64, i64); 6] = [(-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)];
        let (mut q, mut p) = (ring, 0i64);
        for &(dq, dp) in &dirs {
            for _ in 0..ring {
                sites.push([
                    q as f64 * basis_a[0] + p as f64 * basis_b[0],
                    q as f64 * basis_a[1] + p as f64 * basis_b[1],
                ]);
                q += dq;
                p += dp;
            }
        }
    }
    sites
}

/// Ray-casting point-in-polygon test.
pub fn point_in_polygon(point: Point2, polygon: &[Point2]) -> bool {
    let (x, y) = (point[0], point[1]);
    let mut inside = false;
    let mut j = polygon.len() - 1;
    for i in 0..polygon.len() {
        let (xi, yi) = (polygon[i][0], polygon[i][1]);
        let (xj, yj) = (polygon[j][0], polygon[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Observation points filling one sector of the center site.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGrid {
    pub points: Vec<Point3>,
    pub height_range: [f64; 2],
    pub sector_id: usize,
    /// Ground position of the serving site.
    pub site: Point2,
    /// Boresight azimuth of the sector, degrees.
    pub boresight: f64,
    pub horizontal_spacing: f64,
}

impl ObservationGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Square lattice anchored at the sector centroid, clipped to the sector
/// polygon of the center site, with one point per height level.
///
/// The lattice axes follow the sector boresight, so the three sectors of a
/// site get congruent grids. Ordering is by lattice x index, then y index,
/// then height (in the order given).
pub fn build_observation_grid(
    layout: &CellLayout,
    sector_id: usize,
    horizontal_spacing: f64,
    height_levels: &[f64],
) -> Result<ObservationGrid> {
    if sector_id >= layout.sectors_per_site {
        return Err(invalid(format!("sector {sector_id} of {}", layout.sectors_per_site)));
    }
    if !(horizontal_spacing > 0.0 && horizontal_spacing.is_finite()) {
        return Err(invalid(format!("grid spacing {horizontal_spacing} m")));
    }
    if height_levels.is_empty() {
        return Err(invalid("no height levels"));
    }
    if let Some(h) = height_levels
        .iter()
        .find(|h| !(0.0..=MAX_OBSERVATION_HEIGHT).contains(*h))
    {
        return Err(invalid(format!("height {h} m outside [0, {MAX_OBSERVATION_HEIGHT}]")));
    }

    let polygon = layout.sector_polygon(0, sector_id);
    let site = layout.site_positions[0];
    let boresight = layout.boresight_azimuths[sector_id];
    let (sn, cs) = boresight.to_radians().sin_cos();
    let r = layout.cell_radius();
    // Rhombus centroid sits at half the circumradius along boresight.
    let centroid_offset = r / 2.0;
    let span = (r / horizontal_spacing).ceil() as i64 + 1;

    let mut points = Vec::new();
    for i in -span..=span {
        let lx = centroid_offset + i as f64 * horizontal_spacing;
        for j in -span..=span {
            let ly = j as f64 * horizontal_spacing;
            let p = [site[0] + cs * lx - sn * ly, site[1] + sn * lx + cs * ly];
            if point_in_polygon(p, &polygon) {
                points.extend(height_levels.iter().map(|&h| [p[0], p[1], h]));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let lo = height_levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = height_levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ObservationGrid {
        points,
        height_range: [lo, hi],
        sector_id,
        site,
        boresight,
        horizontal_spacing,
    })
}

/// Direction and range from an array reference point to an observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureAngles {
    /// Degrees from boresight, in (-180, 180].
    pub azimuth: f64,
    /// Degrees above the horizontal, negative below.
    pub elevation: f64,
    pub distance: f64,
}

/// Wrap an angle in degrees into (-180, 180].
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut a = deg % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Angles of departure from the array at `(site, tower_height)` toward `point`.
pub fn departure_geometry(
    site: Point2,
    tower_height: f64,
    boresight_deg: f64,
    point: Point3,
) -> Result<DepartureAngles> {
    let dx = point[0] - site[0];
    let dy = point[1] - site[1];
    let dz = point[2] - tower_height;
    let horizontal = dx.hypot(dy);
    let distance = horizontal.hypot(dz);
    if distance == 0.0 {
        return Err(invalid("observation point coincides with the array reference"));
    }
    let azimuth = wrap_degrees(dy.atan2(dx).to_degrees() - boresight_deg);
    let elevation = dz.atan2(horizontal).to_degrees();
    Ok(DepartureAngles { azimuth, elevation, distance })
}

pub(crate) fn distance3(a: Point3, b: Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Rotate a ground point about the origin.
pub fn rotate2(p: Point2, deg: f64) -> Point2 {
    let (s, c) = (deg * PI / 180.0).sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}
