//! Experiment configuration.
//!
//! The file is TOML restricted to flat `key = value` pairs, optionally grouped
//! under the sections `[geometry]`, `[channel]`, `[analysis]`, `[network]`,
//! `[patterns]` and `[output]`. Key names are unique across sections, so a key
//! may also appear at the top level. Anything not given takes the default
//! listed on [`ExperimentConfig::default`].

use serde::Serialize;
use thiserror::Error;

use crate::channel::{ElementPattern, ScatterModel};
use crate::geometry::MAX_OBSERVATION_HEIGHT;
use crate::netmap::SectorPattern;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { key: String, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Isotropic,
    Sector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryConfig {
    pub columns: usize,
    pub rows: usize,
    pub carrier_frequency: f64,
    pub inter_site_distance: f64,
    pub tower_height: f64,
    pub grid_spacing: f64,
    pub height_levels: Vec<f64>,
    pub sector: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub path_loss_exponent: f64,
    pub element_pattern: PatternKind,
    pub scatter_model: ScatterModel,
    pub subbands: usize,
    pub seed: u64,
    pub noise_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub rank_budget: usize,
    pub rf_chains: usize,
    pub sweep_max_rank: usize,
    pub perturb_beams: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkConfig {
    pub rings: usize,
    pub sectors_per_site: usize,
    pub tx_power: f64,
    pub bandwidth: f64,
    pub downtilt: f64,
    pub noise_figure: f64,
    pub h_beamwidth: f64,
    pub v_beamwidth: f64,
    pub front_to_back: f64,
    pub max_gain: f64,
    pub network_path_loss_exponent: f64,
    pub map_spacing: f64,
    pub map_radius: f64,
    pub receiver_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternConfig {
    pub azimuth_min: f64,
    pub azimuth_max: f64,
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub angle_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub analysis: AnalysisConfig,
    pub network: NetworkConfig,
    pub patterns: PatternConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    /// 4x12 staggered array at 2 GHz, 1.732 km inter-site distance, 32 m
    /// towers, 20 W, 5 MHz, 6° downtilt; ~1730 observation points; 25
    /// subbands; rank budget 4.
    fn default() -> Self {
        let sector = SectorPattern::default();
        Self {
            geometry: GeometryConfig {
                columns: 4,
                rows: 12,
                carrier_frequency: 2e9,
                inter_site_distance: 1732.0,
                tower_height: 32.0,
                grid_spacing: 38.7,
                height_levels: vec![1.5, 5.0, 8.5],
                sector: 0,
            },
            channel: ChannelConfig {
                path_loss_exponent: 3.76,
                element_pattern: PatternKind::Sector,
                scatter_model: ScatterModel::DiagonalFading,
                subbands: 25,
                seed: 1,
                noise_power: 0.0,
            },
            analysis: AnalysisConfig { rank_budget: 4, rf_chains: 4, sweep_max_rank: 8, perturb_beams: false },
            network: NetworkConfig {
                rings: 2,
                sectors_per_site: 3,
                tx_power: 20.0,
                bandwidth: 5e6,
                downtilt: sector.downtilt,
                noise_figure: 9.0,
                h_beamwidth: sector.h_beamwidth,
                v_beamwidth: sector.v_beamwidth,
                front_to_back: sector.front_to_back,
                max_gain: sector.max_gain,
                network_path_loss_exponent: 3.76,
                map_spacing: 25.0,
                map_radius: 1732.0,
                receiver_height: 1.5,
            },
            patterns: PatternConfig {
                azimuth_min: -90.0,
                azimuth_max: 90.0,
                elevation_min: -90.0,
                elevation_max: 30.0,
                angle_step: 1.0,
            },
            output: OutputConfig { directory: "out".into() },
        }
    }
}

const SECTIONS: [&str; 6] = ["geometry", "channel", "analysis", "network", "patterns", "output"];

impl ExperimentConfig {
    pub fn sector_pattern(&self) -> SectorPattern {
        let n = &self.network;
        SectorPattern {
            h_beamwidth: n.h_beamwidth,
            v_beamwidth: n.v_beamwidth,
            front_to_back: n.front_to_back,
            max_gain: n.max_gain,
            downtilt: n.downtilt,
        }
    }

    pub fn element_pattern(&self) -> ElementPattern {
        match self.channel.element_pattern {
            PatternKind::Isotropic => ElementPattern::Isotropic,
            PatternKind::Sector => ElementPattern::Sector(self.sector_pattern()),
        }
    }

    pub fn num_elements(&self) -> usize {
        self.geometry.columns * self.geometry.rows
    }

    /// Sectioned TOML text that [`parse_config`] reads back unchanged.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let g = &self.geometry;
        if g.columns == 0 || g.rows == 0 {
            return bad(format!("array is {}x{}", g.rows, g.columns));
        }
        let positive = [
            ("carrier_frequency", g.carrier_frequency),
            ("inter_site_distance", g.inter_site_distance),
            ("tower_height", g.tower_height),
            ("grid_spacing", g.grid_spacing),
            ("path_loss_exponent", self.channel.path_loss_exponent),
            ("tx_power", self.network.tx_power),
            ("bandwidth", self.network.bandwidth),
            ("h_beamwidth", self.network.h_beamwidth),
            ("v_beamwidth", self.network.v_beamwidth),
            ("front_to_back", self.network.front_to_back),
            ("network_path_loss_exponent", self.network.network_path_loss_exponent),
            ("map_spacing", self.network.map_spacing),
            ("map_radius", self.network.map_radius),
            ("angle_step", self.patterns.angle_step),
        ];
        if let Some((k, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return bad(format!("`{k}` must be positive, got {v}"));
        }
        if g.height_levels.is_empty() {
            return bad("`height_levels` is empty".into());
        }
        if let Some(h) = g.height_levels.iter().find(|h| !(0.0..=MAX_OBSERVATION_HEIGHT).contains(*h)) {
            return bad(format!("height level {h} outside [0, {MAX_OBSERVATION_HEIGHT}]"));
        }
        if self.network.sectors_per_site == 0 || g.sector >= self.network.sectors_per_site {
            return bad(format!("sector {} of {}", g.sector, self.network.sectors_per_site));
        }
        if self.channel.subbands == 0 {
            return bad("`subbands` must be at least 1".into());
        }
        if self.channel.seed > i64::MAX as u64 {
            return bad("`seed` must fit in a signed 64-bit integer".into());
        }
        if !(self.channel.noise_power >= 0.0 && self.channel.noise_power.is_finite()) {
            return bad(format!("`noise_power` {}", self.channel.noise_power));
        }
        let a = &self.analysis;
        if a.rank_budget == 0 || a.rank_budget > self.num_elements() {
            return bad(format!("rank budget {} outside 1..={}", a.rank_budget, self.num_elements()));
        }
        if a.rf_chains == 0 || a.sweep_max_rank == 0 {
            return bad("`rf_chains` and `sweep_max_rank` must be at least 1".into());
        }
        let p = &self.patterns;
        if p.azimuth_max < p.azimuth_min || p.elevation_max < p.elevation_min {
            return bad("pattern angle ranges are reversed".into());
        }
        if !(self.network.receiver_height >= 0.0) {
            return bad(format!("`receiver_height` {}", self.network.receiver_height));
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &toml::Value) -> Result<(), Result<String, ()>> {
        // Ok(()) on success, Err(Ok(msg)) on a bad value, Err(Err(())) on an unknown key.
        let g = &mut self.geometry;
        let c = &mut self.channel;
        let a = &mut self.analysis;
        let n = &mut self.network;
        let p = &mut self.patterns;
        match key {
            "columns" => g.columns = as_usize(v)?,
            "rows" => g.rows = as_usize(v)?,
            "carrier_frequency" => g.carrier_frequency = as_f64(v)?,
            "inter_site_distance" => g.inter_site_distance = as_f64(v)?,
            "tower_height" => g.tower_height = as_f64(v)?,
            "grid_spacing" => g.grid_spacing = as_f64(v)?,
            "height_levels" => g.height_levels = as_f64_list(v)?,
            "sector" => g.sector = as_usize(v)?,
            "path_loss_exponent" => c.path_loss_exponent = as_f64(v)?,
            "element_pattern" => {
                c.element_pattern = match as_str(v)? {
                    "isotropic" => PatternKind::Isotropic,
                    "sector" => PatternKind::Sector,
                    other => return Err(Ok(format!("unknown element pattern `{other}`"))),
                }
            }
            "scatter_model" => c.scatter_model = as_str(v)?.parse().map_err(|e: crate::Error| Ok(e.to_string()))?,
            "subbands" => c.subbands = as_usize(v)?,
            "seed" => c.seed = as_usize(v)? as u64,
            "noise_power" => c.noise_power = as_f64(v)?,
            "rank_budget" => a.rank_budget = as_usize(v)?,
            "rf_chains" => a.rf_chains = as_usize(v)?,
            "sweep_max_rank" => a.sweep_max_rank = as_usize(v)?,
            "perturb_beams" => a.perturb_beams = v.as_bool().ok_or_else(|| Ok("expected a boolean".into()))?,
            "rings" => n.rings = as_usize(v)?,
            "sectors_per_site" => n.sectors_per_site = as_usize(v)?,
            "tx_power" => n.tx_power = as_f64(v)?,
            "bandwidth" => n.bandwidth = as_f64(v)?,
            "downtilt" => n.downtilt = as_f64(v)?,
            "noise_figure" => n.noise_figure = as_f64(v)?,
            "h_beamwidth" => n.h_beamwidth = as_f64(v)?,
            "v_beamwidth" => n.v_beamwidth = as_f64(v)?,
            "front_to_back" => n.front_to_back = as_f64(v)?,
            "max_gain" => n.max_gain = as_f64(v)?,
            "network_path_loss_exponent" => n.network_path_loss_exponent = as_f64(v)?,
            "map_spacing" => n.map_spacing = as_f64(v)?,
            "map_radius" => n.map_radius = as_f64(v)?,
            "receiver_height" => n.receiver_height = as_f64(v)?,
            "azimuth_min" => p.azimuth_min = as_f64(v)?,
            "azimuth_max" => p.azimuth_max = as_f64(v)?,
            "elevation_min" => p.elevation_min = as_f64(v)?,
            "elevation_max" => p.elevation_max = as_f64(v)?,
            "angle_step" => p.angle_step = as_f64(v)?,
            "directory" => self.output.directory = as_str(v)?.to_owned(),
            _ => return Err(Err(())),
        }
        Ok(())
    }
}

/// Section each key belongs to.
fn section_of(key: &str) -> Option<&'static str> {
    Some(match key {
        "columns" | "rows" | "carrier_frequency" | "inter_site_distance" | "tower_height" | "grid_spacing"
        | "height_levels" | "sector" => "geometry",
        "path_loss_exponent" | "element_pattern" | "scatter_model" | "subbands" | "seed" | "noise_power" => {
            "channel"
        }
        "rank_budget" | "rf_chains" | "sweep_max_rank" | "perturb_beams" => "analysis",
        "rings" | "sectors_per_site" | "tx_power" | "bandwidth" | "downtilt" | "noise_figure" | "h_beamwidth"
        | "v_beamwidth" | "front_to_back" | "max_gain" | "network_path_loss_exponent" | "map_spacing"
        | "map_radius" | "receiver_height" => "network",
        "azimuth_min" | "azimuth_max" | "elevation_min" | "elevation_max" | "angle_step" => "patterns",
        "directory" => "output",
        _ => return None,
    })
}

type SetResult<T> = Result<T, Result<String, ()>>;

fn as_f64(v: &toml::Value) -> SetResult<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Ok(format!("expected a number, found {}", other.type_str()))),
    }
}

fn as_usize(v: &toml::Value) -> SetResult<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::Integer(i) => Err(Ok(format!("expected a non-negative integer, found {i}"))),
        other => Err(Ok(format!("expected an integer, found {}", other.type_str()))),
    }
}

fn as_str(v: &toml::Value) -> SetResult<&str> {
    v.as_str().ok_or_else(|| Ok(format!("expected a string, found {}", v.type_str())))
}

fn as_f64_list(v: &toml::Value) -> SetResult<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Ok(format!("expected an array, found {}", v.type_str())))?;
    arr.iter().map(as_f64).collect()
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned inside `section` (`None` = top level).
fn line_of_key(text: &str, section: Option<&str>, key: &str) -> usize {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            current = Some(name.trim().to_owned());
            if section == Some(name.trim()) && key.is_empty() {
                return i + 1;
            }
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs = lhs.trim().trim_matches('"');
        if lhs == key && current.as_deref() == section {
            return i + 1;
        }
    }
    0
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        message: e.message().trim().to_owned(),
    })?;

    let mut cfg = ExperimentConfig::default();
    let mut apply = |section: Option<&str>, key: &str, value: &toml::Value| -> Result<(), ConfigError> {
        let line = line_of_key(text, section, key);
        let qualified = match section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_owned(),
        };
        if let Some(s) = section {
            if section_of(key) != Some(s) {
                return Err(ConfigError::UnknownKey { key: qualified, line });
            }
        }
        cfg.set(key, value).map_err(|e| match e {
            Ok(message) => ConfigError::InvalidValue { key: qualified.clone(), line, message },
            Err(()) => ConfigError::UnknownKey { key: qualified.clone(), line },
        })
    };

    for (name, value) in &table {
        match value {
            toml::Value::Table(inner) => {
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        key: name.clone(),
                        line: line_of_key(text, Some(name), ""),
                    });
                }
                for (key, v) in inner {
                    apply(Some(name), key, v)?;
                }
            }
            v => apply(None, name, v)?,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
