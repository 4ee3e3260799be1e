//! Experiment drivers behind the `eigenbeam` command.
//!
//! Each `run_*` function reads an [`ExperimentConfig`], writes its CSV and
//! summary files into the output directory, and returns a small report whose
//! `passed` flag decides the process exit status.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use eigenbeam::eigenbeams::RankProfile;
use eigenbeam::export;
use eigenbeam::netmap::{symmetric_map_grid, LinkBudget};
use eigenbeam::patterns::angle_grid;
use eigenbeam::simulate::{matching_baseband, EQUIVALENCE_TOLERANCE};
use eigenbeam::{
    build_array, build_long_term_channel, build_observation_grid, compose_channel, compute_sinr_map,
    cumulative_power, digital_downlink, element_power, equivalence_residual, extract_eigenbeams, hybrid_downlink,
    sample_local_scatter, subframe_multiplex, svd_decompose, transmit_pattern, truncate, ArrayGeometry, CellLayout, ChannelSvd,
    ExperimentConfig, LongTermChannel, ObservationGrid, PrecoderRole, PrecoderSet, ReceivedField, SourceSymbols,
};

/// Ranks at which the SVD summary reports captured power.
pub const REPORT_RANKS: [usize; 2] = [4, 8];

/// Tolerance for the SINR map's 120° rotation check, dB.
pub const SYMMETRY_TOLERANCE_DB: f64 = 1e-9;

/// Geometry and long-term channel shared by the analysis commands.
pub struct Scenario {
    pub array: ArrayGeometry,
    pub layout: CellLayout,
    pub grid: ObservationGrid,
    pub channel: LongTermChannel,
}

impl Scenario {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let g = &cfg.geometry;
        let array = build_array(g.columns, g.rows, g.carrier_frequency)?;
        let layout = network_layout(cfg)?;
        let grid = build_observation_grid(&layout, g.sector, g.grid_spacing, &g.height_levels)?;
        let channel =
            build_long_term_channel(&array, &grid, g.tower_height, cfg.channel.path_loss_exponent, &cfg.element_pattern())?;
        Ok(Self { array, layout, grid, channel })
    }
}

fn network_layout(cfg: &ExperimentConfig) -> Result<CellLayout> {
    let g = &cfg.geometry;
    let n = &cfg.network;
    let base = CellLayout::hexagonal(n.rings, g.inter_site_distance, g.tower_height, n.downtilt)?;
    let step = 360.0 / n.sectors_per_site as f64;
    let boresights = (0..n.sectors_per_site).map(|i| i as f64 * step).collect();
    Ok(CellLayout::new(base.site_positions, g.inter_site_distance, g.tower_height, boresights, n.downtilt)?)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

#[derive(Debug, Clone)]
pub struct SvdReport {
    pub locations: usize,
    pub elements: usize,
    pub singular_values: Vec<f64>,
    pub profile: RankProfile,
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

/// Singular values and cumulative power of the long-term channel, plus the
/// array and grid coordinates.
pub fn run_svd_report(cfg: &ExperimentConfig, out: &Path) -> Result<SvdReport> {
    prepare(out)?;
    let scenario = Scenario::build(cfg)?;
    let svd = svd_decompose(&scenario.channel)?;
    let profile = cumulative_power(&svd)?;

    export::write_points(create(out, "array.csv")?, &scenario.array.element_positions)?;
    export::write_points(create(out, "grid.csv")?, &scenario.grid.points)?;
    export::write_singular_values(create(out, "singular_values.csv")?, &svd.singular_values)?;
    export::write_rank_profile(create(out, "cumulative_power.csv")?, &profile)?;

    let mut summary = String::new();
    writeln!(summary, "locations = {}", scenario.grid.len())?;
    writeln!(summary, "elements = {}", scenario.array.len())?;
    writeln!(summary, "numerical_rank = {}", svd.numerical_rank(eigenbeam::RANK_TOLERANCE))?;
    for t in REPORT_RANKS {
        if let Some(f) = profile.at_rank(t) {
            writeln!(summary, "fraction_rank_{t} = {f}")?;
        }
    }
    write_text(out, "svd_summary.txt", &summary)?;

    let files = ["array.csv", "grid.csv", "singular_values.csv", "cumulative_power.csv", "svd_summary.txt"]
        .iter()
        .map(|f| out.join(f))
        .collect();
    Ok(SvdReport {
        locations: scenario.grid.len(),
        elements: scenario.array.len(),
        singular_values: svd.singular_values,
        profile,
        files,
        passed: true,
    })
}

#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub rank: usize,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Outcome at the configured rank budget.
    pub primary: RankOutcome,
    /// Outcomes for ranks `1..=sweep_max_rank` (capped at the channel rank).
    pub sweep: Vec<RankOutcome>,
    pub passed: bool,
}

/// Digital vs hybrid downlink over the truncated channel at rank `t`.
pub fn equivalence_at_rank(cfg: &ExperimentConfig, svd: &ChannelSvd, t: usize) -> Result<RankOutcome> {
    let k = cfg.channel.subbands;
    let seed = cfg.channel.seed;
    let truncated = truncate(svd, t)?;
    let mut beams = extract_eigenbeams(svd, t)?;
    if cfg.analysis.perturb_beams {
        beams.w.column_mut(0).fill(eigenbeam::Complex64::new(0.0, 0.0));
    }
    let scatter = sample_local_scatter(truncated.matrix.nrows(), k, cfg.channel.scatter_model, seed)?;
    let channel = compose_channel(&scatter, &truncated.matrix)?;
    let digital = PrecoderSet::random(PrecoderRole::Digital, k, truncated.matrix.ncols(), t, seed)?;
    let baseband = matching_baseband(&extract_eigenbeams(svd, t)?, &digital)?;
    let x = SourceSymbols::random(k, t, seed);
    let noise = (cfg.channel.noise_power > 0.0)
        .then(|| ReceivedField::noise(k, channel.locations(), cfg.channel.noise_power, seed));

    let y_d = digital_downlink(&channel, &digital, &x, noise.as_ref())?;
    let y_h = hybrid_downlink(&channel, &beams.w, &baseband, &x, noise.as_ref())?;
    let residuals = equivalence_residual(&y_d, &y_h)?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let mean_residual = residuals.iter().sum::<f64>() / residuals.len() as f64;
    Ok(RankOutcome { rank: t, passed: max_residual < EQUIVALENCE_TOLERANCE, residuals, max_residual, mean_residual })
}

pub fn run_equivalence(cfg: &ExperimentConfig, out: &Path) -> Result<EquivalenceReport> {
    prepare(out)?;
    let scenario = Scenario::build(cfg)?;
    let svd = svd_decompose(&scenario.channel)?;
    let primary = equivalence_at_rank(cfg, &svd, cfg.analysis.rank_budget)?;
    let max_rank = cfg.analysis.sweep_max_rank.min(svd.rank_capacity());
    let sweep = (1..=max_rank)
        .map(|t| equivalence_at_rank(cfg, &svd, t))
        .collect::<Result<Vec<_>>>()?;
    let schedule = subframe_multiplex(max_rank, cfg.analysis.rf_chains)?;

    export::write_residuals(create(out, "equivalence_residuals.csv")?, &primary.residuals)?;
    export::write_schedule(create(out, "schedule.csv")?, &schedule)?;
    let mut sweep_csv = String::from("rank,max_residual,mean_residual,status\n");
    for o in &sweep {
        writeln!(sweep_csv, "{},{},{},{}", o.rank, o.max_residual, o.mean_residual, status(o.passed))?;
    }
    write_text(out, "equivalence_sweep.csv", &sweep_csv)?;

    let passed = primary.passed && sweep.iter().all(|o| o.passed);
    let mut summary = String::new();
    writeln!(summary, "rank_budget = {}", primary.rank)?;
    writeln!(summary, "subbands = {}", primary.residuals.len())?;
    writeln!(summary, "max_residual = {}", primary.max_residual)?;
    writeln!(summary, "mean_residual = {}", primary.mean_residual)?;
    writeln!(summary, "tolerance = {EQUIVALENCE_TOLERANCE}")?;
    writeln!(summary, "status = {}", status(passed))?;
    write_text(out, "equivalence_summary.txt", &summary)?;
    Ok(EquivalenceReport { primary, sweep, passed })
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Clone)]
pub struct PatternReport {
    pub pattern_files: Vec<PathBuf>,
    pub power_files: Vec<PathBuf>,
    /// Azimuth/elevation of each beam's pattern peak.
    pub peaks: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Beam patterns and element power maps of eigenbeams `1..=t`.
pub fn run_patterns(cfg: &ExperimentConfig, out: &Path) -> Result<PatternReport> {
    prepare(out)?;
    let scenario = Scenario::build(cfg)?;
    let svd = svd_decompose(&scenario.channel)?;
    let beams = extract_eigenbeams(&svd, cfg.analysis.rank_budget)?;
    let p = &cfg.patterns;
    let az = angle_grid(p.azimuth_min, p.azimuth_max, p.angle_step)?;
    let el = angle_grid(p.elevation_min, p.elevation_max, p.angle_step)?;

    export::write_eigenbeams(create(out, "eigenbeams.csv")?, &beams)?;
    let mut report = PatternReport { pattern_files: vec![], power_files: vec![], peaks: vec![], passed: true };
    for j in 0..beams.rank_budget {
        let w = beams.beam(j);
        let pattern = transmit_pattern(&scenario.array, &w, &az, &el)?;
        let power = element_power(&scenario.array, &w)?;
        let pattern_name = format!("pattern_beam{}.csv", j + 1);
        let power_name = format!("element_power_beam{}.csv", j + 1);
        export::write_beam_pattern(create(out, &pattern_name)?, &pattern)?;
        export::write_element_power(create(out, &power_name)?, &power)?;
        let (paz, pel, _) = pattern.peak();
        report.peaks.push((paz, pel));
        report.pattern_files.push(out.join(pattern_name));
        report.power_files.push(out.join(power_name));
        report.passed &= (power.total() - w.norm_squared()).abs() <= 1e-12 * w.norm_squared().max(1.0);
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SinrReport {
    pub points: usize,
    pub max_sinr_minus_snr: f64,
    /// Largest SINR difference between rows related by a 120° rotation, or
    /// `None` when the layout has no such symmetry.
    pub symmetry_error_db: Option<f64>,
    pub passed: bool,
}

pub fn run_sinr_map(cfg: &ExperimentConfig, out: &Path) -> Result<SinrReport> {
    prepare(out)?;
    let layout = network_layout(cfg)?;
    let n = &cfg.network;
    let grid = symmetric_map_grid(n.map_radius, n.map_spacing)?;
    let budget = LinkBudget {
        tx_power: n.tx_power,
        bandwidth: n.bandwidth,
        noise_figure: n.noise_figure,
        path_loss_exponent: n.network_path_loss_exponent,
        wavelength: eigenbeam::SPEED_OF_LIGHT / cfg.geometry.carrier_frequency,
        receiver_height: n.receiver_height,
    };
    let map = compute_sinr_map(&layout, &cfg.sector_pattern(), &budget, &grid)?;
    export::write_sinr_map(create(out, "sinr_map.csv")?, &map)?;

    let max_sinr_minus_snr = map
        .sinr_db
        .iter()
        .zip(&map.snr_db)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let symmetric_layout = layout.sectors_per_site % 3 == 0;
    let symmetry_error_db = symmetric_layout.then(|| {
        let third = map.len() / 3;
        (0..third)
            .flat_map(|i| [(i, i + third), (i, i + 2 * third)])
            .map(|(a, b)| (map.sinr_db[a] - map.sinr_db[b]).abs())
            .fold(0.0, f64::max)
    });
    let passed = max_sinr_minus_snr <= 0.0 && symmetry_error_db.is_none_or(|e| e <= SYMMETRY_TOLERANCE_DB);

    let mut summary = String::new();
    writeln!(summary, "points = {}", map.len())?;
    writeln!(summary, "noise_dbm = {}", map.noise_dbm)?;
    writeln!(summary, "max_sinr_minus_snr_db = {max_sinr_minus_snr}")?;
    if let Some(e) = symmetry_error_db {
        writeln!(summary, "rotation_symmetry_error_db = {e}")?;
    }
    writeln!(summary, "status = {}", status(passed))?;
    write_text(out, "sinr_summary.txt", &summary)?;
    Ok(SinrReport { points: map.len(), max_sinr_minus_snr, symmetry_error_db, passed })
}

/// Every command into one directory; `true` when all gates pass.
pub fn run_all(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let svd = run_svd_report(cfg, out)?;
    let eq = run_equivalence(cfg, out)?;
    let pat = run_patterns(cfg, out)?;
    let sinr = run_sinr_map(cfg, out)?;
    Ok(svd.passed && eq.passed && pat.passed && sinr.passed)
}
