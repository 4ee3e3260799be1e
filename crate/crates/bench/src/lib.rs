//! Shared fixtures for the criterion benches.

use eigenbeam::{
    build_array, build_long_term_channel, build_observation_grid, CellLayout, ExperimentConfig,
    LongTermChannel,
};

/// Long-term channel for the default experiment configuration.
pub fn default_channel() -> LongTermChannel {
    let cfg = ExperimentConfig::default();
    let g = &cfg.geometry;
    let array = build_array(g.columns, g.rows, g.carrier_frequency).expect("default array");
    let layout = CellLayout::hexagonal(cfg.network.rings, g.inter_site_distance, g.tower_height, cfg.network.downtilt)
        .expect("default layout");
    let grid = build_observation_grid(&layout, g.sector, g.grid_spacing, &g.height_levels).expect("default grid");
    build_long_term_channel(&array, &grid, g.tower_height, cfg.channel.path_loss_exponent, &cfg.element_pattern())
        .expect("default channel")
}
