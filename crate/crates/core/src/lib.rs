//! Eigenbeam analysis of macro-cellular massive MIMO channels.
//!
//! The crate builds the line-of-sight channel from a staggered planar array
//! to a grid of observation points in one hexagonal sector, decomposes it
//! with a truncated SVD, and shows that a hybrid transmitter whose analog
//! beams are the leading right singular vectors ("eigenbeams") reproduces
//! any digital subband precoder on the rank-limited channel.
//!
//! Module map:
//!
//! - [`geometry`]: array layout, hexagonal cell layout, observation grid, departure angles
//! - [`channel`]: path gain, long-term channel, per-subband local scattering, composition
//! - [`eigenbeams`]: SVD, cumulative power profile, truncation, eigenbeam extraction
//! - [`simulate`]: digital and hybrid downlinks, equivalence residuals, subframe schedules
//! - [`patterns`]: steering vectors, beam patterns, element power maps
//! - [`netmap`]: sector antenna pattern and network SINR maps
//! - [`config`]: experiment configuration file format
//! - [`export`]: CSV and binary file formats

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod eigenbeams;
pub mod error;
pub mod export;
pub mod geometry;
pub mod netmap;
pub mod patterns;
pub mod rng;
pub mod simulate;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use channel::{
    compose_channel, build_long_term_channel, path_gain, sample_local_scatter, CompositeChannel,
    ElementPattern, LongTermChannel, ScatterModel, SubbandScatterChannel,
};
pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use eigenbeams::{
    cumulative_power, effective_precoder, extract_eigenbeams, svd_decompose, truncate,
    ChannelSvd, EigenbeamSet, RankProfile, TruncatedChannel,
};
pub use error::{Error, Result};
pub use geometry::{
    build_array, build_observation_grid, departure_geometry, ArrayGeometry, CellLayout,
    DepartureAngles, ObservationGrid, Point3,
};
pub use netmap::{compute_sinr_map, sector_gain, SectorPattern, SinrMap};
pub use patterns::{beam_pattern, element_power, steering_vector, transmit_pattern, BeamPattern, ElementPowerMap};
pub use simulate::{
    digital_downlink, equivalence_residual, hybrid_downlink, subframe_multiplex, PrecoderRole,
    PrecoderSet, ReceivedField, SourceSymbols, SubframeSchedule,
};

/// Dense complex matrix used for every channel and precoder.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Singular values below `RANK_TOLERANCE * sigma_max` are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
