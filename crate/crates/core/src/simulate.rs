//! Digital and coherent-hybrid downlinks over the composite channel, their
//! equivalence residual, and the eigenbeam subframe schedule.
//!
//! Digital:  `y_D[k] = H[k] D[k] x[k] + z[k]`, `D[k]` is `N x S`.
//! Hybrid:   `y_H[k] = H[k] W F[k] x[k] + z[k]`, `W` is `N x M`, `F[k]` is `M x S`.
//!
//! With `H[k] = H_L[k] H̃_R`, `W = V_t` and `F[k] = V_tᴴ D[k]`, the two
//! outputs coincide for every subband.

use crate::channel::CompositeChannel;
use crate::eigenbeams::{effective_precoder, EigenbeamSet};
use crate::error::{invalid, shape, Result};
use crate::rng::{gaussian_matrix, gaussian_vector, stream_rng, Stream};
use crate::{CMatrix, CVector};

/// Guard against division by zero in relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Relative residual bound for exact digital/hybrid equivalence.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderRole {
    /// `D[k]`, `N x S`.
    Digital,
    /// `F[k]`, `M x S`.
    Baseband,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub role: PrecoderRole,
    pub matrices: Vec<CMatrix>,
}

impl PrecoderSet {
    pub fn new(role: PrecoderRole, matrices: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(invalid("precoder set has no subbands"));
        };
        let dims = first.shape();
        if let Some((k, m)) = matrices.iter().enumerate().find(|(_, m)| m.shape() != dims) {
            return Err(shape(format!("subband {} precoder is {:?}, expected {dims:?}", k + 1, m.shape())));
        }
        if matrices.iter().any(|m| !m.norm_squared().is_finite()) {
            return Err(crate::Error::Numeric("precoder power is not finite".into()));
        }
        Ok(Self { role, matrices })
    }

    /// i.i.d. CN(0, 1) precoders; subband `k` uses its own stream.
    pub fn random(role: PrecoderRole, subbands: usize, rows: usize, streams: usize, seed: u64) -> Result<Self> {
        let matrices = (0..subbands)
            .map(|k| gaussian_matrix(&mut stream_rng(seed, Stream::Precoder, k as u64), rows, streams, 1.0))
            .collect();
        Self::new(role, matrices)
    }

    pub fn num_subbands(&self) -> usize {
        self.matrices.len()
    }

    pub fn rows(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn streams(&self) -> usize {
        self.matrices[0].ncols()
    }
}

/// Baseband precoders `F[k] = Wᴴ D[k]` that make the hybrid system match `digital`.
pub fn matching_baseband(beams: &EigenbeamSet, digital: &PrecoderSet) -> Result<PrecoderSet> {
    if digital.role != PrecoderRole::Digital {
        return Err(invalid("expected a digital precoder set"));
    }
    PrecoderSet::new(PrecoderRole::Baseband, effective_precoder(beams, &digital.matrices)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSymbols {
    pub symbols: Vec<CVector>,
    pub seed: u64,
}

impl SourceSymbols {
    /// Unit-power circular Gaussian symbols.
    pub fn random(subbands: usize, streams: usize, seed: u64) -> Self {
        let symbols = (0..subbands)
            .map(|k| gaussian_vector(&mut stream_rng(seed, Stream::Symbols, k as u64), streams, 1.0))
            .collect();
        Self { symbols, seed }
    }

    pub fn from_vectors(symbols: Vec<CVector>) -> Self {
        Self { symbols, seed: 0 }
    }

    pub fn scaled(&self, alpha: crate::Complex64) -> Self {
        Self { symbols: self.symbols.iter().map(|x| x * alpha).collect(), seed: self.seed }
    }
}

/// One length-`L` sample vector per subband.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedField {
    pub samples: Vec<CVector>,
    pub noise_power: f64,
}

impl ReceivedField {
    pub fn zeros(subbands: usize, locations: usize) -> Self {
        Self { samples: vec![CVector::zeros(locations); subbands], noise_power: 0.0 }
    }

    /// CN(0, noise_power) noise shared by both systems in a comparison.
    pub fn noise(subbands: usize, locations: usize, noise_power: f64, seed: u64) -> Self {
        let samples = (0..subbands)
            .map(|k| gaussian_vector(&mut stream_rng(seed, Stream::Noise, k as u64), locations, noise_power))
            .collect();
        Self { samples, noise_power }
    }

    pub fn num_subbands(&self) -> usize {
        self.samples.len()
    }
}

fn check_common(channel: &CompositeChannel, x: &SourceSymbols, noise: Option<&ReceivedField>) -> Result<()> {
    let k = channel.num_subbands();
    if x.symbols.len() != k {
        return Err(shape(format!("{} symbol vectors for {k} subbands", x.symbols.len())));
    }
    if let Some(z) = noise {
        if z.samples.len() != k {
            return Err(shape(format!("{} noise vectors for {k} subbands", z.samples.len())));
        }
        if let Some(bad) = z.samples.iter().find(|s| s.len() != channel.locations()) {
            return Err(shape(format!("noise vector of length {} for L = {}", bad.len(), channel.locations())));
        }
    }
    Ok(())
}

fn add_noise(mut y: CVector, noise: Option<&ReceivedField>, k: usize) -> CVector {
    if let Some(z) = noise {
        y += &z.samples[k];
    }
    y
}

/// `y_D[k] = H[k] D[k] x[k] + z[k]`.
pub fn digital_downlink(
    channel: &CompositeChannel,
    precoders: &PrecoderSet,
    x: &SourceSymbols,
    noise: Option<&ReceivedField>,
) -> Result<ReceivedField> {
    check_common(channel, x, noise)?;
    if precoders.num_subbands() != channel.num_subbands() {
        return Err(shape(format!(
            "{} precoders for {} subbands",
            precoders.num_subbands(),
            channel.num_subbands()
        )));
    }
    if precoders.rows() != channel.elements() {
        return Err(shape(format!("D[k] has {} rows, channel has {} elements", precoders.rows(), channel.elements())));
    }
    let samples = (0..channel.num_subbands())
        .map(|k| {
            let xk = &x.symbols[k];
            if xk.len() != precoders.streams() {
                return Err(shape(format!("x[{}] has length {}, S = {}", k + 1, xk.len(), precoders.streams())));
            }
            let y = &channel.subbands[k] * (&precoders.matrices[k] * xk);
            Ok(add_noise(y, noise, k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReceivedField { samples, noise_power: noise.map_or(0.0, |z| z.noise_power) })
}

/// `y_H[k] = H[k] W F[k] x[k] + z[k]`.
pub fn hybrid_downlink(
    channel: &CompositeChannel,
    beams: &CMatrix,
    baseband: &PrecoderSet,
    x: &SourceSymbols,
    noise: Option<&ReceivedField>,
) -> Result<ReceivedField> {
    check_common(channel, x, noise)?;
    if beams.nrows() != channel.elements() {
        return Err(shape(format!("W has {} rows, channel has {} elements", beams.nrows(), channel.elements())));
    }
    if baseband.num_subbands() != channel.num_subbands() {
        return Err(shape(format!(
            "{} baseband precoders for {} subbands",
            baseband.num_subbands(),
            channel.num_subbands()
        )));
    }
    if baseband.rows() != beams.ncols() {
        return Err(shape(format!("F[k] has {} rows, W has {} RF chains", baseband.rows(), beams.ncols())));
    }
    let samples = (0..channel.num_subbands())
        .map(|k| {
            let xk = &x.symbols[k];
            if xk.len() != baseband.streams() {
                return Err(shape(format!("x[{}] has length {}, S = {}", k + 1, xk.len(), baseband.streams())));
            }
            let y = &channel.subbands[k] * (beams * (&baseband.matrices[k] * xk));
            Ok(add_noise(y, noise, k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReceivedField { samples, noise_power: noise.map_or(0.0, |z| z.noise_power) })
}

/// `‖y_H[k] − y_D[k]‖ / max(‖y_D[k]‖, ε)` per subband.
pub fn equivalence_residual(y_d: &ReceivedField, y_h: &ReceivedField) -> Result<Vec<f64>> {
    if y_d.samples.len() != y_h.samples.len() {
        return Err(shape(format!("{} vs {} subbands", y_d.samples.len(), y_h.samples.len())));
    }
    y_d.samples
        .iter()
        .zip(&y_h.samples)
        .map(|(d, h)| {
            if d.len() != h.len() {
                return Err(shape(format!("{} vs {} locations", d.len(), h.len())));
            }
            Ok((h - d).norm() / d.norm().max(RESIDUAL_FLOOR))
        })
        .collect()
}

/// Which eigenbeams occupy the RF chains in each subframe of a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubframeSchedule {
    /// `subframes[i]` lists the eigenbeam indices active in subframe `i`.
    pub subframes: Vec<Vec<usize>>,
    pub cycle_length: usize,
}

impl SubframeSchedule {
    /// `(subframe, beam)` pairs in schedule order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.subframes
            .iter()
            .enumerate()
            .flat_map(|(s, beams)| beams.iter().map(move |&b| (s, b)))
    }
}

/// Round-robin assignment of `t` eigenbeams (strongest first) to `m` RF
/// chains over `ceil(t / m)` subframes.
pub fn subframe_multiplex(t: usize, m: usize) -> Result<SubframeSchedule> {
    if t == 0 || m == 0 {
        return Err(invalid(format!("t = {t}, M = {m}")));
    }
    let beams: Vec<usize> = (0..t).collect();
    let subframes: Vec<Vec<usize>> = beams.chunks(m).map(<[usize]>::to_vec).collect();
    Ok(SubframeSchedule { cycle_length: subframes.len(), subframes })
}
