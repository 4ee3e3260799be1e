//! Singular-value structure of the long-term channel and the eigenbeams
//! derived from it.
//!
//! `H_R = U Σ Vᴴ`. Keeping the `t` strongest singular triplets gives the
//! best rank-`t` approximation `H̃_R = U_t Σ_t V_tᴴ` (Frobenius and spectral
//! norm). The columns of `V_t` are the eigenbeams: analog weight vectors that
//! do not depend on the subband. Any digital precoder `D[k]` acting through
//! `H̃_R` is reproduced by driving the eigenbeams with `V_tᴴ D[k]`.

use std::cmp::Ordering;

use nalgebra::linalg::SVD;

use crate::error::{invalid, shape, Error, Result};
use crate::{CMatrix, Complex64};

/// Thin SVD with descending singular values and phase-normalized vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSvd {
    /// `L x r` left singular vectors.
    pub u: CMatrix,
    /// Descending, length `r = min(L, N)`.
    pub singular_values: Vec<f64>,
    /// `N x r` right singular vectors.
    pub v: CMatrix,
    pub source_dims: (usize, usize),
}

impl ChannelSvd {
    pub fn rank_capacity(&self) -> usize {
        self.singular_values.len()
    }

    /// Number of singular values above `tol * σ₁`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        numerical_rank(&self.singular_values, tol)
    }

    pub fn reconstruct(&self) -> CMatrix {
        scaled_product(&self.u, &self.singular_values, &self.v)
    }
}

pub(crate) fn numerical_rank(sigma: &[f64], tol: f64) -> usize {
    let Some(&max) = sigma.first() else { return 0 };
    sigma.iter().filter(|&&s| s > tol * max).count()
}

/// `U diag(σ) Vᴴ` for matching column counts.
fn scaled_product(u: &CMatrix, sigma: &[f64], v: &CMatrix) -> CMatrix {
    let mut us = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    us * v.adjoint()
}

/// Rotate `v` so its largest-magnitude entry (first one on ties) is real and
/// positive. Returns the unit factor applied.
pub fn normalize_phase(v: &mut nalgebra::DVectorViewMut<'_, Complex64>) -> Complex64 {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    if best_mag <= 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let pivot = v[best];
    let factor = pivot.conj() / best_mag;
    for z in v.iter_mut() {
        *z *= factor;
    }
    // Exact zero imaginary part on the pivot.
    v[best] = Complex64::new(best_mag, 0.0);
    factor
}

fn lexicographic(a: &nalgebra::DVectorView<'_, Complex64>, b: &nalgebra::DVectorView<'_, Complex64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Thin SVD of any complex matrix.
pub fn svd_of(matrix: &CMatrix) -> Result<ChannelSvd> {
    let (rows, cols) = matrix.shape();
    if rows == 0 || cols == 0 {
        return Err(invalid("empty matrix"));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let svd = SVD::try_new_unordered(matrix.clone(), true, true, 5.0 * f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let u = svd.u.ok_or_else(|| Error::Numeric("missing left singular vectors".into()))?;
    let v = svd
        .v_t
        .ok_or_else(|| Error::Numeric("missing right singular vectors".into()))?
        .adjoint();
    let sigma = svd.singular_values;
    let r = sigma.len();

    let mut u = u;
    let mut v = v;
    for j in 0..r {
        let f = normalize_phase(&mut v.column_mut(j));
        // Scaling v_j by f requires u_j by f to keep u σ vᴴ fixed.
        for z in u.column_mut(j).iter_mut() {
            *z *= f;
        }
    }

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        sigma[b]
            .total_cmp(&sigma[a])
            .then_with(|| lexicographic(&v.column(a), &v.column(b)))
    });

    let u_sorted = CMatrix::from_fn(rows, r, |i, j| u[(i, order[j])]);
    let v_sorted = CMatrix::from_fn(cols, r, |i, j| v[(i, order[j])]);
    let singular_values = order.iter().map(|&j| sigma[j]).collect();
    Ok(ChannelSvd { u: u_sorted, singular_values, v: v_sorted, source_dims: (rows, cols) })
}

/// SVD of the long-term channel.
pub fn svd_decompose(channel: &crate::channel::LongTermChannel) -> Result<ChannelSvd> {
    svd_of(&channel.matrix)
}

/// Cumulative fraction of channel power captured by the leading singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub cumulative_power: Vec<f64>,
}

impl RankProfile {
    /// Fraction captured by the `t` strongest singular values (`t >= 1`).
    pub fn at_rank(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.cumulative_power.get(i).copied())
    }

    pub fn len(&self) -> usize {
        self.cumulative_power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative_power.is_empty()
    }
}

pub fn cumulative_power(svd: &ChannelSvd) -> Result<RankProfile> {
    profile_from_singular_values(&svd.singular_values)
}

pub fn profile_from_singular_values(sigma: &[f64]) -> Result<RankProfile> {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numeric(format!("total singular power {total}")));
    }
    let mut acc = 0.0;
    let mut cumulative_power: Vec<f64> = sigma
        .iter()
        .map(|s| {
            acc += s * s;
            acc / total
        })
        .collect();
    if let Some(last) = cumulative_power.last_mut() {
        *last = 1.0;
    }
    Ok(RankProfile { cumulative_power })
}

/// Rank-`t` approximation of the long-term channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedChannel {
    pub matrix: CMatrix,
    pub rank_budget: usize,
    pub u_t: CMatrix,
    pub sigma_t: Vec<f64>,
    pub v_t: CMatrix,
}

fn check_rank(svd: &ChannelSvd, t: usize) -> Result<()> {
    if t == 0 || t > svd.rank_capacity() {
        return Err(invalid(format!("rank budget {t} outside 1..={}", svd.rank_capacity())));
    }
    Ok(())
}

pub fn truncate(svd: &ChannelSvd, t: usize) -> Result<TruncatedChannel> {
    check_rank(svd, t)?;
    let u_t = svd.u.columns(0, t).into_owned();
    let v_t = svd.v.columns(0, t).into_owned();
    let sigma_t = svd.singular_values[..t].to_vec();
    let matrix = scaled_product(&u_t, &sigma_t, &v_t);
    Ok(TruncatedChannel { matrix, rank_budget: t, u_t, sigma_t, v_t })
}

/// Squared Frobenius norm of the part discarded by a rank-`t` truncation.
pub fn discarded_power(svd: &ChannelSvd, t: usize) -> f64 {
    svd.singular_values.iter().skip(t).map(|s| s * s).sum()
}

/// Subband-independent analog beams `W = V_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenbeamSet {
    /// `N x t`; column `j` is eigenbeam `j`.
    pub w: CMatrix,
    pub sigma_t: Vec<f64>,
    pub rank_budget: usize,
}

impl EigenbeamSet {
    pub fn beam(&self, j: usize) -> crate::CVector {
        self.w.column(j).into_owned()
    }

    pub fn elements(&self) -> usize {
        self.w.nrows()
    }
}

pub fn extract_eigenbeams(svd: &ChannelSvd, t: usize) -> Result<EigenbeamSet> {
    check_rank(svd, t)?;
    Ok(EigenbeamSet {
        w: svd.v.columns(0, t).into_owned(),
        sigma_t: svd.singular_values[..t].to_vec(),
        rank_budget: t,
    })
}

/// `D̃ = Wᴴ D` for one subband.
pub fn effective_precoder_single(beams: &EigenbeamSet, d: &CMatrix) -> Result<CMatrix> {
    if d.nrows() != beams.elements() {
        return Err(shape(format!("precoder has {} rows, array has {}", d.nrows(), beams.elements())));
    }
    if d.ncols() != beams.rank_budget {
        return Err(shape(format!(
            "precoder carries {} streams, rank budget is {}",
            d.ncols(),
            beams.rank_budget
        )));
    }
    Ok(beams.w.adjoint() * d)
}

/// Effective digital precoders `Wᴴ D[k]` for every subband.
pub fn effective_precoder(beams: &EigenbeamSet, digital: &[CMatrix]) -> Result<Vec<CMatrix>> {
    digital.iter().map(|d| effective_precoder_single(beams, d)).collect()
}
