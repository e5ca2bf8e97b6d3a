//! Reduction of an arbitrary channel to parallel singular-value channels
//! `Ỹ = Λ X̃ + Z̃` with `X̃ = VᵀX`, `Ỹ = UᵀY`, and the precoded bounds.

use nalgebra::DMatrix;

use crate::bound::BoundResult;
use crate::error::{Error, Result};
use crate::geometry::{ChannelMatrix, InputSpace};
use crate::lower_bounds::{amplitude_allocate, epi_svd, epi_uniform_invertible, jensen_bound_diag};
use crate::upper_bounds::{best_upper_bound, prelog_reference_bits};

/// A channel together with its ordered, sign-normalized SVD factors.
#[derive(Debug, Clone)]
pub struct PrecodedChannel {
    pub base: ChannelMatrix,
    /// Nonincreasing, length `n_min`.
    pub sigmas: Vec<f64>,
    /// `n_r × n_r` orthogonal.
    pub u: DMatrix<f64>,
    /// `n_t × n_t` orthogonal.
    pub v: DMatrix<f64>,
}

impl PrecodedChannel {
    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn n_min(&self) -> usize {
        self.sigmas.len()
    }
}

pub fn precode(h: &ChannelMatrix) -> PrecodedChannel {
    let svd = h.svd();
    PrecodedChannel {
        base: h.clone(),
        sigmas: svd.sigmas.clone(),
        u: svd.u.clone(),
        v: svd.v.clone(),
    }
}

fn check_precoder_box(h: &ChannelMatrix, a: &[f64]) -> Result<()> {
    if a.len() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "{} precoder half-widths for {} inputs",
            a.len(),
            h.n_t()
        )));
    }
    InputSpace::new_box(a.to_vec()).map(|_| ())
}

/// Jensen bound with SVD precoding, `X̃ = VᵀX` uniform on `Box(a)`. Only the
/// first `n_min` precoder amplitudes reach the output.
pub fn jensen_svd(h: &ChannelMatrix, a: &[f64]) -> Result<BoundResult> {
    check_precoder_box(h, a)?;
    let n_min = h.n_min();
    let sigmas = &h.svd().sigmas;
    let mut r = jensen_bound_diag(sigmas, &InputSpace::new_box(a[..n_min].to_vec())?)?;
    r.name = "jensen_svd";
    Ok(r.with_param("rank", h.rank() as f64))
}

/// Jensen bound with SVD precoding under `‖X‖ ≤ A`, the amplitudes of the
/// `n_min` active precoder streams allocated on the sphere.
pub fn jensen_svd_ball(h: &ChannelMatrix, radius: f64) -> Result<BoundResult> {
    let n_min = h.n_min();
    let sigmas = &h.svd().sigmas;
    let mut r = jensen_bound_diag(sigmas, &InputSpace::ball(radius, n_min)?)?;
    r.name = "jensen_svd_ball";
    Ok(r.with_param("rank", h.rank() as f64))
}

/// Precoder-domain half-widths `b` with `V Box(b) ⊆ X`, so that precoded
/// bounds evaluated at `b` are valid for the input space `X`.
///
/// Boxes: a signed-permutation `V` maps `Box(Pa)` onto `Box(a)`; otherwise
/// the first `n_min` streams get the largest common amplitude `t` with
/// `Σ_j |v_ij| t ≤ a_i`. Balls: any `b` with `‖b‖ ≤ A`, allocated to the
/// active streams.
pub fn feasible_precoder_box(h: &ChannelMatrix, x: &InputSpace) -> Result<Vec<f64>> {
    if x.dim() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs but the input space has dimension {}",
            h.n_t(),
            x.dim()
        )));
    }
    let v = &h.svd().v;
    let n_t = h.n_t();
    let n_min = h.n_min();
    match x {
        InputSpace::Box { halfwidths } => {
            if let Some(perm) = signed_permutation(v) {
                return Ok(perm.iter().map(|&j| halfwidths[j]).collect());
            }
            let t = (0..n_t)
                .map(|i| {
                    let row: f64 = (0..n_min).map(|j| v[(i, j)].abs()).sum();
                    if row > 0.0 {
                        halfwidths[i] / row
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let mut b = vec![0.0; n_t];
            b[..n_min].fill(t);
            Ok(b)
        }
        InputSpace::Ball { radius, .. } => {
            let sigmas = &h.svd().sigmas;
            let mut b = vec![0.0; n_t];
            if sigmas[0] > 0.0 {
                let alloc = amplitude_allocate(sigmas, &InputSpace::ball(*radius, n_min)?)?;
                b[..n_min].copy_from_slice(&alloc);
            }
            Ok(b)
        }
    }
}

// Column k of V is ±e_{perm[k]}.
fn signed_permutation(v: &DMatrix<f64>) -> Option<Vec<usize>> {
    let n = v.ncols();
    let mut perm = Vec::with_capacity(n);
    for k in 0..n {
        let col = v.column(k);
        let j = col.iamax();
        if (col[j].abs() - 1.0).abs() > 1e-12 {
            return None;
        }
        perm.push(j);
    }
    Some(perm)
}

/// Certified lower bounds for `X` built from SVD precoding (plus the
/// uniform-input EPI bound for square invertible channels).
pub fn precoded_lower_bounds(h: &ChannelMatrix, x: &InputSpace) -> Result<Vec<BoundResult>> {
    let b = feasible_precoder_box(h, x)?;
    let mut out = vec![jensen_svd(h, &b)?, epi_svd(h, &b)?];
    if let InputSpace::Ball { radius, .. } = x {
        if h.svd().sigmas[0] > 0.0 {
            out.push(jensen_svd_ball(h, *radius)?);
        }
    }
    if h.is_square() && h.is_invertible() {
        out.push(epi_uniform_invertible(h, x)?);
    }
    Ok(out)
}

/// One row of a pre-log sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PrelogRow {
    pub scale: f64,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub rank: usize,
    pub n_min: usize,
}

impl PrelogRow {
    /// Fewer nonzero singular values than `n_min`; the ratios approach the
    /// rank instead.
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.n_min
    }
}

/// Ratios of the best lower and upper bounds on `s·X` to the single-stream
/// rate `log₂(1 + 2 r_min(sX)/√(2πe))`, for each scale `s`.
pub fn prelog_sweep(h: &ChannelMatrix, x: &InputSpace, scales: &[f64]) -> Result<Vec<PrelogRow>> {
    if x.is_degenerate() {
        return Err(Error::Degenerate("pre-log sweep needs a nondegenerate space".into()));
    }
    let reduced = h.row_reduced()?;
    scales
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain {
                    what: "prelog_sweep",
                    detail: format!("scales must be positive, got {s}"),
                });
            }
            let xs = x.scaled(s)?;
            let reference = prelog_reference_bits(&xs)?;
            let upper = best_upper_bound(&reduced, &xs)?.value_bits;
            let lower = precoded_lower_bounds(h, &xs)?
                .iter()
                .map(|r| r.value_bits)
                .fold(0.0, f64::max);
            Ok(PrelogRow {
                scale: s,
                lower_ratio: lower / reference,
                upper_ratio: upper / reference,
                rank: h.rank(),
                n_min: h.n_min(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::orthogonality_defect;
    use crate::lower_bounds::epi_svd_paper_vol;

    fn fig3() -> ChannelMatrix {
        ChannelMatrix::from_rows(&[vec![0.6557, 0.0357, 0.8491]]).unwrap()
    }

    #[test]
    fn precode_diagonal_is_identity() {
        let h = ChannelMatrix::diagonal(&[3.0, 1.0]).unwrap();
        let p = precode(&h);
        assert_eq!(p.sigmas, vec![3.0, 1.0]);
        assert!((p.u.clone() - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!((p.v.clone() - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn precode_row_vector() {
        let p = precode(&fig3());
        assert!((p.sigmas[0] - 1.073_41).abs() < 1e-5);
        assert!(orthogonality_defect(&p.v) < 1e-12);
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn fig3_anchors() {
        let a = 10f64.powf(1.625) / 2.0;
        let h = fig3();
        let j = jensen_svd(&h, &[a; 3]).unwrap();
        let e = epi_svd(&h, &[a; 3]).unwrap();
        assert!((j.value_bits - 3.53752).abs() < 0.1, "{}", j.value_bits);
        assert!((e.value_bits - 3.50793).abs() < 0.1, "{}", e.value_bits);
        assert!(epi_svd_paper_vol(&h, &[a; 3]).unwrap().value_bits < e.value_bits);
    }

    #[test]
    fn jensen_svd_matches_diag_for_diagonal() {
        let h = ChannelMatrix::diagonal(&[0.1, 0.3]).unwrap();
        let a = [200.0, 500.0];
        let s = jensen_svd(&h, &[500.0, 200.0]).unwrap();
        let d = jensen_bound_diag(&[0.1, 0.3], &InputSpace::new_box(a.to_vec()).unwrap()).unwrap();
        assert!((s.value_bits - d.value_bits).abs() < 1e-12);
        let zero = ChannelMatrix::new(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(jensen_svd(&zero, &[1.0, 1.0]).unwrap().value_bits, 0.0);
    }

    #[test]
    fn feasible_box_maps_inside() {
        let h = ChannelMatrix::from_rows(&[vec![0.6, -1.2, 0.3], vec![0.8, 0.4, -0.7]]).unwrap();
        let a = [1.0, 2.0, 0.5];
        let x = InputSpace::new_box(a.to_vec()).unwrap();
        let b = feasible_precoder_box(&h, &x).unwrap();
        let v = &h.svd().v;
        for i in 0..3 {
            let reach: f64 = (0..3).map(|j| v[(i, j)].abs() * b[j]).sum();
            assert!(reach <= a[i] * (1.0 + 1e-12));
        }
        let diag = ChannelMatrix::diagonal(&[0.1, 0.3]).unwrap();
        let b = feasible_precoder_box(&diag, &InputSpace::new_box(vec![200.0, 500.0]).unwrap()).unwrap();
        assert_eq!(b, vec![500.0, 200.0]);
    }

    #[test]
    fn prelog_scalar() {
        let h = ChannelMatrix::identity(1).unwrap();
        let rows = prelog_sweep(&h, &InputSpace::cube(1, 1.0).unwrap(), &[1e6]).unwrap();
        assert!((rows[0].upper_ratio - 1.0).abs() < 0.05);
        assert!((rows[0].lower_ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn prelog_rank_deficient_flagged() {
        let h = ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let rows = prelog_sweep(&h, &InputSpace::cube(2, 1.0).unwrap(), &[1e3, 1e6, 1e12]).unwrap();
        assert!(rows.iter().all(PrelogRow::rank_deficient));
        assert!(rows.windows(2).all(|w| w[1].upper_ratio < w[0].upper_ratio));
        assert!((rows[2].upper_ratio - 1.0).abs() < 0.1, "{}", rows[2].upper_ratio);
    }
}
