//! Capacity upper bounds: the moment bound with optimized order `p` and the
//! two duality bounds built from the enclosing ball and box of `H X`.

use std::cell::RefCell;

use crate::bound::{bits, BoundResult, LN_2PI_E};
use crate::error::{Error, Result};
use crate::geometry::{enclosing_box_of_image, r_max_image, r_min, ChannelMatrix, InputSpace};
use crate::numeric::{golden_section, log_sum_exp, NeumaierSum};
use crate::specialfn::{
    ln_ball_volume, ln_k_np, ln_noncentral_chi_moment, log_gamma, MomentOrder, MomentPath,
    Tolerance,
};

/// Exponents `k` of the coarse grid `p = 2^k`.
pub const P_GRID_EXPONENTS: std::ops::RangeInclusive<i32> = -4..=7;

/// Golden-section stopping width, in `p`.
pub const P_TOLERANCE: f64 = 1e-6;

/// `(n/2) log₂(1 + d²/n)`: the moment bound at `p = 2`.
pub fn moment_bound_p2_closed_form(n_r: usize, d: f64) -> f64 {
    let n = n_r as f64;
    0.5 * n * (d * d / n).ln_1p() / std::f64::consts::LN_2
}

fn moment_bits_raw(n_r: usize, d: f64, p: MomentOrder, tol: &Tolerance) -> Result<(f64, MomentPath)> {
    let m = ln_noncentral_chi_moment(n_r, d, p, tol)?;
    let nats = n_r as f64 * (ln_k_np(n_r, p)? - 0.5 * LN_2PI_E + m.ln_value / p.get());
    Ok((bits(nats), m.path))
}

fn path_note(path: MomentPath) -> String {
    match path {
        MomentPath::Closed => "moment: closed form".into(),
        MomentPath::Series { terms } => format!("moment: series, {terms} terms"),
        MomentPath::Quadrature { intervals } => {
            format!("moment: quadrature fallback, {intervals} intervals")
        }
    }
}

/// Moment bound at a fixed order `p` with `d = r_max(H X)`.
pub fn moment_bound_at_p(h: &ChannelMatrix, x: &InputSpace, p: MomentOrder) -> Result<BoundResult> {
    let d = r_max_image(h, x)?;
    let (raw, path) = moment_bits_raw(h.n_r(), d, p, &Tolerance::default())?;
    Ok(BoundResult::clamped("moment_at_p", crate::BoundKind::Upper, raw)
        .with_param("p", p.get())
        .with_param("d", d)
        .with_note(path_note(path)))
}

/// Moment bound minimized over `p`: coarse grid `2^k`, then golden-section
/// search in `ln p` on the bracket around the best grid point.
pub fn moment_bound(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    let d = r_max_image(h, x)?;
    moment_bound_for_radius(h.n_r(), d)
}

pub(crate) fn moment_bound_for_radius(n_r: usize, d: f64) -> Result<BoundResult> {
    let tol = Tolerance::default();
    let grid: Vec<f64> = P_GRID_EXPONENTS.map(|k| 2f64.powi(k)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut fallback_used = false;
    for &p in &grid {
        let (v, path) = moment_bits_raw(n_r, d, MomentOrder::new(p)?, &tol)?;
        fallback_used |= matches!(path, MomentPath::Quadrature { .. });
        values.push(v);
    }
    let best = (0..grid.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("nonempty grid");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];

    let failure = RefCell::new(None);
    let objective = |t: f64| match MomentOrder::new(t.exp())
        .and_then(|p| moment_bits_raw(n_r, d, p, &tol))
    {
        Ok((v, _)) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::INFINITY
        }
    };
    let refined = golden_section(objective, lo.ln(), hi.ln(), P_TOLERANCE / hi);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (p_star, raw) = if refined.value < values[best] {
        (refined.x.exp(), refined.value)
    } else {
        (grid[best], values[best])
    };
    let ceiling = values[P_GRID_EXPONENTS.clone().position(|k| k == 1).expect("p = 2 on grid")];
    debug_assert!(raw <= ceiling && values.iter().all(|&v| raw <= v));

    let mut r = BoundResult::clamped("moment", crate::BoundKind::Upper, raw)
        .with_param("p", p_star)
        .with_param("d", d)
        .with_param("p2_bits", ceiling.max(0.0))
        .with_note(format!("golden-section iterations {}", refined.iterations));
    if fallback_used {
        r = r.with_note("quadrature fallback used on grid");
    }
    Ok(r)
}

/// `ln c_n(d)` terms (`i = 1..n-1`) of the ball duality bound.
fn ln_ball_duality_terms(n: usize, d: f64) -> Result<Vec<f64>> {
    if n < 2 || d == 0.0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let ln_coeff = log_gamma(0.5 * (nf - 1.0))? - 0.5 * nf * std::f64::consts::LN_2 - log_gamma(0.5 * nf)?;
    let ln_n1_fact = log_gamma(nf)?;
    (1..n)
        .map(|i| {
            let i_f = i as f64;
            let ln_binom = ln_n1_fact - log_gamma(i_f + 1.0)? - log_gamma(nf - i_f)?;
            Ok(ln_binom + ln_coeff + i_f * d.ln())
        })
        .collect()
}

/// `log₂(1 + c_n(d) + Vol(B(d))/(2πe)^{n/2})` for `n ≥ 1`.
pub fn ball_duality_bits(n: usize, d: f64) -> Result<f64> {
    let mut ln_terms = ln_ball_duality_terms(n, d)?;
    ln_terms.push(ln_ball_volume(n, d)? - 0.5 * n as f64 * LN_2PI_E);
    ln_terms.push(0.0);
    ln_terms.sort_by(f64::total_cmp);
    Ok(bits(log_sum_exp(&ln_terms)))
}

/// Duality bound through the enclosing ball of `H X`.
pub fn duality_ball_bound(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    let d = r_max_image(h, x)?;
    Ok(BoundResult::upper("duality_ball", ball_duality_bits(h.n_r(), d)?).with_param("d", d))
}

/// `Σ log₂(1 + 2Aᵢ/√(2πe))`.
pub fn box_duality_bits(halfwidths: &[f64]) -> f64 {
    let scale = (-0.5 * LN_2PI_E).exp();
    let s: NeumaierSum = halfwidths
        .iter()
        .map(|a| (2.0 * a * scale).ln_1p() / std::f64::consts::LN_2)
        .collect();
    s.value()
}

/// Duality bound through the enclosing box of `H X`.
pub fn duality_box_bound(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    let a = enclosing_box_of_image(h, x)?;
    let mut r = BoundResult::upper("duality_box", box_duality_bits(&a));
    for (i, ai) in a.iter().enumerate() {
        r = r
            .with_param(format!("A'{}", i + 1), *ai)
            .with_param(format!("term{}", i + 1), box_duality_bits(&[*ai]));
    }
    Ok(r)
}

/// Diagonal channel with a ball input, using per-dimension amplitudes
/// `|h_ii| A/√n`. These are smaller than the image half-widths `|h_ii| A`,
/// so the value is not a certified bound.
pub fn dual2_diag_ball_paper(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    let (radius, dim) = match x {
        InputSpace::Ball { radius, dim } => (*radius, *dim),
        InputSpace::Box { .. } => {
            return Err(Error::Precondition("dual2_diag_ball_paper needs a ball input".into()))
        }
    };
    let diag = h
        .diagonal_entries()
        .ok_or_else(|| Error::Precondition("dual2_diag_ball_paper needs a diagonal channel".into()))?;
    if dim != diag.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {0}x{0} but the ball has dimension {dim}",
            diag.len()
        )));
    }
    let scale = radius / (dim as f64).sqrt();
    let a: Vec<f64> = diag.iter().map(|hii| hii.abs() * scale).collect();
    Ok(BoundResult::upper("dual2_diag_ball_paper", box_duality_bits(&a))
        .as_reference_variant()
        .with_note("uses A/sqrt(n) per dimension; not a certified bound"))
}

/// Every certified upper bound: moment, ball duality, box duality.
pub fn all_upper_bounds(h: &ChannelMatrix, x: &InputSpace) -> Result<Vec<BoundResult>> {
    Ok(vec![
        moment_bound(h, x)?,
        duality_ball_bound(h, x)?,
        duality_box_bound(h, x)?,
    ])
}

/// Smallest certified upper bound.
pub fn best_upper_bound(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    Ok(all_upper_bounds(h, x)?
        .into_iter()
        .min_by(|a, b| a.value_bits.total_cmp(&b.value_bits))
        .expect("three bounds"))
}

/// `log₂(1 + 2 r_min(X)/√(2πe))`, the single-stream reference rate.
pub fn prelog_reference_bits(x: &InputSpace) -> Result<f64> {
    let r = r_min(x);
    if r <= 0.0 {
        return Err(Error::Degenerate("pre-log needs r_min(X) > 0".into()));
    }
    Ok(box_duality_bits(&[r]))
}

/// High-amplitude pre-log diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Prelog {
    /// Best upper bound over the reference rate.
    pub ratio: f64,
    pub upper_bits: f64,
    pub reference_bits: f64,
    pub rank: usize,
    pub n_min: usize,
}

impl Prelog {
    /// Fewer nonzero singular values than `min(n_r, n_t)`: the ratio tends
    /// to the rank, not to `n_min`.
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.n_min
    }
}

/// Best upper bound divided by `log₂(1 + 2 r_min/√(2πe))`. Bounds are taken
/// on the rank-reduced channel `Σ_r V_rᵀ`, which has the same capacity;
/// the ratio approaches `n_min` as the space scales up.
pub fn high_amplitude_prelog(h: &ChannelMatrix, x: &InputSpace) -> Result<Prelog> {
    let reference_bits = prelog_reference_bits(x)?;
    let reduced = h.row_reduced()?;
    let upper_bits = best_upper_bound(&reduced, x)?.value_bits;
    Ok(Prelog {
        ratio: upper_bits / reference_bits,
        upper_bits,
        reference_bits,
        rank: h.rank(),
        n_min: h.n_min(),
    })
}
