//! Capacity lower bounds: EPI with uniform inputs, Jensen's inequality with
//! independent copies, and the dithered Ozarow-Wyner bound for discrete
//! inputs, including PAM closed forms for diagonal channels.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bound::{bits, BoundKind, BoundResult, LN_2PI_E};
use crate::distribution::{DitherSpec, InputDistribution, PamConstellation};
use crate::error::{Error, Result};
use crate::geometry::{ln_volume, ChannelMatrix, InputSpace};
use crate::numeric::golden_section;
use crate::oracle::{expectation_exp_quadratic, stream, McBudget, Moments, CHUNK};
use crate::specialfn::{ln_k_np, phi_unchecked, MomentOrder};

const LN_2_OVER_E: f64 = std::f64::consts::LN_2 - 1.0;

/// `log₂(1 + e^t)` without overflow.
fn log2_1p_exp(t: f64) -> f64 {
    let nats = if t > 30.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
    bits(nats)
}

/// `(n/2) log₂(1 + e^{(2/n) ln V}/(2πe))` for an image volume `e^{ln V}`.
fn epi_bits(n: usize, ln_image_volume: f64) -> f64 {
    let nf = n as f64;
    0.5 * nf * log2_1p_exp(2.0 / nf * ln_image_volume - LN_2PI_E)
}

fn square_invertible(h: &ChannelMatrix, x: &InputSpace, what: &str) -> Result<()> {
    if !h.is_square() || h.n_t() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{what} needs n_t = n_r = dim X, got {}x{} and dim {}",
            h.n_r(),
            h.n_t(),
            x.dim()
        )));
    }
    if !h.is_invertible() {
        return Err(Error::RankDeficient(format!("{what} needs an invertible channel")));
    }
    Ok(())
}

/// EPI bound for `X` uniform on the input space (exact volumes).
pub fn epi_uniform_invertible(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    square_invertible(h, x, "epi")?;
    let ln_v = h.ln_abs_det().expect("square") + ln_volume(x);
    Ok(BoundResult::lower("epi", epi_bits(h.n_r(), ln_v)).with_param("ln_image_volume", ln_v))
}

/// EPI bound with the box volume taken as `Π a_i` (no `2ⁿ` factor).
/// Not a certified bound; ball inputs use the exact volume.
pub fn epi_paper_vol(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    square_invertible(h, x, "epi")?;
    let ln_vol = match x {
        InputSpace::Box { halfwidths } => halfwidths.iter().map(|a| a.ln()).sum(),
        InputSpace::Ball { .. } => ln_volume(x),
    };
    let ln_v = h.ln_abs_det().expect("square") + ln_vol;
    Ok(BoundResult::lower("epi_paper_vol", epi_bits(h.n_r(), ln_v)).as_reference_variant())
}

fn epi_svd_generic(h: &ChannelMatrix, a: &[f64], volume_factor: f64, name: &'static str) -> Result<BoundResult> {
    if a.len() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "{} precoder half-widths for {} inputs",
            a.len(),
            h.n_t()
        )));
    }
    crate::geometry::InputSpace::new_box(a.to_vec())?;
    let n_min = h.n_min();
    let sigmas = &h.svd().sigmas;
    if sigmas[n_min - 1] == 0.0 {
        return Ok(BoundResult::lower(name, 0.0)
            .with_param("rank", h.rank() as f64)
            .with_note("rank deficient: zero image volume"));
    }
    let ln_v: f64 = (0..n_min)
        .map(|i| (volume_factor * a[i] * sigmas[i]).ln())
        .sum();
    Ok(BoundResult::lower(name, epi_bits(n_min, ln_v)).with_param("n_min", n_min as f64))
}

/// EPI bound with SVD precoding, `X̃ = VᵀX` uniform on `Box(a)`.
pub fn epi_svd(h: &ChannelMatrix, a: &[f64]) -> Result<BoundResult> {
    epi_svd_generic(h, a, 2.0, "epi_svd")
}

/// `epi_svd` with the volume `Π A_i σ_i` (no `2^{n_min}` factor).
pub fn epi_svd_paper_vol(h: &ChannelMatrix, a: &[f64]) -> Result<BoundResult> {
    Ok(epi_svd_generic(h, a, 1.0, "epi_svd_paper_vol")?.as_reference_variant())
}

/// Seed for the random restarts of [`amplitude_allocate`].
pub const ALLOCATION_SEED: u64 = 0x5eed_a110c;
const ALLOCATION_RANDOM_STARTS: usize = 8;
const ALLOCATION_IMPROVEMENT: f64 = 1e-10;

fn ln_psi(sigmas: &[f64], b: &[f64]) -> f64 {
    sigmas
        .iter()
        .zip(b)
        .map(|(s, bi)| phi_unchecked(s * bi).ln())
        .sum()
}

/// Amplitudes `b ∈ X` minimizing `Π φ(σ_i b_i)`. Boxes give `b = a`; balls
/// use multi-start coordinate descent on the sphere `‖b‖ = A`, each step a
/// 1-D golden-section search on one coordinate with the others rescaled.
pub fn amplitude_allocate(sigmas: &[f64], x: &InputSpace) -> Result<Vec<f64>> {
    if sigmas.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} gains for a {}-dimensional constraint",
            sigmas.len(),
            x.dim()
        )));
    }
    if !sigmas.iter().any(|&s| s > 0.0) {
        return Err(Error::Precondition("amplitude allocation needs a positive gain".into()));
    }
    let radius = match x {
        InputSpace::Box { halfwidths } => return Ok(halfwidths.clone()),
        InputSpace::Ball { radius, .. } => *radius,
    };
    let active: Vec<usize> = (0..sigmas.len()).filter(|&i| sigmas[i] > 0.0).collect();
    let s: Vec<f64> = active.iter().map(|&i| sigmas[i]).collect();
    let m = s.len();
    let mut best = vec![0.0; m];
    if radius > 0.0 {
        let mut starts = vec![vec![radius / (m as f64).sqrt(); m]];
        let mut rng = ChaCha8Rng::seed_from_u64(ALLOCATION_SEED);
        for _ in 0..ALLOCATION_RANDOM_STARTS {
            let g: Vec<f64> = (0..m)
                .map(|_| StandardNormal.sample(&mut rng))
                .map(|v: f64| v.abs())
                .collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            starts.push(g.iter().map(|v| radius * v / norm).collect());
        }
        let mut best_value = f64::INFINITY;
        for start in starts {
            let b = sphere_descent(&s, radius, start);
            let v = ln_psi(&s, &b);
            if v < best_value {
                best_value = v;
                best = b;
            }
        }
    }
    let mut out = vec![0.0; sigmas.len()];
    for (k, &i) in active.iter().enumerate() {
        out[i] = best[k];
    }
    Ok(out)
}

fn sphere_descent(s: &[f64], radius: f64, mut b: Vec<f64>) -> Vec<f64> {
    let m = s.len();
    if m == 1 {
        return vec![radius];
    }
    let mut value = ln_psi(s, &b);
    for _ in 0..500 {
        let before = value;
        for i in 0..m {
            let rest = b
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v * v)
                .sum::<f64>()
                .sqrt();
            if rest == 0.0 {
                continue;
            }
            let candidate = |t: f64| {
                let scale = (radius * radius - t * t).max(0.0).sqrt() / rest;
                let mut c = b.clone();
                for (j, cj) in c.iter_mut().enumerate() {
                    *cj = if j == i { t } else { *cj * scale };
                }
                c
            };
            let best = golden_section(|t| ln_psi(s, &candidate(t)), 0.0, radius, 1e-10 * radius);
            if best.value < value {
                b = candidate(best.x);
                value = best.value;
            }
        }
        if before - value < ALLOCATION_IMPROVEMENT {
            break;
        }
    }
    b
}

fn jensen_bits(n_active: usize, ln_psi: f64) -> f64 {
    bits(0.5 * n_active as f64 * LN_2_OVER_E - ln_psi)
}

/// Jensen bound for parallel channels with gains `sigmas`, the amplitudes
/// constrained to `x`. Zero gains are inactive and do not count in `n`.
pub fn jensen_bound_diag(sigmas: &[f64], x: &InputSpace) -> Result<BoundResult> {
    if sigmas.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} gains for a {}-dimensional constraint",
            sigmas.len(),
            x.dim()
        )));
    }
    if sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::Precondition("gains must be finite and nonnegative".into()));
    }
    let n_active = sigmas.iter().filter(|&&s| s > 0.0).count();
    if n_active == 0 {
        return Ok(BoundResult::lower("jensen_diag", 0.0).with_note("no active dimension"));
    }
    let b = amplitude_allocate(sigmas, x)?;
    let lp = ln_psi(sigmas, &b);
    let mut r = BoundResult::clamped("jensen_diag", BoundKind::Lower, jensen_bits(n_active, lp))
        .with_param("n_active", n_active as f64);
    for (i, bi) in b.iter().enumerate() {
        r = r.with_param(format!("b{}", i + 1), *bi);
    }
    Ok(r)
}

/// Jensen bound for an arbitrary input law, with the expectation estimated
/// by Monte Carlo. `n` is the rank of `H`, the dimension of its image.
pub fn jensen_bound_general(
    h: &ChannelMatrix,
    d: &InputDistribution,
    budget: McBudget,
) -> Result<BoundResult> {
    let e = expectation_exp_quadratic(d, h, budget)?;
    let rank = h.rank();
    let raw = if rank == 0 || e.value >= 1.0 {
        0.0
    } else {
        jensen_bits(rank, e.value.ln())
    };
    Ok(BoundResult::clamped("jensen_general", BoundKind::Lower, raw)
        .with_param("expectation", e.value)
        .with_param("expectation_std_error", e.std_error)
        .with_param("std_error_bits", e.std_error / (e.value * std::f64::consts::LN_2))
        .with_param("samples", budget.samples as f64)
        .with_param("seed", budget.seed as f64))
}

/// Map `g` from the output back to the input space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// `H⁻¹y`; square invertible channels only.
    MatrixInverse,
    /// `H⁺y`.
    PseudoInverse,
    /// `y`; needs `n_r = n_t`.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwOptions {
    pub p: MomentOrder,
    pub estimator: Estimator,
    pub mc: McBudget,
    /// Use Monte Carlo even where a closed form exists.
    pub force_mc: bool,
}

impl Default for OwOptions {
    fn default() -> Self {
        Self {
            p: MomentOrder::TWO,
            estimator: Estimator::MatrixInverse,
            mc: McBudget::new(200_000, 0),
            force_mc: false,
        }
    }
}

fn estimator_matrix(h: &ChannelMatrix, estimator: Estimator) -> Result<DMatrix<f64>> {
    match estimator {
        Estimator::MatrixInverse => {
            if !h.is_invertible() {
                return Err(Error::RankDeficient("matrix-inverse estimator".into()));
            }
            Ok(h.entries().clone().try_inverse().ok_or_else(|| {
                Error::RankDeficient("matrix-inverse estimator".into())
            })?)
        }
        Estimator::PseudoInverse => {
            let svd = h.svd();
            let mut sigma_plus = DMatrix::zeros(h.n_t(), h.n_r());
            for (i, &s) in svd.sigmas.iter().enumerate() {
                if s > 0.0 {
                    sigma_plus[(i, i)] = 1.0 / s;
                }
            }
            Ok(&svd.v * sigma_plus * svd.u.transpose())
        }
        Estimator::Identity => {
            if !h.is_square() {
                return Err(Error::DimensionMismatch("identity estimator needs n_r = n_t".into()));
            }
            Ok(DMatrix::identity(h.n_t(), h.n_t()))
        }
    }
}

/// `E‖U‖^p` for uniform dither, exact when `p = 2` or in one dimension.
fn dither_moment_exact(u: &DitherSpec, p: MomentOrder) -> Option<f64> {
    if p == MomentOrder::TWO {
        Some(u.second_moment())
    } else if let [d] = u.halfwidths() {
        Some(d.powf(p.get()) / (p.get() + 1.0))
    } else {
        None
    }
}

/// Ozarow-Wyner bound `[H(X_D) - G₁ - G₂]⁺` for a discrete input with
/// uniform dither `U` and estimator `g`.
pub fn ow_bound(
    d: &InputDistribution,
    h: &ChannelMatrix,
    u: &DitherSpec,
    options: &OwOptions,
) -> Result<BoundResult> {
    let marginals = match d {
        InputDistribution::PamProduct(m) => m,
        InputDistribution::PointMass(_) => {
            return Ok(BoundResult::lower("ow", 0.0).with_note("single support point"))
        }
        _ => return Err(Error::Precondition("Ozarow-Wyner bound needs a discrete input".into())),
    };
    if d.dim() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "input has dimension {} but the channel has {} inputs",
            d.dim(),
            h.n_t()
        )));
    }
    u.check_disjoint(marginals)?;
    let n = h.n_t();
    let nf = n as f64;
    let p = options.p;
    let entropy = d.entropy_bits().expect("discrete");
    let g = estimator_matrix(h, options.estimator)?;

    let closed = p == MomentOrder::TWO
        && !options.force_mc
        && h.is_invertible()
        && matches!(options.estimator, Estimator::MatrixInverse | Estimator::PseudoInverse);
    let (u_moment, w_moment, std_error_bits, path) = if closed {
        // U + X - H⁻¹(HX + Z) = U - H⁻¹Z
        let trace: f64 = h.svd().sigmas.iter().map(|s| 1.0 / (s * s)).sum();
        (u.second_moment(), u.second_moment() + trace, 0.0, "closed form")
    } else {
        let (um, wm) = ow_moments_mc(d, h, u, &g, p, options.mc);
        let u_moment = dither_moment_exact(u, p).unwrap_or(um.mean);
        let se_bits = nf / p.get() * (wm.variance() / wm.n as f64).sqrt()
            / (wm.mean * std::f64::consts::LN_2);
        (u_moment, wm.mean, se_bits, "monte carlo")
    };
    let g1 = nf / p.get() * (w_moment / u_moment).log2();
    let g2 = bits(nf * ln_k_np(n, p)?) + nf / p.get() * u_moment.log2() - u.entropy_bits();
    let raw = entropy - g1 - g2;
    let mut r = BoundResult::clamped("ow", BoundKind::Lower, raw)
        .with_param("entropy_bits", entropy)
        .with_param("g1_bits", g1)
        .with_param("g2_bits", g2)
        .with_param("p", p.get())
        .with_note(path);
    if !closed {
        r = r
            .with_param("std_error_bits", std_error_bits)
            .with_param("samples", options.mc.samples as f64)
            .with_param("seed", options.mc.seed as f64);
    }
    Ok(r)
}

fn ow_moments_mc(
    d: &InputDistribution,
    h: &ChannelMatrix,
    u: &DitherSpec,
    g: &DMatrix<f64>,
    p: MomentOrder,
    budget: McBudget,
) -> (Moments, Moments) {
    let chunks = budget.samples.max(1).div_ceil(CHUNK);
    let p = p.get();
    let parts: Vec<(Moments, Moments)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(budget.seed, c);
            let count = CHUNK.min(budget.samples.max(1) - c * CHUNK);
            let mut us = Vec::with_capacity(count);
            let mut ws = Vec::with_capacity(count);
            for _ in 0..count {
                let x = d.sample(&mut rng);
                let du = u.sample(&mut rng);
                let z = DVector::from_fn(h.n_r(), |_, _| StandardNormal.sample(&mut rng));
                let y = h.apply(&x) + z;
                let w = &du + &x - g * y;
                us.push(du.norm().powf(p));
                ws.push(w.norm().powf(p));
            }
            (
                Moments::from_values(us.into_iter()),
                Moments::from_values(ws.into_iter()),
            )
        })
        .collect();
    let (um, wm) = parts
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(a, b), (c, d)| {
            (a.merge(c), b.merge(d))
        });
    (um, wm)
}

/// Scalar Ozarow-Wyner closed form for `PAM(N, A)` through gain `h` with
/// matched uniform dither, `p = 2` and `g(y) = y/h`; zero when `N = 1`.
pub fn ow_pam_scalar_bits(h: f64, pam: &PamConstellation) -> f64 {
    if pam.points() < 2 || h == 0.0 {
        return 0.0;
    }
    let delta = pam.half_spacing();
    let gap = 0.5 * (std::f64::consts::PI * std::f64::consts::E / 6.0).log2()
        + 0.5 * (3.0 / (h * h * delta * delta)).ln_1p() / std::f64::consts::LN_2;
    (pam.entropy_bits() - gap).max(0.0)
}

/// Points per dimension, `⌊1 + 2A|h|/√(2πe)⌋`.
pub fn pam_points(amplitude: f64, gain: f64) -> usize {
    let x = 1.0 + 2.0 * amplitude * gain.abs() * (-0.5 * LN_2PI_E).exp();
    x.floor().min(usize::MAX as f64) as usize
}

/// Per-dimension PAM amplitudes for a diagonal channel: the box half-widths,
/// or `A/√n` for a ball so the product constellation stays inside it.
pub fn pam_amplitudes(x: &InputSpace) -> Vec<f64> {
    match x {
        InputSpace::Box { halfwidths } => halfwidths.clone(),
        InputSpace::Ball { radius, dim } => vec![radius / (*dim as f64).sqrt(); *dim],
    }
}

/// PAM constellations used by [`ow_pam_diag`].
pub fn pam_constellations(h: &ChannelMatrix, x: &InputSpace) -> Result<Vec<PamConstellation>> {
    let diag = h
        .diagonal_entries()
        .ok_or_else(|| Error::Precondition("PAM bound needs a diagonal channel".into()))?;
    if diag.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {0}x{0} but the input space has dimension {1}",
            diag.len(),
            x.dim()
        )));
    }
    pam_amplitudes(x)
        .iter()
        .zip(&diag)
        .map(|(&a, &hii)| PamConstellation::new(pam_points(a, hii), a))
        .collect()
}

/// Sum of per-dimension Ozarow-Wyner bounds with PAM inputs on a diagonal
/// channel; single-point dimensions contribute 0.
pub fn ow_pam_diag(h: &ChannelMatrix, x: &InputSpace) -> Result<BoundResult> {
    let pams = pam_constellations(h, x)?;
    let diag = h.diagonal_entries().expect("checked diagonal");
    let mut total = 0.0;
    let mut r = BoundResult::lower("ow_pam_diag", 0.0);
    for (i, (pam, hii)) in pams.iter().zip(&diag).enumerate() {
        let v = ow_pam_scalar_bits(*hii, pam);
        total += v;
        r = r
            .with_param(format!("N{}", i + 1), pam.points() as f64)
            .with_param(format!("term{}", i + 1), v);
    }
    r.value_bits = total;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> (ChannelMatrix, InputSpace) {
        (
            ChannelMatrix::diagonal(&[0.3, 0.1]).unwrap(),
            InputSpace::cube(2, 500.0).unwrap(),
        )
    }

    #[test]
    fn epi_fig2_values() {
        let (h, x) = fig2();
        let paper = epi_paper_vol(&h, &x).unwrap();
        assert!((paper.value_bits - 8.78177).abs() < 1e-3, "{}", paper.value_bits);
        assert!(paper.reference_variant);
        let exact = epi_uniform_invertible(&h, &x).unwrap();
        assert!((exact.value_bits - 10.7790).abs() < 1e-3, "{}", exact.value_bits);
        let zero = epi_uniform_invertible(&h, &InputSpace::new_box(vec![0.0, 500.0]).unwrap()).unwrap();
        assert_eq!(zero.value_bits, 0.0);
    }

    #[test]
    fn epi_rejects_singular() {
        let h = ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            epi_uniform_invertible(&h, &InputSpace::cube(2, 1.0).unwrap()),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn epi_svd_matches_diagonal_epi() {
        let (h, x) = fig2();
        let a = epi_svd(&h, &[500.0, 500.0]).unwrap();
        let b = epi_uniform_invertible(&h, &x).unwrap();
        assert!((a.value_bits - b.value_bits).abs() < 1e-12);
        let rank1 = ChannelMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let z = epi_svd(&rank1, &[1.0, 1.0]).unwrap();
        assert_eq!(z.value_bits, 0.0);
        assert!(!z.diagnostics.is_empty());
    }

    #[test]
    fn jensen_fig2_anchor() {
        let r = jensen_bound_diag(&[0.3, 0.1], &InputSpace::cube(2, 500.0).unwrap()).unwrap();
        assert!((r.value_bits - 10.8003).abs() < 5e-3, "{}", r.value_bits);
        let z = jensen_bound_diag(&[0.0, 0.0], &InputSpace::cube(2, 5.0).unwrap()).unwrap();
        assert_eq!(z.value_bits, 0.0);
        let zero_amp = jensen_bound_diag(&[1.0], &InputSpace::cube(1, 0.0).unwrap()).unwrap();
        assert_eq!(zero_amp.value_bits, 0.0);
    }

    #[test]
    fn jensen_scalar_asymptote() {
        let a = 1e6;
        let r = jensen_bound_diag(&[1.0], &InputSpace::cube(1, a).unwrap()).unwrap();
        let asym = ((2.0 / std::f64::consts::E).sqrt() * a / std::f64::consts::PI.sqrt()).log2();
        assert!((r.value_bits - asym).abs() < 1e-3);
    }

    #[test]
    fn ball_allocation_symmetric_and_skewed() {
        let b = amplitude_allocate(&[0.7, 0.7, 0.7], &InputSpace::ball(3.0, 3).unwrap()).unwrap();
        for bi in &b {
            assert!((bi - 3f64.sqrt()).abs() < 1e-4, "{b:?}");
        }
        let b = amplitude_allocate(&[1.0, 0.01], &InputSpace::ball(10.0, 2).unwrap()).unwrap();
        assert!(b[0] * b[0] >= 0.99 * 100.0, "{b:?}");
        let boxed = amplitude_allocate(&[1.0, 2.0], &InputSpace::new_box(vec![3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(boxed, vec![3.0, 4.0]);
        assert!(amplitude_allocate(&[0.0], &InputSpace::ball(1.0, 1).unwrap()).is_err());
    }

    #[test]
    fn ow_scalar_closed_form() {
        let h = ChannelMatrix::diagonal(&[0.3]).unwrap();
        let pam = PamConstellation::new(73, 500.0).unwrap();
        let d = InputDistribution::pam_product(vec![pam]).unwrap();
        let u = DitherSpec::matched(&[pam]).unwrap();
        let r = ow_bound(&d, &h, &u, &OwOptions::default()).unwrap();
        assert!((r.value_bits - 5.5565).abs() < 1e-3, "{}", r.value_bits);
        assert!((r.value_bits - ow_pam_scalar_bits(0.3, &pam)).abs() < 1e-12);
    }

    #[test]
    fn ow_degenerate_cases() {
        let h = ChannelMatrix::diagonal(&[0.3]).unwrap();
        let single = PamConstellation::new(1, 5.0).unwrap();
        assert_eq!(ow_pam_scalar_bits(0.3, &single), 0.0);
        let d = InputDistribution::pam_product(vec![single]).unwrap();
        let r = ow_bound(&d, &h, &DitherSpec::matched(&[single]).unwrap(), &OwOptions::default()).unwrap();
        assert_eq!(r.value_bits, 0.0);
        // tiny spacing: G1 blows up
        let tight = PamConstellation::new(50, 1e-3).unwrap();
        assert_eq!(ow_pam_scalar_bits(0.3, &tight), 0.0);
    }

    #[test]
    fn ow_pam_diag_fig2() {
        let (h, x) = fig2();
        let r = ow_pam_diag(&h, &x).unwrap();
        assert_eq!(r.param("N1"), Some(73.0));
        assert_eq!(r.param("N2"), Some(25.0));
        assert!((r.param("term1").unwrap() - 5.5565).abs() < 1e-3);
        let dual = crate::upper_bounds::duality_box_bound(&h, &x).unwrap();
        assert!(dual.value_bits - r.value_bits < 1.64 * 2.0);
    }
}
