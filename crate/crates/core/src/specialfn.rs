//! Scalar special functions and moments consumed by the bound formulas.
//!
//! Gamma-function ratios are always formed as differences of logarithms, so
//! dimensions in the hundreds and moment orders up to a few hundred stay
//! finite.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};
use crate::numeric::{integrate, NeumaierSum};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Below this argument [`phi`] switches to its Taylor expansion.
pub const PHI_SERIES_CUTOFF: f64 = 1e-3;

/// Convergence controls for iterative evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self> {
        if !(rel > 0.0 && rel.is_finite()) {
            return Err(domain("Tolerance", format!("rel must be positive, got {rel}")));
        }
        if !(abs >= 0.0 && abs.is_finite()) {
            return Err(domain("Tolerance", format!("abs must be nonnegative, got {abs}")));
        }
        if max_iter == 0 {
            return Err(domain("Tolerance", "max_iter must be at least 1"));
        }
        Ok(Self { rel, abs, max_iter })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 0.0,
            max_iter: 100_000,
        }
    }
}

/// Moment exponent `p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MomentOrder(f64);

impl MomentOrder {
    pub const TWO: MomentOrder = MomentOrder(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p.is_finite() {
            Ok(Self(p))
        } else {
            Err(domain("MomentOrder", format!("p must be positive and finite, got {p}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain("log_gamma", format!("argument must be positive, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Γ(x + d) - ln Γ(x)` without cancellation for large `x`.
pub fn ln_gamma_ratio(x: f64, d: f64) -> f64 {
    if x < 10.0 || x + d < 10.0 {
        return libm::lgamma(x + d) - libm::lgamma(x);
    }
    // Stirling series coefficients B_{2m} / (2m (2m - 1)).
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let y = x + d;
    let mut corr = 0.0;
    let (iy2, ix2) = (1.0 / (y * y), 1.0 / (x * x));
    let (mut py, mut px) = (1.0 / y, 1.0 / x);
    for c in C {
        corr += c * (py - px);
        py *= iy2;
        px *= ix2;
    }
    (x - 0.5) * (d / x).ln_1p() + d * y.ln() - d + corr
}

fn stirling_error(k: u64) -> f64 {
    let n = k as f64;
    if k <= 15 {
        return libm::lgamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * LN_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nn = n * n;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

// x ln(x/m) + m - x, accurate when x is close to m.
fn deviance_term(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Log of the Poisson probability mass `z^k e^{-z} / k!`.
pub fn ln_poisson_pmf(k: u64, z: f64) -> f64 {
    if z == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -z;
    }
    let kf = k as f64;
    -0.5 * (2.0 * PI * kf).ln() - stirling_error(k) - deviance_term(kf, z)
}

/// Log of the maximum-entropy constant `k_{n,p}`.
pub fn ln_k_np(n: usize, p: MomentOrder) -> Result<f64> {
    if n == 0 {
        return Err(domain("k_np", "dimension must be at least 1"));
    }
    let (nf, p) = (n as f64, p.get());
    Ok(0.5 * PI.ln() + 1.0 / p + (p / nf).ln() / p + libm::lgamma(nf / p + 1.0) / nf
        - libm::lgamma(nf / 2.0 + 1.0) / nf)
}

/// Constant `k_{n,p}` of the p-th moment maximum-entropy inequality.
pub fn k_np(n: usize, p: MomentOrder) -> Result<f64> {
    ln_k_np(n, p).map(f64::exp)
}

/// `φ(x) = (e^{-x²} - 1 + √π x (1 - 2Q(√2 x))) / x²`, the pairwise
/// expectation `E[exp(-x²(U-U')²/4)]` for independent uniforms on `[-1, 1]`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("phi", format!("argument must be nonnegative, got {x}")));
    }
    Ok(phi_unchecked(x))
}

pub(crate) fn phi_unchecked(x: f64) -> f64 {
    if x < PHI_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 30.0
    } else if x > 1e8 {
        SQRT_PI / x - 1.0 / (x * x)
    } else {
        // 1 - 2Q(√2 x) = erf(x)
        let x2 = x * x;
        ((-x2).exp_m1() + SQRT_PI * x * libm::erf(x)) / x2
    }
}

/// Evaluation route taken by the noncentral-chi moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentPath {
    Closed,
    Series { terms: usize },
    Quadrature { intervals: usize },
}

/// Logarithm of `E[‖x + Z‖^p]` together with the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEvaluation {
    pub ln_value: f64,
    pub path: MomentPath,
}

fn check_moment_args(n: usize, lambda: f64) -> Result<()> {
    if n == 0 {
        return Err(domain("noncentral_chi_moment", "dimension must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain(
            "noncentral_chi_moment",
            format!("noncentrality must be finite and nonnegative, got {lambda}"),
        ));
    }
    Ok(())
}

/// Confluent-hypergeometric series for `ln E[‖x + Z‖^p]`, `‖x‖ = lambda`.
///
/// Summation is anchored at the Poisson mode `k0 ≈ λ²/2` and walks outward
/// with term ratios, so the series never over- or underflows.
pub fn ln_noncentral_chi_moment_series(
    n: usize,
    lambda: f64,
    p: MomentOrder,
    tol: &Tolerance,
) -> Result<MomentEvaluation> {
    check_moment_args(n, lambda)?;
    let p = p.get();
    let a = (n as f64 + p) / 2.0;
    let b = n as f64 / 2.0;
    let z = 0.5 * lambda * lambda;
    let base = 0.5 * p * LN_2;
    if z == 0.0 {
        return Ok(MomentEvaluation {
            ln_value: base + ln_gamma_ratio(b, 0.5 * p),
            path: MomentPath::Closed,
        });
    }
    const CUT: f64 = 1e-17;
    let k0 = z.floor() as u64;
    let anchor = ln_gamma_ratio(b + k0 as f64, 0.5 * p) + ln_poisson_pmf(k0, z);
    let ratio = |k: f64| (a + k) / (b + k) * z / (k + 1.0);

    let mut sum = NeumaierSum::default();
    sum.add(1.0);
    let mut terms = 1usize;
    let mut t = 1.0;
    let mut k = k0 as f64;
    loop {
        let r = ratio(k);
        t *= r;
        k += 1.0;
        sum.add(t);
        terms += 1;
        if r < 1.0 && t < CUT * sum.value() {
            break;
        }
        if terms > tol.max_iter {
            return Err(Error::NonConvergence {
                what: "noncentral chi moment series",
                partial: base + anchor + sum.value().ln(),
            });
        }
    }
    t = 1.0;
    k = k0 as f64;
    while k > 0.0 {
        t /= ratio(k - 1.0);
        k -= 1.0;
        sum.add(t);
        terms += 1;
        if t < CUT * sum.value() {
            break;
        }
        if terms > tol.max_iter {
            return Err(Error::NonConvergence {
                what: "noncentral chi moment series",
                partial: base + anchor + sum.value().ln(),
            });
        }
    }
    Ok(MomentEvaluation {
        ln_value: base + anchor + sum.value().ln(),
        path: MomentPath::Series { terms },
    })
}

/// Direct quadrature of `E[‖x + Z‖^p]` over the Gaussian coordinate along `x`
/// and the chi-distributed radius of the orthogonal complement.
pub fn ln_noncentral_chi_moment_quadrature(
    n: usize,
    lambda: f64,
    p: MomentOrder,
    tol: &Tolerance,
) -> Result<MomentEvaluation> {
    check_moment_args(n, lambda)?;
    let p = p.get();
    let ln_scale = (lambda + (n as f64 + p).sqrt()).ln();
    let z_hi = 12.0 + p.sqrt();
    let mut breaks = vec![-z_hi];
    if -lambda > -z_hi {
        breaks.push(-lambda);
    }
    breaks.push(z_hi);
    let ln_gauss = |z: f64| -0.5 * z * z - 0.5 * LN_2PI;
    let outer_rel = (0.1 * tol.rel).max(1e-13);
    let max_intervals = 2000;

    let q = if n == 1 {
        integrate(
            |z| (ln_gauss(z) + p * (lambda + z).abs().ln() - p * ln_scale).exp(),
            &breaks,
            outer_rel,
            0.0,
            max_intervals,
        )?
    } else {
        let m = (n - 1) as f64;
        let ln_chi_norm = -((0.5 * m - 1.0) * LN_2 + libm::lgamma(0.5 * m));
        let t_hi = 12.0 + (n as f64 + p).sqrt();
        let mut inner_failure = None;
        let q = integrate(
            |z| {
                let u2 = (lambda + z) * (lambda + z);
                let inner = integrate(
                    |t: f64| {
                        let radial = if n == 2 { 0.0 } else { (m - 1.0) * t.ln() };
                        (ln_chi_norm + radial - 0.5 * t * t + 0.5 * p * (u2 + t * t).ln()
                            - p * ln_scale)
                            .exp()
                    },
                    &[0.0, t_hi],
                    1e-12,
                    0.0,
                    max_intervals,
                );
                match inner {
                    Ok(v) => ln_gauss(z).exp() * v.value,
                    Err(e) => {
                        inner_failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &breaks,
            outer_rel,
            0.0,
            max_intervals,
        );
        if let Some(e) = inner_failure {
            return Err(e);
        }
        q?
    };
    Ok(MomentEvaluation {
        ln_value: p * ln_scale + q.value.ln(),
        path: MomentPath::Quadrature {
            intervals: q.intervals,
        },
    })
}

/// `ln E[‖x + Z‖^p]` for `Z ~ N(0, I_n)` and `‖x‖ = lambda`: series first,
/// quadrature when the series exceeds the iteration budget.
pub fn ln_noncentral_chi_moment(
    n: usize,
    lambda: f64,
    p: MomentOrder,
    tol: &Tolerance,
) -> Result<MomentEvaluation> {
    match ln_noncentral_chi_moment_series(n, lambda, p, tol) {
        Err(Error::NonConvergence { partial, .. }) => {
            ln_noncentral_chi_moment_quadrature(n, lambda, p, tol).map_err(|_| {
                Error::NonConvergence {
                    what: "noncentral chi moment",
                    partial: partial.exp(),
                }
            })
        }
        other => other,
    }
}

/// `E[‖x + Z‖^p]` with `Z` standard normal in `n` dimensions, `‖x‖ = lambda`.
pub fn noncentral_chi_moment(n: usize, lambda: f64, p: MomentOrder, tol: &Tolerance) -> Result<f64> {
    ln_noncentral_chi_moment(n, lambda, p, tol).map(|m| m.ln_value.exp())
}

/// Log-volume of the centered `n`-ball of radius `r` (`-inf` for `r = 0`).
pub fn ln_ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("ball_volume", "dimension must be at least 1"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain("ball_volume", format!("radius must be finite and nonnegative, got {r}")));
    }
    let nf = n as f64;
    Ok(0.5 * nf * PI.ln() + nf * r.ln() - libm::lgamma(0.5 * nf + 1.0))
}

/// Volume `π^{n/2} r^n / Γ(n/2 + 1)` of the centered `n`-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    ln_ball_volume(n, r).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_values_and_domain() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!(rel(log_gamma(10.0).unwrap(), 362_880f64.ln()) < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_ratio_matches_direct_difference() {
        // 40-digit reference values
        let cases = [
            (10.5, 0.25, 0.578_847_005_656_754_7),
            (10.5, 64.0, 231.478_567_153_844_1),
            (1e4, 0.25, 2.302_575_717_915_923_6),
            (1e4, 64.0, 589.662_958_436_088_3),
            (3.3e5, 0.25, 3.176_711_699_269_685),
            (3.3e5, 64.0, 813.244_376_439_431_5),
        ];
        for (x, d, expected) in cases {
            assert!(rel(ln_gamma_ratio(x, d), expected) < 1e-14, "x={x} d={d}");
        }
        // integer step: Γ(x+1)/Γ(x) = x
        assert!(rel(ln_gamma_ratio(1234.5, 1.0), 1234.5f64.ln()) < 1e-15);
    }

    #[test]
    fn poisson_pmf_normalizes() {
        for &z in &[0.3, 7.0, 480.5] {
            let s: f64 = (0..5000).map(|k| ln_poisson_pmf(k, z).exp()).sum();
            assert!((s - 1.0).abs() < 1e-13, "z={z} s={s}");
        }
        assert!(
            (ln_poisson_pmf(3, 2.0) - (2f64.powi(3) * (-2f64).exp() / 6.0).ln()).abs() < 1e-14
        );
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(2f64.sqrt()) - 0.078_649_603_525_142_58).abs() < 1e-14);
        assert!((q_function(-38.0) - 1.0).abs() < 1e-14);
        for &x in &[0.1, 0.7, 2.5, 6.0] {
            assert!((q_function(x) - (1.0 - q_function(-x))).abs() < 1e-15);
        }
    }

    #[test]
    fn k_np_values() {
        let two = MomentOrder::TWO;
        for n in 1..=10 {
            let expected = (2.0 * PI * std::f64::consts::E / n as f64).sqrt();
            assert!(rel(k_np(n, two).unwrap(), expected) < 1e-12);
        }
        let one = MomentOrder::new(1.0).unwrap();
        assert!((k_np(1, one).unwrap() - 5.436_563_656_918_09).abs() < 1e-10);
        assert!((k_np(2, two).unwrap() - 2.922_282_365_322_277_9).abs() < 1e-12);
        assert!(k_np(0, two).is_err());
        assert!(MomentOrder::new(0.0).is_err());
        assert!(MomentOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 1.0);
        assert!((phi(1.0).unwrap() - 0.861_527_7).abs() < 1e-7);
        assert!((phi(100.0).unwrap() - 0.017_624_5).abs() < 1e-7);
        assert!(phi(-0.1).is_err());
        assert!(phi(f64::NAN).is_err());
    }

    #[test]
    fn phi_branches_agree_at_cutoff() {
        let x: f64 = PHI_SERIES_CUTOFF;
        let x2 = x * x;
        let direct = ((-x2).exp_m1() + SQRT_PI * x * libm::erf(x)) / x2;
        let series = 1.0 - x2 / 6.0 + x2 * x2 / 30.0;
        assert!((direct - series).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!(rel(ball_volume(1, 3.5).unwrap(), 7.0) < 1e-14);
        assert!(rel(ball_volume(2, 1.0).unwrap(), PI) < 1e-14);
        assert!(rel(ball_volume(3, 2.0).unwrap(), 32.0 * PI / 3.0) < 1e-14);
        assert_eq!(ball_volume(4, 0.0).unwrap(), 0.0);
        assert!(ball_volume(0, 1.0).is_err());
        assert!(ball_volume(2, -1.0).is_err());
    }

    #[test]
    fn moment_closed_cases() {
        let tol = Tolerance::default();
        let two = MomentOrder::TWO;
        for n in 1..=6 {
            assert!(rel(noncentral_chi_moment(n, 0.0, two, &tol).unwrap(), n as f64) < 1e-13);
        }
        assert!(rel(noncentral_chi_moment(2, 5.0, two, &tol).unwrap(), 27.0) < 1e-12);
        assert!(noncentral_chi_moment(0, 1.0, two, &tol).is_err());
        assert!(noncentral_chi_moment(2, -1.0, two, &tol).is_err());
    }

    #[test]
    fn moment_series_budget_falls_back_to_quadrature() {
        let tight = Tolerance::new(1e-9, 0.0, 50).unwrap();
        let p = MomentOrder::new(1.5).unwrap();
        let series = ln_noncentral_chi_moment_series(3, 40.0, p, &tight);
        assert!(matches!(series, Err(Error::NonConvergence { .. })));
        let eval = ln_noncentral_chi_moment(3, 40.0, p, &tight).unwrap();
        assert!(matches!(eval.path, MomentPath::Quadrature { .. }));
        let reference = ln_noncentral_chi_moment_series(3, 40.0, p, &Tolerance::default()).unwrap();
        assert!((eval.ln_value - reference.ln_value).abs() < 1e-8);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 0.0, 1).is_err());
        assert!(Tolerance::new(1e-6, -1.0, 1).is_err());
        assert!(Tolerance::new(1e-6, 0.0, 0).is_err());
        assert!(Tolerance::new(1e-6, 0.0, 1).is_ok());
    }
}
