//! Seeded Monte-Carlo estimators used to validate the analytic bounds.
//!
//! Every estimator splits its work into strata (support points or fixed
//! chunks), each drawing from its own ChaCha stream, and merges the strata
//! in index order. Results are therefore bit-identical for a given seed
//! regardless of the rayon pool size.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::distribution::InputDistribution;
use crate::error::{Error, Result};
use crate::geometry::ChannelMatrix;
use crate::numeric::NeumaierSum;

/// Largest discrete support accepted by the MI estimator.
pub const MAX_SUPPORT: usize = 1_000_000;
pub const MIN_MI_SAMPLES: usize = 10_000;
pub const MIN_PAIR_SAMPLES: usize = 1_000;

pub(crate) const CHUNK: usize = 1 << 14;

// Mixture components farther than this from a 1-D output contribute
// below exp(-800) relative to the nearest one.
const PRUNE_RADIUS: f64 = 40.0;

/// Sample count and seed for a Monte-Carlo evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    pub samples: usize,
    pub seed: u64,
}

impl McBudget {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

pub(crate) fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub(crate) n: usize,
    pub(crate) mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut m = Self::default();
        for v in values {
            m.n += 1;
            let delta = v - m.mean;
            m.mean += delta / m.n as f64;
            m.m2 += delta * (v - m.mean);
        }
        m
    }

    pub(crate) fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// `I(X; HX + Z)` in bits for a discrete uniform input, by stratified
/// sampling of the output given each support point.
pub fn mutual_information_discrete(
    d: &InputDistribution,
    h: &ChannelMatrix,
    budget: McBudget,
) -> Result<McEstimate> {
    if !d.is_discrete() {
        return Err(Error::Precondition(
            "mutual information oracle needs a discrete input".into(),
        ));
    }
    if d.dim() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "input has dimension {} but the channel has {} inputs",
            d.dim(),
            h.n_t()
        )));
    }
    let k = d.support_size().expect("discrete");
    if k > MAX_SUPPORT {
        return Err(Error::SupportTooLarge {
            points: k,
            limit: MAX_SUPPORT,
        });
    }
    if budget.samples < MIN_MI_SAMPLES {
        return Err(Error::BudgetTooSmall {
            given: budget.samples,
            min: MIN_MI_SAMPLES,
        });
    }
    let estimate = |value, std_error| McEstimate {
        value,
        std_error,
        samples: budget.samples,
        seed: budget.seed,
    };
    if k == 1 {
        return Ok(estimate(0.0, 0.0));
    }

    let means: Vec<DVector<f64>> = d
        .support()
        .expect("discrete")
        .iter()
        .map(|x| h.apply(x))
        .collect();
    let n_r = h.n_r();
    let per_stratum = budget.samples.div_ceil(k);
    let ln_k = (k as f64).ln();

    // 1-D outputs: sorted means allow a pruned mixture window.
    let sorted: Option<Vec<f64>> = (n_r == 1).then(|| {
        let mut v: Vec<f64> = means.iter().map(|m| m[0]).collect();
        v.sort_by(f64::total_cmp);
        v
    });

    let strata: Vec<Moments> = (0..k)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(budget.seed, j);
            let mut y = DVector::zeros(n_r);
            let mut exps = Vec::new();
            let values = (0..per_stratum).map(|_| {
                let mut z2 = 0.0;
                for r in 0..n_r {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z2 += z * z;
                    y[r] = means[j][r] + z;
                }
                exps.clear();
                match &sorted {
                    Some(mu) => {
                        let lo = mu.partition_point(|m| *m < y[0] - PRUNE_RADIUS);
                        let hi = mu.partition_point(|m| *m <= y[0] + PRUNE_RADIUS);
                        exps.extend(mu[lo..hi].iter().map(|m| -0.5 * (y[0] - m).powi(2)));
                    }
                    None => exps.extend(means.iter().map(|m| -0.5 * (&y - m).norm_squared())),
                }
                let ln_mix = crate::numeric::log_sum_exp(&exps);
                (-0.5 * z2 - ln_mix + ln_k) / std::f64::consts::LN_2
            });
            Moments::from_values(values)
        })
        .collect();

    let mean: NeumaierSum = strata.iter().map(|m| m.mean).collect();
    let var: f64 = strata.iter().map(|m| m.variance() / m.n as f64).sum();
    let kf = k as f64;
    Ok(estimate(mean.value() / kf, var.sqrt() / kf))
}

/// `E[exp(-‖H(X - X')‖²/4)]` over independent copies `X, X'`, using the
/// antithetic partner `X' ↦ -X'` when the law is symmetric.
pub fn expectation_exp_quadratic(
    d: &InputDistribution,
    h: &ChannelMatrix,
    budget: McBudget,
) -> Result<McEstimate> {
    if d.dim() != h.n_t() {
        return Err(Error::DimensionMismatch(format!(
            "input has dimension {} but the channel has {} inputs",
            d.dim(),
            h.n_t()
        )));
    }
    if budget.samples < MIN_PAIR_SAMPLES {
        return Err(Error::BudgetTooSmall {
            given: budget.samples,
            min: MIN_PAIR_SAMPLES,
        });
    }
    if let InputDistribution::PointMass(_) = d {
        return Ok(McEstimate {
            value: 1.0,
            std_error: 0.0,
            samples: budget.samples,
            seed: budget.seed,
        });
    }
    let antithetic = d.is_symmetric();
    let chunks = budget.samples.div_ceil(CHUNK);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(budget.seed, c);
            let count = CHUNK.min(budget.samples - c * CHUNK);
            Moments::from_values((0..count).map(|_| {
                let x = d.sample(&mut rng);
                let xp = d.sample(&mut rng);
                let f = (-0.25 * h.apply(&(&x - &xp)).norm_squared()).exp();
                if antithetic {
                    let g = (-0.25 * h.apply(&(&x + &xp)).norm_squared()).exp();
                    0.5 * (f + g)
                } else {
                    f
                }
            }))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    Ok(McEstimate {
        value: merged.mean,
        std_error: (merged.variance() / merged.n as f64).sqrt(),
        samples: budget.samples,
        seed: budget.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::PamConstellation;
    use crate::specialfn::phi;

    #[test]
    fn point_mass_is_exact() {
        let h = ChannelMatrix::identity(2).unwrap();
        let d = InputDistribution::point_mass(vec![1.0, -2.0]).unwrap();
        let mi = mutual_information_discrete(&d, &h, McBudget::new(10_000, 1)).unwrap();
        assert_eq!((mi.value, mi.std_error), (0.0, 0.0));
        let e = expectation_exp_quadratic(&d, &h, McBudget::new(1000, 1)).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn two_far_points_carry_one_bit() {
        let h = ChannelMatrix::identity(1).unwrap();
        let d = InputDistribution::pam_product(vec![PamConstellation::new(2, 1e6).unwrap()]).unwrap();
        let mi = mutual_information_discrete(&d, &h, McBudget::new(10_000, 3)).unwrap();
        assert!((mi.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn budget_and_support_limits() {
        let h = ChannelMatrix::identity(1).unwrap();
        let d = InputDistribution::pam_product(vec![PamConstellation::new(2, 1.0).unwrap()]).unwrap();
        assert!(matches!(
            mutual_information_discrete(&d, &h, McBudget::new(9_999, 0)),
            Err(Error::BudgetTooSmall { .. })
        ));
        let u = InputDistribution::uniform_box(vec![1.0]).unwrap();
        assert!(matches!(
            expectation_exp_quadratic(&u, &h, McBudget::new(999, 0)),
            Err(Error::BudgetTooSmall { .. })
        ));
        let h3 = ChannelMatrix::identity(3).unwrap();
        let big = InputDistribution::pam_product(vec![PamConstellation::new(101, 1.0).unwrap(); 3]).unwrap();
        assert!(matches!(
            mutual_information_discrete(&big, &h3, McBudget::new(10_000, 0)),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn uniform_pair_expectation_matches_phi() {
        let h = ChannelMatrix::identity(1).unwrap();
        let u = InputDistribution::uniform_box(vec![1.0]).unwrap();
        let e = expectation_exp_quadratic(&u, &h, McBudget::new(200_000, 5)).unwrap();
        assert!((e.value - phi(1.0).unwrap()).abs() < 3.0 * e.std_error);
    }
}
