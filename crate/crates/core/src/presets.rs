//! Reference channels, amplitude grids, dB conventions and seeded random
//! channel ensembles.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::geometry::ChannelMatrix;

/// How an amplitude in dB maps to a linear amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DbConvention {
    /// `A = 10^{dB/10} / 2`.
    #[default]
    HalfRange,
    /// `A = 10^{dB/10}`.
    Linear,
}

impl DbConvention {
    pub fn to_linear(self, db: f64) -> f64 {
        let full = 10f64.powf(db / 10.0);
        match self {
            Self::HalfRange => full / 2.0,
            Self::Linear => full,
        }
    }

    pub fn to_db(self, amplitude: f64) -> f64 {
        let full = match self {
            Self::HalfRange => 2.0 * amplitude,
            Self::Linear => amplitude,
        };
        10.0 * full.log10()
    }
}

impl fmt::Display for DbConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HalfRange => "half-range",
            Self::Linear => "linear",
        })
    }
}

impl FromStr for DbConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "half-range" => Ok(Self::HalfRange),
            "linear" => Ok(Self::Linear),
            other => Err(domain(
                "DbConvention",
                format!("expected 'half-range' or 'linear', got '{other}'"),
            )),
        }
    }
}

/// `count` equispaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `diag(0.3, 0.1)`.
pub fn fig2_channel() -> ChannelMatrix {
    ChannelMatrix::diagonal(&[0.3, 0.1]).expect("valid preset")
}

/// 40 points from 0 to 30 dB.
pub fn fig2_db_grid() -> Vec<f64> {
    linspace(0.0, 30.0, 40)
}

/// The 1×3 row channel `(0.6557, 0.0357, 0.8491)`.
pub fn fig3_channel() -> ChannelMatrix {
    ChannelMatrix::from_rows(&[vec![0.6557, 0.0357, 0.8491]]).expect("valid preset")
}

/// 14 points from 0 to 16.25 dB.
pub fn fig3_db_grid() -> Vec<f64> {
    linspace(0.0, 16.25, 14)
}

/// `n_r × n_t` channel with independent standard normal entries.
pub fn random_channel(n_r: usize, n_t: usize, seed: u64) -> ChannelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n_r, n_t, |_, _| StandardNormal.sample(&mut rng));
    ChannelMatrix::new(m).expect("finite gaussian entries")
}

/// Square Gaussian channel, redrawn until `σ_min/σ_max ≥ 0.05`.
pub fn random_invertible(n: usize, seed: u64) -> ChannelMatrix {
    (0u64..)
        .map(|k| random_channel(n, n, seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15))))
        .find(|h| {
            let s = &h.svd().sigmas;
            s[n - 1] >= 0.05 * s[0]
        })
        .expect("unbounded search")
}

/// Random orthogonal `n × n` matrix (left factor of a Gaussian matrix).
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    random_channel(n, n, seed).svd().u.clone()
}
