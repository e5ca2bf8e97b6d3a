//! Fixtures shared by the benchmarks in `benches/`.

use ampcap_core::presets::{fig2_channel, random_channel, random_invertible, DbConvention};
use ampcap_core::{ChannelMatrix, InputSpace};

/// `diag(0.3, 0.1)` with `Box(500, 500)`.
pub fn fig2_at_30db() -> (ChannelMatrix, InputSpace) {
    let a = DbConvention::HalfRange.to_linear(30.0);
    (fig2_channel(), InputSpace::cube(2, a).expect("valid box"))
}

/// Random invertible `n × n` channel with a cube of half-width `a`.
pub fn square(n: usize, a: f64) -> (ChannelMatrix, InputSpace) {
    (random_invertible(n, 1), InputSpace::cube(n, a).expect("valid box"))
}

/// Random `n_r × n_t` channel with a cube of half-width `a`.
pub fn rectangular(n_r: usize, n_t: usize, a: f64) -> (ChannelMatrix, InputSpace) {
    (random_channel(n_r, n_t, 3), InputSpace::cube(n_t, a).expect("valid box"))
}
