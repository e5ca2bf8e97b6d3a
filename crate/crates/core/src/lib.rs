//! Certified upper and lower bounds on the capacity of MIMO Gaussian
//! channels under amplitude constraints, with Monte-Carlo oracles and
//! gap certificates.

pub mod audit;
pub mod bound;
pub mod distribution;
pub mod error;
pub mod geometry;
pub mod lower_bounds;
pub mod numeric;
pub mod oracle;
pub mod presets;
pub mod specialfn;
pub mod svd_precoding;
pub mod upper_bounds;

pub use bound::{BoundKind, BoundResult};
pub use error::{Error, Result};
pub use geometry::{ChannelMatrix, InputSpace};
pub use specialfn::{MomentOrder, Tolerance};
