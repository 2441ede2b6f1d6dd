//! Inverse tracking of the regularized Gram matrix under low-rank channel
//! perturbations (Woodbury identity fed by an adaptive randomized SVD), and a
//! LEO multi-user RZF precoding simulator built around it.
//!
//! * [`lowrank`]: Gram construction, Woodbury update, arSVD, dispatcher.
//! * [`cost`]: the normalized operation-count model.
//! * [`channel`]: pass geometry, array manifold, Rician fading, DFT beams.
//! * [`precoding`]: RZF precoder and Shannon sum rate.
//! * [`harness`]: seeded Monte Carlo trials, campaigns, ECDFs.
//! * [`config`]: scenario configuration.

// `!(x > 0.0)` style checks are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod cost;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lowrank;
#[doc(hidden)]
pub mod oracle;
pub mod precoding;

pub use config::{parse_config, parse_config_str, ConfigError, ScenarioConfig};
pub use cost::{cost_full, cost_wb_arsvd, CostModel};
pub use error::{Error, Result};
pub use linalg::{direct_inverse, ComplexMatrix, ComplexVector};
pub use lowrank::{
    arsvd, gram_delta, gram_matrix, update_inverse, woodbury_update, ArSvdConfig, GramState,
    InversionMethod, LowRankFactor, UpdateReport,
};
