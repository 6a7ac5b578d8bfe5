//! Nonlinear interference estimation for ultra-wideband WDM fiber links with
//! inter-channel stimulated Raman scattering and modulation-format awareness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod closed_form;
pub mod commands;
pub mod config;
pub mod fiber;
pub mod grid;
pub mod integral;
pub mod modulation;
pub mod plan;
pub mod quad;
pub mod raman;
pub mod ssfm;
pub mod units;

pub use error::{NliError, Result};
pub use fiber::{FiberParams, FiberSpec};
pub use grid::{Channel, ChannelGrid};
pub use modulation::{kurtosis_from_constellation, ConstellationPoint, ModulationFormat};
pub use plan::{AseModel, LinkPlan};
