//! Unsupervised fault detection for induction motors from discretized signals.
//!
//! The crate treats measured signals (stator currents, instantaneous active
//! power) as functions sampled on a grid and provides:
//!
//! - quadrature-weighted L²/L¹ geometry over sampled functions ([`fda`]),
//! - signal conditioning: alignment, scaling, derivatives, one-sided
//!   spectra ([`preprocess`]),
//! - functional principal component analysis ([`fpca`]),
//! - functional diffusion maps ([`fdm`]),
//! - k-means and silhouette scoring for unlabeled embeddings ([`cluster`]),
//! - a seedable synthetic corpus generator covering healthy, broken-bar and
//!   oscillating-load conditions ([`synth`]),
//! - the two-stage detection/diagnosis pipeline plus file formats and
//!   plotting ([`pipeline`], [`io`]).

pub mod cluster;
mod eig;
pub mod error;
pub mod fda;
pub mod fdm;
pub mod fpca;
pub mod io;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

pub use error::{Error, Result};
pub use fda::{FunctionalDataset, QuadratureScheme, SampleGrid};
pub use fdm::{FdmModel, FdmParams, KernelKind};
pub use fpca::FpcaModel;
pub use pipeline::{EmbeddingResult, PipelineVerdict};
pub use preprocess::{PreprocessConfig, Signature};
pub use synth::{FaultKind, FaultSpec, MotorSpec, SignalChannel, SignalRecord};
