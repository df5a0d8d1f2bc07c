//! Simulation library for discrete-variable quantum MIMO links.
//!
//! The pipeline mirrors a diversity-combining link: a pure qubit is encoded
//! into one or more approximate clones ([`cloner`]), sent through a layered
//! crosstalk-plus-depolarization channel ([`channel`]), and recombined at the
//! receiver by a probabilistic purification map obtained from a semidefinite
//! program ([`sdp`]). Haar-averaged input operators for the purifier live in
//! [`haar`], and the CSI-dependent transmission strategies with their region
//! and gain scans in [`strategies`].

pub mod channel;
pub mod cloner;
pub mod error;
pub mod haar;
pub mod io;
pub mod linalg;
pub mod sdp;
pub mod strategies;
pub mod validate;

pub use channel::{CptpReport, MimoChannelSpec};
pub use cloner::CloneParams;
pub use error::{Error, Result};
pub use haar::{NoiseProcessedCloner, QROperators};
pub use linalg::{CMat, DensityMatrix, PureQubit};
pub use sdp::{PurificationProblem, PurificationSolution, SolverStatus};
pub use strategies::{CaseId, ChannelParams2x2, StrategyResult};
