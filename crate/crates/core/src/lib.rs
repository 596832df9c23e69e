//! Bounded-size quantum reference frames for U(1) phase and SU(2) orientation.
//!
//! A token state carries frame information alongside a system qubit. The codec
//! encodes states relative to the token, splits the joint state by total irrep,
//! and decodes by measuring the token or by a relational recovery map.

pub mod channel;
pub mod codec;
pub mod error;
pub mod group;
pub mod linalg;
pub mod scenarios;
pub mod token;

pub use channel::{channel_distance, twirl, ChoiMatrix, DensityOperator, KrausChannel, TpClass};
pub use codec::{fit_moment_mixture, Codec, DecodeMethod, MomentFit, SystemSpec};
pub use error::{Error, Result};
pub use group::{GroupElement, GroupId, IrrepLabel, QuadratureRule};
pub use linalg::{Complex64, ComplexMatrix, Dims};
pub use scenarios::{verify, ClosedFormReference, ScenarioId, VerifyReport};
pub use token::{FiducialState, TokenKind, TokenSpec};
