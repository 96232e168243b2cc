//! LP decoding of binary linear codes.
//!
//! The odd-subset relaxation ([`relaxation::feldman_system`]) and the degree-3
//! cascade ([`relaxation::decompose`], [`relaxation::decomposed_system`]) are
//! solved by a self-contained simplex ([`lpsolver`]) and compared on both
//! constraint counts and decoding results.

pub mod channel;
pub mod codes;
pub mod decoder;
pub mod exec;
pub mod gf2;
pub mod lpsolver;
pub mod relaxation;
pub mod sim;

pub use channel::{ChannelModel, CostVector};
pub use codes::{builtin_code, ParityCheckMatrix};
pub use decoder::{brute_force_ml, decode, DecodeOutcome, Formulation, LpDecoder};
pub use exec::Execution;
pub use relaxation::{ConstraintCounts, ConstraintSystem, DecompositionResult};
