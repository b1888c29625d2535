//! Quantum-jump continuous-time quantum error correction (CTQEC).
//!
//! Builds weak-measurement error-correction protocols for stabilizer codes,
//! verifies them (POVM completeness, dilation, channel equivalence), and
//! simulates their master-equation dynamics against baseline schemes.

pub mod baselines;
pub mod channels;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod protocol;
pub mod stabilizer;

pub use baselines::{AdlMap, DeltaPolicy, OreshkovProtocol, WeightVector};
pub use channels::{DiamondNorm, KrausChannel, SuperoperatorGenerator};
pub use dynamics::{NoiseKind, NoiseModel, SimulationTrace};
pub use error::CtqecError;
pub use linalg::{CMatrix, CVector, C64};
pub use pauli::{Pauli, PauliOperator};
pub use protocol::WeakProtocol;
pub use stabilizer::{BuiltinCode, StabilizerCode, SyndromeIndex};
