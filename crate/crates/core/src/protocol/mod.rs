//! The consensus algorithm as a per-node state machine, plus the flooding
//! layer it uses to move values along explicit paths.
//!
//! Each phase handles one candidate fault set `F` and takes `2n` rounds: an
//! `n`-round flood from `S ∪ N_F(S)`, local classification and update, an
//! `n`-round flood from `S`, and a final update outside `S`.

mod context;
mod flood;
mod node;
mod run;
mod steps;
mod support;
pub mod trace;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::conditions::ConditionError;
use crate::digraph::{NodeId, Path};

pub use context::{FloodKind, PhaseInfo, PhasePlan, ProtocolContext, RoundPosition};
pub use flood::{classify, FloodState, Outcome, ReceivedValues};
pub use node::{ConsensusNode, Delivery, NodeProgram};
pub use run::{run_algorithm, RunReport};
pub use steps::{phase_step_a, phase_step_c, phase_step_d, phase_step_f, StepD, StepF};
pub use support::{supported_value, Support};

/// A binary value. Serialized as `0` / `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Bit {
    #[default]
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = u8;
    fn try_from(v: u8) -> Result<Self, u8> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(other),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Bit::try_from(v).map_err(|v| serde::de::Error::custom(format!("bit must be 0 or 1, got {v}")))
    }
}

/// The flooding wire format: a value and the path it has travelled so far,
/// not including the sender. The empty path marks an initiation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FloodMessage {
    pub value: Bit,
    pub path: Path,
}

impl FloodMessage {
    pub fn initiate(value: Bit) -> Self {
        FloodMessage {
            value,
            path: Path::empty(),
        }
    }
}

impl fmt::Display for FloodMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.value, self.path)
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error("no path from {from} to {to} avoiding the fault set in phase {phase}")]
    MissingCanonicalPath { phase: usize, from: NodeId, to: NodeId },
    #[error("expected {expected} inputs, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("fault set has {size} nodes, more than f={f}")]
    TooManyFaults { size: usize, f: usize },
    #[error("faulty set {0} names nodes outside the graph")]
    FaultyOutOfRange(crate::digraph::NodeSet),
    #[error(transparent)]
    Engine(#[from] crate::simulator::EngineError),
}
