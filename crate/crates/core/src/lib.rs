//! Byzantine consensus on directed graphs under local broadcast.
//!
//! * [`digraph`]: graph primitives and disjoint-path counting.
//! * [`conditions`]: deciders for the tight network conditions SC and NC.
//! * [`protocol`]: the per-node consensus state machine and its flooding layer.
//! * [`simulator`]: synchronous round engine, adversaries, trace validation and
//!   the copy-network impossibility harness.

pub mod digraph;
pub mod conditions;
pub mod protocol;
pub mod simulator;
