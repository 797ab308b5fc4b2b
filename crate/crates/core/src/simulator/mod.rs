//! Synchronous local-broadcast simulation: the round engine, Byzantine
//! strategies, trace sinks and replay validation, graph generators, and the
//! copy-network harness for graphs that violate NC.

mod adversary;
mod engine;
mod generators;
mod necessity;
mod sinks;
mod validator;

pub use adversary::{Adversary, AdversaryContext, AdversaryKind, NoAdversary};
pub use engine::{run_rounds, EngineConfig, EngineError, Network};
pub use generators::{layered, random, threshold, GeneratorError, GeneratorSpec};
pub use necessity::{
    build_copy_network, execution_faulty_sets, run_three_executions, run_three_executions_with, verify_execution_views,
    CopyClass, CopyNetwork, ExecutionMap, ExecutionTriple, ExecutionView, NecessityError,
};
pub use sinks::{HashSink, JsonlSink, TeeSink};
pub use validator::{ReplayValidator, ValidationSummary};
