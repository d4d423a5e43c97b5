//! Network instances, structural validation, vertex connectivity and the
//! full/partial node classification.

mod classify;
mod flow;
mod instance;

pub use classify::{
    classify_nodes, classify_source, classify_with_ell, default_d, ConnectivityProfile, NodeClass,
    SourceProfile,
};
pub use flow::{disjoint_paths, max_flow, vertex_connectivity, vertex_connectivity_by_name, FlowPath};
pub use instance::{
    validate_instance, EdgeId, InstanceBuilder, NetworkInstance, Node, NodeId, Violation,
    ViolationKind,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("node `{0}` is not a source")]
    NotASource(String),
    #[error("connectivity endpoints coincide at `{0}`")]
    SameEndpoints(String),
    #[error("cycle detected: {}", cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },
    #[error("terminal `{terminal}` has connectivity {connectivity} from `{origin}`, {required} required (deficit {})", required - connectivity)]
    TerminalUnderConnected { terminal: String, origin: String, connectivity: usize, required: usize },
    #[error("invalid instance: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}
