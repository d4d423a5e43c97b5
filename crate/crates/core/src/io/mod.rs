//! The `keycast v1` text format, canonical fixtures and random instances.

mod format;
mod generate;

pub use format::{emit_instance, parse_instance, ParseError};
pub use generate::{generate_canonical, generate_random, CanonicalKind, CanonicalParams};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{is_prime, Field};
use crate::network::{NetworkInstance, Violation};
use crate::protocol::{compile, SchemeError, SchemeKind, SchemeParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<ParseError>),
    #[error("invalid instance: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
}

/// Hex SHA-256 of the canonical text.
pub fn fingerprint(inst: &NetworkInstance) -> String {
    let digest = Sha256::digest(emit_instance(inst).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Smallest prime `q ≤ limit` for which `kind` compiles on `inst`.
pub fn minimal_admissible_q(
    inst: &NetworkInstance,
    kind: SchemeKind,
    params: SchemeParams,
    limit: u32,
) -> Result<u32, SchemeError> {
    let mut last = None;
    for q in (2..=limit).filter(|&q| is_prime(q)) {
        let candidate = inst.with_field(Field::new(q).expect("prime"));
        match compile(&candidate, kind, params) {
            Ok(_) => return Ok(q),
            Err(e @ SchemeError::FieldTooSmall { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(SchemeError::FieldTooSmall { q: limit, detail: "no prime in range".into() }))
}
