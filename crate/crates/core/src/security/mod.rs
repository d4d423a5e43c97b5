//! Exhaustive information-theoretic checks.

mod audit;
mod converse;
mod enumerate;
mod lemmas;
mod mi;

use thiserror::Error;

use crate::protocol::SchemeError;

pub use audit::{admissible_sets, audit_scheme, monte_carlo_advisory, AuditEntry, AuditOptions, SecurityReport, DEFAULT_BUDGET};
pub use converse::{converse_check, is_fig2_family, ConverseReport};
pub use enumerate::{par_enumerate, state_count};
pub use lemmas::{product_uniform_dims, verify_matrix_lemma, verify_shamir, Lemma, LemmaReport, ShamirReport};
pub use mi::{exact_mutual_information, JointDistribution, MutualInformation};

#[derive(Debug, Error)]
pub enum SecurityError {
    #[error("enumeration needs {} states, budget is {allowed}", required.map_or("more than 2^128".to_string(), |r| r.to_string()))]
    BudgetExceeded { required: Option<u128>, allowed: u128 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
