//! The abstract operational semantics.

pub mod canon;
pub mod config;
pub mod effects;
pub mod explore;
pub mod matching;
pub mod normal_form;
pub mod transition;

use thiserror::Error;

use crate::store::{MergeError, Symbol, Variable};

pub use canon::{canonical, isomorphic, state_hash};
pub use config::{Answer, ArchitectureConfig, DeclarativeHandler, FailRequest, RequestHandler};
pub use effects::{
    combine_effects, combine_sets, interpret_action, interpret_modification, interpret_request,
    interpret_rule, Effect,
};
pub use explore::{explore, Dedup, Edge, Graph};
pub use matching::{match_rule, match_test, select, Substitution};
pub use normal_form::{is_set_normal_form, set_normal_form, Normalized};
pub use transition::{apply_transition, no_rule_transitions, Label, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("buffer `{0}` holds no chunk")]
    MissingIncumbent(Symbol),
    #[error("no request handler for buffer `{0}`")]
    NoHandler(Symbol),
    #[error("two effects write buffer `{0}`")]
    DomainOverlap(Symbol),
    #[error("action value `{0}` is not bound")]
    NotGround(Variable),
    #[error(transparent)]
    Merge(#[from] MergeError),
}
