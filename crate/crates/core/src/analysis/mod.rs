//! Verification pipeline: inline every invocation, flatten the result to a
//! predicate/transition net, explore its reachability graph and summarise
//! it.

mod flatten;
mod inline;
mod reach;
mod report;

use thiserror::Error;

use crate::guards::GuardError;

pub use flatten::{flatten, flatten_method, FlatArc, FlatNet, FlatPlace, FlatTransition, GSP_PLACE};
pub use inline::{inline_isps, inline_isps_traced, Splice};
pub use reach::{flat_steps, reachability, FlatMarking, FlatStep, Limits, StateEdge, StateGraph};
pub use report::{analyze, AnalysisReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("service `{service}` has no method `{method}`")]
    UnknownMethod { service: String, method: String },
    #[error("invocation depth limit {0} exceeded while inlining")]
    DepthLimitExceeded(usize),
    #[error("instantiated switch place `{0}` must be inlined before flattening")]
    UnflattenableIsp(String),
    #[error("service `{0}` declares no method")]
    NoMethod(String),
    #[error("method expects {expected} argument(s), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("place `{place}` receives tokens with fields {found:?} but has signature {expected:?}")]
    InconsistentSignature { place: String, expected: Vec<String>, found: Vec<String> },
    #[error("attribute `{0}` is assigned but has no initial value")]
    UninitializedAttribute(String),
    #[error("generated name `{0}` clashes with an existing one")]
    NameClash(String),
    #[error("free variable `{0}` has no declared domain")]
    UnboundFreeVariable(String),
    #[error("transition `{transition}`: {source}")]
    Guard {
        transition: String,
        #[source]
        source: GuardError,
    },
}
