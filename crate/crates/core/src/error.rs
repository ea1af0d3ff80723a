use thiserror::Error;

use crate::model::Relation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch for {item}: expected {expected}, found {found}")]
    DimensionMismatch {
        item: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("empty {kind} name")]
    EmptyName { kind: &'static str },
    #[error("non-finite score for option `{option}` on objective `{objective}`")]
    NonFiniteScore { option: String, objective: String },
    #[error("a choice problem needs at least one objective")]
    NoObjectives,
    #[error("a choice problem needs at least two options, found {0}")]
    TooFewOptions(usize),
    #[error("invalid weights for `{owner}`: {reason}")]
    InvalidWeights { owner: String, reason: String },
    #[error("invalid tolerance `{name}`: {reason}")]
    InvalidTolerance { name: &'static str, reason: String },
    #[error("a jury needs at least one juror")]
    EmptyJury,
    #[error("juror `{juror}` uses the cobb-douglas form but option `{option}` has a non-positive score")]
    NonPositiveScoreForLogForm { juror: String, option: String },
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("unsupported dimension: this operation needs d = {expected}, found d = {found}")]
    UnsupportedDimension { expected: usize, found: usize },
    #[error("unknown context tag `{0}`")]
    UnknownContextTag(String),
    #[error("degenerate corpus: {0}")]
    DegenerateCorpus(String),
    #[error("pair is not hard (classified {0:?})")]
    NotHard(Relation),
    #[error("no juror supports the requested target")]
    NoSupportingJuror,
    #[error("juror `{juror}` cannot reach margin {required} on the simplex (best achievable {achievable})")]
    InfeasibleTransformation {
        juror: String,
        required: f64,
        achievable: f64,
    },
    #[error("juror `{juror}` uses a form that cannot be transformed (linear only)")]
    UnsupportedForm { juror: String },
    #[error("neighbourhood width tau must be set explicitly")]
    MissingTau,
    #[error("infeasible class mix: {0}")]
    InfeasibleMix(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
}
