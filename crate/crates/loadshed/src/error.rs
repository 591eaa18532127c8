//! Error types for the solver library.

use thiserror::Error;

/// Errors from case-file parsing and network construction.
#[derive(Debug, Error)]
pub enum CaseError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing section `{0}`")]
    MissingSection(&'static str),
    #[error("line {line}: non-numeric token `{token}`")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: ragged row, expected {expected} columns, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{table} row {row}: expected at least {min} columns, found {found}")]
    RowTooShort {
        table: &'static str,
        row: usize,
        min: usize,
        found: usize,
    },
    #[error("duplicate bus id {0}")]
    DuplicateBus(i64),
    #[error("{table} row {row} references unknown bus {bus}")]
    UnknownBus {
        table: &'static str,
        row: usize,
        bus: i64,
    },
    #[error("branch {row} (buses {from}-{to}): reactance {x} must be positive")]
    NonPositiveReactance {
        row: usize,
        from: i64,
        to: i64,
        x: f64,
    },
    #[error("total load is zero; injections cannot be balanced")]
    ZeroLoad,
    #[error("rebalance infeasible: {0}")]
    RebalanceInfeasible(String),
    #[error("invalid JSON case: {0}")]
    Json(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from network-model operations.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: admittance {value} must be positive")]
    NonPositiveAdmittance { line: usize, value: f64 },
    #[error("line {line}: endpoint {bus} out of range for {n} buses")]
    EndpointOutOfRange { line: usize, bus: usize, n: usize },
    #[error("line {line}: connects bus {bus} to itself")]
    SelfLoop { line: usize, bus: usize },
    #[error("injections are not balanced: 1'P = {0:e} exceeds 1e-9")]
    Unbalanced(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors from the projection subproblems.
#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("cannot remove {k} of {m} lines")]
    CardinalityOutOfRange { k: usize, m: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("box is infeasible for the balance constraint: sum(L) = {sum_lower:e}, sum(U) = {sum_upper:e}")]
    InfeasibleBox { sum_lower: f64, sum_upper: f64 },
    #[error("bound inversion at index {index}: lower {lower} > upper {upper}")]
    BoundInversion {
        index: usize,
        lower: f64,
        upper: f64,
    },
}

/// Errors from spectral-norm estimation.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("power iteration did not converge within {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
}

/// Errors from the PALM driver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("objective increased at iteration {iter}: {prev} -> {curr} (slack {slack:e}); this indicates an implementation bug")]
    NonMonotone {
        iter: usize,
        prev: f64,
        curr: f64,
        slack: f64,
    },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
