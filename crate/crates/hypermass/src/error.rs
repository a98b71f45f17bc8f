//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction vector is not unit length: |d| = {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("point is off the hyperboloid: inner(X,X) = {inner}, expected {expected}")]
    OffHyperboloid { inner: f64, expected: f64 },

    #[error("zeta is not future-directed null (classified {class})")]
    NotFutureNull { class: String },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("grid too coarse: N = {n_cells}, need N >= 16 and even")]
    GridTooCoarse { n_cells: usize },

    #[error("Gamma_2 cone violated at slice {slice} (t = {t}), cell {cell}: sigma1 = {sigma1}, sigma2 = {sigma2}")]
    Gamma2Violation {
        slice: usize,
        t: f64,
        cell: usize,
        sigma1: f64,
        sigma2: f64,
    },

    #[error("flow step monitor tripped {halvings} times; dt underflow at t = {t}")]
    StepUnderflow { t: f64, halvings: usize },

    #[error("convexity not reached within t_end = {t_end}: min kappa/k = {min_ratio} on the final slice; run the flow longer")]
    ConvexityNotReached { t_end: f64, min_ratio: f64 },

    #[error(
        "convexity lost on exterior level {level} (rho = {rho}), cell {cell}: kappa = {kappa}"
    )]
    ConvexityLost {
        level: usize,
        rho: f64,
        cell: usize,
        kappa: f64,
    },

    #[error("barrier violation at slice {slice} (t = {t}), cell {cell}: u = {u}, bounds ({lower}, {upper})")]
    BarrierViolation {
        slice: usize,
        t: f64,
        cell: usize,
        u: f64,
        lower: f64,
        upper: f64,
    },

    #[error("collar invalid: R^t + n(n-1)k^2 = {value} <= 0 at slice {slice}, cell {cell}")]
    NonPositiveDenominator {
        slice: usize,
        cell: usize,
        value: f64,
    },

    #[error("solution blow-up in {stage}: max |value| = {max_abs} exceeds {limit}")]
    BlowUp {
        stage: &'static str,
        max_abs: f64,
        limit: f64,
    },

    #[error("causal character violated in {stage} at level {level}, cell {cell}: inner(W,W)/|W|^2 = {ratio}, time component {time}")]
    CausalViolation {
        stage: &'static str,
        level: usize,
        cell: usize,
        ratio: f64,
        time: f64,
    },

    #[error("non-finite value produced in {stage} at step {step}")]
    NonFinite { stage: &'static str, step: usize },

    #[error("grid mismatch between {left} and {right}: {detail}")]
    GridMismatch {
        left: &'static str,
        right: &'static str,
        detail: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed input file {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
