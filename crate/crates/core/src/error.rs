use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid harmonic index (l = {l}, m = {m}): |m| must not exceed l")]
    InvalidHarmonicIndex { l: usize, m: i64 },

    #[error("direction is not a unit vector (norm = {norm})")]
    NotUnitVector { norm: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("{function}({order}, {x}) is outside double precision range")]
    Overflow {
        function: &'static str,
        order: usize,
        x: f64,
    },

    #[error("unsupported Lebedev order {order}; supported orders are {supported:?}")]
    UnsupportedLebedevOrder {
        order: usize,
        supported: &'static [usize],
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no atoms in input")]
    NoAtoms,

    #[error("atoms {first} and {second} describe the same ball")]
    DegenerateBalls { first: usize, second: usize },

    #[error("point lies outside ball {ball}")]
    OutsideBall { ball: usize },

    #[error("target point coincides with the charge of atom {atom}")]
    ChargeOnTarget { atom: usize },

    #[error("inner linear solve stalled after {iterations} iterations at relative residual {residual:e}")]
    InnerSolver { iterations: usize, residual: f64 },

    #[error("outer iteration {iteration}: inner solve failed ({source})")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("diverged at iteration {iteration} (energy {energy:e} kJ/mol)")]
    Diverged { iteration: usize, energy: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
