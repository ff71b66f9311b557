use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring mismatch: operands live in k={left} and k={right}")]
    RingMismatch { left: u32, right: u32 },
    #[error("not a supported unit: {0}")]
    NotAUnit(String),
    #[error("cannot parse scalar {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("composition outside its domain: {0}")]
    CompositionDomain(String),
    #[error("exponent {exponent} of {var} is off the 1/{k} lattice")]
    OffLattice { var: String, exponent: String, k: u32 },
    #[error("leading coefficient is not invertible: {0}")]
    NotInvertible(String),
    #[error("even cycle length k={k}: {detail}")]
    Obstruction { k: u32, detail: String },
    #[error("vector is not homogeneous: {0}")]
    Inhomogeneous(String),
    #[error("operator exponential failed to terminate within {0} steps")]
    NonTerminating(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
