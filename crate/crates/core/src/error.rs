use thiserror::Error;

/// Errors raised by the library. Predicates that merely fail report `false`
/// or a failing report instead; these variants cover bad inputs and broken
/// preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("primes must be pairwise distinct, got {0}, {1}, {2}")]
    NotDistinct(u64, u64, u64),
    #[error("prime {0} is out of range (must be below 65536)")]
    PrimeOutOfRange(u64),
    #[error("modulus (pqr)^2 does not fit in 64 bits")]
    ModulusOverflow,
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("residue {value} is out of range for modulus {modulus}")]
    OutOfRange { value: u64, modulus: u64 },
    #[error("operation requires a nonempty set")]
    EmptySet,
    #[error("modulus mismatch: expected {expected}, found {found}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("index set over {modulus} does not have one element per residue class: {detail}")]
    BadIndexResidues { modulus: u64, detail: String },
    #[error("expected {expected} elements, found {found}")]
    WrongCardinality { expected: usize, found: usize },
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),
    #[error("set is not of the form q^2r^2 U + r^2p^2 V + p^2q^2 W")]
    NotSumsetForm,
    #[error("invariant sets overlap at {0}")]
    NotDisjoint(u64),
    #[error("set for axis {axis} is not invariant under +{step} (missing {missing})")]
    NotInvariant { axis: char, step: u64, missing: u64 },
    #[error("0 may not belong to an invariant set (it must stay in the pqr-part)")]
    ZeroInH,
    #[error("invariant set for axis {0} is empty")]
    EmptyHSet(char),
    #[error("bad class assignment: {0}")]
    BadAssignment(String),
    #[error("1 belongs to the division set")]
    DivOneViolation,
    #[error("set is not concentrated on a single residue class of one axis")]
    FormMismatch,
    #[error("search budget exhausted after {found} results")]
    BudgetExceeded { found: usize },
    #[error("could not generate an instance after {0} attempts")]
    GenerationFailed(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
