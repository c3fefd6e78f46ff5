use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    FactorizationBudgetExceeded(u128),
    InvalidInput(String),
    NotFundamental(i64),
    NotCoprime { a: i64, b: i64 },
    TrivialCharacter,
    BothTrivial,
    SingularCurve,
    PrimeTooLarge(u64),
    HypothesisViolated(String),
    LevelTooLarge(u64),
    NoMatch,
    Ambiguous,
    NotExactDivisor { d: u64, n: u64 },
    NotRationalEigenform(String),
    NotOddSquarefree(u64),
    BoundExceeded(String),
    ZeroForm,
    InsufficientCoefficients { needed: usize, have: usize },
    Inconclusive(String),
    QPartNotAdmissible(String),
    NotMultiplicative(u64),
    SetupInvalid(String),
    SearchExhausted(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Error::*;
        match self {
            FactorizationBudgetExceeded(n) => write!(f, "could not factor {n} within budget"),
            InvalidInput(s) => write!(f, "invalid input: {s}"),
            NotFundamental(d) => write!(f, "{d} is not a fundamental discriminant"),
            NotCoprime { a, b } => write!(f, "{a} and {b} are not coprime"),
            TrivialCharacter => write!(f, "character is trivial"),
            BothTrivial => write!(f, "both characters are trivial"),
            SingularCurve => write!(f, "curve is singular"),
            PrimeTooLarge(p) => write!(f, "prime {p} exceeds the point-counting bound"),
            HypothesisViolated(s) => write!(f, "hypothesis violated: {s}"),
            LevelTooLarge(n) => write!(f, "level {n} is above the supported bound"),
            NoMatch => write!(f, "no eigenform matches"),
            Ambiguous => write!(f, "eigenform is not determined by the given eigenvalues"),
            NotExactDivisor { d, n } => write!(f, "{d} is not an exact divisor of {n}"),
            NotRationalEigenform(s) => write!(f, "not a rational eigenform: {s}"),
            NotOddSquarefree(q) => write!(f, "{q} is not a product of an odd number of distinct primes"),
            BoundExceeded(s) => write!(f, "bound exceeded: {s}"),
            ZeroForm => write!(f, "eigenform is zero"),
            InsufficientCoefficients { needed, have } => {
                write!(f, "need {needed} coefficients, have {have}")
            }
            Inconclusive(s) => write!(f, "inconclusive: {s}"),
            QPartNotAdmissible(s) => write!(f, "Q-part not admissible: {s}"),
            NotMultiplicative(p) => write!(f, "reduction at {p} is not multiplicative"),
            SetupInvalid(s) => write!(f, "setup invalid: {s}"),
            SearchExhausted(s) => write!(f, "search exhausted: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
