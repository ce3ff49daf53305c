use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected} bits/coordinates, got {got}")]
    Width { expected: usize, got: usize },

    #[error("malformed program: {0}")]
    Structure(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty interval: lower bound {lo} exceeds upper bound {hi}")]
    Interval { lo: String, hi: String },

    #[error("judge kind error: {0}")]
    JudgeKind(String),

    #[error("trivial judge: {0}")]
    TrivialJudge(String),

    #[error("budget `{budget}` exceeded (limit {limit})")]
    ResourceExceeded { budget: &'static str, limit: u64 },

    #[error("undecodable instruction at offset {offset}: {msg}")]
    Decode { offset: usize, msg: String },

    #[error("candidate verifier gave no answer within {fuel} steps")]
    VerifierDivergence { fuel: u64 },

    #[error("candidate verifier answered with {0:?}, expected a single byte 0 or 1")]
    MalformedVerdict(Vec<u8>),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn width(expected: usize, got: usize) -> Self {
        Error::Width { expected, got }
    }
}
