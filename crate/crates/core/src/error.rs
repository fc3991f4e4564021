use thiserror::Error;

/// Errors raised by the solvers, the analysis routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive enumeration would visit more candidates than allowed.
    #[error("enumerating {count} candidates exceeds the guard of {guard}; {advice}")]
    GuardExceeded {
        count: u128,
        guard: u128,
        advice: &'static str,
    },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures that should map to a refusal rather than bad input.
    pub fn is_guard_refusal(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub(crate) fn check_guard(n: usize, k: usize, guard: u128, advice: &'static str) -> Result<()> {
    let count = binomial(n, k);
    if count > guard {
        Err(Error::GuardExceeded {
            count,
            guard,
            advice,
        })
    } else {
        Ok(())
    }
}
