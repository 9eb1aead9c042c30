use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the supported range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An integer quantity does not fit the representation the operation uses.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The requested work exceeds the configured budget.
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}{hint}")]
    Budget {
        what: String,
        needed: u128,
        limit: u128,
        hint: String,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("gcd({a}, {q}) != 1")]
    NotCoprime { a: i64, q: u64 },

    /// A descent step of the monomial lift did not satisfy `N^{k-j}‖q'α‖ < 1/2`.
    #[error("hypothesis scale not met at step j={step}: measured {measured}")]
    Hypothesis { step: u32, measured: f64 },

    /// The type-II structural bound required before building an `n^{it}` model failed.
    #[error("structural precondition failed: quality {quality} exceeds {threshold}")]
    Structure { quality: f64, threshold: f64 },

    /// A combinatorial identity failed its per-n check on the given integer.
    #[error("identity check failed at n={n}: decomposition {got}, expected {expected}")]
    Identity { n: u64, got: f64, expected: f64 },

    /// Enumeration stopped early; the payload carries the completed part.
    #[error("partial result after {completed} of {total} integers")]
    Partial {
        completed: u64,
        total: u64,
        partial: alloc::boxed::Box<crate::expsums::heath_brown::Decomposition>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Budget {
            what: what.into(),
            needed,
            limit,
            hint: String::new(),
        }
    }

    pub(crate) fn with_hint(self, h: impl Into<String>) -> Self {
        match self {
            Error::Budget {
                what,
                needed,
                limit,
                ..
            } => Error::Budget {
                what,
                needed,
                limit,
                hint: alloc::format!(" ({})", h.into()),
            },
            other => other,
        }
    }
}
