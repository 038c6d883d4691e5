use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// A computation would exceed its configured work budget. `required` is
    /// the size the request needs, `cap` the configured limit.
    #[error("budget exceeded for {what}: requires {required}, cap is {cap}")]
    BudgetExceeded {
        what: String,
        required: f64,
        cap: f64,
    },

    #[error("singular pencil at evaluation point")]
    SingularPoint,

    #[error("ill-conditioned system (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("polynomial is not real-rooted: {0}")]
    NotRealRooted(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, required: f64, cap: f64) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            required,
            cap,
        }
    }
}
