use thiserror::Error;

/// Everything that can go wrong while parsing, constructing, reducing or
/// deciding instances.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("variable `{0}` uses the reserved `_` prefix")]
    ReservedName(String),
    #[error("duplicate prefix variable {0}")]
    DuplicatePrefixVariable(String),
    #[error("free variable {0}")]
    FreeVariable(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("{what} needs {actual}, limit is {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("name `{0}` is not fresh")]
    NameCollision(String),
    #[error("unsupported quantifier prefix: {0}")]
    UnsupportedShape(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    /// Short machine-greppable code, used as the prefix of CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "E_SYNTAX",
            Error::InvalidName(_) => "E_NAME",
            Error::ReservedName(_) => "E_RESERVED",
            Error::DuplicatePrefixVariable(_) => "E_DUPLICATE",
            Error::FreeVariable(_) => "E_FREE_VAR",
            Error::UnboundVariable(_) => "E_UNBOUND",
            Error::CapExceeded { .. } => "E_CAP",
            Error::NameCollision(_) => "E_COLLISION",
            Error::UnsupportedShape(_) => "E_SHAPE",
            Error::Contract(_) => "E_CONTRACT",
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }

    pub(crate) fn cap(what: &'static str, limit: usize, actual: usize) -> Result<()> {
        if actual > limit {
            Err(Error::CapExceeded {
                what,
                limit,
                actual,
            })
        } else {
            Ok(())
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
