use std::fmt;

/// Broad kind of failure; decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed TOML or CSV.
    Syntax,
    /// Unknown, missing or mistyped fields.
    Schema,
    /// An id that does not resolve, or a duplicate id.
    Reference,
    /// A value violating a model invariant.
    Invariant,
    Io,
    /// Bad command-line arguments.
    Usage,
    /// The model has no feasible tour plan.
    Infeasible,
    /// Internal consistency check failed.
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Infeasible => 3,
            ErrorClass::Internal => 4,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Syntax => "syntax",
            ErrorClass::Schema => "schema",
            ErrorClass::Reference => "reference",
            ErrorClass::Invariant => "invariant",
            ErrorClass::Io => "io",
            ErrorClass::Usage => "usage",
            ErrorClass::Infeasible => "infeasible",
            ErrorClass::Internal => "internal",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct CliError {
    pub class: ErrorClass,
    /// `file:line` or `file` when known.
    pub location: Option<String>,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{} error at {loc}: {}", self.class, self.message),
            None => write!(f, "{} error: {}", self.class, self.message),
        }
    }
}

impl CliError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError {
            class,
            location: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        if self.location.is_none() {
            self.location = Some(location.into());
        }
        self
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new(ErrorClass::Usage, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl From<cityfreight_core::Error> for CliError {
    fn from(e: cityfreight_core::Error) -> Self {
        use cityfreight_core::Error;
        let class = match &e {
            Error::Domain(_) => ErrorClass::Invariant,
            Error::Infeasible { .. } => ErrorClass::Infeasible,
            Error::Consistency(_) => ErrorClass::Internal,
            Error::GridTooLarge { .. } => ErrorClass::Usage,
        };
        CliError::new(class, e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
