use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] sparsepd_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// 2 invalid arguments, 3 numeric failure, 4 I/O failure.
    pub fn exit_code(&self) -> i32 {
        use sparsepd_core::Error as E;
        match self {
            Error::InvalidArgument(_) => 2,
            Error::Core(e) => match e.root() {
                E::InvalidInput(_) | E::InvalidProblem(_) => 2,
                _ => 3,
            },
            Error::Io { .. } | Error::Format { .. } => 4,
            Error::ThreadPool(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::invalid("x").exit_code(), 2);
        let e: Error = sparsepd_core::Error::Numeric("x".into()).context("outer").into();
        assert_eq!(e.exit_code(), 3);
        let e: Error = sparsepd_core::Error::InvalidInput("x".into()).into();
        assert_eq!(e.exit_code(), 2);
        let e = Error::Io { path: "a".into(), source: std::io::Error::other("x") };
        assert_eq!(e.exit_code(), 4);
    }
}
