//! Failure classes and their process exit codes.

use std::process::ExitCode;

/// `0` success, `2` configuration, `3` I/O, `4` numerical failure or failed
/// checks.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Io(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(anyhow::anyhow!(msg.into()))
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(anyhow::anyhow!(msg.into()))
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Failure::Io(anyhow::anyhow!("{}: {err}", path.display()))
    }

    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Numerical(_) => 4,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Failure::Config(_) => "configuration error",
            Failure::Io(_) => "I/O error",
            Failure::Numerical(_) => "numerical failure",
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Io(e) | Failure::Numerical(e) => e,
        }
    }
}

impl From<rbki::Error> for Failure {
    fn from(e: rbki::Error) -> Self {
        use rbki::Error as E;
        match e {
            E::InvalidConfig(_) | E::Dimension(_) => Failure::Config(e.into()),
            E::Io(_) => Failure::Io(e.into()),
            E::ZeroGap => Failure::numerical(
                "minimum relative gap is zero, so --q auto has no finite answer; pass --gamma to smooth the spectrum or a fixed --q",
            ),
            _ => Failure::Numerical(e.into()),
        }
    }
}

impl From<rbki::IoError> for Failure {
    fn from(e: rbki::IoError) -> Self {
        Failure::Io(e.into())
    }
}
