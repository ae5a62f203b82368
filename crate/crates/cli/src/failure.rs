use std::fmt;

/// A command failure together with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration.
    Usage(anyhow::Error),
    /// Unreadable or malformed input data.
    Data(anyhow::Error),
    /// A pipeline stage could not produce a result.
    Compute(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Compute(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            Failure::Usage(e) => ("configuration error", e),
            Failure::Data(e) => ("data error", e),
            Failure::Compute(e) => ("computation error", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

pub type CmdResult<T> = Result<T, Failure>;

pub trait Classify<T> {
    fn usage(self) -> CmdResult<T>;
    fn data(self) -> CmdResult<T>;
    fn compute(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn data(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Data(e.into()))
    }

    fn compute(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Compute(e.into()))
    }
}
