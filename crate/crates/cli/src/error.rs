use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qmeasure_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} acceptance criteria failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    /// 2 for configuration errors, 3 for sampler efficiency failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use qmeasure_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::EfficiencyFailure { .. }) => 3,
            CliError::Core(
                E::InvalidParameter(_)
                | E::Domain(_)
                | E::DimensionMismatch { .. }
                | E::InsufficientData { .. },
            ) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::VerifyFailed { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use qmeasure_core::Error as E;

    #[test]
    fn exit_codes() {
        let stalled = CliError::from(E::EfficiencyFailure {
            accepted: 0,
            proposals: 1_000_000,
        });
        assert_eq!(stalled.exit_code(), 3);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(E::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::VerifyFailed { failed: 1, total: 13 }.exit_code(), 1);
        assert_eq!(CliError::from(E::NonConvergence { residual: 1.0 }).exit_code(), 1);
    }
}
