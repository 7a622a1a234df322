use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure at row {row} (t = {t}): {source}")]
    Numerical {
        row: usize,
        t: f64,
        #[source]
        source: shc_core::Error,
    },
    #[error("numerical failure: {0}")]
    NumericalSummary(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output encoding error: {0}")]
    Encode(String),
}

impl LabError {
    /// Process exit code: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) | LabError::Io(_) => 2,
            LabError::Numerical { .. } | LabError::NumericalSummary(_) | LabError::Encode(_) => 3,
        }
    }

    /// Classify a core error raised while computing row `row`.
    pub fn at_row(row: usize, t: f64, e: shc_core::Error) -> Self {
        use shc_core::Error as E;
        match e {
            E::Domain(m) | E::MissingInput(m) => LabError::Validation(format!("row {row} (t = {t}): {m}")),
            E::Parse { line, message } => LabError::Validation(format!("line {line}: {message}")),
            E::Io(m) => LabError::Validation(m),
            other => LabError::Numerical { row, t, source: other },
        }
    }
}
