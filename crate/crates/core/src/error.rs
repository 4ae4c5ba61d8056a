use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("positivity failure: {quantity} = {value:e}")]
    Positivity { quantity: &'static str, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical consistency: {0}")]
    Consistency(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("cell ({i}, {j}) layer {layer} at step {step}: {source}")]
    AtCell {
        i: usize,
        j: usize,
        layer: u8,
        step: usize,
        #[source]
        source: Box<SolverError>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SolverError {
    pub fn at_cell(self, i: usize, j: usize, layer: u8, step: usize) -> Self {
        match self {
            e @ SolverError::AtCell { .. } => e,
            e => SolverError::AtCell { i, j, layer, step, source: Box::new(e) },
        }
    }

    /// Fills in the step of a cell annotation made below the driver.
    pub fn with_step(self, step: usize) -> Self {
        match self {
            SolverError::AtCell { i, j, layer, source, .. } => SolverError::AtCell { i, j, layer, step, source },
            e => e,
        }
    }

    /// Innermost error, skipping cell annotations.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::AtCell { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
