use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon exceeded: need {needed}, have {available}")]
    HorizonExceeded { needed: u64, available: u64 },

    #[error("set expression deeper than {max} levels")]
    DepthExceeded { max: usize },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("unknown ideal `{0}`")]
    UnknownIdeal(String),

    #[error("unknown sequence `{0}`")]
    UnknownSequence(String),

    #[error("ideal `{0}` has neither a submeasure nor a special rule; no witness is representable")]
    NotRepresentable(String),

    #[error("no witness block with mass >= {q} found below horizon {horizon}")]
    BlockSearchExceeded { q: String, horizon: u64 },

    #[error("witness refuted by sample: {0}")]
    WitnessRefuted(String),

    #[error("ideal `{0}` is not an analytic P-ideal (no submeasure)")]
    NotAnalyticP(String),

    #[error("set A ran out of members at {at} before horizon {horizon}")]
    ExhaustedA { at: u64, horizon: u64 },

    #[error("point is not a limit point at this resolution: {0}")]
    NotALimitPoint(String),

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("displaced integers exceed horizon {horizon}")]
    BijectivityOverflow { horizon: u64 },

    #[error("no block with mass >= q available at radius index {k} below horizon")]
    MassUnavailable { k: usize },

    #[error("supply exhausted at radius index {k}: {detail}")]
    SupplyExhausted { k: usize, detail: String },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn horizon(needed: u64, available: u64) -> Self {
        Error::HorizonExceeded { needed, available }
    }

    /// Stable machine-readable tag used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::HorizonExceeded { .. } => "HorizonExceeded",
            Error::DepthExceeded { .. } => "DepthExceeded",
            Error::InvalidSet(_) => "InvalidSet",
            Error::UnknownIdeal(_) => "UnknownIdeal",
            Error::UnknownSequence(_) => "UnknownSequence",
            Error::NotRepresentable(_) => "NotRepresentable",
            Error::BlockSearchExceeded { .. } => "BlockSearchExceeded",
            Error::WitnessRefuted(_) => "WitnessRefuted",
            Error::NotAnalyticP(_) => "NotAnalyticP",
            Error::ExhaustedA { .. } => "ExhaustedA",
            Error::NotALimitPoint(_) => "NotALimitPoint",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::BijectivityOverflow { .. } => "BijectivityOverflow",
            Error::MassUnavailable { .. } => "MassUnavailable",
            Error::SupplyExhausted { .. } => "SupplyExhausted",
            Error::InvalidMap(_) => "InvalidMap",
            Error::InvalidSequence(_) => "InvalidSequence",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse(_) => "Parse",
            Error::Json(_) => "Json",
        }
    }
}
