use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed ontology document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid ontology entity `{entity}`: {reason}")]
    Validation { entity: String, reason: String },

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("concept `{concept}` has kind {found}, expected {expected}")]
    KindMismatch {
        concept: String,
        expected: String,
        found: String,
    },

    #[error("concepts `{0}` and `{1}` play different descriptive roles")]
    RoleMismatch(String, String),

    #[error("no correspondence from domain `{from}` to domain `{to}`")]
    NoCorrespondence { from: String, to: String },

    #[error("value {value} lies outside [{lower}, {upper}] of domain `{domain}`")]
    OutOfRange {
        domain: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("no applicable dimension carries positive weight")]
    NothingApplicable,

    #[error("dataset has no judgments")]
    EmptyDataset,

    #[error("hybrid training requires a feature-oriented training state")]
    MissingFeatureState,

    #[error("value out of range: {0}")]
    Range(String),

    #[error("cannot average an empty error list")]
    EmptyInput,

    #[error("error columns differ in length ({0} vs {1}) or are shorter than 2")]
    LengthMismatch(usize, usize),

    #[error("infeasible judgment statistics for pair {pair_id}: {reason}")]
    InfeasibleStats { pair_id: u32, reason: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(entity: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            entity: entity.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Validation { .. } | Error::Dataset(_) | Error::Csv(_)
        )
    }
}
