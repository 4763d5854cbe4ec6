use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid interval: lower bound {lo} is not below upper bound {hi}")]
    Interval { lo: f64, hi: f64 },

    #[error("operation not supported for the {model} model: {what}")]
    UnsupportedModel { model: &'static str, what: &'static str },

    #[error("closed-form strike projection requested for a model without an affine bond price")]
    InconsistentRoute,

    #[error("series did not converge within {max_terms} terms ({context})")]
    Convergence { max_terms: usize, context: &'static str },

    #[error("could not bracket the {kind} break-even state: {detail}")]
    Bracket { kind: &'static str, detail: String },

    #[error("{kind} exercise boundary has {crossings} sign changes on the scan grid; single-crossing assumption violated")]
    MultipleRoots { kind: &'static str, crossings: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("transition density expansion needs more than {max_terms} terms at t = {t}; minimum usable horizon is {min_t}")]
    DensityTruncation { t: f64, min_t: f64, max_terms: usize },

    #[error("first moment of the subordinator diverges (stable limit without tempering)")]
    DivergentMoment,

    #[error("at decision date {index}: {source}")]
    AtDecision {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_decision(self, index: usize) -> Self {
        match self {
            e @ Error::AtDecision { .. } => e,
            e => Error::AtDecision { index, source: Box::new(e) },
        }
    }
}
