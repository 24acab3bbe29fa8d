use crate::lts::StateId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: state {state} out of range (system has {n_states} states)")]
    StateRange {
        line: usize,
        state: u64,
        n_states: usize,
    },

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("relation is not a preorder: {0}")]
    NotPreorder(String),

    #[error("relation is not reflexive at state {0}")]
    NotReflexive(StateId),

    #[error("state {0} of the given σ is not reachable")]
    SigmaNotReachable(StateId),

    #[error("initial state {0} is not in the given σ")]
    InitialNotInSigma(StateId),

    #[error("guard violated: {0}")]
    Contract(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
