use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unknown action {0}")]
    UnknownAction(usize),
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
    #[error("invalid contract: {0}")]
    InvalidContract(String),
    #[error("exhaustive search over {needed} items exceeds the brute-force cap {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("reward class is not submodular")]
    NonSubmodularClass,
    #[error("reward class is not XOS")]
    NonXosClass,
    #[error("reward class is not gross substitutes")]
    NonGsClass,
    #[error("reward is not additive")]
    NonAdditiveReward,
    #[error("instance does not have binary actions")]
    NotBinaryActions,
    #[error("input contract is not {0}-equal-pay")]
    NotGammaEqualPay(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("best-response dynamics did not converge within {steps} updates")]
    NoConvergence { steps: usize },
    #[error("contract has no pure equilibrium")]
    NoEquilibrium,
    #[error("doubling the payment of agent {agent} exceeds 1")]
    PaymentOverflow { agent: usize },
    #[error("objective is not decreasing in payments")]
    NonMonotoneObjective,
    #[error("objective evaluation failed: {0}")]
    Objective(String),
    #[error("runtime guarantee violated: {0}")]
    AssertionFailed(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
