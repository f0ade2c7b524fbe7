use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice basis: |det[e1 e2]| = {det:e}")]
    DegenerateBasis { det: f64 },

    #[error("frequency ({theta1}, {theta2}) outside {domain}")]
    FrequencyDomain {
        theta1: f64,
        theta2: f64,
        domain: &'static str,
    },

    #[error("operation requires a {expected} problem, got {got}")]
    ProblemKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("periodic patch of size {patch_n} is too small (need at least {min})")]
    PatchSize { patch_n: usize, min: usize },

    #[error("invalid block specification: {0}")]
    InvalidBlock(String),

    #[error("singular local block matrix ({context})")]
    SingularBlock { context: String },

    #[error("P matrix singular at theta = ({theta1:.6}, {theta2:.6}), condition estimate {cond:e}")]
    FrequencySingular { theta1: f64, theta2: f64, cond: f64 },

    #[error("eigenvalue iteration failed to converge for a {dim}x{dim} matrix:\n{dump}")]
    EigenFailure { dim: usize, dump: String },

    #[error("every sampled frequency was skipped as singular ({skipped} of {total})")]
    AllFrequenciesSkipped { skipped: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed stencil data at line {line}: {msg}")]
    StencilParse { line: usize, msg: String },
}
