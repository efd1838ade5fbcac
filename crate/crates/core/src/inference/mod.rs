//! Posterior sampling, summaries and convergence diagnostics.

pub mod diagnostics;
pub mod fit;
pub mod posterior;
pub mod prior;
pub mod sampler;
pub mod summary;

pub use diagnostics::{diagnostics, effective_sample_size, split_rhat, ConvergenceDiagnostics};
pub use fit::{default_initial, fit_model, FitConfig, PosteriorDraws};
pub use posterior::{from_unconstrained, log_posterior, to_unconstrained, Posterior};
pub use prior::PriorSpec;
pub use sampler::{run_chain, ChainConfig, ChainOutput};
pub use summary::{summarize_posterior, ParameterSummary};
