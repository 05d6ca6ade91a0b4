//! Conditioning laboratory for square random block Krylov matrices
//! `[H CH ... C^{t−1}H]` with `C = diag(λ)` and `bt = k`.

pub mod bounds;
pub mod certificate;
pub mod experiments;
pub mod model;
pub mod precise;
pub mod pv;
pub mod sparsify;

pub use bounds::sigma_min_log_bound;
pub use certificate::{abstract_nonsparse_bound, certify, Certificate};
pub use experiments::{
    block_diagonal_witness, nonsingularity_check, sigma_min_experiment, NonsingularityReport, SigmaMinReport,
    SigmaMinSummary, SigmaMinTrial,
};
pub use model::{sample_krylov, SpectrumModel, VandermondeKrylov};
pub use precise::{log_sigma_min_extended, ExtendedSigmaMin};
pub use pv::{bilinear_variance, complement_basis, pv_decompose, PVDecomposition};
pub use sparsify::{root_polynomial, subspace_nonsparse_check, vandermonde_nonsparse_count, NonsparseCount};
