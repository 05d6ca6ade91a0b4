//! Randomized block Krylov iteration for rank-`k` approximation with any
//! block size `1 ≤ b ≤ k`, and a laboratory for the conditioning of square
//! random block Krylov matrices.
//!
//! ```
//! use rbki::{rbki, synth_matrix, DenseOperator, KrylovConfig, SpectrumKind, SpectrumSpec};
//!
//! let spec = SpectrumSpec::new(SpectrumKind::Geometric { ratio: 0.8 }, 60, 50, 7);
//! let a = synth_matrix(&spec).unwrap();
//! let op = DenseOperator::new(a.matrix.clone()).unwrap();
//! let approx = rbki(&op, &KrylovConfig::new(5, 2, 8, 1)).unwrap();
//! let m = rbki::error_metrics(&op, &approx, &a.svd).unwrap();
//! assert!(m.frobenius_ratio < 1.01);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod approx;
pub mod dense;
pub mod error;
pub mod gen;
pub mod goodness;
pub mod io;
pub mod krylov;
pub mod lab;
pub mod operator;
pub mod par;
pub mod random;
pub mod records;
pub mod smoothing;
pub mod spectrum;

pub use approx::{
    error_metrics, error_trajectory, matvecs_to_target, rbki, rbki_with_start, BasisSide, ErrorMetrics,
    LowRankApprox, TrajectoryOptions, TrajectoryPoint,
};
pub use dense::{orthonormalize, principal_angles, sigma_max, sigma_min, svd, Mat, SvdResult, VandermondeMatrix};
pub use error::{Error, Result};
pub use gen::{synth_matrix, SpectrumKind, SpectrumSpec, SyntheticMatrix};
pub use goodness::{goodness_estimate, goodness_restrict, GoodnessEstimate};
pub use io::{read_matrix, write_matrix, IoError, MatrixFormat};
pub use krylov::{
    build_krylov_basis, build_symmetric_krylov, gaussian_start_block, simulated_block, KrylovBasis, KrylovBuilder,
    KrylovConfig,
};
pub use operator::{DenseOperator, LinearOperator, OuterGram, Tally};
pub use par::Execution;
pub use records::{emit_records, TrialRecord};
pub use smoothing::{rbki_smoothed, smooth_perturb, PerturbationConfig, SmoothedOperator};
pub use spectrum::{gap_stats, recommend_q, GapStats, QMode, QRecommendation, QRequest};
