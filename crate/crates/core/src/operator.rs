//! Matrix-free operators with an instrumented product counter.
//!
//! One unit on the counter is one product of a single vector with `A` or
//! `Aᵀ`; applying the operator to a block of width `b` adds `b`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::dense::{check_finite, Mat};
use crate::error::{Error, Result};
use crate::random::{gaussian_matrix, rng_for, streams};

/// Monotone, thread-safe tally of single-vector products.
#[derive(Debug, Default)]
pub struct MatvecCounter(AtomicU64);

impl MatvecCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, n: usize) {
        self.0.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Access to `x ↦ Ax` and `y ↦ Aᵀy` for an `nrows x ncols` matrix `A`.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `A X` for `X` with `ncols()` rows.
    fn apply(&self, x: &Mat) -> Mat;

    /// `Aᵀ Y` for `Y` with `nrows()` rows.
    fn apply_transpose(&self, y: &Mat) -> Mat;

    /// Single-vector products performed so far.
    fn matvecs(&self) -> u64;

    /// The explicit matrix, when the operator has one. Reading it does not
    /// touch the counter.
    fn dense(&self) -> Option<&Mat> {
        None
    }

    fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }
}

/// Explicit dense matrix behind the operator interface.
#[derive(Debug)]
pub struct DenseOperator {
    matrix: Mat,
    counter: MatvecCounter,
}

impl DenseOperator {
    pub fn new(matrix: Mat) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::dim("operator must have at least one row and column"));
        }
        check_finite(&matrix, "operator matrix")?;
        Ok(Self {
            matrix,
            counter: MatvecCounter::new(),
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, x: &Mat) -> Mat {
        assert_eq!(x.nrows(), self.matrix.ncols(), "apply: dimension mismatch");
        self.counter.add(x.ncols());
        &self.matrix * x
    }

    fn apply_transpose(&self, y: &Mat) -> Mat {
        assert_eq!(y.nrows(), self.matrix.nrows(), "apply_transpose: dimension mismatch");
        self.counter.add(y.ncols());
        self.matrix.tr_mul(y)
    }

    fn matvecs(&self) -> u64 {
        self.counter.get()
    }

    fn dense(&self) -> Option<&Mat> {
        Some(&self.matrix)
    }
}

/// Borrowed operator with a private product counter, so concurrent callers
/// sharing one operator each see only their own products.
pub struct Tally<'a> {
    inner: &'a dyn LinearOperator,
    counter: MatvecCounter,
}

impl<'a> Tally<'a> {
    pub fn new(inner: &'a dyn LinearOperator) -> Self {
        Self {
            inner,
            counter: MatvecCounter::new(),
        }
    }
}

impl LinearOperator for Tally<'_> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn apply(&self, x: &Mat) -> Mat {
        self.counter.add(x.ncols());
        self.inner.apply(x)
    }

    fn apply_transpose(&self, y: &Mat) -> Mat {
        self.counter.add(y.ncols());
        self.inner.apply_transpose(y)
    }

    fn matvecs(&self) -> u64 {
        self.counter.get()
    }

    fn dense(&self) -> Option<&Mat> {
        self.inner.dense()
    }
}

/// `AAᵀ` realized as `A(Aᵀx)`; never formed. The inner operator's counter
/// records two units per column.
pub struct OuterGram<'a> {
    inner: &'a dyn LinearOperator,
}

impl<'a> OuterGram<'a> {
    pub fn new(inner: &'a dyn LinearOperator) -> Self {
        Self { inner }
    }
}

impl LinearOperator for OuterGram<'_> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.nrows()
    }

    fn apply(&self, x: &Mat) -> Mat {
        self.inner.apply(&self.inner.apply_transpose(x))
    }

    fn apply_transpose(&self, y: &Mat) -> Mat {
        self.apply(y)
    }

    fn matvecs(&self) -> u64 {
        self.inner.matvecs()
    }
}

/// Power-iteration estimate of `‖A‖₂`, run on `AᵀA` from a seeded start.
/// Uses (and counts) products with the operator.
pub fn estimate_spectral_norm(op: &dyn LinearOperator, iterations: usize, seed: u64) -> f64 {
    let mut x = gaussian_matrix(op.ncols(), 1, &mut rng_for(seed, streams::POWER_ITERATION));
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        x /= nx;
        let y = op.apply(&x);
        estimate = y.norm();
        x = op.apply_transpose(&y);
    }
    estimate
}
