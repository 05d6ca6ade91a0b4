//! Block Krylov bases.
//!
//! The main builder works on the right: it spans
//! `Aᵀ·K_q(AAᵀ, G) = span{AᵀG, (AᵀA)AᵀG, ...} ⊂ R^d` using alternating products
//! with `A` and `Aᵀ`. Products `A·Z_i` computed during the build are kept, so
//! the projected matrix `AZ` only needs the last block applied once more.

use crate::dense::{hcat, orthonormalize, orthonormalize_against, Mat};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, OuterGram, Tally};
use crate::random::{gaussian_matrix, rng_for, streams};

pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Parameters of one RBKI run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    pub k: usize,
    pub b: usize,
    pub q: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub drop_tol: f64,
}

impl KrylovConfig {
    pub fn new(k: usize, b: usize, q: usize, seed: u64) -> Self {
        Self {
            k,
            b,
            q,
            epsilon: 0.25,
            delta: 0.05,
            seed,
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    /// `⌈k/b⌉`.
    pub fn depth(&self) -> usize {
        self.k.div_ceil(self.b.max(1))
    }

    /// Checks the invariants against an `n x d` operator.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        let limit = n.min(d);
        if self.k == 0 || self.k > limit {
            return Err(Error::config(format!(
                "k = {} must satisfy 1 <= k <= min(n, d) = {limit}",
                self.k
            )));
        }
        if self.b == 0 || self.b > self.k {
            return Err(Error::config(format!(
                "block size b = {} must satisfy 1 <= b <= k = {}",
                self.b, self.k
            )));
        }
        if self.q < self.depth() {
            return Err(Error::config(format!(
                "q = {} is below ceil(k/b) = {}; the basis would have fewer than k columns",
                self.q,
                self.depth()
            )));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(self.drop_tol >= 0.0) {
            return Err(Error::config("drop_tol must be >= 0"));
        }
        Ok(())
    }
}

/// Orthonormal basis of a block Krylov subspace with its provenance.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub z: Mat,
    pub block_size: usize,
    /// Requested number of Krylov powers.
    pub iterations: usize,
    /// Blocks actually added before the space was exhausted or capped.
    pub completed_iterations: usize,
    pub seed: Option<u64>,
    /// Single-vector products spent building the basis.
    pub matvec_cost: u64,
    pub warnings: Vec<String>,
}

impl KrylovBasis {
    pub fn ncols(&self) -> usize {
        self.z.ncols()
    }

    /// `b(2q − 1)`: the cost of a right-side build with no dropped columns.
    pub fn nominal_cost(block_size: usize, iterations: usize) -> u64 {
        (block_size * (2 * iterations).saturating_sub(1)) as u64
    }
}

/// `n x b` standard Gaussian start block for `seed`.
pub fn gaussian_start_block(n: usize, b: usize, seed: u64) -> Result<Mat> {
    if n == 0 || b == 0 {
        return Err(Error::config(format!("start block needs n, b >= 1, got {n}x{b}")));
    }
    Ok(gaussian_matrix(n, b, &mut rng_for(seed, streams::START_BLOCK)))
}

/// Incremental right-side basis builder. Each [`step`](Self::step) adds one
/// Krylov power and costs `2b` products; [`image`](Self::image) returns `AZ`.
pub struct KrylovBuilder<'a> {
    op: Tally<'a>,
    basis: Mat,
    last: Mat,
    image: Mat,
    drop_tol: f64,
    blocks: usize,
    exhausted: bool,
}

impl<'a> KrylovBuilder<'a> {
    /// First block `orth(AᵀG)`.
    pub fn start(op: &'a dyn LinearOperator, g: &Mat, drop_tol: f64) -> Result<Self> {
        if g.nrows() != op.nrows() {
            return Err(Error::dim(format!(
                "start block has {} rows, operator has {}",
                g.nrows(),
                op.nrows()
            )));
        }
        let op = Tally::new(op);
        let w = op.apply_transpose(g);
        let (q0, _) = orthonormalize(&w, drop_tol)?;
        let d = op.ncols();
        let exhausted = q0.ncols() == 0 || q0.ncols() >= d;
        Ok(Self {
            image: Mat::zeros(op.nrows(), 0),
            op,
            basis: q0.clone(),
            last: q0,
            drop_tol,
            blocks: 1,
            exhausted,
        })
    }

    /// Adds the next block. Returns `false` once no new direction can be
    /// added (invariant subspace reached or dimension `d` filled).
    pub fn step(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        let y = self.last_image();
        let w = self.op.apply_transpose(&y);
        let fresh = orthonormalize_against(&self.basis, &w, self.drop_tol);
        if fresh.ncols() == 0 {
            self.exhausted = true;
            return false;
        }
        self.basis = hcat(&self.basis, &fresh);
        self.last = fresh;
        self.blocks += 1;
        if self.basis.ncols() >= self.op.ncols() {
            self.exhausted = true;
        }
        true
    }

    fn last_image(&mut self) -> Mat {
        let m = self.basis.ncols();
        if self.image.ncols() < m {
            let y = self.op.apply(&self.last);
            self.image = hcat(&self.image, &y);
        }
        let width = self.last.ncols();
        self.image.columns(m - width, width).into_owned()
    }

    /// `A Z` for the current basis; applies `A` only to columns not yet imaged.
    pub fn image(&mut self) -> &Mat {
        if self.image.ncols() < self.basis.ncols() {
            self.last_image();
        }
        &self.image
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Products spent since [`start`](Self::start).
    pub fn matvecs(&self) -> u64 {
        self.op.matvecs()
    }

    fn finish(self, requested: usize, block_size: usize, seed: Option<u64>, cost: u64) -> KrylovBasis {
        let mut warnings = Vec::new();
        if requested * block_size > self.op.ncols() {
            warnings.push(format!(
                "q*b = {} exceeds d = {}; basis capped at {} columns",
                requested * block_size,
                self.op.ncols(),
                self.basis.ncols()
            ));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        KrylovBasis {
            z: self.basis,
            block_size,
            iterations: requested,
            completed_iterations: self.blocks,
            seed,
            matvec_cost: cost,
            warnings,
        }
    }
}

/// Basis of `Aᵀ·K_q(AAᵀ, G)` in `R^d`; costs `b(2q − 1)` products when no
/// columns are dropped.
pub fn build_krylov_basis(op: &dyn LinearOperator, g: &Mat, q: usize, drop_tol: f64) -> Result<KrylovBasis> {
    if q == 0 {
        return Err(Error::config("iteration count q must be at least 1"));
    }
    let mut builder = KrylovBuilder::start(op, g, drop_tol)?;
    for _ in 1..q {
        if !builder.step() {
            break;
        }
    }
    let cost = builder.matvecs();
    Ok(builder.finish(q, g.ncols(), None, cost))
}

/// Runs [`KrylovBuilder`] for `q` powers and also returns `AZ`.
pub(crate) fn build_with_image(
    op: &dyn LinearOperator,
    g: &Mat,
    q: usize,
    drop_tol: f64,
    seed: Option<u64>,
) -> Result<(KrylovBasis, Mat, u64)> {
    let mut builder = KrylovBuilder::start(op, g, drop_tol)?;
    for _ in 1..q {
        if !builder.step() {
            break;
        }
    }
    let basis_cost = builder.matvecs();
    let image = builder.image().clone();
    let total = builder.matvecs();
    Ok((builder.finish(q, g.ncols(), seed, basis_cost), image, total))
}

/// Orthonormal basis of `K_q(M, G)` for a symmetric operator `M`, in the
/// space `M` acts on.
pub fn build_symmetric_krylov(m: &dyn LinearOperator, g: &Mat, q: usize, drop_tol: f64) -> Result<KrylovBasis> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim("symmetric Krylov builder needs a square operator"));
    }
    if g.nrows() != m.nrows() {
        return Err(Error::dim(format!(
            "start block has {} rows, operator has {}",
            g.nrows(),
            m.nrows()
        )));
    }
    if q == 0 {
        return Err(Error::config("iteration count q must be at least 1"));
    }
    let start_count = m.matvecs();
    let (mut basis, _) = orthonormalize(g, drop_tol)?;
    let mut last = basis.clone();
    let mut blocks = 1;
    while blocks < q && last.ncols() > 0 && basis.ncols() < m.nrows() {
        let w = m.apply(&last);
        let fresh = orthonormalize_against(&basis, &w, drop_tol);
        if fresh.ncols() == 0 {
            break;
        }
        basis = hcat(&basis, &fresh);
        last = fresh;
        blocks += 1;
    }
    let mut warnings = Vec::new();
    if q * g.ncols() > m.nrows() {
        warnings.push(format!(
            "q*b = {} exceeds dimension {}; basis capped at {} columns",
            q * g.ncols(),
            m.nrows(),
            basis.ncols()
        ));
    }
    Ok(KrylovBasis {
        z: basis,
        block_size: g.ncols(),
        iterations: q,
        completed_iterations: blocks,
        seed: None,
        matvec_cost: m.matvecs() - start_count,
        warnings,
    })
}

/// Simulated start block `[G, MG, ..., M^{t−1}G]` with `M = AAᵀ`.
pub fn simulated_block(op: &dyn LinearOperator, g: &Mat, t: usize) -> Result<Mat> {
    let n = op.nrows();
    if g.nrows() != n {
        return Err(Error::dim(format!("start block has {} rows, operator has {n}", g.nrows())));
    }
    if t == 0 || g.ncols() * t > n {
        return Err(Error::config(format!(
            "simulated block needs 1 <= t and b*t <= n, got b = {}, t = {t}, n = {n}",
            g.ncols()
        )));
    }
    let m = OuterGram::new(op);
    let mut out = g.clone();
    let mut current = g.clone();
    for _ in 1..t {
        current = m.apply(&current);
        out = hcat(&out, &current);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{principal_angles, Vector};
    use crate::operator::DenseOperator;

    fn diag_op(values: &[f64]) -> DenseOperator {
        DenseOperator::new(Mat::from_diagonal(&Vector::from_column_slice(values))).unwrap()
    }

    #[test]
    fn counter_matches_recurrence() {
        let a = gaussian_matrix(40, 30, &mut rng_for(5, 0));
        let op = DenseOperator::new(a).unwrap();
        let g = gaussian_start_block(40, 4, 1).unwrap();
        let basis = build_krylov_basis(&op, &g, 5, 0.0).unwrap();
        assert_eq!(basis.matvec_cost, 36);
        assert_eq!(basis.matvec_cost, KrylovBasis::nominal_cost(4, 5));
        assert_eq!(basis.ncols(), 20);
    }

    #[test]
    fn single_power_spans_at_g() {
        let a = gaussian_matrix(12, 9, &mut rng_for(2, 0));
        let op = DenseOperator::new(a.clone()).unwrap();
        let g = gaussian_start_block(12, 3, 9).unwrap();
        let basis = build_krylov_basis(&op, &g, 1, 0.0).unwrap();
        let (direct, _) = orthonormalize(&a.tr_mul(&g), 0.0).unwrap();
        let angles = principal_angles(&basis.z, &direct).unwrap();
        assert!(angles.iter().all(|x| *x <= 1e-10));
    }

    #[test]
    fn diagonal_single_vector_fills_space() {
        let op = diag_op(&[1.0, 0.5, 0.25]);
        let g = gaussian_start_block(3, 1, 4).unwrap();
        let basis = build_krylov_basis(&op, &g, 3, 0.0).unwrap();
        assert_eq!(basis.ncols(), 3);
    }

    #[test]
    fn cap_warns_when_space_is_exceeded() {
        let op = diag_op(&[1.0, 0.5, 0.25]);
        let g = gaussian_start_block(3, 2, 4).unwrap();
        let basis = build_krylov_basis(&op, &g, 3, 0.0).unwrap();
        assert_eq!(basis.ncols(), 3);
        assert_eq!(basis.warnings.len(), 1);
    }

    #[test]
    fn simulated_block_on_diagonal() {
        let lam = [0.9, 0.5, 0.3, 0.1];
        let op = diag_op(&lam);
        let g = gaussian_start_block(4, 1, 2).unwrap();
        let b = simulated_block(&op, &g, 3).unwrap();
        for i in 0..4 {
            let l2 = lam[i] * lam[i];
            assert!((b[(i, 1)] - l2 * g[(i, 0)]).abs() < 1e-15);
            assert!((b[(i, 2)] - l2 * l2 * g[(i, 0)]).abs() < 1e-15);
        }
        assert_eq!(simulated_block(&op, &g, 1).unwrap(), g);
    }

    #[test]
    fn config_validation() {
        let cfg = KrylovConfig::new(5, 2, 3, 0);
        assert!(cfg.validate(10, 10).is_ok());
        assert!(KrylovConfig::new(11, 2, 6, 0).validate(10, 20).is_err());
        assert!(KrylovConfig::new(5, 6, 3, 0).validate(10, 10).is_err());
        assert!(KrylovConfig::new(5, 2, 2, 0).validate(10, 10).is_err());
    }
}
