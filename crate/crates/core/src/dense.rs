//! Dense linear-algebra kernels: orthonormalization with column dropping,
//! a sorted and sign-normalized SVD, principal angles between subspaces, and
//! square Vandermonde matrices with their inverse-norm bounds.
//!
//! Storage is `nalgebra::DMatrix<f64>`; the SVD itself is nalgebra's
//! Golub-Kahan implementation, wrapped so that singular values come out
//! nonincreasing and singular vectors carry a fixed sign convention.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub const EPS: f64 = f64::EPSILON;

/// Residuals at or below this multiple of `EPS * ‖column‖` are treated as exact
/// linear dependence regardless of the caller's drop tolerance.
const DEPENDENCE_FLOOR: f64 = 64.0;

pub fn check_finite(m: &Mat, context: &'static str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    context,
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(())
}

/// Horizontal concatenation `[a b]`.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows(), "hcat: row mismatch");
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Orthonormal basis for `range(m)`.
///
/// Columns are processed left to right with classical Gram-Schmidt followed by
/// exactly one full re-orthogonalization pass. A column whose residual after
/// projection is at most `drop_tol * ‖m‖_F` is dropped, so the returned rank
/// may be smaller than `m.ncols()`.
pub fn orthonormalize(m: &Mat, drop_tol: f64) -> Result<(Mat, usize)> {
    check_finite(m, "orthonormalize input")?;
    if !(drop_tol >= 0.0) {
        return Err(Error::config(format!("drop_tol must be >= 0, got {drop_tol}")));
    }
    let q = orthonormalize_against(&Mat::zeros(m.nrows(), 0), m, drop_tol);
    let rank = q.ncols();
    Ok((q, rank))
}

/// Orthonormal columns spanning `range(block)` projected away from
/// `range(basis)`. `basis` must already have orthonormal columns.
pub(crate) fn orthonormalize_against(basis: &Mat, block: &Mat, drop_tol: f64) -> Mat {
    let n = block.nrows();
    debug_assert_eq!(basis.nrows(), n);
    let ref_norm = block.norm();
    let mut accepted: Vec<Vector> = Vec::with_capacity(block.ncols());

    for j in 0..block.ncols() {
        let mut v: Vector = block.column(j).into_owned();
        let col_norm = v.norm();
        if col_norm == 0.0 {
            continue;
        }
        for _pass in 0..2 {
            if basis.ncols() > 0 {
                let c = basis.tr_mul(&v);
                v.gemv(-1.0, basis, &c, 1.0);
            }
            for a in &accepted {
                let c = a.dot(&v);
                v.axpy(-c, a, 1.0);
            }
        }
        let r = v.norm();
        if r <= drop_tol * ref_norm || r <= DEPENDENCE_FLOOR * EPS * col_norm {
            continue;
        }
        v /= r;
        accepted.push(v);
    }

    if accepted.is_empty() {
        Mat::zeros(n, 0)
    } else {
        Mat::from_columns(&accepted)
    }
}

/// Thin SVD `M = U diag(s) Vᵀ` with `s` nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left_vectors: Mat,
    pub singular_values: Vec<f64>,
    pub right_vectors: Mat,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.left_vectors.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.right_vectors.transpose()
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.singular_values.iter().filter(|s| **s > tol).count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Leading `k` triplets (fewer if the factorization is smaller).
    pub fn truncate(&self, k: usize) -> SvdResult {
        let k = k.min(self.singular_values.len());
        SvdResult {
            left_vectors: self.left_vectors.columns(0, k).into_owned(),
            singular_values: self.singular_values[..k].to_vec(),
            right_vectors: self.right_vectors.columns(0, k).into_owned(),
        }
    }
}

fn svd_iteration_cap(rows: usize, cols: usize) -> usize {
    200 * rows.max(cols).max(10)
}

/// Full thin SVD. Singular values are sorted nonincreasing and each left
/// singular vector is signed so that its largest-magnitude entry is positive.
pub fn svd(m: &Mat) -> Result<SvdResult> {
    check_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::dim(format!("svd of an empty {rows}x{cols} matrix")));
    }
    let raw = nalgebra::linalg::SVD::try_new(m.clone(), true, true, EPS, svd_iteration_cap(rows, cols))
        .ok_or(Error::NoConvergence { rows, cols })?;
    let u = raw.u.expect("left vectors requested");
    let vt = raw.v_t.expect("right vectors requested");
    let s = raw.singular_values;

    let p = s.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let mut left = Mat::zeros(rows, p);
    let mut right = Mat::zeros(cols, p);
    let mut values = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        values.push(s[src]);
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &vt.row(src).transpose());
    }
    for j in 0..p {
        let col = left.column(j);
        let mut pivot = 0;
        for i in 1..rows {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            left.column_mut(j).neg_mut();
            right.column_mut(j).neg_mut();
        }
    }
    Ok(SvdResult {
        left_vectors: left,
        singular_values: values,
        right_vectors: right,
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    check_finite(m, "singular value input")?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::dim(format!(
            "singular values of an empty {rows}x{cols} matrix"
        )));
    }
    let raw = nalgebra::linalg::SVD::try_new(m.clone(), false, false, EPS, svd_iteration_cap(rows, cols))
        .ok_or(Error::NoConvergence { rows, cols })?;
    let mut s: Vec<f64> = raw.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub fn sigma_min(m: &Mat) -> Result<f64> {
    Ok(*singular_values(m)?.last().expect("nonempty"))
}

pub fn sigma_max(m: &Mat) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

/// Principal angles between `range(q1)` and `range(q2)`, nondecreasing, in
/// `[0, π/2]`. Both inputs must have orthonormal columns.
///
/// Cosines come from the singular values of `Q1ᵀQ2` (clamped to `[-1, 1]`);
/// angles below π/4 are taken from the sines, i.e. the singular values of
/// `(I - Q1Q1ᵀ)Q2`, since `acos` cannot resolve angles under ~1e-8.
pub fn principal_angles(q1: &Mat, q2: &Mat) -> Result<Vec<f64>> {
    if q1.nrows() != q2.nrows() {
        return Err(Error::dim(format!(
            "principal angles need equal row counts, got {} and {}",
            q1.nrows(),
            q2.nrows()
        )));
    }
    // Keep the wider basis first so that the residual has one column per angle.
    let (wide, narrow) = if q1.ncols() >= q2.ncols() { (q1, q2) } else { (q2, q1) };
    let count = narrow.ncols();
    if count == 0 {
        return Ok(Vec::new());
    }
    let cross = wide.tr_mul(narrow);
    let cosines = singular_values(&cross)?;
    let residual = narrow - wide * &cross;
    let mut sines = singular_values(&residual)?;
    sines.reverse();

    let mut angles: Vec<f64> = (0..count)
        .map(|i| {
            let c = cosines.get(i).copied().unwrap_or(0.0).clamp(-1.0, 1.0);
            if c * c >= 0.5 {
                sines[i].clamp(0.0, 1.0).asin()
            } else {
                c.acos()
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Square-or-tall Vandermonde matrix with rows `(1, λ_i, ..., λ_i^{t-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeMatrix {
    nodes: Vec<f64>,
    degree: usize,
}

impl VandermondeMatrix {
    /// Nodes must be strictly decreasing and lie in `[0, 1]`.
    pub fn new(nodes: Vec<f64>, degree: usize) -> Result<Self> {
        if nodes.is_empty() || degree == 0 {
            return Err(Error::dim("Vandermonde matrix needs at least one node and one column"));
        }
        for (i, x) in nodes.iter().enumerate() {
            if !x.is_finite() || *x < 0.0 || *x > 1.0 {
                return Err(Error::config(format!("node {i} = {x} is outside [0, 1]")));
            }
        }
        for w in nodes.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::config(format!(
                    "Vandermonde nodes must be strictly decreasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { nodes, degree })
    }

    /// Same as [`new`](Self::new) but permits repeated nodes. Used only to
    /// build deliberately singular negative controls.
    pub fn with_repeated_nodes(nodes: Vec<f64>, degree: usize) -> Result<Self> {
        if nodes.is_empty() || degree == 0 {
            return Err(Error::dim("Vandermonde matrix needs at least one node and one column"));
        }
        for w in nodes.windows(2) {
            if w[1] > w[0] {
                return Err(Error::config("nodes must be nonincreasing"));
            }
        }
        Ok(Self { nodes, degree })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nrows(&self) -> usize {
        self.nodes.len()
    }

    pub fn to_matrix(&self) -> Mat {
        Mat::from_fn(self.nodes.len(), self.degree, |i, j| self.nodes[i].powi(j as i32))
    }

    /// `V y`, i.e. the polynomial with coefficients `y` evaluated at every node.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.degree {
            return Err(Error::dim(format!(
                "coefficient vector has length {}, expected {}",
                y.len(),
                self.degree
            )));
        }
        Ok(self
            .nodes
            .iter()
            .map(|&x| y.iter().rev().fold(0.0, |acc, c| acc * x + c))
            .collect())
    }

    /// Row submatrix on the given node indices.
    pub fn select_rows(&self, rows: &[usize]) -> Result<VandermondeMatrix> {
        let nodes = rows.iter().map(|&i| self.nodes[i]).collect();
        VandermondeMatrix::new(nodes, self.degree)
    }

    /// Inverse-norm chain for a square Vandermonde matrix.
    ///
    /// `exact` is the ∞-norm of the inverse in the orientation where each node
    /// spans a column (`Wᵀ`); that inverse has the Lagrange basis polynomials'
    /// coefficients as its rows, so it is formed from those coefficients
    /// directly. For nonnegative nodes the coefficients alternate in sign and
    /// the expansion is free of cancellation.
    pub fn inverse_inf_norm(&self) -> Result<GautschiChain> {
        let t = self.degree;
        if self.nodes.len() != t {
            return Err(Error::dim(format!(
                "inverse needs a square Vandermonde matrix, got {}x{}",
                self.nodes.len(),
                t
            )));
        }
        if t > 30 {
            return Err(Error::config(format!("explicit inversion limited to t <= 30, got {t}")));
        }
        for w in self.nodes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Singular(format!("duplicate Vandermonde node {}", w[0])));
            }
        }

        let inverse = lagrange_inverse(&self.nodes);
        // `inverse` is W⁻¹ for rows-as-nodes W: column i holds the coefficients of L_i.
        let column_sums = (0..t).map(|i| inverse.column(i).abs().sum());
        let row_sums = (0..t).map(|d| inverse.row(d).abs().sum());
        let exact = column_sums.fold(0.0_f64, f64::max);
        let row_oriented = row_sums.fold(0.0_f64, f64::max);

        let gautschi_product = (0..t)
            .map(|i| {
                (0..t)
                    .filter(|&j| j != i)
                    .map(|j| (1.0 + self.nodes[j]) / (self.nodes[i] - self.nodes[j]).abs())
                    .product::<f64>()
            })
            .fold(0.0_f64, f64::max);

        let min_gap = self
            .nodes
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min);
        let gap_power = if t == 1 {
            1.0
        } else {
            (2.0 / min_gap).powi(t as i32 - 1)
        };

        Ok(GautschiChain {
            exact,
            gautschi_product,
            gap_power,
            row_oriented,
            min_gap: if t == 1 { f64::INFINITY } else { min_gap },
        })
    }
}

/// Result of [`VandermondeMatrix::inverse_inf_norm`]; `exact ≤ gautschi_product ≤ gap_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GautschiChain {
    pub exact: f64,
    pub gautschi_product: f64,
    pub gap_power: f64,
    /// ∞-norm of the inverse with nodes along rows; reported, not bounded.
    pub row_oriented: f64,
    pub min_gap: f64,
}

impl GautschiChain {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.exact <= self.gautschi_product * (1.0 + rel_slack)
            && self.gautschi_product <= self.gap_power * (1.0 + rel_slack)
    }
}

/// Inverse of the rows-as-nodes Vandermonde matrix: column `i` holds the
/// monomial coefficients of the Lagrange polynomial that is 1 at node `i`.
fn lagrange_inverse(nodes: &[f64]) -> Mat {
    let t = nodes.len();
    let mut inv = Mat::zeros(t, t);
    for i in 0..t {
        // Coefficients of ∏_{j≠i} (x - x_j), lowest degree first.
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (d, c) in poly.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * xj;
            }
            poly = next;
            denom *= nodes[i] - xj;
        }
        for (d, c) in poly.iter().enumerate() {
            inv[(d, i)] = c / denom;
        }
    }
    inv
}
