use crate::dense::{hcat, Mat, VandermondeMatrix, Vector};
use crate::error::{Error, Result};
use crate::gen::SpectrumKind;
use crate::random::{gaussian_matrix, rng_for, streams};
use crate::spectrum::GapStats;

/// Eigenvalues `1 = λ_1 > ... > λ_k ≥ 0` of the symmetric matrix `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    eigenvalues: Vec<f64>,
    tag: String,
    distinct: bool,
}

impl SpectrumModel {
    /// Normalizes by the top value; requires strictly decreasing input.
    pub fn new(eigenvalues: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        let model = Self::with_repeats(eigenvalues, tag)?;
        if !model.distinct {
            return Err(Error::config("spectrum model needs strictly decreasing eigenvalues"));
        }
        Ok(model)
    }

    /// Allows repeated eigenvalues (negative controls only).
    pub fn with_repeats(mut eigenvalues: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::config("spectrum model needs at least one eigenvalue"));
        }
        let top = eigenvalues[0];
        if !(top > 0.0 && top.is_finite()) {
            return Err(Error::config("top eigenvalue must be positive and finite"));
        }
        for v in &mut eigenvalues {
            *v /= top;
        }
        eigenvalues[0] = 1.0;
        if eigenvalues.iter().any(|v| !(*v >= 0.0)) || eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::config("eigenvalues must be nonnegative and nonincreasing"));
        }
        let distinct = eigenvalues.windows(2).all(|w| w[1] < w[0]);
        Ok(Self {
            eigenvalues,
            tag: tag.into(),
            distinct,
        })
    }

    /// `λ_i = ratio^{i−1}`.
    pub fn geometric(k: usize, ratio: f64) -> Result<Self> {
        Self::new((0..k).map(|i| ratio.powi(i as i32)).collect(), format!("geometric:{ratio}"))
    }

    /// From a singular value generator: `λ_i = (σ_i / σ_1)²`.
    pub fn from_singular(kind: &SpectrumKind, k: usize) -> Result<Self> {
        let s = kind.values(k)?;
        if s.len() != k {
            return Err(Error::config(format!("spectrum yields {} values, need k = {k}", s.len())));
        }
        Self::new(s.iter().map(|x| x * x).collect(), kind.to_string())
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    pub fn gap_stats(&self) -> GapStats {
        GapStats::from_eigenvalues(&self.eigenvalues, self.k()).expect("validated spectrum")
    }

    /// `ln(Δ_k / (c·κ_k))`; `−∞` when the gap vanishes.
    pub fn log_gap_ratio(&self, c: f64) -> f64 {
        let g = self.gap_stats();
        (g.min_relative_gap / (c * g.condition_number)).ln()
    }

    /// `k x t` Vandermonde matrix on the eigenvalues.
    pub fn vandermonde(&self, t: usize) -> Result<VandermondeMatrix> {
        if self.distinct {
            VandermondeMatrix::new(self.eigenvalues.clone(), t)
        } else {
            VandermondeMatrix::with_repeated_nodes(self.eigenvalues.clone(), t)
        }
    }
}

/// Square block Krylov matrix in Vandermonde form
/// `K = [diag(g_1)V ... diag(g_b)V]`, `bt = k`.
#[derive(Debug, Clone)]
pub struct VandermondeKrylov {
    pub k: usize,
    pub b: usize,
    pub t: usize,
    /// `k x b` Gaussian block with columns `g_1..g_b`.
    pub h: Mat,
    pub v: VandermondeMatrix,
    pub vmat: Mat,
    pub k_mat: Mat,
    pub seed: u64,
}

impl VandermondeKrylov {
    /// Assembles `K` from a given `H`.
    pub fn from_block(spectrum: &SpectrumModel, h: Mat, seed: u64) -> Result<Self> {
        let k = spectrum.k();
        let b = h.ncols();
        if h.nrows() != k || b == 0 || !k.is_multiple_of(b) {
            return Err(Error::config(format!(
                "block size b = {b} must divide k = {k} (and H must have k rows)"
            )));
        }
        let t = k / b;
        let v = spectrum.vandermonde(t)?;
        let vmat = v.to_matrix();
        let mut k_mat = Mat::zeros(k, k);
        for j in 0..b {
            k_mat.columns_mut(j * t, t).copy_from(&scaled_rows(&h.column(j).into_owned(), &vmat));
        }
        Ok(Self {
            k,
            b,
            t,
            h,
            v,
            vmat,
            k_mat,
            seed,
        })
    }

    /// `diag(g_j) V`.
    pub fn block(&self, j: usize) -> Mat {
        self.k_mat.columns(j * self.t, self.t).into_owned()
    }

    /// `K` with block `j` removed (`k x (k − t)`).
    pub fn leave_one_out(&self, j: usize) -> Mat {
        let mut out = Mat::zeros(self.k, self.k - self.t);
        let mut col = 0;
        for i in (0..self.b).filter(|&i| i != j) {
            out.columns_mut(col, self.t).copy_from(&self.block(i));
            col += self.t;
        }
        out
    }

    /// `[H CH ... C^{t−1}H]` with `C = diag(λ)`.
    pub fn original_form(&self) -> Mat {
        let lam = Vector::from_column_slice(self.v.nodes());
        let mut out = self.h.clone();
        let mut cur = self.h.clone();
        for _ in 1..self.t {
            for mut c in cur.column_iter_mut() {
                c.component_mul_assign(&lam);
            }
            out = hcat(&out, &cur);
        }
        out
    }
}

fn scaled_rows(g: &Vector, m: &Mat) -> Mat {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= g[i];
    }
    out
}

/// Draws `H` from `seed` and assembles the Vandermonde form.
pub fn sample_krylov(spectrum: &SpectrumModel, b: usize, seed: u64) -> Result<VandermondeKrylov> {
    let k = spectrum.k();
    if b == 0 || !k.is_multiple_of(b) {
        return Err(Error::config(format!("block size b = {b} must divide k = {k}")));
    }
    let h = gaussian_matrix(k, b, &mut rng_for(seed, streams::START_BLOCK));
    VandermondeKrylov::from_block(spectrum, h, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::singular_values;

    #[test]
    fn single_depth_is_h() {
        let s = SpectrumModel::geometric(6, 0.8).unwrap();
        let kry = sample_krylov(&s, 6, 1).unwrap();
        assert_eq!(kry.k_mat, kry.h);
    }

    #[test]
    fn single_vector_is_scaled_vandermonde() {
        let s = SpectrumModel::geometric(5, 0.7).unwrap();
        let kry = sample_krylov(&s, 1, 2).unwrap();
        let v = s.vandermonde(5).unwrap().to_matrix();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(kry.k_mat[(i, j)], kry.h[(i, 0)] * v[(i, j)]);
            }
        }
    }

    #[test]
    fn permutation_preserves_singular_values() {
        let s = SpectrumModel::geometric(12, 0.8).unwrap();
        let kry = sample_krylov(&s, 3, 5).unwrap();
        let a = singular_values(&kry.k_mat).unwrap();
        let b = singular_values(&kry.original_form()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * a[0]);
        }
    }

    #[test]
    fn divisibility_required() {
        let s = SpectrumModel::geometric(24, 0.81).unwrap();
        assert!(sample_krylov(&s, 5, 0).is_err());
    }

    #[test]
    fn normalization_and_repeats() {
        let s = SpectrumModel::new(vec![4.0, 2.0, 1.0], "x").unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 0.5, 0.25]);
        assert!(SpectrumModel::new(vec![1.0, 0.5, 0.5], "x").is_err());
        assert!(!SpectrumModel::with_repeats(vec![1.0, 0.5, 0.5], "x").unwrap().is_distinct());
    }
}
