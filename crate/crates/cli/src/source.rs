//! Loading the input matrix and whatever ground truth comes with it.

use rbki::operator::estimate_spectral_norm;
use rbki::{read_matrix, svd, synth_matrix, DenseOperator, LinearOperator, MatrixFormat, SpectrumSpec, SvdResult};

use crate::config::{FileFormat, Source};
use crate::exit::Failure;

pub struct Loaded {
    pub op: DenseOperator,
    /// Full SVD, from the generator or computed on request.
    pub reference: Option<SvdResult>,
    pub label: String,
}

impl Loaded {
    pub fn shape(&self) -> (usize, usize) {
        (self.op.nrows(), self.op.ncols())
    }

    pub fn spectral_norm(&self, seed: u64) -> f64 {
        match &self.reference {
            Some(r) => r.sigma_max(),
            None => estimate_spectral_norm(&self.op, 100, seed),
        }
    }
}

pub fn load(source: &Source) -> Result<Loaded, Failure> {
    match source {
        Source::File {
            path,
            format,
            exact_reference,
        } => {
            let format = match format {
                FileFormat::Mtx => MatrixFormat::MatrixMarket,
                FileFormat::Raw => MatrixFormat::RawBinary,
            };
            let m = read_matrix(path, format)?;
            let reference = if *exact_reference { Some(svd(&m)?) } else { None };
            log::info!("read {}x{} matrix from {}", m.nrows(), m.ncols(), path.display());
            Ok(Loaded {
                op: DenseOperator::new(m)?,
                reference,
                label: path.display().to_string(),
            })
        }
        Source::Synthetic {
            spec,
            n,
            d,
            matrix_seed,
        } => {
            let kind = spec.parse()?;
            let m = synth_matrix(&SpectrumSpec::new(kind, *n, *d, *matrix_seed))?;
            Ok(Loaded {
                op: DenseOperator::new(m.matrix)?,
                reference: Some(m.svd),
                label: format!("{spec} ({n}x{d})"),
            })
        }
    }
}
