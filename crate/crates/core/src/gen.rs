//! Test matrices with prescribed singular values.

use std::fmt;
use std::str::FromStr;

use crate::dense::{Mat, SvdResult};
use crate::error::{Error, Result};
use crate::random::{haar_orthonormal, rng_for, streams};

pub const MAX_DIMENSION: usize = 4000;

/// Shape of the singular value sequence (indices are 1-based in the docs).
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// `σ_i = ρ^{i−1}`.
    Geometric { ratio: f64 },
    /// `σ_i = i^{−p}`.
    Polynomial { power: f64 },
    /// Geometric decay with an extra factor applied after each listed
    /// position: `σ_{p+1} = factor·ρ·σ_p` for every `p` in `positions`.
    Gapped {
        ratio: f64,
        positions: Vec<usize>,
        factor: f64,
    },
    Explicit(Vec<f64>),
}

impl FromStr for SpectrumKind {
    type Err = Error;

    /// `geometric:ρ`, `poly:p`, `gap:ρ:p1,p2:factor` or `list:s1,s2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::config(format!("spectrum '{s}': {why}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or_default();
        let rest = parts.next().ok_or_else(|| bad("missing parameters"))?;
        let parsed = match kind {
            "geometric" | "geo" => SpectrumKind::Geometric { ratio: num(rest)? },
            "poly" | "polynomial" => SpectrumKind::Polynomial { power: num(rest)? },
            "gap" | "gapped" => {
                let f: Vec<&str> = rest.split(':').collect();
                if f.len() != 3 {
                    return Err(bad("expected gap:ratio:positions:factor"));
                }
                let positions = f[1]
                    .split(',')
                    .map(|p| p.trim().parse::<usize>().map_err(|_| bad("bad gap position")))
                    .collect::<Result<Vec<_>>>()?;
                SpectrumKind::Gapped {
                    ratio: num(f[0])?,
                    positions,
                    factor: num(f[2])?,
                }
            }
            "list" => SpectrumKind::Explicit(rest.split(',').map(num).collect::<Result<Vec<_>>>()?),
            _ => return Err(bad("unknown kind")),
        };
        parsed.check()?;
        Ok(parsed)
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumKind::Geometric { ratio } => write!(f, "geometric:{ratio}"),
            SpectrumKind::Polynomial { power } => write!(f, "poly:{power}"),
            SpectrumKind::Gapped { ratio, positions, factor } => {
                let p: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                write!(f, "gap:{ratio}:{}:{factor}", p.join(","))
            }
            SpectrumKind::Explicit(v) => {
                let p: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", p.join(","))
            }
        }
    }
}

impl SpectrumKind {
    fn check(&self) -> Result<()> {
        match self {
            SpectrumKind::Geometric { ratio } if !(*ratio > 0.0 && *ratio <= 1.0) => {
                Err(Error::config(format!("geometric ratio {ratio} must lie in (0, 1]")))
            }
            SpectrumKind::Polynomial { power } if !(*power >= 0.0) => {
                Err(Error::config(format!("polynomial power {power} must be >= 0")))
            }
            SpectrumKind::Gapped { ratio, positions, factor } => {
                if !(*ratio > 0.0 && *ratio <= 1.0) || !(*factor > 0.0 && *factor <= 1.0) {
                    return Err(Error::config("gapped spectrum needs ratio and factor in (0, 1]"));
                }
                if positions.contains(&0) {
                    return Err(Error::config("gap positions are 1-based"));
                }
                Ok(())
            }
            SpectrumKind::Explicit(v) => {
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::config("explicit spectrum needs finite nonnegative values"));
                }
                if v.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::config("explicit spectrum must be nonincreasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// First `len` values of the sequence (explicit lists give their own length).
    pub fn values(&self, len: usize) -> Result<Vec<f64>> {
        self.check()?;
        Ok(match self {
            SpectrumKind::Geometric { ratio } => (0..len).map(|i| ratio.powi(i as i32)).collect(),
            SpectrumKind::Polynomial { power } => {
                (1..=len).map(|i| (i as f64).powf(-power)).collect()
            }
            SpectrumKind::Gapped { ratio, positions, factor } => {
                let mut out = Vec::with_capacity(len);
                let mut s = 1.0;
                for i in 1..=len {
                    out.push(s);
                    s *= ratio;
                    if positions.contains(&i) {
                        s *= factor;
                    }
                }
                out
            }
            SpectrumKind::Explicit(v) => v.clone(),
        })
    }
}

/// Generator input: spectrum, shape and the seed of the singular subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// Divide by `σ_1` so the top singular value is 1.
    pub normalize: bool,
}

impl SpectrumSpec {
    pub fn new(kind: SpectrumKind, n: usize, d: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            d,
            seed,
            normalize: false,
        }
    }

    /// Requested singular values; `min(n, d)` of them unless explicit.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let r = self.n.min(self.d);
        let mut values = self.kind.values(r)?;
        if values.len() > r {
            return Err(Error::config(format!(
                "spectrum has {} values but min(n, d) = {r}",
                values.len()
            )));
        }
        if self.normalize {
            let top = values[0];
            if top > 0.0 {
                values.iter_mut().for_each(|v| *v /= top);
            }
        }
        Ok(values)
    }
}

/// A generated matrix together with the SVD it was built from.
#[derive(Debug, Clone)]
pub struct SyntheticMatrix {
    pub matrix: Mat,
    pub svd: SvdResult,
}

/// `A = U diag(σ) Vᵀ` with Haar-distributed `U`, `V`.
pub fn synth_matrix(spec: &SpectrumSpec) -> Result<SyntheticMatrix> {
    let (n, d) = (spec.n, spec.d);
    if n == 0 || d == 0 || n > MAX_DIMENSION || d > MAX_DIMENSION {
        return Err(Error::config(format!(
            "generator supports 1 <= n, d <= {MAX_DIMENSION}, got {n}x{d}"
        )));
    }
    let sigma = spec.singular_values()?;
    let r = sigma.len();
    let u = haar_orthonormal(n, r, &mut rng_for(spec.seed, streams::LEFT_FACTOR));
    let v = haar_orthonormal(d, r, &mut rng_for(spec.seed, streams::RIGHT_FACTOR));
    let mut us = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    let matrix = us * v.transpose();
    Ok(SyntheticMatrix {
        matrix,
        svd: SvdResult {
            left_vectors: u,
            singular_values: sigma,
            right_vectors: v,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::svd;
    use crate::spectrum::gap_stats;

    #[test]
    fn parse_round_trip() {
        for s in ["geometric:0.9", "poly:1.5", "gap:0.95:10,20:0.5", "list:3,2,1"] {
            let k: SpectrumKind = s.parse().unwrap();
            assert_eq!(k.to_string().parse::<SpectrumKind>().unwrap(), k);
        }
        assert!("geometric:1.5".parse::<SpectrumKind>().is_err());
        assert!("cubic:1".parse::<SpectrumKind>().is_err());
        assert!("list:1,2".parse::<SpectrumKind>().is_err());
    }

    #[test]
    fn explicit_list() {
        let spec = SpectrumSpec::new(SpectrumKind::Explicit(vec![3.0, 2.0, 1.0]), 3, 3, 1);
        let m = synth_matrix(&spec).unwrap();
        assert_eq!(m.svd.singular_values, vec![3.0, 2.0, 1.0]);
        let s = svd(&m.matrix).unwrap().singular_values;
        for (a, b) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn geometric_gap() {
        let spec = SpectrumSpec::new(SpectrumKind::Geometric { ratio: 0.9 }, 40, 30, 1);
        let g = gap_stats(&spec.singular_values().unwrap(), 20).unwrap();
        assert!((g.min_relative_gap - 0.19).abs() < 1e-12);
    }

    #[test]
    fn gapped_values() {
        let k = SpectrumKind::Gapped { ratio: 1.0, positions: vec![2], factor: 0.5 };
        assert_eq!(k.values(4).unwrap(), vec![1.0, 1.0, 0.5, 0.5]);
    }

    #[test]
    fn too_long_list_rejected() {
        let spec = SpectrumSpec::new(SpectrumKind::Explicit(vec![3.0, 2.0, 1.0]), 2, 5, 1);
        assert!(synth_matrix(&spec).is_err());
    }
}
