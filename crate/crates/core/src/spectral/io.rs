use serde::{Deserialize, Serialize};

use super::SpectralBasis;
use crate::error::{Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::WrightFisherParams;
use crate::poly::MatrixPolynomial;

/// One eigenpair as written to JSON. `eigenfunction` carries its own basis
/// tag; built bases use shifted Chebyshev coefficients on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub n: usize,
    pub gamma_diag: Vec<f64>,
    pub eigenfunction: MatrixPolynomial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisFile {
    params: WrightFisherParams,
    entries: Vec<BasisEntry>,
}

impl SpectralBasis {
    pub fn entries(&self) -> Vec<BasisEntry> {
        (0..self.truncation())
            .map(|n| BasisEntry {
                n,
                gamma_diag: self.eigenvalue(n).diagonal_vec(),
                eigenfunction: self.eigenfunction(n).clone(),
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BasisFile {
            params: *self.params(),
            entries: self.entries(),
        })?)
    }

    /// Reads a basis written by [`SpectralBasis::to_json`]. Entries must be
    /// numbered `0..M` in order.
    pub fn from_json(s: &str) -> Result<Self> {
        let f: BasisFile = serde_json::from_str(s)?;
        let mut efs = Vec::with_capacity(f.entries.len());
        let mut evs = Vec::with_capacity(f.entries.len());
        for (i, e) in f.entries.into_iter().enumerate() {
            if e.n != i {
                return Err(Error::Numeric(format!("entry {i} is labelled n = {}", e.n)));
            }
            evs.push(PhaseMatrix::from_diagonal(&e.gamma_diag));
            efs.push(e.eigenfunction);
        }
        SpectralBasis::from_parts(f.params, efs, evs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_density() {
        let p = WrightFisherParams::new(0.5, 1.0, 0.7, 3).unwrap();
        let b = SpectralBasis::wright_fisher(&p, 6).unwrap();
        let back = SpectralBasis::from_json(&b.to_json().unwrap()).unwrap();
        let d0 = b.transition_density(0.3, 0.4, 0.7).unwrap();
        let d1 = back.transition_density(0.3, 0.4, 0.7).unwrap();
        assert!(d0.max_abs_diff(&d1) < 1e-14);
        assert!(back.orthonormality_defect().unwrap() < 1e-8);
    }

    #[test]
    fn misnumbered_entries_rejected() {
        let p = WrightFisherParams::new(0.0, 0.0, 0.5, 2).unwrap();
        let b = SpectralBasis::wright_fisher(&p, 2).unwrap();
        let s = b.to_json().unwrap().replacen("\"n\": 1", "\"n\": 5", 1);
        assert!(SpectralBasis::from_json(&s).is_err());
    }
}
