//! JSON file formats for states and Kraus channels.
//!
//! Mixed state: `{ "dim": d, "re": [[...]], "im": [[...]] }`, row-major d x d.
//! Pure state:  `{ "dim": d, "re": [...],  "im": [...] }`.
//! Channel:     `{ "dim": d, "kraus": [ {"re": [[...]], "im": [[...]]}, ... ] }`.
//!
//! Loaders validate the type invariants and surface the violated bound.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector};
use crate::state::{DensityMatrix, PureState};

/// Real/imaginary split of a dense matrix, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixParts {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        Self {
            re: (0..rows)
                .map(|i| (0..cols).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..rows)
                .map(|i| (0..cols).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self, dim: usize) -> Result<CMatrix> {
        check_grid(&self.re, dim)?;
        check_grid(&self.im, dim)?;
        Ok(CMatrix::from_fn(dim, dim, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

fn check_grid(grid: &[Vec<f64>], dim: usize) -> Result<()> {
    if grid.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: grid.len(),
        });
    }
    for row in grid {
        if row.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    Ok(())
}

/// On-disk mixed state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let parts = MatrixParts::from_matrix(rho.matrix());
        Self {
            dim: rho.dim(),
            re: parts.re,
            im: parts.im,
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let parts = MatrixParts {
            re: self.re.clone(),
            im: self.im.clone(),
        };
        DensityMatrix::new(parts.to_matrix(self.dim)?)
    }
}

/// On-disk pure state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureStateFile {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PureStateFile {
    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            dim: psi.dim(),
            re: psi.amplitudes().iter().map(|z| z.re).collect(),
            im: psi.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_pure(&self) -> Result<PureState> {
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: self.re.len().max(self.im.len()),
            });
        }
        let amps = CVector::from_iterator(
            self.dim,
            self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)),
        );
        PureState::new(amps)
    }
}

/// On-disk Kraus channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausFile {
    pub dim: usize,
    pub kraus: Vec<MatrixParts>,
}

impl KrausFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.operators().iter().map(MatrixParts::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(|p| p.to_matrix(self.dim))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(ops)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyStateFile {
    Mixed(StateFile),
    Pure(PureStateFile),
}

/// Parses either a mixed-state or a pure-state file; pure states come back
/// as their projectors.
pub fn parse_state_json(text: &str) -> Result<DensityMatrix> {
    match serde_json::from_str::<AnyStateFile>(text)? {
        AnyStateFile::Mixed(f) => f.to_density(),
        AnyStateFile::Pure(f) => Ok(f.to_pure()?.density()),
    }
}

pub fn parse_kraus_json(text: &str) -> Result<KrausChannel> {
    serde_json::from_str::<KrausFile>(text)?.to_channel()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("state serializes")
}

pub fn kraus_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string_pretty(&KrausFile::from_channel(ch)).expect("channel serializes")
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile::from_density(self).serialize(s)
    }
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PureStateFile::from_pure(self).serialize(s)
    }
}
