use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HamiltonianModel, ModelHeader};
use crate::error::{Error, Result};
use crate::symtensor::{SymTensor, TensorFile};

/// On-disk model layout. Tensors are either inline or referenced by a path
/// relative to the model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub modes: usize,
    #[serde(default)]
    pub orbitals: usize,
    pub cutoff_d: usize,
    pub omega: Vec<f64>,
    #[serde(rename = "Lv", default)]
    pub lv: usize,
    #[serde(rename = "Lvc", default)]
    pub lvc: usize,
    #[serde(default)]
    pub vib: Vec<VibEntry>,
    #[serde(default)]
    pub vibc: Vec<VibcEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VibEntry {
    pub order: usize,
    #[serde(flatten)]
    pub source: TensorSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VibcEntry {
    pub order: usize,
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub source: TensorSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorSource {
    Tensor(TensorFile),
    Tensorfile(String),
}

impl TensorSource {
    fn load(&self, base: Option<&Path>, location: &str) -> Result<SymTensor> {
        match self {
            TensorSource::Tensor(f) => SymTensor::from_file(f.clone(), location),
            TensorSource::Tensorfile(p) => {
                let path = match base {
                    Some(dir) => dir.join(p),
                    None => p.into(),
                };
                SymTensor::load_json(path)
            }
        }
    }
}

impl HamiltonianModel {
    pub fn from_model_file(file: ModelFile, base: Option<&Path>, location: &str) -> Result<Self> {
        let mut h = HamiltonianModel::new(ModelHeader {
            modes: file.modes,
            orbitals: file.orbitals,
            cutoff_d: file.cutoff_d,
            omega: file.omega,
            lv: file.lv,
            lvc: file.lvc,
        })
        .map_err(|e| Error::parse(location, e))?;
        for (n, e) in file.vib.iter().enumerate() {
            let at = format!("{location}: vib[{n}]");
            let t = e.source.load(base, &at)?;
            if t.order() != e.order || e.order > file.lv {
                return Err(Error::parse(
                    at,
                    format!(
                        "tensor order {} with declared order {} and Lv {}",
                        t.order(),
                        e.order,
                        file.lv
                    ),
                ));
            }
            h.insert_vib(t).map_err(|err| Error::parse(&at, err))?;
        }
        for (n, e) in file.vibc.iter().enumerate() {
            let at = format!("{location}: vibc[{n}]");
            let t = e.source.load(base, &at)?;
            if t.order() != e.order || e.order == 0 || e.order > file.lvc {
                return Err(Error::parse(
                    at,
                    format!(
                        "tensor order {} with declared order {} and Lvc {}",
                        t.order(),
                        e.order,
                        file.lvc
                    ),
                ));
            }
            h.insert_vibc(e.i, e.j, t)
                .map_err(|err| Error::parse(&at, err))?;
        }
        Ok(h)
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::parse(location, e))?;
        Self::from_model_file(file, None, location)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let location = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(&location, e))?;
        Self::from_model_file(file, path.parent(), &location)
    }

    /// Model file with every tensor inline.
    pub fn to_model_file(&self) -> ModelFile {
        let h = &self.header;
        ModelFile {
            modes: h.modes,
            orbitals: h.orbitals,
            cutoff_d: h.cutoff_d,
            omega: h.omega.clone(),
            lv: h.lv,
            lvc: h.lvc,
            vib: self
                .vib
                .iter()
                .map(|(&order, t)| VibEntry {
                    order,
                    source: TensorSource::Tensor(t.to_file()),
                })
                .collect(),
            vibc: self
                .vibc
                .iter()
                .map(|(&(order, i, j), t)| VibcEntry {
                    order,
                    i,
                    j,
                    source: TensorSource::Tensor(t.to_file()),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model_file())
            .expect("model serialization is infallible")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// SHA-256 of the inline serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
