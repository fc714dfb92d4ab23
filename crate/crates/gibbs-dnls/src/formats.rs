//! On-disk forms of coefficient vectors and ensembles.
//!
//! A coefficient vector is the JSON object `{"band": N, "re": [...], "im": [...]}`
//! with both arrays ordered `n = -N..=N`. An ensemble is a JSON Lines file with
//! one such object per sample, optionally carrying `"weight"`, next to a
//! `manifest.json` that records how the samples were drawn.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use gibbs_dnls_core::random_field::GENERATOR_NAME;
use gibbs_dnls_core::{Complex64, Ensemble, FourierCoeffs};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

pub const ENSEMBLE_FILE: &str = "ensemble.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsJson {
    pub band: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&FourierCoeffs> for CoeffsJson {
    fn from(u: &FourierCoeffs) -> Self {
        Self {
            band: u.band(),
            re: u.coeffs().iter().map(|c| c.re).collect(),
            im: u.coeffs().iter().map(|c| c.im).collect(),
        }
    }
}

impl TryFrom<CoeffsJson> for FourierCoeffs {
    type Error = HarnessError;

    fn try_from(j: CoeffsJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(HarnessError::Format {
                what: "coefficients",
                reason: format!("re has {} entries but im has {}", j.re.len(), j.im.len()),
            });
        }
        let coeffs =
            j.re.iter()
                .zip(&j.im)
                .map(|(a, b)| Complex64::new(*a, *b))
                .collect();
        FourierCoeffs::new(j.band, coeffs).map_err(|e| HarnessError::Format {
            what: "coefficients",
            reason: e.to_string(),
        })
    }
}

pub fn coeffs_to_json(u: &FourierCoeffs) -> String {
    serde_json::to_string(&CoeffsJson::from(u)).expect("finite coefficients serialize")
}

pub fn coeffs_from_json(text: &str) -> Result<FourierCoeffs> {
    serde_json::from_str::<CoeffsJson>(text)?.try_into()
}

/// One line of an ensemble file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleLine {
    pub band: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub master_seed: u64,
    pub generator: String,
    #[serde(rename = "N")]
    pub band: usize,
    pub count: usize,
}

impl Manifest {
    pub fn for_ensemble(e: &Ensemble) -> Self {
        Self {
            master_seed: e.master_seed(),
            generator: GENERATOR_NAME.to_string(),
            band: e.band(),
            count: e.len(),
        }
    }
}

pub fn ensemble_lines(e: &Ensemble) -> Vec<EnsembleLine> {
    e.samples()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let c = CoeffsJson::from(u);
            EnsembleLine {
                band: c.band,
                re: c.re,
                im: c.im,
                weight: e.weights().map(|w| w[i]),
            }
        })
        .collect()
}

/// Writes `ensemble.jsonl` and `manifest.json` into `dir`.
pub fn write_ensemble(e: &Ensemble, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(ENSEMBLE_FILE);
    let file = fs::File::create(&path).map_err(io_error(&path))?;
    let mut out = BufWriter::new(file);
    for line in ensemble_lines(e) {
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(io_error(&path))?;
    }
    out.flush().map_err(io_error(&path))?;
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&Manifest::for_ensemble(e))?;
    text.push('\n');
    fs::write(&path, text).map_err(io_error(&path))
}

/// Reads an ensemble written by [`write_ensemble`] and checks it against its
/// manifest.
pub fn read_ensemble(dir: &Path) -> Result<(Ensemble, Manifest)> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    let manifest: Manifest = serde_json::from_str(&text)?;

    let path = dir.join(ENSEMBLE_FILE);
    let file = fs::File::open(&path).map_err(io_error(&path))?;
    let mut samples = Vec::new();
    let mut weights = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_error(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let l: EnsembleLine = serde_json::from_str(&line)?;
        weights.push(l.weight);
        samples.push(FourierCoeffs::try_from(CoeffsJson {
            band: l.band,
            re: l.re,
            im: l.im,
        })?);
    }
    if samples.len() != manifest.count {
        return Err(HarnessError::Format {
            what: "ensemble",
            reason: format!(
                "manifest promises {} samples, file has {}",
                manifest.count,
                samples.len()
            ),
        });
    }
    let weights = if weights.iter().all(Option::is_some) && !weights.is_empty() {
        Some(weights.into_iter().flatten().collect())
    } else if weights.iter().all(Option::is_none) {
        None
    } else {
        return Err(HarnessError::Format {
            what: "ensemble",
            reason: "either every sample or none carries a weight".into(),
        });
    };
    let e =
        Ensemble::new(manifest.band, samples, weights, manifest.master_seed).map_err(|err| {
            HarnessError::Format {
                what: "ensemble",
                reason: err.to_string(),
            }
        })?;
    Ok((e, manifest))
}
