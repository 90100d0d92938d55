//! Run configuration: a JSON document naming the family, the chain size and
//! either q-Racah parameters or explicit couplings.
//!
//! ```json
//! {
//!   "family": "qr24",
//!   "N": 4,
//!   "qracah": { "a": -1.25, "b": 1.25, "c": -2.11, "q": 0.5 },
//!   "seed": 7
//! }
//! ```
//!
//! In family mode an extra `couplings` block replaces the constructed chain
//! while the q-Racah block still supplies the analytic reference, which is
//! how a perturbed chain is checked against closed forms.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::chain::{build_chain, ChainSpec, Interval, ScanBox};
use crate::freefermion::{COSINE_TOL, ORTHOGONALITY_TOL, PRINCIPAL_ANGLE_TOL, SPECTRUM_TOL};
use crate::qracah::{ContiguityFamily, QRacahParams};
use crate::spinoracle::JW_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    Qr13,
    Qr24,
    Explicit,
}

impl FamilyChoice {
    pub fn contiguity(self) -> Option<ContiguityFamily> {
        match self {
            Self::Qr13 => Some(ContiguityFamily::Qr13),
            Self::Qr24 => Some(ContiguityFamily::Qr24),
            Self::Explicit => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRacahBlock {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlock {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub q: [f64; 2],
    pub samples: usize,
}

impl ScanBlock {
    pub fn ranges(&self) -> ScanBox {
        let iv = |r: [f64; 2]| Interval::new(r[0], r[1]);
        ScanBox { a: iv(self.a), b: iv(self.b), c: iv(self.c), q: iv(self.q) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_spectrum")]
    pub spectrum: f64,
    #[serde(default = "default_orthogonality")]
    pub orthogonality: f64,
    #[serde(default = "default_cosine")]
    pub cosine: f64,
    #[serde(default = "default_angle")]
    pub angle: f64,
    #[serde(default = "default_jw")]
    pub jw: f64,
}

fn default_spectrum() -> f64 {
    SPECTRUM_TOL
}
fn default_orthogonality() -> f64 {
    ORTHOGONALITY_TOL
}
fn default_cosine() -> f64 {
    COSINE_TOL
}
fn default_angle() -> f64 {
    PRINCIPAL_ANGLE_TOL
}
fn default_jw() -> f64 {
    JW_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: SPECTRUM_TOL,
            orthogonality: ORTHOGONALITY_TOL,
            cosine: COSINE_TOL,
            angle: PRINCIPAL_ANGLE_TOL,
            jw: JW_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyChoice,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qracah: Option<QRacahBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingBlock>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
}

/// Chain to analyse plus, in family mode, its analytic origin.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub chain: ChainSpec,
    pub reference: Option<(ContiguityFamily, QRacahParams)>,
    /// True when explicit couplings stand in for the constructed chain.
    pub overridden: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Hex SHA-256 of the canonical JSON form, after command-line overrides.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn require_n(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| CliError::Config("missing field `N`".into()))
    }

    pub fn qracah_params(&self) -> Result<QRacahParams, CliError> {
        let block = self
            .qracah
            .ok_or_else(|| CliError::Config(format!("family {:?} needs a `qracah` block", self.family)))?;
        let n = self.require_n()?;
        QRacahParams::new(block.a, block.b, block.c, n, block.q).map_err(|e| CliError::Config(format!("qracah: {e}")))
    }

    fn explicit_chain(&self) -> Result<ChainSpec, CliError> {
        let block = self.couplings.as_ref().ok_or_else(|| CliError::Config("missing `couplings` block".into()))?;
        let chain = ChainSpec::explicit(block.alpha.clone(), block.beta.clone(), block.gamma.clone())
            .map_err(|e| CliError::Config(format!("couplings: {e}")))?;
        if let Some(n) = self.n {
            if n != chain.n() {
                return Err(CliError::Config(format!(
                    "field `N` = {n} but `couplings.beta` has {} entries",
                    chain.sites()
                )));
            }
        }
        Ok(chain)
    }

    /// Build the chain named by this configuration.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        match self.family.contiguity() {
            None => {
                if self.qracah.is_some() {
                    return Err(CliError::Config(
                        "explicit mode takes `couplings` only; remove the `qracah` block or select a family".into(),
                    ));
                }
                Ok(Resolved { chain: self.explicit_chain()?, reference: None, overridden: false })
            }
            Some(family) => {
                let params = self.qracah_params()?;
                let (chain, overridden) = match &self.couplings {
                    Some(_) => (self.explicit_chain()?, true),
                    None => (build_chain(family, &params).map_err(|e| CliError::Regime(e.to_string()))?, false),
                };
                Ok(Resolved { chain, reference: Some((family, params)), overridden })
            }
        }
    }
}
