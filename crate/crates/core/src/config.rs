//! JSON run configuration shared by every command.
//!
//! ```json
//! {"lx": 4, "ly": 4, "dead": [[1, 2]], "protocol": "standard",
//!  "backend": "stabilizer", "seed": 7,
//!  "defects": {"meas_flip": 0.01}, "timing": {"mode": "parallel"},
//!  "output": {"path": "cluster.dot", "format": "dot"}}
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defects::{DefectError, DefectModel, TimingModel};
use crate::donor::{Backend, DonorError, DonorLattice, ProtocolKind, ProtocolStep};
use crate::pulse::TwoSpinSystem;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("unknown protocol {0:?} (expected \"standard\", \"square\" or a step list)")]
    UnknownProtocol(String),
    #[error("bad size {0:?} (expected LXxLY, e.g. 4x3)")]
    BadSize(String),
    #[error("bad site {0:?} (expected i,j)")]
    BadSite(String),
    #[error(transparent)]
    Donor(#[from] DonorError),
    #[error(transparent)]
    Defect(#[from] DefectError),
}

/// Named protocol or an explicit step list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProtocolSpec {
    Named(String),
    Steps(Vec<ProtocolStep>),
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec::Named("standard".into())
    }
}

impl ProtocolSpec {
    pub fn steps(&self) -> Result<Vec<ProtocolStep>, ConfigError> {
        match self {
            ProtocolSpec::Named(n) => Ok(parse_protocol(n)?.steps()),
            ProtocolSpec::Steps(s) => Ok(s.clone()),
        }
    }

    /// The named protocol this script matches, if any.
    pub fn kind(&self) -> Option<ProtocolKind> {
        match self {
            ProtocolSpec::Named(n) => parse_protocol(n).ok(),
            ProtocolSpec::Steps(s) => ProtocolKind::from_steps(s).ok(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProtocolSpec::Named(n) => n.clone(),
            ProtocolSpec::Steps(s) => self.kind().map_or_else(|| format!("custom ({} steps)", s.len()), |k| k.name().into()),
        }
    }
}

pub fn parse_protocol(name: &str) -> Result<ProtocolKind, ConfigError> {
    match name {
        "standard" => Ok(ProtocolKind::Standard),
        "square" => Ok(ProtocolKind::Square),
        _ => Err(ConfigError::UnknownProtocol(name.into())),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub lx: usize,
    pub ly: usize,
    pub dead: Vec<[usize; 2]>,
    pub electrons: bool,
    pub protocol: ProtocolSpec,
    pub backend: Backend,
    pub seed: u64,
    pub defects: DefectModel,
    pub timing: TimingModel,
    pub pulse: Option<TwoSpinSystem>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lx: 2,
            ly: 2,
            dead: Vec::new(),
            electrons: true,
            protocol: ProtocolSpec::default(),
            backend: Backend::Stabilizer,
            seed: 0,
            defects: DefectModel::default(),
            timing: TimingModel::default(),
            pulse: None,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates; `origin` names the source in diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.lattice()?;
        self.protocol.steps()?;
        self.defects.validate()?;
        self.timing.validate()?;
        Ok(())
    }

    /// Lattice from `lx`, `ly`, `dead` and `electrons` (defect-model dead
    /// sites are applied separately).
    pub fn lattice(&self) -> Result<DonorLattice, ConfigError> {
        let l = DonorLattice::with_dead(self.lx, self.ly, self.dead.iter().map(|&[i, j]| (i, j)))?;
        Ok(l.with_electrons(self.electrons))
    }
}

/// `"4x3"` → `(4, 3)`.
pub fn parse_size(s: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError::BadSize(s.into());
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let lx = a.trim().parse().map_err(|_| bad())?;
    let ly = b.trim().parse().map_err(|_| bad())?;
    if lx == 0 || ly == 0 {
        return Err(bad());
    }
    Ok((lx, ly))
}

/// `"1,2"` → `[1, 2]`.
pub fn parse_site(s: &str) -> Result<[usize; 2], ConfigError> {
    let bad = || ConfigError::BadSite(s.into());
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_json("{}", "x").unwrap();
        assert_eq!(c, RunConfig::default());
        let c = RunConfig::from_json(r#"{"lx":3,"ly":2,"dead":[[0,1]],"protocol":"square","backend":"statevector","seed":9}"#, "x").unwrap();
        assert_eq!(c.lattice().unwrap().live_count(), 5);
        assert_eq!(c.protocol.kind(), Some(ProtocolKind::Square));
        assert_eq!(c.backend, Backend::Statevector);
    }

    #[test]
    fn custom_steps() {
        let c = RunConfig::from_json(r#"{"protocol":[{"prepare_all_plus":"both"},"global_c_phase",{"measure_electrons":"Y"}]}"#, "x").unwrap();
        assert_eq!(c.protocol.steps().unwrap().len(), 3);
        assert_eq!(c.protocol.kind(), None);
    }

    #[test]
    fn diagnostics_carry_position() {
        let err = RunConfig::from_json("{\n  \"lx\": 3,\n  \"bogus\": 1\n}", "cfg.json").unwrap_err();
        let ConfigError::Parse { line, column, .. } = &err else { panic!("{err}") };
        assert_eq!((*line, *column), (3, 9));
        assert!(err.to_string().starts_with("cfg.json:3:9:"));
        assert!(matches!(RunConfig::from_json("{\"lx\": ", "x"), Err(ConfigError::Parse { .. })));
        assert!(matches!(RunConfig::from_json(r#"{"protocol":"hexagonal"}"#, "x"), Err(ConfigError::UnknownProtocol(_))));
        assert!(matches!(RunConfig::from_json(r#"{"defects":{"meas_flip":2}}"#, "x"), Err(ConfigError::Defect(_))));
        assert!(matches!(RunConfig::from_json(r#"{"lx":0}"#, "x"), Err(ConfigError::Donor(_))));
    }

    #[test]
    fn size_and_site_parsing() {
        assert_eq!(parse_size("100x100").unwrap(), (100, 100));
        assert!(parse_size("3").is_err());
        assert!(parse_size("0x2").is_err());
        assert_eq!(parse_site("2, 3").unwrap(), [2, 3]);
        assert!(parse_site("2").is_err());
    }
}
