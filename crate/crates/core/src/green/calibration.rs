//! Per-κ normalization constants `c_κ` estimated from Monte Carlo content
//! moments and kept in a JSON file.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub c_kappa: f64,
    pub stderr: f64,
    pub n: usize,
    pub dt: f64,
}

/// Map `κ → CalibrationEntry`, keyed by the shortest decimal form of `κ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub entries: BTreeMap<String, CalibrationEntry>,
}

fn key(kappa: f64) -> String {
    format!("{kappa:?}")
}

impl Calibration {
    pub fn get(&self, kappa: f64) -> Option<CalibrationEntry> {
        self.entries.get(&key(kappa)).copied()
    }

    pub fn insert(&mut self, kappa: f64, entry: CalibrationEntry) -> Result<()> {
        if !(entry.c_kappa > 0.0 && entry.c_kappa.is_finite()) {
            return Err(invalid("calibration constant must be positive"));
        }
        self.entries.insert(key(kappa), entry);
        Ok(())
    }

    /// Missing files read as an empty calibration.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(s) => Ok(serde_json::from_str(&s)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    /// Write through a temporary file so readers never see a partial file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}
