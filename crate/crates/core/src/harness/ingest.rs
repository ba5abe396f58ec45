//! Trace archives: `SLC1` curve files with JSON sidecars.

use crate::curvespace::io::{load_slc1, save_slc1};
use crate::curvespace::Curve;
use crate::error::{Result, SleError};
use crate::loewner::CONVENTION;
use crate::measures::PathEnsemble;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Metadata stored as `<stem>.json` next to `<stem>.slc1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub kappa: f64,
    /// Capacity step of a fixed-step sampler.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Spatial step of an adaptive sampler.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub seed: u64,
    pub path: u64,
    pub convention: String,
    /// `"capacity"` or `"natural"`.
    pub parametrization: String,
    /// Atom weight when ingested; 1 when absent.
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

impl TraceSidecar {
    /// Capacity-time trace with unit weight and no step recorded.
    pub fn new(kappa: f64, seed: u64, path: u64) -> Self {
        TraceSidecar {
            kappa,
            dt: None,
            h: None,
            seed,
            path,
            convention: CONVENTION.into(),
            parametrization: "capacity".into(),
            weight: 1.0,
        }
    }

    pub fn natural(mut self) -> Self {
        self.parametrization = "natural".into();
        self
    }
}

pub fn write_trace(dir: &Path, stem: &str, curve: &Curve, sidecar: &TraceSidecar) -> Result<()> {
    save_slc1(&dir.join(format!("{stem}.slc1")), curve)?;
    std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct IngestReport {
    pub ensemble: PathEnsemble,
    /// Common κ of the ingested traces, `None` when nothing was read.
    pub kappa: Option<f64>,
    pub files: Vec<PathBuf>,
    /// Skipped files and the reason.
    pub failures: Vec<(PathBuf, String)>,
    pub warnings: Vec<String>,
}

fn read_one(path: &Path) -> Result<(Curve, TraceSidecar)> {
    let side = path.with_extension("json");
    let text = std::fs::read_to_string(&side).map_err(|e| SleError::Format(format!("sidecar {}: {e}", side.display())))?;
    let meta: TraceSidecar = serde_json::from_str(&text)?;
    if !(meta.weight > 0.0 && meta.weight.is_finite()) {
        return Err(SleError::Format(format!("weight {} is not positive", meta.weight)));
    }
    Ok((load_slc1(path)?, meta))
}

/// Read every `*.slc1` in `dir` (sorted by name). Unreadable files are
/// skipped and listed; a foreign convention tag or a second κ value is a
/// hard error.
pub fn ingest_traces(dir: &Path) -> Result<IngestReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "slc1"))
        .collect();
    paths.sort();
    let mut report =
        IngestReport { ensemble: PathEnsemble::empty(), kappa: None, files: Vec::new(), failures: Vec::new(), warnings: Vec::new() };
    if paths.is_empty() {
        let msg = format!("no SLC1 traces in {}", dir.display());
        log::warn!("{msg}");
        report.warnings.push(msg);
        return Ok(report);
    }
    for path in paths {
        let (curve, meta) = match read_one(&path) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                report.failures.push((path, e.to_string()));
                continue;
            }
        };
        if meta.convention != CONVENTION {
            return Err(SleError::Convention(format!(
                "{} uses convention {:?}, expected {CONVENTION:?}",
                path.display(),
                meta.convention
            )));
        }
        match report.kappa {
            Some(k) if k != meta.kappa => {
                return Err(SleError::Convention(format!(
                    "mixed kappa: {} has {} but earlier traces have {k}",
                    path.display(),
                    meta.kappa
                )))
            }
            _ => report.kappa = Some(meta.kappa),
        }
        report.ensemble.push(meta.weight, curve)?;
        report.files.push(path);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;

    #[test]
    fn round_trip_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ingest_traces(dir.path()).unwrap();
        assert!(empty.ensemble.is_empty() && empty.warnings.len() == 1);

        let curves: Vec<Curve> =
            (0..3).map(|k| Curve::new(vec![0.0, 0.5, 1.25], vec![c(0.0, 0.0), c(0.1 * k as f64, 1.0), c(1.0, 2.0)]).unwrap()).collect();
        for (k, cv) in curves.iter().enumerate() {
            let mut meta = TraceSidecar { h: Some(0.05), ..TraceSidecar::new(2.0, 9, k as u64) };
            meta.weight = 1.0 + k as f64;
            write_trace(dir.path(), &format!("t{k}"), cv, &meta).unwrap();
        }
        std::fs::write(dir.path().join("bad.slc1"), b"nope").unwrap();
        std::fs::write(dir.path().join("bad.json"), serde_json::to_string(&TraceSidecar::new(2.0, 9, 0)).unwrap())
            .unwrap();
        let got = ingest_traces(dir.path()).unwrap();
        assert_eq!(got.kappa, Some(2.0));
        assert_eq!(got.failures.len(), 1);
        assert_eq!(got.ensemble.curves(), &curves[..]);
        assert_eq!(got.ensemble.weights(), &[1.0, 2.0, 3.0]);

        write_trace(dir.path(), "t9", &curves[0], &TraceSidecar::new(3.0, 9, 9)).unwrap();
        assert!(matches!(ingest_traces(dir.path()), Err(SleError::Convention(_))));
        std::fs::remove_file(dir.path().join("t9.slc1")).unwrap();

        let mut foreign = TraceSidecar::new(2.0, 9, 8).natural();
        foreign.convention = "dg=2/(g-W),W=sqrt(kappa)B".into();
        write_trace(dir.path(), "t8", &curves[0], &foreign).unwrap();
        assert!(matches!(ingest_traces(dir.path()), Err(SleError::Convention(_))));
    }
}
