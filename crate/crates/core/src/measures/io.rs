//! Ensemble serialization.
//!
//! Binary layout (little-endian): magic `SLE1`, atom count as `u64`, total
//! mass as `f64`, then per atom its weight as `f64` followed by an `SLC1`
//! curve block.

use super::PathEnsemble;
use crate::curvespace::io::{read_slc1, write_slc1};
use crate::error::{Result, SleError};
use std::io::{Read, Write};
use std::path::Path;

pub const ENSEMBLE_MAGIC: &[u8; 4] = b"SLE1";

pub fn write_ensemble<W: Write>(out: &mut W, e: &PathEnsemble) -> Result<()> {
    out.write_all(ENSEMBLE_MAGIC)?;
    out.write_all(&(e.len() as u64).to_le_bytes())?;
    out.write_all(&e.total_mass().to_le_bytes())?;
    for (w, c) in e.iter() {
        out.write_all(&w.to_le_bytes())?;
        write_slc1(out, c)?;
    }
    Ok(())
}

pub fn read_ensemble<R: Read>(inp: &mut R) -> Result<PathEnsemble> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != ENSEMBLE_MAGIC {
        return Err(SleError::Format(format!("bad ensemble magic {magic:?}")));
    }
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8);
    inp.read_exact(&mut b8)?;
    let mass = f64::from_le_bytes(b8);
    let mut e = PathEnsemble::empty();
    for _ in 0..n {
        inp.read_exact(&mut b8)?;
        e.push(f64::from_le_bytes(b8), read_slc1(inp)?)?;
    }
    if (e.total_mass() - mass).abs() > 1e-9 * mass.abs().max(1.0) {
        return Err(SleError::Format(format!("header mass {mass} but atoms sum to {}", e.total_mass())));
    }
    Ok(e)
}

pub fn save_ensemble(path: &Path, e: &PathEnsemble) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_ensemble(&mut f, e)?;
    f.flush()?;
    Ok(())
}

pub fn load_ensemble(path: &Path) -> Result<PathEnsemble> {
    read_ensemble(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One row per atom: `atom_id,weight,t_dur,n_points`.
pub fn write_summary_csv<W: Write>(out: &mut W, e: &PathEnsemble) -> Result<()> {
    writeln!(out, "atom_id,weight,t_dur,n_points")?;
    for (k, (w, c)) in e.iter().enumerate() {
        writeln!(out, "{k},{w:?},{:?},{}", c.duration(), c.len())?;
    }
    Ok(())
}
