//! Curve serialization.
//!
//! `SLC1` binary layout (all little-endian): the 4 magic bytes `SLC1`, the
//! point count `n` as `u64`, then `n` times as `f64`, then `n` points as
//! `(x, y)` pairs of `f64`. The CSV form has a `t,x,y` header and one row per
//! sample, written with shortest round-trip float formatting.

use super::Curve;
use crate::conformal::c;
use crate::error::{Result, SleError};
use std::io::{BufRead, Read, Write};
use std::path::Path;

pub const SLC1_MAGIC: &[u8; 4] = b"SLC1";

pub fn write_slc1<W: Write>(out: &mut W, curve: &Curve) -> Result<()> {
    out.write_all(SLC1_MAGIC)?;
    out.write_all(&(curve.len() as u64).to_le_bytes())?;
    for t in curve.times() {
        out.write_all(&t.to_le_bytes())?;
    }
    for p in curve.points() {
        out.write_all(&p.re.to_le_bytes())?;
        out.write_all(&p.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(inp: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    inp.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_slc1<R: Read>(inp: &mut R) -> Result<Curve> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != SLC1_MAGIC {
        return Err(SleError::Format(format!("bad curve magic {magic:?}")));
    }
    let mut nbuf = [0u8; 8];
    inp.read_exact(&mut nbuf)?;
    let n = u64::from_le_bytes(nbuf);
    if n == 0 || n > (1 << 32) {
        return Err(SleError::Format(format!("implausible point count {n}")));
    }
    let n = n as usize;
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(read_f64(inp)?);
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = read_f64(inp)?;
        let y = read_f64(inp)?;
        points.push(c(x, y));
    }
    Curve::new(times, points)
}

pub fn save_slc1(path: &Path, curve: &Curve) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_slc1(&mut f, curve)?;
    f.flush()?;
    Ok(())
}

pub fn load_slc1(path: &Path) -> Result<Curve> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_slc1(&mut f)
}

pub fn write_csv<W: Write>(out: &mut W, curve: &Curve) -> Result<()> {
    writeln!(out, "t,x,y")?;
    for (t, p) in curve.times().iter().zip(curve.points()) {
        writeln!(out, "{t:?},{:?},{:?}", p.re, p.im)?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(inp: R) -> Result<Curve> {
    let mut lines = inp.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some("t,x,y") {
        return Err(SleError::Format("missing t,x,y header".into()));
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(SleError::Format(format!("row {}: expected 3 fields", k + 1)));
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| SleError::Format(format!("row {}: {e}", k + 1)))
        };
        times.push(parse(fields[0])?);
        points.push(c(parse(fields[1])?, parse(fields[2])?));
    }
    Curve::new(times, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Curve {
        Curve::new(
            vec![0.0, 0.1, 0.30000000000000004, 1e-300 + 0.5],
            vec![c(0.0, 0.0), c(1.0 / 3.0, 2e-17), c(-7.25, 1e300), c(f64::MIN_POSITIVE, 0.1)],
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let curve = sample();
        let mut buf = Vec::new();
        write_slc1(&mut buf, &curve).unwrap();
        assert_eq!(&buf[..4], b"SLC1");
        assert_eq!(buf.len(), 4 + 8 + 4 * 24);
        let back = read_slc1(&mut buf.as_slice()).unwrap();
        assert_eq!(back, curve);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let curve = sample();
        let mut buf = Vec::new();
        write_csv(&mut buf, &curve).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, curve);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(read_slc1(&mut &b"SLC2\0\0\0\0\0\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_slc1(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_slc1(&mut buf.as_slice()).is_err());
        assert!(read_csv(&b"a,b\n1,2"[..]).is_err());
    }
}
