//! Trajectory CSV and the `BDPS` binary snapshot.
//!
//! Binary layout, little endian: magic `BDPS`, `u32` version (1), `u32`
//! dimension, one `u32` extent per axis, `u32` components, `u32` samples
//! `M`, `f64` period `T`, then `M * components * N` doubles ordered by
//! sample, component, node.

use std::path::Path;

use crate::csv_out::{finish, io, num, writer};
use crate::error::{Error, Result};
use crate::grid::{make_grid, PeriodicTrajectory};

pub const BDPS_MAGIC: &[u8; 4] = b"BDPS";
pub const BDPS_VERSION: u32 = 1;

/// Columns `t, node_index, v, z`; `z` is empty for one component.
pub fn trajectory_csv(traj: &PeriodicTrajectory) -> Result<String> {
    let n = traj.grid().node_count();
    let mut w = writer();
    w.write_record(["t", "node_index", "v", "z"]).map_err(io)?;
    for k in 0..traj.len() {
        let s = traj.sample(k);
        let t = num(traj.time(k));
        for node in 0..n {
            let z = if traj.components() > 1 { num(s[n + node]) } else { String::new() };
            w.write_record([t.clone(), node.to_string(), num(s[node]), z]).map_err(io)?;
        }
    }
    finish(w)
}

pub fn encode_bdps(traj: &PeriodicTrajectory) -> Vec<u8> {
    let g = traj.grid();
    let mut out = Vec::new();
    out.extend_from_slice(BDPS_MAGIC);
    out.extend_from_slice(&BDPS_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dimension() as u32).to_le_bytes());
    for &e in g.extents() {
        out.extend_from_slice(&(e as u32).to_le_bytes());
    }
    out.extend_from_slice(&(traj.components() as u32).to_le_bytes());
    out.extend_from_slice(&(traj.len() as u32).to_le_bytes());
    out.extend_from_slice(&traj.period().to_le_bytes());
    for s in traj.samples() {
        for v in s {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::arg("BDPS snapshot truncated"))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Inverse of [`encode_bdps`]. Domain lengths are not stored; the grid
/// is rebuilt with the given lengths.
pub fn decode_bdps(bytes: &[u8], lengths: &[f64]) -> Result<PeriodicTrajectory> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != BDPS_MAGIC {
        return Err(Error::arg("not a BDPS snapshot"));
    }
    let version = r.u32()?;
    if version != BDPS_VERSION as usize {
        return Err(Error::arg(format!("unsupported BDPS version {version}")));
    }
    let dim = r.u32()?;
    if dim != 1 && dim != 2 {
        return Err(Error::arg(format!("BDPS dimension {dim} invalid")));
    }
    let extents = (0..dim).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let components = r.u32()?;
    let m = r.u32()?;
    let period = r.f64()?;
    let grid = make_grid(dim, &extents, lengths)?;
    let len = components * grid.node_count();
    let mut samples = Vec::with_capacity(m);
    for _ in 0..m {
        samples.push((0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::arg("trailing bytes after BDPS payload"));
    }
    PeriodicTrajectory::new(&grid, period, components, samples)
}

pub(crate) fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bdps_roundtrip() {
        let g = make_grid(2, &[3, 4], &[1.0, 2.0]).unwrap();
        let traj = PeriodicTrajectory::from_fn(&g, 0.5, 2, 4, |t, x, y| vec![t + x, y - t]).unwrap();
        let bytes = encode_bdps(&traj);
        assert_eq!(&bytes[..4], b"BDPS");
        assert_eq!(bytes.len(), 4 + 4 * 6 + 8 + 4 * 2 * 12 * 8);
        let back = decode_bdps(&bytes, &[1.0, 2.0]).unwrap();
        assert_eq!(back, traj);
        assert!(decode_bdps(&bytes[..bytes.len() - 1], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = make_grid(1, &[3], &[1.0]).unwrap();
        let traj = PeriodicTrajectory::from_fn(&g, 1.0, 1, 4, |t, _, _| vec![t]).unwrap();
        let text = trajectory_csv(&traj).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "t,node_index,v,z");
        assert_eq!(lines[4], "2.5000000000000000e-1,0,2.5000000000000000e-1,");
        assert_eq!(lines.len(), 1 + 12 + 1);
    }
}
