//! Bit-exact binary snapshots of field states.
//!
//! Layout, little-endian throughout: magic `KGZ1` (4 bytes), format version
//! `u32`, point count `u32`, box length `f64`, time `f64`, then six `f64`
//! arrays of `n_points` entries each in the order `Re u`, `Im u`, `Re rho`,
//! `Im rho`, `v`, `n`. A file therefore holds exactly `28 + 48 n` bytes;
//! trailing data is rejected, as are unknown versions and truncations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use kgz::{FieldState, Grid};
use num_complex::Complex64;

use crate::error::{CliError, Result};

const MAGIC: [u8; 4] = *b"KGZ1";
const VERSION: u32 = 1;

pub fn write_snapshot(state: &FieldState, path: &Path) -> Result<()> {
    let grid = state.grid();
    let n = u32::try_from(grid.n()).map_err(|_| {
        CliError::Config(format!("snapshot: {} points exceed the format limit", grid.n()))
    })?;
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    write_f64s(&mut w, state.u.iter().map(|z| z.re))?;
    write_f64s(&mut w, state.u.iter().map(|z| z.im))?;
    write_f64s(&mut w, state.rho.iter().map(|z| z.re))?;
    write_f64s(&mut w, state.rho.iter().map(|z| z.im))?;
    write_f64s(&mut w, state.v.iter().copied())?;
    write_f64s(&mut w, state.n.iter().copied())?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<FieldState> {
    let file = File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path, "magic")?;
    if magic != MAGIC {
        return Err(CliError::Config(format!(
            "{}: not a KGZ snapshot (magic {:02x?})",
            path.display(),
            magic
        )));
    }
    let version = read_u32(&mut r, path, "format version")?;
    if version != VERSION {
        return Err(CliError::Config(format!(
            "{}: unknown snapshot version {version} (this build reads version {VERSION})",
            path.display()
        )));
    }
    let n = read_u32(&mut r, path, "point count")? as usize;
    let length = read_f64(&mut r, path, "box length")?;
    let t = read_f64(&mut r, path, "time")?;
    let grid =
        Grid::new(n, length).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let re_u = read_array(&mut r, n, path, "Re u")?;
    let im_u = read_array(&mut r, n, path, "Im u")?;
    let re_rho = read_array(&mut r, n, path, "Re rho")?;
    let im_rho = read_array(&mut r, n, path, "Im rho")?;
    let v = read_array(&mut r, n, path, "v")?;
    let field_n = read_array(&mut r, n, path, "n")?;

    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(CliError::Config(format!(
            "{}: trailing bytes after the final array",
            path.display()
        )));
    }

    let mut state = FieldState::zero(&grid, t);
    for j in 0..n {
        state.u[j] = Complex64::new(re_u[j], im_u[j]);
        state.rho[j] = Complex64::new(re_rho[j], im_rho[j]);
    }
    state.v = v;
    state.n = field_n;
    Ok(state)
}

fn write_f64s(w: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    for value in values {
        w.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            CliError::Config(format!(
                "{}: truncated while reading the {what}",
                path.display()
            ))
        } else {
            CliError::Config(format!("{}: {e}", path.display()))
        }
    })
}

fn read_u32(r: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, path, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read, path: &Path, what: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, path, what)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_array(r: &mut impl Read, n: usize, path: &Path, what: &str) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; 8 * n];
    read_exact(r, &mut bytes, path, what)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}
