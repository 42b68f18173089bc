//! Binary state checkpoints with bit-exact round trips.
//!
//! Layout (little endian): magic `MHD3`, version `u32`, `n` as `u64`, then
//! `L`, `time`, `mu`, `nu`, `c_v`, `kappa` as `f64`, followed by the sample
//! arrays `rho`, `u_x`, `u_y`, `u_z`, `H_x`, `H_y`, `H_z`, `theta`
//! (each `n^3` doubles, x-fastest).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::solver::{PhysicalConstants, State};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"MHD3";
const VERSION: u32 = 1;

pub fn checkpoint_save(
    state: &State,
    constants: &PhysicalConstants,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.grid().n() as u64).to_le_bytes())?;
    for v in [
        state.grid().box_length(),
        state.time,
        constants.mu,
        constants.nu,
        constants.c_v,
        constants.kappa,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut write_scalar = |f: &ScalarField| -> Result<()> {
        for &v in f.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    };
    write_scalar(&state.rho)?;
    for i in 0..3 {
        write_scalar(state.u.component(i))?;
    }
    for i in 0..3 {
        write_scalar(state.h.component(i))?;
    }
    write_scalar(&state.theta)?;
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint("truncated file".into()))?;
    Ok(f64::from_le_bytes(buf))
}

pub fn checkpoint_load(path: &Path) -> Result<(State, PhysicalConstants)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic bytes {magic:?}, not a checkpoint file"
        )));
    }
    let mut v32 = [0u8; 4];
    r.read_exact(&mut v32)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    let version = u32::from_le_bytes(v32);
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let mut n64 = [0u8; 8];
    r.read_exact(&mut n64)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    let n = u64::from_le_bytes(n64) as usize;
    let box_length = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let mu = read_f64(&mut r)?;
    let nu = read_f64(&mut r)?;
    let c_v = read_f64(&mut r)?;
    let kappa = read_f64(&mut r)?;
    let grid = Grid::new(n, box_length)
        .map_err(|e| Error::Checkpoint(format!("invalid grid in header: {e}")))?;
    let constants = PhysicalConstants::new(mu, nu, c_v, kappa)
        .map_err(|e| Error::Checkpoint(format!("invalid constants in header: {e}")))?;

    let read_scalar = |r: &mut BufReader<File>| -> Result<ScalarField> {
        let mut data = Vec::with_capacity(grid.num_points());
        for _ in 0..grid.num_points() {
            data.push(read_f64(r)?);
        }
        ScalarField::from_samples(grid, data)
    };
    let rho = read_scalar(&mut r)?;
    let ux = read_scalar(&mut r)?;
    let uy = read_scalar(&mut r)?;
    let uz = read_scalar(&mut r)?;
    let hx = read_scalar(&mut r)?;
    let hy = read_scalar(&mut r)?;
    let hz = read_scalar(&mut r)?;
    let theta = read_scalar(&mut r)?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after state".into()));
    }
    let mut u = VectorField::from_components(ux, uy, uz)?;
    u.set_solenoidal(true);
    let mut h = VectorField::from_components(hx, hy, hz)?;
    h.set_solenoidal(true);
    // no State::new here: checkpoints may legitimately carry tiny negative
    // theta from a pre-clip snapshot of a foreign producer; keep bit-exactness
    Ok((
        State {
            rho,
            u,
            h,
            theta,
            time,
        },
        constants,
    ))
}
