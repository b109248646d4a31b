//! Binary checkpoints: an 8-byte magic, `u32` version, `u64` grid size and
//! `f64` box length, then the five spectra `u¹, u², τ¹¹, τ¹², τ²²` as
//! row-major `(re, im)` pairs, all little-endian. A JSON sidecar
//! (`<file>.json`) carries params, time and the config hash.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{SimState, COMPONENTS};
use crate::spectral::{Grid, PhysParams, SpectralVectorField, SymmetricTensorField};

pub const MAGIC: &[u8; 8] = b"OBLABCKP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub n: usize,
    pub length: f64,
    pub t: f64,
    pub params: PhysParams,
    pub config_hash: String,
    pub components: Vec<String>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(state: &SimState) -> Vec<u8> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(28 + COMPONENTS * grid.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.length().to_le_bytes());
    for comp in state.components() {
        for c in comp {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    buf
}

/// Decodes the binary part into a grid and the five spectra.
pub fn decode(bytes: &[u8]) -> Result<(Grid, [Vec<C64>; COMPONENTS])> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 28 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic header"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let grid = Grid::new(n, length).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let expected = 28 + COMPONENTS * grid.len() * 16;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let mut vals = bytes[28..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    let comps = std::array::from_fn(|_| {
        (0..grid.len())
            .map(|_| {
                let re = vals.next().unwrap();
                let im = vals.next().unwrap();
                C64::new(re, im)
            })
            .collect()
    });
    Ok((grid, comps))
}

/// Writes `path` and its sidecar.
pub fn write(path: &Path, state: &SimState, config_hash: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(state))?;
    let grid = state.grid();
    let side = Sidecar {
        n: grid.n(),
        length: grid.length(),
        t: state.t,
        params: state.params,
        config_hash: config_hash.to_string(),
        components: ["u1", "u2", "tau11", "tau12", "tau22"].map(String::from).to_vec(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Reads a checkpoint and its sidecar back into a state.
pub fn read(path: &Path) -> Result<(SimState, Sidecar)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let (grid, comps) = decode(&bytes)?;
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if side.n != grid.n() || side.length != grid.length() {
        return Err(Error::Checkpoint("sidecar grid does not match binary header".into()));
    }
    side.params.validate()?;
    let [a, b, c, d, e] = comps;
    let state = SimState {
        u: SpectralVectorField { grid, comps: [a, b] },
        tau: SymmetricTensorField { grid, comps: [c, d, e] },
        t: side.t,
        params: side.params,
    };
    Ok((state, side))
}
