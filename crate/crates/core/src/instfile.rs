//! Self-describing single-file instance format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic  "QRECINST"
//! 8       2     version (u16) = 1
//! 10      1     kind: 0 quadratic | 1 phase-retrieval | 2 binary
//! 11      1     mode: 0 streamed | 1 materialized
//! 12      1     noise: 0 none | 1 gaussian | 2 laplace
//! 13      3     reserved (zero)
//! 16      8     n (u64)
//! 24      8     k (u64)
//! 32      8     m (u64)
//! 40      8     k' (u64; 0 unless kind = binary)
//! 48      8     mu0 target (f64; 0 for binary)
//! 56      8     sigma (f64)
//! 64      8     seed (u64)
//! ```
//!
//! Streamed files end after the 72-byte header: every quantity is
//! regenerated from the seed. Materialized files append the raw ensemble
//! entries as f64 little-endian words: m·n·n matrix entries (row-major per
//! measurement) for the quadratic and binary kinds, m·n vector entries for
//! phase retrieval. Measurements are recomputed on load from the stored
//! entries and the seed-derived ground truth and noise, so a round trip
//! reproduces `b` bit for bit.

use crate::error::Error;
use crate::pr::PRInstance;
use crate::sensing::{BinaryInstance, NoiseKind, ProblemInstance, SensingEnsemble, StorageMode};
use crate::Result;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"QRECINST";
const VERSION: u16 = 1;

/// What a file contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Quadratic,
    PhaseRetrieval,
    Binary,
}

impl InstanceKind {
    fn code(self) -> u8 {
        match self {
            InstanceKind::Quadratic => 0,
            InstanceKind::PhaseRetrieval => 1,
            InstanceKind::Binary => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(InstanceKind::Quadratic),
            1 => Ok(InstanceKind::PhaseRetrieval),
            2 => Ok(InstanceKind::Binary),
            other => Err(Error::Format(format!("unknown instance kind {other}"))),
        }
    }
}

/// A loaded instance of any kind.
#[derive(Clone, Debug)]
pub enum LoadedInstance {
    Quadratic(ProblemInstance),
    PhaseRetrieval(PRInstance),
    Binary(BinaryInstance),
}

struct Header {
    kind: InstanceKind,
    mode: StorageMode,
    noise: NoiseKind,
    n: usize,
    k: usize,
    m: usize,
    kprime: usize,
    mu0_target: f64,
    sigma: f64,
    seed: u64,
}

fn noise_code(kind: NoiseKind) -> u8 {
    match kind {
        NoiseKind::None => 0,
        NoiseKind::Gaussian => 1,
        NoiseKind::Laplace => 2,
    }
}

fn noise_from_code(c: u8) -> Result<NoiseKind> {
    match c {
        0 => Ok(NoiseKind::None),
        1 => Ok(NoiseKind::Gaussian),
        2 => Ok(NoiseKind::Laplace),
        other => Err(Error::Format(format!("unknown noise kind {other}"))),
    }
}

fn write_header(out: &mut impl Write, h: &Header) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[
        h.kind.code(),
        match h.mode {
            StorageMode::Streamed => 0,
            StorageMode::Materialized => 1,
        },
        noise_code(h.noise),
        0,
        0,
        0,
    ])?;
    for v in [h.n as u64, h.k as u64, h.m as u64, h.kprime as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&h.mu0_target.to_le_bytes())?;
    out.write_all(&h.sigma.to_le_bytes())?;
    out.write_all(&h.seed.to_le_bytes())?;
    Ok(())
}

fn read_header(input: &mut impl Read) -> Result<Header> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut v = [0u8; 2];
    input.read_exact(&mut v)?;
    let version = u16::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut tags = [0u8; 6];
    input.read_exact(&mut tags)?;
    let kind = InstanceKind::from_code(tags[0])?;
    let mode = match tags[1] {
        0 => StorageMode::Streamed,
        1 => StorageMode::Materialized,
        other => return Err(Error::Format(format!("unknown storage mode {other}"))),
    };
    let noise = noise_from_code(tags[2])?;
    let mut u = [0u8; 8];
    let mut next_u64 = |input: &mut dyn Read| -> Result<u64> {
        input.read_exact(&mut u)?;
        Ok(u64::from_le_bytes(u))
    };
    let n = next_u64(input)? as usize;
    let k = next_u64(input)? as usize;
    let m = next_u64(input)? as usize;
    let kprime = next_u64(input)? as usize;
    let mut f = [0u8; 8];
    input.read_exact(&mut f)?;
    let mu0_target = f64::from_le_bytes(f);
    input.read_exact(&mut f)?;
    let sigma = f64::from_le_bytes(f);
    input.read_exact(&mut f)?;
    let seed = u64::from_le_bytes(f);
    Ok(Header {
        kind,
        mode,
        noise,
        n,
        k,
        m,
        kprime,
        mu0_target,
        sigma,
        seed,
    })
}

fn write_entries(out: &mut impl Write, entries: &[f64]) -> Result<()> {
    // Chunked writes keep the buffer bounded for large ensembles.
    let mut buf = Vec::with_capacity(8 * 8192);
    for chunk in entries.chunks(8192) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_entries(input: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; 8 * 8192];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(8192);
        let bytes = &mut buf[..8 * take];
        input.read_exact(bytes)?;
        for w in bytes.chunks_exact(8) {
            out.push(f64::from_le_bytes(w.try_into().expect("8-byte chunk")));
        }
        remaining -= take;
    }
    Ok(out)
}

/// Write a quadratic instance.
pub fn save_instance(path: &Path, instance: &ProblemInstance) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_header(
        &mut out,
        &Header {
            kind: InstanceKind::Quadratic,
            mode: instance.ensemble.mode(),
            noise: instance.noise_kind,
            n: instance.n,
            k: instance.k,
            m: instance.m,
            kprime: 0,
            mu0_target: instance.mu0_target,
            sigma: instance.sigma,
            seed: instance.seed,
        },
    )?;
    if let Some(entries) = instance.ensemble.raw_entries() {
        write_entries(&mut out, entries)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a phase-retrieval instance.
pub fn save_pr_instance(path: &Path, instance: &PRInstance) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_header(
        &mut out,
        &Header {
            kind: InstanceKind::PhaseRetrieval,
            mode: instance.mode(),
            noise: instance.noise_kind,
            n: instance.n,
            k: instance.k,
            m: instance.m,
            kprime: 0,
            mu0_target: instance.mu0_target,
            sigma: instance.sigma,
            seed: instance.seed,
        },
    )?;
    if let Some(entries) = instance.raw_entries() {
        write_entries(&mut out, entries)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a binary instance.
pub fn save_binary_instance(path: &Path, instance: &BinaryInstance) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_header(
        &mut out,
        &Header {
            kind: InstanceKind::Binary,
            mode: instance.ensemble.mode(),
            noise: instance.noise_kind,
            n: instance.n,
            k: instance.k,
            m: instance.m,
            kprime: instance.kprime,
            mu0_target: 0.0,
            sigma: instance.sigma,
            seed: instance.seed,
        },
    )?;
    if let Some(entries) = instance.ensemble.raw_entries() {
        write_entries(&mut out, entries)?;
    }
    out.flush()?;
    Ok(())
}

/// Load any instance file.
pub fn load_instance(path: &Path) -> Result<LoadedInstance> {
    let file = std::fs::File::open(path)?;
    let mut input = std::io::BufReader::new(file);
    let h = read_header(&mut input)?;
    match h.kind {
        InstanceKind::Quadratic => {
            let ensemble = match h.mode {
                StorageMode::Streamed => {
                    SensingEnsemble::new(h.n, h.m, h.seed, StorageMode::Streamed)?
                }
                StorageMode::Materialized => {
                    let entries = read_entries(&mut input, h.m * h.n * h.n)?;
                    SensingEnsemble::from_entries(h.n, h.m, h.seed, entries)?
                }
            };
            let instance = crate::sensing::assemble_instance(
                h.n,
                h.k,
                h.m,
                h.mu0_target,
                h.sigma,
                h.noise,
                h.seed,
                ensemble,
            )?;
            Ok(LoadedInstance::Quadratic(instance))
        }
        InstanceKind::PhaseRetrieval => {
            let vectors = match h.mode {
                StorageMode::Streamed => {
                    crate::sensing::GaussianTable::new(h.m, h.n, h.seed, StorageMode::Streamed)?
                }
                StorageMode::Materialized => {
                    let entries = read_entries(&mut input, h.m * h.n)?;
                    crate::sensing::GaussianTable::from_entries(h.m, h.n, h.seed, entries)?
                }
            };
            let instance = crate::pr::assemble_pr_instance(
                h.n,
                h.k,
                h.m,
                h.mu0_target,
                h.sigma,
                h.noise,
                h.seed,
                vectors,
            )?;
            Ok(LoadedInstance::PhaseRetrieval(instance))
        }
        InstanceKind::Binary => {
            let ensemble = match h.mode {
                StorageMode::Streamed => {
                    SensingEnsemble::new(h.n, h.m, h.seed, StorageMode::Streamed)?
                }
                StorageMode::Materialized => {
                    let entries = read_entries(&mut input, h.m * h.n * h.n)?;
                    SensingEnsemble::from_entries(h.n, h.m, h.seed, entries)?
                }
            };
            let instance = crate::sensing::assemble_binary_instance(
                h.n,
                h.k,
                h.kprime,
                h.m,
                h.sigma,
                h.noise,
                h.seed,
                ensemble,
            )?;
            Ok(LoadedInstance::Binary(instance))
        }
    }
}
