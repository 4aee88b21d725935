//! Actor checkpoints.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "RANT" | version u32 | algorithm u8 | dense u8 | input_dim u32 | output_dim u32
//!        | n_hidden u32 | width u32 × n_hidden | f32 parameters
//! ```
//!
//! Parameters follow layer order, each layer's weight matrix (out × in,
//! row-major, input columns `[h_{l−1} | x]`) then its bias.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Algorithm, Architecture, Mlp, Policy};

pub const MAGIC: &[u8; 4] = b"RANT";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("truncated checkpoint at byte {0}")]
    Truncated(usize),
    #[error("unknown algorithm code {0}")]
    Algorithm(u8),
    #[error("expected {expected} parameter bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("architecture mismatch: expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Human-readable architecture descriptor, used in mismatch reports.
pub fn describe(algorithm: Algorithm, arch: &Architecture) -> String {
    format!(
        "{algorithm} {}-{:?}-{} dense={}",
        arch.input_dim, arch.hidden, arch.output_dim, arch.dense
    )
}

pub fn encode(policy: &Policy) -> Vec<u8> {
    let a = &policy.actor.arch;
    let mut out = Vec::with_capacity(24 + 4 * a.hidden.len() + 4 * a.num_params);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(policy.algorithm.code());
    out.push(a.dense as u8);
    out.extend_from_slice(&(a.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&(a.output_dim as u32).to_le_bytes());
    out.extend_from_slice(&(a.hidden.len() as u32).to_le_bytes());
    for w in &a.hidden {
        out.extend_from_slice(&(*w as u32).to_le_bytes());
    }
    for p in &policy.actor.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < n {
            return Err(CheckpointError::Truncated(self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }
}

pub fn decode(bytes: &[u8]) -> Result<Policy, CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let code = r.u8()?;
    let algorithm = Algorithm::from_code(code).ok_or(CheckpointError::Algorithm(code))?;
    let dense = r.u8()? != 0;
    let input_dim = r.u32()? as usize;
    let output_dim = r.u32()? as usize;
    let n_hidden = r.u32()? as usize;
    if n_hidden > 64 {
        return Err(CheckpointError::Truncated(r.pos));
    }
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(r.u32()? as usize);
    }
    let arch = Architecture::new(input_dim, &hidden, output_dim, dense);
    let rest = &bytes[r.pos..];
    let expected = arch.num_params * 4;
    if rest.len() != expected {
        return Err(CheckpointError::Length {
            expected,
            found: rest.len(),
        });
    }
    let params = rest
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Policy {
        algorithm,
        actor: Mlp { arch, params },
    })
}

/// Write via a temporary file in the same directory and rename into place.
pub fn save(policy: &Policy, path: &Path) -> Result<(), CheckpointError> {
    write_atomic(path, &encode(policy))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Policy, CheckpointError> {
    decode(&fs::read(path)?)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Check a loaded policy against the architecture a caller expects.
pub fn check_compatible(policy: &Policy, algorithm: Algorithm, arch: &Architecture) -> Result<(), CheckpointError> {
    if policy.algorithm != algorithm || &policy.actor.arch != arch {
        return Err(CheckpointError::Mismatch {
            expected: describe(algorithm, arch),
            found: describe(policy.algorithm, &policy.actor.arch),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn sample() -> Policy {
        Policy {
            algorithm: Algorithm::Sac,
            actor: Mlp::init(Architecture::new(7, &[5, 4], 6, true), 1.0, &mut rng_for(0, 0, 0)),
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let p = sample();
        assert_eq!(decode(&encode(&p)).unwrap(), p);
    }

    #[test]
    fn header_layout() {
        let b = encode(&sample());
        assert_eq!(&b[..4], b"RANT");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(b[8], Algorithm::Sac.code());
        assert_eq!(b[9], 1);
        assert_eq!(u32::from_le_bytes(b[10..14].try_into().unwrap()), 7);
        // First tensor: layer-0 weight (5 × 7) row-major.
        let p = sample();
        let first = f32::from_le_bytes(b[30..34].try_into().unwrap());
        assert_eq!(first, p.actor.params[0]);
    }

    #[test]
    fn corrupt_inputs_error() {
        let b = encode(&sample());
        assert!(matches!(decode(b"NOPE"), Err(CheckpointError::BadMagic)));
        assert!(decode(&b[..b.len() - 1]).is_err());
        assert!(decode(&b[..10]).is_err());
        let mut v = b.clone();
        v[8] = 99;
        assert!(matches!(decode(&v), Err(CheckpointError::Algorithm(99))));
    }

    #[test]
    fn mismatch_lists_both_descriptors() {
        let p = sample();
        let other = Architecture::new(7, &[5, 5], 6, true);
        let msg = check_compatible(&p, Algorithm::Sac, &other).unwrap_err().to_string();
        assert!(msg.contains("[5, 5]") && msg.contains("[5, 4]"), "{msg}");
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actor.rant");
        save(&sample(), &path).unwrap();
        assert_eq!(load(&path).unwrap(), sample());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
