//! SDLE ensemble files: a header carrying the configuration as JSON followed
//! by one block per path (recorded states, then increments when kept).
//!
//! Layout (little endian): `b"SDLE"`, `u32` version, `u64` config length,
//! config JSON, `f64` effective step, `u64` record count, record steps as
//! `u64`, `u8` increments flag, then per path `records·d` states and
//! `steps·d` normals.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

use super::engine::{EnsembleConfig, TrajectoryEnsemble};

const MAGIC: &[u8; 4] = b"SDLE";
const VERSION: u32 = 1;

impl TrajectoryEnsemble {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let cfg = serde_json::to_vec(&self.config)?;
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u64::<LittleEndian>(cfg.len() as u64)?;
        w.write_all(&cfg)?;
        w.write_f64::<LittleEndian>(self.dt)?;
        w.write_u64::<LittleEndian>(self.record_steps.len() as u64)?;
        for &k in &self.record_steps {
            w.write_u64::<LittleEndian>(k as u64)?;
        }
        w.write_u8(self.normals.is_some() as u8)?;
        let d = self.dim();
        let states = self.record_steps.len() * d;
        let normals = self.steps() * d;
        for i in 0..self.paths() {
            for &v in &self.states[i * states..(i + 1) * states] {
                w.write_f64::<LittleEndian>(v)?;
            }
            if let Some(n) = &self.normals {
                for &v in &n[i * normals..(i + 1) * normals] {
                    w.write_f64::<LittleEndian>(v)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn write_sdle(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_sdle(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("missing SDLE magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let len = r.read_u64::<LittleEndian>()? as usize;
        let mut cfg = vec![0u8; len];
        r.read_exact(&mut cfg)?;
        let config: EnsembleConfig = serde_json::from_slice(&cfg).map_err(|e| bad(format!("bad config: {e}")))?;
        config.validate().map_err(|e| bad(e.to_string()))?;
        let dt = r.read_f64::<LittleEndian>()?;
        let nr = r.read_u64::<LittleEndian>()? as usize;
        let mut record_steps = vec![0u64; nr];
        r.read_u64_into::<LittleEndian>(&mut record_steps)?;
        let record_steps: Vec<usize> = record_steps.into_iter().map(|k| k as usize).collect();
        let has_normals = r.read_u8()? != 0;
        let d = config.dim();
        let steps = config.steps().0;
        let mut states = vec![0.0; config.paths * nr * d];
        let mut normals = has_normals.then(|| vec![0.0; config.paths * steps * d]);
        for i in 0..config.paths {
            r.read_f64_into::<LittleEndian>(&mut states[i * nr * d..(i + 1) * nr * d])
                .map_err(|e| bad(format!("truncated path {i}: {e}")))?;
            if let Some(n) = normals.as_mut() {
                r.read_f64_into::<LittleEndian>(&mut n[i * steps * d..(i + 1) * steps * d])
                    .map_err(|e| bad(format!("truncated path {i}: {e}")))?;
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(bad("trailing bytes after the last path".into()));
        }
        Ok(Self {
            config,
            dt,
            record_steps,
            states,
            normals,
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::drift::DriftField;
    use crate::sde::engine::{simulate, EnsembleConfig, TrajectoryEnsemble};

    #[test]
    fn round_trip_and_reproducible_bytes() {
        let mut cfg = EnsembleConfig::new(vec![0.0, 1.0], 0.3, 0.01, 128, 5);
        cfg.record_every = 7;
        cfg.keep_increments = true;
        let b = DriftField::ornstein_uhlenbeck(2, 1.0);
        let a = simulate(&cfg, &b).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.sdle");
        a.write_sdle(&p).unwrap();
        let back = TrajectoryEnsemble::read_sdle(&p).unwrap();
        assert_eq!(a, back);
        assert_eq!(a.to_bytes().unwrap(), simulate(&cfg, &b).unwrap().to_bytes().unwrap());
    }

    #[test]
    fn truncated_file_rejected() {
        let cfg = EnsembleConfig::new(vec![0.0], 0.1, 0.01, 100, 5);
        let a = simulate(&cfg, &DriftField::zero(1)).unwrap();
        let bytes = a.to_bytes().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.sdle");
        std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(TrajectoryEnsemble::read_sdle(&p).is_err());
    }
}
