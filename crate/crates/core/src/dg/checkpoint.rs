//! Binary checkpoints of discrete solutions.
//!
//! Layout, all numbers little-endian `f64`:
//!
//! | offset | content                                  |
//! |--------|------------------------------------------|
//! | 0      | magic `b"SUBDIFF1"` (8 bytes)            |
//! | 8      | `α`, `T`, `J`, `N`, `d`                  |
//! | 48     | `U₀` (`N` values)                        |
//! | ...    | `U_1, ..., U_J` (`J × N` values, slab-major) |
//!
//! The time grid is uniform with `J` slabs on `[0, T]`; the mesh is the
//! structured unit interval (`d = 1`, `N + 1` cells) or unit square
//! (`d = 2`, `√N + 1` cells per side).

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::DGSolution;
use crate::error::{Error, Result};
use crate::fem::{FemSpace, MeshKind};
use crate::frac_ops::TimeGrid;

const MAGIC: &[u8; 8] = b"SUBDIFF1";

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl DGSolution {
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        if !self.grid().is_uniform() {
            return Err(bad("only uniform time grids can be checkpointed"));
        }
        let d = self.space().mesh().dim();
        let header = [
            self.alpha(),
            self.grid().horizon(),
            self.slab_count() as f64,
            self.dofs() as f64,
            d as f64,
        ];
        w.write_all(MAGIC)?;
        for v in header
            .iter()
            .chain(self.initial().iter())
            .chain(self.raw_values())
        {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a checkpoint; `space` is reused when it matches the header.
    pub fn read_checkpoint<R: Read>(mut r: R, space: Option<&Arc<FemSpace>>) -> Result<DGSolution> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("not a solution checkpoint"));
        }
        let mut next = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)
                .map_err(|_| bad("truncated checkpoint"))?;
            Ok(f64::from_le_bytes(b))
        };
        let alpha = next()?;
        let horizon = next()?;
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v.fract() == 0.0 && (0.0..1e12).contains(&v) {
                Ok(v as usize)
            } else {
                Err(bad(format!("invalid {what} {v}")))
            }
        };
        let j = as_count(next()?, "slab count")?;
        let n = as_count(next()?, "dof count")?;
        let d = as_count(next()?, "dimension")?;
        let space = match space {
            Some(s) if s.dofs() == n && s.mesh().dim() == d => s.clone(),
            _ => Arc::new(match d {
                1 => FemSpace::interval(n + 1)?,
                2 => {
                    let side = (n as f64).sqrt().round() as usize;
                    if side * side != n {
                        return Err(bad(format!("{n} dofs do not form a square mesh")));
                    }
                    FemSpace::square(side + 1)?
                }
                _ => return Err(bad(format!("unsupported dimension {d}"))),
            }),
        };
        debug_assert!(matches!(
            space.mesh().kind(),
            MeshKind::Interval | MeshKind::Square
        ));
        let grid = TimeGrid::uniform(horizon, j).map_err(|e| bad(e.to_string()))?;
        let initial: Vec<f64> = (0..n).map(|_| next()).collect::<Result<_>>()?;
        let values: Vec<f64> = (0..j * n).map(|_| next()).collect::<Result<_>>()?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(bad("trailing bytes after slab data"));
        }
        DGSolution::from_parts(alpha, space, grid, initial.into(), values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        // write then rename so readers never see a partial file
        let tmp = path.with_extension("partial");
        self.write_checkpoint(BufWriter::new(fs::File::create(&tmp)?))?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, space: Option<&Arc<FemSpace>>) -> Result<DGSolution> {
        Self::read_checkpoint(BufReader::new(fs::File::open(path)?), space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{solve, InitialData, ProblemData, SourceData};
    use crate::fem::SpaceFunction;

    fn sample(space: FemSpace) -> DGSolution {
        let space = Arc::new(space);
        let grid = TimeGrid::uniform(1.0, 5).unwrap();
        let f = SpaceFunction::new(|x| x[0] * (1.0 - x[0]) * (1.0 + x[1]));
        let data = ProblemData::new(0.4, 1.0, InitialData::Function(f), SourceData::Zero).unwrap();
        solve(&data, &space, &grid).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        for space in [FemSpace::interval(8).unwrap(), FemSpace::square(4).unwrap()] {
            let u = sample(space);
            let mut buf = Vec::new();
            u.write_checkpoint(&mut buf).unwrap();
            assert_eq!(buf.len(), 8 + 8 * (5 + u.dofs() * (1 + u.slab_count())));
            let v = DGSolution::read_checkpoint(&buf[..], None).unwrap();
            assert_eq!(v.raw_values(), u.raw_values());
            assert_eq!(&v.initial()[..], &u.initial()[..]);
            assert_eq!(v.alpha(), u.alpha());
            assert_eq!(v.space().mesh(), u.space().mesh());
        }
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let u = sample(FemSpace::interval(4).unwrap());
        let mut buf = Vec::new();
        u.write_checkpoint(&mut buf).unwrap();
        assert!(matches!(
            DGSolution::read_checkpoint(&buf[..buf.len() - 3], None),
            Err(Error::Checkpoint(_))
        ));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(DGSolution::read_checkpoint(&extra[..], None).is_err());
        buf[0] = b'X';
        assert!(DGSolution::read_checkpoint(&buf[..], None).is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/u.bin");
        let u = sample(FemSpace::interval(8).unwrap());
        u.save(&path).unwrap();
        let v = DGSolution::load(&path, Some(u.space())).unwrap();
        assert!(Arc::ptr_eq(v.space(), u.space()));
        assert_eq!(v.raw_values(), u.raw_values());
    }
}
