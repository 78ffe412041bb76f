//! Executes a convergence study and records its outcome.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{Axis, ExperimentSpec, Levels, Norm};
use super::tables::{emit_tables, TableFormat};
use crate::dg::solve;
use crate::error::{Error, Result};
use crate::fem::{FemSpace, MeshKind};
use crate::frac_ops::TimeGrid;
use crate::metrics::{e1_l2l2, e2_fractional, nodal_error, observed_orders, ErrorReport};
use crate::reference::{fine_reference, ReferenceSolution};

/// Where to read and write artifacts, and how many workers to use.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory holding reference checkpoints.
    pub cache_dir: Option<PathBuf>,
    /// Directory receiving `tables/` and `records/`.
    pub output_dir: Option<PathBuf>,
    /// Worker threads for ladder levels; `0` uses the global pool.
    pub jobs: usize,
}

/// One ladder level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub h: f64,
    pub tau: f64,
    pub seconds: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub nodal: Option<f64>,
    /// Set when the level aborted.
    pub error: Option<String>,
}

impl LevelRecord {
    pub fn value(&self, norm: Norm) -> Option<f64> {
        match norm {
            Norm::E1 => self.e1,
            Norm::E2 => self.e2,
            Norm::Nodal => self.nodal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub norm: Norm,
    pub expected: f64,
    pub tolerance: f64,
    /// Mean of the last two observed orders.
    pub observed: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub checkpoint: Option<PathBuf>,
    pub tables: Vec<PathBuf>,
    pub record: Option<PathBuf>,
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: ExperimentSpec,
    pub reference_seconds: f64,
    pub total_seconds: f64,
    pub levels: Vec<LevelRecord>,
    pub report: ErrorReport,
    pub expectations: Vec<ExpectationOutcome>,
    /// `E1` strictly decreases along the ladder.
    pub e1_monotone: bool,
    pub artifacts: Artifacts,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.e1_monotone
            && self.expectations.iter().all(|e| e.passed)
            && self.levels.iter().all(|l| l.error.is_none())
    }

    /// Observed orders of `norm`, first entry `None`.
    pub fn orders(&self, norm: Norm) -> Vec<Option<f64>> {
        let values: Vec<f64> = self
            .levels
            .iter()
            .map(|l| l.value(norm).unwrap_or(f64::NAN))
            .collect();
        observed_orders(&values)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("unreadable run record: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run records serialize")
    }
}

/// Mean of the last two orders; with a two-level ladder, its only order.
pub fn asymptotic_order(orders: &[Option<f64>]) -> Option<f64> {
    match orders {
        [] | [_] => None,
        [_, only] => *only,
        [.., a, b] => Some(0.5 * ((*a)? + (*b)?)),
    }
}

fn space_for(kind: MeshKind, level: u32) -> Result<FemSpace> {
    let n = 1usize << level;
    match kind {
        MeshKind::Interval => FemSpace::interval(n),
        MeshKind::Square => FemSpace::square(n),
    }
}

fn solve_level(
    spec: &ExperimentSpec,
    reference: &ReferenceSolution,
    levels: Levels,
) -> Result<LevelRecord> {
    let start = Instant::now();
    let data = spec.data.problem(spec.alpha, spec.horizon)?;
    let space = Arc::new(space_for(spec.data.mesh_kind(), levels.h)?);
    let grid = TimeGrid::dyadic(spec.horizon, levels.tau)?;
    let u = solve(&data, &space, &grid)?;
    let mut record = LevelRecord {
        level: match spec.axis {
            Axis::H => levels.h,
            Axis::Tau => levels.tau,
        },
        h: space.mesh().h(),
        tau: grid.tau(0),
        seconds: 0.0,
        e1: None,
        e2: None,
        nodal: None,
        error: None,
    };
    for &norm in &spec.norms {
        let v = match norm {
            Norm::E1 => e1_l2l2(&u, reference)?,
            Norm::E2 => match reference {
                ReferenceSolution::Numerical(r) => e2_fractional(&u, r, spec.alpha)?,
                ReferenceSolution::Spectral(_) => {
                    return Err(Error::Domain("E2 needs a numerical reference".into()))
                }
            },
            Norm::Nodal => nodal_error(&u, reference)?,
        };
        match norm {
            Norm::E1 => record.e1 = Some(v),
            Norm::E2 => record.e2 = Some(v),
            Norm::Nodal => record.nodal = Some(v),
        }
    }
    record.seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

/// Builds (or loads) the reference, solves every ladder level and evaluates
/// the expectations; writes tables and the record when an output directory
/// is configured.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<RunRecord> {
    spec.validate()?;
    let start = Instant::now();
    let data = spec.data.problem(spec.alpha, spec.horizon)?;
    let checkpoint = match &options.cache_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.ckpt", spec.reference_key())))
        }
        None => None,
    };
    log::info!(
        "{}: reference h = 2^-{}, tau = 2^-{}",
        spec.name,
        spec.reference.h,
        spec.reference.tau
    );
    let reference: ReferenceSolution = fine_reference(
        &data,
        spec.data.mesh_kind(),
        spec.reference.h,
        spec.reference.tau,
        checkpoint.as_deref(),
    )?
    .into();
    let reference_seconds = start.elapsed().as_secs_f64();

    let run_level = |&level: &u32| -> LevelRecord {
        let levels = spec.levels_at(level);
        log::info!(
            "{}: level h = 2^-{}, tau = 2^-{}",
            spec.name,
            levels.h,
            levels.tau
        );
        solve_level(spec, &reference, levels).unwrap_or_else(|e| {
            log::error!("{}: level {level} failed: {e}", spec.name);
            LevelRecord {
                level,
                h: f64::NAN,
                tau: f64::NAN,
                seconds: 0.0,
                e1: None,
                e2: None,
                nodal: None,
                error: Some(e.to_string()),
            }
        })
    };
    let levels: Vec<LevelRecord> = if options.jobs == 0 {
        spec.ladder.par_iter().map(run_level).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(|| spec.ladder.par_iter().map(run_level).collect())
    };

    let size = |l: &LevelRecord| match spec.axis {
        Axis::H => 0.5f64.powi(l.level as i32),
        Axis::Tau => spec.horizon * 0.5f64.powi(l.level as i32),
    };
    let report = ErrorReport::from_levels(
        &levels
            .iter()
            .map(|l| (size(l), l.e1.unwrap_or(f64::NAN), l.e2, l.nodal))
            .collect::<Vec<_>>(),
    );
    let mut record = RunRecord {
        spec: spec.clone(),
        reference_seconds,
        total_seconds: 0.0,
        e1_monotone: levels
            .windows(2)
            .all(|w| matches!((w[0].e1, w[1].e1), (Some(a), Some(b)) if b < a)),
        levels,
        report,
        expectations: Vec::new(),
        artifacts: Artifacts {
            checkpoint,
            ..Artifacts::default()
        },
    };
    record.expectations = spec
        .expectations
        .iter()
        .map(|e| {
            let observed = asymptotic_order(&record.orders(e.norm));
            ExpectationOutcome {
                norm: e.norm,
                expected: e.order,
                tolerance: e.tolerance,
                observed,
                passed: observed.is_some_and(|o| e.contains(o)),
            }
        })
        .collect();
    record.total_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &options.output_dir {
        write_outputs(&mut record, dir)?;
    }
    Ok(record)
}

/// Writes `tables/<name>.{csv,md}` and `records/<name>.json` under `dir`.
pub fn write_outputs(record: &mut RunRecord, dir: &Path) -> Result<()> {
    let tables = dir.join("tables");
    let records = dir.join("records");
    fs::create_dir_all(&tables)?;
    fs::create_dir_all(&records)?;
    let name = &record.spec.name;
    let csv = tables.join(format!("{name}.csv"));
    let md = tables.join(format!("{name}.md"));
    fs::write(&csv, emit_tables(record, TableFormat::Csv))?;
    fs::write(&md, emit_tables(record, TableFormat::Markdown))?;
    let json = records.join(format!("{name}.json"));
    record.artifacts.tables = vec![csv, md];
    record.artifacts.record = Some(json.clone());
    fs::write(&json, record.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::{DataCase, Expectation};

    fn tiny(axis: Axis) -> ExperimentSpec {
        ExperimentSpec {
            name: format!("tiny-{}", axis.symbol()),
            description: String::new(),
            desk: true,
            dimension: 1,
            alpha: 0.4,
            horizon: 1.0,
            data: DataCase::PowerSource {
                x_power: -0.49,
                t_power: -0.49,
            },
            regularity: 0.0,
            axis,
            ladder: vec![2, 3, 4],
            fixed: 6,
            reference: Levels { h: 6, tau: 6 },
            norms: vec![Norm::E1, Norm::E2, Norm::Nodal],
            expectations: vec![Expectation {
                norm: Norm::E1,
                order: 1.0,
                tolerance: 5.0,
            }],
            budget_seconds: None,
        }
    }

    #[test]
    fn asymptotic_order_uses_last_two() {
        assert_eq!(
            asymptotic_order(&[None, Some(1.0), Some(2.0), Some(3.0)]),
            Some(2.5)
        );
        assert_eq!(asymptotic_order(&[None, Some(1.5)]), Some(1.5));
        assert_eq!(asymptotic_order(&[None]), None);
        assert_eq!(asymptotic_order(&[None, Some(2.0), None]), None);
    }

    #[test]
    fn tiny_run_writes_artifacts_and_reuses_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let options = RunOptions {
            cache_dir: Some(dir.path().join("cache")),
            output_dir: Some(dir.path().join("out")),
            jobs: 2,
        };
        let spec = tiny(Axis::H);
        let first = run_experiment(&spec, &options).unwrap();
        assert_eq!(first.levels.len(), 3);
        assert!(first
            .levels
            .iter()
            .all(|l| l.error.is_none() && l.e2.is_some()));
        assert!(first.e1_monotone);
        assert!(first.artifacts.checkpoint.as_ref().unwrap().exists());
        let csv = fs::read(dir.path().join("out/tables/tiny-h.csv")).unwrap();
        let second = run_experiment(&spec, &options).unwrap();
        assert_eq!(
            fs::read(dir.path().join("out/tables/tiny-h.csv")).unwrap(),
            csv
        );
        assert_eq!(first.report, second.report);
        let json = fs::read_to_string(dir.path().join("out/records/tiny-h.json")).unwrap();
        assert_eq!(RunRecord::from_json(&json).unwrap().report, second.report);
    }

    #[test]
    fn temporal_run_and_expectation_failure() {
        let mut spec = tiny(Axis::Tau);
        spec.expectations[0].order = 10.0;
        spec.expectations[0].tolerance = 0.1;
        let record = run_experiment(&spec, &RunOptions::default()).unwrap();
        assert!(!record.expectations[0].passed);
        assert!(record.expectations[0].observed.is_some());
        assert!(!record.passed());
    }
}
