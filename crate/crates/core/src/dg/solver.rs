use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fem::{
    dirac_approx, load_slab, FemSpace, Point, SpaceFunction, SpaceTimeFunction, SpatialVector,
    TimeFactor,
};
use crate::frac_ops::{convolution_weights, TimeGrid, WeightTable};
use crate::linalg::{axpy, pcg, BandedCholesky, CsrMatrix};

/// Relative residual every slab system must meet.
pub const SLAB_RESIDUAL_TOL: f64 = 1e-10;

/// Initial datum `u₀`.
#[derive(Debug, Clone)]
pub enum InitialData {
    Zero,
    /// Coefficients of a member of the discrete space, used as `U₀` directly.
    Coefficients(SpatialVector),
    /// Function projected onto the space in L².
    Function(SpaceFunction),
    /// Point mass at an interior point.
    Dirac(Point),
}

/// Right-hand side `f`.
#[derive(Debug, Clone)]
pub enum SourceData {
    Zero,
    Field(SpaceTimeFunction),
    /// `g(t) δ_{x₀}`.
    Dirac {
        time: TimeFactor,
        point: Point,
    },
}

/// Order, horizon and data of a subdiffusion problem.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub alpha: f64,
    pub horizon: f64,
    pub initial: InitialData,
    pub source: SourceData,
}

impl ProblemData {
    pub fn new(alpha: f64, horizon: f64, initial: InitialData, source: SourceData) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        Ok(Self {
            alpha,
            horizon,
            initial,
            source,
        })
    }
}

/// Piecewise-constant-in-time, P1-in-space discrete solution.
#[derive(Debug, Clone)]
pub struct DGSolution {
    alpha: f64,
    space: Arc<FemSpace>,
    grid: TimeGrid,
    initial: SpatialVector,
    // slab-major, J × N
    values: Vec<f64>,
}

impl DGSolution {
    pub(crate) fn from_parts(
        alpha: f64,
        space: Arc<FemSpace>,
        grid: TimeGrid,
        initial: SpatialVector,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = space.dofs();
        if initial.len() != n || values.len() != n * grid.slab_count() {
            return domain("solution storage does not match space and grid");
        }
        Ok(Self {
            alpha,
            space,
            grid,
            initial,
            values,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dofs(&self) -> usize {
        self.space.dofs()
    }

    pub fn slab_count(&self) -> usize {
        self.grid.slab_count()
    }

    /// Discrete initial datum `U₀`.
    pub fn initial(&self) -> &SpatialVector {
        &self.initial
    }

    /// `U_j`, the value on slab `j` (zero-based).
    pub fn slab(&self, j: usize) -> &[f64] {
        let n = self.dofs();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn slabs(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dofs().max(1))
    }

    pub(crate) fn raw_values(&self) -> &[f64] {
        &self.values
    }

    /// `‖U‖_{L²(0,T;L²)}`.
    pub fn l2_l2_norm(&self) -> f64 {
        (0..self.slab_count())
            .map(|j| self.grid.tau(j) * self.space.mass().quad_form(self.slab(j)))
            .sum::<f64>()
            .sqrt()
    }

    /// `max_j ‖U_j‖_{L²}`.
    pub fn max_l2(&self) -> f64 {
        self.slabs()
            .map(|u| self.space.l2_norm(u))
            .fold(0.0, f64::max)
    }

    /// The same function on a grid whose nodes contain ours.
    pub fn prolong_time(&self, finer: &TimeGrid) -> Result<DGSolution> {
        let parents = finer.coarse_parents(&self.grid).ok_or_else(|| {
            Error::Domain("target time grid does not refine the solution grid".into())
        })?;
        let mut values = Vec::with_capacity(parents.len() * self.dofs());
        for &p in &parents {
            values.extend_from_slice(self.slab(p));
        }
        Self::from_parts(
            self.alpha,
            self.space.clone(),
            finer.clone(),
            self.initial.clone(),
            values,
        )
    }

    /// P1 interpolation onto a dyadically refined space.
    pub fn prolong_space(&self, finer: &Arc<FemSpace>) -> Result<DGSolution> {
        if Arc::ptr_eq(finer, &self.space) || self.space.mesh() == finer.mesh() {
            return Self::from_parts(
                self.alpha,
                finer.clone(),
                self.grid.clone(),
                self.initial.clone(),
                self.values.clone(),
            );
        }
        let initial = finer.prolong_from(&self.space, &self.initial)?;
        let mut values = Vec::with_capacity(self.slab_count() * finer.dofs());
        for u in self.slabs() {
            values.extend_from_slice(&finer.prolong_from(&self.space, u)?);
        }
        Self::from_parts(
            self.alpha,
            finer.clone(),
            self.grid.clone(),
            initial,
            values,
        )
    }
}

/// Linear solver for the slab matrix `M + ω_{jj} A`.
enum SlabSolver {
    /// One factorization reused for every slab.
    Factored {
        matrix: CsrMatrix,
        factor: BandedCholesky,
    },
    Iterative,
}

/// Right-hand side `M U₀` of the first slab.
fn initial_load(data: &ProblemData, space: &FemSpace) -> Result<(SpatialVector, SpatialVector)> {
    match &data.initial {
        InitialData::Zero => Ok((space.zeros(), space.zeros())),
        InitialData::Coefficients(u) => {
            if u.len() != space.dofs() {
                return domain(format!(
                    "initial vector has {} entries, space has {} dofs",
                    u.len(),
                    space.dofs()
                ));
            }
            Ok((u.clone(), space.mass().mul_vec(u).into()))
        }
        InitialData::Function(f) => {
            let b = space.load(f)?;
            Ok((space.mass_solve(&b)?, b))
        }
        InitialData::Dirac(p) => {
            let b = dirac_approx(space, *p)?.load(space);
            Ok((space.mass_solve(&b)?, b))
        }
    }
}

/// Produces `F_j` slab by slab, precomputing separable spatial parts.
enum SourceLoads<'a> {
    Zero,
    Scaled {
        time: TimeFactor,
        spatial: SpatialVector,
    },
    General(&'a SpaceTimeFunction),
}

impl<'a> SourceLoads<'a> {
    fn new(source: &'a SourceData, space: &FemSpace) -> Result<Self> {
        Ok(match source {
            SourceData::Zero => Self::Zero,
            SourceData::Field(SpaceTimeFunction::Separable { time, space: w }) => Self::Scaled {
                time: *time,
                spatial: space.load(w)?,
            },
            SourceData::Field(f) => Self::General(f),
            SourceData::Dirac { time, point } => Self::Scaled {
                time: *time,
                spatial: dirac_approx(space, *point)?.load(space),
            },
        })
    }

    fn add_to(&self, space: &FemSpace, slab: (f64, f64), rhs: &mut [f64]) -> Result<()> {
        match self {
            Self::Zero => {}
            Self::Scaled { time, spatial } => axpy(time.integral(slab.0, slab.1), spatial, rhs),
            Self::General(f) => axpy(1.0, &load_slab(space, f, slab)?, rhs),
        }
        Ok(())
    }
}

/// Runs the time-stepping scheme
/// `(M + ω_{jj}A) U_j = M U_{j-1} + F_j - A Σ_{i<j} ω_{j,i} U_i`.
pub fn solve(data: &ProblemData, space: &Arc<FemSpace>, grid: &TimeGrid) -> Result<DGSolution> {
    if (grid.horizon() - data.horizon).abs() > 1e-12 * data.horizon {
        return domain(format!(
            "grid horizon {} differs from problem horizon {}",
            grid.horizon(),
            data.horizon
        ));
    }
    let weights = convolution_weights(data.alpha, grid)?;
    let n = space.dofs();
    let j_count = grid.slab_count();
    let (initial, first_load) = initial_load(data, space)?;
    let sources = SourceLoads::new(&data.source, space)?;
    let (m, a) = (space.mass(), space.stiffness());

    let solver = if weights.is_toeplitz() {
        let matrix = m.add_scaled(weights.diagonal(0), a);
        let factor = BandedCholesky::factor(&matrix)?;
        SlabSolver::Factored { matrix, factor }
    } else {
        SlabSolver::Iterative
    };

    let mut values = vec![0.0; j_count * n];
    let mut rhs = vec![0.0; n];
    let mut history = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for j in 0..j_count {
        if j == 0 {
            rhs.copy_from_slice(&first_load);
        } else {
            m.mul_vec_into(&values[(j - 1) * n..j * n], &mut rhs);
        }
        sources.add_to(space, grid.slab(j), &mut rhs)?;
        if j > 0 {
            accumulate_history(&weights, &values, n, j, &mut history);
            a.mul_vec_into(&history, &mut scratch);
            axpy(-1.0, &scratch, &mut rhs);
        }
        let (done, rest) = values.split_at_mut(j * n);
        let u = &mut rest[..n];
        match &solver {
            SlabSolver::Factored { matrix, factor } => {
                u.copy_from_slice(&rhs);
                factor.solve_in_place(u);
                check_residual(matrix, u, &rhs, &mut scratch, j)?;
            }
            SlabSolver::Iterative => {
                let matrix = m.add_scaled(weights.diagonal(j), a);
                if j > 0 {
                    u.copy_from_slice(&done[(j - 1) * n..]);
                }
                pcg(&matrix, &rhs, u, 1e-12, 20 * n + 100).map_err(|e| match e {
                    Error::Solver {
                        iterations,
                        residual,
                        context,
                    } => Error::Solver {
                        iterations,
                        residual,
                        context: format!("slab {j}: {context}"),
                    },
                    other => other,
                })?;
                check_residual(&matrix, u, &rhs, &mut scratch, j)?;
            }
        }
    }
    DGSolution::from_parts(data.alpha, space.clone(), grid.clone(), initial, values)
}

/// `history = Σ_{i<j} ω_{j,i} U_i`.
fn accumulate_history(
    weights: &WeightTable,
    values: &[f64],
    n: usize,
    j: usize,
    history: &mut [f64],
) {
    history.iter_mut().for_each(|h| *h = 0.0);
    match weights.lags() {
        Some(lags) => {
            for i in 0..j {
                axpy(lags[j - i], &values[i * n..(i + 1) * n], history);
            }
        }
        None => {
            for i in 0..j {
                axpy(weights.weight(j, i), &values[i * n..(i + 1) * n], history);
            }
        }
    }
}

fn check_residual(
    matrix: &CsrMatrix,
    u: &[f64],
    rhs: &[f64],
    scratch: &mut [f64],
    j: usize,
) -> Result<()> {
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        return Ok(());
    }
    matrix.mul_vec_into(u, scratch);
    let r = scratch
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
        / rhs_norm;
    if r <= SLAB_RESIDUAL_TOL {
        Ok(())
    } else {
        Err(Error::Solver {
            iterations: 1,
            residual: r,
            context: format!("slab {j} residual above {SLAB_RESIDUAL_TOL:e}"),
        })
    }
}
