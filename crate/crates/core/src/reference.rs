//! Reference solutions: fine-grid numerical runs and sine-series closed forms.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::sync::Arc;

use crate::dg::{solve, DGSolution, ProblemData};
use crate::error::{domain, Result};
use crate::fem::{FemSpace, MeshKind, SpaceFunction};
use crate::frac_ops::TimeGrid;
use crate::mittag_leffler::mode_solution;
use crate::quadrature::GaussJacobi;

/// Dirichlet sine basis `φ_k = √2 sin(kπx)`, `λ_k = k²π²` on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralBasis1D {
    modes: usize,
}

impl SpectralBasis1D {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return domain("a spectral basis needs at least one mode");
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `φ_k(x)` for `k >= 1`.
    pub fn phi(&self, k: usize, x: f64) -> f64 {
        SQRT_2 * (k as f64 * PI * x).sin()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        let kp = k as f64 * PI;
        kp * kp
    }

    /// `(v, φ_k)` for `k = 1..=K`, integrated per half-wavelength with a
    /// Jacobi rule absorbing `x^p` on the first panel.
    pub fn modal_coefficients(&self, v: &SpaceFunction) -> Vec<f64> {
        let p = v.x_power();
        let plain = GaussJacobi::legendre(12);
        let singular = GaussJacobi::new(12, p, 0.0);
        (1..=self.modes)
            .map(|k| {
                let panels = 2 * k.max(4);
                let width = 1.0 / panels as f64;
                let mut sum =
                    singular.integrate(0.0, width, |x| v.smooth_part(&[x, 0.0]) * self.phi(k, x));
                for i in 1..panels {
                    let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
                    sum += plain.integrate(a, b, |x| v.eval(&[x, 0.0]) * self.phi(k, x));
                }
                sum
            })
            .collect()
    }

    /// `(φ_k, ψ_i)` against the interior hat functions of a uniform interval mesh.
    pub fn hat_loads(&self, k: usize, space: &FemSpace) -> Vec<f64> {
        let h = space.mesh().cell_size();
        let kp = k as f64 * PI;
        // ∫ sin(kπx) ψ_i = sin(kπ x_i) · 2(1 - cos kπh) / ((kπ)² h)
        let factor = SQRT_2 * 2.0 * (1.0 - (kp * h).cos()) / (kp * kp * h);
        (0..space.dofs())
            .map(|d| {
                let x = space.mesh().vertices()[space.dof_vertex(d)][0];
                factor * (kp * x).sin()
            })
            .collect()
    }
}

/// Modal coefficients `c_k E_{α,1}(-λ_k t^α)` of the solution with zero source.
pub fn spectral_f0(
    u0_modal: &[f64],
    alpha: f64,
    basis: &SpectralBasis1D,
    t: f64,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return domain(format!("time must be nonnegative, got {t}"));
    }
    u0_modal
        .iter()
        .take(basis.modes())
        .enumerate()
        .map(|(i, &c)| Ok(c * mode_solution(alpha, basis.lambda(i + 1), t)?))
        .collect()
}

/// Sine-series solution of the homogeneous problem on (0, 1).
#[derive(Debug, Clone)]
pub struct SpectralReference {
    alpha: f64,
    basis: SpectralBasis1D,
    modal: Vec<f64>,
}

impl SpectralReference {
    pub fn new(alpha: f64, basis: SpectralBasis1D, u0: &SpaceFunction) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        Ok(Self {
            alpha,
            basis,
            modal: basis.modal_coefficients(u0),
        })
    }

    pub fn from_modal(alpha: f64, basis: SpectralBasis1D, modal: Vec<f64>) -> Self {
        Self {
            alpha,
            basis,
            modal,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn basis(&self) -> &SpectralBasis1D {
        &self.basis
    }

    pub fn initial_modal(&self) -> &[f64] {
        &self.modal
    }

    pub fn modal_at(&self, t: f64) -> Result<Vec<f64>> {
        spectral_f0(&self.modal, self.alpha, &self.basis, t)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self
            .modal_at(t)?
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.basis.phi(i + 1, x))
            .sum())
    }

    /// `‖u(t)‖²_{L²}` by Parseval.
    pub fn norm_squared(&self, t: f64) -> Result<f64> {
        Ok(self.modal_at(t)?.iter().map(|c| c * c).sum())
    }
}

/// Either a fine numerical solution or a closed-form series.
#[derive(Debug, Clone)]
pub enum ReferenceSolution {
    Numerical(DGSolution),
    Spectral(SpectralReference),
}

impl From<DGSolution> for ReferenceSolution {
    fn from(u: DGSolution) -> Self {
        Self::Numerical(u)
    }
}

impl From<SpectralReference> for ReferenceSolution {
    fn from(u: SpectralReference) -> Self {
        Self::Spectral(u)
    }
}

/// Solves on `2^h_level` cells per side and `2^tau_level` slabs, reusing a
/// checkpoint at `cache` when one exists.
pub fn fine_reference(
    data: &ProblemData,
    kind: MeshKind,
    h_level: u32,
    tau_level: u32,
    cache: Option<&Path>,
) -> Result<DGSolution> {
    let n = 1usize << h_level;
    let space = Arc::new(match kind {
        MeshKind::Interval => FemSpace::interval(n)?,
        MeshKind::Square => FemSpace::square(n)?,
    });
    let grid = TimeGrid::dyadic(data.horizon, tau_level)?;
    if let Some(path) = cache {
        if path.exists() {
            match DGSolution::load(path, Some(&space)) {
                Ok(u)
                    if u.grid() == &grid
                        && u.alpha() == data.alpha
                        && Arc::ptr_eq(u.space(), &space) =>
                {
                    return Ok(u)
                }
                Ok(_) => log::warn!(
                    "checkpoint {} does not match the request; recomputing",
                    path.display()
                ),
                Err(e) => log::warn!("ignoring unreadable checkpoint {}: {e}", path.display()),
            }
        }
    }
    let u = solve(data, &space, &grid)?;
    if let Some(path) = cache {
        u.save(path)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{InitialData, SourceData};

    #[test]
    fn basis_is_orthonormal() {
        let b = SpectralBasis1D::new(4).unwrap();
        let rule = GaussJacobi::legendre(20);
        for i in 1..=4 {
            for j in 1..=4 {
                let v = rule.integrate(0.0, 1.0, |x| b.phi(i, x) * b.phi(j, x));
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert!(b.lambda(2) > b.lambda(1));
    }

    #[test]
    fn singular_modal_coefficients_match_oracle() {
        let b = SpectralBasis1D::new(37).unwrap();
        let c = b.modal_coefficients(&SpaceFunction::power_of_x(-0.49));
        // 25-digit adaptive quadrature values
        let want = [
            (1, 1.4132262697582244461),
            (2, 0.46997193019821527908),
            (3, 0.71124674452739086698),
            (10, 0.25933185607359869061),
            (37, 0.16831506188835675555),
        ];
        for (k, v) in want {
            assert!((c[k - 1] - v).abs() < 1e-10, "k={k}: {} vs {v}", c[k - 1]);
        }
    }

    #[test]
    fn spectral_values_at_zero_and_near_heat_limit() {
        let b = SpectralBasis1D::new(3).unwrap();
        let modal = [1.0, 0.5, -0.25];
        assert_eq!(spectral_f0(&modal, 0.4, &b, 0.0).unwrap(), modal.to_vec());
        let t = 0.05;
        let near = spectral_f0(&[1.0], 0.999, &b, t).unwrap()[0];
        let heat = (-PI * PI * t).exp();
        assert!((near - heat).abs() < 0.01 * heat);
    }

    #[test]
    fn parseval_matches_pointwise_quadrature() {
        let b = SpectralBasis1D::new(16).unwrap();
        let u0 = SpaceFunction::new(|x| x[0] * (1.0 - x[0]));
        let r = SpectralReference::new(0.4, b, &u0).unwrap();
        let rule = GaussJacobi::legendre(40);
        for t in [0.0, 0.1, 0.7] {
            let direct = rule.integrate(0.0, 1.0, |x| r.eval(x, t).unwrap().powi(2));
            assert!((direct - r.norm_squared(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn singular_initial_tail_is_small_only_after_time_integration() {
        // Σ_{k>K} c_k² decays like K^{-0.02}, so the L² tail of u₀ itself is
        // large; the time-integrated tail ∫_0^1 Σ_{k>K} c_k² E_k(t)² dt is not.
        let k_max = 4096;
        let b = SpectralBasis1D::new(k_max).unwrap();
        let c = b.modal_coefficients(&SpaceFunction::power_of_x(-0.49));
        let norm_sq = 1.0 / (1.0 - 0.98);
        let tail0 = norm_sq - c.iter().map(|v| v * v).sum::<f64>();
        assert!(tail0 > 1.0, "u₀ tail {tail0}");
        // with E_{α,1}(-x) ≤ Γ(1+α)/x, ∫_0^1 E_{α,1}(-λ t^α)² dt ≤ Γ(1+α)² / ((1-2α) λ²)
        let g = crate::special::gamma(1.4);
        let bound: f64 = (k_max + 1..2_000_000)
            .map(|k| {
                let lam = b.lambda(k);
                2.1 * (k as f64).powf(-1.02) * g * g / (0.2 * lam * lam)
            })
            .sum();
        assert!(bound < 1e-8, "integrated tail bound {bound}");
        for k in [100usize, 1000, 4000] {
            assert!(c[k - 1].powi(2) <= 2.1 * (k as f64).powf(-1.02));
        }
    }

    #[test]
    fn hat_loads_match_quadrature() {
        let space = FemSpace::interval(8).unwrap();
        let b = SpectralBasis1D::new(5).unwrap();
        let k = 5;
        let loads = b.hat_loads(k, &space);
        let direct = space
            .load(&SpaceFunction::new(move |x| {
                SQRT_2 * (k as f64 * PI * x[0]).sin()
            }))
            .unwrap();
        for (a, d) in loads.iter().zip(direct.iter()) {
            assert!((a - d).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_reference_is_zero_and_cached() {
        let data = ProblemData::new(0.4, 1.0, InitialData::Zero, SourceData::Zero).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.bin");
        let u = fine_reference(&data, MeshKind::Interval, 3, 3, Some(&path)).unwrap();
        assert!(u.slabs().all(|s| s.iter().all(|&v| v == 0.0)));
        assert!(path.exists());
        let again = fine_reference(&data, MeshKind::Interval, 3, 3, Some(&path)).unwrap();
        assert_eq!(again.slab_count(), 8);
    }
}
