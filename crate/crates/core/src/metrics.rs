//! Error norms against reference solutions, time interpolants and observed orders.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dg::DGSolution;
use crate::error::{domain, Error, Result};
use crate::fem::{FemSpace, MeshKind};
use crate::frac_ops::{ScalarStepFunction, TimeGrid};
use crate::quadrature::GaussJacobi;
use crate::reference::{ReferenceSolution, SpectralReference};
use crate::special::gamma;

/// Quadrature nodes per slab for the fractional norm.
const E2_POINTS: usize = 12;
/// Gauss points per slab when integrating against a closed-form reference.
const SPECTRAL_TIME_POINTS: usize = 8;

/// Coarse solution restricted to the reference's space and grid.
struct Aligned<'a> {
    reference: &'a DGSolution,
    coarse: DGSolution,
    parents: Vec<usize>,
}

impl<'a> Aligned<'a> {
    fn new(u: &DGSolution, reference: &'a DGSolution) -> Result<Self> {
        let parents = reference.grid().coarse_parents(u.grid()).ok_or_else(|| {
            Error::Domain("reference time grid does not refine the solution grid".into())
        })?;
        let coarse = u.prolong_space(reference.space())?;
        Ok(Self {
            reference,
            coarse,
            parents,
        })
    }

    /// `e_l = ũ_l - U_{parent(l)}` on fine slab `l`.
    fn difference_into(&self, l: usize, out: &mut [f64]) {
        let r = self.reference.slab(l);
        let c = self.coarse.slab(self.parents[l]);
        for ((o, a), b) in out.iter_mut().zip(r).zip(c) {
            *o = a - b;
        }
    }
}

/// `‖ũ - U‖_{L²(0,T;L²(Ω))}`.
pub fn e1_l2l2(u: &DGSolution, reference: &ReferenceSolution) -> Result<f64> {
    match reference {
        ReferenceSolution::Numerical(r) => {
            let al = Aligned::new(u, r)?;
            let mass = r.space().mass();
            let mut e = vec![0.0; r.dofs()];
            let mut total = 0.0;
            for l in 0..r.slab_count() {
                al.difference_into(l, &mut e);
                total += r.grid().tau(l) * mass.quad_form(&e);
            }
            Ok(total.sqrt())
        }
        ReferenceSolution::Spectral(s) => {
            let pairing = SpectralPairing::new(u, s)?;
            let rule = GaussJacobi::legendre(SPECTRAL_TIME_POINTS);
            let mut total = 0.0;
            for j in 0..u.slab_count() {
                let (a, b) = u.grid().slab(j);
                for (t, w) in rule.mapped(a, b) {
                    total += w * pairing.squared_distance(j, t)?;
                }
            }
            Ok(total.max(0.0).sqrt())
        }
    }
}

/// `max_j ‖ũ(t_j) - U_j^-‖_{L²(Ω)}` over the nodes of `u`'s grid.
pub fn nodal_error(u: &DGSolution, reference: &ReferenceSolution) -> Result<f64> {
    match reference {
        ReferenceSolution::Numerical(r) => {
            let al = Aligned::new(u, r)?;
            let mut e = vec![0.0; r.dofs()];
            let mut worst = 0.0f64;
            // fine slab ending at each coarse node
            for l in 0..r.slab_count() {
                let last = l + 1 == r.slab_count() || al.parents[l + 1] != al.parents[l];
                if last {
                    al.difference_into(l, &mut e);
                    worst = worst.max(r.space().l2_norm(&e));
                }
            }
            Ok(worst)
        }
        ReferenceSolution::Spectral(s) => {
            let pairing = SpectralPairing::new(u, s)?;
            let mut worst = 0.0f64;
            for j in 0..u.slab_count() {
                let t = u.grid().nodes()[j + 1];
                worst = worst.max(pairing.squared_distance(j, t)?.max(0.0).sqrt());
            }
            Ok(worst)
        }
    }
}

/// Inner products of each slab value with the sine modes.
struct SpectralPairing<'a> {
    reference: &'a SpectralReference,
    // per slab: (φ_k, U_j) for every mode, then ‖U_j‖²
    modal: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl<'a> SpectralPairing<'a> {
    fn new(u: &DGSolution, reference: &'a SpectralReference) -> Result<Self> {
        let space = u.space();
        if space.mesh().kind() != MeshKind::Interval {
            return domain("sine-series references live on the unit interval");
        }
        let basis = reference.basis();
        let loads: Vec<Vec<f64>> = (1..=basis.modes())
            .map(|k| basis.hat_loads(k, space))
            .collect();
        let modal = u
            .slabs()
            .map(|s| {
                loads
                    .iter()
                    .map(|b| b.iter().zip(s).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect();
        let norms = u.slabs().map(|s| space.mass().quad_form(s)).collect();
        Ok(Self {
            reference,
            modal,
            norms,
        })
    }

    fn squared_distance(&self, j: usize, t: f64) -> Result<f64> {
        let c = self.reference.modal_at(t)?;
        let own: f64 = c.iter().map(|v| v * v).sum();
        let cross: f64 = c.iter().zip(&self.modal[j]).map(|(a, b)| a * b).sum();
        Ok(own - 2.0 * cross + self.norms[j])
    }
}

type ElementGradients = (Vec<Option<usize>>, [[f64; 2]; 3]);

/// Element-gradient features: `Σ_f feature_f(v)² = vᵀ A v`.
struct GradientMap {
    // per element: vertex dofs and sqrt(|K|)·∇λ_a
    elements: Vec<ElementGradients>,
    components: usize,
}

impl GradientMap {
    fn new(space: &FemSpace) -> Self {
        let mesh = space.mesh();
        let elements = (0..mesh.element_count())
            .map(|e| {
                let (meas, g) = space.element_gradients(e);
                let s = meas.sqrt();
                let dofs = mesh
                    .element(e)
                    .iter()
                    .map(|&v| space.vertex_dof(v))
                    .collect();
                (dofs, g.map(|row| [s * row[0], s * row[1]]))
            })
            .collect();
        Self {
            elements,
            components: mesh.dim(),
        }
    }

    fn len(&self) -> usize {
        self.elements.len() * self.components
    }

    fn feature(&self, f: usize, v: &[f64]) -> f64 {
        let (dofs, g) = &self.elements[f / self.components];
        let r = f % self.components;
        dofs.iter()
            .zip(g)
            .map(|(d, gr)| d.map_or(0.0, |k| gr[r] * v[k]))
            .sum()
    }
}

/// Quadrature data shared by all feature series.
struct FractionalRule {
    gamma: f64,
    inv_gamma: f64,
    jacobi: Vec<(f64, f64)>,
    legendre: Vec<(f64, f64)>,
}

impl FractionalRule {
    fn new(gamma_order: f64) -> Self {
        let on_unit = |rule: GaussJacobi| rule.mapped(0.0, 1.0).collect::<Vec<_>>();
        Self {
            gamma: gamma_order,
            inv_gamma: 1.0 / gamma(1.0 - gamma_order),
            jacobi: on_unit(GaussJacobi::new(E2_POINTS, -gamma_order, 0.0)),
            legendre: on_unit(GaussJacobi::legendre(E2_POINTS)),
        }
    }

    /// `∫_0^T |D^γ v|²` for the step function with jumps `d` on `grid`.
    ///
    /// On slab `l`, `D^γ v = c d_l s^{-γ} + R_l(s)` with `R_l` smooth; the
    /// square splits into an exact power integral, a Jacobi-weighted cross
    /// term and a Legendre-integrated remainder.
    fn squared_norm(&self, grid: &TimeGrid, d: &[f64]) -> f64 {
        let j = d.len();
        let g = self.gamma;
        let c = self.inv_gamma;
        let mut total = 0.0;
        for l in 0..j {
            let tau = grid.tau(l);
            total += c * c * d[l] * d[l] * tau.powf(1.0 - 2.0 * g) / (1.0 - 2.0 * g);
        }
        let t = grid.nodes();
        let remainders = |nodes: &[(f64, f64)], k: usize| -> Vec<f64> {
            (0..j)
                .map(|l| {
                    let s = t[l] + nodes[k].0 * grid.tau(l);
                    c * (0..l).map(|i| d[i] * (s - t[i]).powf(-g)).sum::<f64>()
                })
                .collect()
        };
        for k in 0..E2_POINTS {
            let r = remainders(&self.jacobi, k);
            let w = self.jacobi[k].1;
            for l in 0..j {
                // Jacobi weight s^{-γ} on [0, τ_l] scales as τ_l^{1-γ}
                total += 2.0 * c * d[l] * w * grid.tau(l).powf(1.0 - g) * r[l];
            }
        }
        for k in 0..E2_POINTS {
            let r = remainders(&self.legendre, k);
            let w = self.legendre[k].1;
            for l in 0..j {
                total += w * grid.tau(l) * r[l] * r[l];
            }
        }
        total
    }
}

/// Spectra of the lag kernels `c (mτ + s_k τ)^{-γ}`, `m >= 1`, for uniform grids.
struct FftKernels {
    tau: f64,
    len: usize,
    kernels: Vec<Vec<Complex<f64>>>,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl FftKernels {
    fn new(rule: &FractionalRule, tau: f64, slabs: usize) -> Self {
        let len = (2 * slabs).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let kernels = rule
            .jacobi
            .iter()
            .chain(&rule.legendre)
            .map(|&(s, _)| {
                let mut buf = vec![Complex::new(0.0, 0.0); len];
                for (m, b) in buf.iter_mut().enumerate().take(slabs).skip(1) {
                    b.re = rule.inv_gamma * ((m as f64 + s) * tau).powf(-rule.gamma);
                }
                forward.process(&mut buf);
                buf
            })
            .collect();
        Self {
            tau,
            len,
            kernels,
            forward,
            inverse,
        }
    }
}

/// `E₂ = ‖D_{0+}^{(1-α)/2}(ũ - U)‖_{L²(0,T;Ḣ¹(Ω))}` against a fine numerical reference.
pub fn e2_fractional(u: &DGSolution, reference: &DGSolution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let al = Aligned::new(u, reference)?;
    let j = reference.slab_count();
    let n = reference.dofs();
    let mut e = vec![0.0; j * n];
    for l in 0..j {
        al.difference_into(l, &mut e[l * n..(l + 1) * n]);
    }
    Ok(fractional_energy(reference.space(), reference.grid(), &e, alpha)?.sqrt())
}

/// `∫_0^T |D^γ e|²_{Ḣ¹}` for the slab-major step function `e`, `γ = (1-α)/2`.
pub(crate) fn fractional_energy(
    space: &FemSpace,
    grid: &TimeGrid,
    e: &[f64],
    alpha: f64,
) -> Result<f64> {
    let gamma_order = 0.5 * (1.0 - alpha);
    let rule = FractionalRule::new(gamma_order);
    let map = GradientMap::new(space);
    let j = grid.slab_count();
    let n = space.dofs();
    if e.len() != j * n {
        return domain("error storage does not match space and grid");
    }
    let fft = grid
        .is_uniform()
        .then(|| FftKernels::new(&rule, grid.tau(0), j));
    let parts: Vec<f64> = (0..map.len())
        .into_par_iter()
        .map(|f| {
            let mut prev = 0.0;
            let jumps: Vec<f64> = (0..j)
                .map(|l| {
                    let v = map.feature(f, &e[l * n..(l + 1) * n]);
                    let d = v - prev;
                    prev = v;
                    d
                })
                .collect();
            if jumps.iter().all(|&d| d == 0.0) {
                return 0.0;
            }
            match &fft {
                Some(k) => squared_norm_fft(&rule, &jumps, k),
                None => rule.squared_norm(grid, &jumps),
            }
        })
        .collect();
    Ok(parts.iter().sum::<f64>().max(0.0))
}

/// Uniform-grid variant of [`FractionalRule::squared_norm`] with FFT convolutions.
fn squared_norm_fft(rule: &FractionalRule, d: &[f64], k: &FftKernels) -> f64 {
    let j = d.len();
    let g = rule.gamma;
    let c = rule.inv_gamma;
    let tau = k.tau;
    let mut total = 0.0;
    let power = c * c * tau.powf(1.0 - 2.0 * g) / (1.0 - 2.0 * g);
    for &dl in d {
        total += power * dl * dl;
    }
    let mut spectrum: Vec<Complex<f64>> = (0..k.len)
        .map(|i| Complex::new(if i < j { d[i] } else { 0.0 }, 0.0))
        .collect();
    k.forward.process(&mut spectrum);
    let scale = 1.0 / k.len as f64;
    let mut buf = vec![Complex::new(0.0, 0.0); k.len];
    let mut remainder = |idx: usize| {
        for ((b, s), kk) in buf.iter_mut().zip(&spectrum).zip(&k.kernels[idx]) {
            *b = s * kk;
        }
        k.inverse.process(&mut buf);
        buf[..j].iter().map(|z| z.re * scale).collect::<Vec<f64>>()
    };
    let cross_scale = 2.0 * c * tau.powf(1.0 - g);
    for q in 0..E2_POINTS {
        let r = remainder(q);
        let w = rule.jacobi[q].1 * cross_scale;
        total += w * d.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
    }
    for q in 0..E2_POINTS {
        let r = remainder(E2_POINTS + q);
        let w = rule.legendre[q].1 * tau;
        total += w * r.iter().map(|v| v * v).sum::<f64>();
    }
    total
}

/// `P_τ v`: the value at each slab's right endpoint.
pub fn interpolate_right(v: impl Fn(f64) -> f64, grid: &TimeGrid) -> ScalarStepFunction {
    let values = grid.nodes()[1..].iter().map(|&t| v(t)).collect();
    ScalarStepFunction::new(grid.clone(), values).expect("one value per slab")
}

/// `Q_τ v`: the value at each slab's left endpoint.
pub fn interpolate_left(v: impl Fn(f64) -> f64, grid: &TimeGrid) -> ScalarStepFunction {
    let nodes = grid.nodes();
    let values = nodes[..nodes.len() - 1].iter().map(|&t| v(t)).collect();
    ScalarStepFunction::new(grid.clone(), values).expect("one value per slab")
}

/// `log₂(E_{i-1} / E_i)` between consecutive dyadic levels; `None` for the
/// first level and wherever an error is not a positive finite number.
pub fn observed_orders(errors: &[f64]) -> Vec<Option<f64>> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    (0..errors.len())
        .map(|i| {
            if i == 0 || !ok(errors[i - 1]) || !ok(errors[i]) {
                None
            } else {
                Some((errors[i - 1] / errors[i]).log2())
            }
        })
        .collect()
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    /// Mesh size or slab length of this level.
    pub level: f64,
    pub e1: f64,
    pub e2: Option<f64>,
    pub nodal: Option<f64>,
    pub e1_order: Option<f64>,
    pub e2_order: Option<f64>,
    pub nodal_order: Option<f64>,
}

/// Errors and observed orders along a ladder.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

/// `(level, e1, e2, nodal)`.
pub type LevelErrors = (f64, f64, Option<f64>, Option<f64>);

impl ErrorReport {
    /// Builds rows from `(level, e1, e2, nodal)` and fills in the orders.
    pub fn from_levels(levels: &[LevelErrors]) -> Self {
        let col = |f: &dyn Fn(&LevelErrors) -> Option<f64>| {
            let v: Vec<f64> = levels.iter().map(|l| f(l).unwrap_or(f64::NAN)).collect();
            observed_orders(&v)
        };
        let o1 = col(&|l| Some(l.1));
        let o2 = col(&|l| l.2);
        let o3 = col(&|l| l.3);
        let rows = levels
            .iter()
            .enumerate()
            .map(|(i, &(level, e1, e2, nodal))| ErrorRow {
                level,
                e1,
                e2,
                nodal,
                e1_order: o1[i],
                e2_order: o2[i],
                nodal_order: o3[i],
            })
            .collect();
        Self { rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{solve, InitialData, ProblemData, SourceData};
    use crate::fem::SpaceFunction;
    use crate::frac_ops::{hgamma_seminorm, rl_derivative_step};
    use crate::reference::SpectralBasis1D;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn solution(space: &Arc<FemSpace>, grid: &TimeGrid, alpha: f64) -> DGSolution {
        let data = ProblemData::new(
            alpha,
            grid.horizon(),
            InitialData::Function(SpaceFunction::new(|x| (PI * x[0]).sin())),
            SourceData::Zero,
        )
        .unwrap();
        solve(&data, space, grid).unwrap()
    }

    fn from_values(space: &Arc<FemSpace>, grid: &TimeGrid, values: Vec<f64>) -> DGSolution {
        DGSolution::from_parts(0.4, space.clone(), grid.clone(), space.zeros(), values).unwrap()
    }

    #[test]
    fn identical_solutions_have_zero_error() {
        let space = Arc::new(FemSpace::interval(8).unwrap());
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let u = solution(&space, &grid, 0.4);
        let r = ReferenceSolution::Numerical(u.clone());
        assert_eq!(e1_l2l2(&u, &r).unwrap(), 0.0);
        assert_eq!(nodal_error(&u, &r).unwrap(), 0.0);
        assert_eq!(e2_fractional(&u, &u, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn separable_norm_against_zero() {
        let space = Arc::new(FemSpace::interval(64).unwrap());
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let sine = space.interpolate(&SpaceFunction::new(|x| (PI * x[0]).sin()));
        let values: Vec<f64> = (0..4).flat_map(|_| sine.iter().copied()).collect();
        let u = from_values(&space, &grid, values);
        let zero = from_values(&space, &grid, vec![0.0; 4 * space.dofs()]);
        let e = e1_l2l2(&u, &zero.into()).unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-3, "{e}");
    }

    #[test]
    fn e1_is_homogeneous_and_uses_prolongation() {
        let coarse = Arc::new(FemSpace::interval(8).unwrap());
        let fine = Arc::new(FemSpace::interval(32).unwrap());
        let (gc, gf) = (
            TimeGrid::uniform(1.0, 4).unwrap(),
            TimeGrid::uniform(1.0, 16).unwrap(),
        );
        let u = solution(&coarse, &gc, 0.4);
        let r = solution(&fine, &gf, 0.4);
        let base = e1_l2l2(&u, &r.clone().into()).unwrap();
        assert!(base > 0.0);
        // U and 3U against 0 scale by 3; check via the zero reference
        let zero = from_values(&fine, &gf, vec![0.0; 16 * fine.dofs()]);
        let a = e1_l2l2(&u, &zero.clone().into()).unwrap();
        let tripled = from_values(&coarse, &gc, u.slabs().flatten().map(|v| 3.0 * v).collect());
        let b = e1_l2l2(&tripled, &zero.into()).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);
        assert!(e1_l2l2(&r, &u.into()).is_err());
    }

    #[test]
    fn gradient_features_reproduce_stiffness() {
        for space in [
            FemSpace::interval(16).unwrap(),
            FemSpace::square(6).unwrap(),
        ] {
            let map = GradientMap::new(&space);
            let v: Vec<f64> = (0..space.dofs())
                .map(|k| ((k * 31 % 17) as f64 - 8.0) / 3.0)
                .collect();
            let sum: f64 = (0..map.len()).map(|f| map.feature(f, &v).powi(2)).sum();
            assert!((sum - space.energy(&v)).abs() < 1e-11 * sum);
        }
    }

    /// Step function with random-looking values, one spatial mode.
    fn single_mode_error(j: usize) -> (Arc<FemSpace>, TimeGrid, Vec<f64>, Vec<f64>) {
        let space = Arc::new(FemSpace::interval(16).unwrap());
        let grid = TimeGrid::uniform(1.0, j).unwrap();
        let profile: Vec<f64> = (0..j)
            .map(|l| ((l * 7919 % 13) as f64 - 6.0) / 5.0)
            .collect();
        let mode = space.interpolate(&SpaceFunction::new(|x| (PI * x[0]).sin()));
        let values = profile
            .iter()
            .flat_map(|&p| mode.iter().map(move |m| p * m))
            .collect();
        (space, grid, profile, values)
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let (space, grid, _, values) = single_mode_error(64);
        let rule = FractionalRule::new(0.3);
        let map = GradientMap::new(&space);
        let n = space.dofs();
        let fft = FftKernels::new(&rule, grid.tau(0), 64);
        for f in [3usize, 7] {
            let mut prev = 0.0;
            let d: Vec<f64> = (0..64)
                .map(|l| {
                    let v = map.feature(f, &values[l * n..(l + 1) * n]);
                    let dl = v - prev;
                    prev = v;
                    dl
                })
                .collect();
            let a = squared_norm_fft(&rule, &d, &fft);
            let b = rule.squared_norm(&grid, &d);
            assert!((a - b).abs() < 1e-11 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn e2_matches_dense_quadrature() {
        let j = 16;
        let (space, grid, profile, values) = single_mode_error(j);
        let alpha = 0.4;
        let g = 0.5 * (1.0 - alpha);
        let got = fractional_energy(&space, &grid, &values, alpha).unwrap();
        let mode = space.interpolate(&SpaceFunction::new(|x| (PI * x[0]).sin()));
        let v = ScalarStepFunction::new(grid.clone(), profile).unwrap();
        // 64 Jacobi points per slab with the s^{-2γ} endpoint weight
        let rule = GaussJacobi::new(64, -2.0 * g, 0.0);
        let mut time = 0.0;
        for l in 0..j {
            let (a, b) = grid.slab(l);
            time += rule.integrate(a, b, |t| {
                let d = rl_derivative_step(g, &v, t).unwrap();
                d * d * (t - a).powf(2.0 * g)
            });
        }
        let want = space.energy(&mode) * time;
        assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
        let scaled: Vec<f64> = values.iter().map(|x| -2.5 * x).collect();
        let s = fractional_energy(&space, &grid, &scaled, alpha).unwrap();
        assert!((s.sqrt() - 2.5 * got.sqrt()).abs() < 1e-12 * s.sqrt());
    }

    #[test]
    fn e2_dominates_scaled_seminorm() {
        let alpha = 0.4;
        let g = 0.5 * (1.0 - alpha);
        let (space, grid, profile, values) = single_mode_error(32);
        let mode = space.interpolate(&SpaceFunction::new(|x| (PI * x[0]).sin()));
        let e2 = fractional_energy(&space, &grid, &values, alpha).unwrap();
        let v = ScalarStepFunction::new(grid, profile).unwrap();
        let semi = hgamma_seminorm(g, &v, 8).unwrap();
        let lower = (g * PI).cos() * semi * semi * space.energy(&mode);
        assert!(e2 >= 0.85 * lower, "{e2} vs {lower}");
    }

    #[test]
    fn spectral_reference_errors() {
        let alpha = 0.4;
        let space = Arc::new(FemSpace::interval(64).unwrap());
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let u = solution(&space, &grid, alpha);
        let basis = SpectralBasis1D::new(4).unwrap();
        let exact = SpectralReference::from_modal(alpha, basis, vec![0.5f64.sqrt(), 0.0, 0.0, 0.0]);
        let r = ReferenceSolution::Spectral(exact);
        let nodal = nodal_error(&u, &r).unwrap();
        let e1 = e1_l2l2(&u, &r).unwrap();
        assert!(nodal > 0.0 && nodal < 0.06, "{nodal}");
        assert!(e1 > 0.0 && e1 < nodal, "{e1}");
        // spectral oracle: the first slab dominates the nodal error
        let first = (u.slab(0).iter().zip(u.initial().iter()))
            .map(|(a, b)| {
                a - crate::mittag_leffler::mode_solution(alpha, PI * PI, 1.0 / 64.0).unwrap() * b
            })
            .collect::<Vec<_>>();
        assert!((space.l2_norm(&first) - nodal).abs() < 0.1 * nodal);
    }

    #[test]
    fn interpolants_sample_endpoints() {
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        assert_eq!(interpolate_right(|t| t, &grid).values(), &[0.5, 1.0]);
        assert_eq!(interpolate_left(|t| t, &grid).values(), &[0.0, 0.5]);
        assert_eq!(interpolate_right(|_| 3.0, &grid).values(), &[3.0, 3.0]);
    }

    /// Piecewise-constant interpolation of `t^{3/4}` loses `β` orders in
    /// `H^β`; the start-up singularity only contributes `τ^{5/4-β}`.
    #[test]
    fn interpolation_error_decays_in_fractional_seminorm() {
        let v = |t: f64| t.powf(0.75);
        for beta in [0.2, 0.4] {
            let mut errors = (Vec::new(), Vec::new());
            for level in 4..8 {
                let fine = TimeGrid::dyadic(1.0, level + 6).unwrap();
                let grid = TimeGrid::dyadic(1.0, level).unwrap();
                let err = |s: &ScalarStepFunction| {
                    let vals = (0..fine.slab_count())
                        .map(|k| {
                            let (a, b) = fine.slab(k);
                            let m = 0.5 * (a + b);
                            v(m) - s.eval(m)
                        })
                        .collect();
                    hgamma_seminorm(
                        beta,
                        &ScalarStepFunction::new(fine.clone(), vals).unwrap(),
                        4,
                    )
                    .unwrap()
                };
                errors.0.push(err(&interpolate_right(v, &grid)));
                errors.1.push(err(&interpolate_left(v, &grid)));
            }
            for series in [errors.0, errors.1] {
                let orders: Vec<f64> = observed_orders(&series).into_iter().flatten().collect();
                let mean = orders.iter().sum::<f64>() / orders.len() as f64;
                assert!(
                    (mean - (1.0 - beta)).abs() <= 0.1,
                    "beta={beta}: {orders:?}"
                );
            }
        }
    }

    #[test]
    fn orders_follow_log_ratios() {
        assert_eq!(observed_orders(&[4.0, 1.0]), vec![None, Some(2.0)]);
        assert_eq!(observed_orders(&[1.0, 1.0]), vec![None, Some(0.0)]);
        assert_eq!(observed_orders(&[1.0, 0.0]), vec![None, None]);
        let o = observed_orders(&[1.04e-4, 5.71e-5])[1].unwrap();
        assert!((o - 0.87).abs() < 0.005);
        let scaled = observed_orders(&[3.0 * 1.04e-4, 3.0 * 5.71e-5])[1].unwrap();
        assert!((o - scaled).abs() < 1e-12);
        let report =
            ErrorReport::from_levels(&[(0.5, 4e-2, None, None), (0.25, 1e-2, Some(1.0), None)]);
        assert_eq!(report.rows[0].e1_order, None);
        assert!((report.rows[1].e1_order.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(report.rows[1].e2_order, None);
    }
}
