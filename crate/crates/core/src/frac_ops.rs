//! Riemann–Liouville fractional calculus on piecewise-constant functions.
//!
//! Slabs are indexed from zero: slab `k` is the open interval
//! `(nodes[k], nodes[k + 1])`. A step function takes one value per slab.
//!
//! Every closed form here follows from summation by parts: a step function
//! `v` with jumps `d_i = v_i - v_{i-1}` (and `v_{-1} = 0`) satisfies
//!
//! ```text
//! (I^γ v)(t) = Σ_i d_i (t - t_i)_+^γ / Γ(γ + 1)
//! (D^γ v)(t) = Σ_i d_i (t - t_i)_+^{-γ} / Γ(1 - γ)
//! ```

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::GaussJacobi;
use crate::special::{binomial, gamma, pow_plus};

/// Relative tolerance used to classify a grid as uniform.
const UNIFORM_RTOL: f64 = 1e-12;

/// A partition `0 = t_0 < t_1 < ... < t_J = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return domain("a time grid needs at least one slab");
        }
        if nodes[0] != 0.0 {
            return domain(format!("time grid must start at 0, got {}", nodes[0]));
        }
        if !nodes.iter().all(|t| t.is_finite()) {
            return domain("time grid nodes must be finite");
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
            return domain(format!(
                "time grid not strictly increasing at {} -> {}",
                w[0], w[1]
            ));
        }
        Ok(Self { nodes })
    }

    /// `slabs` equal slabs on `[0, horizon]`.
    pub fn uniform(horizon: f64, slabs: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if slabs == 0 {
            return domain("uniform grid needs at least one slab");
        }
        let tau = horizon / slabs as f64;
        let mut nodes: Vec<f64> = (0..=slabs).map(|k| k as f64 * tau).collect();
        nodes[slabs] = horizon;
        Ok(Self { nodes })
    }

    /// Uniform grid with `2^level` slabs.
    pub fn dyadic(horizon: f64, level: u32) -> Result<Self> {
        Self::uniform(horizon, 1usize << level)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of slabs `J`.
    pub fn slab_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn slab(&self, k: usize) -> (f64, f64) {
        (self.nodes[k], self.nodes[k + 1])
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn tau_max(&self) -> f64 {
        (0..self.slab_count())
            .map(|k| self.tau(k))
            .fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let tau = self.horizon() / self.slab_count() as f64;
        (0..self.slab_count()).all(|k| (self.tau(k) - tau).abs() <= UNIFORM_RTOL * tau)
    }

    /// Slab containing `t`; interior nodes belong to the slab on their left.
    pub fn locate(&self, t: f64) -> usize {
        let idx = self.nodes.partition_point(|&s| s < t);
        idx.saturating_sub(1).min(self.slab_count() - 1)
    }

    /// For each slab of `self`, the slab of `coarse` containing it, or `None`
    /// when the node set of `coarse` is not a subset of ours.
    pub fn coarse_parents(&self, coarse: &TimeGrid) -> Option<Vec<usize>> {
        let tol = 1e-12 * self.horizon();
        if (self.horizon() - coarse.horizon()).abs() > tol {
            return None;
        }
        let mut parents = Vec::with_capacity(self.slab_count());
        let mut c = 0;
        for k in 0..self.slab_count() {
            let (a, b) = self.slab(k);
            while c < coarse.slab_count() && coarse.nodes[c + 1] <= a + tol {
                c += 1;
            }
            if c >= coarse.slab_count()
                || coarse.nodes[c] > a + tol
                || b > coarse.nodes[c + 1] + tol
            {
                return None;
            }
            parents.push(c);
        }
        // every coarse node must coincide with a fine node
        let ok = coarse.nodes.iter().all(|&t| {
            let i = self.nodes.partition_point(|&s| s < t - tol);
            i < self.nodes.len() && (self.nodes[i] - t).abs() <= tol
        });
        ok.then_some(parents)
    }
}

/// A real-valued function that is constant on each slab of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarStepFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ScalarStepFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.slab_count() {
            return domain(format!(
                "step function has {} values for {} slabs",
                values.len(),
                grid.slab_count()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        let values = vec![value; grid.slab_count()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `t`, using the slab convention of [`TimeGrid::locate`].
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.grid.locate(t)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Jumps `v_k - v_{k-1}` with `v_{-1} = 0`.
    fn left_jumps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }

    /// Jumps `v_k - v_{k+1}` with `v_J = 0`.
    fn right_jumps(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|k| self.values[k] - if k + 1 < n { self.values[k + 1] } else { 0.0 })
            .collect()
    }
}

fn check_time(grid: &TimeGrid, t: f64) -> Result<()> {
    let tol = 1e-14 * grid.horizon();
    if !(t >= -tol && t <= grid.horizon() + tol) {
        return domain(format!("t = {t} outside [0, {}]", grid.horizon()));
    }
    Ok(())
}

fn check_derivative_point(grid: &TimeGrid, t: f64) -> Result<()> {
    let k = grid.nodes.partition_point(|&s| s < t);
    let tol = 1e-14 * grid.horizon();
    let near = |i: usize| i < grid.nodes.len() && (grid.nodes[i] - t).abs() <= tol;
    if near(k) || (k > 0 && near(k - 1)) {
        return Err(Error::Singularity(format!(
            "fractional derivative of a step function is singular at node t = {t}"
        )));
    }
    Ok(())
}

/// `(I_{0+}^γ v)(t)`.
pub fn rl_integral_step(gamma_order: f64, v: &ScalarStepFunction, t: f64) -> Result<f64> {
    if !(gamma_order > 0.0) {
        return domain(format!(
            "integral order must be positive, got {gamma_order}"
        ));
    }
    check_time(&v.grid, t)?;
    let nodes = &v.grid.nodes;
    let sum: f64 = v
        .values
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            vk * (pow_plus(t - nodes[k], gamma_order) - pow_plus(t - nodes[k + 1], gamma_order))
        })
        .sum();
    Ok(sum / gamma(gamma_order + 1.0))
}

/// `(I_{T-}^γ v)(t)`.
pub fn rl_integral_step_right(gamma_order: f64, v: &ScalarStepFunction, t: f64) -> Result<f64> {
    if !(gamma_order > 0.0) {
        return domain(format!(
            "integral order must be positive, got {gamma_order}"
        ));
    }
    check_time(&v.grid, t)?;
    let nodes = &v.grid.nodes;
    let sum: f64 = v
        .values
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            vk * (pow_plus(nodes[k + 1] - t, gamma_order) - pow_plus(nodes[k] - t, gamma_order))
        })
        .sum();
    Ok(sum / gamma(gamma_order + 1.0))
}

/// `(D_{0+}^γ v)(t)` for `γ ∈ (0, 1)` away from the grid nodes.
pub fn rl_derivative_step(gamma_order: f64, v: &ScalarStepFunction, t: f64) -> Result<f64> {
    if !(gamma_order > 0.0 && gamma_order < 1.0) {
        return domain(format!(
            "derivative order must lie in (0, 1), got {gamma_order}"
        ));
    }
    check_time(&v.grid, t)?;
    check_derivative_point(&v.grid, t)?;
    let nodes = &v.grid.nodes;
    let sum: f64 = v
        .values
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            vk * (pow_plus(t - nodes[k], -gamma_order) - pow_plus(t - nodes[k + 1], -gamma_order))
        })
        .sum();
    Ok(sum / gamma(1.0 - gamma_order))
}

/// `(D_{T-}^γ v)(t)` for `γ ∈ (0, 1)` away from the grid nodes.
pub fn rl_derivative_step_right(gamma_order: f64, v: &ScalarStepFunction, t: f64) -> Result<f64> {
    if !(gamma_order > 0.0 && gamma_order < 1.0) {
        return domain(format!(
            "derivative order must lie in (0, 1), got {gamma_order}"
        ));
    }
    check_time(&v.grid, t)?;
    check_derivative_point(&v.grid, t)?;
    let nodes = &v.grid.nodes;
    let sum: f64 = v
        .values
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            vk * (pow_plus(nodes[k + 1] - t, -gamma_order) - pow_plus(nodes[k] - t, -gamma_order))
        })
        .sum();
    Ok(sum / gamma(1.0 - gamma_order))
}

#[derive(Debug, Clone)]
enum WeightStorage {
    /// `weights[m]` is the weight at lag `m = j - i`.
    Toeplitz(Vec<f64>),
    /// Row `j` holds `ω_{j,0..=j}`.
    Dense(Vec<Vec<f64>>),
}

/// History weights `ω_{j,i} = ∫_{slab j} D_{0+}^{1-α} χ_{slab i} dt`, `i <= j`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    alpha: f64,
    grid: TimeGrid,
    storage: WeightStorage,
}

impl WeightTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn is_toeplitz(&self) -> bool {
        matches!(self.storage, WeightStorage::Toeplitz(_))
    }

    /// Lag weights when the table is Toeplitz.
    pub fn lags(&self) -> Option<&[f64]> {
        match &self.storage {
            WeightStorage::Toeplitz(w) => Some(w),
            WeightStorage::Dense(_) => None,
        }
    }

    /// `ω_{j,i}` for `i <= j` (zero-based slabs).
    pub fn weight(&self, j: usize, i: usize) -> f64 {
        assert!(
            i <= j && j < self.grid.slab_count(),
            "weight index out of range"
        );
        match &self.storage {
            WeightStorage::Toeplitz(w) => w[j - i],
            WeightStorage::Dense(rows) => rows[j][i],
        }
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        self.weight(j, j)
    }
}

/// Second difference `(m+1)^α - 2 m^α + (m-1)^α`, series form for large lags.
fn lag_coefficient(alpha: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m < 8 {
        let mf = m as f64;
        return (mf + 1.0).powf(alpha) - 2.0 * mf.powf(alpha) + (mf - 1.0).powf(alpha);
    }
    // m^α [(1 + 1/m)^α - 2 + (1 - 1/m)^α] = 2 m^α Σ_{k>=1} C(α, 2k) m^{-2k}
    let mf = m as f64;
    let inv2 = 1.0 / (mf * mf);
    let mut pow = inv2;
    let mut sum = 0.0;
    for k in 1..40 {
        let term = binomial(alpha, 2 * k) * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pow *= inv2;
    }
    2.0 * mf.powf(alpha) * sum
}

/// Build the DG history weights for order `alpha` on `grid`.
pub fn convolution_weights(alpha: f64, grid: &TimeGrid) -> Result<WeightTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let j_count = grid.slab_count();
    let norm = 1.0 / gamma(alpha + 1.0);
    let storage = if grid.is_uniform() {
        let tau = grid.horizon() / j_count as f64;
        let scale = tau.powf(alpha) * norm;
        WeightStorage::Toeplitz(
            (0..j_count)
                .map(|m| scale * lag_coefficient(alpha, m))
                .collect(),
        )
    } else {
        WeightStorage::Dense(dense_weights(alpha, grid))
    };
    Ok(WeightTable {
        alpha,
        grid: grid.clone(),
        storage,
    })
}

/// Direct evaluation of the four-term closed form, valid on any grid.
pub(crate) fn dense_weights(alpha: f64, grid: &TimeGrid) -> Vec<Vec<f64>> {
    let t = &grid.nodes;
    let norm = 1.0 / gamma(alpha + 1.0);
    (0..grid.slab_count())
        .map(|j| {
            (0..=j)
                .map(|i| {
                    let w = pow_plus(t[j + 1] - t[i], alpha)
                        - pow_plus(t[j + 1] - t[i + 1], alpha)
                        - pow_plus(t[j] - t[i], alpha)
                        + pow_plus(t[j] - t[i + 1], alpha);
                    w * norm
                })
                .collect()
        })
        .collect()
}

const QUADRATURE_POINTS: usize = 16;
const GRADING_RATIO: f64 = 0.125;

/// Quadrature approximation of `(I_{0+}^γ f)(t)` for a generic integrand.
///
/// The half `[t/2, t]` uses one Gauss–Jacobi panel carrying `(t - s)^{γ-1}`;
/// the half `[0, t/2]` is graded geometrically toward `s = 0` with
/// `refinement` levels so integrable endpoint singularities of `f` converge.
pub fn frac_integral_quadrature<F: Fn(f64) -> f64>(
    gamma_order: f64,
    f: F,
    t: f64,
    refinement: usize,
) -> Result<f64> {
    if refinement == 0 {
        return domain("refinement must be at least 1");
    }
    if !(gamma_order > 0.0) {
        return domain(format!(
            "integral order must be positive, got {gamma_order}"
        ));
    }
    if !(t >= 0.0) {
        return domain(format!("t must be nonnegative, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mid = 0.5 * t;
    let near = GaussJacobi::new(QUADRATURE_POINTS, 0.0, gamma_order - 1.0);
    let mut total = near.integrate(mid, t, &f);

    let plain = GaussJacobi::legendre(QUADRATURE_POINTS);
    let kernel = |s: f64| (t - s).powf(gamma_order - 1.0) * f(s);
    let mut hi = mid;
    for _ in 0..refinement * 4 {
        let lo = hi * GRADING_RATIO;
        total += plain.integrate(lo, hi, kernel);
        hi = lo;
    }
    total += plain.integrate(0.0, hi, kernel);
    Ok(total / gamma(gamma_order))
}

/// Discrete-Fourier estimate of `|v|_{H^γ}` for the zero extension of `v`.
///
/// The seminorm uses the unitary angular-frequency transform,
/// `|w|^2 = ∫ |ξ|^{2γ} |ŵ(ξ)|^2 dξ`. The step function is sampled at
/// `oversample × J` midpoints over `[0, T]` and zero-padded to `8T`.
pub fn hgamma_seminorm(gamma_order: f64, v: &ScalarStepFunction, oversample: usize) -> Result<f64> {
    if !(gamma_order > 0.0 && gamma_order < 1.0) {
        return domain(format!(
            "seminorm order must lie in (0, 1), got {gamma_order}"
        ));
    }
    if oversample < 4 {
        return domain(format!("oversample must be at least 4, got {oversample}"));
    }
    let horizon = v.grid.horizon();
    let samples = oversample * v.grid.slab_count();
    let total = 8 * samples;
    let dt = horizon / samples as f64;
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); total];
    for (m, slot) in buf.iter_mut().take(samples).enumerate() {
        slot.re = v.eval((m as f64 + 0.5) * dt);
    }
    FftPlanner::new().plan_fft_forward(total).process(&mut buf);
    let length = total as f64 * dt;
    let mut sum = 0.0;
    for (k, c) in buf.iter().enumerate() {
        let freq = if k <= total / 2 {
            k as f64
        } else {
            k as f64 - total as f64
        } / length;
        if freq == 0.0 {
            continue;
        }
        let amp = c.norm_sqr() * dt * dt;
        sum += (2.0 * PI * freq.abs()).powf(2.0 * gamma_order) * amp;
    }
    Ok((sum / length).sqrt())
}

/// Splits `[a, b]` at its midpoint and grades each half geometrically toward
/// its endpoint until the end panels are shorter than a tenth of the adjacent
/// scale.
fn graded_panels(a: f64, b: f64, left_scale: f64, right_scale: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let levels = |scale: f64| ((half / (0.1 * scale)).log2().ceil().max(0.0) as usize).min(60);
    let mut cuts = vec![a];
    let nl = levels(left_scale);
    cuts.extend((0..nl).map(|i| a + half * 0.5f64.powi((nl - i) as i32)));
    cuts.push(a + half);
    let nr = levels(right_scale);
    cuts.extend((0..nr).map(|i| b - half * 0.5f64.powi((i + 1) as i32)));
    cuts.push(b);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// A one-sided Riemann–Liouville operator applied inside [`sided_pairing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RlOperator {
    Identity,
    Integral(f64),
    Derivative(f64),
}

impl RlOperator {
    /// Power `p` of the kernel `(distance)^p / Γ(1 + p)`.
    fn power(self) -> Result<f64> {
        match self {
            RlOperator::Identity => Ok(0.0),
            RlOperator::Integral(g) if g > 0.0 => Ok(g),
            RlOperator::Derivative(g) if g > 0.0 && g < 0.5 => Ok(-g),
            other => domain(format!("unsupported operator in pairing: {other:?}")),
        }
    }
}

/// `⟨L_{0+} v, R_{T-} w⟩_{(0,T)}` for step functions on a shared grid.
///
/// On each slab both factors split into one term that is non-smooth at a
/// slab endpoint plus a remainder that is smooth on the slab; the four
/// products are integrated with Gauss–Jacobi rules carrying the matching
/// endpoint powers. Derivatives are limited to orders below 1/2 so the
/// product stays integrable.
pub fn sided_pairing(
    v: &ScalarStepFunction,
    left: RlOperator,
    w: &ScalarStepFunction,
    right: RlOperator,
) -> Result<f64> {
    if v.grid != w.grid {
        return domain("pairing requires a shared time grid");
    }
    let pl = left.power()?;
    let pr = right.power()?;
    let nl = 1.0 / gamma(1.0 + pl);
    let nr = 1.0 / gamma(1.0 + pr);
    let grid = &v.grid;
    let nodes = &grid.nodes;
    let j_count = grid.slab_count();
    let dl = v.left_jumps();
    let dr = w.right_jumps();

    let q = 20;
    let both = GaussJacobi::new(q, pl, pr);
    let left_only = GaussJacobi::new(q, pl, 0.0);
    let right_only = GaussJacobi::new(q, 0.0, pr);
    let plain = GaussJacobi::legendre(q);

    let smooth_left = |k: usize, t: f64| -> f64 {
        (0..k).map(|i| dl[i] * (t - nodes[i]).powf(pl)).sum::<f64>() * nl
    };
    let smooth_right = |k: usize, t: f64| -> f64 {
        (k + 1..j_count)
            .map(|i| dr[i] * (nodes[i + 1] - t).powf(pr))
            .sum::<f64>()
            * nr
    };

    let mut total = 0.0;
    for k in 0..j_count {
        let (a, b) = grid.slab(k);
        let sl = dl[k] * nl;
        let sr = dr[k] * nr;
        if sl != 0.0 && sr != 0.0 {
            total += sl * sr * both.integrate(a, b, |_| 1.0);
        }
        // the remainders are nearly singular when a neighbouring slab is
        // short, so panels are graded toward both ends below its length
        let neighbour =
            |i: Option<usize>| i.filter(|&i| i < j_count).map_or(b - a, |i| grid.tau(i));
        let panels = graded_panels(a, b, neighbour(k.checked_sub(1)), neighbour(Some(k + 1)));
        let last = panels.len() - 1;
        for (p, &(lo, hi)) in panels.iter().enumerate() {
            if sl != 0.0 {
                total += sl
                    * if p == 0 {
                        left_only.integrate(lo, hi, |t| smooth_right(k, t))
                    } else {
                        plain.integrate(lo, hi, |t| (t - a).powf(pl) * smooth_right(k, t))
                    };
            }
            if sr != 0.0 {
                total += sr
                    * if p == last {
                        right_only.integrate(lo, hi, |t| smooth_left(k, t))
                    } else {
                        plain.integrate(lo, hi, |t| (b - t).powf(pr) * smooth_left(k, t))
                    };
            }
            total += plain.integrate(lo, hi, |t| smooth_left(k, t) * smooth_right(k, t));
        }
    }
    Ok(total)
}
