use std::ops::{Deref, DerefMut};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::function::{SpaceFunction, SpaceTimeFunction};
use super::mesh::{Mesh, MeshKind, Point};
use crate::error::{domain, Error, Result};
use crate::linalg::{BandedCholesky, CsrMatrix};
use crate::quadrature::GaussJacobi;

const QUAD_POINTS: usize = 8;

/// Coefficients of a member of the P1 space, one per interior vertex.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpatialVector(Vec<f64>);

impl SpatialVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for SpatialVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for SpatialVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpatialVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Continuous P1 elements with homogeneous Dirichlet conditions.
#[derive(Debug)]
pub struct FemSpace {
    mesh: Mesh,
    dof_of_vertex: Vec<Option<usize>>,
    vertex_of_dof: Vec<usize>,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    mass_factor: OnceLock<BandedCholesky>,
}

/// Element mass and stiffness matrices (leading `d+1` block is used).
struct LocalMatrices {
    mass: [[f64; 3]; 3],
    stiffness: [[f64; 3]; 3],
}

fn local_matrices(mesh: &Mesh, e: usize) -> Result<LocalMatrices> {
    let meas = mesh.signed_measure(e);
    let scale = mesh.cell_size().powi(mesh.dim() as i32);
    if !(meas > 1e-12 * scale) {
        return Err(Error::Assembly(format!(
            "element {e} has non-positive measure {meas:.3e}"
        )));
    }
    let mut mass = [[0.0; 3]; 3];
    let mut stiffness = [[0.0; 3]; 3];
    match mesh.kind() {
        MeshKind::Interval => {
            for i in 0..2 {
                for j in 0..2 {
                    mass[i][j] = meas / 6.0 * if i == j { 2.0 } else { 1.0 };
                    stiffness[i][j] = if i == j { 1.0 } else { -1.0 } / meas;
                }
            }
        }
        MeshKind::Square => {
            let el = mesh.element(e);
            let p = |i: usize| mesh.vertices()[el[i]];
            let (a, b, c) = (p(0), p(1), p(2));
            let det = 2.0 * meas;
            let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
            let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
            let g = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
            for i in 0..3 {
                for j in 0..3 {
                    mass[i][j] = meas / 12.0 * if i == j { 2.0 } else { 1.0 };
                    stiffness[i][j] = meas * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
    }
    Ok(LocalMatrices { mass, stiffness })
}

/// Conical product rule on the reference triangle: barycentric points and
/// weights summing to one.
fn triangle_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let collapsed = GaussJacobi::new(n, 0.0, 1.0);
    let line = GaussJacobi::legendre(n);
    let mut rule = Vec::with_capacity(n * n);
    for (u, wu) in collapsed.mapped(0.0, 1.0) {
        for (v, wv) in line.mapped(0.0, 1.0) {
            let xi = u;
            let eta = v * (1.0 - u);
            rule.push(([1.0 - xi - eta, xi, eta], 2.0 * wu * wv));
        }
    }
    rule
}

impl FemSpace {
    /// Assembles mass and stiffness on the interior vertices of `mesh`.
    pub fn assemble(mesh: Mesh) -> Result<Self> {
        let mut dof_of_vertex = vec![None; mesh.vertex_count()];
        let mut vertex_of_dof = Vec::new();
        for (v, slot) in dof_of_vertex.iter_mut().enumerate() {
            if !mesh.is_boundary(v) {
                *slot = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        let n = vertex_of_dof.len();
        let k = mesh.nodes_per_element();
        let mut mass = Vec::with_capacity(mesh.element_count() * k * k);
        let mut stiff = Vec::with_capacity(mesh.element_count() * k * k);
        for e in 0..mesh.element_count() {
            let local = local_matrices(&mesh, e)?;
            let el = mesh.element(e);
            for a in 0..k {
                let Some(i) = dof_of_vertex[el[a]] else {
                    continue;
                };
                for b in 0..k {
                    let Some(j) = dof_of_vertex[el[b]] else {
                        continue;
                    };
                    mass.push((i, j, local.mass[a][b]));
                    stiff.push((i, j, local.stiffness[a][b]));
                }
            }
        }
        Ok(Self {
            mass: CsrMatrix::from_triplets(n, mass),
            stiffness: CsrMatrix::from_triplets(n, stiff),
            mesh,
            dof_of_vertex,
            vertex_of_dof,
            mass_factor: OnceLock::new(),
        })
    }

    pub fn interval(n: usize) -> Result<Self> {
        Self::assemble(super::build_interval_mesh(n)?)
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::assemble(super::build_square_mesh(n)?)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.dof_of_vertex[v]
    }

    pub fn dof_vertex(&self, k: usize) -> usize {
        self.vertex_of_dof[k]
    }

    pub fn zeros(&self) -> SpatialVector {
        SpatialVector::zeros(self.dofs())
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dofs() {
            return domain(format!(
                "vector of length {} on a space with {} dofs",
                u.len(),
                self.dofs()
            ));
        }
        Ok(())
    }

    /// Measure of element `e` and the gradients of its barycentric basis.
    pub fn element_gradients(&self, e: usize) -> (f64, [[f64; 2]; 3]) {
        let mesh = &self.mesh;
        let meas = mesh.signed_measure(e);
        let el = mesh.element(e);
        let p = |i: usize| mesh.vertices()[el[i]];
        match mesh.kind() {
            MeshKind::Interval => (meas, [[-1.0 / meas, 0.0], [1.0 / meas, 0.0], [0.0, 0.0]]),
            MeshKind::Square => {
                let (a, b, c) = (p(0), p(1), p(2));
                let det = 2.0 * meas;
                let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
                let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
                (meas, [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2])
            }
        }
    }

    /// `‖u‖_{L²}` via the mass matrix.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.mass.quad_form(u).max(0.0).sqrt()
    }

    /// `|u|²_{H¹} = uᵀ A u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.stiffness.quad_form(u)
    }

    /// Solves `M x = b` with a cached Cholesky factor of the mass matrix.
    pub fn mass_solve(&self, b: &[f64]) -> Result<SpatialVector> {
        self.check_len(b)?;
        let factor = match self.mass_factor.get() {
            Some(f) => f,
            None => {
                let f = BandedCholesky::factor(&self.mass)?;
                self.mass_factor.get_or_init(|| f)
            }
        };
        let mut x = b.to_vec();
        factor.solve_in_place(&mut x);
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b_norm > 0.0 {
            let mx = self.mass.mul_vec(&x);
            let r = mx
                .iter()
                .zip(b)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                / b_norm;
            if !(r <= 1e-12) {
                return Err(Error::Solver {
                    iterations: 1,
                    residual: r,
                    context: "mass solve residual above 1e-12".into(),
                });
            }
        }
        Ok(x.into())
    }

    /// Values at every mesh vertex, zero on the boundary.
    pub fn vertex_values(&self, u: &[f64]) -> Vec<f64> {
        self.dof_of_vertex
            .iter()
            .map(|d| d.map_or(0.0, |k| u[k]))
            .collect()
    }

    /// Point evaluation of the P1 function `u`.
    pub fn eval(&self, u: &[f64], x: &Point) -> Option<f64> {
        let e = self.mesh.locate(x)?;
        let lam = self.mesh.barycentric(e, x);
        Some(
            self.mesh
                .element(e)
                .iter()
                .zip(lam)
                .map(|(&v, l)| self.dof_of_vertex[v].map_or(0.0, |k| l * u[k]))
                .sum(),
        )
    }

    /// Nodal interpolant.
    pub fn interpolate(&self, f: &SpaceFunction) -> SpatialVector {
        self.vertex_of_dof
            .iter()
            .map(|&v| f.eval(&self.mesh.vertices()[v]))
            .collect::<Vec<_>>()
            .into()
    }

    /// Exact P1 interpolation of a coarse-space function onto this (nested) space.
    pub fn prolong_from(&self, coarse: &FemSpace, u: &[f64]) -> Result<SpatialVector> {
        coarse.check_len(u)?;
        if coarse.mesh.refinement_factor(&self.mesh).is_none() {
            return domain(format!(
                "mesh with {} cells is not a dyadic refinement of one with {}",
                self.mesh.cells(),
                coarse.mesh.cells()
            ));
        }
        if coarse.mesh.cells() == self.mesh.cells() {
            return Ok(u.to_vec().into());
        }
        let out: Vec<f64> = self
            .vertex_of_dof
            .iter()
            .map(|&v| coarse.eval(u, &self.mesh.vertices()[v]).unwrap_or(0.0))
            .collect();
        Ok(out.into())
    }

    /// Load vector `∫ f φ_k`.
    pub fn load(&self, f: &SpaceFunction) -> Result<SpatialVector> {
        let mut b = vec![0.0; self.dofs()];
        let k = self.mesh.nodes_per_element();
        match self.mesh.kind() {
            MeshKind::Interval => {
                let smooth = GaussJacobi::legendre(QUAD_POINTS);
                let singular =
                    (f.x_power() != 0.0).then(|| GaussJacobi::new(QUAD_POINTS, f.x_power(), 0.0));
                for e in 0..self.mesh.element_count() {
                    let el = self.mesh.element(e);
                    let a = self.mesh.vertices()[el[0]][0];
                    let c = self.mesh.vertices()[el[1]][0];
                    let len = c - a;
                    let mut acc = [0.0; 2];
                    match &singular {
                        Some(rule) if a == 0.0 => {
                            for (x, w) in rule.mapped(a, c) {
                                let g = w * f.smooth_part(&[x, 0.0]);
                                let l1 = (x - a) / len;
                                acc[0] += g * (1.0 - l1);
                                acc[1] += g * l1;
                            }
                        }
                        _ => {
                            for (x, w) in smooth.mapped(a, c) {
                                let g = w * f.eval(&[x, 0.0]);
                                let l1 = (x - a) / len;
                                acc[0] += g * (1.0 - l1);
                                acc[1] += g * l1;
                            }
                        }
                    }
                    for i in 0..k {
                        if let Some(d) = self.dof_of_vertex[el[i]] {
                            b[d] += acc[i];
                        }
                    }
                }
            }
            MeshKind::Square => {
                if f.x_power() < 0.0 {
                    return Err(Error::Data(
                        "singular spatial factors are supported on interval meshes only".into(),
                    ));
                }
                let rule = triangle_rule(QUAD_POINTS);
                for e in 0..self.mesh.element_count() {
                    let el = self.mesh.element(e);
                    let p: Vec<Point> = el.iter().map(|&v| self.mesh.vertices()[v]).collect();
                    let meas = self.mesh.signed_measure(e);
                    let mut acc = [0.0; 3];
                    for (lam, w) in &rule {
                        let x = [
                            lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                            lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                        ];
                        let g = w * meas * f.eval(&x);
                        for i in 0..3 {
                            acc[i] += g * lam[i];
                        }
                    }
                    for i in 0..k {
                        if let Some(d) = self.dof_of_vertex[el[i]] {
                            b[d] += acc[i];
                        }
                    }
                }
            }
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(
                "load quadrature produced a non-finite value".into(),
            ));
        }
        Ok(b.into())
    }

    /// `‖f − u‖_{L²}` by elementwise quadrature (f is assumed smooth).
    pub fn l2_distance(&self, u: &[f64], f: &SpaceFunction) -> f64 {
        let values = self.vertex_values(u);
        let k = self.mesh.nodes_per_element();
        let rule: Vec<([f64; 3], f64)> = match self.mesh.kind() {
            MeshKind::Interval => GaussJacobi::legendre(QUAD_POINTS)
                .mapped(0.0, 1.0)
                .map(|(s, w)| ([1.0 - s, s, 0.0], w))
                .collect(),
            MeshKind::Square => triangle_rule(QUAD_POINTS),
        };
        let mut total = 0.0;
        for e in 0..self.mesh.element_count() {
            let el = self.mesh.element(e);
            let meas = self.mesh.signed_measure(e);
            for (lam, w) in &rule {
                let mut x = [0.0; 2];
                let mut uh = 0.0;
                for i in 0..k {
                    let p = self.mesh.vertices()[el[i]];
                    x[0] += lam[i] * p[0];
                    x[1] += lam[i] * p[1];
                    uh += lam[i] * values[el[i]];
                }
                total += w * meas * (f.eval(&x) - uh).powi(2);
            }
        }
        total.sqrt()
    }
}

/// L² projection onto the P1 space.
pub fn l2_project(space: &FemSpace, v: &SpaceFunction) -> Result<SpatialVector> {
    let b = space.load(v)?;
    space.mass_solve(&b)
}

/// Slab load `∫_a^b ∫_Ω f φ_k dx dt`.
pub fn load_slab(
    space: &FemSpace,
    f: &SpaceTimeFunction,
    slab: (f64, f64),
) -> Result<SpatialVector> {
    let (a, b) = slab;
    if !(b > a && a >= 0.0) {
        return domain(format!("invalid slab ({a}, {b})"));
    }
    match f {
        SpaceTimeFunction::Separable { time, space: w } => {
            let mut v = space.load(w)?;
            let c = time.integral(a, b);
            v.iter_mut().for_each(|x| *x *= c);
            Ok(v)
        }
        SpaceTimeFunction::General {
            t_power,
            x_power,
            g,
        } => {
            let singular = *t_power != 0.0 && a == 0.0;
            let rule = if singular {
                GaussJacobi::new(QUAD_POINTS, *t_power, 0.0)
            } else {
                GaussJacobi::legendre(QUAD_POINTS)
            };
            let mut acc = vec![0.0; space.dofs()];
            for (t, w) in rule.mapped(a, b) {
                let weight = if singular || *t_power == 0.0 {
                    w
                } else {
                    w * t.powf(*t_power)
                };
                let g = g.clone();
                let slice = SpaceFunction::with_x_power(*x_power, move |x| g(x, t));
                let load = space.load(&slice)?;
                crate::linalg::axpy(weight, &load, &mut acc);
            }
            Ok(acc.into())
        }
    }
}

/// Local P1 representative of a point source on its containing element.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracApprox {
    point: Point,
    element: usize,
    vertices: Vec<usize>,
    coefficients: Vec<f64>,
    local_mass: Vec<Vec<f64>>,
    basis_at_point: Vec<f64>,
}

/// Constructs `δ_h ∈ P1(K)` with `∫_K δ_h q = q(x₀)` for every `q ∈ P1(K)`.
pub fn dirac_approx(space: &FemSpace, x0: Point) -> Result<DiracApprox> {
    let mesh = space.mesh();
    let interior = |c: f64| c > 0.0 && c < 1.0;
    let ok = interior(x0[0]) && (mesh.dim() == 1 || interior(x0[1]));
    if !ok {
        return domain(format!("point source {x0:?} is not inside the domain"));
    }
    let e = mesh
        .locate(&x0)
        .ok_or_else(|| Error::Domain(format!("no element contains {x0:?}")))?;
    let k = mesh.nodes_per_element();
    let local = local_matrices(mesh, e)?;
    let local_mass: Vec<Vec<f64>> = (0..k).map(|i| local.mass[i][..k].to_vec()).collect();
    let basis_at_point = mesh.barycentric(e, &x0)[..k].to_vec();
    let coefficients = solve_dense(local_mass.clone(), basis_at_point.clone());
    Ok(DiracApprox {
        point: x0,
        element: e,
        vertices: mesh.element(e).to_vec(),
        coefficients,
        local_mass,
        basis_at_point,
    })
}

impl DiracApprox {
    pub fn point(&self) -> Point {
        self.point
    }

    pub fn element(&self) -> usize {
        self.element
    }

    /// Coefficients with respect to the element's vertex basis, in element order.
    pub fn local_coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `∫_K δ_h q` for the P1 function with vertex values `q`.
    pub fn moment(&self, q: &[f64]) -> f64 {
        let k = self.coefficients.len();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| self.coefficients[i] * self.local_mass[i][j] * q[j])
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.moment(&self.coefficients).sqrt()
    }

    /// Pairing with the global basis: entry `k` is `φ_k(x₀)`.
    pub fn load(&self, space: &FemSpace) -> SpatialVector {
        let mut b = space.zeros();
        for (&v, &phi) in self.vertices.iter().zip(&self.basis_at_point) {
            if let Some(d) = space.vertex_dof(v) {
                b[d] += phi;
            }
        }
        b
    }
}

/// Gaussian elimination with partial pivoting for tiny dense systems.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
