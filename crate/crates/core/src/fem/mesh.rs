use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A point in the plane; interval meshes use only the first coordinate.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeshKind {
    /// Uniform partition of (0, 1).
    Interval,
    /// Uniform right-triangle partition of (0, 1)², diagonals running
    /// lower-left to upper-right.
    Square,
}

/// Structured simplicial mesh of the unit interval or unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    kind: MeshKind,
    cells: usize,
    vertices: Vec<Point>,
    elements: Vec<usize>,
    boundary: Vec<bool>,
}

/// Uniform mesh of (0, 1) with `n` cells.
pub fn build_interval_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return domain(format!("an interval mesh needs at least 2 cells, got {n}"));
    }
    let vertices = (0..=n).map(|i| [i as f64 / n as f64, 0.0]).collect();
    let elements = (0..n).flat_map(|i| [i, i + 1]).collect();
    let boundary = (0..=n).map(|i| i == 0 || i == n).collect();
    Ok(Mesh {
        kind: MeshKind::Interval,
        cells: n,
        vertices,
        elements,
        boundary,
    })
}

/// Uniform mesh of (0, 1)² with `n` squares per side, each cut into two
/// triangles along the lower-left to upper-right diagonal.
pub fn build_square_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return domain(format!(
            "a square mesh needs at least 2 cells per side, got {n}"
        ));
    }
    let m = n + 1;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity(m * m);
    let mut boundary = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            vertices.push([i as f64 * h, j as f64 * h]);
            boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut elements = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let ll = j * m + i;
            let lr = ll + 1;
            let ul = ll + m;
            let ur = ul + 1;
            elements.extend_from_slice(&[ll, lr, ur, ll, ur, ul]);
        }
    }
    Ok(Mesh {
        kind: MeshKind::Square,
        cells: n,
        vertices,
        elements,
        boundary,
    })
}

impl Mesh {
    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            MeshKind::Interval => 1,
            MeshKind::Square => 2,
        }
    }

    /// Cells per side.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Side length of the structured cells, `1 / cells`.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        match self.kind {
            MeshKind::Interval => self.cell_size(),
            MeshKind::Square => std::f64::consts::SQRT_2 * self.cell_size(),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn nodes_per_element(&self) -> usize {
        self.dim() + 1
    }

    pub fn element_count(&self) -> usize {
        self.elements.len() / self.nodes_per_element()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_element();
        &self.elements[e * k..(e + 1) * k]
    }

    /// Signed measure of element `e` (length, or oriented area).
    pub fn signed_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        let p = |i: usize| self.vertices[el[i]];
        match self.kind {
            MeshKind::Interval => p(1)[0] - p(0)[0],
            MeshKind::Square => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    /// Barycentric coordinates of `x` with respect to element `e`.
    pub fn barycentric(&self, e: usize, x: &Point) -> [f64; 3] {
        let el = self.element(e);
        let p = |i: usize| self.vertices[el[i]];
        match self.kind {
            MeshKind::Interval => {
                let (a, b) = (p(0)[0], p(1)[0]);
                let l1 = (x[0] - a) / (b - a);
                [1.0 - l1, l1, 0.0]
            }
            MeshKind::Square => {
                let (a, b, c) = (p(0), p(1), p(2));
                let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                let dx = x[0] - a[0];
                let dy = x[1] - a[1];
                let l1 = (dx * (c[1] - a[1]) - dy * (c[0] - a[0])) / det;
                let l2 = ((b[0] - a[0]) * dy - (b[1] - a[1]) * dx) / det;
                [1.0 - l1 - l2, l1, l2]
            }
        }
    }

    /// Lowest-index element whose closure contains `x`, if any.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        const TOL: f64 = 1e-12;
        let n = self.cells;
        let inside = |v: f64| (-TOL..=1.0 + TOL).contains(&v);
        if !inside(x[0]) || (self.kind == MeshKind::Square && !inside(x[1])) {
            return None;
        }
        let span = |c: f64| {
            let s = (c * n as f64).floor() as isize;
            let lo = (s - 1).clamp(0, n as isize - 1) as usize;
            let hi = s.clamp(0, n as isize - 1) as usize;
            lo..=hi
        };
        let contains = |e: usize| {
            let b = self.barycentric(e, x);
            b[..self.nodes_per_element()].iter().all(|&l| l >= -TOL)
        };
        match self.kind {
            MeshKind::Interval => span(x[0]).find(|&e| contains(e)),
            MeshKind::Square => {
                let mut best: Option<usize> = None;
                for j in span(x[1]) {
                    for i in span(x[0]) {
                        for e in [2 * (j * n + i), 2 * (j * n + i) + 1] {
                            if best.is_none_or(|b| e < b) && contains(e) {
                                best = Some(e);
                            }
                        }
                    }
                }
                best
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn with_vertex(mut self, v: usize, p: Point) -> Self {
        self.vertices[v] = p;
        self
    }

    /// `Some(2^k)` when `finer` is a k-fold dyadic refinement of `self`.
    pub fn refinement_factor(&self, finer: &Mesh) -> Option<usize> {
        if self.kind != finer.kind || !finer.cells.is_multiple_of(self.cells) {
            return None;
        }
        let r = finer.cells / self.cells;
        r.is_power_of_two().then_some(r)
    }
}
