//! Gauss–Jacobi rules for weakly singular kernels, plus an adaptive
//! Gauss–Kronrod integrator for smooth-but-peaked integrands.

use crate::special::gamma;

/// A Gauss rule for `∫_{lo}^{hi} (x - lo)^left (hi - x)^right g(x) dx`.
///
/// Nodes and weights are stored on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    left: f64,
    right: f64,
}

impl GaussJacobi {
    /// `n`-point rule; exponents must exceed `-1`.
    pub fn new(n: usize, left: f64, right: f64) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        assert!(
            left > -1.0 && right > -1.0,
            "Jacobi exponents must exceed -1"
        );
        // classical notation: weight (1 - x)^a (1 + x)^b
        let (a, b) = (right, left);
        let ab = a + b;
        let diag: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    (b - a) / (ab + 2.0)
                } else {
                    let k = k as f64;
                    (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
                }
            })
            .collect();
        // off[k] = sqrt(beta_{k+1}) couples p_k and p_{k+1}
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let beta = if k == 1 {
                    4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
                } else {
                    let k = k as f64;
                    let s = 2.0 * k + ab;
                    4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
                };
                beta.sqrt()
            })
            .collect();
        let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);

        let mut nodes: Vec<f64> = (0..n)
            .map(|i| tridiagonal_eigenvalue(&diag, &off, i))
            .collect();
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let weights = nodes
            .iter()
            .map(|&x| {
                // Christoffel number from the orthonormal recurrence
                let mut p_prev = 0.0;
                let mut p = 1.0;
                let mut sum = 1.0;
                for k in 0..n - 1 {
                    let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
                    let next = ((x - diag[k]) * p - b_prev * p_prev) / off[k];
                    p_prev = p;
                    p = next;
                    sum += p * p;
                }
                mu0 / sum
            })
            .collect();
        Self {
            nodes,
            weights,
            left,
            right,
        }
    }

    /// Plain Gauss–Legendre rule.
    pub fn legendre(n: usize) -> Self {
        Self::new(n, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn left_exponent(&self) -> f64 {
        self.left
    }

    pub fn right_exponent(&self) -> f64 {
        self.right
    }

    /// Nodes and weights mapped onto `[lo, hi]`; the weights absorb the
    /// Jacobi factor `(x - lo)^left (hi - x)^right`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let scale = half.powf(self.left + self.right + 1.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (lo + half * (x + 1.0), w * scale))
    }

    /// `∫_{lo}^{hi} (x - lo)^left (hi - x)^right g(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut g: F) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * g(x)).sum()
    }
}

/// `i`-th smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], i: usize) -> f64 {
    let n = diag.len();
    let mut radius = 0.0f64;
    for k in 0..n {
        let l = if k > 0 { off[k - 1].abs() } else { 0.0 };
        let r = if k + 1 < n { off[k].abs() } else { 0.0 };
        radius = radius.max(diag[k].abs() + l + r);
    }
    let (mut lo, mut hi) = (-radius, radius);
    // number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for k in 0..n {
            let b2 = if k > 0 { off[k - 1] * off[k - 1] } else { 0.0 };
            d = diag[k] - x - if k > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (radius + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) > i {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

const K15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * K15_WEIGHTS[7];
    let mut g = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * K15_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) over `[a, b]` split at the given breakpoints.
///
/// Returns the integral estimate and the summed error estimate.
pub fn adaptive_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    let mut pieces: Vec<(f64, f64, f64, f64)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = kronrod15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || pieces.len() >= max_intervals {
            return (total, err);
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (a, b, _, _) = pieces.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval exhausted at machine resolution
            return (total, err);
        }
        let (v1, e1) = kronrod15(&mut f, a, m);
        let (v2, e2) = kronrod15(&mut f, m, b);
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussJacobi::legendre(8);
        // degree 15 is the exactness limit
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let w: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_moments_match_beta_function() {
        // ∫_0^1 x^b (1-x)^a x^k dx = B(b + k + 1, a + 1)
        for &(left, right) in &[(-0.49, 0.0), (0.3, -0.7), (-0.6, -0.6), (-0.99, 0.0)] {
            let rule = GaussJacobi::new(12, left, right);
            for k in 0..10 {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(k));
                let kf = k as f64;
                let want =
                    gamma(left + kf + 1.0) * gamma(right + 1.0) / gamma(left + right + kf + 2.0);
                assert!(
                    ((got - want) / want).abs() < 1e-13,
                    "({left},{right}) k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn nodes_sorted_and_inside() {
        let rule = GaussJacobi::new(40, -0.5, 0.25);
        let xs: Vec<f64> = rule.mapped(-1.0, 1.0).map(|(x, _)| x).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert!(xs[0] > -1.0 && xs[39] < 1.0);
    }

    #[test]
    fn kronrod_handles_peaks() {
        let eps = 1e-3;
        let (v, _) = adaptive_kronrod(
            |x| eps / (x * x + eps * eps),
            &[-1.0, 0.0, 1.0],
            1e-13,
            1e-13,
            2000,
        );
        let want = 2.0 * (1.0 / eps).atan();
        assert!((v - want).abs() < 1e-11);
    }
}
