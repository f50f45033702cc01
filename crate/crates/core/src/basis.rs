//! Per-slab polynomial machinery: quadrature, the Lagrange basis on
//! Gauss–Lobatto nodes, the local time matrices of both formulations and
//! the right-endpoint projector.
//!
//! All bases live on the reference interval `(0, 1]` and are mapped affinely
//! onto the slab `(t_start, t_end]`. Derivative tables are stored in physical
//! time, so every local matrix already carries its `Δt` scaling.

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix};

/// Quadrature nodes and positive weights on some interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine image of a rule given on `(-1, 1)` onto `(a, b)`.
    pub fn mapped(&self, from: (f64, f64), to: (f64, f64)) -> QuadratureRule {
        let scale = (to.1 - to.0) / (from.1 - from.0);
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| to.0 + (x - from.0) * scale).collect(),
            weights: self.weights.iter().map(|w| w * scale).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `q`-point Gauss–Legendre rule on `(-1, 1)`.
pub fn gauss_legendre(q: usize) -> QuadratureRule {
    assert!(q >= 1, "quadrature needs at least one point");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

/// `q`-point Gauss–Legendre rule on the reference interval `(0, 1)`.
pub fn gauss_rule(q: usize) -> QuadratureRule {
    gauss_legendre(q).mapped((-1.0, 1.0), (0.0, 1.0))
}

/// Gauss–Lobatto nodes on `[0, 1]`, ascending; `n = 1` gives the right endpoint.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![1.0];
    }
    let degree = n - 1;
    let mut x: Vec<f64> = (0..n)
        .map(|i| -(std::f64::consts::PI * i as f64 / degree as f64).cos())
        .collect();
    for xi in x.iter_mut().take(n - 1).skip(1) {
        for _ in 0..100 {
            let (p, _) = legendre(degree, *xi);
            let (pm1, _) = legendre(degree - 1, *xi);
            let dx = (*xi * p - pm1) / (n as f64 * p);
            *xi -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
    }
    x[0] = -1.0;
    x[n - 1] = 1.0;
    x.iter().map(|v| 0.5 * (v + 1.0)).collect()
}

/// Values, first and second derivatives of the Lagrange polynomials through
/// `nodes`, evaluated at `x` (reference coordinates).
fn lagrange_eval(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut val = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for l in 0..n {
        let xl = nodes[l];
        let denom: f64 = (0..n).filter(|&k| k != l).map(|k| xl - nodes[k]).product();
        let factor = |skip: &[usize]| -> f64 {
            (0..n)
                .filter(|k| *k != l && !skip.contains(k))
                .map(|k| x - nodes[k])
                .product()
        };
        val[l] = factor(&[]) / denom;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for j in (0..n).filter(|&j| j != l) {
            s1 += factor(&[j]);
            for i in (0..n).filter(|&i| i != l && i != j) {
                s2 += factor(&[i, j]);
            }
        }
        d1[l] = s1 / denom;
        d2[l] = s2 / denom;
    }
    (val, d1, d2)
}

/// Basis functions tabulated at a set of physical points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[p][l] = ψ^l(points[p])`
    pub values: Vec<Vec<f64>>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<f64>>,
}

/// Lagrange basis of degree `r` on Lobatto nodes, mapped onto one slab.
#[derive(Debug, Clone)]
pub struct SlabBasis {
    degree: usize,
    t_start: f64,
    t_end: f64,
    dt: f64,
    nodes: Vec<f64>,
    quad: Tabulation,
    left: Tabulation,
    right: Tabulation,
}

pub fn build_basis(r: usize, t_start: f64, t_end: f64) -> Result<SlabBasis> {
    SlabBasis::new(r, t_start, t_end)
}

impl SlabBasis {
    pub fn new(degree: usize, t_start: f64, t_end: f64) -> Result<Self> {
        Self::with_step(degree, t_start, t_end - t_start)
    }

    /// Slab `(t_start, t_start + dt]`. Every table depends on `(degree, dt)`
    /// only, so slabs of equal step share bitwise-identical local matrices.
    pub fn with_step(degree: usize, t_start: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !t_start.is_finite() || !dt.is_finite() {
            return Err(Error::EmptySlab {
                start: t_start,
                end: t_start + dt,
            });
        }
        let mut basis = SlabBasis {
            degree,
            t_start,
            t_end: t_start + dt,
            dt,
            nodes: lobatto_nodes(degree + 1),
            quad: empty_tabulation(),
            left: empty_tabulation(),
            right: empty_tabulation(),
        };
        basis.quad = basis.tabulate(&gauss_rule(degree + 2));
        basis.left = basis.tabulate_reference(&[0.0]);
        basis.right = basis.tabulate_reference(&[1.0]);
        Ok(basis)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Lobatto nodes in physical time.
    pub fn nodes(&self) -> Vec<f64> {
        self.nodes.iter().map(|&s| self.to_physical(s)).collect()
    }

    pub fn reference_nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn to_reference(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt()
    }

    fn to_physical(&self, s: f64) -> f64 {
        self.t_start + s * self.dt()
    }

    /// Tabulates at the nodes of a reference `(0, 1)` rule; weights become physical.
    pub fn tabulate(&self, reference_rule: &QuadratureRule) -> Tabulation {
        let mut tab = self.tabulate_reference(&reference_rule.nodes);
        tab.weights = reference_rule.weights.iter().map(|w| w * self.dt()).collect();
        tab
    }

    /// Tables at reference coordinates `s ∈ [0, 1]`; weights are zero.
    pub fn tabulate_reference(&self, reference_points: &[f64]) -> Tabulation {
        let h = self.dt();
        let mut tab = empty_tabulation();
        for &s in reference_points {
            let (v, d1, d2) = lagrange_eval(&self.nodes, s);
            tab.values.push(v);
            tab.d1.push(d1.into_iter().map(|x| x / h).collect());
            tab.d2.push(d2.into_iter().map(|x| x / (h * h)).collect());
        }
        tab.points = reference_points.iter().map(|&s| self.to_physical(s)).collect();
        tab.weights = vec![0.0; reference_points.len()];
        tab
    }

    /// Tables at the quadrature rule used for the local matrices (`q = r + 2`).
    pub fn matrix_quadrature(&self) -> &Tabulation {
        &self.quad
    }

    /// Basis values at `t_start⁺`.
    pub fn left_values(&self) -> &[f64] {
        &self.left.values[0]
    }

    pub fn left_derivatives(&self) -> &[f64] {
        &self.left.d1[0]
    }

    /// Basis values at `t_end⁻`.
    pub fn right_values(&self) -> &[f64] {
        &self.right.values[0]
    }

    pub fn right_derivatives(&self) -> &[f64] {
        &self.right.d1[0]
    }

    pub fn values_at(&self, t: f64) -> Vec<f64> {
        lagrange_eval(&self.nodes, self.to_reference(t)).0
    }

    pub fn derivatives_at(&self, t: f64) -> Vec<f64> {
        let h = self.dt();
        lagrange_eval(&self.nodes, self.to_reference(t))
            .1
            .into_iter()
            .map(|x| x / h)
            .collect()
    }

    pub fn second_derivatives_at(&self, t: f64) -> Vec<f64> {
        let h = self.dt();
        lagrange_eval(&self.nodes, self.to_reference(t))
            .2
            .into_iter()
            .map(|x| x / (h * h))
            .collect()
    }

    /// Evaluates the scalar polynomial with nodal coefficients `coeffs` at `t`.
    pub fn evaluate(&self, coeffs: &[f64], t: f64) -> f64 {
        self.values_at(t).iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }

    /// Nodal interpolant coefficients of `f`.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }
}

fn empty_tabulation() -> Tabulation {
    Tabulation {
        points: Vec::new(),
        weights: Vec::new(),
        values: Vec::new(),
        d1: Vec::new(),
        d2: Vec::new(),
    }
}

/// Local matrices of the second-order formulation.
///
/// Entry `(ℓ, m)` pairs test function `ℓ` with trial function `m`:
/// `N1 = (ψ̈^m, ψ̇^ℓ)`, `N2 = (ψ̇^m, ψ̇^ℓ)`, `N3 = (ψ^m, ψ̇^ℓ)`,
/// `N4 = ψ̇^m(t⁺) ψ̇^ℓ(t⁺)`, `N5 = ψ^m(t⁺) ψ^ℓ(t⁺)` at the slab's left end.
#[derive(Debug, Clone)]
pub struct LocalMatricesN {
    pub n1: DenseMatrix,
    pub n2: DenseMatrix,
    pub n3: DenseMatrix,
    pub n4: DenseMatrix,
    pub n5: DenseMatrix,
}

/// Local matrices of the first-order formulation, `(L1)_{ℓm} = (ψ̇^m, ψ^ℓ)`,
/// `(L2)_{ℓm} = (ψ^m, ψ^ℓ)`, `(L3)_{ℓm} = ψ^m(t⁺) ψ^ℓ(t⁺)` and the derived
/// `L4 = (L1 + L3)⁻¹`, `L5 = L4 L2`, `L6 = L2 L4`, `L7 = L2 L4 L2`.
#[derive(Debug, Clone)]
pub struct LocalMatricesL {
    pub l1: DenseMatrix,
    pub l2: DenseMatrix,
    pub l3: DenseMatrix,
    pub l4: DenseMatrix,
    pub l5: DenseMatrix,
    pub l6: DenseMatrix,
    pub l7: DenseMatrix,
}

impl LocalMatricesL {
    /// `L1 + L3`, the time block shared by both diagonal blocks.
    pub fn transport(&self) -> DenseMatrix {
        self.l1.add(&self.l3).expect("same shape")
    }
}

fn integral_matrix(tab: &Tabulation, test: &[Vec<f64>], trial: &[Vec<f64>], n: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(n, n);
    for p in 0..tab.points.len() {
        let w = tab.weights[p];
        for l in 0..n {
            for m in 0..n {
                out[(l, m)] += w * trial[p][m] * test[p][l];
            }
        }
    }
    out
}

fn outer(u: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(u.len(), u.len(), |l, m| u[m] * u[l])
}

pub fn local_matrices_n(b: &SlabBasis) -> Result<LocalMatricesN> {
    if b.degree() < 1 {
        return Err(Error::DegreeTooLow {
            degree: b.degree(),
            min: 1,
        });
    }
    let n = b.len();
    let tab = b.matrix_quadrature();
    Ok(LocalMatricesN {
        n1: integral_matrix(tab, &tab.d1, &tab.d2, n),
        n2: integral_matrix(tab, &tab.d1, &tab.d1, n),
        n3: integral_matrix(tab, &tab.d1, &tab.values, n),
        n4: outer(b.left_derivatives()),
        n5: outer(b.left_values()),
    })
}

pub fn local_matrices_l(b: &SlabBasis) -> Result<LocalMatricesL> {
    let n = b.len();
    let tab = b.matrix_quadrature();
    let l1 = integral_matrix(tab, &tab.values, &tab.d1, n);
    let l2 = integral_matrix(tab, &tab.values, &tab.values, n);
    let l3 = outer(b.left_values());
    let l4 = lu_factor(&l1.add(&l3)?)?.inverse();
    let l5 = l4.matmul(&l2)?;
    let l6 = l2.matmul(&l4)?;
    let l7 = l6.matmul(&l2)?;
    Ok(LocalMatricesL {
        l1,
        l2,
        l3,
        l4,
        l5,
        l6,
        l7,
    })
}

/// Right-endpoint projection of `u` onto polynomials of degree `r` on `(a, b]`.
///
/// The result is the nodal coefficient vector in `build_basis(r, a, b)`. The
/// orthogonality conditions are tested against Legendre polynomials and
/// integrated with a `q`-point Gauss rule.
pub fn project(r: usize, u: impl Fn(f64) -> f64, a: f64, b: f64, q: usize) -> Result<Vec<f64>> {
    let basis = SlabBasis::new(r, a, b)?;
    let n = r + 1;
    let tab = basis.tabulate(&gauss_rule(q.max(n)));
    let mut sys = DenseMatrix::zeros(n, n);
    let mut rhs = vec![0.0; n];

    sys.row_mut(0).copy_from_slice(basis.right_values());
    rhs[0] = u(b);
    for k in 0..r {
        for p in 0..tab.points.len() {
            let s = 2.0 * (tab.points[p] - a) / (b - a) - 1.0;
            let pk = legendre(k, s).0;
            let w = tab.weights[p] * pk;
            for m in 0..n {
                sys[(k + 1, m)] += w * tab.values[p][m];
            }
            rhs[k + 1] += w * u(tab.points[p]);
        }
    }
    lu_factor(&sys)?.solve(&rhs)
}
