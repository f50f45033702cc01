use crate::basis::SlabBasis;
use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::model::TimeMesh;

/// One-sided limit selector: `Left` reads `w(t⁻)`, `Right` reads `w(t⁺)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A vector field on `(0, T]` that is smooth inside every slab of a mesh.
pub trait TimeField {
    fn mesh(&self) -> &TimeMesh;
    fn dim(&self) -> usize;
    fn value(&self, t: f64, side: Side) -> Result<DenseVector>;
    fn derivative(&self, t: f64, side: Side) -> Result<DenseVector>;

    /// `w(t_n⁺) − w(t_n⁻)` at interior breakpoint `n` (`1 <= n <= N − 1`).
    fn jump(&self, n: usize) -> Result<DenseVector> {
        let t = interior_breakpoint(self.mesh(), n)?;
        let plus = self.value(t, Side::Right)?;
        let minus = self.value(t, Side::Left)?;
        Ok(plus.iter().zip(&minus).map(|(p, m)| p - m).collect())
    }

    fn derivative_jump(&self, n: usize) -> Result<DenseVector> {
        let t = interior_breakpoint(self.mesh(), n)?;
        let plus = self.derivative(t, Side::Right)?;
        let minus = self.derivative(t, Side::Left)?;
        Ok(plus.iter().zip(&minus).map(|(p, m)| p - m).collect())
    }
}

fn interior_breakpoint(mesh: &TimeMesh, n: usize) -> Result<f64> {
    if n == 0 || n >= mesh.num_slabs() {
        return Err(Error::OutOfDomain {
            t: n as f64,
            what: "interior breakpoint index 1..N-1",
        });
    }
    Ok(mesh.breakpoints()[n])
}

/// Piecewise polynomial in time with values in `R^{N_h}`.
///
/// Slab `n` stores `N_h (r_n + 1)` nodal coefficients ordered with the
/// system index outer and the time-mode index inner, the same layout the
/// Kronecker-assembled slab systems use.
#[derive(Debug, Clone)]
pub struct Trajectory {
    mesh: TimeMesh,
    dim: usize,
    blocks: Vec<DenseVector>,
    bases: Vec<SlabBasis>,
}

impl Trajectory {
    pub fn zeros(mesh: TimeMesh, dim: usize) -> Result<Self> {
        let bases = (0..mesh.num_slabs())
            .map(|n| {
                let (a, _) = mesh.slab(n);
                SlabBasis::with_step(mesh.degree(n), a, mesh.dt(n))
            })
            .collect::<Result<Vec<_>>>()?;
        let blocks = (0..mesh.num_slabs())
            .map(|n| vec![0.0; dim * (mesh.degree(n) + 1)])
            .collect();
        Ok(Self {
            mesh,
            dim,
            blocks,
            bases,
        })
    }

    pub fn from_blocks(mesh: TimeMesh, dim: usize, blocks: Vec<DenseVector>) -> Result<Self> {
        let mut tr = Self::zeros(mesh, dim)?;
        if blocks.len() != tr.blocks.len() {
            return Err(Error::DimensionMismatch {
                context: "trajectory slab count",
                expected: tr.blocks.len(),
                found: blocks.len(),
            });
        }
        for (n, b) in blocks.into_iter().enumerate() {
            tr.set_block(n, b)?;
        }
        Ok(tr)
    }

    pub fn set_block(&mut self, n: usize, coeffs: DenseVector) -> Result<()> {
        let expected = self.dim * (self.mesh.degree(n) + 1);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "trajectory slab block",
                expected,
                found: coeffs.len(),
            });
        }
        self.blocks[n] = coeffs;
        Ok(())
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, n: usize) -> &[f64] {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[DenseVector] {
        &self.blocks
    }

    pub fn basis(&self, n: usize) -> &SlabBasis {
        &self.bases[n]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    fn combine(&self, n: usize, weights: &[f64]) -> DenseVector {
        let width = weights.len();
        self.blocks[n]
            .chunks_exact(width)
            .map(|c| c.iter().zip(weights).map(|(a, w)| a * w).sum())
            .collect()
    }

    /// Polynomial of slab `n` evaluated at any `t`, extrapolating if needed.
    pub fn slab_value(&self, n: usize, t: f64) -> DenseVector {
        self.combine(n, &self.bases[n].values_at(t))
    }

    pub fn slab_derivative(&self, n: usize, t: f64) -> DenseVector {
        self.combine(n, &self.bases[n].derivatives_at(t))
    }

    pub fn slab_second_derivative(&self, n: usize, t: f64) -> DenseVector {
        self.combine(n, &self.bases[n].second_derivatives_at(t))
    }

    /// Value at `t_{n+1}⁻`, the right end of slab `n`.
    pub fn right_trace(&self, n: usize) -> DenseVector {
        self.combine(n, self.bases[n].right_values())
    }

    pub fn right_derivative_trace(&self, n: usize) -> DenseVector {
        self.combine(n, self.bases[n].right_derivatives())
    }

    fn owning_slab(&self, t: f64, side: Side) -> Result<usize> {
        match side {
            Side::Left => self.mesh.locate(t),
            Side::Right => self.mesh.locate_right(t),
        }
    }

    pub fn evaluate(&self, t: f64, side: Side) -> Result<DenseVector> {
        let n = self.owning_slab(t, side)?;
        Ok(self.slab_value(n, t))
    }

    pub fn evaluate_derivative(&self, t: f64, side: Side) -> Result<DenseVector> {
        let n = self.owning_slab(t, side)?;
        Ok(self.slab_derivative(n, t))
    }

    pub fn evaluate_second_derivative(&self, t: f64, side: Side) -> Result<DenseVector> {
        let n = self.owning_slab(t, side)?;
        Ok(self.slab_second_derivative(n, t))
    }
}

impl TimeField for Trajectory {
    fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: f64, side: Side) -> Result<DenseVector> {
        self.evaluate(t, side)
    }

    fn derivative(&self, t: f64, side: Side) -> Result<DenseVector> {
        self.evaluate_derivative(t, side)
    }
}
