//! Second-order scheme: find `u` piecewise polynomial of degree `r_n ≥ 1`
//! such that, slab by slab,
//!
//! `(M ü + D u̇ + A u, ẇ) + M u̇(t⁺)·ẇ(t⁺) + A u(t⁺)·w(t⁺)
//!     = (f, ẇ) + M u̇(t⁻)·ẇ(t⁺) + A u(t⁻)·w(t⁺)`
//!
//! with `t = t_{n-1}` and `(u(0⁻), u̇(0⁻)) = (u0, v0)`.

use crate::assembly::{
    add_trace, check_len, default_rhs_quadrature, forcing_moments, FactorCache, TestFunctions,
};
use crate::basis::{local_matrices_n, SlabBasis};
use crate::error::{Error, Result};
use crate::linalg::{kron_sum, DenseMatrix, DenseVector};
use crate::model::{SecondOrderSystem, TimeMesh, Trajectory};

/// `M_n = M ⊗ (N1 + N4) + D ⊗ N2 + A ⊗ (N3 + N5)`.
pub fn assemble_dg2_matrix(sys: &SecondOrderSystem, basis: &SlabBasis) -> Result<DenseMatrix> {
    let n = local_matrices_n(basis)?;
    let mass = n.n1.add(&n.n4)?;
    let stiff = n.n3.add(&n.n5)?;
    kron_sum(&[(&sys.m, &mass), (&sys.d, &n.n2), (&sys.a, &stiff)])
}

pub fn assemble_dg2_rhs(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    prev_u: &[f64],
    prev_v: &[f64],
) -> Result<DenseVector> {
    assemble_dg2_rhs_with(sys, basis, prev_u, prev_v, default_rhs_quadrature(basis.degree()))
}

/// Right-hand side with a `q_rhs`-point Gauss rule for the forcing moments.
pub fn assemble_dg2_rhs_with(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    prev_u: &[f64],
    prev_v: &[f64],
    q_rhs: usize,
) -> Result<DenseVector> {
    check_len("previous u trace", prev_u, sys.dim())?;
    check_len("previous u' trace", prev_v, sys.dim())?;
    let mut rhs = forcing_moments(sys, basis, q_rhs, TestFunctions::Derivatives)?;
    add_trace(&mut rhs, &sys.m.matvec(prev_v)?, basis.left_derivatives());
    add_trace(&mut rhs, &sys.a.matvec(prev_u)?, basis.left_values());
    Ok(rhs)
}

/// One assembled slab problem `M_n U_n = F_n`.
#[derive(Debug, Clone)]
pub struct Dg2SlabSystem {
    pub matrix: DenseMatrix,
    pub rhs: DenseVector,
    pub t_start: f64,
    pub dt: f64,
    pub degree: usize,
}

impl Dg2SlabSystem {
    pub fn assemble(
        sys: &SecondOrderSystem,
        basis: &SlabBasis,
        prev_u: &[f64],
        prev_v: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            matrix: assemble_dg2_matrix(sys, basis)?,
            rhs: assemble_dg2_rhs(sys, basis, prev_u, prev_v)?,
            t_start: basis.t_start(),
            dt: basis.dt(),
            degree: basis.degree(),
        })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn solve(&self) -> Result<DenseVector> {
        crate::linalg::lu_factor(&self.matrix)?.solve(&self.rhs)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dg2Solver {
    /// Gauss points for the forcing moments; `None` means `r + 5`.
    pub rhs_quadrature: Option<usize>,
    pub reuse_factorization: bool,
}

impl Default for Dg2Solver {
    fn default() -> Self {
        Self {
            rhs_quadrature: None,
            reuse_factorization: true,
        }
    }
}

impl Dg2Solver {
    pub fn march(&self, sys: &SecondOrderSystem, mesh: &TimeMesh) -> Result<Trajectory> {
        self.march_counting(sys, mesh).map(|(tr, _)| tr)
    }

    /// Also returns how many slab matrices were factorized.
    pub fn march_counting(
        &self,
        sys: &SecondOrderSystem,
        mesh: &TimeMesh,
    ) -> Result<(Trajectory, usize)> {
        if let Some(&degree) = mesh.degrees().iter().find(|&&r| r < 1) {
            return Err(Error::DegreeTooLow { degree, min: 1 });
        }
        let mut tr = Trajectory::zeros(mesh.clone(), sys.dim())?;
        let mut cache = FactorCache::default();
        let mut prev_u = sys.u0.clone();
        let mut prev_v = sys.v0.clone();
        for n in 0..mesh.num_slabs() {
            let basis = tr.basis(n).clone();
            let q = self
                .rhs_quadrature
                .unwrap_or_else(|| default_rhs_quadrature(basis.degree()));
            let rhs = assemble_dg2_rhs_with(sys, &basis, &prev_u, &prev_v, q)?;
            let lu = cache.get_or_factor(self.reuse_factorization, &basis, || {
                assemble_dg2_matrix(sys, &basis)
            })?;
            tr.set_block(n, lu.solve(&rhs)?)?;
            prev_u = tr.right_trace(n);
            prev_v = tr.right_derivative_trace(n);
        }
        Ok((tr, cache.factorizations))
    }
}

pub fn march_dg2(sys: &SecondOrderSystem, mesh: &TimeMesh) -> Result<Trajectory> {
    Dg2Solver::default().march(sys, mesh)
}
