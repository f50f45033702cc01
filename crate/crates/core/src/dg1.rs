//! First-order scheme on `u̇ = v`, `M v̇ + D v + A u = f`. Each slab solves
//!
//! ```text
//! [ I ⊗ K    −I ⊗ L2        ] [U]   [G_u]
//! [ A ⊗ L2   M ⊗ K + D ⊗ L2 ] [V] = [G_v]      K = L1 + L3
//! ```
//!
//! by eliminating `U = (I ⊗ L4) G_u + (I ⊗ L5) V`, which leaves
//! `M̂_n V = G_v − (A ⊗ L6) G_u` with `M̂_n = M ⊗ K + D ⊗ L2 + A ⊗ L7`.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::assembly::{
    add_trace, check_len, default_rhs_quadrature, forcing_moments, FactorCache, TestFunctions,
};
use crate::basis::{local_matrices_l, LocalMatricesL, SlabBasis};
use crate::error::Result;
use crate::linalg::{kron_matvec, kron_sum, lu_factor, DenseMatrix, DenseVector, LuFactorization};
use crate::model::{CaseTag, SecondOrderSystem, TimeMesh, Trajectory};

static HIGH_DEGREE_WARNED: AtomicBool = AtomicBool::new(false);

/// The monolithic `2 D_n × 2 D_n` slab matrix, unknowns ordered `[U; V]`.
pub fn assemble_dg1_blocks(sys: &SecondOrderSystem, basis: &SlabBasis) -> Result<DenseMatrix> {
    let l = local_matrices_l(basis)?;
    let k = l.transport();
    let id = DenseMatrix::identity(sys.dim());
    let neg_l2 = l.l2.scaled(-1.0);
    let blocks = [
        [kron_sum(&[(&id, &k)])?, kron_sum(&[(&id, &neg_l2)])?],
        [kron_sum(&[(&sys.a, &l.l2)])?, kron_sum(&[(&sys.m, &k), (&sys.d, &l.l2)])?],
    ];
    let n = sys.dim() * basis.len();
    Ok(DenseMatrix::from_fn(2 * n, 2 * n, |i, j| blocks[i / n][j / n][(i % n, j % n)]))
}

/// `M̂_n = M ⊗ (L1 + L3) + D ⊗ L2 + A ⊗ L7`.
pub fn assemble_dg1_schur(sys: &SecondOrderSystem, l: &LocalMatricesL) -> Result<DenseMatrix> {
    kron_sum(&[(&sys.m, &l.transport()), (&sys.d, &l.l2), (&sys.a, &l.l7)])
}

pub fn assemble_dg1_rhs(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    prev_u: &[f64],
    prev_v: &[f64],
) -> Result<(DenseVector, DenseVector)> {
    assemble_dg1_rhs_with(sys, basis, prev_u, prev_v, default_rhs_quadrature(basis.degree()))
}

/// `(G_u, G_v)` with a `q_rhs`-point Gauss rule for `(f, ψ)`.
pub fn assemble_dg1_rhs_with(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    prev_u: &[f64],
    prev_v: &[f64],
    q_rhs: usize,
) -> Result<(DenseVector, DenseVector)> {
    check_len("previous u trace", prev_u, sys.dim())?;
    check_len("previous v trace", prev_v, sys.dim())?;
    let mut g_u = vec![0.0; sys.dim() * basis.len()];
    add_trace(&mut g_u, prev_u, basis.left_values());
    let mut g_v = forcing_moments(sys, basis, q_rhs, TestFunctions::Values)?;
    add_trace(&mut g_v, &sys.m.matvec(prev_v)?, basis.left_values());
    Ok((g_u, g_v))
}

/// Reduced slab problem plus what is needed to recover `U_n`.
#[derive(Debug, Clone)]
pub struct Dg1SlabSystem {
    pub schur: DenseMatrix,
    pub g_u: DenseVector,
    pub g_v: DenseVector,
    pub locals: LocalMatricesL,
    pub stiffness: DenseMatrix,
    pub t_start: f64,
    pub dt: f64,
    pub degree: usize,
}

impl Dg1SlabSystem {
    pub fn assemble(
        sys: &SecondOrderSystem,
        basis: &SlabBasis,
        prev_u: &[f64],
        prev_v: &[f64],
    ) -> Result<Self> {
        let locals = local_matrices_l(basis)?;
        let (g_u, g_v) = assemble_dg1_rhs(sys, basis, prev_u, prev_v)?;
        Ok(Self {
            schur: assemble_dg1_schur(sys, &locals)?,
            g_u,
            g_v,
            locals,
            stiffness: sys.a.clone(),
            t_start: basis.t_start(),
            dt: basis.dt(),
            degree: basis.degree(),
        })
    }

    pub fn solve_with(&self, lu: &LuFactorization) -> Result<(DenseVector, DenseVector)> {
        solve_reduced(&self.stiffness, &self.locals, &self.g_u, &self.g_v, lu)
    }
}

/// `V = M̂_n⁻¹ (G_v − (A ⊗ L6) G_u)`, then `U = (I ⊗ L5) V + (I ⊗ L4) G_u`.
fn solve_reduced(
    a: &DenseMatrix,
    l: &LocalMatricesL,
    g_u: &[f64],
    g_v: &[f64],
    schur_lu: &LuFactorization,
) -> Result<(DenseVector, DenseVector)> {
    let corr = kron_matvec(a, &l.l6, g_u)?;
    let rhs: Vec<f64> = g_v.iter().zip(&corr).map(|(g, c)| g - c).collect();
    let v = schur_lu.solve(&rhs)?;
    let id = DenseMatrix::identity(a.rows());
    let mut u = kron_matvec(&id, &l.l5, &v)?;
    for (x, y) in u.iter_mut().zip(kron_matvec(&id, &l.l4, g_u)?) {
        *x += y;
    }
    Ok((u, v))
}

/// Solves the reduced system for `V_n`, then recovers `U_n`.
pub fn schur_reduce_and_solve(slab: &Dg1SlabSystem) -> Result<(DenseVector, DenseVector)> {
    slab.solve_with(&lu_factor(&slab.schur)?)
}

/// Direct LU solve of the monolithic block system, split into `(U, V)`.
pub fn monolithic_solve(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    g_u: &[f64],
    g_v: &[f64],
) -> Result<(DenseVector, DenseVector)> {
    let blocks = assemble_dg1_blocks(sys, basis)?;
    let rhs: Vec<f64> = g_u.iter().chain(g_v).copied().collect();
    let mut x = lu_factor(&blocks)?.solve(&rhs)?;
    let v = x.split_off(g_u.len());
    Ok((x, v))
}

#[derive(Debug, Clone, Copy)]
pub struct Dg1Solver {
    /// Gauss points for the forcing moments; `None` means `r + 5`.
    pub rhs_quadrature: Option<usize>,
    pub reuse_factorization: bool,
}

impl Default for Dg1Solver {
    fn default() -> Self {
        Self {
            rhs_quadrature: None,
            reuse_factorization: true,
        }
    }
}

impl Dg1Solver {
    pub fn march(&self, sys: &SecondOrderSystem, mesh: &TimeMesh) -> Result<(Trajectory, Trajectory)> {
        self.march_counting(sys, mesh).map(|(u, v, _)| (u, v))
    }

    pub fn march_counting(
        &self,
        sys: &SecondOrderSystem,
        mesh: &TimeMesh,
    ) -> Result<(Trajectory, Trajectory, usize)> {
        if sys.case == CaseTag::CaseA
            && mesh.degrees().iter().any(|&r| r >= 2)
            && !HIGH_DEGREE_WARNED.swap(true, Ordering::Relaxed)
        {
            log::warn!("dG1 energy stability for undamped systems is only established for r <= 1");
        }
        let mut u = Trajectory::zeros(mesh.clone(), sys.dim())?;
        let mut v = Trajectory::zeros(mesh.clone(), sys.dim())?;
        let mut cache = FactorCache::default();
        let mut prev_u = sys.u0.clone();
        let mut prev_v = sys.v0.clone();
        let mut locals: Option<(usize, u64, LocalMatricesL)> = None;
        for n in 0..mesh.num_slabs() {
            let basis = u.basis(n).clone();
            let key = (basis.degree(), basis.dt().to_bits());
            if locals.as_ref().map(|(r, h, _)| (*r, *h)) != Some(key) {
                locals = Some((key.0, key.1, local_matrices_l(&basis)?));
            }
            let l = &locals.as_ref().expect("just set").2;
            let q = self
                .rhs_quadrature
                .unwrap_or_else(|| default_rhs_quadrature(basis.degree()));
            let (g_u, g_v) = assemble_dg1_rhs_with(sys, &basis, &prev_u, &prev_v, q)?;
            let lu = cache.get_or_factor(self.reuse_factorization, &basis, || {
                assemble_dg1_schur(sys, l)
            })?;
            let (un, vn) = solve_reduced(&sys.a, l, &g_u, &g_v, lu)?;
            u.set_block(n, un)?;
            v.set_block(n, vn)?;
            prev_u = u.right_trace(n);
            prev_v = v.right_trace(n);
        }
        Ok((u, v, cache.factorizations))
    }
}

pub fn march_dg1(sys: &SecondOrderSystem, mesh: &TimeMesh) -> Result<(Trajectory, Trajectory)> {
    Dg1Solver::default().march(sys, mesh)
}
