use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, symmetric_eigenvalues, DenseMatrix, DenseVector};

/// A vector-valued function of time. Must be pure and reentrant.
pub type TimeFn = Arc<dyn Fn(f64) -> DenseVector + Send + Sync>;
pub type Forcing = TimeFn;

/// Which structural assumptions the matrices are validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// `M`, `A` positive definite and `D = 0`.
    CaseA,
    /// `M`, `D` positive definite and `A` positive semidefinite.
    CaseB,
    /// Only symmetry and dimensions are checked.
    Custom,
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// `M ü + D u̇ + A u = f`, `u(0) = u0`, `u̇(0) = v0`.
#[derive(Clone)]
pub struct SecondOrderSystem {
    pub m: DenseMatrix,
    pub d: DenseMatrix,
    pub a: DenseMatrix,
    pub forcing: Forcing,
    pub u0: DenseVector,
    pub v0: DenseVector,
    pub case: CaseTag,
}

impl fmt::Debug for SecondOrderSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecondOrderSystem")
            .field("dim", &self.dim())
            .field("case", &self.case)
            .field("u0", &self.u0)
            .field("v0", &self.v0)
            .finish_non_exhaustive()
    }
}

impl SecondOrderSystem {
    pub fn new(
        m: DenseMatrix,
        d: DenseMatrix,
        a: DenseMatrix,
        forcing: Forcing,
        u0: DenseVector,
        v0: DenseVector,
        case: CaseTag,
    ) -> Result<Self> {
        let sys = Self {
            m,
            d,
            a,
            forcing,
            u0,
            v0,
            case,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn force(&self, t: f64) -> Result<DenseVector> {
        let f = (self.forcing)(t);
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "forcing",
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(f)
    }

    /// Same matrices and case, different data.
    pub fn with_data(&self, forcing: Forcing, u0: DenseVector, v0: DenseVector) -> Result<Self> {
        Self::new(
            self.m.clone(),
            self.d.clone(),
            self.a.clone(),
            forcing,
            u0,
            v0,
            self.case,
        )
    }

    pub fn zero_forcing(dim: usize) -> Forcing {
        Arc::new(move |_| vec![0.0; dim])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.m.rows();
        for (name, mat) in [("M", &self.m), ("D", &self.d), ("A", &self.a)] {
            if !mat.is_square() {
                return Err(Error::NotSquare {
                    rows: mat.rows(),
                    cols: mat.cols(),
                });
            }
            if mat.rows() != n {
                return Err(Error::DimensionMismatch {
                    context: "system matrix size",
                    expected: n,
                    found: mat.rows(),
                });
            }
            if !mat.is_symmetric(SYMMETRY_TOL) {
                return Err(Error::NotSymmetric(name));
            }
        }
        for v in [&self.u0, &self.v0] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "initial data",
                    expected: n,
                    found: v.len(),
                });
            }
        }
        match self.case {
            CaseTag::CaseA => {
                if !is_positive_definite(&self.m) {
                    return Err(Error::NotPositiveDefinite("M"));
                }
                if !self.d.is_zero() {
                    return Err(Error::NonzeroDamping);
                }
                if !is_positive_definite(&self.a) {
                    return Err(Error::NotPositiveDefinite("A"));
                }
            }
            CaseTag::CaseB => {
                if !is_positive_definite(&self.m) {
                    return Err(Error::NotPositiveDefinite("M"));
                }
                if !is_positive_definite(&self.d) {
                    return Err(Error::NotPositiveDefinite("D"));
                }
                let min = symmetric_eigenvalues(&self.a)?[0];
                if min < -PSD_TOL * self.a.norm_inf() {
                    return Err(Error::IndefiniteStiffness { min_eigenvalue: min });
                }
            }
            CaseTag::Custom => {}
        }
        Ok(())
    }
}
