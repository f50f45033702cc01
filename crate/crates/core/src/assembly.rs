use crate::basis::{gauss_rule, SlabBasis};
use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix, DenseVector, LuFactorization};
use crate::model::SecondOrderSystem;

/// Which basis table the forcing is tested against.
#[derive(Debug, Clone, Copy)]
pub(crate) enum TestFunctions {
    Values,
    Derivatives,
}

pub(crate) fn default_rhs_quadrature(degree: usize) -> usize {
    degree + 5
}

/// Moments `(f_i, φ^ℓ)` on the slab, laid out system-outer, mode-inner.
pub(crate) fn forcing_moments(
    sys: &SecondOrderSystem,
    basis: &SlabBasis,
    q: usize,
    test: TestFunctions,
) -> Result<DenseVector> {
    let width = basis.len();
    let tab = basis.tabulate(&gauss_rule(q.max(1)));
    let mut out = vec![0.0; sys.dim() * width];
    for p in 0..tab.points.len() {
        let f = sys.force(tab.points[p])?;
        let phi = match test {
            TestFunctions::Values => &tab.values[p],
            TestFunctions::Derivatives => &tab.d1[p],
        };
        let w = tab.weights[p];
        for (i, fi) in f.iter().enumerate() {
            for (l, ph) in phi.iter().enumerate() {
                out[i * width + l] += w * fi * ph;
            }
        }
    }
    Ok(out)
}

/// Adds `trace_i · table[ℓ]` into entry `(i, ℓ)`.
pub(crate) fn add_trace(out: &mut [f64], trace: &[f64], table: &[f64]) {
    let width = table.len();
    for (i, c) in trace.iter().enumerate() {
        for (l, t) in table.iter().enumerate() {
            out[i * width + l] += c * t;
        }
    }
}

pub(crate) fn check_len(context: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// Keeps the factorization of the last slab matrix, keyed on `(r, Δt)`.
#[derive(Debug, Default)]
pub(crate) struct FactorCache {
    key: Option<(usize, u64)>,
    lu: Option<LuFactorization>,
    pub(crate) factorizations: usize,
}

impl FactorCache {
    pub(crate) fn get_or_factor(
        &mut self,
        enabled: bool,
        basis: &SlabBasis,
        assemble: impl FnOnce() -> Result<DenseMatrix>,
    ) -> Result<&LuFactorization> {
        let key = (basis.degree(), basis.dt().to_bits());
        if !(enabled && self.key == Some(key) && self.lu.is_some()) {
            self.lu = Some(lu_factor(&assemble()?)?);
            self.key = Some(key);
            self.factorizations += 1;
        }
        Ok(self.lu.as_ref().expect("just stored"))
    }
}
