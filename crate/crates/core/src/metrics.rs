//! Energy seminorms, final-time errors, stability ratios and slope fits.

use crate::basis::gauss_rule;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, norm2, quadratic_form, DenseMatrix, DenseVector};
use crate::model::{SecondOrderSystem, Side, TimeField, TimeFn, TimeMesh, Trajectory};

/// `exact − discrete`, evaluated pointwise from callbacks.
pub struct ErrorField<'a> {
    discrete: &'a Trajectory,
    exact: TimeFn,
    exact_derivative: TimeFn,
}

impl<'a> ErrorField<'a> {
    pub fn new(discrete: &'a Trajectory, exact: TimeFn, exact_derivative: TimeFn) -> Self {
        Self {
            discrete,
            exact,
            exact_derivative,
        }
    }
}

fn diff(a: DenseVector, b: DenseVector) -> DenseVector {
    a.iter().zip(&b).map(|(x, y)| x - y).collect()
}

impl TimeField for ErrorField<'_> {
    fn mesh(&self) -> &TimeMesh {
        self.discrete.mesh()
    }

    fn dim(&self) -> usize {
        self.discrete.dim()
    }

    fn value(&self, t: f64, side: Side) -> Result<DenseVector> {
        Ok(diff((self.exact)(t), self.discrete.value(t, side)?))
    }

    fn derivative(&self, t: f64, side: Side) -> Result<DenseVector> {
        Ok(diff((self.exact_derivative)(t), self.discrete.derivative(t, side)?))
    }
}

/// The non-negative pieces whose sum is a squared energy seminorm.
///
/// For `|·|_A` the "rate" field is `u̇`; for `|·|_B` it is `v`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeminormTerms {
    /// `Σ_n ∫ wᵀ D w` over the slabs.
    pub damping: f64,
    pub initial_mass: f64,
    pub jumps_mass: f64,
    pub final_mass: f64,
    pub initial_stiffness: f64,
    pub jumps_stiffness: f64,
    pub final_stiffness: f64,
}

impl SeminormTerms {
    pub fn total(&self) -> f64 {
        self.damping
            + self.initial_mass
            + self.jumps_mass
            + self.final_mass
            + self.initial_stiffness
            + self.jumps_stiffness
            + self.final_stiffness
    }

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.damping,
            self.initial_mass,
            self.jumps_mass,
            self.final_mass,
            self.initial_stiffness,
            self.jumps_stiffness,
            self.final_stiffness,
        ]
    }
}

fn half_form(m: &DenseMatrix, x: &[f64]) -> Result<f64> {
    Ok(0.5 * quadratic_form(m, x)?)
}

fn check_dims(sys: &SecondOrderSystem, field: &dyn TimeField) -> Result<()> {
    if field.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "error field vs system",
            expected: sys.dim(),
            found: field.dim(),
        });
    }
    Ok(())
}

/// Default quadrature for seminorm integrals on a mesh.
pub fn default_quadrature(mesh: &TimeMesh) -> usize {
    mesh.degrees().iter().copied().max().unwrap_or(0) + 5
}

fn slab_integral(
    mesh: &TimeMesh,
    q: usize,
    mut integrand: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let rule = gauss_rule(q.max(1));
    let mut total = 0.0;
    for n in 0..mesh.num_slabs() {
        let (a, b) = mesh.slab(n);
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            total += w * (b - a) * integrand(a + s * (b - a))?;
        }
    }
    Ok(total)
}

/// Terms of `|u|²_A` where `rate = u̇` comes from `field.derivative`.
fn terms_generic(
    sys: &SecondOrderSystem,
    mesh: &TimeMesh,
    value: &dyn Fn(f64, Side) -> Result<DenseVector>,
    rate: &dyn Fn(f64, Side) -> Result<DenseVector>,
    q: usize,
) -> Result<SeminormTerms> {
    let t_end = mesh.final_time();
    let bps = mesh.breakpoints();
    let damping = if sys.d.is_zero() {
        0.0
    } else {
        slab_integral(mesh, q, |t| quadratic_form(&sys.d, &rate(t, Side::Left)?))?
    };
    let mut jumps_mass = 0.0;
    let mut jumps_stiffness = 0.0;
    for &t in &bps[1..bps.len() - 1] {
        let jr = diff(rate(t, Side::Right)?, rate(t, Side::Left)?);
        let jv = diff(value(t, Side::Right)?, value(t, Side::Left)?);
        jumps_mass += half_form(&sys.m, &jr)?;
        jumps_stiffness += half_form(&sys.a, &jv)?;
    }
    Ok(SeminormTerms {
        damping,
        initial_mass: half_form(&sys.m, &rate(0.0, Side::Right)?)?,
        jumps_mass,
        final_mass: half_form(&sys.m, &rate(t_end, Side::Left)?)?,
        initial_stiffness: half_form(&sys.a, &value(0.0, Side::Right)?)?,
        jumps_stiffness,
        final_stiffness: half_form(&sys.a, &value(t_end, Side::Left)?)?,
    })
}

/// Squared-seminorm pieces of `|w|²_A` with `q`-point Gauss integrals.
pub fn seminorm_a_terms(field: &dyn TimeField, sys: &SecondOrderSystem, q: usize) -> Result<SeminormTerms> {
    check_dims(sys, field)?;
    terms_generic(
        sys,
        field.mesh(),
        &|t, s| field.value(t, s),
        &|t, s| field.derivative(t, s),
        q,
    )
}

/// Squared-seminorm pieces of `|(u, v)|²_B`.
pub fn seminorm_b_terms(
    u: &dyn TimeField,
    v: &dyn TimeField,
    sys: &SecondOrderSystem,
    q: usize,
) -> Result<SeminormTerms> {
    check_dims(sys, u)?;
    check_dims(sys, v)?;
    if u.mesh() != v.mesh() {
        return Err(Error::InvalidArgument("u and v live on different meshes".into()));
    }
    terms_generic(sys, u.mesh(), &|t, s| u.value(t, s), &|t, s| v.value(t, s), q)
}

pub fn seminorm_a(field: &dyn TimeField, sys: &SecondOrderSystem) -> Result<f64> {
    let q = default_quadrature(field.mesh());
    Ok(seminorm_a_terms(field, sys, q)?.total().max(0.0).sqrt())
}

pub fn seminorm_b(u: &dyn TimeField, v: &dyn TimeField, sys: &SecondOrderSystem) -> Result<f64> {
    let q = default_quadrature(u.mesh());
    Ok(seminorm_b_terms(u, v, sys, q)?.total().max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub enum Weight {
    Euclidean,
    Mass(DenseMatrix),
}

/// `‖u_ex(T) − u(T⁻)‖` in the chosen weighting.
pub fn l2_final_error(tr: &Trajectory, u_exact: &TimeFn, t: f64, weight: &Weight) -> Result<f64> {
    let e = diff(u_exact(t), tr.evaluate(t, Side::Left)?);
    match weight {
        Weight::Euclidean => Ok(norm2(&e)),
        Weight::Mass(m) => Ok(quadratic_form(m, &e)?.max(0.0).sqrt()),
    }
}

/// One point of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub dt: f64,
    pub degree: usize,
    pub seminorm: f64,
    pub l2_final: f64,
    pub condition: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log line.
    pub residual: f64,
    pub samples: usize,
}

/// Errors below this are treated as saturated at rounding level.
pub const SATURATION_FLOOR: f64 = 1e-12;

/// Least-squares line through `(log Δt, log error)`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(dt, e)| *dt > 0.0 && e.is_finite() && *e >= SATURATION_FLOOR)
        .map(|(dt, e)| (dt.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 unsaturated samples, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all time steps are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        samples: pts.len(),
    })
}

pub fn fit_records(records: &[ErrorRecord], pick: impl Fn(&ErrorRecord) -> f64) -> Result<SlopeFit> {
    fit_slope(&records.iter().map(|r| (r.dt, pick(r))).collect::<Vec<_>>())
}

fn data_functional(sys: &SecondOrderSystem, mesh: &TimeMesh, q: usize) -> Result<f64> {
    let initial = quadratic_form(&sys.a, &sys.u0)? + quadratic_form(&sys.m, &sys.v0)?;
    let chol = cholesky(&sys.d);
    let mut forcing = 0.0;
    let rule = gauss_rule(q.max(1));
    for n in 0..mesh.num_slabs() {
        let (a, b) = mesh.slab(n);
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            let f = sys.force(a + s * (b - a))?;
            if f.iter().all(|&x| x == 0.0) {
                continue;
            }
            let l = chol.as_ref().ok_or(Error::SingularMatrix { pivot: 0 })?;
            forcing += w * (b - a) * norm2(&forward_substitute(l, &f)).powi(2);
        }
    }
    Ok(initial + forcing)
}

/// `L⁻¹ f` for lower-triangular `L`, so `|L⁻¹ f|² = fᵀ D⁻¹ f` when `D = L Lᵀ`.
fn forward_substitute(l: &DenseMatrix, f: &[f64]) -> DenseVector {
    let mut y = vec![0.0; f.len()];
    for i in 0..f.len() {
        let s: f64 = (0..i).map(|j| l[(i, j)] * y[j]).sum();
        y[i] = (f[i] - s) / l[(i, i)];
    }
    y
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 && num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `|u|²_A / (∫ fᵀD⁻¹f + u0ᵀAu0 + v0ᵀMv0)` for a dG2 solution.
pub fn stability_ratio_dg2(sys: &SecondOrderSystem, tr: &Trajectory) -> Result<f64> {
    let q = default_quadrature(tr.mesh());
    let lhs = seminorm_a_terms(tr, sys, q)?.total();
    Ok(ratio(lhs, data_functional(sys, tr.mesh(), q)?))
}

/// `|(u, v)|²_B` over the same data functional, for a dG1 solution.
pub fn stability_ratio_dg1(sys: &SecondOrderSystem, u: &Trajectory, v: &Trajectory) -> Result<f64> {
    let q = default_quadrature(u.mesh());
    let lhs = seminorm_b_terms(u, v, sys, q)?.total();
    Ok(ratio(lhs, data_functional(sys, u.mesh(), q)?))
}

/// `E_n = ½ vᵀMv + ½ uᵀAu` at `t_n⁻`, with `E_0` from the initial data.
pub fn energy_history(
    sys: &SecondOrderSystem,
    u: &Trajectory,
    v: &dyn Fn(usize) -> DenseVector,
) -> Result<Vec<f64>> {
    let mut out = vec![half_form(&sys.m, &sys.v0)? + half_form(&sys.a, &sys.u0)?];
    for n in 0..u.mesh().num_slabs() {
        out.push(half_form(&sys.m, &v(n))? + half_form(&sys.a, &u.right_trace(n))?);
    }
    Ok(out)
}

pub fn energy_history_dg2(sys: &SecondOrderSystem, u: &Trajectory) -> Result<Vec<f64>> {
    energy_history(sys, u, &|n| u.right_derivative_trace(n))
}

pub fn energy_history_dg1(sys: &SecondOrderSystem, u: &Trajectory, v: &Trajectory) -> Result<Vec<f64>> {
    energy_history(sys, u, &|n| v.right_trace(n))
}

/// Largest increase `E_{n+1} − E_n` over the history (0 if none).
pub fn max_energy_increase(history: &[f64]) -> f64 {
    history
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}
