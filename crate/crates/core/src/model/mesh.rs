use crate::error::{Error, Result};

/// Partition `0 = t_0 < t_1 < … < t_N = T` into left-open slabs
/// `I_n = (t_{n-1}, t_n]`, each carrying its own polynomial degree.
///
/// Slabs are indexed from zero in the API: slab `n` spans
/// `(breakpoints[n], breakpoints[n + 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    breakpoints: Vec<f64>,
    steps: Vec<f64>,
    degrees: Vec<usize>,
}

impl TimeMesh {
    pub fn new(breakpoints: Vec<f64>, degrees: Vec<usize>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMesh("need at least one slab".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidMesh(format!(
                "mesh must start at t = 0, got {}",
                breakpoints[0]
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidMesh("non-finite breakpoint".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMesh(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if degrees.len() != breakpoints.len() - 1 {
            return Err(Error::DimensionMismatch {
                context: "mesh degrees",
                expected: breakpoints.len() - 1,
                found: degrees.len(),
            });
        }
        let steps = breakpoints.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            breakpoints,
            steps,
            degrees,
        })
    }

    pub fn uniform(final_time: f64, slabs: usize, degree: usize) -> Result<Self> {
        if slabs == 0 || !(final_time > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "uniform mesh needs T > 0 and at least one slab (T = {final_time}, N = {slabs})"
            )));
        }
        let breakpoints = (0..=slabs)
            .map(|k| final_time * k as f64 / slabs as f64)
            .collect();
        let mut mesh = Self::new(breakpoints, vec![degree; slabs])?;
        // One shared step so equal slabs get bitwise-equal slab matrices.
        mesh.steps = vec![final_time / slabs as f64; slabs];
        Ok(mesh)
    }

    /// Uniform mesh with step `dt`; `T / dt` must be an integer up to rounding.
    pub fn with_step(final_time: f64, dt: f64, degree: usize) -> Result<Self> {
        if !(dt > 0.0) || !(final_time > 0.0) || dt > final_time {
            return Err(Error::InvalidMesh(format!(
                "time step {dt} incompatible with final time {final_time}"
            )));
        }
        let ratio = final_time / dt;
        let slabs = ratio.round();
        if (ratio - slabs).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidMesh(format!(
                "final time {final_time} is not a multiple of the step {dt}"
            )));
        }
        Self::uniform(final_time, slabs as usize, degree)
    }

    pub fn num_slabs(&self) -> usize {
        self.degrees.len()
    }

    pub fn final_time(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, slab: usize) -> usize {
        self.degrees[slab]
    }

    pub fn slab(&self, n: usize) -> (f64, f64) {
        (self.breakpoints[n], self.breakpoints[n + 1])
    }

    /// Step of slab `n`; equals `t_{n+1} − t_n` up to rounding.
    pub fn dt(&self, n: usize) -> f64 {
        self.steps[n]
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    /// Slab `n` with `t_n < t <= t_{n+1}` (left-open convention).
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(t > 0.0 && t <= self.final_time()) {
            return Err(Error::OutOfDomain {
                t,
                what: "(0, T]",
            });
        }
        let idx = self.breakpoints.partition_point(|&b| b < t);
        Ok(idx - 1)
    }

    /// Slab `n` with `t_n <= t < t_{n+1}`, i.e. the one owning `t⁺`.
    pub fn locate_right(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t < self.final_time()) {
            return Err(Error::OutOfDomain {
                t,
                what: "[0, T)",
            });
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        Ok(idx - 1)
    }
}
