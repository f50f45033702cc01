use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dgtime::model::{
    load_matrix_market, make_fd_acoustic, make_oscillator, make_poroelastic_like, CaseTag,
    SecondOrderSystem, TimeFn,
};
use dgtime::DenseMatrix;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dg1,
    Dg2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dg1 => "dg1",
            Method::Dg2 => "dg2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Euclidean,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    CaseA,
    CaseB,
    Custom,
}

impl From<CaseName> for CaseTag {
    fn from(c: CaseName) -> Self {
        match c {
            CaseName::CaseA => CaseTag::CaseA,
            CaseName::CaseB => CaseTag::CaseB,
            CaseName::Custom => CaseTag::Custom,
        }
    }
}

/// Forcing for problems read from files: `f(t) = amplitude · sin(frequency t + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Zero,
    Constant { value: Vec<f64> },
    Sine {
        amplitude: Vec<f64>,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Oscillator {
        omega: f64,
        dims: usize,
        #[serde(default)]
        damping: f64,
    },
    FdAcoustic {
        cells: usize,
        #[serde(default = "default_one")]
        speed: f64,
        #[serde(default = "default_one")]
        length: f64,
    },
    PoroelasticLike {
        dims: usize,
        null_dim: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    MatrixMarket {
        mass: PathBuf,
        #[serde(default)]
        damping: Option<PathBuf>,
        stiffness: PathBuf,
        case: CaseName,
        forcing: ForcingSpec,
        u0: Vec<f64>,
        v0: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub final_time: f64,
    pub time_steps: Vec<f64>,
    pub degrees: Vec<usize>,
    /// Gauss points for forcing moments; default `r + 5`.
    #[serde(default)]
    pub quadrature_rhs: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples_per_slab: usize,
    #[serde(default)]
    pub weighting: Weighting,
}

fn default_samples() -> usize {
    4
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
        if let Some(s) = seed {
            if let ProblemSpec::PoroelasticLike { seed, .. } = &mut cfg.problem {
                *seed = Some(s);
            }
        }
        if let ProblemSpec::MatrixMarket {
            mass,
            damping,
            stiffness,
            ..
        } = &mut cfg.problem
        {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in [Some(mass), damping.as_mut(), Some(stiffness)].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(config_err("final_time must be positive"));
        }
        if self.methods.is_empty() {
            return Err(config_err("methods must list at least one of dg1, dg2"));
        }
        if self.time_steps.is_empty() || self.degrees.is_empty() {
            return Err(config_err("time_steps and degrees must be non-empty"));
        }
        for &dt in &self.time_steps {
            if !(dt > 0.0 && dt < self.final_time) {
                return Err(config_err(format!(
                    "time step {dt} must satisfy 0 < dt < final_time = {}",
                    self.final_time
                )));
            }
            let ratio = self.final_time / dt;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio {
                return Err(config_err(format!(
                    "final_time {} is not a multiple of time step {dt}",
                    self.final_time
                )));
            }
        }
        if self.methods.contains(&Method::Dg2) && self.degrees.contains(&0) {
            return Err(config_err("dg2 requires degree >= 1"));
        }
        if self.quadrature_rhs == Some(0) {
            return Err(config_err("quadrature_rhs must be positive"));
        }
        if let ProblemSpec::PoroelasticLike { seed: None, .. } = self.problem {
            return Err(config_err(
                "poroelastic_like needs a seed (in the problem object or via --seed)",
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// A system together with its exact solution, when one is known.
pub struct Problem {
    pub system: SecondOrderSystem,
    pub exact: Option<Exact>,
}

#[derive(Clone)]
pub struct Exact {
    pub u: TimeFn,
    pub v: TimeFn,
    pub a: TimeFn,
}

fn problem_err(e: dgtime::Error) -> CliError {
    match e {
        dgtime::Error::Io(m) => CliError::Io(m),
        other => CliError::Config(format!("problem definition: {other}")),
    }
}

fn forcing(spec: &ForcingSpec, dim: usize) -> Result<TimeFn, CliError> {
    let check = |v: &Vec<f64>| {
        if v.len() == dim {
            Ok(())
        } else {
            Err(config_err(format!("forcing vector has length {}, system has {dim}", v.len())))
        }
    };
    Ok(match spec.clone() {
        ForcingSpec::Zero => SecondOrderSystem::zero_forcing(dim),
        ForcingSpec::Constant { value } => {
            check(&value)?;
            Arc::new(move |_| value.clone())
        }
        ForcingSpec::Sine {
            amplitude,
            frequency,
            phase,
        } => {
            check(&amplitude)?;
            Arc::new(move |t| {
                let s = (frequency * t + phase).sin();
                amplitude.iter().map(|a| a * s).collect()
            })
        }
    })
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem, CliError> {
        let manufactured = |p: dgtime::ManufacturedProblem| Problem {
            exact: Some(Exact {
                u: p.u_exact,
                v: p.v_exact,
                a: p.a_exact,
            }),
            system: p.system,
        };
        match self {
            ProblemSpec::Oscillator {
                omega,
                dims,
                damping,
            } => make_oscillator(*omega, *dims, *damping)
                .map(manufactured)
                .map_err(problem_err),
            ProblemSpec::FdAcoustic {
                cells,
                speed,
                length,
            } => make_fd_acoustic(*cells, *speed, *length)
                .map(manufactured)
                .map_err(problem_err),
            ProblemSpec::PoroelasticLike {
                dims,
                null_dim,
                seed,
            } => {
                let seed = seed.ok_or_else(|| config_err("poroelastic_like needs a seed"))?;
                make_poroelastic_like(*dims, *null_dim, seed)
                    .map(|p| manufactured(p.problem))
                    .map_err(problem_err)
            }
            ProblemSpec::MatrixMarket {
                mass,
                damping,
                stiffness,
                case,
                forcing: f,
                u0,
                v0,
            } => {
                let m = load_matrix_market(mass).map_err(problem_err)?;
                let a = load_matrix_market(stiffness).map_err(problem_err)?;
                let d = match damping {
                    Some(p) => load_matrix_market(p).map_err(problem_err)?,
                    None => DenseMatrix::zeros(m.rows(), m.cols()),
                };
                let f = forcing(f, m.rows())?;
                let system =
                    SecondOrderSystem::new(m, d, a, f, u0.clone(), v0.clone(), (*case).into())
                        .map_err(problem_err)?;
                Ok(Problem {
                    system,
                    exact: None,
                })
            }
        }
    }
}
