//! Flags, the flat JSON config file, and validation into resolved settings.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use trilfa::discretization::{ProblemKind, ProblemSpec};
use trilfa::lfa::{omega_vector, KGridConfig};
use trilfa::smoother::{BlockSpec, LocalSolver};
use trilfa_mg::cycle::CycleKind;
use trilfa_mg::experiments::DEFAULT_SEED;
use trilfa_mg::mesh::MAX_LEVEL;

use crate::error::{usage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Stokes,
    Curlcurl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherName {
    Full,
    Diag,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Smooth,
    Twogrid,
    Threegrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum Cycle {
    #[value(name = "V")]
    V,
    #[value(name = "W")]
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Md,
    Csv,
    Json,
}

/// Options shared by every command. Each may also come from `--config`, whose keys
/// are the flag names without dashes in front.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    #[arg(long, value_enum, global = true)]
    pub problem: Option<Problem>,
    #[arg(long, value_enum, global = true)]
    pub smoother: Option<SmootherName>,
    #[arg(long, value_enum, global = true)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum, global = true)]
    pub cycle: Option<Cycle>,
    #[arg(long, global = true)]
    pub nu1: Option<usize>,
    #[arg(long, global = true)]
    pub nu2: Option<usize>,
    /// Total smoothing steps, split as `(ceil(nu/2), floor(nu/2))`.
    #[arg(long, global = true)]
    pub nu: Option<usize>,
    #[arg(long, global = true)]
    pub omega_u: Option<f64>,
    #[arg(long, global = true)]
    pub omega_p: Option<f64>,
    #[arg(long, global = true)]
    pub freq_n: Option<usize>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! prefer {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Options { $($f: $a.$f.or($b.$f),)* config: None }
    };
}

impl Options {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set here win over `other`.
    pub fn or(self, other: Options) -> Options {
        prefer!(
            self, other, problem, smoother, mode, cycle, nu1, nu2, nu, omega_u, omega_p, freq_n, levels, tol,
            seed, format, out
        )
    }

    /// Reads `--config` if given and lets the flags override it.
    pub fn with_file(self) -> Result<Options> {
        match &self.config {
            Some(p) => {
                let file = Options::from_file(p)?;
                Ok(self.or(file))
            }
            None => Ok(self),
        }
    }

    pub fn resolve(&self) -> Result<Settings> {
        let problem = self.problem.unwrap_or(Problem::Stokes);
        let smoother = match (problem, self.smoother) {
            (Problem::Stokes, None) => SmootherName::Diag,
            (Problem::Curlcurl, None) => SmootherName::Vertex,
            (Problem::Stokes, Some(SmootherName::Vertex)) => {
                return usage("smoother 'vertex' belongs to the curl-curl problem")
            }
            (Problem::Curlcurl, Some(s)) if s != SmootherName::Vertex => {
                return usage("the curl-curl problem uses the 'vertex' smoother")
            }
            (_, Some(s)) => s,
        };
        let (nu1, nu2) = match (self.nu, self.nu1, self.nu2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => return usage("--nu excludes --nu1/--nu2"),
            (Some(n), None, None) => (n.div_ceil(2), n / 2),
            (None, a, b) => (a.unwrap_or(1), b.unwrap_or(0)),
        };
        let omega_u = self.omega_u.unwrap_or(1.0);
        let omega_p = self.omega_p.unwrap_or(1.0);
        for (name, w) in [("omega-u", omega_u), ("omega-p", omega_p)] {
            if !(w > 0.0 && w < 2.0) {
                return usage(format!("--{name} must lie in (0, 2), got {w}"));
            }
        }
        if problem == Problem::Curlcurl && self.omega_p.is_some() {
            return usage("--omega-p applies to the Stokes problem only");
        }
        let freq_n = self.freq_n.unwrap_or(33);
        if freq_n < 8 {
            return usage(format!("--freq-n must be at least 8, got {freq_n}"));
        }
        if let Some(l) = self.levels {
            if !(2..=MAX_LEVEL).contains(&l) {
                return usage(format!("--levels must lie in [2, {MAX_LEVEL}], got {l}"));
            }
        }
        let tol = self.tol.unwrap_or(1e-10);
        if !(tol > 0.0 && tol <= 1.0) {
            return usage(format!("--tol must lie in (0, 1], got {tol}"));
        }
        Ok(Settings {
            problem,
            smoother,
            mode: self.mode.unwrap_or(Mode::Twogrid),
            cycle: self.cycle.unwrap_or(Cycle::V),
            nu1,
            nu2,
            omega_u,
            omega_p,
            omega_given: self.omega_u.is_some() || self.omega_p.is_some(),
            freq_n,
            levels: self.levels,
            tol,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            format: self.format.unwrap_or(Format::Md),
            out: self.out.clone(),
        })
    }
}

/// Validated options with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub problem: Problem,
    pub smoother: SmootherName,
    pub mode: Mode,
    pub cycle: Cycle,
    pub nu1: usize,
    pub nu2: usize,
    pub omega_u: f64,
    pub omega_p: f64,
    pub omega_given: bool,
    pub freq_n: usize,
    pub levels: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Levels used for the curl-curl mesh size in the analysis when none are given.
pub const CURLCURL_LEVELS: usize = 9;

impl Settings {
    pub fn kind(&self) -> ProblemKind {
        match self.problem {
            Problem::Stokes => ProblemKind::Stokes,
            Problem::Curlcurl => ProblemKind::CurlCurl,
        }
    }

    /// The Stokes symbols do not depend on `h`; curl-curl uses the finest solver mesh.
    pub fn problem_spec(&self) -> ProblemSpec {
        match self.problem {
            Problem::Stokes => ProblemSpec::stokes(1.0),
            Problem::Curlcurl => {
                let l = self.levels.unwrap_or(CURLCURL_LEVELS);
                ProblemSpec::curlcurl(2f64.powi(-(l as i32)), 1.0)
            }
        }
    }

    pub fn block_spec(&self) -> BlockSpec {
        let base = match self.smoother {
            SmootherName::Full => BlockSpec::stokes(LocalSolver::Full),
            SmootherName::Diag => BlockSpec::stokes(LocalSolver::Diagonal),
            SmootherName::Vertex => BlockSpec::nedelec_vertex(),
        };
        base.with_omega(omega_vector(self.kind(), self.omega_u, self.omega_p))
    }

    pub fn gamma(&self) -> usize {
        self.cycle_kind().gamma()
    }

    pub fn cycle_kind(&self) -> CycleKind {
        match self.cycle {
            Cycle::V => CycleKind::V,
            Cycle::W => CycleKind::W,
        }
    }

    pub fn kgrid(&self) -> KGridConfig {
        KGridConfig::cycle(self.nu1, self.nu2, self.gamma()).with_freq_n(self.freq_n)
    }
}
