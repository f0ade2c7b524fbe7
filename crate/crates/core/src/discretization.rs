//! Stencils of the stabilized P1-P1 Stokes and lowest-order Nedelec curl-curl
//! discretizations on the equilateral lattice, and their Fourier symbols.
//!
//! Stokes unknowns are `u, v, p` at vertices (variables 0, 1, 2) and the matrix is
//! the symmetric saddle-point form `[A B; B^T -beta C]`. Curl-curl unknowns are
//! tangential line integrals on the three edge subgrids (variables 0, 1, 2 for
//! subgrids 1, 2, 3), each edge oriented towards increasing lattice index.

use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Frequency, Location, SubgridId};
use crate::linalg::CMat;
use crate::oracle::assemble_patch_oracle;
use crate::stencil::{GoldenStencil, MultiStencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Stokes,
    CurlCurl,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Stokes => "stokes",
            ProblemKind::CurlCurl => "curlcurl",
        }
    }
}

pub const DEFAULT_BETA: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub h: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl ProblemSpec {
    pub fn stokes(h: f64) -> Self {
        Self {
            kind: ProblemKind::Stokes,
            h,
            beta: DEFAULT_BETA,
            kappa: 0.0,
        }
    }

    pub fn curlcurl(h: f64, kappa: f64) -> Self {
        Self {
            kind: ProblemKind::CurlCurl,
            h,
            beta: 0.0,
            kappa,
        }
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("mesh size must be positive, got {}", self.h)));
        }
        match self.kind {
            ProblemKind::Stokes if !(self.beta > 0.0) => {
                Err(Error::Config(format!("beta must be positive, got {}", self.beta)))
            }
            ProblemKind::CurlCurl if !(self.kappa >= 0.0) => {
                Err(Error::Config(format!("kappa must be non-negative, got {}", self.kappa)))
            }
            _ => Ok(()),
        }
    }

    /// The discrete operator of this problem.
    pub fn stencil(&self) -> Result<MultiStencil> {
        match self.kind {
            ProblemKind::Stokes => stokes_stencils(self),
            ProblemKind::CurlCurl => {
                let n = nedelec_curlcurl_stencils(self)?;
                let m = nedelec_mass_stencils(self)?;
                Ok(n.axpy(self.kappa, &m))
            }
        }
    }
}

fn require(spec: &ProblemSpec, kind: ProblemKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::ProblemKind {
            expected: kind.name(),
            got: spec.kind.name(),
        });
    }
    Ok(())
}

pub const STOKES_GOLDEN: &str = include_str!("../data/stokes.stencil");
pub const MASS_GOLDEN: &str = include_str!("../data/nedelec_mass.stencil");

/// Directory holding the checked-in golden stencil files.
pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn stokes_stencils(spec: &ProblemSpec) -> Result<MultiStencil> {
    require(spec, ProblemKind::Stokes)?;
    Ok(GoldenStencil::parse(STOKES_GOLDEN)?.instantiate(spec.h, spec.beta))
}

pub fn nedelec_mass_stencils(spec: &ProblemSpec) -> Result<MultiStencil> {
    require(spec, ProblemKind::CurlCurl)?;
    Ok(GoldenStencil::parse(MASS_GOLDEN)?.instantiate(spec.h, 1.0))
}

fn edge_kinds() -> Vec<Location> {
    SubgridId::ALL.iter().map(|&s| Location::Edge(s)).collect()
}

/// The curl-curl part `N_h`.
pub fn nedelec_curlcurl_stencils(spec: &ProblemSpec) -> Result<MultiStencil> {
    require(spec, ProblemKind::CurlCurl)?;
    let c = 4.0 / (3f64.sqrt() * spec.h * spec.h);
    let mut st = MultiStencil::new(edge_kinds(), spec.h);
    for i in 0..3 {
        st.add(i, i, 0, 0, 2.0 * c);
    }
    let off: [(usize, usize, f64, [(i32, i32); 2]); 6] = [
        (0, 1, 1.0, [(1, 0), (0, -1)]),
        (0, 2, -1.0, [(0, 0), (0, -1)]),
        (1, 0, 1.0, [(-1, 0), (0, 1)]),
        (1, 2, -1.0, [(-1, 0), (0, 0)]),
        (2, 0, -1.0, [(0, 0), (0, 1)]),
        (2, 1, -1.0, [(1, 0), (0, 0)]),
    ];
    for (i, r, sign, pos) in off {
        for (kk, ll) in pos {
            st.add(i, r, kk, ll, sign * c);
        }
    }
    Ok(st)
}

/// Golden data for the oracle-derived stencils, assembled at `h = 1`, `beta = 1`.
pub fn golden_from_oracle(patch_n: usize) -> Result<Vec<(&'static str, GoldenStencil)>> {
    let stokes = assemble_patch_oracle(
        &ProblemSpec {
            beta: 1.0,
            ..ProblemSpec::stokes(1.0)
        },
        patch_n,
    )?;
    let mass = assemble_patch_oracle(&ProblemSpec::curlcurl(1.0, 1.0), patch_n)?
        .axpy(-1.0, &assemble_patch_oracle(&ProblemSpec::curlcurl(1.0, 0.0), patch_n)?)
        .pruned(1e-13);
    let stokes_golden = GoldenStencil {
        name: "stabilized P1-P1 Stokes, h = 1, beta = 1".into(),
        base: stokes,
        hpow: [((0, 2), 1), ((1, 2), 1), ((2, 0), 1), ((2, 1), 1), ((2, 2), 2)]
            .into_iter()
            .collect(),
        beta_blocks: [(2, 2)].into_iter().collect(),
    };
    let mass_golden = GoldenStencil {
        name: "Nedelec edge mass, line-integral dofs, h-independent".into(),
        base: mass,
        hpow: Default::default(),
        beta_blocks: Default::default(),
    };
    Ok(vec![
        ("stokes.stencil", stokes_golden),
        ("nedelec_mass.stencil", mass_golden),
    ])
}

/// How cross-variable phases are formed in `operator_symbol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// Use the true relative position including half-integer edge offsets.
    #[default]
    Geometric,
    /// Use lattice index offsets only.
    IndexOnly,
}

/// A symbol matrix together with the frequency it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub theta: Frequency,
    pub data: CMat,
}

impl SymbolMatrix {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// `sum s(i,r,kk,ll) exp(i theta . ((kk,ll) + delta_r - delta_i))`.
pub fn operator_symbol_with(
    st: &MultiStencil,
    theta: Frequency,
    convention: PhaseConvention,
) -> CMat {
    let mut a = CMat::zeros(st.m, st.m);
    for (&(i, r, kk, ll), &s) in &st.entries {
        let (mut d1, mut d2) = (kk as f64, ll as f64);
        if convention == PhaseConvention::Geometric {
            let (ri1, ri2) = st.kinds[r].delta();
            let (ii1, ii2) = st.kinds[i].delta();
            d1 += ri1 - ii1;
            d2 += ri2 - ii2;
        }
        a[(i, r)] += Complex64::from_polar(s, theta.phase(d1, d2));
    }
    a
}

pub fn operator_symbol(st: &MultiStencil, theta: Frequency) -> SymbolMatrix {
    SymbolMatrix {
        theta,
        data: operator_symbol_with(st, theta, PhaseConvention::Geometric),
    }
}

/// Symbols of the discrete gradient of a nodal mode along the three edge
/// directions, in the geometric phase convention.
pub fn gradient_symbol(theta: Frequency) -> [Complex64; 3] {
    let g = |x: f64| Complex64::new(0.0, 2.0 * (0.5 * x).sin());
    [
        g(theta.theta1),
        g(theta.theta2),
        g(theta.theta1 + theta.theta2),
    ]
}
