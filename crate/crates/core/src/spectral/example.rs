use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::basis::{Basis, BasisKind};
use super::field::{project_ramp, ramp_coefficient, SpectralField};
use super::flows::{ConjugatedRamp, HeatFlow};
use crate::error::{Error, Result};
use crate::hybrid::{FlowPair, Relaxation};
use crate::switching::SwitchLaw;

/// The two boundary-switching heat problems on `[0, L]`, plus the scalar
/// switching ODE obeyed by one DD Fourier coefficient.
///
/// In every case the left end is held at 0. While `J = 0` the right end is
/// held at `b`; while `J = 1` it is held at 0 (`Dd`) or insulated (`Dn`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Dd,
    Dn,
    Ode1d,
}

impl Example {
    pub fn label(self) -> &'static str {
        match self {
            Example::Dd => "dd",
            Example::Dn => "dn",
            Example::Ode1d => "ode1d",
        }
    }
}

/// Switching rates and physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r0: f64,
    pub r1: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub modes: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            r0: 1.0,
            r1: 1.0,
            diffusivity: 1.0,
            length: 1.0,
            b: 1.0,
            modes: 64,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r0", self.r0), ("r1", self.r1), ("D", self.diffusivity), ("L", self.length)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.b.is_finite() {
            return Err(Error::Config(format!("b must be finite, got {}", self.b)));
        }
        if self.modes == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        Ok(())
    }

    /// Exponential holding times with rates `r0` (leaving state 0) and `r1`.
    pub fn law(&self) -> Result<SwitchLaw> {
        SwitchLaw::exponential(self.r0, self.r1)
    }

    pub fn basis(&self, kind: BasisKind) -> Result<Basis> {
        Basis::new(kind, self.length, self.diffusivity, self.modes)
    }
}

pub type HeatPair = FlowPair<HeatFlow, HeatFlow>;

/// Basis in which the example's states are stored: DD for `Dd`, DN for `Dn`.
pub fn state_basis(example: Example, params: &ModelParams) -> Result<Basis> {
    match example {
        Example::Dd => params.basis(BasisKind::DirichletDirichlet),
        Example::Dn => params.basis(BasisKind::DirichletNeumann),
        Example::Ode1d => Err(Error::Config("the scalar example has no spectral basis".into())),
    }
}

/// Flow pair of a spectral example.
///
/// `Dd`: both flows diagonal in the DD basis. `Dn`: states live in the DN
/// basis, where the on-flow is diagonal, and the off-flow is conjugated
/// through a DD expansion.
pub fn make_flow_pair(example: Example, params: &ModelParams) -> Result<HeatPair> {
    params.validate()?;
    let basis = state_basis(example, params)?;
    let zero = match example {
        Example::Dd => HeatFlow::Ramp {
            basis,
            ramp: project_ramp(&basis, params.b),
        },
        _ => HeatFlow::ConjugatedRamp(Arc::new(ConjugatedRamp::new(&basis, params.b)?)),
    };
    Ok(FlowPair::new(zero, HeatFlow::Decay { basis }))
}

/// The zero field in the example's state basis.
pub fn zero_state(example: Example, params: &ModelParams) -> Result<SpectralField> {
    Ok(SpectralField::zero(state_basis(example, params)?))
}

/// Scalar switching ODE `du/dt = −Jβ_k u − (1−J)β_k(u − c_k)` of DD mode `k`.
pub fn coefficient_pair(params: &ModelParams, k: usize) -> Result<FlowPair<Relaxation, Relaxation>> {
    params.validate()?;
    if k == 0 {
        return Err(Error::Argument("modes are numbered from 1".into()));
    }
    let basis = params.basis(BasisKind::DirichletDirichlet)?;
    let rate = basis.eigenvalue(k);
    Ok(FlowPair::new(
        Relaxation {
            rate,
            target: ramp_coefficient(&basis, params.b, k),
        },
        Relaxation { rate, target: 0.0 },
    ))
}
