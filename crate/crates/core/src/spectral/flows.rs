use std::sync::Arc;

use super::basis::{Basis, BasisKind};
use super::field::{project_ramp, RampData, SpectralField};
use super::transfer::Transfer;
use crate::error::{Error, Result};
use crate::hybrid::Flow;

/// `e^{At} f`: every coefficient decays at its own eigenvalue.
pub fn decay_flow(basis: &Basis, t: f64, field: &SpectralField) -> Result<SpectralField> {
    check_time(t)?;
    field.ensure_basis(basis)?;
    Ok(decay(basis, t, field))
}

/// `e^{Bt}(f − c) + c` with `c` given in the same basis.
pub fn ramp_flow(basis: &Basis, ramp: &RampData, t: f64, field: &SpectralField) -> Result<SpectralField> {
    check_time(t)?;
    field.ensure_basis(basis)?;
    if ramp.coeffs.len() != basis.modes {
        return Err(Error::Argument("ramp and basis truncations differ".into()));
    }
    Ok(relax(basis, ramp, t, field))
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("flow time must be nonnegative, got {t}")))
    }
}

fn decay(basis: &Basis, t: f64, field: &SpectralField) -> SpectralField {
    if t == 0.0 {
        return field.clone();
    }
    let mut out = field.clone();
    let mut factors = vec![0.0; basis.modes];
    basis.decay_factors(t, &mut factors);
    for (c, e) in out.coeffs_mut().iter_mut().zip(&factors) {
        *c *= e;
    }
    out
}

fn relax(basis: &Basis, ramp: &RampData, t: f64, field: &SpectralField) -> SpectralField {
    if t == 0.0 {
        return field.clone();
    }
    let mut out = field.clone();
    let mut factors = vec![0.0; basis.modes];
    basis.decay_factors(t, &mut factors);
    for ((u, e), c) in out.coeffs_mut().iter_mut().zip(&factors).zip(&ramp.coeffs) {
        *u = c + e * (*u - c);
    }
    out
}

/// `Φ⁰_t(f) = e^{Bt}(f − c) + c`, with `B` the Dirichlet/Dirichlet operator,
/// acting on fields stored in the Dirichlet/Neumann basis.
///
/// The difference `f − c` is expanded in DD modes, damped, and projected back.
/// The number of DD modes follows `t`: enough that the first dropped mode has
/// decayed below 1e-17. For very short times that would exceed the available
/// width, the increment `(e^{Bt} − I)(f − c)` is used instead, whose dropped
/// terms vanish as `t → 0`.
#[derive(Debug)]
pub struct ConjugatedRamp {
    state: Basis,
    operator: Basis,
    /// DN → wide DD.
    transfer: Transfer,
    ramp: RampData,
}

const NEGLIGIBLE_DECAY: f64 = 39.2; // −ln 1e-17

impl ConjugatedRamp {
    pub fn new(state: &Basis, b: f64) -> Result<Self> {
        if state.kind != BasisKind::DirichletNeumann {
            return Err(Error::Config("conjugated ramp flow expects DN-basis states".into()));
        }
        let width = (64 * state.modes).max(1024);
        let operator = Basis::new(BasisKind::DirichletDirichlet, state.length, state.diffusivity, width)?;
        let transfer = Transfer::rectangular(state, &operator)?;
        Ok(ConjugatedRamp {
            state: *state,
            operator,
            transfer,
            ramp: project_ramp(state, b),
        })
    }

    pub fn width(&self) -> usize {
        self.operator.modes
    }

    /// DD modes used for a flow of duration `t`.
    pub fn modes_for(&self, t: f64) -> usize {
        let needed = (NEGLIGIBLE_DECAY / (self.operator.eigenvalue(1) * t)).sqrt().ceil();
        if needed >= self.operator.modes as f64 {
            self.operator.modes
        } else {
            needed as usize
        }
    }

    fn apply(&self, t: f64, field: &SpectralField) -> SpectralField {
        if t == 0.0 {
            return field.clone();
        }
        let gap: Vec<f64> = field.coeffs().iter().zip(&self.ramp.coeffs).map(|(f, c)| f - c).collect();
        let rows = self.modes_for(t);
        let direct = rows < self.operator.modes;
        let mut wide = vec![0.0; rows];
        self.transfer.apply_rows(&gap, rows, &mut wide);
        let mut factors = vec![0.0; rows];
        self.operator.decay_factors(t, &mut factors);
        for (w, e) in wide.iter_mut().zip(&factors) {
            *w *= if direct { *e } else { e - 1.0 };
        }
        let mut out = if direct {
            self.ramp.coeffs.clone()
        } else {
            field.coeffs().to_vec()
        };
        self.transfer.apply_transpose_add(&wide, rows, &mut out);
        SpectralField::new(self.state, out).expect("flow keeps coefficients finite")
    }
}

/// The concrete heat semiflows of the two examples.
#[derive(Debug, Clone)]
pub enum HeatFlow {
    /// Homogeneous boundary data: `e^{At}` diagonal in `basis`.
    Decay { basis: Basis },
    /// Relaxation toward the ramp, diagonal in `basis`.
    Ramp { basis: Basis, ramp: RampData },
    /// Relaxation toward the ramp under DD conditions on DN-basis states.
    ConjugatedRamp(Arc<ConjugatedRamp>),
}

impl HeatFlow {
    pub fn state_basis(&self) -> &Basis {
        match self {
            HeatFlow::Decay { basis } | HeatFlow::Ramp { basis, .. } => basis,
            HeatFlow::ConjugatedRamp(c) => &c.state,
        }
    }

    /// Smallest eigenvalue of the generator; the modulus is `e^{−λ₁t}`.
    pub fn leading_rate(&self) -> f64 {
        match self {
            HeatFlow::Decay { basis } | HeatFlow::Ramp { basis, .. } => basis.eigenvalue(1),
            HeatFlow::ConjugatedRamp(c) => c.operator.eigenvalue(1),
        }
    }

    /// The fixed point of the flow.
    pub fn equilibrium(&self) -> SpectralField {
        match self {
            HeatFlow::Decay { basis } => SpectralField::zero(*basis),
            HeatFlow::Ramp { basis, ramp } => ramp.field(*basis),
            HeatFlow::ConjugatedRamp(c) => c.ramp.field(c.state),
        }
    }
}

impl Flow for HeatFlow {
    type State = SpectralField;

    fn apply(&self, t: f64, x: &SpectralField) -> SpectralField {
        debug_assert_eq!(x.basis(), self.state_basis());
        match self {
            HeatFlow::Decay { basis } => decay(basis, t, x),
            HeatFlow::Ramp { basis, ramp } => relax(basis, ramp, t, x),
            HeatFlow::ConjugatedRamp(c) => c.apply(t, x),
        }
    }

    fn contraction_modulus(&self, t: f64) -> f64 {
        (-self.leading_rate() * t).exp()
    }

    fn decay_rate(&self) -> Option<f64> {
        Some(self.leading_rate())
    }
}
