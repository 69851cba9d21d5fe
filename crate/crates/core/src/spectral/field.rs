use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::basis::{interior_grid, Basis, BasisKind, GridEvaluator};
use crate::error::{Error, Result};
use crate::hybrid::State;

/// A function on `[0, L]` stored by its first `K` coefficients in an
/// orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldSnapshot", into = "FieldSnapshot")]
pub struct SpectralField {
    basis: Basis,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldSnapshot {
    basis: BasisKind,
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "D")]
    diffusivity: f64,
    #[serde(rename = "K")]
    modes: usize,
    coeffs: Vec<f64>,
}

impl From<SpectralField> for FieldSnapshot {
    fn from(f: SpectralField) -> Self {
        FieldSnapshot {
            basis: f.basis.kind,
            length: f.basis.length,
            diffusivity: f.basis.diffusivity,
            modes: f.basis.modes,
            coeffs: f.coeffs,
        }
    }
}

impl TryFrom<FieldSnapshot> for SpectralField {
    type Error = Error;

    fn try_from(s: FieldSnapshot) -> Result<Self> {
        let basis = Basis::new(s.basis, s.length, s.diffusivity, s.modes)?;
        SpectralField::new(basis, s.coeffs)
    }
}

impl SpectralField {
    pub fn new(basis: Basis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.modes {
            return Err(Error::Argument(format!(
                "expected {} coefficients, got {}",
                basis.modes,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("field coefficients must be finite".into()));
        }
        Ok(SpectralField { basis, coeffs })
    }

    pub fn zero(basis: Basis) -> Self {
        SpectralField {
            basis,
            coeffs: vec![0.0; basis.modes],
        }
    }

    /// Coefficients of a function given by its values at the interior grid
    /// points, by trapezoidal quadrature (the function is taken to vanish at 0
    /// and to be continued by its last value to `L`).
    pub fn from_grid_samples(basis: Basis, values: &[f64]) -> Result<Self> {
        let intervals = values.len() + 1;
        let h = basis.length / intervals as f64;
        let grid = GridEvaluator::new(&basis, interior_grid(basis.length, intervals))?;
        let mut coeffs = vec![0.0; basis.modes];
        let mut row = vec![0.0; basis.modes];
        for (i, &v) in values.iter().enumerate() {
            basis.functions_at(grid.points()[i], &mut row);
            for (c, phi) in coeffs.iter_mut().zip(&row) {
                *c += h * v * phi;
            }
        }
        let last = *values.last().unwrap_or(&0.0);
        basis.functions_at(basis.length, &mut row);
        for (c, phi) in coeffs.iter_mut().zip(&row) {
            *c += 0.5 * h * last * phi;
        }
        Ok(SpectralField { basis, coeffs })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `L²` norm, by Parseval.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.basis.evaluate(&self.coeffs, x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fields serialize")
    }

    pub(crate) fn ensure_basis(&self, basis: &Basis) -> Result<()> {
        if &self.basis != basis {
            return Err(Error::Argument(format!(
                "field lives in {:?}, flow expects {:?}",
                self.basis, basis
            )));
        }
        Ok(())
    }
}

impl State for SpectralField {
    fn distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.basis, other.basis);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Coefficients of the steady profile `c(x) = b x / L` in a basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampData {
    pub b: f64,
    pub coeffs: Vec<f64>,
}

/// `⟨φ_k, b x / L⟩` for mode `k` (from 1).
pub fn ramp_coefficient(basis: &Basis, b: f64, k: usize) -> f64 {
    let l = basis.length;
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    match basis.kind {
        BasisKind::DirichletDirichlet => sign * b * (2.0 * l).sqrt() / (k as f64 * PI),
        BasisKind::DirichletNeumann => {
            let odd = (2 * k - 1) as f64;
            (b / l) * 4.0 * 2f64.sqrt() * l.powf(1.5) * sign / (PI * PI * odd * odd)
        }
    }
}

pub fn project_ramp(basis: &Basis, b: f64) -> RampData {
    RampData {
        b,
        coeffs: (1..=basis.modes).map(|k| ramp_coefficient(basis, b, k)).collect(),
    }
}

impl RampData {
    pub fn field(&self, basis: Basis) -> SpectralField {
        SpectralField {
            basis,
            coeffs: self.coeffs.clone(),
        }
    }
}

/// Largest truncation error of the ramp `b x / L` over the interior grid with
/// `intervals` subintervals.
///
/// Box tests on evaluated fields use this as their slack: it is the error the
/// `K`-mode representation makes on the steady profile itself.
pub fn truncation_tolerance(basis: &Basis, b: f64, intervals: usize) -> Result<f64> {
    let ramp = project_ramp(basis, b);
    let grid = GridEvaluator::interior(basis, intervals)?;
    Ok(grid
        .evaluate(&ramp.coeffs)
        .iter()
        .zip(grid.points())
        .map(|(v, x)| (v - b * x / basis.length).abs())
        .fold(0.0, f64::max))
}
