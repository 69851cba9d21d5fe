use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary conditions at `(0, L)` whose Laplacian eigenbasis is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    /// Dirichlet at both ends: `b_k = √(2/L) sin(kπx/L)`.
    #[serde(rename = "dd")]
    DirichletDirichlet,
    /// Dirichlet at 0, Neumann at L: `a_k = √(2/L) sin((2k−1)πx/(2L))`.
    #[serde(rename = "dn")]
    DirichletNeumann,
}

impl BasisKind {
    pub fn label(self) -> &'static str {
        match self {
            BasisKind::DirichletDirichlet => "dd",
            BasisKind::DirichletNeumann => "dn",
        }
    }

    /// Odd multiplier `n_k` with wavenumber `n_k · π/L` (DD) or `n_k · π/(2L)` (DN).
    fn index(self, k: usize) -> f64 {
        match self {
            BasisKind::DirichletDirichlet => k as f64,
            BasisKind::DirichletNeumann => (2 * k - 1) as f64,
        }
    }
}

/// A truncated orthonormal eigenbasis of `D ∂²/∂x²` on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: BasisKind,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    #[serde(rename = "K")]
    pub modes: usize,
}

impl Basis {
    pub fn new(kind: BasisKind, length: f64, diffusivity: f64, modes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(format!("length must be positive, got {length}")));
        }
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::Config(format!("diffusivity must be positive, got {diffusivity}")));
        }
        if modes == 0 {
            return Err(Error::Config("at least one mode is required".into()));
        }
        Ok(Basis {
            kind,
            length,
            diffusivity,
            modes,
        })
    }

    /// Same geometry with a different truncation.
    pub fn with_modes(&self, modes: usize) -> Self {
        Basis { modes, ..*self }
    }

    fn base_wavenumber(&self) -> f64 {
        match self.kind {
            BasisKind::DirichletDirichlet => PI / self.length,
            BasisKind::DirichletNeumann => PI / (2.0 * self.length),
        }
    }

    /// Wavenumber of mode `k` (from 1).
    pub fn wavenumber(&self, k: usize) -> f64 {
        self.kind.index(k) * self.base_wavenumber()
    }

    /// Eigenvalue magnitude `λ_k = D · wavenumber²` of mode `k`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.diffusivity * self.wavenumber(k).powi(2)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.modes).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn function(&self, k: usize, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (self.wavenumber(k) * x).sin()
    }

    /// Values of all basis functions at `x`, by the Chebyshev sine recurrence.
    pub fn functions_at(&self, x: f64, out: &mut [f64]) {
        let norm = (2.0 / self.length).sqrt();
        let theta = self.base_wavenumber() * x;
        match self.kind {
            BasisKind::DirichletDirichlet => {
                // sin((k+1)θ) = 2cos θ sin(kθ) − sin((k−1)θ)
                let two_cos = 2.0 * theta.cos();
                let (mut prev, mut cur) = (0.0, theta.sin());
                for (k, slot) in out.iter_mut().enumerate() {
                    if k % 32 == 31 {
                        cur = ((k + 1) as f64 * theta).sin();
                        prev = (k as f64 * theta).sin();
                    }
                    *slot = norm * cur;
                    let next = two_cos * cur - prev;
                    prev = cur;
                    cur = next;
                }
            }
            BasisKind::DirichletNeumann => {
                // sin((n+2)θ) = 2cos 2θ sin(nθ) − sin((n−2)θ) over odd n
                let two_cos = 2.0 * (2.0 * theta).cos();
                let (mut prev, mut cur) = (-theta.sin(), theta.sin());
                for (k, slot) in out.iter_mut().enumerate() {
                    if k % 32 == 31 {
                        cur = ((2 * k + 1) as f64 * theta).sin();
                        prev = ((2 * k - 1) as f64 * theta).sin();
                    }
                    *slot = norm * cur;
                    let next = two_cos * cur - prev;
                    prev = cur;
                    cur = next;
                }
            }
        }
    }

    /// `e^{−λ_k t}` for `k = 1..=out.len()`.
    ///
    /// Uses a multiplicative recurrence on the quadratic exponent, resynced
    /// with an exact exponential every 16 modes.
    pub fn decay_factors(&self, t: f64, out: &mut [f64]) {
        let lambda1 = self.diffusivity * self.base_wavenumber().powi(2);
        let s = lambda1 * t;
        // n_{k+1}² − n_k² = 2n_k + 2 (DD, n_k = k) or 4n_k + 4 (DN, n_k = 2k − 1).
        let (mul, add, stride) = match self.kind {
            BasisKind::DirichletDirichlet => (2.0, 1.0, 2.0),
            BasisKind::DirichletNeumann => (4.0, 4.0, 8.0),
        };
        let step_ratio = (-s * stride).exp();
        let mut value = 0.0;
        let mut ratio = 0.0;
        for (i, slot) in out.iter_mut().enumerate() {
            let k = i + 1;
            if i % 16 == 0 {
                let n = self.kind.index(k);
                value = (-s * n * n).exp();
                ratio = (-s * (mul * n + add)).exp();
            }
            *slot = value;
            if value == 0.0 {
                out[i..].iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            value *= ratio;
            ratio *= step_ratio;
        }
    }

    /// `Σ_k coeffs_k · φ_k(x)`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::Argument(format!("x = {x} outside [0, {}]", self.length)));
        }
        let mut values = vec![0.0; coeffs.len()];
        self.functions_at(x, &mut values);
        Ok(values.iter().zip(coeffs).map(|(v, c)| v * c).sum())
    }
}

/// Interior points `L/G, 2L/G, …, (G−1)L/G`.
pub fn interior_grid(length: f64, intervals: usize) -> Vec<f64> {
    (1..intervals).map(|i| length * i as f64 / intervals as f64).collect()
}

/// Precomputed basis values on a fixed set of points.
#[derive(Debug, Clone)]
pub struct GridEvaluator {
    points: Vec<f64>,
    modes: usize,
    table: Vec<f64>,
}

impl GridEvaluator {
    pub fn new(basis: &Basis, points: Vec<f64>) -> Result<Self> {
        if let Some(x) = points.iter().find(|x| !(0.0..=basis.length).contains(*x)) {
            return Err(Error::Argument(format!("grid point {x} outside [0, {}]", basis.length)));
        }
        let modes = basis.modes;
        let mut table = vec![0.0; points.len() * modes];
        for (row, &x) in table.chunks_mut(modes).zip(&points) {
            basis.functions_at(x, row);
        }
        Ok(GridEvaluator { points, modes, table })
    }

    /// Evaluator on the interior grid with `intervals` subintervals.
    pub fn interior(basis: &Basis, intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Config(format!("grid needs at least 2 intervals, got {intervals}")));
        }
        Self::new(basis, interior_grid(basis.length, intervals))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Values of the field with these coefficients at every grid point.
    pub fn evaluate(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len().min(self.modes);
        self.table
            .chunks(self.modes)
            .map(|row| row[..n].iter().zip(&coeffs[..n]).map(|(v, c)| v * c).sum())
            .collect()
    }

    pub fn evaluate_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = coeffs.len().min(self.modes);
        for (slot, row) in out.iter_mut().zip(self.table.chunks(self.modes)) {
            *slot = row[..n].iter().zip(&coeffs[..n]).map(|(v, c)| v * c).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut sum = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn eigenvalues_match_closed_forms() {
        let dd = Basis::new(BasisKind::DirichletDirichlet, 2.0, 0.5, 8).unwrap();
        let dn = Basis::new(BasisKind::DirichletNeumann, 2.0, 0.5, 8).unwrap();
        for k in 1..=8 {
            let kf = k as f64;
            assert!((dd.eigenvalue(k) - 0.5 * (kf * PI / 2.0).powi(2)).abs() < 1e-12);
            let odd = 2.0 * kf - 1.0;
            assert!((dn.eigenvalue(k) - 0.5 * odd * odd * PI * PI / 16.0).abs() < 1e-12);
        }
        for b in [dd, dn] {
            assert!(b.eigenvalues().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn invalid_bases_are_rejected() {
        assert!(Basis::new(BasisKind::DirichletDirichlet, 0.0, 1.0, 4).is_err());
        assert!(Basis::new(BasisKind::DirichletDirichlet, 1.0, -1.0, 4).is_err());
        assert!(Basis::new(BasisKind::DirichletNeumann, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        for kind in [BasisKind::DirichletDirichlet, BasisKind::DirichletNeumann] {
            let basis = Basis::new(kind, 1.3, 1.0, 12).unwrap();
            for i in 1..=12 {
                for j in 1..=12 {
                    let g = simpson(|x| basis.function(i, x) * basis.function(j, x), 0.0, 1.3, 10_000);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-8, "{kind:?} ({i},{j}) {g}");
                }
            }
        }
    }

    #[test]
    fn recurrences_match_direct_evaluation() {
        for kind in [BasisKind::DirichletDirichlet, BasisKind::DirichletNeumann] {
            let basis = Basis::new(kind, 1.7, 0.9, 300).unwrap();
            let mut values = vec![0.0; 300];
            for x in [0.0, 0.013, 0.5, 1.1, 1.7] {
                basis.functions_at(x, &mut values);
                for (k, v) in values.iter().enumerate() {
                    assert!((v - basis.function(k + 1, x)).abs() < 1e-11);
                }
            }
            let mut decay = vec![0.0; 300];
            for t in [0.0, 1e-6, 1e-3, 0.2, 5.0] {
                basis.decay_factors(t, &mut decay);
                for (k, e) in decay.iter().enumerate() {
                    let exact = (-basis.eigenvalue(k + 1) * t).exp();
                    assert!((e - exact).abs() <= 1e-12 * exact + 1e-300, "{kind:?} t={t} k={}: {e:e} vs {exact:e}", k + 1);
                }
            }
        }
    }

    #[test]
    fn evaluation_vanishes_at_the_origin() {
        let basis = Basis::new(BasisKind::DirichletNeumann, 1.0, 1.0, 5).unwrap();
        let coeffs = [0.3, -1.0, 2.0, 0.1, 0.7];
        assert_eq!(basis.evaluate(&coeffs, 0.0).unwrap(), 0.0);
        assert!(basis.evaluate(&coeffs, 1.01).is_err());
        assert!(basis.evaluate(&coeffs, -0.01).is_err());
    }

    #[test]
    fn grid_evaluator_matches_pointwise_sum() {
        let basis = Basis::new(BasisKind::DirichletDirichlet, 2.0, 1.0, 7).unwrap();
        let grid = GridEvaluator::interior(&basis, 16).unwrap();
        assert_eq!(grid.points().len(), 15);
        let coeffs = [1.0, 0.5, -0.25, 0.0, 0.1, 0.2, -0.3];
        for (x, v) in grid.points().iter().zip(grid.evaluate(&coeffs)) {
            assert!((v - basis.evaluate(&coeffs, *x).unwrap()).abs() < 1e-13);
        }
    }
}
