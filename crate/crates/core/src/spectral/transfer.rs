use std::f64::consts::PI;

use super::basis::{Basis, BasisKind};
use super::field::SpectralField;
use crate::error::{Error, Result};

/// Change of basis between the DD and DN eigenbases: `T[m][k] = ⟨to_m, from_k⟩`.
#[derive(Debug, Clone)]
pub struct Transfer {
    from: Basis,
    to: Basis,
    /// Row-major, `to.modes × from.modes`.
    matrix: Vec<f64>,
}

/// `⟨a_m, b_j⟩` between DN mode `m` and DD mode `j`; independent of `L`.
///
/// The wavenumbers `(m − ½)π/L` and `jπ/L` never coincide, and the
/// product-to-sum integrals reduce to `±1` sines at half-integer multiples of π.
pub fn mixed_inner_product(m: usize, j: usize) -> f64 {
    let half = m as f64 - 0.5;
    let jf = j as f64;
    let sign = if (m + j) % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * jf / (PI * (half * half - jf * jf))
}

impl Transfer {
    /// Transfer between bases that may have different truncations.
    pub fn rectangular(from: &Basis, to: &Basis) -> Result<Self> {
        if from.kind == to.kind {
            return Err(Error::Argument("transfer needs two different basis kinds".into()));
        }
        if from.length != to.length || from.diffusivity != to.diffusivity {
            return Err(Error::Argument(format!(
                "transfer needs matching L and D, got ({}, {}) and ({}, {})",
                from.length, from.diffusivity, to.length, to.diffusivity
            )));
        }
        let mut matrix = Vec::with_capacity(to.modes * from.modes);
        for m in 1..=to.modes {
            for k in 1..=from.modes {
                matrix.push(match to.kind {
                    BasisKind::DirichletNeumann => mixed_inner_product(m, k),
                    BasisKind::DirichletDirichlet => mixed_inner_product(k, m),
                });
            }
        }
        Ok(Transfer {
            from: *from,
            to: *to,
            matrix,
        })
    }

    pub fn from_basis(&self) -> &Basis {
        &self.from
    }

    pub fn to_basis(&self) -> &Basis {
        &self.to
    }

    /// Entry `T[m][k]`, indices from 1.
    pub fn entry(&self, m: usize, k: usize) -> f64 {
        self.matrix[(m - 1) * self.from.modes + (k - 1)]
    }

    /// `out = T · coeffs` using only the first `rows` target modes.
    pub fn apply_rows(&self, coeffs: &[f64], rows: usize, out: &mut [f64]) {
        let cols = self.from.modes;
        for (slot, row) in out[..rows].iter_mut().zip(self.matrix.chunks(cols)) {
            *slot = row.iter().zip(coeffs).map(|(t, c)| t * c).sum();
        }
    }

    /// `out += Tᵀ · coeffs` using only the first `rows` target modes.
    pub fn apply_transpose_add(&self, coeffs: &[f64], rows: usize, out: &mut [f64]) {
        let cols = self.from.modes;
        for (&c, row) in coeffs[..rows].iter().zip(self.matrix.chunks(cols)) {
            if c != 0.0 {
                for (o, t) in out.iter_mut().zip(row) {
                    *o += t * c;
                }
            }
        }
    }

    /// Expresses `field` (in the source basis) in the target basis.
    pub fn apply(&self, field: &SpectralField) -> Result<SpectralField> {
        field.ensure_basis(&self.from)?;
        let mut out = vec![0.0; self.to.modes];
        self.apply_rows(field.coeffs(), self.to.modes, &mut out);
        SpectralField::new(self.to, out)
    }
}

/// Square `K × K` transfer between two bases of equal geometry and truncation.
pub fn basis_transfer(from: &Basis, to: &Basis) -> Result<Transfer> {
    if from.modes != to.modes {
        return Err(Error::Argument(format!(
            "transfer needs matching K, got {} and {}",
            from.modes, to.modes
        )));
    }
    Transfer::rectangular(from, to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::project_ramp;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut sum = f(a) + f(b);
        for i in 1..panels {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    fn pair(k: usize, length: f64) -> (Basis, Basis) {
        (
            Basis::new(BasisKind::DirichletDirichlet, length, 1.0, k).unwrap(),
            Basis::new(BasisKind::DirichletNeumann, length, 1.0, k).unwrap(),
        )
    }

    #[test]
    fn entries_match_quadrature() {
        let (dd, dn) = pair(10, 1.7);
        let t = basis_transfer(&dd, &dn).unwrap();
        let back = basis_transfer(&dn, &dd).unwrap();
        for m in 1..=10 {
            for k in 1..=10 {
                let q = simpson(|x| dn.function(m, x) * dd.function(k, x), 0.0, 1.7, 10_000);
                assert!((t.entry(m, k) - q).abs() < 1e-8, "({m},{k}) {} vs {q}", t.entry(m, k));
                assert_eq!(back.entry(k, m), t.entry(m, k));
            }
        }
    }

    #[test]
    fn leading_block_is_nearly_orthogonal() {
        let (dd, dn) = pair(64, 1.0);
        let t = basis_transfer(&dd, &dn).unwrap();
        let mut worst: f64 = 0.0;
        for a in 1..=32 {
            for b in 1..=32 {
                let g: f64 = (1..=64).map(|k| t.entry(a, k) * t.entry(b, k)).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - expect).abs());
            }
        }
        assert!(worst <= 0.05, "{worst}");
    }

    #[test]
    fn ramp_transfer_error_within_parseval_tail() {
        let (dd, dn) = pair(64, 1.0);
        let t = basis_transfer(&dd, &dn).unwrap();
        let moved = t.apply(&project_ramp(&dd, 1.0).field(dd)).unwrap();
        let target = project_ramp(&dn, 1.0).field(dn);
        let err = crate::hybrid::State::distance(&moved, &target);
        // Missing DD modes k > 64 carry energy Σ c_k²; the error norm is bounded by its root.
        let tail: f64 = (65..200_000).map(|k| crate::spectral::ramp_coefficient(&dd, 1.0, k).powi(2)).sum();
        assert!(err * err <= tail, "err² = {}, tail = {tail}", err * err);
    }

    #[test]
    fn round_trip_loses_exactly_the_truncated_energy() {
        // DD modes have DN coefficients decaying like 1/m², so a wide target
        // basis nearly closes the round trip.
        let dd = Basis::new(BasisKind::DirichletDirichlet, 1.0, 1.0, 32).unwrap();
        let coeffs: Vec<f64> = (1..=32).map(|k| if k <= 16 { 1.0 / k as f64 } else { 0.0 }).collect();
        let f = SpectralField::new(dd, coeffs).unwrap();
        let mut last = f64::INFINITY;
        for wide in [64, 512, 4096] {
            let dn = Basis::new(BasisKind::DirichletNeumann, 1.0, 1.0, wide).unwrap();
            let there = Transfer::rectangular(&dd, &dn).unwrap().apply(&f).unwrap();
            let back = Transfer::rectangular(&dn, &dd).unwrap().apply(&there).unwrap();
            let err = crate::hybrid::State::distance(&back, &f) / f.norm();
            let lost = 1.0 - (there.norm() / f.norm()).powi(2);
            assert!(err < last);
            assert!(err <= lost.sqrt() * 1.0001 + 1e-15, "wide={wide}: {err} vs {lost}");
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn mismatches_are_rejected() {
        let (dd, dn) = pair(8, 1.0);
        assert!(basis_transfer(&dd, &dd).is_err());
        assert!(basis_transfer(&dd, &dn.with_modes(4)).is_err());
        let other = Basis::new(BasisKind::DirichletNeumann, 2.0, 1.0, 8).unwrap();
        assert!(basis_transfer(&dd, &other).is_err());
        let t = basis_transfer(&dd, &dn).unwrap();
        assert!(t.apply(&SpectralField::zero(dn)).is_err());
    }
}
