//! Closed-form statistics of the stationary laws of the two heat examples,
//! together with the series they are summed from.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::Target;
use crate::numeric::{gamma_coth_minus_one, tanh_stable};
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub r0: f64,
    pub r1: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub b: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            r0: 1.0,
            r1: 1.0,
            diffusivity: 1.0,
            length: 1.0,
            b: 1.0,
        }
    }
}

impl From<&ModelParams> for Params {
    fn from(m: &ModelParams) -> Self {
        Params {
            r0: m.r0,
            r1: m.r1,
            diffusivity: m.diffusivity,
            length: m.length,
            b: m.b,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r0", self.r0),
            ("r1", self.r1),
            ("D", self.diffusivity),
            ("L", self.length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.b.is_finite() {
            return Err(Error::Config(format!("b must be finite, got {}", self.b)));
        }
        Ok(())
    }

    /// `γ = L √((r₀ + r₁)/D)`.
    pub fn gamma(&self) -> f64 {
        self.length * ((self.r0 + self.r1) / self.diffusivity).sqrt()
    }

    /// `ρ = r₀ / r₁`.
    pub fn rho(&self) -> f64 {
        self.r0 / self.r1
    }

    /// Long-run probability of the homogeneous state, `r₀/(r₀ + r₁)`.
    pub fn p(&self) -> f64 {
        self.r0 / (self.r0 + self.r1)
    }

    /// DD eigenvalue `β_k = D (kπ/L)²`.
    pub fn beta(&self, k: usize) -> f64 {
        self.diffusivity * (k as f64 * PI / self.length).powi(2)
    }

    /// DN eigenvalue `α_k = D (2k−1)²π²/(4L²)`.
    pub fn alpha(&self, k: usize) -> f64 {
        let odd = (2 * k - 1) as f64;
        self.diffusivity * (odd * PI / (2.0 * self.length)).powi(2)
    }

    /// DD ramp coefficient `c_k = (−1)^{k+1} b √(2L)/(kπ)`.
    pub fn c(&self, k: usize) -> f64 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * self.b * (2.0 * self.length).sqrt() / (k as f64 * PI)
    }
}

/// A partial sum with a rigorous bound on its distance to the full series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Slope of the affine mean profile of the DN example,
/// `b/L · (1 + (ρ/γ) tanh γ)⁻¹`; the intercept is 0.
pub fn dn_slope(p: &Params) -> Result<f64> {
    p.validate()?;
    let g = p.gamma();
    let tanh_ratio = if g < 1e-8 { 1.0 } else { tanh_stable(g) / g };
    Ok(p.b / p.length / (1.0 + p.rho() * tanh_ratio))
}

/// The mean flux `D · slope` through the switching end.
pub fn insect_flux(p: &Params) -> Result<f64> {
    Ok(p.diffusivity * dn_slope(p)?)
}

/// The slope before summation: `(1−p)b / (L − p Σ_k E_k w_k/(pE_k + 1 − p))`
/// with `E_k = r₁/(r₁ + α_k)` and `w_k = ⟨a_k, x⟩ a_k(L) = 8L/(π²(2k−1)²)`.
pub fn dn_slope_series(p: &Params, terms: usize) -> Result<SeriesValue> {
    p.validate()?;
    if terms == 0 {
        return Err(Error::Argument("the series needs at least one term".into()));
    }
    let occ = p.p();
    let l = p.length;
    let mut sum = 0.0;
    for k in (1..=terms).rev() {
        let e = p.r1 / (p.r1 + p.alpha(k));
        let odd = (2 * k - 1) as f64;
        let w = 8.0 * l / (PI * PI * odd * odd);
        sum += e * w / (occ * e + 1.0 - occ);
    }
    let slope = |s: f64| (1.0 - occ) * p.b / (l - occ * s);
    let value = slope(sum);
    // E_k ≤ r₁/α_k and pE_k + 1 − p ≥ 1 − p give terms ≤ C/(2k−1)⁴,
    // and Σ_{k>K} (2k−1)⁻⁴ ≤ 1/(6(2K−1)³).
    let c = 32.0 * p.r1 * l.powi(3) / (p.diffusivity * PI.powi(4) * (1.0 - occ));
    let sum_tail = c / (6.0 * ((2 * terms - 1) as f64).powi(3));
    let denom = l - occ * (sum + sum_tail);
    let tail_bound = if denom > 0.0 {
        (slope(sum + sum_tail) - value).abs()
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value,
        terms,
        tail_bound,
    })
}

/// Mean stationary profile of the DD example, `(1 − p)(b/L) x`.
pub fn dd_mean(p: &Params, x: f64) -> Result<f64> {
    p.validate()?;
    if !(0.0..=p.length).contains(&x) {
        return Err(Error::Argument(format!("x = {x} outside [0, {}]", p.length)));
    }
    Ok((1.0 - p.p()) * p.b / p.length * x)
}

/// Beta law of a normalized DD Fourier coefficient `Y^k / c_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaMarginal {
    pub alpha: f64,
    pub beta: f64,
    /// `c_k`, the scale of the coefficient.
    pub scale: f64,
}

impl BetaMarginal {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn second_moment(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * (self.alpha + 1.0) / (s * (s + 1.0))
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean().powi(2)
    }
}

/// `Y₀^k/c_k ~ Beta(r₁/β_k + 1, r₀/β_k)` and `Y₁^k/c_k ~ Beta(r₁/β_k, r₀/β_k + 1)`.
pub fn beta_marginal(p: &Params, k: usize, which: Target) -> Result<BetaMarginal> {
    p.validate()?;
    if k == 0 {
        return Err(Error::Argument("modes are numbered from 1".into()));
    }
    let beta_k = p.beta(k);
    let (a, b) = (p.r1 / beta_k, p.r0 / beta_k);
    let (alpha, beta) = match which {
        Target::Y0 => (a + 1.0, b),
        Target::Y1 => (a, b + 1.0),
    };
    Ok(BetaMarginal {
        alpha,
        beta,
        scale: p.c(k),
    })
}

/// `E‖ū − Eū‖²` for the DD example: `b² D r₁ r₀ (γ coth γ − 1)/(L (r₀+r₁)³)`.
pub fn dd_l2_variance(p: &Params) -> Result<f64> {
    p.validate()?;
    let rs = p.r0 + p.r1;
    Ok(p.b * p.b * p.diffusivity * p.r0 * p.r1 * gamma_coth_minus_one(p.gamma()) / (p.length * rs.powi(3)))
}

/// The variance before summation,
/// `Σ_k r₁(r₁+β_k)/((r₀+r₁)(r₀+r₁+β_k)) c_k² − (L/3) b² (1−p)²`.
///
/// Partial sums increase to the limit; the omitted terms are at most
/// `r₁/(r₀+r₁) Σ_{k>K} c_k² ≤ r₁/(r₀+r₁) · 2Lb²/(π²K)`.
pub fn dd_l2_variance_series(p: &Params, terms: usize) -> Result<SeriesValue> {
    p.validate()?;
    if terms == 0 {
        return Err(Error::Argument("the series needs at least one term".into()));
    }
    let rs = p.r0 + p.r1;
    let mut sum = 0.0;
    for k in (1..=terms).rev() {
        let beta_k = p.beta(k);
        sum += p.r1 * (p.r1 + beta_k) / (rs * (rs + beta_k)) * p.c(k).powi(2);
    }
    let occ = p.p();
    let value = sum - p.length / 3.0 * p.b * p.b * (1.0 - occ).powi(2);
    let tail_bound = p.r1 / rs * 2.0 * p.length * p.b * p.b / (PI * PI * terms as f64);
    Ok(SeriesValue {
        value,
        terms,
        tail_bound,
    })
}

/// Variance of the `k`-th DD coefficient of `ū`.
pub fn dd_mode_variance(p: &Params, k: usize) -> Result<f64> {
    let y0 = beta_marginal(p, k, Target::Y0)?;
    let y1 = beta_marginal(p, k, Target::Y1)?;
    let occ = p.p();
    let second = occ * y1.second_moment() + (1.0 - occ) * y0.second_moment();
    Ok(p.c(k).powi(2) * (second - (1.0 - occ).powi(2)))
}

/// `E⟨Y₀, b_n⟩⟨Y₀, b_m⟩` in closed form.
pub fn dd_joint_second_moment(p: &Params, n: usize, m: usize) -> Result<f64> {
    p.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::Argument("modes are numbered from 1".into()));
    }
    let (bm, bn) = (p.beta(m), p.beta(n));
    let (r0, r1) = (p.r0, p.r1);
    let s = bm + bn;
    let num = (s + r1) * (s * (bm + r1) * (bn + r1) + (2.0 * bm * bn + s * r1) * r0);
    let den = s * (bm + r1 + r0) * (bn + r1 + r0) * (s + r1 + r0);
    Ok(num / den * p.c(m) * p.c(n))
}

/// Region allowed for `ū_n/c_n` given `ū_k/c_k = xk`, for `k < n`:
/// `xk^{(n/k)²} ≤ ū_n/c_n ≤ 1 − (1 − xk)^{(n/k)²}`.
pub fn sandwich_bounds(k: usize, n: usize, xk: f64) -> Result<(f64, f64)> {
    if k == 0 || k >= n {
        return Err(Error::Argument(format!("sandwich needs 1 <= k < n, got k={k}, n={n}")));
    }
    if !(0.0..=1.0).contains(&xk) {
        return Err(Error::Argument(format!("normalized coefficient {xk} outside [0, 1]")));
    }
    let e = (n as f64 / k as f64).powi(2);
    Ok((xk.powf(e), 1.0 - (1.0 - xk).powf(e)))
}

fn check_exponent(r: f64) -> Result<()> {
    if r > 0.0 && r < 0.5 {
        Ok(())
    } else {
        Err(Error::Argument(format!("envelope exponent must lie in (0, 1/2), got {r}")))
    }
}

/// Envelope `1 ± M/k^r` (for `Y₀^k/c_k`) or `±M/k^r` (for `Y₁^k/c_k`).
pub fn regularity_envelope(k: usize, r: f64, m: f64, which: Target) -> Result<(f64, f64)> {
    check_exponent(r)?;
    if k == 0 {
        return Err(Error::Argument("modes are numbered from 1".into()));
    }
    let w = m / (k as f64).powf(r);
    Ok(match which {
        Target::Y0 => (1.0 - w, 1.0 + w),
        Target::Y1 => (-w, w),
    })
}

/// Envelope driven by the first holding time of the relevant state:
/// `1 − e^{−β_kτ₀¹}(M/k^r + 1) ≤ Y₀^k/c_k ≤ 1 + e^{−β_kτ₀¹}(M/k^r − 1)` and
/// `e^{−β_kτ₁¹}(1 − M/k^r) ≤ Y₁^k/c_k ≤ e^{−β_kτ₁¹}(1 + M/k^r)`.
pub fn refined_envelope(p: &Params, k: usize, r: f64, m: f64, first_hold: f64, which: Target) -> Result<(f64, f64)> {
    check_exponent(r)?;
    p.validate()?;
    if k == 0 {
        return Err(Error::Argument("modes are numbered from 1".into()));
    }
    let w = m / (k as f64).powf(r);
    let e = (-p.beta(k) * first_hold).exp();
    Ok(match which {
        Target::Y0 => (1.0 - e * (w + 1.0), 1.0 + e * (w - 1.0)),
        Target::Y1 => (e * (1.0 - w), e * (1.0 + w)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Params {
        Params::default()
    }

    fn with_rates(r0: f64, r1: f64) -> Params {
        Params {
            r0,
            r1,
            ..Params::default()
        }
    }

    #[test]
    fn slope_at_unit_parameters() {
        // γ = √2, ρ = 1.
        let g = 2f64.sqrt();
        let expect = 1.0 / (1.0 + g.tanh() / g);
        let s = dn_slope(&unit()).unwrap();
        assert!((s - expect).abs() < 1e-15);
        assert!((s - 0.6141814).abs() < 1e-7);
        assert_eq!(insect_flux(&unit()).unwrap(), s);
    }

    #[test]
    fn slope_series_converges_within_its_bound() {
        let exact = dn_slope(&unit()).unwrap();
        let mut previous_gap = f64::INFINITY;
        for terms in [1, 2, 5, 50, 1000, 100_000] {
            let s = dn_slope_series(&unit(), terms).unwrap();
            let gap = exact - s.value;
            assert!(gap >= -1e-15, "partial sums approach from below");
            assert!(gap <= s.tail_bound + 1e-15, "terms={terms}: gap {gap} bound {}", s.tail_bound);
            assert!(gap < previous_gap);
            previous_gap = gap;
        }
        let s = dn_slope_series(&unit(), 100_000).unwrap();
        assert!((s.value / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn slope_series_without_homogeneous_state() {
        // p → 0 removes the sum and leaves b/L.
        let p = with_rates(1e-300, 1.0);
        assert!((dn_slope_series(&p, 3).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slope_limits() {
        for rho in [0.25, 1.0, 4.0] {
            let at = |sum: f64| {
                let r1 = sum / (1.0 + rho);
                with_rates(rho * r1, r1)
            };
            let slow = at(1e-6);
            assert!((dn_slope(&slow).unwrap() / (1.0 - slow.p()) - 1.0).abs() < 1e-5);
            assert!((dn_slope(&at(1e8)).unwrap() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn mean_examples() {
        assert_eq!(dd_mean(&unit(), 1.0).unwrap(), 0.5);
        assert_eq!(dd_mean(&with_rates(3.0, 1.0), 1.0).unwrap(), 0.25);
        assert_eq!(dd_mean(&unit(), 0.0).unwrap(), 0.0);
        assert!(dd_mean(&unit(), 1.5).is_err());
    }

    #[test]
    fn beta_examples() {
        let pi2 = PI * PI;
        let y0 = beta_marginal(&unit(), 1, Target::Y0).unwrap();
        assert!((y0.alpha - (1.0 / pi2 + 1.0)).abs() < 1e-15 && (y0.beta - 1.0 / pi2).abs() < 1e-15);
        assert!((y0.alpha - 1.10132).abs() < 1e-5 && (y0.beta - 0.10132).abs() < 1e-5);
        let p = with_rates(0.7, 2.3);
        for k in 1..6 {
            let bk = p.beta(k);
            let y0 = beta_marginal(&p, k, Target::Y0).unwrap();
            let y1 = beta_marginal(&p, k, Target::Y1).unwrap();
            assert!((y0.mean() - (p.r1 + bk) / (p.r0 + p.r1 + bk)).abs() < 1e-15);
            assert!((y1.mean() - p.r1 / (p.r0 + p.r1 + bk)).abs() < 1e-15);
            assert!(y0.alpha > 0.0 && y0.beta > 0.0 && y1.alpha > 0.0 && y1.beta > 0.0);
            assert_eq!(y0.scale, p.c(k));
        }
    }

    #[test]
    fn variance_at_unit_parameters() {
        let g = 2f64.sqrt();
        let expect = (g / g.tanh() - 1.0) / 8.0;
        let v = dd_l2_variance(&unit()).unwrap();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.07398646).abs() < 1e-8);
    }

    #[test]
    fn variance_series_within_tail_bound() {
        let exact = dd_l2_variance(&unit()).unwrap();
        let s = dd_l2_variance_series(&unit(), 10_000).unwrap();
        let gap = exact - s.value;
        assert!(gap >= 0.0 && gap <= s.tail_bound);
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
        for r0 in grid {
            for r1 in grid {
                let p = with_rates(r0, r1);
                let s = dd_l2_variance_series(&p, 1_000_000).unwrap();
                assert!((dd_l2_variance(&p).unwrap() - s.value).abs() < 1e-6, "({r0}, {r1})");
            }
        }
    }

    #[test]
    fn mode_variances_sum_to_the_closed_form() {
        let p = with_rates(2.0, 0.5);
        let terms = 20_000;
        let total: f64 = (1..=terms).rev().map(|k| dd_mode_variance(&p, k).unwrap()).sum();
        let gap = dd_l2_variance(&p).unwrap() - total;
        // High modes keep the occupancy variance p(1 − p)c_k², so the tail is O(1/K).
        let bound = p.p() * (1.0 - p.p()) * 2.0 * p.length * p.b * p.b / (PI * PI * terms as f64);
        assert!(gap >= 0.0 && gap <= bound, "gap {gap} bound {bound}");
    }

    #[test]
    fn variance_vanishes_without_switching_away() {
        assert!(dd_l2_variance(&with_rates(1e-12, 1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn joint_moment_diagonal_is_beta_second_moment() {
        for p in [unit(), with_rates(0.3, 5.0), with_rates(7.0, 0.2)] {
            for k in 1..5 {
                let beta = beta_marginal(&p, k, Target::Y0).unwrap();
                let expect = p.c(k).powi(2) * beta.second_moment();
                let got = dd_joint_second_moment(&p, k, k).unwrap();
                assert!((got - expect).abs() < 1e-12, "k={k}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn joint_moment_symmetry_and_limit() {
        let p = with_rates(1.3, 0.4);
        for (n, m) in [(1, 2), (2, 5), (3, 4)] {
            let (a, b) = (dd_joint_second_moment(&p, n, m).unwrap(), dd_joint_second_moment(&p, m, n).unwrap());
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
        let pinned = with_rates(1.0, 1e8);
        let v = dd_joint_second_moment(&pinned, 1, 2).unwrap();
        assert!((v / (pinned.c(1) * pinned.c(2)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sandwich_examples() {
        assert_eq!(sandwich_bounds(1, 2, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(sandwich_bounds(1, 2, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(sandwich_bounds(1, 2, 0.5).unwrap(), (0.0625, 0.9375));
        assert!(sandwich_bounds(2, 2, 0.5).is_err());
        assert!(sandwich_bounds(1, 2, 1.5).is_err());
        for k in 1..4 {
            for n in k + 1..8 {
                for i in 0..=20 {
                    let (lo, hi) = sandwich_bounds(k, n, i as f64 / 20.0).unwrap();
                    assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
                }
            }
        }
    }

    #[test]
    fn envelopes() {
        let (lo, hi) = regularity_envelope(4, 0.4, 2.0, Target::Y1).unwrap();
        assert_eq!(lo, -hi);
        let (lo, hi) = regularity_envelope(1_000_000, 0.4, 2.0, Target::Y0).unwrap();
        assert!(hi - lo < 0.02 && lo < 1.0 && hi > 1.0);
        assert!(regularity_envelope(4, 0.5, 1.0, Target::Y0).is_err());
        let (lo, hi) = refined_envelope(&unit(), 2, 0.4, 0.5, 0.1, Target::Y1).unwrap();
        let e = (-4.0 * PI * PI * 0.1f64).exp();
        assert!((lo - e * (1.0 - 0.5 / 2f64.powf(0.4))).abs() < 1e-15 && hi > lo);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(dn_slope(&with_rates(-1.0, 1.0)).is_err());
        assert_eq!(dd_l2_variance(&Params { b: 0.0, ..unit() }).unwrap(), 0.0);
        assert!(dd_l2_variance(&Params { b: f64::NAN, ..unit() }).is_err());
        assert!(dn_slope_series(&unit(), 0).is_err());
    }
}
