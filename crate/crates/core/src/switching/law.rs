use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::rng::open01;

/// Which of the two dynamics is active; the value of the jump process `J_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    Zero,
    One,
}

impl Mode {
    pub fn bit(self) -> u8 {
        match self {
            Mode::Zero => 0,
            Mode::One => 1,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Mode::One
        } else {
            Mode::Zero
        }
    }
}

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous holding-time law given by its mean, CDF and inverse CDF.
#[derive(Clone)]
pub struct GeneralLaw {
    mean: f64,
    cdf: Curve,
    inverse_cdf: Curve,
}

/// Distribution of one holding time (`μ₀` or `μ₁`).
#[derive(Clone)]
pub enum HoldingLaw {
    Exponential { rate: f64 },
    General(GeneralLaw),
}

impl fmt::Debug for HoldingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoldingLaw::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            HoldingLaw::General(g) => write!(f, "General(mean={})", g.mean),
        }
    }
}

const INVERSE_CHECK_GRID: [f64; 9] = [0.02, 0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 4.0];

impl HoldingLaw {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Config(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(HoldingLaw::Exponential { rate })
    }

    /// Builds a general continuous law and checks it on a test grid.
    ///
    /// Lattice (arithmetic) laws are rejected: their step CDF cannot satisfy
    /// `inverse_cdf(cdf(x)) = x` at off-lattice points.
    pub fn general<C, Q>(mean: f64, cdf: C, inverse_cdf: Q) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::Config(format!("holding mean must be positive and finite, got {mean}")));
        }
        let law = GeneralLaw {
            mean,
            cdf: Arc::new(cdf),
            inverse_cdf: Arc::new(inverse_cdf),
        };
        let at_zero = (law.cdf)(0.0);
        if at_zero.abs() > 1e-15 {
            return Err(Error::Config(format!("cdf(0) must be 0, got {at_zero}")));
        }
        let far = (law.cdf)(mean * 1e4);
        if far < 1.0 - 1e-6 {
            return Err(Error::Config(format!("cdf does not approach 1 (cdf(1e4·mean) = {far})")));
        }
        let mut prev = 0.0;
        for i in 1..=400 {
            let x = mean * 0.025 * i as f64;
            let v = (law.cdf)(x);
            if !(0.0..=1.0).contains(&v) || v + 1e-15 < prev {
                return Err(Error::Config(format!("cdf is not a nondecreasing map into [0,1] near x={x}")));
            }
            prev = v;
        }
        let mut checked = 0;
        for frac in INVERSE_CHECK_GRID {
            let x = mean * frac;
            let u = (law.cdf)(x);
            if u <= 0.0 || u >= 1.0 {
                continue;
            }
            checked += 1;
            let back = (law.inverse_cdf)(u);
            if (back - x).abs() > 1e-12 * x.max(mean) {
                return Err(Error::Config(format!(
                    "inverse_cdf(cdf({x})) = {back}; law must be continuous and non-arithmetic"
                )));
            }
        }
        if checked == 0 {
            return Err(Error::Config("cdf has no mass on the check grid around the mean".into()));
        }
        Ok(HoldingLaw::General(law))
    }

    /// Uniform law on `[lo, hi]`, a convenient non-exponential example.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("uniform law needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Self::general(
            0.5 * (lo + hi),
            move |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            move |u| lo + u * (hi - lo),
        )
    }

    pub fn mean(&self) -> f64 {
        match self {
            HoldingLaw::Exponential { rate } => 1.0 / rate,
            HoldingLaw::General(g) => g.mean,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match self {
            HoldingLaw::Exponential { rate } => Some(*rate),
            HoldingLaw::General(_) => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            HoldingLaw::Exponential { rate } => -(-rate * x).exp_m1(),
            HoldingLaw::General(g) => (g.cdf)(x),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            HoldingLaw::Exponential { rate } => -(-u).ln_1p() / rate,
            HoldingLaw::General(g) => (g.inverse_cdf)(u),
        }
    }

    /// One strictly positive draw, by inversion of a single open-interval uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open01(rng);
        match self {
            HoldingLaw::Exponential { rate } => -u.ln() / rate,
            HoldingLaw::General(g) => (g.inverse_cdf)(u).max(f64::MIN_POSITIVE),
        }
    }

    /// `E min(τ, x) = ∫₀ˣ (1 − F(s)) ds`.
    pub fn expected_min(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            HoldingLaw::Exponential { rate } => -(-rate * x).exp_m1() / rate,
            HoldingLaw::General(g) => {
                let survival = |s: f64| 1.0 - (g.cdf)(s);
                let upper = x.min(g.mean * 1e4);
                let tail = if x > upper { x - upper } else { 0.0 };
                adaptive_simpson(&survival, 0.0, upper, 1e-14 * g.mean) + tail * survival(upper)
            }
        }
    }

    /// `E e^{−λτ}` when available in closed form.
    pub fn laplace_transform(&self, lambda: f64) -> Option<f64> {
        self.rate().map(|r| r / (r + lambda))
    }

    /// CDF of the stationary age `E min(τ, x) / E τ`.
    pub fn age_cdf(&self, x: f64) -> f64 {
        match self {
            HoldingLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            HoldingLaw::General(_) => (self.expected_min(x) / self.mean()).clamp(0.0, 1.0),
        }
    }

    /// Quantile of the stationary age law; bisection to 1e-12 for general laws.
    pub fn age_quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Argument(format!("age quantile needs u in [0,1), got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        match self {
            HoldingLaw::Exponential { rate } => Ok(-(-u).ln_1p() / rate),
            HoldingLaw::General(g) => {
                let mut lo = 0.0;
                let mut hi = g.mean;
                let mut grown = 0;
                while self.age_cdf(hi) < u {
                    lo = hi;
                    hi *= 2.0;
                    grown += 1;
                    if grown > 80 {
                        return Err(Error::Numeric(format!(
                            "age quantile bracket did not close: u={u}, hi={hi:e}, age_cdf(hi)={}",
                            self.age_cdf(hi)
                        )));
                    }
                }
                let mut iterations = 0;
                while hi - lo > 1e-12 * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if self.age_cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    iterations += 1;
                    if iterations > 200 {
                        return Err(Error::Numeric(format!(
                            "age quantile bisection stalled: u={u}, bracket=[{lo:e}, {hi:e}]"
                        )));
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

/// The pair of holding-time laws `(μ₀, μ₁)`.
#[derive(Debug, Clone)]
pub struct SwitchLaw {
    pub zero: HoldingLaw,
    pub one: HoldingLaw,
}

impl SwitchLaw {
    pub fn new(zero: HoldingLaw, one: HoldingLaw) -> Self {
        SwitchLaw { zero, one }
    }

    pub fn exponential(r0: f64, r1: f64) -> Result<Self> {
        Ok(SwitchLaw::new(HoldingLaw::exponential(r0)?, HoldingLaw::exponential(r1)?))
    }

    pub fn law(&self, mode: Mode) -> &HoldingLaw {
        match mode {
            Mode::Zero => &self.zero,
            Mode::One => &self.one,
        }
    }

    pub fn is_exponential(&self) -> bool {
        self.zero.rate().is_some() && self.one.rate().is_some()
    }

    /// Long-run probability of `J_t = 1`: `Eτ₁ / (Eτ₀ + Eτ₁)`.
    pub fn occupancy_p(&self) -> f64 {
        let m0 = self.zero.mean();
        let m1 = self.one.mean();
        m1 / (m0 + m1)
    }

    pub fn stationary_age_cdf(&self, mode: Mode, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Argument(format!("age must be nonnegative, got {x}")));
        }
        Ok(self.law(mode).age_cdf(x))
    }

    /// Draw from the stationary age law of `mode`.
    pub fn sample_stationary_age<R: Rng + ?Sized>(&self, mode: Mode, rng: &mut R) -> Result<f64> {
        match self.law(mode) {
            HoldingLaw::Exponential { rate } => Ok(-open01(rng).ln() / rate),
            law => law.age_quantile(1.0 - open01(rng)),
        }
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let t0 = self.zero.sample(rng);
        let t1 = self.one.sample(rng);
        (t0, t1)
    }
}
