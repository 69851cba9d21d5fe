//! Monte Carlo estimators that compare the engine with closed forms, with
//! known laws, and with the independent oracles.

use rand::Rng;
use serde::Serialize;

use super::ks::{ks_one_sample, ks_two_sample, KSReport};
use super::oracles::{ode_orbit, observed_order, FdOracle};
use super::special::beta_cdf;
use super::stats::{Moments, StatReport};
use crate::closed_form::{self, Params};
use crate::error::{Error, Result};
use crate::hybrid::{FlowPair, PullbackOptions, State, Target, Variant};
use crate::rng::{par_fold, StreamRng};
use crate::spectral::{
    make_flow_pair, project_ramp, truncation_tolerance, Basis, Example, GridEvaluator, HeatPair, ModelParams,
    SpectralField,
};
use crate::switching::{Environment, Mode, SwitchLaw};

const CHUNK: usize = 256;

struct Tally<A> {
    acc: A,
    failures: usize,
    first_failure: Option<Error>,
    fatal: Option<Error>,
}

/// Folds `n` independent draws. Pullback non-convergence drops the draw; more
/// than 1% of such drops, or any other error, fails the whole run.
fn fold_draws<A, I, F, M>(seed: u64, n: usize, init: I, draw: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &mut StreamRng) -> Result<()> + Sync + Send,
    M: Fn(&mut A, A),
{
    let tally = par_fold(
        seed,
        n,
        CHUNK,
        || Tally {
            acc: init(),
            failures: 0,
            first_failure: None,
            fatal: None,
        },
        |t, _, rng| {
            if t.fatal.is_some() {
                return;
            }
            match draw(&mut t.acc, rng) {
                Ok(()) => {}
                Err(e @ Error::NonConvergence { .. }) => {
                    t.failures += 1;
                    t.first_failure.get_or_insert(e);
                }
                Err(e) => t.fatal = Some(e),
            }
        },
        |total, part| {
            merge(&mut total.acc, part.acc);
            total.failures += part.failures;
            if total.first_failure.is_none() {
                total.first_failure = part.first_failure;
            }
            if total.fatal.is_none() {
                total.fatal = part.fatal;
            }
        },
    );
    if let Some(e) = tally.fatal {
        return Err(e);
    }
    if tally.failures * 100 > n {
        return Err(tally.first_failure.expect("failures recorded"));
    }
    Ok(tally.acc)
}

/// Draws in index order; see [`fold_draws`] for failure handling.
fn collect_draws<T, F>(seed: u64, n: usize, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync + Send,
{
    fold_draws(
        seed,
        n,
        Vec::new,
        |acc, rng| {
            acc.push(draw(rng)?);
            Ok(())
        },
        |acc, part| acc.extend(part),
    )
}

fn merge_all(total: &mut [Moments], part: &[Moments]) {
    total.iter_mut().zip(part).for_each(|(t, p)| t.merge(p));
}

/// Pullback and stationary draws for one spectral example.
#[derive(Debug, Clone)]
pub struct Sampler {
    example: Example,
    params: ModelParams,
    pair: HeatPair,
    law: SwitchLaw,
    origin: SpectralField,
    opts: PullbackOptions,
}

impl Sampler {
    pub fn new(example: Example, params: &ModelParams, opts: PullbackOptions) -> Result<Self> {
        let pair = make_flow_pair(example, params)?;
        let origin = SpectralField::zero(*pair.one.state_basis());
        Ok(Sampler {
            example,
            params: *params,
            law: params.law()?,
            pair,
            origin,
            opts,
        })
    }

    pub fn example(&self) -> Example {
        self.example
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn pair(&self) -> &HeatPair {
        &self.pair
    }

    pub fn law(&self) -> &SwitchLaw {
        &self.law
    }

    pub fn basis(&self) -> &Basis {
        self.origin.basis()
    }

    pub fn origin(&self) -> &SpectralField {
        &self.origin
    }

    pub fn options(&self) -> &PullbackOptions {
        &self.opts
    }

    /// Pullback limit `Y₀` or `Y₁` on a fresh environment.
    pub fn pullback(&self, target: Target, rng: &mut StreamRng) -> Result<SpectralField> {
        Ok(self.pair.fresh_pullback(&self.law, &self.origin, target, rng, &self.opts)?.value)
    }

    /// One draw of `ū`.
    pub fn stationary(&self, rng: &mut StreamRng) -> Result<SpectralField> {
        let draw = self.pair.stationary_sample(
            &self.law,
            &self.origin,
            rng,
            crate::hybrid::StationaryForm::Auto,
            &self.opts,
        )?;
        Ok(draw.value)
    }

    /// `u(t)` from the zero field on a fresh environment.
    pub fn process(&self, times: &[f64], rng: &mut StreamRng) -> Result<Vec<SpectralField>> {
        let mut env = Environment::sample(&self.law, rng.random(), 0);
        times.iter().map(|&t| self.pair.process_at(&mut env, &self.origin, t)).collect()
    }
}

/// Pointwise Monte Carlo mean of `ū` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldReport {
    pub example: Example,
    pub x: Vec<f64>,
    /// Targets are the `K`-mode projection of the exact mean profile.
    pub points: Vec<StatReport>,
    pub within_two_sigma: f64,
    pub within_three_sigma: f64,
    /// Least-squares slope through the origin of the estimated mean, against
    /// the exact slope.
    pub slope: StatReport,
    pub slope_relative_error: f64,
}

impl MeanFieldReport {
    /// All points within 3σ and at least 95% within 2σ.
    pub fn pointwise_pass(&self) -> bool {
        self.within_three_sigma == 1.0 && self.within_two_sigma >= 0.95
    }
}

/// Exact slope of the mean stationary profile.
pub fn mean_slope(example: Example, params: &ModelParams) -> Result<f64> {
    let cf = Params::from(params);
    match example {
        Example::Dd => Ok((1.0 - cf.p()) * cf.b / cf.length),
        Example::Dn => closed_form::dn_slope(&cf),
        Example::Ode1d => Err(Error::Config("the scalar example has no profile".into())),
    }
}

pub fn estimate_mean_field(
    example: Example,
    params: &ModelParams,
    n: usize,
    intervals: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<MeanFieldReport> {
    if n < 100 {
        return Err(Error::Argument(format!("mean-field estimation needs at least 100 samples, got {n}")));
    }
    let sampler = Sampler::new(example, params, *opts)?;
    let grid = GridEvaluator::interior(sampler.basis(), intervals)?;
    let x = grid.points().to_vec();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let g = x.len();
    let acc = fold_draws(
        seed,
        n,
        || vec![Moments::default(); g + 1],
        |acc, rng| {
            let field = sampler.stationary(rng)?;
            let values = grid.evaluate(field.coeffs());
            let mut slope = 0.0;
            for ((m, v), xi) in acc.iter_mut().zip(&values).zip(&x) {
                m.push(*v);
                slope += xi * v;
            }
            acc[g].push(slope / sxx);
            Ok(())
        },
        |total, part| merge_all(total, &part),
    )?;

    let slope_target = mean_slope(example, params)?;
    let projected = project_ramp(sampler.basis(), slope_target * params.length);
    let targets = grid.evaluate(&projected.coeffs);
    let points: Vec<StatReport> = acc[..g]
        .iter()
        .zip(&targets)
        .map(|(m, t)| StatReport::from_moments(m, *t, 3.0))
        .collect();
    let fraction = |limit: f64| points.iter().filter(|r| r.z.abs() <= limit).count() as f64 / g as f64;
    let slope = StatReport::from_moments(&acc[g], slope_target, 3.0);
    Ok(MeanFieldReport {
        example,
        within_two_sigma: fraction(2.0),
        within_three_sigma: fraction(3.0),
        slope_relative_error: (slope.estimate - slope_target).abs() / slope_target.abs(),
        slope,
        points,
        x,
    })
}

/// `E‖ū − Eū‖²` of the DD example from the coefficient vectors, against the
/// closed form.
///
/// Two passes over the same streams: the first finds the mean vector, the
/// second averages the squared deviations. The stated `K` truncates the
/// estimate by the variance carried in the modes above `K`.
pub fn estimate_l2_variance(params: &ModelParams, n: usize, seed: u64, opts: &PullbackOptions) -> Result<StatReport> {
    if n < 2 {
        return Err(Error::Argument(format!("variance estimation needs at least 2 samples, got {n}")));
    }
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let modes = params.modes;
    let (sum, count) = fold_draws(
        seed,
        n,
        || (vec![0.0; modes], 0u64),
        |(sum, count), rng| {
            let field = sampler.stationary(rng)?;
            sum.iter_mut().zip(field.coeffs()).for_each(|(s, c)| *s += c);
            *count += 1;
            Ok(())
        },
        |(sum, count), (s, c)| {
            sum.iter_mut().zip(s).for_each(|(a, b)| *a += b);
            *count += c;
        },
    )?;
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let spread = fold_draws(
        seed,
        n,
        Moments::default,
        |m, rng| {
            let field = sampler.stationary(rng)?;
            m.push(field.coeffs().iter().zip(&mean).map(|(c, a)| (c - a).powi(2)).sum());
            Ok(())
        },
        |m, part| m.merge(&part),
    )?;
    let correction = spread.n as f64 / (spread.n as f64 - 1.0);
    let target = closed_form::dd_l2_variance(&Params::from(params))?;
    Ok(StatReport::new(
        spread.mean * correction,
        spread.stderr() * correction,
        spread.n,
        target,
        3.0,
    ))
}

/// Samples of `Y^k / c_k` for the DD example.
///
/// Values outside `[0, 1]` by more than 1e-9 are reported as data errors;
/// smaller excursions are clamped.
pub fn normalized_marginals(
    params: &ModelParams,
    k: usize,
    which: Target,
    n: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<Vec<f64>> {
    if k == 0 || k > params.modes {
        return Err(Error::Argument(format!("mode {k} outside 1..={}", params.modes)));
    }
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let scale = Params::from(params).c(k);
    if scale == 0.0 {
        return Err(Error::Argument("normalized coefficients need b != 0".into()));
    }
    collect_draws(seed, n, |rng| {
        let y = sampler.pullback(which, rng)?;
        let v = y.coeffs()[k - 1] / scale;
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::Data(format!("normalized coefficient {v} of mode {k} outside [0, 1]")));
        }
        Ok(v.clamp(0.0, 1.0))
    })
}

/// Width of the band below 1 that normalized coefficients cannot resolve.
///
/// Near `Y^k = c_k` a coefficient is held to absolute accuracy
/// `tol/|c_k|`, while Beta laws with a small second parameter put much of
/// their mass within 1e-16 of 1. Distribution tests therefore censor both
/// the samples and the law at `1 − UPPER_RESOLUTION`.
pub const UPPER_RESOLUTION: f64 = 1e-8;

/// One-sample KS of normalized samples against `Beta(a, b)` censored at
/// `1 − UPPER_RESOLUTION`.
pub fn ks_beta(samples: &[f64], a: f64, b: f64, alpha: f64) -> Result<KSReport> {
    let cap = 1.0 - UPPER_RESOLUTION;
    let censored: Vec<f64> = samples.iter().map(|x| x.min(cap)).collect();
    ks_one_sample(&censored, |x| if x >= cap { 1.0 } else { beta_cdf(a, b, x) }, alpha)
}

/// KS test of the DD coefficient `k` of `Y₀` or `Y₁` against its Beta law.
pub fn ks_beta_marginal(
    params: &ModelParams,
    k: usize,
    which: Target,
    n: usize,
    alpha: f64,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<KSReport> {
    let law = closed_form::beta_marginal(&Params::from(params), k, which)?;
    let samples = normalized_marginals(params, k, which, n, seed, opts)?;
    ks_beta(&samples, law.alpha, law.beta, alpha)
}

/// Scalar statistic applied to both sides of the invariance identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// Coefficient `k` in the state basis.
    Coefficient(usize),
    /// Field value at a point.
    Value(f64),
}

impl Statistic {
    fn apply(&self, field: &SpectralField) -> Result<f64> {
        match *self {
            Statistic::Coefficient(k) => field
                .coeffs()
                .get(k.wrapping_sub(1))
                .copied()
                .ok_or_else(|| Error::Argument(format!("mode {k} outside 1..={}", field.coeffs().len()))),
            Statistic::Value(x) => field.evaluate(x),
        }
    }
}

/// Samples of the statistic on `Y` and on `Φ_τ(Y′)` (see
/// [`FlowPair::invariance_pair`]).
pub fn invariance_statistics(
    example: Example,
    params: &ModelParams,
    which: Target,
    statistic: Statistic,
    n: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sampler = Sampler::new(example, params, *opts)?;
    let pairs = collect_draws(seed, n, |rng| {
        let (a, b) = sampler
            .pair
            .invariance_pair(&sampler.law, &sampler.origin, which, rng, &sampler.opts)?;
        Ok((statistic.apply(&a)?, statistic.apply(&b)?))
    })?;
    Ok(pairs.into_iter().unzip())
}

/// Two-sample KS between coefficient `k` of `Y₀` and of `Φ⁰_{τ₀}(Y₁)` (DD).
pub fn invariance_two_sample(
    params: &ModelParams,
    k: usize,
    n: usize,
    alpha: f64,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<KSReport> {
    let (a, b) = invariance_statistics(Example::Dd, params, Target::Y0, Statistic::Coefficient(k), n, seed, opts)?;
    ks_two_sample(&a, &b, alpha)
}

/// State and age at a large time, against the stationary renewal laws.
#[derive(Debug, Clone, Serialize)]
pub struct AgeReport {
    pub time: f64,
    pub zero: KSReport,
    pub one: KSReport,
    /// Frequency of `J = 1` against `p`.
    pub occupancy: StatReport,
}

impl AgeReport {
    pub fn pass(&self) -> bool {
        self.zero.pass && self.one.pass && self.occupancy.pass
    }
}

pub fn age_distribution_test(law: &SwitchLaw, t_large: f64, n: usize, alpha: f64, seed: u64) -> Result<AgeReport> {
    let slowest = law.law(Mode::Zero).mean().max(law.law(Mode::One).mean());
    if !(t_large >= 20.0 * slowest) {
        return Err(Error::Argument(format!(
            "age test needs t >= 20 x the largest mean holding time ({}), got {t_large}",
            20.0 * slowest
        )));
    }
    for mode in [Mode::Zero, Mode::One] {
        law.stationary_age_cdf(mode, slowest)?;
    }
    let draws = collect_draws(seed, n, |rng| {
        let mut env = Environment::sample(law, rng.random(), 0);
        let point = env.locate(t_large)?;
        Ok((point.state, point.age))
    })?;
    let ages = |mode: Mode| -> Vec<f64> { draws.iter().filter(|d| d.0 == mode).map(|d| d.1).collect() };
    let test = |mode: Mode| ks_one_sample(&ages(mode), |x| law.stationary_age_cdf(mode, x).unwrap_or(f64::NAN), alpha);
    let indicator: Vec<f64> = draws.iter().map(|d| d.0.bit() as f64).collect();
    Ok(AgeReport {
        time: t_large,
        zero: test(Mode::Zero)?,
        one: test(Mode::One)?,
        occupancy: StatReport::from_moments(&Moments::from_slice(&indicator), law.occupancy_p(), 3.0),
    })
}

/// A test function `φ` given by samples of `φ` and `φ″` on the uniform grid
/// `x_j = jL/G`, `j = 0..=G`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    length: f64,
    phi: Vec<f64>,
    phi2: Vec<f64>,
}

impl TestFunction {
    pub fn from_samples(length: f64, phi: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        if phi.len() != phi2.len() || phi.len() < 3 {
            return Err(Error::Argument("φ and φ″ need matching grids of at least 3 points".into()));
        }
        if phi[0] != 0.0 || phi[phi.len() - 1] != 0.0 {
            return Err(Error::Argument("test function must vanish at both ends".into()));
        }
        Ok(TestFunction { length, phi, phi2 })
    }

    /// Cubic B-spline on `[L/4, 3L/4]` with uniform knots.
    pub fn cubic_bump(length: f64, intervals: usize) -> Self {
        let h = length / 8.0;
        let mut phi = Vec::with_capacity(intervals + 1);
        let mut phi2 = Vec::with_capacity(intervals + 1);
        for j in 0..=intervals {
            let s = (j as f64 * length / intervals as f64 - length / 4.0) / h;
            let (v, d2) = match s {
                s if !(0.0..=4.0).contains(&s) => (0.0, 0.0),
                s if s < 1.0 => (s.powi(3) / 6.0, s),
                s if s < 2.0 => ((-3.0 * s.powi(3) + 12.0 * s * s - 12.0 * s + 4.0) / 6.0, 4.0 - 3.0 * s),
                s if s < 3.0 => ((3.0 * s.powi(3) - 24.0 * s * s + 60.0 * s - 44.0) / 6.0, 3.0 * s - 8.0),
                s => ((4.0 - s).powi(3) / 6.0, 4.0 - s),
            };
            phi.push(v);
            phi2.push(d2 / (h * h));
        }
        TestFunction { length, phi, phi2 }
    }

    /// Trapezoid weights `(⟨φ, e_k⟩, ⟨φ″, e_k⟩)` for the basis functions.
    fn weights(&self, basis: &Basis) -> (Vec<f64>, Vec<f64>) {
        let intervals = self.phi.len() - 1;
        let dx = self.length / intervals as f64;
        let mut w = vec![0.0; basis.modes];
        let mut w2 = vec![0.0; basis.modes];
        let mut e = vec![0.0; basis.modes];
        for j in 0..=intervals {
            if self.phi[j] == 0.0 && self.phi2[j] == 0.0 {
                continue;
            }
            let q = if j == 0 || j == intervals { 0.5 * dx } else { dx };
            basis.functions_at(j as f64 * dx, &mut e);
            for k in 0..basis.modes {
                w[k] += q * self.phi[j] * e[k];
                w2[k] += q * self.phi2[j] * e[k];
            }
        }
        (w, w2)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual of `d/dt⟨φ, Eu(t)⟩ = ⟨Dφ″, Eu(t)⟩` from central differences on
/// common environments.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeakResidualReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    /// Central-difference truncation allowance `dt²/6 · E|d³/dt³⟨φ, u⟩|`.
    pub budget: f64,
    pub z: f64,
    pub pass: bool,
}

pub fn weak_mean_pde_residual(
    example: Example,
    params: &ModelParams,
    t: f64,
    dt: f64,
    n: usize,
    seed: u64,
    test: &TestFunction,
) -> Result<WeakResidualReport> {
    if !(dt > 0.0 && t > 2.0 * dt) {
        return Err(Error::Argument(format!("need 0 < 2dt < t, got t={t}, dt={dt}")));
    }
    if test.length != params.length {
        return Err(Error::Argument("test function lives on a different interval".into()));
    }
    let sampler = Sampler::new(example, params, PullbackOptions::default())?;
    let (w, w2) = test.weights(sampler.basis());
    let times: Vec<f64> = (-2..=2).map(|j| t + j as f64 * dt).collect();
    let d = params.diffusivity;
    let [residual, third] = fold_draws(
        seed,
        n,
        || [Moments::default(); 2],
        |acc, rng| {
            let u = sampler.process(&times, rng)?;
            let f: Vec<f64> = u.iter().map(|x| dot(&w, x.coeffs())).collect();
            let derivative = (f[3] - f[1]) / (2.0 * dt);
            acc[0].push(derivative - d * dot(&w2, u[2].coeffs()));
            acc[1].push(((f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2.0 * dt.powi(3))).abs());
            Ok(())
        },
        |total, part| merge_all(total, &part),
    )?;
    let budget = dt * dt / 6.0 * third.mean;
    let stderr = residual.stderr();
    let z = if residual.mean == 0.0 { 0.0 } else { residual.mean / stderr };
    Ok(WeakResidualReport {
        estimate: residual.mean,
        stderr,
        n: residual.n,
        budget,
        z,
        pass: residual.mean.abs() <= 3.0 * stderr + budget,
    })
}

/// `⟨Dφ″, ū⟩` over stationary draws, against 0.
pub fn stationary_weak_residual(
    example: Example,
    params: &ModelParams,
    n: usize,
    seed: u64,
    opts: &PullbackOptions,
    test: &TestFunction,
) -> Result<StatReport> {
    let sampler = Sampler::new(example, params, *opts)?;
    let (_, w2) = test.weights(sampler.basis());
    let d = params.diffusivity;
    let m = fold_draws(
        seed,
        n,
        Moments::default,
        |m, rng| {
            let u = sampler.stationary(rng)?;
            m.push(d * dot(&w2, u.coeffs()));
            Ok(())
        },
        |m, part| m.merge(&part),
    )?;
    Ok(StatReport::from_moments(&m, 0.0, 3.0))
}

/// `E⟨Y₀, b_n⟩⟨Y₀, b_m⟩` for each mode pair over one set of DD pullback
/// draws, against the closed form.
pub fn joint_moment_mc(
    params: &ModelParams,
    pairs: &[(usize, usize)],
    n: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<Vec<StatReport>> {
    for &(a, b) in pairs {
        if a == 0 || b == 0 || a.max(b) > params.modes {
            return Err(Error::Argument(format!("modes ({a}, {b}) outside 1..={}", params.modes)));
        }
    }
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let acc = fold_draws(
        seed,
        n,
        || vec![Moments::default(); pairs.len()],
        |acc, rng| {
            let y = sampler.pullback(Target::Y0, rng)?;
            let c = y.coeffs();
            for (m, &(a, b)) in acc.iter_mut().zip(pairs) {
                m.push(c[a - 1] * c[b - 1]);
            }
            Ok(())
        },
        |total, part| merge_all(total, &part),
    )?;
    let cf = Params::from(params);
    acc.iter()
        .zip(pairs)
        .map(|(m, &(a, b))| Ok(StatReport::from_moments(m, closed_form::dd_joint_second_moment(&cf, a, b)?, 3.0)))
        .collect()
}

/// Per-step decay of pullback residuals against the contraction certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayReport {
    /// `Σ r_{n+1} / Σ r_n` over paths and steps `n ≥ 2` with `r_n ≥ 1e-8`.
    pub ratio: f64,
    /// `E K₀(τ₀) · E K₁(τ₁)`.
    pub target: f64,
    pub paths: usize,
    pub steps: usize,
    pub pass: bool,
}

/// Residual decay of `Y₁` pullbacks of the DD example from the zero field.
///
/// The first step is skipped: its residual carries every mode, while later
/// ones are dominated by the slowest mode whose modulus the certificate bounds.
pub fn residual_decay(params: &ModelParams, paths: usize, seed: u64, opts: &PullbackOptions) -> Result<DecayReport> {
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let histories = collect_draws(seed, paths, |rng| {
        Ok(sampler
            .pair
            .fresh_pullback(&sampler.law, &sampler.origin, Target::Y1, rng, &sampler.opts)?
            .history)
    })?;
    let (mut num, mut den, mut steps) = (0.0, 0.0, 0);
    for h in &histories {
        for w in h.windows(2).skip(1) {
            if w[0] >= 1e-8 {
                den += w[0];
                num += w[1];
                steps += 1;
            }
        }
    }
    let target = sampler
        .pair
        .certify_contraction(&sampler.law, 100, &mut crate::rng::stream(seed, u64::MAX))?
        .product;
    let ratio = num / den;
    Ok(DecayReport {
        ratio,
        target,
        paths: histories.len(),
        steps,
        pass: (0.5 * target..=2.0 * target).contains(&ratio),
    })
}

/// Distance between the `Y₁` pullbacks from the zero field and from a far
/// initial field (every coefficient `b`) on one environment.
pub fn initial_condition_gap(example: Example, params: &ModelParams, seed: u64, opts: &PullbackOptions) -> Result<f64> {
    let sampler = Sampler::new(example, params, *opts)?;
    let far = SpectralField::new(*sampler.basis(), vec![params.b.abs().max(1.0); params.modes])?;
    let mut env = Environment::sample(&sampler.law, seed, 0);
    let a = sampler.pair.pullback_sample(&mut env, &sampler.origin, Target::Y1, opts)?;
    let b = sampler.pair.pullback_sample(&mut env, &far, Target::Y1, opts)?;
    Ok(a.value.distance(&b.value))
}

/// Whether the normalized DD coefficients satisfy the sandwich bounds for
/// every pair `(k, n)`, with `slack` on the bounds.
pub fn sandwich_holds(params: &Params, coeffs: &[f64], pairs: &[(usize, usize)], slack: f64) -> Result<bool> {
    for &(k, n) in pairs {
        if n > coeffs.len() {
            return Err(Error::Argument(format!("mode {n} outside 1..={}", coeffs.len())));
        }
        let xk = coeffs[k - 1] / params.c(k);
        let xn = coeffs[n - 1] / params.c(n);
        if !(-slack..=1.0 + slack).contains(&xk) {
            return Ok(false);
        }
        let (lo, hi) = closed_form::sandwich_bounds(k, n, xk.clamp(0.0, 1.0))?;
        if xn < lo - slack || xn > hi + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pathwise structure of stationary DD draws.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathwiseReport {
    pub samples: usize,
    pub sandwich_fraction: f64,
    /// Fraction with grid values in `[min(0,b) − ε_K, max(0,b) + ε_K]`.
    pub box_fraction: f64,
    pub epsilon: f64,
    pub sup: f64,
    pub inf: f64,
}

impl PathwiseReport {
    pub fn pass(&self) -> bool {
        self.sandwich_fraction == 1.0 && self.box_fraction == 1.0
    }
}

pub fn pathwise_structure(
    params: &ModelParams,
    n: usize,
    pairs: &[(usize, usize)],
    intervals: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<PathwiseReport> {
    for &(k, m) in pairs {
        if k == 0 || k >= m || m > params.modes {
            return Err(Error::Argument(format!("pair ({k}, {m}) needs 1 <= k < n <= K")));
        }
    }
    let cf = Params::from(params);
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let grid = GridEvaluator::interior(sampler.basis(), intervals)?;
    let epsilon = truncation_tolerance(sampler.basis(), params.b, intervals)?;
    let (lo, hi) = (params.b.min(0.0) - epsilon, params.b.max(0.0) + epsilon);
    let draws = collect_draws(seed, n, |rng| {
        let u = sampler.stationary(rng)?;
        let values = grid.evaluate(u.coeffs());
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((sandwich_holds(&cf, u.coeffs(), pairs, 1e-12)?, sup, inf))
    })?;
    let count = draws.len();
    Ok(PathwiseReport {
        samples: count,
        sandwich_fraction: draws.iter().filter(|d| d.0).count() as f64 / count as f64,
        box_fraction: draws.iter().filter(|d| d.1 <= hi && d.2 >= lo).count() as f64 / count as f64,
        epsilon,
        sup: draws.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max),
        inf: draws.iter().map(|d| d.2).fold(f64::INFINITY, f64::min),
    })
}

/// Least-squares fit of `ln|Y₁^k/c_k|` against `−β_k τ₁¹`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegressionReport {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct LineFit {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
}

impl LineFit {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
    }

    fn merge(&mut self, o: &LineFit) {
        self.n += o.n;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.sxy += o.sxy;
    }

    fn fit(&self) -> (f64, f64) {
        let slope = (self.n * self.sxy - self.sx * self.sy) / (self.n * self.sxx - self.sx * self.sx);
        (slope, (self.sy - slope * self.sx) / self.n)
    }
}

/// Regression over DD modes `k_lo..=k_hi` of `Y₁` pullbacks; passes when
/// the slope is within 0.05 of 1. Underflowed coefficients are skipped.
pub fn regularity_regression(
    params: &ModelParams,
    k_lo: usize,
    k_hi: usize,
    n: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<RegressionReport> {
    if k_lo == 0 || k_lo > k_hi || k_hi > params.modes {
        return Err(Error::Argument(format!("modes {k_lo}..={k_hi} outside 1..={}", params.modes)));
    }
    let cf = Params::from(params);
    let sampler = Sampler::new(Example::Dd, params, *opts)?;
    let fit = fold_draws(
        seed,
        n,
        LineFit::default,
        |fit, rng| {
            let mut env = Environment::sample(&sampler.law, rng.random(), 0);
            let y = sampler
                .pair
                .pullback_sample(&mut env, &sampler.origin, Target::Y1, &sampler.opts)?;
            let (_, first_on) = env.pair(1)?;
            for k in k_lo..=k_hi {
                let v = (y.value.coeffs()[k - 1] / cf.c(k)).abs();
                if v >= f64::MIN_POSITIVE && v.is_finite() {
                    fit.push(-cf.beta(k) * first_on, v.ln());
                }
            }
            Ok(())
        },
        |fit, part| fit.merge(&part),
    )?;
    if fit.n < 3.0 {
        return Err(Error::Data(format!("only {} usable coefficients for the regression", fit.n)));
    }
    let (slope, intercept) = fit.fit();
    Ok(RegressionReport {
        slope,
        intercept,
        points: fit.n as usize,
        pass: (slope - 1.0).abs() <= 0.05,
    })
}

/// Agreement of the spectral flows with the RK4 and Crank–Nicolson oracles.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleReport {
    /// Largest coefficient gap after three DD cycles with `K = 16`.
    pub ode_gap: f64,
    /// Interior sup-norm gap on a DN path at `t = 1`.
    pub fd_gap: f64,
    pub fd_tolerance: f64,
    /// Observed order of the FD oracle under halving of `dx` and `dt`.
    pub fd_order: f64,
    pub pass: bool,
}

pub fn oracle_triangle(params: &ModelParams, seed: u64) -> Result<OracleReport> {
    let law = params.law()?;
    let small = ModelParams { modes: 16, ..*params };
    let dd = make_flow_pair(Example::Dd, &small)?;
    let mut env = Environment::sample(&law, seed, 0);
    let origin = SpectralField::zero(*dd.one.state_basis());
    let spectral = dd.forward_orbit(&mut env, &origin, 3, Variant::Phi)?;
    let ode = ode_orbit(&small, &mut env, &[0.0; 16], 3, 1e-4)?;
    let ode_gap = spectral
        .coeffs()
        .iter()
        .zip(&ode)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let dn: FlowPair<_, _> = make_flow_pair(Example::Dn, params)?;
    let mut env = Environment::sample(&law, seed.wrapping_add(1), 0);
    let u = dn.process_at(&mut env, &SpectralField::zero(*dn.one.state_basis()), 1.0)?;
    let fd = FdOracle::new(Example::Dn, params, 512, 1e-4)?;
    let reference = fd.solve(&mut env, &[0.0; 513], 1.0)?;
    let nodes = fd.nodes();
    let grid = GridEvaluator::new(u.basis(), nodes[1..512].to_vec())?;
    let fd_gap = grid
        .evaluate(u.coeffs())
        .iter()
        .zip(&reference[1..512])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut solve = |intervals: usize, dt: f64| -> Result<Vec<f64>> {
        FdOracle::new(Example::Dn, params, intervals, dt)?.solve(&mut env, &vec![0.0; intervals + 1], 1.0)
    };
    let fd_order = observed_order(&solve(32, 4e-3)?, &solve(64, 2e-3)?, &solve(128, 1e-3)?);
    let fd_tolerance = 5e-3 * params.b.abs();
    Ok(OracleReport {
        ode_gap,
        fd_gap,
        fd_tolerance,
        fd_order,
        pass: ode_gap <= 1e-8 && fd_gap <= fd_tolerance && (1.7..=2.3).contains(&fd_order),
    })
}
