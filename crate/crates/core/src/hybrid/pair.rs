use rand::Rng;
use serde::Serialize;

use super::flow::{Flow, State};
use crate::error::{Error, Result};
use crate::rng::open01;
use crate::switching::{Environment, Mode, SwitchLaw};

/// Which composition a discrete orbit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `G = Φ¹_{τ₁} ∘ Φ⁰_{τ₀}`: off period first.
    Phi,
    /// `F = Φ⁰_{τ₀} ∘ Φ¹_{τ₁}`: on period first.
    Gamma,
}

/// Which pullback limit to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Limit of the `Gamma` backward orbit; the law seen at the end of an off period.
    Y0,
    /// Limit of the `Phi` backward orbit; the law seen at the end of an on period.
    Y1,
}

impl Target {
    pub fn variant(self) -> Variant {
        match self {
            Target::Y0 => Variant::Gamma,
            Target::Y1 => Variant::Phi,
        }
    }
}

/// Depth control for pullback iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackOptions {
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        PullbackOptions {
            tol: 1e-10,
            max_depth: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PullbackSample<S> {
    pub value: S,
    /// Number of backward factors composed.
    pub depth: usize,
    /// Distance between the last two iterates.
    pub residual: f64,
    /// Residual after each depth, starting at depth 1.
    pub history: Vec<f64>,
}

/// How stationary draws are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StationaryForm {
    /// Mixture of `Y₁` and `Y₀` for exponential laws, composed form otherwise.
    #[default]
    Auto,
    /// `ξY₁ + (1 − ξ)Y₀`; valid only for exponential switching.
    Mixture,
    /// `ξΦ¹_{a¹}(Y₀) + (1 − ξ)Φ⁰_{a⁰}(Y₁)` with stationary ages.
    Composed,
}

#[derive(Debug, Clone)]
pub struct StationaryDraw<S> {
    pub value: S,
    /// The occupancy indicator `ξ`.
    pub xi: Mode,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Estimate of `E K₀(τ₀) · E K₁(τ₁)`.
    pub product: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// The two dynamics of a switching system: `zero` runs while `J = 0`, `one`
/// while `J = 1`.
#[derive(Debug, Clone)]
pub struct FlowPair<F0, F1> {
    pub zero: F0,
    pub one: F1,
}

impl<F0, F1, S> FlowPair<F0, F1>
where
    S: State,
    F0: Flow<State = S>,
    F1: Flow<State = S>,
{
    pub fn new(zero: F0, one: F1) -> Self {
        FlowPair { zero, one }
    }

    pub fn apply(&self, mode: Mode, t: f64, x: &S) -> S {
        match mode {
            Mode::Zero => self.zero.apply(t, x),
            Mode::One => self.one.apply(t, x),
        }
    }

    /// One factor `G` or `F` for the holding pair `(τ₀, τ₁)`.
    pub fn step(&self, variant: Variant, (t0, t1): (f64, f64), x: &S) -> S {
        match variant {
            Variant::Phi => self.one.apply(t1, &self.zero.apply(t0, x)),
            Variant::Gamma => self.zero.apply(t0, &self.one.apply(t1, x)),
        }
    }

    /// `Gⁿ ∘ … ∘ G¹(x)` (or the `F` analogue).
    pub fn forward_orbit(&self, env: &mut Environment, x: &S, n: usize, variant: Variant) -> Result<S> {
        let mut state = x.clone();
        for k in 1..=n {
            state = self.step(variant, env.pair(k)?, &state);
        }
        Ok(state)
    }

    /// `G¹ ∘ … ∘ Gⁿ(x)` (or the `F` analogue).
    pub fn backward_orbit(&self, env: &mut Environment, x: &S, n: usize, variant: Variant) -> Result<S> {
        env.ensure(n)?;
        let mut state = x.clone();
        for k in (1..=n).rev() {
            state = self.step(variant, env.pair(k)?, &state);
        }
        Ok(state)
    }

    /// Deepens the backward orbit until successive iterates are within `tol`.
    pub fn pullback_sample(
        &self,
        env: &mut Environment,
        x0: &S,
        target: Target,
        opts: &PullbackOptions,
    ) -> Result<PullbackSample<S>> {
        if !(opts.tol > 0.0) {
            return Err(Error::Argument(format!("pullback tolerance must be positive, got {}", opts.tol)));
        }
        let variant = target.variant();
        let mut previous = x0.clone();
        let mut history = Vec::new();
        for depth in 1..=opts.max_depth {
            let current = self.backward_orbit(env, x0, depth, variant)?;
            let residual = current.distance(&previous);
            history.push(residual);
            if residual <= opts.tol {
                return Ok(PullbackSample {
                    value: current,
                    depth,
                    residual,
                    history,
                });
            }
            previous = current;
        }
        Err(Error::NonConvergence {
            depth: opts.max_depth,
            residual: history.last().copied().unwrap_or(f64::NAN),
            tol: opts.tol,
            history,
        })
    }

    /// `u(t, ω)` started from `u₀` at time 0.
    pub fn process_at(&self, env: &mut Environment, u0: &S, t: f64) -> Result<S> {
        let point = env.locate(t)?;
        let base = self.forward_orbit(env, u0, point.n, Variant::Phi)?;
        Ok(match point.state {
            Mode::Zero => self.zero.apply(point.age, &base),
            Mode::One => {
                let (t0, _) = env.pair(point.n + 1)?;
                self.one.apply(point.age, &self.zero.apply(t0, &base))
            }
        })
    }

    /// Pullback limit on a fresh environment seeded from `rng`.
    pub fn fresh_pullback<R: Rng + ?Sized>(
        &self,
        law: &SwitchLaw,
        x0: &S,
        target: Target,
        rng: &mut R,
        opts: &PullbackOptions,
    ) -> Result<PullbackSample<S>> {
        let mut env = Environment::sample(law, rng.random(), 0);
        self.pullback_sample(&mut env, x0, target, opts)
    }

    /// One draw from the stationary law `ū`.
    pub fn stationary_sample<R: Rng + ?Sized>(
        &self,
        law: &SwitchLaw,
        x0: &S,
        rng: &mut R,
        form: StationaryForm,
        opts: &PullbackOptions,
    ) -> Result<StationaryDraw<S>> {
        let composed = match form {
            StationaryForm::Auto => !law.is_exponential(),
            StationaryForm::Mixture => {
                if !law.is_exponential() {
                    return Err(Error::Config(
                        "the mixture form of the stationary law needs exponential switching".into(),
                    ));
                }
                false
            }
            StationaryForm::Composed => true,
        };
        let xi = Mode::from_bit(open01(rng) < law.occupancy_p());
        let (value, depth) = if composed {
            let source = match xi {
                Mode::One => Target::Y0,
                Mode::Zero => Target::Y1,
            };
            let y = self.fresh_pullback(law, x0, source, rng, opts)?;
            let age = law.sample_stationary_age(xi, rng)?;
            (self.apply(xi, age, &y.value), y.depth)
        } else {
            let target = match xi {
                Mode::One => Target::Y1,
                Mode::Zero => Target::Y0,
            };
            let y = self.fresh_pullback(law, x0, target, rng, opts)?;
            (y.value, y.depth)
        };
        Ok(StationaryDraw { value, xi, depth })
    }

    /// Estimates `E K₀(τ₀) · E K₁(τ₁)`; closed form for exponential moduli
    /// under exponential switching, Monte Carlo with `n_mc` draws otherwise.
    pub fn certify_contraction<R: Rng + ?Sized>(&self, law: &SwitchLaw, n_mc: usize, rng: &mut R) -> Result<Certificate> {
        if n_mc < 100 {
            return Err(Error::Argument(format!("certificate needs at least 100 draws, got {n_mc}")));
        }
        let mut expect = |mode: Mode| -> (f64, f64) {
            let holding = law.law(mode);
            let (rate, modulus): (Option<f64>, &dyn Fn(f64) -> f64) = match mode {
                Mode::Zero => (self.zero.decay_rate(), &|t| self.zero.contraction_modulus(t)),
                Mode::One => (self.one.decay_rate(), &|t| self.one.contraction_modulus(t)),
            };
            if let Some(exact) = rate.and_then(|lambda| holding.laplace_transform(lambda)) {
                return (exact, 0.0);
            }
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n_mc {
                let k = modulus(holding.sample(rng));
                sum += k;
                sq += k * k;
            }
            let n = n_mc as f64;
            let mean = sum / n;
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (mean, (var / n).sqrt())
        };
        let (m0, s0) = expect(Mode::Zero);
        let (m1, s1) = expect(Mode::One);
        let product = m0 * m1;
        let stderr = ((m1 * s0).powi(2) + (m0 * s1).powi(2)).sqrt();
        Ok(Certificate {
            product,
            stderr,
            pass: product + 3.0 * stderr < 1.0,
        })
    }

    /// Independent samples of `(Y₀, Φ⁰_{τ₀}(Y₁))` for `which = Y0`, or of
    /// `(Y₁, Φ¹_{τ₁}(Y₀))` for `which = Y1`; equal in law by invariance.
    pub fn invariance_pair<R: Rng + ?Sized>(
        &self,
        law: &SwitchLaw,
        x0: &S,
        which: Target,
        rng: &mut R,
        opts: &PullbackOptions,
    ) -> Result<(S, S)> {
        let direct = self.fresh_pullback(law, x0, which, rng, opts)?.value;
        let (other, mode) = match which {
            Target::Y0 => (Target::Y1, Mode::Zero),
            Target::Y1 => (Target::Y0, Mode::One),
        };
        let y = self.fresh_pullback(law, x0, other, rng, opts)?.value;
        let hold = law.law(mode).sample(rng);
        Ok((direct, self.apply(mode, hold, &y)))
    }

    /// `n` invariance pairs on streams `(seed, 0..n)`, split into the two sets.
    pub fn invariance_pairs(
        &self,
        law: &SwitchLaw,
        x0: &S,
        which: Target,
        seed: u64,
        n: usize,
        opts: &PullbackOptions,
    ) -> Result<(Vec<S>, Vec<S>)>
    where
        F0: Sync,
        F1: Sync,
    {
        if n == 0 {
            return Err(Error::Argument("invariance sampling needs n >= 1".into()));
        }
        let pairs = crate::rng::par_map(seed, n, |_, rng| self.invariance_pair(law, x0, which, rng, opts));
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for pair in pairs {
            let (a, b) = pair?;
            left.push(a);
            right.push(b);
        }
        Ok((left, right))
    }
}
