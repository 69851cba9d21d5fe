/// A point of the state space. Only the metric is needed by the engine; flows
/// own all other structure.
pub trait State: Clone + Send + Sync {
    /// `‖self − other‖`.
    fn distance(&self, other: &Self) -> f64;
}

impl State for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

/// A semiflow `Φ_t` with a Lipschitz modulus `K(t)`.
pub trait Flow: Send + Sync {
    type State: State;

    /// `Φ_t(x)`. Must be the identity at `t = 0`.
    fn apply(&self, t: f64, x: &Self::State) -> Self::State;

    /// `K(t)` with `‖Φ_t x − Φ_t y‖ ≤ K(t)‖x − y‖`.
    fn contraction_modulus(&self, t: f64) -> f64;

    /// `λ` when the modulus is exactly `e^{−λt}`; enables closed-form
    /// certificates under exponential switching.
    fn decay_rate(&self) -> Option<f64> {
        None
    }
}

impl<F: Flow + ?Sized> Flow for &F {
    type State = F::State;

    fn apply(&self, t: f64, x: &Self::State) -> Self::State {
        (**self).apply(t, x)
    }

    fn contraction_modulus(&self, t: f64) -> f64 {
        (**self).contraction_modulus(t)
    }

    fn decay_rate(&self) -> Option<f64> {
        (**self).decay_rate()
    }
}

/// Scalar flow `x ↦ target + e^{−λt}(x − target)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub rate: f64,
    pub target: f64,
}

impl Flow for Relaxation {
    type State = f64;

    fn apply(&self, t: f64, x: &f64) -> f64 {
        if t == 0.0 {
            return *x;
        }
        self.target + (-self.rate * t).exp() * (x - self.target)
    }

    fn contraction_modulus(&self, t: f64) -> f64 {
        (-self.rate * t).exp()
    }

    fn decay_rate(&self) -> Option<f64> {
        Some(self.rate)
    }
}

/// Scalar flow with a fixed modulus, mostly for probing the certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry;

impl Flow for Isometry {
    type State = f64;

    fn apply(&self, _t: f64, x: &f64) -> f64 {
        *x
    }

    fn contraction_modulus(&self, _t: f64) -> f64 {
        1.0
    }
}
