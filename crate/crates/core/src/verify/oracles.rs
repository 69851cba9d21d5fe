//! Discretizations that share no code with the spectral flows.

use crate::error::{Error, Result};
use crate::numeric::solve_tridiagonal;
use crate::spectral::{ramp_coefficient, Basis, BasisKind, Example, ModelParams};
use crate::switching::{Environment, Mode};

/// One classical RK4 step of `du/dt = −rate (u − target)`.
pub fn rk4_relaxation_step(rate: f64, target: f64, u: f64, dt: f64) -> f64 {
    let f = |v: f64| -rate * (v - target);
    let k1 = f(u);
    let k2 = f(u + 0.5 * dt * k1);
    let k3 = f(u + 0.5 * dt * k2);
    let k4 = f(u + dt * k3);
    u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// RK4 step of the DD coefficient ODE `du_k/dt = −Jβ_k u_k − (1−J)β_k(u_k − c_k)`.
pub fn ode_oracle_step(params: &ModelParams, k: usize, state: Mode, u: f64, dt: f64) -> Result<f64> {
    params.validate()?;
    if k == 0 || !(dt > 0.0) {
        return Err(Error::Argument(format!("need k >= 1 and dt > 0, got k={k}, dt={dt}")));
    }
    let basis = Basis::new(BasisKind::DirichletDirichlet, params.length, params.diffusivity, k)?;
    let target = match state {
        Mode::Zero => ramp_coefficient(&basis, params.b, k),
        Mode::One => 0.0,
    };
    Ok(rk4_relaxation_step(basis.eigenvalue(k), target, u, dt))
}

/// Integrates the first `modes` DD coefficients through `cycles` full
/// (off, on) cycles of `env` with RK4.
///
/// Each holding interval is split into equal substeps no longer than `dt`
/// and no longer than `0.01/β_k` for mode `k`.
pub fn ode_orbit(params: &ModelParams, env: &mut Environment, u0: &[f64], cycles: usize, dt: f64) -> Result<Vec<f64>> {
    params.validate()?;
    let basis = Basis::new(BasisKind::DirichletDirichlet, params.length, params.diffusivity, u0.len().max(1))?;
    let mut holds = Vec::with_capacity(2 * cycles);
    for n in 1..=cycles {
        let (t0, t1) = env.pair(n)?;
        holds.push((Mode::Zero, t0));
        holds.push((Mode::One, t1));
    }
    let mut out = u0.to_vec();
    for (i, u) in out.iter_mut().enumerate() {
        let k = i + 1;
        let rate = basis.eigenvalue(k);
        let h_max = dt.min(0.01 / rate);
        for &(mode, hold) in &holds {
            let target = match mode {
                Mode::Zero => ramp_coefficient(&basis, params.b, k),
                Mode::One => 0.0,
            };
            let steps = (hold / h_max).ceil().max(1.0) as usize;
            let h = hold / steps as f64;
            for _ in 0..steps {
                *u = rk4_relaxation_step(rate, target, *u, h);
            }
        }
    }
    Ok(out)
}

/// Boundary condition at `x = L` for one holding interval.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RightBoundary {
    Dirichlet(f64),
    Neumann,
}

/// Crank–Nicolson solver of `u_t = D u_xx` on a uniform grid with the
/// example's switching condition at `x = L` and `u(0) = 0`.
#[derive(Debug, Clone)]
pub struct FdOracle {
    example: Example,
    length: f64,
    diffusivity: f64,
    b: f64,
    intervals: usize,
    dt: f64,
}

impl FdOracle {
    pub fn new(example: Example, params: &ModelParams, intervals: usize, dt: f64) -> Result<Self> {
        params.validate()?;
        if example == Example::Ode1d {
            return Err(Error::Config("the FD oracle solves the PDE examples only".into()));
        }
        if intervals < 4 || !(dt > 0.0) {
            return Err(Error::Config(format!("need at least 4 intervals and dt > 0, got {intervals}, {dt}")));
        }
        Ok(FdOracle {
            example,
            length: params.length,
            diffusivity: params.diffusivity,
            b: params.b,
            intervals,
            dt,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.intervals as f64
    }

    /// Grid `x_i = i·dx`, `i = 0..=N`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| i as f64 * self.dx()).collect()
    }

    fn boundary(&self, mode: Mode) -> RightBoundary {
        match (self.example, mode) {
            (_, Mode::Zero) => RightBoundary::Dirichlet(self.b),
            (Example::Dd, Mode::One) => RightBoundary::Dirichlet(0.0),
            _ => RightBoundary::Neumann,
        }
    }

    /// `u(x_i, t)` from nodal initial data `u0` (length `N + 1`).
    ///
    /// Steps are aligned with the switching epochs, and each interval starts
    /// with two backward-Euler half steps to damp the incompatibility between
    /// the new boundary value and the current profile.
    pub fn solve(&self, env: &mut Environment, u0: &[f64], t: f64) -> Result<Vec<f64>> {
        if u0.len() != self.intervals + 1 {
            return Err(Error::Argument(format!(
                "expected {} nodal values, got {}",
                self.intervals + 1,
                u0.len()
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Argument(format!("time must be nonnegative, got {t}")));
        }
        let mut interior = u0[1..self.intervals].to_vec();
        let mut elapsed = 0.0;
        let mut k = 1;
        let mut last;
        'outer: loop {
            let (t0, t1) = env.pair(k)?;
            for (mode, hold) in [(Mode::Zero, t0), (Mode::One, t1)] {
                let span = hold.min(t - elapsed);
                last = self.boundary(mode);
                if span > 0.0 {
                    self.advance(&mut interior, last, span);
                }
                elapsed += hold;
                if elapsed >= t {
                    break 'outer;
                }
            }
            k += 1;
        }
        let mut out = Vec::with_capacity(self.intervals + 1);
        out.push(0.0);
        out.extend_from_slice(&interior);
        let n = interior.len();
        out.push(match last {
            RightBoundary::Dirichlet(g) => g,
            RightBoundary::Neumann => (4.0 * interior[n - 1] - interior[n - 2]) / 3.0,
        });
        Ok(out)
    }

    fn advance(&self, u: &mut Vec<f64>, bc: RightBoundary, span: f64) {
        let steps = (span / self.dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        self.step(u, bc, 0.5 * h, 1.0);
        self.step(u, bc, 0.5 * h, 1.0);
        for _ in 1..steps {
            self.step(u, bc, h, 0.5);
        }
    }

    /// θ-scheme step: θ = 1 backward Euler, θ = ½ Crank–Nicolson.
    fn step(&self, u: &mut Vec<f64>, bc: RightBoundary, h: f64, theta: f64) {
        let n = u.len();
        let s = self.diffusivity / self.dx().powi(2);
        // Operator rows: (lower, diag, upper) of D ∂²/∂x² on interior nodes.
        let row = |i: usize| -> (f64, f64, f64) {
            if i == n - 1 && bc == RightBoundary::Neumann {
                // u_N = (4u_{N−1} − u_{N−2})/3 eliminated from the last row.
                (2.0 / 3.0 * s, -2.0 / 3.0 * s, 0.0)
            } else {
                (s, -2.0 * s, s)
            }
        };
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let (l, d, up) = row(i);
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            let explicit = l * left + d * u[i] + up * right;
            rhs[i] = u[i] + (1.0 - theta) * h * explicit;
            lower[i] = -theta * h * l;
            diag[i] = 1.0 - theta * h * d;
            upper[i] = -theta * h * up;
        }
        if let RightBoundary::Dirichlet(g) = bc {
            rhs[n - 1] += h * s * g;
        }
        *u = solve_tridiagonal(&lower, &diag, &upper, &rhs);
    }
}

/// Observed convergence order from solutions on three meshes refined by 2,
/// compared at the coarse nodes: `log₂(‖u₁ − u₂‖∞ / ‖u₂ − u₃‖∞)`.
pub fn observed_order(coarse: &[f64], medium: &[f64], fine: &[f64]) -> f64 {
    let n = coarse.len() - 1;
    let mut d12: f64 = 0.0;
    let mut d23: f64 = 0.0;
    for i in 0..=n {
        d12 = d12.max((coarse[i] - medium[2 * i]).abs());
        d23 = d23.max((medium[2 * i] - fine[4 * i]).abs());
    }
    (d12 / d23).log2()
}
