use serde::Serialize;

/// Running mean and centered second moment (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        xs.iter().for_each(|x| m.push(*x));
        m
    }
}

/// An estimate compared with a closed-form target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub target: f64,
    /// `(estimate − target)/stderr`; 0 when both coincide exactly.
    pub z: f64,
    /// Largest accepted `|z|`.
    pub threshold: f64,
    pub pass: bool,
}

impl StatReport {
    pub fn new(estimate: f64, stderr: f64, n: u64, target: f64, threshold: f64) -> Self {
        let gap = estimate - target;
        let z = if gap == 0.0 { 0.0 } else { gap / stderr };
        StatReport {
            estimate,
            stderr,
            n,
            target,
            z,
            threshold,
            pass: z.abs() <= threshold,
        }
    }

    pub fn from_moments(m: &Moments, target: f64, threshold: f64) -> Self {
        Self::new(m.mean, m.stderr(), m.n, target, threshold)
    }
}
