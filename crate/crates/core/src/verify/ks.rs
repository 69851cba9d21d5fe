use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSReport {
    pub statistic: f64,
    /// Sample size, or the effective size `nm/(n+m)` for two samples.
    pub n: f64,
    pub alpha: f64,
    pub critical: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `λ_α` with `P(K > λ_α) = α`.
pub fn kolmogorov_quantile(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scale(n: f64) -> f64 {
    let root = n.sqrt();
    root + 0.12 + 0.11 / root
}

fn report(statistic: f64, n: f64, alpha: f64) -> KSReport {
    let critical = kolmogorov_quantile(alpha) / scale(n);
    KSReport {
        statistic,
        n,
        alpha,
        critical,
        p_value: kolmogorov_survival(scale(n) * statistic),
        pass: statistic <= critical,
    }
}

fn check(samples: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Argument("KS test needs at least one sample".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Data("KS samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// One-sample test against a continuous CDF.
///
/// Samples are floating-point roundings of a continuous variable, so ties can
/// occur where the law is very concentrated. At each distinct value `v` the
/// empirical CDF is compared with `F(v)` and its left limit with `F` at the
/// next float below `v`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, alpha: f64) -> Result<KSReport> {
    let sorted = check(samples, alpha)?;
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        let f_at = cdf(v);
        let f_below = if j - i > 1 { cdf(v.next_down()) } else { f_at };
        d = d.max((at - f_at).abs()).max((f_below - below).abs());
        i = j;
    }
    Ok(report(d, n, alpha))
}

/// Two-sample test; ties across samples are handled by stepping over each
/// distinct value at once.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KSReport> {
    let a = check(a, alpha)?;
    let b = check(b, alpha)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(report(d, na * nb / (na + nb), alpha))
}
