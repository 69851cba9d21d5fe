use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use switchheat::hybrid::{StationaryForm, Target};
use switchheat::rng::{par_map, stream};
use switchheat::spectral::{coefficient_pair, truncation_tolerance, Example, GridEvaluator};
use switchheat::switching::Environment;
use switchheat::verify::Sampler;

use crate::closed::Which;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Path,
    Pullback,
    Stationary,
}

impl Kind {
    fn stem(self) -> &'static str {
        match self {
            Kind::Path => "path",
            Kind::Pullback => "pullback",
            Kind::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleArgs {
    pub times: Vec<f64>,
    pub target: Which,
    /// DD mode followed by the scalar example.
    pub k: usize,
}

/// Coefficients of every sampled field, written next to the CSV.
#[derive(Serialize)]
struct Dump<'a> {
    example: Example,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<&'static str>,
    basis: &'static str,
    modes: usize,
    seed: u64,
    /// Grid sup of the `K`-mode error on the steady ramp.
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    coefficients: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct Summary {
    kind: &'static str,
    rows: usize,
    files: Vec<PathBuf>,
}

fn csv(first: &str, columns: &[String], rows: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    out.push_str(first);
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (label, values) in rows {
        out.push_str(label);
        for v in values {
            write!(out, ",{v}").expect("writing to a string");
        }
        out.push('\n');
    }
    out
}

fn target_label(which: Which) -> &'static str {
    match which {
        Which::Y0 => "y0",
        Which::Y1 => "y1",
    }
}

fn check_times(times: &[f64]) -> Result<(), CliError> {
    if times.is_empty() {
        return Err(CliError::Usage("path needs at least one time in --times".into()));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!("times must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

struct Drawn {
    columns: Vec<String>,
    /// First CSV column label and the values of each row.
    rows: Vec<(String, Vec<f64>)>,
    coefficients: Vec<Vec<f64>>,
    basis: &'static str,
    modes: usize,
    epsilon: Option<f64>,
}

fn draw_spectral(cfg: &RunConfig, kind: Kind, args: &SampleArgs) -> Result<Drawn, CliError> {
    let model = cfg.model();
    let sampler = Sampler::new(cfg.example, &model, cfg.pullback())?;
    let grid = GridEvaluator::interior(sampler.basis(), cfg.grid)?;
    let columns = grid.points().iter().map(|x| format!("u@{x}")).collect();
    let fields = match kind {
        Kind::Path => {
            check_times(&args.times)?;
            sampler.process(&args.times, &mut stream(cfg.seed, 0))?
        }
        Kind::Pullback => {
            let target = Target::from(args.target);
            par_map(cfg.seed, cfg.samples, |_, rng| sampler.pullback(target, rng))
                .into_iter()
                .collect::<Result<_, _>>()?
        }
        Kind::Stationary => par_map(cfg.seed, cfg.samples, |_, rng| sampler.stationary(rng))
            .into_iter()
            .collect::<Result<_, _>>()?,
    };
    let rows = fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let label = match kind {
                Kind::Path => args.times[i].to_string(),
                _ => i.to_string(),
            };
            (label, grid.evaluate(f.coeffs()))
        })
        .collect();
    Ok(Drawn {
        columns,
        rows,
        coefficients: fields.iter().map(|f| f.coeffs().to_vec()).collect(),
        basis: sampler.basis().kind.label(),
        modes: model.modes,
        epsilon: Some(truncation_tolerance(sampler.basis(), model.b, cfg.grid)?),
    })
}

fn draw_scalar(cfg: &RunConfig, kind: Kind, args: &SampleArgs) -> Result<Drawn, CliError> {
    let model = cfg.model();
    let pair = coefficient_pair(&model, args.k)?;
    let law = model.law()?;
    let opts = cfg.pullback();
    let values: Vec<f64> = match kind {
        Kind::Path => {
            check_times(&args.times)?;
            let mut env = Environment::sample(&law, cfg.seed, 0);
            args.times
                .iter()
                .map(|&t| pair.process_at(&mut env, &0.0, t))
                .collect::<Result<_, _>>()?
        }
        Kind::Pullback => {
            let target = Target::from(args.target);
            par_map(cfg.seed, cfg.samples, |_, rng| {
                pair.fresh_pullback(&law, &0.0, target, rng, &opts).map(|y| y.value)
            })
            .into_iter()
            .collect::<Result<_, _>>()?
        }
        Kind::Stationary => par_map(cfg.seed, cfg.samples, |_, rng| {
            pair.stationary_sample(&law, &0.0, rng, StationaryForm::Auto, &opts)
                .map(|d| d.value)
        })
        .into_iter()
        .collect::<Result<_, _>>()?,
    };
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let label = match kind {
                Kind::Path => args.times[i].to_string(),
                _ => i.to_string(),
            };
            (label, vec![*v])
        })
        .collect();
    Ok(Drawn {
        columns: vec![format!("u{}", args.k)],
        rows,
        coefficients: values.iter().map(|v| vec![*v]).collect(),
        basis: "dd",
        modes: 1,
        epsilon: None,
    })
}

/// Writes `<output>/<kind>.csv` and, for sample batches, `<output>/<kind>.json`.
pub fn run(cfg: &RunConfig, kind: Kind, args: &SampleArgs) -> Result<String, CliError> {
    let drawn = match cfg.example {
        Example::Ode1d => draw_scalar(cfg, kind, args)?,
        _ => draw_spectral(cfg, kind, args)?,
    };
    fs::create_dir_all(&cfg.output).map_err(|e| CliError::Io(format!("{}: {e}", cfg.output.display())))?;
    let write = |name: String, text: String| -> Result<PathBuf, CliError> {
        let path = cfg.output.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    };
    let first = if kind == Kind::Path { "t" } else { "sample" };
    let mut files = vec![write(format!("{}.csv", kind.stem()), csv(first, &drawn.columns, &drawn.rows))?];
    if kind != Kind::Path {
        let dump = Dump {
            example: cfg.example,
            kind: kind.stem(),
            target: (kind == Kind::Pullback).then(|| target_label(args.target)),
            basis: drawn.basis,
            modes: drawn.modes,
            seed: cfg.seed,
            epsilon: drawn.epsilon,
            coefficients: &drawn.coefficients,
        };
        let text = serde_json::to_string(&dump).expect("dump serializes");
        files.push(write(format!("{}.json", kind.stem()), text)?);
    }
    let summary = Summary {
        kind: kind.stem(),
        rows: drawn.rows.len(),
        files,
    };
    Ok(serde_json::to_string(&summary).expect("summary serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let text = csv("t", &["u@0.5".into()], &[("0".into(), vec![0.0]), ("1.5".into(), vec![-0.25])]);
        assert_eq!(text, "t,u@0.5\n0,0\n1.5,-0.25\n");
    }

    #[test]
    fn negative_times_are_rejected() {
        assert!(check_times(&[0.0, -1.0]).is_err());
        assert!(check_times(&[]).is_err());
        assert!(check_times(&[0.0, 2.0]).is_ok());
    }
}
