use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use switchheat::closed_form::{self, Params};
use switchheat::hybrid::Target;
use switchheat::spectral::ModelParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    DnSlope,
    DdMean,
    DdVariance,
    BetaMarginal,
    JointMoment,
    Flux,
}

impl Formula {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Y0,
    Y1,
}

impl From<Which> for Target {
    fn from(w: Which) -> Self {
        match w {
            Which::Y0 => Target::Y0,
            Which::Y1 => Target::Y1,
        }
    }
}

/// Extra arguments some formulas need.
#[derive(Debug, Clone, Copy, Default)]
pub struct FormulaArgs {
    pub x: Option<f64>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub target: Option<Which>,
}

#[derive(Serialize)]
struct Output<'a> {
    name: String,
    params: &'a ModelParams,
    value: Value,
}

fn need<T>(v: Option<T>, flag: &str, formula: Formula) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{} needs --{flag}", formula.name())))
}

pub fn evaluate(formula: Formula, model: &ModelParams, args: &FormulaArgs) -> Result<Value, CliError> {
    let p = Params::from(model);
    Ok(match formula {
        Formula::DnSlope => json!(closed_form::dn_slope(&p)?),
        Formula::Flux => json!(closed_form::insect_flux(&p)?),
        Formula::DdMean => json!(closed_form::dd_mean(&p, need(args.x, "x", formula)?)?),
        Formula::DdVariance => json!(closed_form::dd_l2_variance(&p)?),
        Formula::BetaMarginal => {
            let k = need(args.k, "k", formula)?;
            let law = closed_form::beta_marginal(&p, k, args.target.unwrap_or(Which::Y0).into())?;
            json!({
                "alpha": law.alpha,
                "beta": law.beta,
                "scale": law.scale,
                "mean": law.mean(),
                "variance": law.variance(),
            })
        }
        Formula::JointMoment => {
            let n = need(args.k, "k", formula)?;
            let m = need(args.m, "m", formula)?;
            json!(closed_form::dd_joint_second_moment(&p, n, m)?)
        }
    })
}

/// One JSON line `{name, params, value}`.
pub fn run(formula: Formula, model: &ModelParams, args: &FormulaArgs) -> Result<String, CliError> {
    let value = evaluate(formula, model, args)?;
    let out = Output {
        name: formula.name(),
        params: model,
        value,
    };
    Ok(serde_json::to_string(&out).expect("output serializes"))
}
