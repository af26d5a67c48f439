//! Payoff and exchange-function configuration.

use std::path::Path;

use mevcost::payoff::ExchangeFn;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffConfig {
    Liquidation(LiquidationParams),
    Indicator(IndicatorParams),
    Linear(LinearParams),
    Frontrun(FrontrunParams),
    Sandwich(SandwichParams),
    Table(TableParams),
}

/// Even `n` with `n/2` up-moves unless `up_moves` is given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiquidationParams {
    pub n: Option<usize>,
    pub up_moves: Option<usize>,
}

/// Indicator of the list `x`, evaluated over the orbit of `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorParams {
    pub x: Vec<i64>,
}

/// `f(x) = x₁ − x₂ − … − xₙ` at `x` (default `e₁`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearParams {
    pub x: Option<Vec<f64>>,
}

/// Validator trade `delta` followed by the trader amounts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontrunParams {
    pub exchange: ExchangeFn,
    pub delta: f64,
    pub trades: Vec<f64>,
    /// Defaults to the total trader volume.
    pub volume_cap: Option<f64>,
}

/// Buy, trader amounts, then sell (default: the largest feasible sell).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichParams {
    pub exchange: ExchangeFn,
    pub buy: f64,
    pub sell: Option<f64>,
    pub trades: Vec<f64>,
    pub volume_cap: Option<f64>,
}

/// Values by permutation rank over the orbit of `x` (default `0..n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableParams {
    pub values: Vec<f64>,
    pub x: Option<Vec<i64>>,
}

/// Reads inline JSON (starting with `{`) or a file path.
pub fn read_json_arg(arg: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Config(format!("cannot read {arg}: {e}")))
}

pub fn parse_payoff(arg: &str) -> Result<PayoffConfig, CliError> {
    let text = read_json_arg(arg)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid payoff config: {e}")))
}

/// `power:<exponent>[:<scale>]`, or an `ExchangeFn` as inline JSON or a file path.
pub fn parse_exchange(arg: &str) -> Result<ExchangeFn, CliError> {
    let exchange = if let Some(rest) = arg.strip_prefix("power:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("invalid number {s:?} in exchange spec {arg:?}")))
        };
        match parts.as_slice() {
            [p] => ExchangeFn::power(number(p)?, 1.0)?,
            [p, c] => ExchangeFn::power(number(p)?, number(c)?)?,
            _ => {
                return Err(CliError::Config(format!(
                    "expected power:<exponent>[:<scale>], got {arg:?}"
                )))
            }
        }
    } else {
        let text = read_json_arg(arg)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid exchange function: {e}")))?
    };
    exchange.validate()?;
    Ok(exchange)
}
