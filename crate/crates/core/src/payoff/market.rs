//! Two-asset, fee-free constant function market makers: frontrunning and sandwiching.
//!
//! An action is a pair `(trader, validator)` of token amounts where at most one
//! coordinate is nonzero. Trader amounts are nonnegative; a frontrunning
//! validator submits exactly one trade of size `δ`, a sandwiching validator
//! one buy (`> 0`) and one sell (`< 0`).

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{ActionSpace, Descriptor, PairDistance, Payoff};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Slack allowed on the sandwich feasibility inequality.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance of [`ExchangeFn::inverse`].
pub const INVERSE_TOLERANCE: f64 = 1e-10;

/// Forward exchange function `G`: nondecreasing, concave, `G(0) = 0`.
///
/// Both families are extended to negative inputs by the line `G'(0)·t`, which
/// keeps `G` concave and increasing on all of ℝ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExchangeFn {
    /// `G(t) = c·((t+1)^p − 1)/p` with `p ∈ (0, 1]`, `c > 0`; `G'(0) = c`.
    Power { exponent: f64, scale: f64 },
    /// Slope `slopes[0]` on `[0, breakpoints[0])`, `slopes[k]` on
    /// `[breakpoints[k-1], breakpoints[k])`, and the last slope beyond.
    PiecewiseLinear { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

impl ExchangeFn {
    pub fn power(exponent: f64, scale: f64) -> Result<Self> {
        let g = ExchangeFn::Power { exponent, scale };
        g.validate()?;
        Ok(g)
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let g = ExchangeFn::PiecewiseLinear { breakpoints, slopes };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExchangeFn::Power { exponent, scale } => {
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power exponent must lie in (0, 1], got {exponent}"
                    )));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
                }
            }
            ExchangeFn::PiecewiseLinear { breakpoints, slopes } => {
                if slopes.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidParameter(
                        "piecewise-linear G needs one more slope than breakpoints".into(),
                    ));
                }
                if breakpoints.first().is_some_and(|b| !(*b > 0.0))
                    || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
                    || breakpoints.iter().any(|b| !b.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "breakpoints must be positive and strictly increasing".into(),
                    ));
                }
                if !(slopes[0] > 0.0 && slopes[0].is_finite()) {
                    return Err(Error::InvalidParameter("initial slope must be positive".into()));
                }
                if slopes.windows(2).any(|w| !(w[1] <= w[0])) || slopes.iter().any(|s| !(*s >= 0.0)) {
                    return Err(Error::InvalidParameter(
                        "slopes must be nonnegative and nonincreasing (concave, nondecreasing G)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `G'(0)`.
    pub fn derivative_at_zero(&self) -> f64 {
        match self {
            ExchangeFn::Power { scale, .. } => *scale,
            ExchangeFn::PiecewiseLinear { slopes, .. } => slopes[0],
        }
    }

    /// `G(t)`.
    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.derivative_at_zero() * t;
        }
        match self {
            ExchangeFn::Power { exponent, scale } => {
                if *exponent == 1.0 {
                    scale * t
                } else {
                    scale * (exponent * t.ln_1p()).exp_m1() / exponent
                }
            }
            ExchangeFn::PiecewiseLinear { breakpoints, slopes } => {
                let mut total = 0.0;
                let mut start = 0.0;
                for (k, &end) in breakpoints.iter().enumerate() {
                    if t <= end {
                        return total + slopes[k] * (t - start);
                    }
                    total += slopes[k] * (end - start);
                    start = end;
                }
                total + slopes[slopes.len() - 1] * (t - start)
            }
        }
    }

    /// `G⁻¹(y)` by bisection to [`INVERSE_TOLERANCE`]; the smallest preimage when `G` is flat.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("cannot invert G at {y}")));
        }
        if y <= 0.0 {
            return Ok(y / self.derivative_at_zero());
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut doublings = 0;
        while self.value(hi) < y {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 || !hi.is_finite() {
                return Err(Error::Domain(format!("{y} is outside the range of G")));
            }
        }
        for _ in 0..400 {
            if hi - lo <= INVERSE_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.value(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// One entry of a market action list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketAction {
    pub trader: f64,
    pub validator: f64,
}

impl MarketAction {
    pub fn trade(amount: f64) -> Self {
        Self {
            trader: amount,
            validator: 0.0,
        }
    }

    pub fn validator(amount: f64) -> Self {
        Self {
            trader: 0.0,
            validator: amount,
        }
    }
}

fn check_entries(actions: &[MarketAction]) -> Result<()> {
    for (i, a) in actions.iter().enumerate() {
        if !a.trader.is_finite() || !a.validator.is_finite() {
            return Err(Error::Domain(format!("non-finite amount at position {i}")));
        }
        if a.trader < 0.0 {
            return Err(Error::Domain(format!("negative trader amount at position {i}")));
        }
        if a.trader != 0.0 && a.validator != 0.0 {
            return Err(Error::Domain(format!(
                "position {i} has both a trader and a validator amount"
            )));
        }
    }
    Ok(())
}

/// Total trader volume `‖x‖₁`.
pub fn trader_volume(actions: &[MarketAction]) -> f64 {
    compensated_sum(actions.iter().map(|a| a.trader.abs()))
}

fn check_volume(actions: &[MarketAction], volume_cap: f64) -> Result<()> {
    let volume = trader_volume(actions);
    if volume > volume_cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "trader volume {volume} exceeds the cap {volume_cap}"
        )));
    }
    Ok(())
}

fn validator_positions(actions: &[MarketAction]) -> (Vec<usize>, Vec<usize>) {
    let buys = (0..actions.len()).filter(|&i| actions[i].validator > 0.0).collect();
    let sells = (0..actions.len()).filter(|&i| actions[i].validator < 0.0).collect();
    (buys, sells)
}

fn same_amount(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// A member of the frontrunning action set `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontrunList {
    actions: Vec<MarketAction>,
    delta: f64,
    volume_cap: f64,
    validator_position: usize,
}

impl FrontrunList {
    pub fn new(actions: Vec<MarketAction>, delta: f64, volume_cap: f64) -> Result<Self> {
        check_entries(&actions)?;
        check_volume(&actions, volume_cap)?;
        let (buys, sells) = validator_positions(&actions);
        if buys.len() != 1 || !sells.is_empty() {
            return Err(Error::Domain(format!(
                "expected exactly one validator trade, found {}",
                buys.len() + sells.len()
            )));
        }
        let k = buys[0];
        if !same_amount(actions[k].validator, delta) {
            return Err(Error::Domain(format!(
                "validator trade {} differs from delta {delta}",
                actions[k].validator
            )));
        }
        Ok(Self {
            actions,
            delta,
            volume_cap,
            validator_position: k,
        })
    }

    pub fn actions(&self) -> &[MarketAction] {
        &self.actions
    }

    pub fn validator_position(&self) -> usize {
        self.validator_position
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn volume_cap(&self) -> f64 {
        self.volume_cap
    }
}

/// A member of the sandwiching action set `B` (feasibility is checked separately).
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichList {
    actions: Vec<MarketAction>,
    volume_cap: f64,
    buy: usize,
    sell: usize,
}

impl SandwichList {
    pub fn new(actions: Vec<MarketAction>, volume_cap: f64) -> Result<Self> {
        check_entries(&actions)?;
        check_volume(&actions, volume_cap)?;
        let (buy, sell) = sandwich_positions(&actions)?;
        Ok(Self {
            actions,
            volume_cap,
            buy,
            sell,
        })
    }

    pub fn actions(&self) -> &[MarketAction] {
        &self.actions
    }

    /// `(position, amount)` of the buy.
    pub fn buy(&self) -> (usize, f64) {
        (self.buy, self.actions[self.buy].validator)
    }

    /// `(position, amount)` of the sell; the amount is negative.
    pub fn sell(&self) -> (usize, f64) {
        (self.sell, self.actions[self.sell].validator)
    }

    pub fn volume_cap(&self) -> f64 {
        self.volume_cap
    }
}

fn sandwich_positions(actions: &[MarketAction]) -> Result<(usize, usize)> {
    let (buys, sells) = validator_positions(actions);
    if buys.len() != 1 || sells.len() != 1 {
        return Err(Error::Domain(format!(
            "malformed validator entries: {} buys and {} sells",
            buys.len(),
            sells.len()
        )));
    }
    Ok((buys[0], sells[0]))
}

/// Frontrunning payoff: `G(s + δ) − G(s)` where `s` is the trader volume executed
/// before the validator's trade.
#[derive(Clone, Debug)]
pub struct FrontrunPayoff {
    exchange: ExchangeFn,
    delta: f64,
}

pub fn frontrun_payoff(exchange: ExchangeFn, delta: f64) -> Result<FrontrunPayoff> {
    exchange.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    Ok(FrontrunPayoff { exchange, delta })
}

impl FrontrunPayoff {
    pub fn exchange(&self) -> &ExchangeFn {
        &self.exchange
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Lipschitz constant `2G'(0)` with respect to [`frontrun_metric`].
    pub fn lipschitz_constant(&self) -> f64 {
        2.0 * self.exchange.derivative_at_zero()
    }
}

impl Payoff<MarketAction> for FrontrunPayoff {
    fn evaluate(&self, actions: &[MarketAction]) -> Result<f64> {
        let list = FrontrunList::new(actions.to_vec(), self.delta, f64::INFINITY)?;
        let k = list.validator_position();
        let prefix = compensated_sum(actions[..k].iter().map(|a| a.trader));
        Ok(self.exchange.value(prefix + self.delta) - self.exchange.value(prefix))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Frontrun {
            exchange: self.exchange.clone(),
            delta: self.delta,
        }
    }
}

/// `d(z, z') = Σ max{|x_i|, |x'_i|, |x_i − x'_i|}` over trader amounts.
///
/// Not a metric: `d(z, z) = ‖x‖₁`. Only the Lipschitz-type inequality is used.
pub fn frontrun_metric(z: &[MarketAction], other: &[MarketAction]) -> Result<f64> {
    if z.len() != other.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            got: other.len(),
        });
    }
    Ok(compensated_sum(z.iter().zip(other).map(|(a, b)| {
        a.trader.abs().max(b.trader.abs()).max((a.trader - b.trader).abs())
    })))
}

/// [`frontrun_metric`] as a [`PairDistance`].
#[derive(Clone, Copy, Debug, Default)]
pub struct FrontrunMetric;

impl PairDistance<MarketAction> for FrontrunMetric {
    fn distance(&self, a: &[MarketAction], b: &[MarketAction]) -> Result<f64> {
        frontrun_metric(a, b)
    }
}

/// `d(z, z') = max{‖x‖₁, ‖x'‖₁}`.
pub fn sandwich_metric(z: &[MarketAction], other: &[MarketAction]) -> f64 {
    trader_volume(z).max(trader_volume(other))
}

/// [`sandwich_metric`] as a [`PairDistance`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SandwichMetric;

impl PairDistance<MarketAction> for SandwichMetric {
    fn distance(&self, a: &[MarketAction], b: &[MarketAction]) -> Result<f64> {
        Ok(sandwich_metric(a, b))
    }
}

/// Checks `G(t + y_i) − G(t + y_i + y_j) ≤ G(y_i)` with `t` the total trader volume,
/// up to [`FEASIBILITY_TOLERANCE`].
pub fn sandwich_feasible(actions: &[MarketAction], exchange: &ExchangeFn) -> Result<bool> {
    check_entries(actions)?;
    let (buy, sell) = sandwich_positions(actions)?;
    let t = trader_volume(actions);
    let y_buy = actions[buy].validator;
    let y_sell = actions[sell].validator;
    let lhs = exchange.value(t + y_buy) - exchange.value(t + y_buy + y_sell);
    Ok(lhs <= exchange.value(y_buy) + FEASIBILITY_TOLERANCE)
}

/// Largest sell amount `γ` satisfying the feasibility inequality with equality:
/// `γ = t + δ − G⁻¹(G(t + δ) − G(δ))`.
pub fn max_sandwich_sell(exchange: &ExchangeFn, trader_total: f64, buy: f64) -> Result<f64> {
    let target = exchange.value(trader_total + buy) - exchange.value(buy);
    Ok(trader_total + buy - exchange.inverse(target)?)
}

/// Sandwiching payoff `f(z) = −(y_i + y_j)`; infeasible lists are rejected.
#[derive(Clone, Debug)]
pub struct SandwichPayoff {
    exchange: ExchangeFn,
}

pub fn sandwich_payoff(exchange: ExchangeFn) -> Result<SandwichPayoff> {
    exchange.validate()?;
    Ok(SandwichPayoff { exchange })
}

impl SandwichPayoff {
    pub fn exchange(&self) -> &ExchangeFn {
        &self.exchange
    }
}

impl Payoff<MarketAction> for SandwichPayoff {
    fn evaluate(&self, actions: &[MarketAction]) -> Result<f64> {
        if !sandwich_feasible(actions, &self.exchange)? {
            return Err(Error::Domain(
                "infeasible sandwich: the sell returns more than the buy received".into(),
            ));
        }
        let (buy, sell) = sandwich_positions(actions)?;
        Ok(-(actions[buy].validator + actions[sell].validator))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Sandwich {
            exchange: self.exchange.clone(),
        }
    }
}

// --- action-space samplers ---------------------------------------------------

/// Random nonnegative amounts over `slots` entries with total at most `cap`.
fn sample_trades(slots: usize, cap: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    if slots == 0 {
        return Vec::new();
    }
    let total = if rng.random_bool(0.5) {
        cap
    } else {
        cap * rng.random::<f64>()
    };
    let mut weights: Vec<f64> = match rng.random_range(0..3) {
        // dense
        0 => (0..slots).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect(),
        // a single trade carries everything
        1 => {
            let hot = rng.random_range(0..slots);
            (0..slots).map(|i| if i == hot { 1.0 } else { 0.0 }).collect()
        }
        // random support
        _ => (0..slots)
            .map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 })
            .collect(),
    };
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        weights = vec![0.0; slots];
        weights[rng.random_range(0..slots)] = 1.0;
    }
    let sum: f64 = weights.iter().sum();
    weights.iter().map(|w| total * w / sum).collect()
}

/// Moves trader volume around while keeping `‖x‖₁ ≤ cap`.
fn perturb_trades(trades: &mut [f64], cap: f64, step: f64, rng: &mut dyn RngCore) {
    if trades.is_empty() {
        return;
    }
    let i = rng.random_range(0..trades.len());
    if trades.len() > 1 && rng.random_bool(0.5) {
        let mut j = rng.random_range(0..trades.len() - 1);
        if j >= i {
            j += 1;
        }
        let moved = trades[i] * step * rng.random::<f64>();
        trades[i] -= moved;
        trades[j] += moved;
    } else {
        trades[i] = (trades[i] + step * cap * (2.0 * rng.random::<f64>() - 1.0)).max(0.0);
    }
    let total: f64 = trades.iter().sum();
    if total > cap {
        let scale = cap / total;
        trades.iter_mut().for_each(|t| *t *= scale);
    }
}

/// The frontrunning set `B`: `n` entries, one of which is the validator's trade `δ`.
#[derive(Clone, Debug)]
pub struct FrontrunSpace {
    n: usize,
    volume_cap: f64,
    delta: f64,
}

impl FrontrunSpace {
    pub fn new(n: usize, volume_cap: f64, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(volume_cap > 0.0 && volume_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "volume cap must be positive, got {volume_cap}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { n, volume_cap, delta })
    }

    /// Diameter bound `2M` of the set under [`frontrun_metric`].
    pub fn diameter_bound(&self) -> f64 {
        2.0 * self.volume_cap
    }

    /// The alternating pair attaining the diameter bound: traders hold `2M/n`
    /// on even slots in one list and odd slots in the other.
    pub fn alternating_pair(&self) -> (Vec<MarketAction>, Vec<MarketAction>) {
        let amount = 2.0 * self.volume_cap / self.n as f64;
        let build = |parity: usize| -> Vec<MarketAction> {
            (0..self.n)
                .map(|i| {
                    if i % 2 == parity {
                        MarketAction::trade(amount)
                    } else {
                        MarketAction::trade(0.0)
                    }
                })
                .collect()
        };
        (build(0), build(1))
    }

    fn assemble(&self, position: usize, trades: &[f64]) -> Vec<MarketAction> {
        let mut out: Vec<MarketAction> = trades.iter().map(|&t| MarketAction::trade(t)).collect();
        out.insert(position, MarketAction::validator(self.delta));
        out
    }
}

impl ActionSpace<MarketAction> for FrontrunSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<MarketAction> {
        let trades = sample_trades(self.n - 1, self.volume_cap, rng);
        let position = rng.random_range(0..self.n);
        self.assemble(position, &trades)
    }

    fn perturb(&self, current: &[MarketAction], step: f64, rng: &mut dyn RngCore) -> Option<Vec<MarketAction>> {
        let list = FrontrunList::new(current.to_vec(), self.delta, self.volume_cap).ok()?;
        let k = list.validator_position();
        let mut trades: Vec<f64> = current
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, a)| a.trader)
            .collect();
        if trades.is_empty() {
            return None;
        }
        perturb_trades(&mut trades, self.volume_cap, step, rng);
        Some(self.assemble(k, &trades))
    }

    fn contains(&self, actions: &[MarketAction]) -> bool {
        actions.len() == self.n && FrontrunList::new(actions.to_vec(), self.delta, self.volume_cap).is_ok()
    }

    fn zero_cost_point(&self) -> Option<Vec<MarketAction>> {
        Some(self.assemble(0, &vec![0.0; self.n - 1]))
    }
}

/// The sandwiching set `B`: `n` entries with one buy, one sell, and feasibility.
///
/// Feasibility alone admits sells smaller than the buy, which lose money. The
/// space keeps only sells `γ ≥ δ`, so every member has a nonnegative payoff.
#[derive(Clone, Debug)]
pub struct SandwichSpace {
    n: usize,
    volume_cap: f64,
    exchange: ExchangeFn,
}

impl SandwichSpace {
    pub fn new(n: usize, volume_cap: f64, exchange: ExchangeFn) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("a sandwich needs n >= 2".into()));
        }
        if !(volume_cap > 0.0 && volume_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "volume cap must be positive, got {volume_cap}"
            )));
        }
        exchange.validate()?;
        Ok(Self {
            n,
            volume_cap,
            exchange,
        })
    }

    /// Diameter bound `M` under [`sandwich_metric`].
    pub fn diameter_bound(&self) -> f64 {
        self.volume_cap
    }

    fn assemble(&self, buy_pos: usize, sell_pos: usize, buy: f64, sell: f64, trades: &[f64]) -> Vec<MarketAction> {
        let mut trades = trades.iter();
        (0..self.n)
            .map(|i| {
                if i == buy_pos {
                    MarketAction::validator(buy)
                } else if i == sell_pos {
                    MarketAction::validator(-sell)
                } else {
                    MarketAction::trade(*trades.next().expect("n - 2 trades"))
                }
            })
            .collect()
    }

    /// Clamps the sell amount into `[buy, γ_max]`, the feasible sells with nonnegative profit.
    fn feasible_sell(&self, trades: &[f64], buy: f64, wanted: f64) -> Option<f64> {
        let t: f64 = trades.iter().sum();
        let cap = max_sandwich_sell(&self.exchange, t, buy).ok()?;
        let sell = wanted.min(cap).max(buy);
        (sell > 0.0).then_some(sell)
    }
}

impl ActionSpace<MarketAction> for SandwichSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<MarketAction> {
        loop {
            let trades = sample_trades(self.n - 2, self.volume_cap, rng);
            let buy_pos = rng.random_range(0..self.n);
            let mut sell_pos = rng.random_range(0..self.n - 1);
            if sell_pos >= buy_pos {
                sell_pos += 1;
            }
            let buy = self.volume_cap * (0.01 + 2.0 * rng.random::<f64>());
            let t: f64 = trades.iter().sum();
            let Ok(cap) = max_sandwich_sell(&self.exchange, t, buy) else {
                continue;
            };
            let wanted = if rng.random_bool(0.5) {
                cap
            } else {
                buy + (cap - buy) * rng.random::<f64>()
            };
            let Some(sell) = self.feasible_sell(&trades, buy, wanted) else {
                continue;
            };
            let list = self.assemble(buy_pos, sell_pos, buy, sell, &trades);
            if self.contains(&list) {
                return list;
            }
        }
    }

    fn perturb(&self, current: &[MarketAction], step: f64, rng: &mut dyn RngCore) -> Option<Vec<MarketAction>> {
        let list = SandwichList::new(current.to_vec(), self.volume_cap).ok()?;
        let (buy_pos, buy) = list.buy();
        let (sell_pos, sell) = list.sell();
        let mut trades: Vec<f64> = current
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != buy_pos && *i != sell_pos)
            .map(|(_, a)| a.trader)
            .collect();
        let mut buy = buy;
        let mut sell = -sell;
        match rng.random_range(0..3) {
            0 => perturb_trades(&mut trades, self.volume_cap, step, rng),
            1 => buy = (buy * (1.0 + step * (2.0 * rng.random::<f64>() - 1.0))).max(1e-12),
            _ => sell *= 1.0 + step * (2.0 * rng.random::<f64>() - 1.0),
        }
        let sell = self.feasible_sell(&trades, buy, sell)?;
        let out = self.assemble(buy_pos, sell_pos, buy, sell, &trades);
        self.contains(&out).then_some(out)
    }

    fn contains(&self, actions: &[MarketAction]) -> bool {
        let Ok(list) = SandwichList::new(actions.to_vec(), self.volume_cap) else {
            return false;
        };
        actions.len() == self.n
            && -list.sell().1 >= list.buy().1 * (1.0 - 1e-12)
            && sandwich_feasible(actions, &self.exchange).unwrap_or(false)
    }

    fn zero_cost_point(&self) -> Option<Vec<MarketAction>> {
        let buy = self.volume_cap;
        Some(self.assemble(0, self.n - 1, buy, buy, &vec![0.0; self.n - 2]))
    }
}
