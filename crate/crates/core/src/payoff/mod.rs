//! Payoff (value) functions `f: A^n -> R` and the families used throughout the crate.
//!
//! Every payoff is deterministic: equal inputs give bit-identical outputs.
//! Evaluation is fallible because several families have restricted domains
//! (a liquidation list with two `L` entries, a frontrun list with no validator
//! trade, an infeasible sandwich).

mod market;

pub use market::*;

use std::collections::HashMap;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, factorial};
use crate::permgroup::{enumerate_group, Permutation, TransactionList};

/// Structured tag naming a payoff family and its parameters, for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Descriptor {
    Indicator {
        n: usize,
    },
    GlobalWorstCost {
        choice: String,
    },
    Liquidation {
        threshold: f64,
    },
    Linear,
    Frontrun {
        exchange: ExchangeFn,
        delta: f64,
    },
    Sandwich {
        exchange: ExchangeFn,
    },
    Table {
        n: usize,
    },
    Randomized {
        outcomes: usize,
        name: String,
    },
    FairWrapper {
        base: Box<Descriptor>,
    },
    Normalized {
        base: Box<Descriptor>,
        scale: f64,
        offset: f64,
    },
    Scaled {
        base: Box<Descriptor>,
        factor: f64,
    },
    Shifted {
        base: Box<Descriptor>,
        offset: f64,
    },
    Sum {
        terms: Vec<Descriptor>,
    },
    Precomposed {
        base: Box<Descriptor>,
        permutation: Vec<usize>,
    },
    Custom {
        name: String,
    },
}

/// A value function over ordered action lists.
pub trait Payoff<A> {
    fn evaluate(&self, actions: &[A]) -> Result<f64>;

    fn descriptor(&self) -> Descriptor;
}

impl<A, P: Payoff<A> + ?Sized> Payoff<A> for &P {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        (**self).evaluate(actions)
    }

    fn descriptor(&self) -> Descriptor {
        (**self).descriptor()
    }
}

impl<A, P: Payoff<A> + ?Sized> Payoff<A> for Box<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        (**self).evaluate(actions)
    }

    fn descriptor(&self) -> Descriptor {
        (**self).descriptor()
    }
}

impl<A, P: Payoff<A> + ?Sized> Payoff<A> for Arc<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        (**self).evaluate(actions)
    }

    fn descriptor(&self) -> Descriptor {
        (**self).descriptor()
    }
}

/// A payoff backed by a closure. Handy for tests and one-off experiments.
pub struct FnPayoff<F> {
    name: String,
    func: F,
}

pub fn from_fn<A, F>(name: impl Into<String>, func: F) -> FnPayoff<F>
where
    F: Fn(&[A]) -> f64,
{
    FnPayoff {
        name: name.into(),
        func,
    }
}

impl<A, F: Fn(&[A]) -> f64> Payoff<A> for FnPayoff<F> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        Ok((self.func)(actions))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Custom {
            name: self.name.clone(),
        }
    }
}

// --- combinators -----------------------------------------------------------

/// `α·f`.
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<A, P: Payoff<A>> Payoff<A> for Scaled<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        Ok(self.factor * self.inner.evaluate(actions)?)
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Scaled {
            base: Box::new(self.inner.descriptor()),
            factor: self.factor,
        }
    }
}

/// `f + α`.
pub struct Shifted<P> {
    pub inner: P,
    pub offset: f64,
}

impl<A, P: Payoff<A>> Payoff<A> for Shifted<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        Ok(self.inner.evaluate(actions)? + self.offset)
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Shifted {
            base: Box::new(self.inner.descriptor()),
            offset: self.offset,
        }
    }
}

/// `f + g`.
pub struct Sum<P, Q> {
    pub left: P,
    pub right: Q,
}

impl<A, P: Payoff<A>, Q: Payoff<A>> Payoff<A> for Sum<P, Q> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        Ok(self.left.evaluate(actions)? + self.right.evaluate(actions)?)
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Sum {
            terms: vec![self.left.descriptor(), self.right.descriptor()],
        }
    }
}

/// `f ∘ π`: permute the input before evaluating.
pub struct Precomposed<P> {
    pub inner: P,
    pub permutation: Permutation,
}

impl<A: Clone, P: Payoff<A>> Payoff<A> for Precomposed<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        self.inner.evaluate(&self.permutation.apply(actions)?)
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Precomposed {
            base: Box::new(self.inner.descriptor()),
            permutation: self.permutation.mapping().to_vec(),
        }
    }
}

// --- worst-cost indicators -------------------------------------------------

/// `f(z) = 1[z = y]`, the worst-cost function for fixed transactions.
#[derive(Clone, Debug)]
pub struct IndicatorPayoff<A> {
    target: TransactionList<A>,
}

pub fn indicator_payoff<A>(target: TransactionList<A>) -> IndicatorPayoff<A> {
    IndicatorPayoff { target }
}

impl<A: PartialEq> Payoff<A> for IndicatorPayoff<A> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        if actions.len() != self.target.len() {
            return Err(Error::LengthMismatch {
                expected: self.target.len(),
                got: actions.len(),
            });
        }
        Ok(if actions == self.target.as_slice() { 1.0 } else { 0.0 })
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Indicator { n: self.target.len() }
    }
}

/// Global worst-cost function: `1` exactly at one canonical element of every orbit.
#[derive(Clone, Debug)]
pub struct GlobalWorstCostPayoff<A> {
    // None selects the lexicographically smallest element of each orbit.
    choices: Option<Vec<TransactionList<A>>>,
}

/// Builds a global worst-cost payoff. `choice` maps an orbit representative to the
/// element of that orbit that should score 1; `None` uses the lexicographically
/// smallest element (the sorted list).
pub fn global_worst_cost_payoff<A: Clone + PartialOrd>(
    choice: Option<Vec<(TransactionList<A>, TransactionList<A>)>>,
) -> Result<GlobalWorstCostPayoff<A>> {
    let Some(pairs) = choice else {
        return Ok(GlobalWorstCostPayoff { choices: None });
    };
    let mut chosen: Vec<TransactionList<A>> = Vec::with_capacity(pairs.len());
    for (representative, pick) in pairs {
        if !representative.same_orbit(&pick) {
            return Err(Error::InvalidChoice(
                "chosen element is not a rearrangement of its orbit representative".into(),
            ));
        }
        if let Some(existing) = chosen.iter().find(|c| c.same_orbit(&pick)) {
            if *existing != pick {
                return Err(Error::InvalidChoice(
                    "two different canonical elements chosen for the same orbit".into(),
                ));
            }
            continue;
        }
        chosen.push(pick);
    }
    Ok(GlobalWorstCostPayoff { choices: Some(chosen) })
}

impl<A: Clone + PartialOrd> GlobalWorstCostPayoff<A> {
    /// The canonical element of the orbit containing `x`.
    pub fn canonical(&self, x: &[A]) -> Result<Vec<A>> {
        match &self.choices {
            None => {
                let mut sorted = x.to_vec();
                if sorted.iter().any(|a| a.partial_cmp(a).is_none()) {
                    return Err(Error::Domain("alphabet element is not ordered".into()));
                }
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("checked comparable"));
                Ok(sorted)
            }
            Some(choices) => {
                let list = TransactionList::new(x.to_vec());
                choices
                    .iter()
                    .find(|c| list.same_orbit(c))
                    .map(|c| c.as_slice().to_vec())
                    .ok_or_else(|| Error::Domain("no canonical element registered for this orbit".into()))
            }
        }
    }
}

impl<A: Clone + PartialOrd> Payoff<A> for GlobalWorstCostPayoff<A> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        Ok(if self.canonical(actions)? == actions { 1.0 } else { 0.0 })
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::GlobalWorstCost {
            choice: if self.choices.is_some() {
                "custom"
            } else {
                "lexicographic"
            }
            .into(),
        }
    }
}

/// Decomposes `f` restricted to the orbit of `x` into worst-cost indicators:
/// `f(π(x)) = Σ_y f(y)·1[π(x) = y]` over `y ∈ S(x)`.
pub fn basis_decompose<A, P>(f: &P, x: &TransactionList<A>) -> Result<Vec<(TransactionList<A>, f64)>>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
{
    x.orbit()?
        .into_iter()
        .map(|y| {
            let value = f.evaluate(&y)?;
            Ok((y, value))
        })
        .collect()
}

/// Evaluates a basis expansion at `z`.
pub fn reconstruct_from_basis<A: PartialEq>(terms: &[(TransactionList<A>, f64)], z: &[A]) -> f64 {
    terms.iter().filter(|(y, _)| y.as_slice() == z).map(|(_, c)| *c).sum()
}

// --- liquidation -----------------------------------------------------------

/// Alphabet of the liquidation example: signed price moves and a single liquidation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LiquidationAction {
    Trade(f64),
    Liquidate,
}

/// Pays 1 iff the trades preceding the liquidation push the price to at least `threshold`.
#[derive(Clone, Copy, Debug)]
pub struct LiquidationPayoff {
    threshold: f64,
}

pub fn liquidation_payoff(threshold: f64) -> LiquidationPayoff {
    LiquidationPayoff { threshold }
}

impl LiquidationPayoff {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Payoff<LiquidationAction> for LiquidationPayoff {
    fn evaluate(&self, actions: &[LiquidationAction]) -> Result<f64> {
        let mut liquidations = actions
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, LiquidationAction::Liquidate));
        let Some((k, _)) = liquidations.next() else {
            return Ok(0.0);
        };
        if liquidations.next().is_some() {
            return Err(Error::Domain("more than one liquidation in the list".into()));
        }
        let prefix = compensated_sum(actions[..k].iter().map(|a| match a {
            LiquidationAction::Trade(v) => *v,
            LiquidationAction::Liquidate => 0.0,
        }));
        Ok(if prefix >= self.threshold { 1.0 } else { 0.0 })
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Liquidation {
            threshold: self.threshold,
        }
    }
}

/// The list `(+1, …, +1, L, −1, …, −1)` with `m` up-moves and `n − m − 1`
/// down-moves, paired with threshold `m`. Its cost is `1 − m!(n−m−1)!/n!`.
pub fn liquidation_list(n: usize, up_moves: usize) -> Result<(LiquidationPayoff, TransactionList<LiquidationAction>)> {
    if n == 0 || up_moves >= n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= up_moves < n, got up_moves={up_moves}, n={n}"
        )));
    }
    let mut actions = vec![LiquidationAction::Trade(1.0); up_moves];
    actions.push(LiquidationAction::Liquidate);
    actions.extend(std::iter::repeat_n(LiquidationAction::Trade(-1.0), n - up_moves - 1));
    Ok((liquidation_payoff(up_moves as f64), TransactionList::new(actions)))
}

/// The basic liquidation example for even `n`: `n/2` up-moves and threshold `n/2`.
pub fn liquidation_example(n: usize) -> Result<(LiquidationPayoff, TransactionList<LiquidationAction>)> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("n must be even and >= 2, got {n}")));
    }
    liquidation_list(n, n / 2)
}

// --- linear tightness ------------------------------------------------------

/// `f(x) = x₁ − x₂ − … − xₙ`, 1-Lipschitz in ℓ₁.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearTightnessPayoff;

pub fn linear_tightness_payoff() -> LinearTightnessPayoff {
    LinearTightnessPayoff
}

impl Payoff<f64> for LinearTightnessPayoff {
    fn evaluate(&self, actions: &[f64]) -> Result<f64> {
        let Some((first, rest)) = actions.split_first() else {
            return Err(Error::Domain("empty list".into()));
        };
        Ok(first - compensated_sum(rest.iter().copied()))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Linear
    }
}

// --- lookup tables ---------------------------------------------------------

/// A payoff given as an `n!`-vector over the orbit of a base list:
/// `f(π(x)) = values[rank(π)]`.
#[derive(Clone, Debug)]
pub struct TablePayoff<A> {
    classes: Vec<A>,
    lookup: HashMap<Vec<usize>, f64>,
    n: usize,
}

/// Builds a table payoff. When `x` has repeated entries, distinct ranks can
/// produce the same list; the table must then agree on every such coset.
pub fn table_payoff<A: Clone + PartialEq>(values: Vec<f64>, x: &TransactionList<A>) -> Result<TablePayoff<A>> {
    let n = x.len();
    let group = enumerate_group(n)?;
    if values.len() != group.len() {
        return Err(Error::InvalidTable(format!(
            "expected {} entries, got {}",
            group.len(),
            values.len()
        )));
    }
    if let Some(r) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidTable(format!("non-finite value at rank {r}")));
    }

    let labels = x.pattern();
    let mut classes = Vec::new();
    let mut class_of = vec![0; n];
    for (i, &l) in labels.iter().enumerate() {
        if l == i {
            classes.push(x[i].clone());
        }
        class_of[i] = classes.iter().position(|c| *c == x[l]).expect("class registered");
    }

    let mut lookup = HashMap::with_capacity(values.len());
    let mut first_rank: HashMap<Vec<usize>, usize> = HashMap::new();
    for (rank, pi) in group.iter().enumerate() {
        let key = pi.apply(&class_of)?;
        match lookup.get(&key) {
            Some(&v) if v != values[rank] => {
                return Err(Error::InvalidTable(format!(
                    "ranks {} and {rank} give the same list but different values",
                    first_rank[&key]
                )));
            }
            Some(_) => {}
            None => {
                lookup.insert(key.clone(), values[rank]);
                first_rank.insert(key, rank);
            }
        }
    }
    Ok(TablePayoff { classes, lookup, n })
}

impl<A: PartialEq> Payoff<A> for TablePayoff<A> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        if actions.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: actions.len(),
            });
        }
        let key = actions
            .iter()
            .map(|a| self.classes.iter().position(|c| c == a))
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| Error::Domain("list uses an action outside the table's orbit".into()))?;
        self.lookup
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Domain("list is not a rearrangement of the table's base list".into()))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Table { n: self.n }
    }
}

// --- randomness ------------------------------------------------------------

type OutcomeFn<A> = dyn Fn(&[A], usize) -> Result<f64> + Send + Sync;

/// A payoff `f(x, ω)` over a finite weighted sample space; evaluates to `E_ω f(x, ω)`.
pub struct RandomizedPayoff<A> {
    weights: Vec<f64>,
    outcome: Box<OutcomeFn<A>>,
    descriptor: Descriptor,
}

impl<A> RandomizedPayoff<A> {
    /// `weights[ω]` is the probability of outcome `ω`.
    pub fn new<F>(name: impl Into<String>, weights: Vec<f64>, outcome: F) -> Result<Self>
    where
        F: Fn(&[A], usize) -> Result<f64> + Send + Sync + 'static,
    {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty sample space".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid probability weight {w}")));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            descriptor: Descriptor::Randomized {
                outcomes: weights.len(),
                name: name.into(),
            },
            weights,
            outcome: Box::new(outcome),
        })
    }

    pub fn outcomes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `f(x, ω)` for a single outcome.
    pub fn evaluate_outcome(&self, actions: &[A], omega: usize) -> Result<f64> {
        if omega >= self.weights.len() {
            return Err(Error::InvalidParameter(format!("outcome {omega} out of range")));
        }
        (self.outcome)(actions, omega)
    }

    /// `E_ω f(x, ω)`.
    pub fn expected(&self, actions: &[A]) -> Result<f64> {
        let terms = self
            .weights
            .iter()
            .enumerate()
            .map(|(omega, w)| Ok(w * (self.outcome)(actions, omega)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(compensated_sum(terms))
    }
}

impl<A> Payoff<A> for RandomizedPayoff<A> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        self.expected(actions)
    }

    fn descriptor(&self) -> Descriptor {
        self.descriptor.clone()
    }
}

/// Wraps `f` so the protocol shuffles the list uniformly at random before
/// evaluating: `f̃(x, ω) = f(ω(x))` with `ω` uniform over `S_n`.
pub fn fair_wrapper<A, P>(f: P, n: usize) -> Result<RandomizedPayoff<A>>
where
    A: Clone + 'static,
    P: Payoff<A> + Send + Sync + 'static,
{
    let group = enumerate_group(n)?;
    let count = factorial(n);
    let descriptor = Descriptor::FairWrapper {
        base: Box::new(f.descriptor()),
    };
    let mut wrapped = RandomizedPayoff::new(
        "fair_wrapper",
        vec![1.0 / count as f64; count],
        move |x: &[A], omega| f.evaluate(&group[omega].apply(x)?),
    )?;
    wrapped.descriptor = descriptor;
    Ok(wrapped)
}

// --- metrics and action spaces ---------------------------------------------

/// A nonnegative pair function used in Lipschitz-type conditions. It need not be a metric.
pub trait PairDistance<A> {
    fn distance(&self, a: &[A], b: &[A]) -> Result<f64>;
}

impl<A, F: Fn(&[A], &[A]) -> f64> PairDistance<A> for F {
    fn distance(&self, a: &[A], b: &[A]) -> Result<f64> {
        Ok(self(a, b))
    }
}

/// ℓ₁ distance between numeric lists.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// A permutation-closed set `B ⊆ A^n` that can be sampled and locally explored.
pub trait ActionSpace<A> {
    fn len(&self) -> usize;

    /// Draws a member of the set.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<A>;

    /// A nearby member of the set, or `None` if the proposed move leaves it.
    /// `step` is a relative step size in `(0, 1]`.
    fn perturb(&self, current: &[A], step: f64, rng: &mut dyn RngCore) -> Option<Vec<A>>;

    fn contains(&self, actions: &[A]) -> bool;

    /// A member with known cost zero (for example all trader volumes zero), if one exists.
    fn zero_cost_point(&self) -> Option<Vec<A>> {
        None
    }
}
