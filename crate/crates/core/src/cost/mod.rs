//! The cost of MEV, `C(f, x) = max_π f(π(x)) − E_π f(π(x))`, by exhaustive enumeration.

mod bounds;
mod smooth;

pub use bounds::*;
pub use smooth::*;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_mean, compensated_sum};
use crate::payoff::{Descriptor, Payoff, RandomizedPayoff};
use crate::permgroup::{check_degree, enumerate_group, TransactionList};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub max_value: f64,
    pub mean_value: f64,
    pub cost: f64,
    /// Lowest rank attaining the maximum.
    pub argmax_rank: usize,
    pub n_factorial: usize,
    pub stabilizer_size: usize,
}

/// `f(π_r(x))` for every rank `r` in lexicographic order.
pub fn orbit_signal<A, P>(f: &P, x: &[A]) -> Result<Vec<f64>>
where
    A: Clone,
    P: Payoff<A> + ?Sized,
{
    enumerate_group(x.len())?
        .iter()
        .map(|pi| f.evaluate(&pi.apply(x)?))
        .collect()
}

/// Max, mean, cost and argmax of a signal indexed by rank.
///
/// The cost is accumulated as the mean of `max − f_i`, which is exactly zero for
/// a constant signal and never negative.
pub fn summarize_signal(values: &[f64]) -> Result<(f64, f64, f64, usize)> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty signal".into()));
    }
    if let Some(r) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite payoff at rank {r}")));
    }
    let mut argmax = 0;
    for (r, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = r;
        }
    }
    let max = values[argmax];
    let gap = compensated_sum(values.iter().map(|v| max - v)) / values.len() as f64;
    Ok((max, compensated_mean(values), gap, argmax))
}

/// Exact cost of MEV of `f` at `x`.
pub fn cost<A, P>(f: &P, x: &[A]) -> Result<CostReport>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
{
    let values = orbit_signal(f, x)?;
    let (max_value, mean_value, cost, argmax_rank) = summarize_signal(&values)?;
    Ok(CostReport {
        max_value,
        mean_value,
        cost,
        argmax_rank,
        n_factorial: values.len(),
        stabilizer_size: TransactionList::new(x.to_vec()).stabilizer_size()?,
    })
}

/// `(f − offset)/scale`, or the constant 1 when `scale == 0`.
#[derive(Clone, Debug)]
pub struct Normalized<P> {
    inner: P,
    scale: f64,
    offset: f64,
}

impl<P> Normalized<P> {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<A, P: Payoff<A>> Payoff<A> for Normalized<P> {
    fn evaluate(&self, actions: &[A]) -> Result<f64> {
        let v = self.inner.evaluate(actions)?;
        Ok(if self.scale == 0.0 {
            1.0
        } else {
            (v - self.offset) / self.scale
        })
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Normalized {
            base: Box::new(self.inner.descriptor()),
            scale: self.scale,
            offset: self.offset,
        }
    }
}

/// Rescales `f` to range `[0, 1]` over the orbit of `x`.
///
/// Returns the normalized payoff together with `scale = max − min` and
/// `offset = min`, so `C(f, x) = scale·C(f̃, x)`.
pub fn normalize<A, P>(f: P, x: &[A]) -> Result<(Normalized<P>, f64, f64)>
where
    A: Clone,
    P: Payoff<A>,
{
    let values = orbit_signal(&f, x)?;
    let (max, _, _, _) = summarize_signal(&values)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = max - min;
    Ok((
        Normalized {
            inner: f,
            scale,
            offset: min,
        },
        scale,
        min,
    ))
}

/// `E_π f(π(x)) / max_π f(π(x))`.
pub fn ratio_cost<A, P>(f: &P, x: &[A]) -> Result<f64>
where
    A: Clone,
    P: Payoff<A> + ?Sized,
{
    let values = orbit_signal(f, x)?;
    let (max, mean, _, _) = summarize_signal(&values)?;
    if max == 0.0 {
        return Err(Error::ZeroMaximum);
    }
    Ok(mean / max)
}

/// Cost of a randomized payoff: the cost of its expectation `f̄(x) = E_ω f(x, ω)`.
pub fn randomized_cost<A>(f: &RandomizedPayoff<A>, x: &[A]) -> Result<CostReport>
where
    A: Clone + PartialEq,
{
    check_degree(x.len())?;
    cost(f, x)
}

/// Per-list costs of a finite collection; the maximum is the worst-case cost `C_s`
/// over a permutation-closed finite set.
pub fn worst_case_cost<A, P>(f: &P, lists: &[Vec<A>]) -> Result<(f64, usize)>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
{
    if lists.is_empty() {
        return Err(Error::InvalidParameter("no lists supplied".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, x) in lists.iter().enumerate() {
        let c = cost(f, x)?.cost;
        if c > best.0 {
            best = (c, i);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{binomial, factorial};
    use crate::payoff::{
        fair_wrapper, from_fn, indicator_payoff, linear_tightness_payoff, liquidation_example, liquidation_list,
        table_payoff, Precomposed, Scaled, Shifted, Sum,
    };
    use crate::permgroup::{Permutation, MAX_DEGREE};
    use proptest::prelude::*;

    // Counts orderings with the liquidation at least as late as needed, directly.
    fn liquidation_oracle(n: usize, up: usize) -> f64 {
        let (f, x) = liquidation_list(n, up).unwrap();
        let mut hits = 0usize;
        let mut total = 0usize;
        for pi in enumerate_group(n).unwrap() {
            total += 1;
            if f.evaluate(&pi.apply(&x).unwrap()).unwrap() == 1.0 {
                hits += 1;
            }
        }
        1.0 - hits as f64 / total as f64
    }

    #[test]
    fn constant_payoff_has_zero_cost() {
        let f = from_fn("const", |_: &[u8]| 3.5);
        let r = cost(&f, &[1, 2, 3, 4]).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.argmax_rank, 0);
        assert_eq!(r.n_factorial, 24);
    }

    #[test]
    fn liquidation_costs() {
        let (f, x) = liquidation_example(4).unwrap();
        let r = cost(&f, &x).unwrap();
        assert!((r.cost - 11.0 / 12.0).abs() < 1e-15);
        assert_eq!(r.max_value, 1.0);
        assert_eq!(r.stabilizer_size, 2);
        assert!((liquidation_oracle(4, 2) - r.cost).abs() < 1e-15);

        for n in [2, 4, 6, 8] {
            let (f, x) = liquidation_example(n).unwrap();
            let exact = 1.0 - 2.0 / (n as f64 * binomial(n, n / 2));
            assert!((cost(&f, &x).unwrap().cost - exact).abs() < 1e-12, "n={n}");
        }
        // Generalization with m up-moves: 1 − m!(n−m−1)!/n!.
        let (f, x) = liquidation_list(5, 2).unwrap();
        let exact = 1.0 - (2.0 * 2.0) / 120.0;
        assert!((cost(&f, &x).unwrap().cost - exact).abs() < 1e-12);
        assert!((liquidation_oracle(5, 2) - exact).abs() < 1e-12);
    }

    #[test]
    fn indicator_on_distinct_entries() {
        let x = TransactionList::new(vec![1, 2, 3, 4, 5]);
        let f = indicator_payoff(x.clone());
        let r = cost(&f, &x).unwrap();
        assert!((r.cost - (1.0 - 1.0 / 120.0)).abs() < 1e-15);
        assert_eq!(r.stabilizer_size, 1);
    }

    #[test]
    fn tightness_example() {
        let f = linear_tightness_payoff();
        for n in 3..=7 {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            let c = cost(&f, &e1).unwrap().cost;
            assert!((c - 2.0 * (1.0 - 1.0 / n as f64)).abs() < 1e-12);
            assert_eq!(cost(&f, &vec![0.0; n]).unwrap().cost, 0.0);
        }
    }

    #[test]
    fn argmax_ties_pick_lowest_rank() {
        let f = from_fn("tie", |z: &[u8]| if z[0] == 3 { 1.0 } else { 0.0 });
        let r = cost(&f, &[1, 2, 3]).unwrap();
        let first = Permutation::unrank(3, r.argmax_rank)
            .unwrap()
            .apply(&[1u8, 2, 3])
            .unwrap();
        assert_eq!(first[0], 3);
        for rank in 0..r.argmax_rank {
            let z = Permutation::unrank(3, rank).unwrap().apply(&[1u8, 2, 3]).unwrap();
            assert_ne!(z[0], 3);
        }
    }

    #[test]
    fn cost_respects_cap() {
        let f = from_fn("c", |_: &[u8]| 0.0);
        let x = vec![0u8; MAX_DEGREE + 1];
        assert!(matches!(cost(&f, &x), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn normalization_examples() {
        // Range [−3, 5] over the orbit.
        let x = [0usize, 1, 2];
        let f = from_fn("ranged", |z: &[usize]| [-3.0, 1.0, 5.0][z[0]]);
        let (g, scale, offset) = normalize(&f, &x).unwrap();
        assert_eq!((scale, offset), (8.0, -3.0));
        let c = cost(&f, &x).unwrap().cost;
        let cn = cost(&g, &x).unwrap().cost;
        assert!((c - scale * cn).abs() <= 1e-10 * c.abs().max(1.0));
        let values = orbit_signal(&g, &x).unwrap();
        assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(values.iter().copied().fold(f64::MIN, f64::max), 1.0);

        let constant = from_fn("const", |_: &[usize]| -2.0);
        let (g, scale, _) = normalize(&constant, &x).unwrap();
        assert_eq!(scale, 0.0);
        assert!(orbit_signal(&g, &x).unwrap().iter().all(|&v| v == 1.0));
        assert_eq!(cost(&g, &x).unwrap().cost, 0.0);

        let y = TransactionList::new(vec![1, 2, 3]);
        let ind = indicator_payoff(y.clone());
        let (g, scale, offset) = normalize(&ind, &y).unwrap();
        assert_eq!((scale, offset), (1.0, 0.0));
        assert_eq!(orbit_signal(&g, &y).unwrap(), orbit_signal(&ind, &y).unwrap());
    }

    #[test]
    fn ratio_cost_examples() {
        let x = TransactionList::new(vec![1, 2, 3, 4]);
        let ind = indicator_payoff(x.clone());
        assert!((ratio_cost(&ind, &x).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        let scaled = Scaled {
            inner: &ind,
            factor: 7.0,
        };
        assert!((ratio_cost(&scaled, &x).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        let constant = from_fn("c", |_: &[i32]| 2.0);
        assert_eq!(ratio_cost(&constant, &x).unwrap(), 1.0);
        let zero = from_fn("z", |_: &[i32]| 0.0);
        assert_eq!(ratio_cost(&zero, &x), Err(Error::ZeroMaximum));
    }

    #[test]
    fn randomized_cost_reductions() {
        let x = vec![3.0, 1.0, 2.0, 0.5];
        let fair = fair_wrapper(linear_tightness_payoff(), 4).unwrap();
        assert!(randomized_cost(&fair, &x).unwrap().cost.abs() < 1e-12);

        let single =
            RandomizedPayoff::new("one", vec![1.0], |z: &[f64], _| linear_tightness_payoff().evaluate(z)).unwrap();
        let direct = cost(&linear_tightness_payoff(), &x).unwrap().cost;
        assert!((randomized_cost(&single, &x).unwrap().cost - direct).abs() < 1e-15);

        let two = RandomizedPayoff::new("two", vec![0.3, 0.7], |z: &[f64], w| {
            Ok(if w == 0 { z[0] } else { z[1] * z[2] })
        })
        .unwrap();
        let averaged = from_fn("avg", |z: &[f64]| 0.3 * z[0] + 0.7 * z[1] * z[2]);
        let a = randomized_cost(&two, &x).unwrap().cost;
        let b = cost(&averaged, &x).unwrap().cost;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn worst_case_over_finite_set() {
        let f = linear_tightness_payoff();
        let lists = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]];
        let (c, i) = worst_case_cost(&f, &lists).unwrap();
        assert_eq!(i, 1);
        assert!((c - 4.0 / 3.0).abs() < 1e-12);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<u8>)> {
        (3usize..=5).prop_flat_map(|n| {
            let count = factorial(n);
            (
                prop::collection::vec(-5.0f64..5.0, count),
                prop::collection::vec(-5.0f64..5.0, count),
                prop::collection::vec(0u8..3, n),
            )
        })
    }

    fn distinct(n: usize) -> TransactionList<usize> {
        TransactionList::new((0..n).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn algebraic_properties((fv, gv, _) in arb_case(), alpha in 0.0f64..10.0, shift in -10.0f64..10.0, rank in any::<prop::sample::Index>()) {
            let n = (1..=5).find(|&k| factorial(k) == fv.len()).unwrap();
            let x = distinct(n);
            let f = table_payoff(fv, &x).unwrap();
            let g = table_payoff(gv, &x).unwrap();
            let cf = cost(&f, &x).unwrap().cost;
            let cg = cost(&g, &x).unwrap().cost;

            let homog = cost(&Scaled { inner: &f, factor: alpha }, &x).unwrap().cost;
            prop_assert!((homog - alpha * cf).abs() <= 1e-10 * (alpha * cf).abs().max(1.0));

            let shifted = cost(&Shifted { inner: &f, offset: shift }, &x).unwrap().cost;
            prop_assert!((shifted - cf).abs() <= 1e-10 * cf.abs().max(1.0));

            let sum = cost(&Sum { left: &f, right: &g }, &x).unwrap().cost;
            prop_assert!(sum <= cf + cg + 1e-10);

            let pi = Permutation::unrank(n, rank.index(factorial(n))).unwrap();
            let moved = cost(&f, &pi.apply(&x).unwrap()).unwrap().cost;
            prop_assert!((moved - cf).abs() <= 1e-10 * cf.abs().max(1.0));
            let pre = cost(&Precomposed { inner: &f, permutation: pi }, &x).unwrap().cost;
            prop_assert!((pre - cf).abs() <= 1e-10 * cf.abs().max(1.0));

            prop_assert!(cf >= 0.0);
        }

        #[test]
        fn zero_cost_iff_constant_on_orbit(labels in prop::collection::vec(0u8..3, 3..=5), weights in prop::collection::vec(-2.0f64..2.0, 5)) {
            let f = from_fn("w", move |z: &[u8]| z.iter().zip(&weights).map(|(a, w)| *a as f64 * w).sum());
            let values = orbit_signal(&f, &labels).unwrap();
            let c = cost(&f, &labels).unwrap().cost;
            let constant = values.iter().all(|v| *v == values[0]);
            prop_assert_eq!(c == 0.0, constant);
        }
    }
}
