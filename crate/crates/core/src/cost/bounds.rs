//! Worst-cost, spiky and partial-converse bounds, with their hypotheses checked
//! exhaustively over the orbit.

use std::collections::HashSet;

use serde::Serialize;

use super::{orbit_signal, summarize_signal};
use crate::certificate::{BoundCertificate, BoundKind};
use crate::error::{Error, Result};
use crate::payoff::Payoff;
use crate::permgroup::{enumerate_group, TransactionList};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

fn is_normalized(values: &[f64]) -> bool {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (max - 1.0).abs() <= NORMALIZATION_TOLERANCE
        && values
            .iter()
            .all(|v| *v >= -NORMALIZATION_TOLERANCE && *v <= 1.0 + NORMALIZATION_TOLERANCE)
}

fn require_normalized(values: &[f64]) -> Result<()> {
    if let Some(r) = values
        .iter()
        .position(|v| *v < -NORMALIZATION_TOLERANCE || *v > 1.0 + NORMALIZATION_TOLERANCE)
    {
        return Err(Error::Precondition(format!(
            "payoff {} at rank {r} lies outside [0, 1]",
            values[r]
        )));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (max - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Precondition(format!("maximum over the orbit is {max}, not 1")));
    }
    Ok(())
}

/// `C(f, x) ≤ 1 − |F(x)|/n!` for normalized `f`.
///
/// A nonnegative but unnormalized `f` is checked against the scaled form
/// `max_π f(π(x))·(1 − |F(x)|/n!)`. Negative payoffs are rejected.
pub fn stabilizer_bound<A, P>(f: &P, x: &TransactionList<A>) -> Result<BoundCertificate>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
{
    let values = orbit_signal(f, x)?;
    if let Some(r) = values.iter().position(|v| *v < -NORMALIZATION_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "payoff {} at rank {r} is negative; normalize first",
            values[r]
        )));
    }
    let (max, _, cost, _) = summarize_signal(&values)?;
    let fraction = 1.0 - x.stabilizer_size()? as f64 / values.len() as f64;
    let rhs = if is_normalized(&values) {
        fraction
    } else {
        max * fraction
    };
    Ok(BoundCertificate::exhaustive(BoundKind::Stabilizer, cost, rhs))
}

fn rank_set(ranks: &[usize], count: usize) -> Result<HashSet<usize>> {
    if let Some(&r) = ranks.iter().find(|&&r| r >= count) {
        return Err(Error::InvalidParameter(format!("rank {r} out of range 0..{count}")));
    }
    Ok(ranks.iter().copied().collect())
}

/// `C(f, x) ≥ β − α − |H|/n!·(1 − α)` for `f ≤ 1` with `f ≥ β` somewhere on `H` and
/// `f ≤ α` off `H`. `H` is a set of permutation ranks.
pub fn spiky_bound<A, P>(f: &P, x: &[A], h: &[usize], alpha: f64, beta: f64) -> Result<BoundCertificate>
where
    A: Clone,
    P: Payoff<A> + ?Sized,
{
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha > beta {
        return Err(Error::Precondition(format!(
            "need 0 <= alpha <= beta <= 1, got alpha={alpha}, beta={beta}"
        )));
    }
    let values = orbit_signal(f, x)?;
    let h = rank_set(h, values.len())?;
    if let Some(r) = values.iter().position(|v| *v > 1.0 + NORMALIZATION_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "payoff {} at rank {r} exceeds 1",
            values[r]
        )));
    }
    if !h.iter().any(|&r| values[r] >= beta) {
        return Err(Error::Precondition(format!("no rank in H reaches beta={beta}")));
    }
    if let Some(r) = (0..values.len()).find(|r| !h.contains(r) && values[*r] > alpha) {
        return Err(Error::Precondition(format!(
            "rank {r} outside H has payoff {} above alpha={alpha}",
            values[r]
        )));
    }
    let (_, _, cost, _) = summarize_signal(&values)?;
    let lower = beta - alpha - h.len() as f64 / values.len() as f64 * (1.0 - alpha);
    Ok(BoundCertificate::exhaustive(BoundKind::Spiky, lower, cost))
}

/// Outcome of the partial converse: the size bound on `T` and a witness `y = π(x)`
/// with `f(y) ≥ α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConverseReport {
    pub certificate: BoundCertificate,
    /// Rank of `π` with `f(π(x)) ≥ α`.
    pub witness_rank: usize,
    /// Number of distinct lists in `T`.
    pub support_size: usize,
}

/// For normalized `f` with `C(f, x) ≥ α` and `f ≥ η` on `T ⊆ S(x)`:
/// `|T| ≤ (1 − α)n!/(η|F(x)|)`. `T` is given by ranks and deduplicated as lists.
pub fn converse_support_bound<A, P>(
    f: &P,
    x: &TransactionList<A>,
    alpha: f64,
    eta: f64,
    t: &[usize],
) -> Result<ConverseReport>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
{
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!("eta must be positive, got {eta}")));
    }
    let values = orbit_signal(f, x)?;
    require_normalized(&values)?;
    let (_, _, cost, argmax) = summarize_signal(&values)?;
    if cost < alpha - NORMALIZATION_TOLERANCE {
        return Err(Error::Precondition(format!("cost {cost} is below alpha={alpha}")));
    }
    let ranks = rank_set(t, values.len())?;
    if let Some(&r) = ranks.iter().filter(|&&r| values[r] < eta).min() {
        return Err(Error::Precondition(format!(
            "rank {r} in T has payoff {} below eta={eta}",
            values[r]
        )));
    }
    let group = enumerate_group(x.len())?;
    let mut lists: Vec<Vec<A>> = Vec::new();
    for &r in &ranks {
        let y = group[r].apply(x)?;
        if !lists.contains(&y) {
            lists.push(y);
        }
    }
    let stabilizer = x.stabilizer_size()? as f64;
    let rhs = (1.0 - alpha) * values.len() as f64 / (eta * stabilizer);
    Ok(ConverseReport {
        certificate: BoundCertificate::exhaustive(BoundKind::ConverseT, lists.len() as f64, rhs),
        witness_rank: argmax,
        support_size: lists.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost;
    use crate::payoff::{from_fn, indicator_payoff, table_payoff, Scaled};
    use crate::permgroup::Permutation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn distinct(n: usize) -> TransactionList<usize> {
        TransactionList::new((0..n).collect())
    }

    #[test]
    fn indicator_saturates_stabilizer_bound() {
        for x in [distinct(4), TransactionList::new(vec![1, 1, 2, 3, 3])] {
            let f = indicator_payoff(x.clone());
            let c = stabilizer_bound(&f, &x).unwrap();
            assert!(c.satisfied);
            assert!(c.slack.abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn stabilizer_bound_trivial_and_scaled() {
        let x = distinct(3);
        let constant = from_fn("c", |_: &[usize]| 1.0);
        let c = stabilizer_bound(&constant, &x).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.satisfied);

        let f = indicator_payoff(x.clone());
        let scaled = Scaled { inner: &f, factor: 4.0 };
        let c = stabilizer_bound(&scaled, &x).unwrap();
        assert!((c.rhs - 4.0 * 5.0 / 6.0).abs() < 1e-12);
        assert!(c.slack.abs() < 1e-12);

        let negative = Scaled {
            inner: &f,
            factor: -1.0,
        };
        let err = stabilizer_bound(&negative, &x).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("rank")), "{err}");
    }

    #[test]
    fn random_normalized_payoffs_respect_stabilizer_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = distinct(5);
        for _ in 0..100 {
            let mut values: Vec<f64> = (0..120).map(|_| rng.random::<f64>()).collect();
            let top = rng.random_range(0..120);
            values[top] = 1.0;
            let f = table_payoff(values, &x).unwrap();
            assert!(stabilizer_bound(&f, &x).unwrap().satisfied);
        }
    }

    #[test]
    fn spiky_bound_is_tight_on_stabilizer_coset() {
        let x = TransactionList::new(vec![1, 1, 2, 3]);
        let f = indicator_payoff(x.clone());
        let h: Vec<usize> = x.stabilizer().unwrap().iter().map(Permutation::rank).collect();
        let c = spiky_bound(&f, &x, &h, 0.0, 1.0).unwrap();
        assert!(c.slack.abs() < 1e-12, "{c:?}");

        let all: Vec<usize> = (0..24).collect();
        let vacuous = spiky_bound(&f, &x, &all, 0.5, 0.5).unwrap();
        assert!(vacuous.lhs <= 0.0 && vacuous.satisfied);
    }

    #[test]
    fn spiky_two_level_payoff() {
        let x = distinct(5);
        let h: Vec<usize> = (0..6).map(|k| k * 20).collect();
        let values: Vec<f64> = (0..120).map(|r| if h.contains(&r) { 1.0 } else { 0.1 }).collect();
        let f = table_payoff(values, &x).unwrap();
        let c = spiky_bound(&f, &x, &h, 0.1, 1.0).unwrap();
        assert!(c.satisfied, "{c:?}");
        let exact = cost(&f, &x).unwrap().cost;
        assert_eq!(c.rhs, exact);
    }

    #[test]
    fn spiky_hypotheses_are_checked() {
        let x = distinct(3);
        let f = indicator_payoff(x.clone());
        let err = spiky_bound(&f, &x, &[1], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = spiky_bound(&f, &x, &[0], 0.6, 0.5).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let big = Scaled { inner: &f, factor: 2.0 };
        assert!(spiky_bound(&big, &x, &[0], 0.0, 1.0).is_err());
    }

    #[test]
    fn converse_for_indicator() {
        let x = distinct(4);
        let f = indicator_payoff(x.clone());
        let c = cost(&f, &x).unwrap().cost;
        let report = converse_support_bound(&f, &x, c, 1.0, &[0]).unwrap();
        assert_eq!(report.support_size, 1);
        assert!(report.certificate.rhs >= 1.0 - 1e-12);
        assert!(report.certificate.satisfied);
        assert_eq!(report.witness_rank, 0);
    }

    #[test]
    fn converse_with_alpha_near_one() {
        // Six lists at 1 and the rest at 0 give C = 1 − 6/120 = 0.95.
        let x = distinct(5);
        let t: Vec<usize> = vec![0, 7, 19, 44, 80, 119];
        let values: Vec<f64> = (0..120).map(|r| if t.contains(&r) { 1.0 } else { 0.0 }).collect();
        let f = table_payoff(values, &x).unwrap();
        let report = converse_support_bound(&f, &x, 0.95, 0.9, &t).unwrap();
        assert_eq!(report.support_size, 6);
        assert!(report.certificate.satisfied);
        assert_eq!(report.certificate.rhs.floor(), 6.0);

        let too_many: Vec<usize> = (0..7).collect();
        assert!(converse_support_bound(&f, &x, 0.95, 0.9, &too_many).is_err());
        assert!(converse_support_bound(&f, &x, 0.99, 0.9, &t).is_err());
    }

    #[test]
    fn converse_spiky_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = distinct(4);
        for _ in 0..50 {
            let k = rng.random_range(1..5);
            let mut values: Vec<f64> = (0..24).map(|_| 0.2 * rng.random::<f64>()).collect();
            let spikes: Vec<usize> = (0..k).map(|_| rng.random_range(0..24)).collect();
            for &s in &spikes {
                values[s] = 1.0;
            }
            let f = table_payoff(values, &x).unwrap();
            let c = cost(&f, &x).unwrap().cost;
            let report = converse_support_bound(&f, &x, c, c, &spikes).unwrap();
            assert!(report.certificate.satisfied, "{report:?}");
        }
    }
}
