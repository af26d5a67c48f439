//! Smoothness: Lipschitz propagation to the cost, the permutation-independent metric
//! lift, and the sampled global bound `C_s ≤ 2Lt + inf C`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cost;
use crate::certificate::{BoundCertificate, BoundKind, CheckMode, BOUND_TOLERANCE};
use crate::error::{Error, Result};
use crate::payoff::{ActionSpace, PairDistance, Payoff};
use crate::permgroup::{enumerate_group, Permutation};

/// Degree up to which hypotheses are checked over every permutation.
pub const EXHAUSTIVE_CHECK_DEGREE: usize = 6;

/// Permutations used for spot checks: all of `S_n` up to [`EXHAUSTIVE_CHECK_DEGREE`],
/// an evenly strided subset of 720 above.
fn check_group(n: usize) -> Result<(Vec<Permutation>, CheckMode)> {
    let group = enumerate_group(n)?;
    if n <= EXHAUSTIVE_CHECK_DEGREE {
        return Ok((group, CheckMode::Exhaustive));
    }
    let stride = group.len().div_ceil(720);
    Ok((group.into_iter().step_by(stride).collect(), CheckMode::Sampled))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `|C(f, x) − C(f, y)| ≤ 2L·d(x, y)`.
///
/// Checks that `d(π(x), π(y)) = d(x, y)` and `|f(π(x)) − f(π(y))| ≤ L·d(π(x), π(y))`
/// over the permutations of [`check_group`]; a failure names the offending rank.
pub fn lipschitz_cost_bound<A, P, D>(f: &P, lipschitz: f64, d: &D, x: &[A], y: &[A]) -> Result<BoundCertificate>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
    D: PairDistance<A> + ?Sized,
{
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(lipschitz >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant {lipschitz} is negative"
        )));
    }
    let base = d.distance(x, y)?;
    let (perms, mode) = check_group(x.len())?;
    for pi in &perms {
        let px = pi.apply(x)?;
        let py = pi.apply(y)?;
        let dp = d.distance(&px, &py)?;
        if relative_gap(dp, base) > 1e-12 {
            return Err(Error::Precondition(format!(
                "distance is not permutation-independent: rank {} gives {dp}, identity gives {base}; lift it first",
                pi.rank()
            )));
        }
        let gap = (f.evaluate(&px)? - f.evaluate(&py)?).abs();
        if gap > lipschitz * dp + BOUND_TOLERANCE {
            return Err(Error::Precondition(format!(
                "Lipschitz condition fails on the pair permuted by rank {}: |Δf| = {gap} > L·d = {}",
                pi.rank(),
                lipschitz * dp
            )));
        }
    }
    let gap = (cost(f, x)?.cost - cost(f, y)?.cost).abs();
    Ok(BoundCertificate::new(
        BoundKind::Smoothness,
        gap,
        2.0 * lipschitz * base,
        mode,
    ))
}

/// `d̃(x, y) = max_π d(π(x), π(y))`.
pub struct LiftedMetric<D> {
    inner: D,
    group: Vec<Permutation>,
}

pub fn lift_metric<D>(d: D, n: usize) -> Result<LiftedMetric<D>> {
    Ok(LiftedMetric {
        inner: d,
        group: enumerate_group(n)?,
    })
}

impl<A: Clone, D: PairDistance<A>> PairDistance<A> for LiftedMetric<D> {
    fn distance(&self, a: &[A], b: &[A]) -> Result<f64> {
        let n = self.group[0].degree();
        if a.len() != n || b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: if a.len() != n { a.len() } else { b.len() },
            });
        }
        let mut best = f64::NEG_INFINITY;
        for pi in &self.group {
            best = best.max(self.inner.distance(&pi.apply(a)?, &pi.apply(b)?)?);
        }
        Ok(best)
    }
}

/// Settings for the sampled supremum of `C(f, ·)` over an action space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupEstimateConfig {
    /// Monte Carlo draws.
    pub samples: usize,
    /// Best samples used as starting points of the local ascent.
    pub ascent_starts: usize,
    /// Proposals per ascent run.
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for SupEstimateConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            ascent_starts: 8,
            ascent_steps: 100,
            seed: 0,
        }
    }
}

/// A sampled lower estimate of `C_s(f) = sup_x C(f, x)`; never the true supremum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupEstimate<A> {
    pub sup_cost: f64,
    pub argsup: Vec<A>,
    /// `min C` over the zero-cost point (when the space has one) and all samples.
    pub inf_cost: f64,
    pub inf_from_zero_point: bool,
    /// Number of cost evaluations.
    pub evaluations: usize,
    pub config: SupEstimateConfig,
}

/// Monte Carlo sampling followed by greedy local ascent from the best samples.
pub fn estimate_sup_cost<A, P, S>(f: &P, space: &S, config: SupEstimateConfig) -> Result<SupEstimate<A>>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
    S: ActionSpace<A> + ?Sized,
{
    if config.samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluations = 0;
    let mut scored: Vec<(f64, Vec<A>)> = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        let z = space.sample(&mut rng);
        let c = cost(f, &z)?.cost;
        evaluations += 1;
        scored.push((c, z));
    }
    let mut inf_cost = scored.iter().map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    let mut inf_from_zero_point = false;
    if let Some(zero) = space.zero_cost_point() {
        let c = cost(f, &zero)?.cost;
        evaluations += 1;
        if c <= inf_cost {
            inf_cost = c;
            inf_from_zero_point = true;
        }
    }

    // Stable sort keeps sampling order among ties, so runs are reproducible.
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut best_cost, mut best) = scored[0].clone();
    for (start_cost, start) in scored.into_iter().take(config.ascent_starts) {
        let (mut current_cost, mut current) = (start_cost, start);
        let mut step = 0.5;
        let mut misses = 0;
        for _ in 0..config.ascent_steps {
            let Some(candidate) = space.perturb(&current, step, &mut rng) else {
                misses += 1;
                continue;
            };
            let c = cost(f, &candidate)?.cost;
            evaluations += 1;
            if c > current_cost {
                current_cost = c;
                current = candidate;
                misses = 0;
            } else {
                misses += 1;
            }
            if misses >= 5 {
                step *= 0.5;
                misses = 0;
                if step < 1e-6 {
                    break;
                }
            }
        }
        if current_cost > best_cost {
            best_cost = current_cost;
            best = current;
        }
    }
    Ok(SupEstimate {
        sup_cost: best_cost,
        argsup: best,
        inf_cost,
        inf_from_zero_point,
        evaluations,
        config,
    })
}

/// Result of checking `C_s ≤ 2Lt + inf C` on a sampled space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalSmoothReport<A> {
    pub certificate: BoundCertificate,
    pub estimate: SupEstimate<A>,
    pub lipschitz: f64,
    pub diameter: f64,
    /// Sampled pairs checked against `d ≤ t` and `|Δf| ≤ L·d`.
    pub pairs_checked: usize,
    pub diameter_violations: usize,
    pub lipschitz_violations: usize,
}

impl<A> GlobalSmoothReport<A> {
    /// Certificate satisfied and no spot-check violations.
    pub fn passed(&self) -> bool {
        self.certificate.satisfied && self.diameter_violations == 0 && self.lipschitz_violations == 0
    }
}

/// Sampled `C_s(f) ≤ 2L·t + inf_x C(f, x)` for an `L`-smooth `f` on a space of
/// diameter at most `t`.
pub fn global_smooth_bound<A, P, D, S>(
    f: &P,
    lipschitz: f64,
    d: &D,
    space: &S,
    diameter: f64,
    config: SupEstimateConfig,
) -> Result<GlobalSmoothReport<A>>
where
    A: Clone + PartialEq,
    P: Payoff<A> + ?Sized,
    D: PairDistance<A> + ?Sized,
    S: ActionSpace<A> + ?Sized,
{
    let estimate = estimate_sup_cost(f, space, config)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0f_9a1f);
    let pairs = config.samples.min(500);
    let (mut diameter_violations, mut lipschitz_violations) = (0, 0);
    for _ in 0..pairs {
        let a = space.sample(&mut rng);
        let b = if rng.random_bool(0.5) {
            space.sample(&mut rng)
        } else {
            space.perturb(&a, 0.1, &mut rng).unwrap_or_else(|| a.clone())
        };
        let dist = d.distance(&a, &b)?;
        if dist > diameter + BOUND_TOLERANCE {
            diameter_violations += 1;
        }
        if (f.evaluate(&a)? - f.evaluate(&b)?).abs() > lipschitz * dist + BOUND_TOLERANCE {
            lipschitz_violations += 1;
        }
    }

    let rhs = 2.0 * lipschitz * diameter + estimate.inf_cost;
    Ok(GlobalSmoothReport {
        certificate: BoundCertificate::new(BoundKind::GlobalSmooth, estimate.sup_cost, rhs, CheckMode::Sampled),
        estimate,
        lipschitz,
        diameter,
        pairs_checked: pairs,
        diameter_violations,
        lipschitz_violations,
    })
}
