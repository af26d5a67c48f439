//! Graph signals over `S_n`, the graph Fourier transform, and the spectral bounds on the cost.

use serde::Serialize;

use super::{coherence, GraphKind, PermutationGraph, Spectrum};
use crate::certificate::{BoundCertificate, BoundKind};
use crate::cost::orbit_signal;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, factorial};
use crate::payoff::Payoff;
use crate::permgroup::{check_degree, enumerate_group};

/// `f_i = f(π_i(x))` indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSignal {
    n: usize,
    values: Vec<f64>,
}

impl GraphSignal {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_degree(n)?;
        if values.len() != factorial(n) {
            return Err(Error::LengthMismatch {
                expected: factorial(n),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite signal value at vertex {i}")));
        }
        Ok(Self { n, values })
    }

    pub fn from_payoff<A, P>(f: &P, x: &[A]) -> Result<Self>
    where
        A: Clone,
        P: Payoff<A> + ?Sized,
    {
        Self::new(x.len(), orbit_signal(f, x)?)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        check_degree(n)?;
        Self::new(n, vec![c; factorial(n)])
    }

    /// The standard basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        check_degree(n)?;
        let mut values = vec![0.0; factorial(n)];
        *values.get_mut(k).ok_or(Error::RankOutOfRange {
            rank: k,
            n,
            count: factorial(n),
        })? = 1.0;
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v + offset).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// `v_i = +1` for even `π_i`, `−1` for odd; an eigenvector of the transposition
/// Laplacian with eigenvalue `n(n − 1)`.
pub fn parity_eigenvector(n: usize) -> Result<GraphSignal> {
    if n < 2 {
        return Err(Error::InvalidParameter("the parity vector needs n >= 2".into()));
    }
    let values = enumerate_group(n)?.iter().map(|p| p.parity().sign()).collect();
    GraphSignal::new(n, values)
}

fn check_dims(signal_len: usize, spectrum: &Spectrum) -> Result<()> {
    if signal_len != spectrum.len() {
        return Err(Error::LengthMismatch {
            expected: spectrum.len(),
            got: signal_len,
        });
    }
    Ok(())
}

/// `f̂ = Uᵀf`.
pub fn fourier(signal: &GraphSignal, spectrum: &Spectrum) -> Result<Vec<f64>> {
    check_dims(signal.len(), spectrum)?;
    let f = signal.values();
    Ok((0..spectrum.len())
        .map(|i| compensated_sum(spectrum.eigenvector(i).iter().zip(f).map(|(u, v)| u * v)))
        .collect())
}

/// `f = U·f̂`.
pub fn inverse_fourier(coefficients: &[f64], spectrum: &Spectrum) -> Result<Vec<f64>> {
    check_dims(coefficients.len(), spectrum)?;
    let mut out = vec![0.0; spectrum.len()];
    for (i, &c) in coefficients.iter().enumerate() {
        for (o, u) in out.iter_mut().zip(spectrum.eigenvector(i)) {
            *o += c * u;
        }
    }
    Ok(out)
}

/// `C_G(f) = Σ_{edges} (f_i − f_j)²`.
pub fn smoothness_cg(signal: &GraphSignal, g: &PermutationGraph) -> Result<f64> {
    if signal.len() != g.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: g.vertex_count(),
            got: signal.len(),
        });
    }
    let f = signal.values();
    if g.kind() == GraphKind::Complete {
        // Σ_{i<j} (f_i − f_j)² = N·Σ (f_i − mean)².
        let mean = signal.mean();
        return Ok(f.len() as f64 * compensated_sum(f.iter().map(|v| (v - mean) * (v - mean))));
    }
    let mut terms = Vec::with_capacity(g.edge_count());
    g.for_each_edge(|i, j| terms.push((f[i] - f[j]) * (f[i] - f[j])));
    Ok(compensated_sum(terms))
}

/// `fᵀLf`, the quadratic-form route to `C_G`.
pub fn laplacian_quadratic_form(signal: &GraphSignal, g: &PermutationGraph) -> Result<f64> {
    let lf = g.laplacian_apply(signal.values())?;
    Ok(compensated_sum(lf.iter().zip(signal.values()).map(|(a, b)| a * b)))
}

/// Cost of MEV read off a signal, `C(f) = ‖f‖∞ − 1ᵀf/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalCost {
    pub cost: f64,
    /// Translation applied so that `max f ≥ −min f`; zero when none was needed.
    pub shift: f64,
}

fn standing_shift(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max >= -min {
        0.0
    } else {
        -min
    }
}

pub fn cost_from_signal(signal: &GraphSignal) -> SignalCost {
    let shift = standing_shift(signal.values());
    let shifted: Vec<f64> = signal.values().iter().map(|v| v + shift).collect();
    let inf_norm = shifted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cost = compensated_sum(shifted.iter().map(|v| inf_norm - v)) / shifted.len() as f64;
    SignalCost { cost, shift }
}

/// Fourier-domain lower and upper bounds on the cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierBounds {
    /// `(‖f̂‖₂ − f̂₁)/√N ≤ C`.
    pub lower: BoundCertificate,
    /// `C ≤ μ‖f̂‖₁ − f̂₁/√N`.
    pub upper: BoundCertificate,
    pub shift: f64,
    /// `max_{i≥2} |f̂_i|` for a perfectly fair signal (zero cost).
    pub fair_residual: Option<f64>,
}

pub fn fourier_bounds(signal: &GraphSignal, spectrum: &Spectrum) -> Result<FourierBounds> {
    let SignalCost { cost, shift } = cost_from_signal(signal);
    let shifted = signal.shifted(shift);
    let coeffs = fourier(&shifted, spectrum)?;
    let root_n = (coeffs.len() as f64).sqrt();
    let l2 = compensated_sum(coeffs.iter().map(|c| c * c)).sqrt();
    let l1 = compensated_sum(coeffs.iter().map(|c| c.abs()));
    let mu = coherence(spectrum).mu;
    let fair_residual = (cost == 0.0).then(|| coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs())));
    Ok(FourierBounds {
        lower: BoundCertificate::exhaustive(BoundKind::FourierLower, (l2 - coeffs[0]) / root_n, cost),
        upper: BoundCertificate::exhaustive(BoundKind::FourierUpper, cost, mu * l1 - coeffs[0] / root_n),
        shift,
        fair_residual,
    })
}

/// Certificates relating the cost to `C_G` and the Laplacian spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CgSandwich {
    pub cg: f64,
    pub cost: f64,
    /// `(λ_max·N)^{-1/2}·√C_G ≤ C(f)`.
    pub lower: BoundCertificate,
    /// `(λ_max·N)^{-1/2}·√C_G ≤ max(C(f), C(−f))`, which holds for every signal.
    pub lower_symmetric: BoundCertificate,
    /// `C ≤ √(C_G/λ₂)`.
    pub upper: BoundCertificate,
    /// `C ≤ (√(diam·N)/2)·√C_G`.
    pub mohar: BoundCertificate,
    /// `4/(diam·N) ≤ λ₂`.
    pub mohar_lambda2: BoundCertificate,
    /// The transposition-graph forms with `λ_max = n(n − 1)` and `diam = n − 1`.
    pub transposition: Option<[BoundCertificate; 2]>,
    /// Translation applied so that `1ᵀf ≥ 0` before the upper bound.
    pub upper_shift: f64,
}

pub fn cg_sandwich(signal: &GraphSignal, g: &PermutationGraph, spectrum: &Spectrum) -> Result<CgSandwich> {
    check_dims(signal.len(), spectrum)?;
    let size = signal.len() as f64;
    let cg = smoothness_cg(signal, g)?;
    let cost = cost_from_signal(signal).cost;
    let reflected = cost_from_signal(&signal.scaled(-1.0)).cost;
    let upper_shift = if signal.mean() < 0.0 { -signal.mean() } else { 0.0 };
    let upper_cost = cost_from_signal(&signal.shifted(upper_shift)).cost;

    let (lambda2, lambda_max) = (spectrum.lambda2(), spectrum.lambda_max());
    let diam = g.diameter() as f64;
    let root_cg = cg.sqrt();
    // A single vertex has no edges: every quantity is zero.
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };

    let lower_lhs = ratio(root_cg, (lambda_max * size).sqrt());
    let transposition = (g.kind() == GraphKind::Transposition && g.n() >= 2).then(|| {
        let n = g.n() as f64;
        [
            BoundCertificate::exhaustive(
                BoundKind::CgTranspositionLower,
                root_cg / (n * (n - 1.0) * size).sqrt(),
                cost,
            ),
            BoundCertificate::exhaustive(
                BoundKind::CgTranspositionUpper,
                upper_cost,
                ((n - 1.0) * size).sqrt() / 2.0 * root_cg,
            ),
        ]
    });
    Ok(CgSandwich {
        cg,
        cost,
        lower: BoundCertificate::exhaustive(BoundKind::CgLower, lower_lhs, cost),
        lower_symmetric: BoundCertificate::exhaustive(BoundKind::CgLowerSymmetric, lower_lhs, cost.max(reflected)),
        upper: BoundCertificate::exhaustive(BoundKind::CgUpper, upper_cost, ratio(cg, lambda2).sqrt()),
        mohar: BoundCertificate::exhaustive(BoundKind::CgMohar, upper_cost, (diam * size).sqrt() / 2.0 * root_cg),
        mohar_lambda2: BoundCertificate::exhaustive(BoundKind::MoharLambda2, ratio(4.0, diam * size), lambda2),
        transposition,
        upper_shift,
    })
}

/// Path-length bounds on the largest payoff gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathBound {
    pub max_gap: f64,
    pub max_edge_gap: f64,
    /// `max |f_i − f_j| ≤ diam(G)·max_edge |f_i − f_j|`.
    pub diameter: BoundCertificate,
    /// `max |f_i − f_j| ≤ (n − 1)·max_edge |f_i − f_j|`, transposition graphs only.
    pub transposition: Option<BoundCertificate>,
    /// `C(f) ≤ max |f_i − f_j|`.
    pub cost_gap: BoundCertificate,
}

pub fn path_bound(signal: &GraphSignal, g: &PermutationGraph) -> Result<PathBound> {
    if signal.len() != g.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: g.vertex_count(),
            got: signal.len(),
        });
    }
    let f = signal.values();
    let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = f.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gap = max - min;
    let max_edge_gap = if g.kind() == GraphKind::Complete {
        max_gap
    } else {
        let mut m = 0.0f64;
        g.for_each_edge(|i, j| m = m.max((f[i] - f[j]).abs()));
        m
    };
    let transposition = (g.kind() == GraphKind::Transposition).then(|| {
        BoundCertificate::exhaustive(
            BoundKind::PathTransposition,
            max_gap,
            (g.n() as f64 - 1.0) * max_edge_gap,
        )
    });
    Ok(PathBound {
        max_gap,
        max_edge_gap,
        diameter: BoundCertificate::exhaustive(BoundKind::PathDiameter, max_gap, g.diameter() as f64 * max_edge_gap),
        transposition,
        cost_gap: BoundCertificate::exhaustive(BoundKind::CostGap, cost_from_signal(signal).cost, max_gap),
    })
}
