use serde::Serialize;

/// Absolute slack allowed when checking `lhs ≤ rhs`.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Which inequality a certificate checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `C(f, x) ≤ 1 − |F(x)|/n!` for normalized `f`.
    Stabilizer,
    /// `C(f, x) ≥ β − α − |H|/n!·(1 − α)`.
    Spiky,
    /// `|T| ≤ (1 − α)n!/(η|F(x)|)`.
    ConverseT,
    /// `|C(f, x) − C(f, y)| ≤ 2L·d(x, y)`.
    Smoothness,
    /// Sampled `C_s ≤ 2Lt + inf C`.
    GlobalSmooth,
    /// `max |f_i − f_j| ≤ diam(G)·max_edge |f_i − f_j|`.
    PathDiameter,
    /// `max |f_i − f_j| ≤ (n − 1)·max_edge |f_i − f_j|` on the transposition graph.
    PathTransposition,
    /// `C(f) ≤ max |f_i − f_j|`.
    CostGap,
    FourierLower,
    FourierUpper,
    /// `(λ_max·N)^{-1/2}·√C_G ≤ C`.
    CgLower,
    CgLowerSymmetric,
    /// `C ≤ √(C_G/λ₂)`.
    CgUpper,
    /// `C ≤ (√(diam·N)/2)·√C_G`.
    CgMohar,
    /// `4/(diam·N) ≤ λ₂`.
    MoharLambda2,
    /// Lower C_G bound with `λ_max = n(n − 1)`.
    CgTranspositionLower,
    /// Upper C_G bound with the Mohar estimate and `diam = n − 1`.
    CgTranspositionUpper,
}

/// How a certificate's hypotheses were checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

/// Record of a single inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub bound_name: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub slack: f64,
    pub mode: CheckMode,
}

impl BoundCertificate {
    pub fn new(bound_name: BoundKind, lhs: f64, rhs: f64, mode: CheckMode) -> Self {
        Self {
            bound_name,
            lhs,
            rhs,
            satisfied: lhs <= rhs + BOUND_TOLERANCE,
            slack: rhs - lhs,
            mode,
        }
    }

    pub fn exhaustive(bound_name: BoundKind, lhs: f64, rhs: f64) -> Self {
        Self::new(bound_name, lhs, rhs, CheckMode::Exhaustive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_applies_to_satisfaction_only() {
        let c = BoundCertificate::exhaustive(BoundKind::Stabilizer, 1.0 + 1e-10, 1.0);
        assert!(c.satisfied);
        assert!(c.slack < 0.0);
        assert!(!BoundCertificate::exhaustive(BoundKind::Stabilizer, 1.0 + 1e-8, 1.0).satisfied);
    }

    #[test]
    fn serializes_snake_case() {
        let c = BoundCertificate::exhaustive(BoundKind::ConverseT, 0.0, 1.0);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"bound_name\":\"converse_t\""), "{json}");
        assert!(json.contains("\"mode\":\"exhaustive\""));
    }
}
