use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Diagonal 2×2 gain matrix, stored as its diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diag2(pub [f64; 2]);

impl Diag2 {
    pub const ZERO: Diag2 = Diag2([0.0, 0.0]);

    pub const fn splat(v: f64) -> Self {
        Diag2([v, v])
    }

    pub const fn new(a: f64, b: f64) -> Self {
        Diag2([a, b])
    }

    /// Matrix-vector product `diag(self) · v`.
    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(self.0[0] * v[0], self.0[1] * v[1])
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|g| g.is_finite() && *g > 0.0)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.0.iter().all(|g| g.is_finite() && *g >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0, 0.0]
    }
}

impl fmt::Display for Diag2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "diag{{{}, {}}}", self.0[0], self.0[1])
    }
}

/// Conventional SMC: surface `σ = ė + λe`, reaching gain `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcGains {
    pub lambda: Diag2,
    pub gamma: Diag2,
}

impl Default for SmcGains {
    fn default() -> Self {
        Self {
            lambda: Diag2::splat(50.0),
            gamma: Diag2::splat(10.0),
        }
    }
}

/// Integral SMC: surface `σ = ė + ∫(αe + βė)`, reaching gain `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NismcGains {
    pub alpha: Diag2,
    pub beta: Diag2,
    pub gamma: Diag2,
}

impl Default for NismcGains {
    /// α = 50, β = 800, Γ = 10. The published gain listing calls the 800
    /// entry "λ"; it is the only free integral gain, so it lands on β.
    fn default() -> Self {
        Self {
            alpha: Diag2::splat(50.0),
            beta: Diag2::splat(800.0),
            gamma: Diag2::splat(10.0),
        }
    }
}

/// Hybrid integral SMC: NISMC plus `u_H = −ξ₁ sign(e) − ξ₂ sign(ė)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridGains {
    pub base: NismcGains,
    pub xi1: Diag2,
    pub xi2: Diag2,
}

impl Default for HybridGains {
    fn default() -> Self {
        Self {
            base: NismcGains::default(),
            xi1: Diag2::splat(0.05),
            xi2: Diag2::splat(0.05),
        }
    }
}

/// A joint whose reaching gain does not dominate the hybrid correction.
#[derive(Debug, Clone, PartialEq)]
pub struct GainWarning {
    /// Zero-based joint index.
    pub joint: usize,
    pub gamma: f64,
    pub xi_sum: f64,
}

impl fmt::Display for GainWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "joint {}: reaching gain {} does not exceed xi1 + xi2 = {}; the Lyapunov derivative bound can turn positive",
            self.joint + 1,
            self.gamma,
            self.xi_sum
        )
    }
}

/// Flags every joint with `Γᵢᵢ ≤ ξ₁ᵢᵢ + ξ₂ᵢᵢ`. Non-fatal.
pub fn validate_gains(g: &HybridGains) -> Vec<GainWarning> {
    (0..2)
        .filter_map(|j| {
            let gamma = g.base.gamma.0[j];
            let xi_sum = g.xi1.0[j] + g.xi2.0[j];
            (gamma <= xi_sum).then_some(GainWarning { joint: j, gamma, xi_sum })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_defaults_pass() {
        assert!(validate_gains(&HybridGains::default()).is_empty());
    }

    #[test]
    fn weak_reaching_gain_is_flagged_per_joint() {
        let mut g = HybridGains::default();
        g.base.gamma = Diag2::new(0.05, 10.0);
        let w = validate_gains(&g);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].joint, 0);
        assert!(w[0].to_string().starts_with("joint 1"));
    }

    #[test]
    fn boundary_case_is_flagged() {
        let mut g = HybridGains::default();
        g.base.gamma = Diag2::splat(0.1);
        assert_eq!(validate_gains(&g).len(), 2);
    }

    #[test]
    fn zero_hybrid_never_warns() {
        for gamma in [1e-9, 0.3, 10.0, 1e6] {
            let g = HybridGains {
                base: NismcGains {
                    gamma: Diag2::splat(gamma),
                    ..Default::default()
                },
                xi1: Diag2::ZERO,
                xi2: Diag2::ZERO,
            };
            assert!(validate_gains(&g).is_empty());
        }
    }
}
