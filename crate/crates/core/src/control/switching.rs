use serde::{Deserialize, Serialize};

use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchKind {
    /// Discontinuous `sign(x)`, with `sign(0) = 0`.
    #[default]
    Sign,
    /// `clamp(x/ε, −1, 1)`.
    Saturation,
    /// `tanh(x/ε)`.
    Tanh,
}

/// Argument of the reaching law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachingArg {
    /// `Γ·switch(e)`, as in the published control laws.
    #[default]
    Error,
    /// `Γ·switch(σ)`, the textbook form.
    Sigma,
}

/// Switching-function configuration shared by all three controllers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchConfig {
    pub kind: SwitchKind,
    /// Boundary-layer half-width ε. Used by the smooth kinds, and by the
    /// Lyapunov monitor as the radius inside which chattering is expected.
    pub boundary: f64,
    pub reaching: ReachingArg,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            kind: SwitchKind::Sign,
            boundary: 0.05,
            reaching: ReachingArg::Error,
        }
    }
}

impl SwitchConfig {
    pub fn is_valid(&self) -> bool {
        match self.kind {
            SwitchKind::Sign => self.boundary.is_finite() && self.boundary >= 0.0,
            _ => self.boundary.is_finite() && self.boundary > 0.0,
        }
    }
}

/// Sign with `sign(0) = 0` (and `sign(NaN) = 0`).
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Componentwise switching function, output in `[−1, 1]²`.
pub fn switch(x: &Vec2, cfg: &SwitchConfig) -> Vec2 {
    x.map(|v| match cfg.kind {
        SwitchKind::Sign => sign(v),
        SwitchKind::Saturation => (v / cfg.boundary).clamp(-1.0, 1.0),
        SwitchKind::Tanh => (v / cfg.boundary).tanh(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(kind: SwitchKind, boundary: f64) -> SwitchConfig {
        SwitchConfig {
            kind,
            boundary,
            ..Default::default()
        }
    }

    #[test]
    fn sign_examples() {
        let c = cfg(SwitchKind::Sign, 0.1);
        assert_eq!(switch(&Vec2::zeros(), &c), Vec2::zeros());
        assert_eq!(switch(&Vec2::new(3.0, -0.2), &c), Vec2::new(1.0, -1.0));
    }

    #[test]
    fn saturation_example() {
        let c = cfg(SwitchKind::Saturation, 0.1);
        let out = switch(&Vec2::new(0.05, -0.2), &c);
        assert!((out[0] - 0.5).abs() < 1e-15);
        assert_eq!(out[1], -1.0);
    }

    #[test]
    fn boundary_validation() {
        assert!(cfg(SwitchKind::Sign, 0.0).is_valid());
        assert!(!cfg(SwitchKind::Tanh, 0.0).is_valid());
        assert!(!cfg(SwitchKind::Saturation, -1.0).is_valid());
    }

    proptest! {
        #[test]
        fn switch_is_odd_and_bounded(
            a in -1e3f64..1e3,
            b in -1e3f64..1e3,
            eps in 1e-4f64..10.0,
            k in 0usize..3,
        ) {
            let kind = [SwitchKind::Sign, SwitchKind::Saturation, SwitchKind::Tanh][k];
            let c = cfg(kind, eps);
            let x = Vec2::new(a, b);
            let pos = switch(&x, &c);
            let neg = switch(&-x, &c);
            prop_assert_eq!(pos, -neg);
            prop_assert!(pos.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}
