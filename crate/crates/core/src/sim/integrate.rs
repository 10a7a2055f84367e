use nalgebra::SVector;

use crate::{Error, Result};

/// One classical fourth-order Runge–Kutta step of `ẏ = f(t, y)`.
///
/// Fails with [`Error::NonFiniteState`] (carrying `t + dt`) if the result
/// contains NaN or infinity.
pub fn rk4_step<const N: usize, F>(mut f: F, y: &SVector<f64, N>, t: f64, dt: f64) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let half = 0.5 * dt;
    let k1 = f(t, y)?;
    let k2 = f(t + half, &(y + k1 * half))?;
    let k3 = f(t + half, &(y + k2 * half))?;
    let k4 = f(t + dt, &(y + k3 * dt))?;
    let next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(Error::NonFiniteState {
            t: t + dt,
            partial: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    type V2 = Vector2<f64>;

    #[test]
    fn zero_field_is_identity() {
        let y = V2::new(1.5, -2.0);
        let next = rk4_step(|_, _| Ok(V2::zeros()), &y, 0.0, 0.1).unwrap();
        assert_eq!(next, y);
    }

    #[test]
    fn constant_velocity_is_exact() {
        // state (q, q̇) with q̈ = 0
        let dt = 0.0123;
        let y = V2::new(0.0, 1.0);
        let next = rk4_step(|_, y: &V2| Ok(V2::new(y[1], 0.0)), &y, 0.0, dt).unwrap();
        assert!((next[0] - dt).abs() <= 4.0 * f64::EPSILON * dt);
        assert_eq!(next[1], 1.0);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let dt = 1e-3;
        let period = std::f64::consts::TAU;
        let steps = (period / dt).round() as usize;
        let mut y = V2::new(1.0, 0.0);
        let mut t = 0.0;
        for _ in 0..steps {
            y = rk4_step(|_, y: &V2| Ok(V2::new(y[1], -y[0])), &y, t, dt).unwrap();
            t += dt;
        }
        // finish exactly on 2π
        let rest = period - t;
        y = rk4_step(|_, y: &V2| Ok(V2::new(y[1], -y[0])), &y, t, rest).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8, "q(2π) = {}", y[0]);
    }

    #[test]
    fn divergence_is_reported() {
        let y = V2::new(1.0, 0.0);
        let err = rk4_step(|_, _| Ok(V2::new(f64::INFINITY, 0.0)), &y, 2.0, 0.5).unwrap_err();
        match err {
            Error::NonFiniteState { t, .. } => assert_eq!(t, 2.5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
