//! Conservative-state helpers for the 2D compressible Euler equations,
//! generic over the AD scalar type.

use crate::scalar::Scalar;

pub const GAMMA: f64 = 1.4;

/// Pressure from the ideal-gas equation of state.
pub fn pressure<S: Scalar>(u: &[S; 4]) -> S {
    let kinetic = (u[1] * u[1] + u[2] * u[2]).scale(0.5) / u[0];
    (u[3] - kinetic).scale(GAMMA - 1.0)
}

/// Cartesian flux tensor `f[dir][comp]`.
pub fn flux<S: Scalar>(u: &[S; 4]) -> [[S; 4]; 2] {
    let p = pressure(u);
    let v1 = u[1] / u[0];
    let v2 = u[2] / u[0];
    let h_flux = u[3] + p;
    [
        [u[1], u[1] * v1 + p, u[2] * v1, h_flux * v1],
        [u[2], u[1] * v2, u[2] * v2 + p, h_flux * v2],
    ]
}

/// Normal flux `f_i n_i`.
pub fn normal_flux<S: Scalar>(u: &[S; 4], n: &[S; 2]) -> [S; 4] {
    let f = flux(u);
    [
        f[0][0] * n[0] + f[1][0] * n[1],
        f[0][1] * n[0] + f[1][1] * n[1],
        f[0][2] * n[0] + f[1][2] * n[1],
        f[0][3] * n[0] + f[1][3] * n[1],
    ]
}

/// Positive density and pressure.
pub fn is_physical(u: &[f64; 4]) -> bool {
    u[0] > 0.0 && pressure(u) > 0.0 && u.iter().all(|v| v.is_finite())
}

/// Build a conservative state from primitives `(rho, v1, v2, p)`.
pub fn from_primitive<S: Scalar>(rho: S, v1: S, v2: S, p: S) -> [S; 4] {
    let ke = (v1 * v1 + v2 * v2).scale(0.5);
    [
        rho,
        rho * v1,
        rho * v2,
        p.scale(1.0 / (GAMMA - 1.0)) + rho * ke,
    ]
}

/// Nondimensional free stream: unit density and sound speed, horizontal flow.
#[derive(Debug, Clone, Copy)]
pub struct FreeStream {
    pub mach: f64,
}

impl FreeStream {
    pub fn new(mach: f64) -> Self {
        Self { mach }
    }

    pub fn density(&self) -> f64 {
        1.0
    }

    pub fn pressure(&self) -> f64 {
        1.0 / GAMMA
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mach, 0.0]
    }

    /// Static temperature with the gas constant normalized to one, `T = p / rho`.
    pub fn temperature(&self) -> f64 {
        self.pressure() / self.density()
    }

    pub fn total_temperature(&self) -> f64 {
        self.temperature() * (1.0 + 0.5 * (GAMMA - 1.0) * self.mach * self.mach)
    }

    pub fn total_pressure(&self) -> f64 {
        self.pressure()
            * (1.0 + 0.5 * (GAMMA - 1.0) * self.mach * self.mach).powf(GAMMA / (GAMMA - 1.0))
    }

    pub fn state(&self) -> [f64; 4] {
        let v = self.velocity();
        from_primitive(self.density(), v[0], v[1], self.pressure())
    }

    /// Fill a global state vector with the free stream.
    pub fn fill_state(&self, n_state: usize) -> Vec<f64> {
        let s = self.state();
        let mut u = Vec::with_capacity(n_state);
        for _ in 0..n_state / 4 {
            u.extend_from_slice(&s);
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_stream_is_consistent() {
        let fs = FreeStream::new(0.3);
        let u = fs.state();
        assert!((pressure(&u) - fs.pressure()).abs() < 1e-15);
        let c2 = GAMMA * fs.pressure() / fs.density();
        assert!((c2 - 1.0).abs() < 1e-15);
        assert!(is_physical(&u));
    }

    #[test]
    fn flux_of_still_gas_is_pure_pressure() {
        let u = from_primitive(1.2, 0.0, 0.0, 0.9);
        let f = flux(&u);
        assert_eq!(f[0][0], 0.0);
        assert!((f[0][1] - 0.9).abs() < 1e-15);
        assert_eq!(f[1][1], 0.0);
        assert!((f[1][2] - 0.9).abs() < 1e-15);
    }
}
