//! Characteristic boundary states for the subsonic channel.
//!
//! Each boundary builds a ghost state from the interior trace and the
//! prescribed data; the ghost is then fed through the Roe flux, which imposes
//! the conditions weakly. The inlet fixes total pressure, total temperature,
//! and the flow direction while extrapolating the outgoing Riemann invariant;
//! the outlet fixes static pressure and extrapolates entropy, tangential
//! velocity, and the outgoing invariant; walls mirror the normal velocity.

use serde::{Deserialize, Serialize};

use crate::mesh::BoundaryTag;
use crate::scalar::Scalar;
use crate::state::{from_primitive, pressure, FreeStream, GAMMA};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowBoundaryConditions {
    pub total_pressure: f64,
    pub total_temperature: f64,
    /// Unit flow direction imposed at the inlet.
    pub inlet_direction: [f64; 2],
    pub inlet_mach: f64,
    /// Outlet static pressure over the free-stream pressure.
    pub pressure_ratio: f64,
}

impl FlowBoundaryConditions {
    pub fn channel(free: &FreeStream, pressure_ratio: f64) -> Self {
        Self {
            total_pressure: free.total_pressure(),
            total_temperature: free.total_temperature(),
            inlet_direction: [1.0, 0.0],
            inlet_mach: free.mach,
            pressure_ratio,
        }
    }

    pub fn back_pressure(&self) -> f64 {
        self.pressure_ratio / GAMMA
    }

    /// Ghost state for the given boundary, interior trace `u`, outward unit
    /// normal `n`.
    pub fn ghost_state<S: Scalar>(&self, tag: BoundaryTag, u: &[S; 4], n: &[S; 2]) -> [S; 4] {
        match tag {
            BoundaryTag::WallBottom | BoundaryTag::WallTop => mirror_wall(u, n),
            BoundaryTag::Inlet => self.inlet_ghost(u, n),
            BoundaryTag::Outlet => self.outlet_ghost(u, n),
        }
    }

    fn inlet_ghost<S: Scalar>(&self, u: &[S; 4], n: &[S; 2]) -> [S; 4] {
        let gm1 = GAMMA - 1.0;
        let rho = u[0];
        let v = [u[1] / rho, u[2] / rho];
        let p = pressure(u);
        let c = (p.scale(GAMMA) / rho).sqrt();
        let vn = v[0] * n[0] + v[1] * n[1];
        // outgoing invariant travels at v_n + c > 0 through the outward normal
        let r_out = vn + c.scale(2.0 / gm1);

        // c0^2 = gamma * T0 with the gas constant normalized to one
        let c0_sq = GAMMA * self.total_temperature;
        let cos_theta = self.inlet_direction[0] * n[0].value() + self.inlet_direction[1] * n[1].value();
        let cos2 = cos_theta * cos_theta;

        // |v_b| cos(theta) + 2 c_b/(gamma-1) = R_out with c0^2 = c_b^2 +
        // (gamma-1)/2 |v_b|^2 gives a quadratic in c_b; keep the larger root.
        let a = 1.0 + 2.0 / (gm1 * cos2);
        let b = r_out.scale(-2.0 / cos2);
        let cc = r_out * r_out.scale(gm1 / (2.0 * cos2)) - S::constant(c0_sq);
        let disc = (b * b - cc.scale(4.0 * a)).abs().sqrt();
        let c_b = (disc - b).scale(1.0 / (2.0 * a));

        let speed = (r_out - c_b.scale(2.0 / gm1)).scale(1.0 / cos_theta);
        let mach_sq = (speed * speed) / (c_b * c_b);
        let ratio = S::one() + mach_sq.scale(0.5 * gm1);
        let t_b = S::constant(self.total_temperature) / ratio;
        let p_b = S::constant(self.total_pressure) * (t_b.scale(1.0 / self.total_temperature)).powf(GAMMA / gm1);
        let rho_b = p_b / t_b;
        let v_b = [
            speed.scale(self.inlet_direction[0]),
            speed.scale(self.inlet_direction[1]),
        ];
        from_primitive(rho_b, v_b[0], v_b[1], p_b)
    }

    fn outlet_ghost<S: Scalar>(&self, u: &[S; 4], n: &[S; 2]) -> [S; 4] {
        let gm1 = GAMMA - 1.0;
        let rho = u[0];
        let v = [u[1] / rho, u[2] / rho];
        let p = pressure(u);
        let c = (p.scale(GAMMA) / rho).sqrt();
        let vn = v[0] * n[0] + v[1] * n[1];
        let p_b = S::constant(self.back_pressure());

        // isentropic density correction, invariant-corrected normal velocity
        let rho_b = rho * (p_b / p).powf(1.0 / GAMMA);
        let c_b = (p_b.scale(GAMMA) / rho_b).sqrt();
        let vn_b = vn + (c - c_b).scale(2.0 / gm1);
        let vt = [v[0] - n[0] * vn, v[1] - n[1] * vn];
        let v_b = [vt[0] + n[0] * vn_b, vt[1] + n[1] * vn_b];
        from_primitive(rho_b, v_b[0], v_b[1], p_b)
    }
}

fn mirror_wall<S: Scalar>(u: &[S; 4], n: &[S; 2]) -> [S; 4] {
    let vn = (u[1] * n[0] + u[2] * n[1]) / u[0];
    [
        u[0],
        u[1] - (u[0] * vn * n[0]).scale(2.0),
        u[2] - (u[0] * vn * n[1]).scale(2.0),
        u[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::is_physical;

    #[test]
    fn free_stream_is_a_fixed_point_of_both_io_boundaries() {
        let fs = FreeStream::new(0.3);
        let bc = FlowBoundaryConditions::channel(&fs, 1.0);
        let u = fs.state();
        let inlet = bc.ghost_state(BoundaryTag::Inlet, &u, &[-1.0, 0.0]);
        let outlet = bc.ghost_state(BoundaryTag::Outlet, &u, &[1.0, 0.0]);
        for i in 0..4 {
            assert!((inlet[i] - u[i]).abs() < 1e-12, "inlet comp {i}: {} vs {}", inlet[i], u[i]);
            assert!((outlet[i] - u[i]).abs() < 1e-12, "outlet comp {i}");
        }
    }

    #[test]
    fn wall_mirror_cancels_normal_velocity() {
        let u = from_primitive(1.0, 0.2, 0.1, 0.7);
        let n = [0.0, -1.0];
        let g = mirror_wall(&u, &n);
        // average normal velocity vanishes
        let vn_u = u[2] / u[0];
        let vn_g = g[2] / g[0];
        assert!((vn_u + vn_g).abs() < 1e-15);
        assert!(is_physical(&g));
        assert_eq!(g[0], u[0]);
        assert_eq!(g[3], u[3]);
    }

    #[test]
    fn outlet_imposes_back_pressure() {
        let fs = FreeStream::new(0.3);
        let bc = FlowBoundaryConditions::channel(&fs, 0.9);
        let u = from_primitive(1.05, 0.35, 0.01, 0.74);
        let g = bc.ghost_state(BoundaryTag::Outlet, &u, &[1.0, 0.0]);
        assert!((pressure(&g) - bc.back_pressure()).abs() < 1e-13);
    }

    #[test]
    fn inlet_recovers_total_conditions() {
        let fs = FreeStream::new(0.3);
        let bc = FlowBoundaryConditions::channel(&fs, 1.0);
        // perturbed interior state
        let u = from_primitive(1.02, 0.28, 0.0, 0.73);
        let g = bc.ghost_state(BoundaryTag::Inlet, &u, &[-1.0, 0.0]);
        assert!(is_physical(&g));
        let p = pressure(&g);
        let t = p / g[0];
        let v2 = (g[1] * g[1] + g[2] * g[2]) / (g[0] * g[0]);
        let m2 = v2 / (GAMMA * t);
        let t0 = t * (1.0 + 0.5 * (GAMMA - 1.0) * m2);
        let p0 = p * (t0 / t).powf(GAMMA / (GAMMA - 1.0));
        assert!((t0 - bc.total_temperature).abs() < 1e-12);
        assert!((p0 - bc.total_pressure).abs() < 1e-12);
    }
}
