//! Roe approximate Riemann flux with a Harten-type entropy fix.

use crate::scalar::Scalar;
use crate::state::{normal_flux, pressure, GAMMA};

/// Fraction of `|v_n| + c` used as the entropy-fix smoothing width.
pub const ENTROPY_FIX_FRACTION: f64 = 0.1;

/// Roe flux across a unit normal `n`, entropy fix enabled.
pub fn roe_flux<S: Scalar>(ul: &[S; 4], ur: &[S; 4], n: &[S; 2]) -> [S; 4] {
    roe_flux_impl(ul, ur, n, true)
}

/// Entropy-fix toggle exposed for verifying that the fix changes the flux
/// across a sonic rarefaction.
pub fn roe_flux_with_fix<S: Scalar>(ul: &[S; 4], ur: &[S; 4], n: &[S; 2], fix: bool) -> [S; 4] {
    roe_flux_impl(ul, ur, n, fix)
}

fn roe_flux_impl<S: Scalar>(ul: &[S; 4], ur: &[S; 4], n: &[S; 2], fix: bool) -> [S; 4] {
    let half = 0.5;

    let rho_l = ul[0];
    let rho_r = ur[0];
    debug_assert!(rho_l.value() > 0.0 && rho_r.value() > 0.0, "Roe average needs positive density");
    let v_l = [ul[1] / rho_l, ul[2] / rho_l];
    let v_r = [ur[1] / rho_r, ur[2] / rho_r];
    let p_l = pressure(ul);
    let p_r = pressure(ur);
    let h_l = (ul[3] + p_l) / rho_l;
    let h_r = (ur[3] + p_r) / rho_r;

    // Roe averages
    let sq_l = rho_l.sqrt();
    let sq_r = rho_r.sqrt();
    let wsum = sq_l + sq_r;
    let v = [
        (sq_l * v_l[0] + sq_r * v_r[0]) / wsum,
        (sq_l * v_l[1] + sq_r * v_r[1]) / wsum,
    ];
    let h = (sq_l * h_l + sq_r * h_r) / wsum;
    let q2 = v[0] * v[0] + v[1] * v[1];
    let c2 = (h - q2.scale(0.5)).scale(GAMMA - 1.0);
    let c = c2.sqrt();
    let rho = sq_l * sq_r;
    let vn = v[0] * n[0] + v[1] * n[1];
    let t = [-n[1], n[0]];
    let vt = v[0] * t[0] + v[1] * t[1];

    // jumps
    let d_rho = rho_r - rho_l;
    let d_p = p_r - p_l;
    let d_vn = (v_r[0] - v_l[0]) * n[0] + (v_r[1] - v_l[1]) * n[1];
    let d_vt = (v_r[0] - v_l[0]) * t[0] + (v_r[1] - v_l[1]) * t[1];

    // wave strengths
    let inv_2c2 = S::one() / c2.scale(2.0);
    let a1 = (d_p - rho * c * d_vn) * inv_2c2;
    let a2 = d_rho - d_p / c2;
    let a3 = rho * d_vt;
    let a4 = (d_p + rho * c * d_vn) * inv_2c2;

    // eigenvalues with entropy fix
    let lam = [vn - c, vn, vn + c];
    let eps = (vn.abs() + c).scale(ENTROPY_FIX_FRACTION);
    let fixed_abs = |l: S| -> S {
        let a = l.abs();
        if fix && a.value() < eps.value() {
            (l * l + eps * eps) / eps.scale(2.0)
        } else {
            a
        }
    };
    let l1 = fixed_abs(lam[0]);
    let l2 = fixed_abs(lam[1]);
    let l4 = fixed_abs(lam[2]);

    // right eigenvectors (acoustic-, entropy, shear, acoustic+)
    let k1 = [
        S::one(),
        v[0] - c * n[0],
        v[1] - c * n[1],
        h - c * vn,
    ];
    let k2 = [S::one(), v[0], v[1], q2.scale(0.5)];
    let k3 = [S::zero(), t[0], t[1], vt];
    let k4 = [
        S::one(),
        v[0] + c * n[0],
        v[1] + c * n[1],
        h + c * vn,
    ];

    let fl = normal_flux(ul, n);
    let fr = normal_flux(ur, n);
    let mut out = [S::zero(); 4];
    for i in 0..4 {
        let dissipation = l1 * a1 * k1[i] + l2 * (a2 * k2[i] + a3 * k3[i]) + l4 * a4 * k4[i];
        out[i] = (fl[i] + fr[i]).scale(half) - dissipation.scale(half);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::from_primitive;

    fn unit(v: [f64; 2]) -> [f64; 2] {
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    }

    #[test]
    fn consistency_with_analytic_flux() {
        let u = from_primitive(1.1, 0.4, -0.2, 0.8);
        for n in [[1.0, 0.0], [0.0, 1.0], unit([1.0, 2.0]), unit([-0.3, 0.9])] {
            let f = roe_flux(&u, &u, &n);
            let exact = normal_flux(&u, &n);
            for i in 0..4 {
                assert!((f[i] - exact[i]).abs() < 1e-14, "component {i}");
            }
        }
    }

    #[test]
    fn conservation_under_swap_and_normal_flip() {
        let ul = from_primitive(1.0, 0.3, 0.05, 1.0 / GAMMA);
        let ur = from_primitive(0.9, 0.25, -0.02, 0.65);
        let n = unit([0.6, 0.8]);
        let f_ab = roe_flux(&ul, &ur, &n);
        let f_ba = roe_flux(&ur, &ul, &[-n[0], -n[1]]);
        for i in 0..4 {
            assert!((f_ab[i] + f_ba[i]).abs() < 1e-14, "component {i}");
        }
    }

    #[test]
    fn entropy_fix_changes_sonic_rarefaction() {
        // states straddling a sign change of v_n - c: lambda_1(L) < 0 < lambda_1(R)
        let ul = from_primitive(1.0, 0.9, 0.0, 1.0 / GAMMA);
        let ur = from_primitive(0.95, 1.05, 0.0, 0.6);
        let n = [1.0, 0.0];
        let with_fix = roe_flux_with_fix(&ul, &ur, &n, true);
        let without = roe_flux_with_fix(&ul, &ur, &n, false);
        let diff: f64 = (0..4).map(|i| (with_fix[i] - without[i]).abs()).sum();
        assert!(diff > 1e-6, "entropy fix had no effect: {diff:.3e}");
    }
}
