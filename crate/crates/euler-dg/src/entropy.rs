//! L2 entropy error: deviation from the isentropic free stream, the accuracy
//! metric for smooth subsonic flow.

use crate::mesh::{DgDiscretization, N_FIELDS};
use crate::state::{pressure, FreeStream, GAMMA};

/// `sqrt( int ( (p / p_inf) (rho_inf / rho)^gamma - 1 )^2 dOmega )`
pub fn entropy_error(disc: &DgDiscretization, u: &[f64], x: &[f64], free: &FreeStream) -> f64 {
    let t = &disc.tables;
    let p_inf = free.pressure();
    let rho_inf = free.density();
    let mut acc = 0.0;
    let mut x_loc = Vec::new();
    for cell in 0..disc.n_cells {
        disc.gather_coords(cell, x, &mut x_loc);
        let base = cell * t.n_sol * N_FIELDS;
        for q in 0..t.n_sol {
            let mut j = [[0.0f64; 2]; 2];
            for (a, g) in t.vol_dpsi[q].iter().enumerate() {
                j[0][0] += x_loc[2 * a] * g[0];
                j[0][1] += x_loc[2 * a] * g[1];
                j[1][0] += x_loc[2 * a + 1] * g[0];
                j[1][1] += x_loc[2 * a + 1] * g[1];
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let mut uq = [0.0f64; 4];
            for (i, &phi) in t.vol_phi[q].iter().enumerate() {
                for c in 0..N_FIELDS {
                    uq[c] += phi * u[base + i * N_FIELDS + c];
                }
            }
            let p = pressure(&uq);
            let dev = p / p_inf * (rho_inf / uq[0]).powf(GAMMA) - 1.0;
            acc += t.vol_weights[q] * det * dev * dev;
        }
    }
    acc.sqrt()
}
