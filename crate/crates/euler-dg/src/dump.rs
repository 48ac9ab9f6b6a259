//! Mesh and solution dumps for external plotting.
//!
//! Mesh: JSON with node coordinates and per-cell node ids. Solution: CSV with
//! one row per solution node, columns
//! `cell,node,x,y,rho,rho_v1,rho_v2,rho_E,pressure`.

use serde::Serialize;

use crate::mesh::DgDiscretization;
use crate::state::pressure;

#[derive(Serialize)]
struct MeshDump<'a> {
    schema: &'static str,
    degree: usize,
    nx: usize,
    ny: usize,
    nodes: Vec<[f64; 2]>,
    cells: Vec<&'a [usize]>,
}

pub fn mesh_to_json(disc: &DgDiscretization, x: &[f64]) -> String {
    let nodes: Vec<[f64; 2]> = (0..disc.n_nodes)
        .map(|n| [x[2 * n], x[2 * n + 1]])
        .collect();
    let cells: Vec<&[usize]> = (0..disc.n_cells).map(|c| disc.nodes_of(c)).collect();
    let dump = MeshDump {
        schema: "dg-mesh-v1",
        degree: disc.degree,
        nx: disc.nx,
        ny: disc.ny,
        nodes,
        cells,
    };
    serde_json::to_string_pretty(&dump).expect("mesh serializes")
}

pub fn solution_to_csv(disc: &DgDiscretization, u: &[f64], x: &[f64]) -> String {
    let t = &disc.tables;
    let mut out = String::from("cell,node,x,y,rho,rho_v1,rho_v2,rho_E,pressure\n");
    let mut x_loc = Vec::new();
    for cell in 0..disc.n_cells {
        disc.gather_coords(cell, x, &mut x_loc);
        for q in 0..t.n_sol {
            // solution node position via the geometry basis at the collocated
            // quadrature point
            let mut pos = [0.0f64; 2];
            for (a, &psi) in vol_psi_values(disc, q).iter().enumerate() {
                pos[0] += psi * x_loc[2 * a];
                pos[1] += psi * x_loc[2 * a + 1];
            }
            let base = disc.state_dof(cell, q, 0);
            let uq = [u[base], u[base + 1], u[base + 2], u[base + 3]];
            let p = pressure(&uq);
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                cell, q, pos[0], pos[1], uq[0], uq[1], uq[2], uq[3], p
            ));
        }
    }
    out
}

fn vol_psi_values(disc: &DgDiscretization, q: usize) -> Vec<f64> {
    // geometry basis values at the q-th volume point (not stored in the
    // tables; rebuilt on demand for dumps only)
    let t = &disc.tables;
    let geo = crate::basis::Lagrange1d::new(t.geo_nodes_1d.clone());
    let nq = t.nq;
    let (qx, qy) = (q % nq, q / nq);
    let (xi, eta) = (t.sol_nodes_1d[qx], t.sol_nodes_1d[qy]);
    let ng = geo.len();
    let mut vals = Vec::with_capacity(ng * ng);
    for ay in 0..ng {
        for ax in 0..ng {
            vals.push(geo.eval(ax, xi) * geo.eval(ay, eta));
        }
    }
    vals
}
