//! Per-element weak-form kernels, generic over the AD scalar. Geometry enters
//! through the owner cell's node coordinates; the basis tables are constants.

use crate::basis::{CellTables, FACE_REF_NORMAL};
use crate::bc::FlowBoundaryConditions;
use crate::flux::roe_flux;
use crate::mesh::{BoundaryTag, N_FIELDS};
use crate::scalar::Scalar;
use crate::state::flux;

/// Metric pieces at one quadrature point: `adj = det(J) J^{-1}`.
#[inline]
fn metric_adj<S: Scalar>(dpsi: &[[f64; 2]], x_loc: &[S]) -> [[S; 2]; 2] {
    let mut j = [[S::zero(); 2]; 2];
    for (a, g) in dpsi.iter().enumerate() {
        let xa = x_loc[2 * a];
        let ya = x_loc[2 * a + 1];
        j[0][0] += xa.scale(g[0]);
        j[0][1] += xa.scale(g[1]);
        j[1][0] += ya.scale(g[0]);
        j[1][1] += ya.scale(g[1]);
    }
    // adj = det(J) * J^{-1}
    [[j[1][1], -j[0][1]], [-j[1][0], j[0][0]]]
}

#[inline]
fn interpolate_state<S: Scalar>(phi: &[f64], u_loc: &[S]) -> [S; 4] {
    let mut u = [S::zero(); 4];
    for (i, &p) in phi.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for c in 0..N_FIELDS {
            u[c] += u_loc[i * N_FIELDS + c].scale(p);
        }
    }
    u
}

/// Volume contribution: `out -= sum_q w_q grad_ref(phi) . (adj f)`.
pub fn volume_kernel<S: Scalar>(t: &CellTables, u_loc: &[S], x_loc: &[S], out: &mut [S]) {
    for q in 0..t.n_sol {
        let adj = metric_adj(&t.vol_dpsi[q], x_loc);
        let u_q = interpolate_state(&t.vol_phi[q], u_loc);
        let f = flux(&u_q);
        // contravariant flux g[c] = adj[c][r] f[r]
        let mut g = [[S::zero(); 4]; 2];
        for c in 0..2 {
            for comp in 0..N_FIELDS {
                g[c][comp] = adj[c][0] * f[0][comp] + adj[c][1] * f[1][comp];
            }
        }
        let w = t.vol_weights[q];
        for (i, dphi) in t.vol_dphi[q].iter().enumerate() {
            for comp in 0..N_FIELDS {
                out[i * N_FIELDS + comp] -=
                    (g[0][comp].scale(dphi[0]) + g[1][comp].scale(dphi[1])).scale(w);
            }
        }
    }
}

/// Face normal scaled by the surface element, from the owner metric.
#[inline]
fn face_normal<S: Scalar>(t: &CellTables, face: usize, q: usize, x_loc: &[S]) -> ([S; 2], S) {
    let adj = metric_adj(&t.face_dpsi[face][q], x_loc);
    let nu = FACE_REF_NORMAL[face];
    // n ds = adj^T nu
    let nds = [
        adj[0][0].scale(nu[0]) + adj[1][0].scale(nu[1]),
        adj[0][1].scale(nu[0]) + adj[1][1].scale(nu[1]),
    ];
    let ds = (nds[0] * nds[0] + nds[1] * nds[1]).sqrt();
    ([nds[0] / ds, nds[1] / ds], ds)
}

/// Interior-face contribution to both adjacent cells. Quadrature points of the
/// two reference faces coincide on the structured mesh.
pub fn interior_face_kernel<S: Scalar>(
    t: &CellTables,
    owner_face: usize,
    neighbor_face: usize,
    u_own: &[S],
    u_neigh: &[S],
    x_own: &[S],
    out_own: &mut [S],
    out_neigh: &mut [S],
) {
    for q in 0..t.nq {
        let (n, ds) = face_normal(t, owner_face, q, x_own);
        let ul = interpolate_state(&t.face_phi[owner_face][q], u_own);
        let ur = interpolate_state(&t.face_phi[neighbor_face][q], u_neigh);
        let f = roe_flux(&ul, &ur, &n);
        let w = t.face_weights[q];
        for comp in 0..N_FIELDS {
            let val = (f[comp] * ds).scale(w);
            for (i, &p) in t.face_phi[owner_face][q].iter().enumerate() {
                if p != 0.0 {
                    out_own[i * N_FIELDS + comp] += val.scale(p);
                }
            }
            for (i, &p) in t.face_phi[neighbor_face][q].iter().enumerate() {
                if p != 0.0 {
                    out_neigh[i * N_FIELDS + comp] -= val.scale(p);
                }
            }
        }
    }
}

/// Boundary-face contribution through the characteristic ghost state.
pub fn boundary_face_kernel<S: Scalar>(
    t: &CellTables,
    face: usize,
    tag: BoundaryTag,
    bc: &FlowBoundaryConditions,
    u_own: &[S],
    x_own: &[S],
    out_own: &mut [S],
) {
    for q in 0..t.nq {
        let (n, ds) = face_normal(t, face, q, x_own);
        let ul = interpolate_state(&t.face_phi[face][q], u_own);
        let ghost = bc.ghost_state(tag, &ul, &n);
        let f = roe_flux(&ul, &ghost, &n);
        let w = t.face_weights[q];
        for comp in 0..N_FIELDS {
            let val = (f[comp] * ds).scale(w);
            for (i, &p) in t.face_phi[face][q].iter().enumerate() {
                if p != 0.0 {
                    out_own[i * N_FIELDS + comp] += val.scale(p);
                }
            }
        }
    }
}
