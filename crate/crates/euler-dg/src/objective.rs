//! Inverse-design objective: boundary integral of the squared conservative
//! mismatch against a stored wall trace, with exact derivatives.
//!
//! The target trace is stored per boundary face as the state polynomial in the
//! wall x-coordinate, so it stays well defined when the surface deforms; under
//! y-only shape control the x-coordinates of quadrature points are preserved
//! and the comparison is at fixed x.

use serde::{Deserialize, Serialize};
use sparse_linalg::{CsrBuilder, SparseMatrixCsr};

use crate::basis::FACE_REF_NORMAL;
use crate::mesh::{DgDiscretization, N_FIELDS};
use crate::scalar::{Dual, Dual1, Dual2, Scalar};
use crate::EulerError;

/// Trace of a converged flow along the bottom wall, one entry per wall face.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WallTarget {
    faces: Vec<TargetFace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TargetFace {
    x_lo: f64,
    x_hi: f64,
    /// x positions of the face quadrature nodes
    x_nodes: Vec<f64>,
    /// conservative state at each node
    values: Vec<[f64; 4]>,
}

impl WallTarget {
    /// Record the bottom-wall trace of a state on its own mesh.
    pub fn from_solution(disc: &DgDiscretization, u: &[f64], x: &[f64]) -> Self {
        let t = &disc.tables;
        let mut faces = Vec::new();
        let mut u_loc = Vec::new();
        let mut x_loc = Vec::new();
        for f in disc.bottom_wall_faces() {
            disc.gather_state(f.cell, u, &mut u_loc);
            disc.gather_coords(f.cell, x, &mut x_loc);
            let mut x_nodes = Vec::with_capacity(t.nq);
            let mut values = Vec::with_capacity(t.nq);
            for q in 0..t.nq {
                let mut xq = 0.0;
                for (a, &psi) in t.face_psi[f.face][q].iter().enumerate() {
                    xq += psi * x_loc[2 * a];
                }
                let mut uq = [0.0f64; 4];
                for (i, &phi) in t.face_phi[f.face][q].iter().enumerate() {
                    for c in 0..N_FIELDS {
                        uq[c] += phi * u_loc[i * N_FIELDS + c];
                    }
                }
                x_nodes.push(xq);
                values.push(uq);
            }
            // face cover in x comes from the wall endpoint geometry nodes so
            // adjacent faces tile the wall without gaps
            let degree = disc.degree;
            let x_end_a = x_loc[0];
            let x_end_b = x_loc[2 * degree];
            faces.push(TargetFace {
                x_lo: x_end_a.min(x_end_b),
                x_hi: x_end_a.max(x_end_b),
                x_nodes,
                values,
            });
        }
        faces.sort_by(|a, b| a.x_lo.total_cmp(&b.x_lo));
        Self { faces }
    }

    /// Lagrange-interpolate the trace at wall coordinate `x` (differentiable
    /// through the coordinate).
    fn eval<S: Scalar>(&self, x: S) -> Result<[S; 4], EulerError> {
        let xv = x.value();
        let pad = 1e-9;
        let face = self
            .faces
            .iter()
            .find(|f| xv >= f.x_lo - pad && xv <= f.x_hi + pad)
            .ok_or(EulerError::TargetOutOfRange { x: xv })?;
        let n = face.x_nodes.len();
        let mut out = [S::zero(); 4];
        for k in 0..n {
            let mut w = S::one();
            for j in 0..n {
                if j != k {
                    w = w * (x - S::constant(face.x_nodes[j]))
                        .scale(1.0 / (face.x_nodes[k] - face.x_nodes[j]));
                }
            }
            for c in 0..N_FIELDS {
                out[c] += w.scale(face.values[k][c]);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wall target serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Objective value with exact gradients and Hessian blocks.
#[derive(Debug, Clone)]
pub struct ObjectiveDerivatives {
    pub value: f64,
    /// dI/du, one entry per state unknown
    pub grad_state: Vec<f64>,
    /// dI/dx, one entry per coordinate unknown
    pub grad_geometry: Vec<f64>,
    pub hess_uu: SparseMatrixCsr,
    pub hess_ux: SparseMatrixCsr,
    pub hess_xx: SparseMatrixCsr,
}

/// Squared conservative-state mismatch integrated over the bottom wall.
pub struct InverseDesignObjective<'a> {
    pub disc: &'a DgDiscretization,
    pub target: &'a WallTarget,
}

impl<'a> InverseDesignObjective<'a> {
    pub fn new(disc: &'a DgDiscretization, target: &'a WallTarget) -> Self {
        Self { disc, target }
    }

    fn face_contribution<S: Scalar>(
        &self,
        face: usize,
        u_loc: &[S],
        x_loc: &[S],
    ) -> Result<S, EulerError> {
        let t = &self.disc.tables;
        let mut acc = S::zero();
        for q in 0..t.nq {
            // owner metric at the face point
            let mut j = [[S::zero(); 2]; 2];
            for (a, g) in t.face_dpsi[face][q].iter().enumerate() {
                j[0][0] += x_loc[2 * a].scale(g[0]);
                j[0][1] += x_loc[2 * a].scale(g[1]);
                j[1][0] += x_loc[2 * a + 1].scale(g[0]);
                j[1][1] += x_loc[2 * a + 1].scale(g[1]);
            }
            let adj = [[j[1][1], -j[0][1]], [-j[1][0], j[0][0]]];
            let nu = FACE_REF_NORMAL[face];
            let nds = [
                adj[0][0].scale(nu[0]) + adj[1][0].scale(nu[1]),
                adj[0][1].scale(nu[0]) + adj[1][1].scale(nu[1]),
            ];
            let ds = (nds[0] * nds[0] + nds[1] * nds[1]).sqrt();

            let mut xq = S::zero();
            for (a, &psi) in t.face_psi[face][q].iter().enumerate() {
                xq += x_loc[2 * a].scale(psi);
            }
            let mut uq = [S::zero(); 4];
            for (i, &phi) in t.face_phi[face][q].iter().enumerate() {
                for c in 0..N_FIELDS {
                    uq[c] += u_loc[i * N_FIELDS + c].scale(phi);
                }
            }
            let target = self.target.eval(xq)?;
            let mut mismatch = S::zero();
            for c in 0..N_FIELDS {
                let d = uq[c] - target[c];
                mismatch += d * d;
            }
            acc += (mismatch * ds).scale(t.face_weights[q]);
        }
        Ok(acc)
    }

    pub fn value(&self, u: &[f64], x: &[f64]) -> Result<f64, EulerError> {
        let mut total = 0.0;
        let mut u_loc = Vec::new();
        let mut x_loc = Vec::new();
        for f in self.disc.bottom_wall_faces() {
            self.disc.gather_state(f.cell, u, &mut u_loc);
            self.disc.gather_coords(f.cell, x, &mut x_loc);
            total += self.face_contribution(f.face, &u_loc, &x_loc)?;
        }
        Ok(total)
    }

    /// Value, gradients, and Hessian blocks in one pass.
    pub fn derivatives(&self, u: &[f64], x: &[f64]) -> Result<ObjectiveDerivatives, EulerError> {
        let disc = self.disc;
        let t = &disc.tables;
        let k = t.n_sol * N_FIELDS;
        let kx = 2 * t.n_geo;
        let mut grad_state = vec![0.0; disc.n_state()];
        let mut grad_geometry = vec![0.0; disc.n_coords()];
        let mut b_uu = CsrBuilder::new(disc.n_state(), disc.n_state());
        let mut b_ux = CsrBuilder::new(disc.n_state(), disc.n_coords());
        let mut b_xx = CsrBuilder::new(disc.n_coords(), disc.n_coords());
        let mut value = 0.0;

        let mut u_f64 = Vec::new();
        let mut x_f64 = Vec::new();
        for f in disc.bottom_wall_faces() {
            disc.gather_state(f.cell, u, &mut u_f64);
            disc.gather_coords(f.cell, x, &mut x_f64);
            value += self.face_contribution::<f64>(f.face, &u_f64, &x_f64)?;

            let coord_index = |a: usize| {
                let node = disc.nodes_of(f.cell)[a / 2];
                2 * node + (a % 2)
            };
            let state_index = |a: usize| f.cell * k + a;

            // first derivatives
            let mut ud: Vec<Dual1> = u_f64.iter().map(|&v| Dual1::lift(v)).collect();
            let mut xd: Vec<Dual1> = x_f64.iter().map(|&v| Dual1::lift(v)).collect();
            for a in 0..k {
                ud[a].der = 1.0;
                let g = self.face_contribution(f.face, &ud, &xd)?;
                ud[a].der = 0.0;
                grad_state[state_index(a)] += g.der;
            }
            for a in 0..kx {
                xd[a].der = 1.0;
                let g = self.face_contribution(f.face, &ud, &xd)?;
                xd[a].der = 0.0;
                grad_geometry[coord_index(a)] += g.der;
            }

            // second derivatives
            let mut ud2: Vec<Dual2> = u_f64.iter().map(|&v| Dual2::constant(v)).collect();
            let mut xd2: Vec<Dual2> = x_f64.iter().map(|&v| Dual2::constant(v)).collect();
            for a in 0..k {
                ud2[a].der.val = 1.0;
                for bcol in a..k {
                    ud2[bcol].val.der = 1.0;
                    let g = self.face_contribution(f.face, &ud2, &xd2)?;
                    ud2[bcol].val.der = 0.0;
                    let h = g.second();
                    if h != 0.0 {
                        b_uu.push(state_index(a), state_index(bcol), h);
                        if bcol != a {
                            b_uu.push(state_index(bcol), state_index(a), h);
                        }
                    }
                }
                for bcol in 0..kx {
                    xd2[bcol].val.der = 1.0;
                    let g = self.face_contribution(f.face, &ud2, &xd2)?;
                    xd2[bcol].val.der = 0.0;
                    let h = g.second();
                    if h != 0.0 {
                        b_ux.push(state_index(a), coord_index(bcol), h);
                    }
                }
                ud2[a].der.val = 0.0;
            }
            for a in 0..kx {
                xd2[a].der.val = 1.0;
                for bcol in a..kx {
                    xd2[bcol].val.der = 1.0;
                    let g = self.face_contribution(f.face, &ud2, &xd2)?;
                    xd2[bcol].val.der = 0.0;
                    let h = g.second();
                    if h != 0.0 {
                        b_xx.push(coord_index(a), coord_index(bcol), h);
                        if bcol != a {
                            b_xx.push(coord_index(bcol), coord_index(a), h);
                        }
                    }
                }
                xd2[a].der.val = 0.0;
            }
        }

        Ok(ObjectiveDerivatives {
            value,
            grad_state,
            grad_geometry,
            hess_uu: b_uu.build(),
            hess_ux: b_ux.build(),
            hess_xx: b_xx.build(),
        })
    }
}

impl<'a> InverseDesignObjective<'a> {
    /// Objective evaluated with a single dual direction `(du, dx)`; used by
    /// finite-difference cross-checks.
    pub fn directional(
        &self,
        u: &[f64],
        x: &[f64],
        du: &[f64],
        dx: &[f64],
    ) -> Result<Dual<f64>, EulerError> {
        let disc = self.disc;
        let k = disc.tables.n_sol * N_FIELDS;
        let mut total = Dual1::lift(0.0);
        let mut u_f64 = Vec::new();
        let mut x_f64 = Vec::new();
        for f in disc.bottom_wall_faces() {
            disc.gather_state(f.cell, u, &mut u_f64);
            disc.gather_coords(f.cell, x, &mut x_f64);
            let ud: Vec<Dual1> = u_f64
                .iter()
                .enumerate()
                .map(|(a, &v)| Dual1::new(v, du[f.cell * k + a]))
                .collect();
            let xd: Vec<Dual1> = disc
                .nodes_of(f.cell)
                .iter()
                .flat_map(|&node| {
                    [
                        Dual1::new(x[2 * node], dx[2 * node]),
                        Dual1::new(x[2 * node + 1], dx[2 * node + 1]),
                    ]
                })
                .collect();
            total += self.face_contribution(f.face, &ud, &xd)?;
        }
        Ok(total)
    }
}
