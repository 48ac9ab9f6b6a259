//! Global residual assembly and its exact first/second derivatives.
//!
//! First derivatives seed one dual direction per local unknown; second
//! derivatives of the dual-weighted residual nest two dual directions. Every
//! scheme here is exact to round-off and is cross-checked against central
//! finite differences in the tests.

use sparse_linalg::{CsrBuilder, SparseMatrixCsr};

use crate::bc::FlowBoundaryConditions;
use crate::kernels::{boundary_face_kernel, interior_face_kernel, volume_kernel};
use crate::mesh::{DgDiscretization, N_FIELDS};
use crate::scalar::{Dual, Dual1, Dual2, Scalar};
use crate::state::is_physical;
use crate::EulerError;

/// Second-derivative blocks of the dual-weighted residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianBlock {
    /// lambda^T R_uu
    StateState,
    /// lambda^T R_ux
    StateGeometry,
    /// lambda^T R_xx
    GeometryGeometry,
}

/// Residual and derivative assembly over one discretization + boundary set.
pub struct EulerDgOps<'a> {
    pub disc: &'a DgDiscretization,
    pub bc: &'a FlowBoundaryConditions,
}

impl<'a> EulerDgOps<'a> {
    pub fn new(disc: &'a DgDiscretization, bc: &'a FlowBoundaryConditions) -> Self {
        Self { disc, bc }
    }

    /// Reject states with non-positive density or pressure, naming the cell
    /// and quadrature point.
    pub fn validate_state(&self, u: &[f64]) -> Result<(), EulerError> {
        let t = &self.disc.tables;
        for cell in 0..self.disc.n_cells {
            let base = cell * t.n_sol * N_FIELDS;
            for q in 0..t.n_sol {
                let mut uq = [0.0f64; 4];
                for (i, &p) in t.vol_phi[q].iter().enumerate() {
                    for c in 0..N_FIELDS {
                        uq[c] += p * u[base + i * N_FIELDS + c];
                    }
                }
                if !is_physical(&uq) {
                    return Err(EulerError::NonPhysicalState { cell, point: q });
                }
            }
        }
        Ok(())
    }

    /// Residual vector `R(u, x)`, one entry per state unknown.
    pub fn residual(&self, u: &[f64], x: &[f64]) -> Result<Vec<f64>, EulerError> {
        self.validate_state(u)?;
        let disc = self.disc;
        let t = &disc.tables;
        let mut out = vec![0.0; disc.n_state()];
        let mut u_loc = Vec::new();
        let mut x_loc = Vec::new();

        for cell in 0..disc.n_cells {
            disc.gather_state(cell, u, &mut u_loc);
            disc.gather_coords(cell, x, &mut x_loc);
            let base = cell * t.n_sol * N_FIELDS;
            volume_kernel(t, &u_loc, &x_loc, &mut out[base..base + t.n_sol * N_FIELDS]);
        }

        let mut u_neigh = Vec::new();
        let mut own_out = vec![0.0; t.n_sol * N_FIELDS];
        let mut neigh_out = vec![0.0; t.n_sol * N_FIELDS];
        for f in &disc.interior_faces {
            disc.gather_state(f.owner, u, &mut u_loc);
            disc.gather_state(f.neighbor, u, &mut u_neigh);
            disc.gather_coords(f.owner, x, &mut x_loc);
            own_out.fill(0.0);
            neigh_out.fill(0.0);
            interior_face_kernel(
                t,
                f.owner_face,
                f.neighbor_face,
                &u_loc,
                &u_neigh,
                &x_loc,
                &mut own_out,
                &mut neigh_out,
            );
            scatter_add(&mut out, f.owner, t.n_sol, &own_out);
            scatter_add(&mut out, f.neighbor, t.n_sol, &neigh_out);
        }

        for f in &disc.boundary_faces {
            disc.gather_state(f.cell, u, &mut u_loc);
            disc.gather_coords(f.cell, x, &mut x_loc);
            own_out.fill(0.0);
            boundary_face_kernel(t, f.face, f.tag, self.bc, &u_loc, &x_loc, &mut own_out);
            scatter_add(&mut out, f.cell, t.n_sol, &own_out);
        }

        Ok(out)
    }

    /// Diagonal DG mass matrix (solution nodes collocate with the volume
    /// quadrature), one entry per state unknown.
    pub fn mass_diagonal(&self, x: &[f64]) -> Vec<f64> {
        let disc = self.disc;
        let t = &disc.tables;
        let mut m = vec![0.0; disc.n_state()];
        let mut x_loc = Vec::new();
        for cell in 0..disc.n_cells {
            disc.gather_coords(cell, x, &mut x_loc);
            for q in 0..t.n_sol {
                let mut j = [[0.0f64; 2]; 2];
                for (a, g) in t.vol_dpsi[q].iter().enumerate() {
                    j[0][0] += x_loc[2 * a] * g[0];
                    j[0][1] += x_loc[2 * a] * g[1];
                    j[1][0] += x_loc[2 * a + 1] * g[0];
                    j[1][1] += x_loc[2 * a + 1] * g[1];
                }
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let w = t.vol_weights[q] * det;
                for c in 0..N_FIELDS {
                    m[disc.state_dof(cell, q, c)] = w;
                }
            }
        }
        m
    }

    /// Flow Jacobian `R_u` as CSR.
    pub fn jacobian_state(&self, u: &[f64], x: &[f64]) -> Result<SparseMatrixCsr, EulerError> {
        self.validate_state(u)?;
        let disc = self.disc;
        let t = &disc.tables;
        let n = disc.n_state();
        let k = t.n_sol * N_FIELDS;
        let mut b = CsrBuilder::new(n, n);

        let mut ud: Vec<Dual1> = Vec::new();
        let mut und: Vec<Dual1> = Vec::new();
        let mut xd: Vec<Dual1> = Vec::new();
        let mut out = vec![Dual1::lift(0.0); k];
        let mut out2 = vec![Dual1::lift(0.0); k];

        for cell in 0..disc.n_cells {
            gather_dual_state(disc, cell, u, &mut ud);
            gather_dual_coords(disc, cell, x, &mut xd);
            for a in 0..k {
                ud[a].der = 1.0;
                out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                volume_kernel(t, &ud, &xd, &mut out);
                ud[a].der = 0.0;
                let col = cell * k + a;
                for (row_loc, v) in out.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(cell * k + row_loc, col, v.der);
                    }
                }
            }
        }

        for f in &disc.interior_faces {
            gather_dual_state(disc, f.owner, u, &mut ud);
            gather_dual_state(disc, f.neighbor, u, &mut und);
            gather_dual_coords(disc, f.owner, x, &mut xd);
            for side in 0..2 {
                for a in 0..k {
                    if side == 0 {
                        ud[a].der = 1.0;
                    } else {
                        und[a].der = 1.0;
                    }
                    out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                    out2.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                    interior_face_kernel(
                        t,
                        f.owner_face,
                        f.neighbor_face,
                        &ud,
                        &und,
                        &xd,
                        &mut out,
                        &mut out2,
                    );
                    if side == 0 {
                        ud[a].der = 0.0;
                    } else {
                        und[a].der = 0.0;
                    }
                    let col = if side == 0 {
                        f.owner * k + a
                    } else {
                        f.neighbor * k + a
                    };
                    for (row_loc, v) in out.iter().enumerate() {
                        if v.der != 0.0 {
                            b.push(f.owner * k + row_loc, col, v.der);
                        }
                    }
                    for (row_loc, v) in out2.iter().enumerate() {
                        if v.der != 0.0 {
                            b.push(f.neighbor * k + row_loc, col, v.der);
                        }
                    }
                }
            }
        }

        for f in &disc.boundary_faces {
            gather_dual_state(disc, f.cell, u, &mut ud);
            gather_dual_coords(disc, f.cell, x, &mut xd);
            for a in 0..k {
                ud[a].der = 1.0;
                out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                boundary_face_kernel(t, f.face, f.tag, self.bc, &ud, &xd, &mut out);
                ud[a].der = 0.0;
                let col = f.cell * k + a;
                for (row_loc, v) in out.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(f.cell * k + row_loc, col, v.der);
                    }
                }
            }
        }

        Ok(b.build())
    }

    /// Mesh Jacobian `R_x` as CSR over global coordinate unknowns.
    pub fn jacobian_geometry(&self, u: &[f64], x: &[f64]) -> Result<SparseMatrixCsr, EulerError> {
        self.validate_state(u)?;
        let disc = self.disc;
        let t = &disc.tables;
        let k = t.n_sol * N_FIELDS;
        let kx = 2 * t.n_geo;
        let mut b = CsrBuilder::new(disc.n_state(), disc.n_coords());

        let mut ud: Vec<Dual1> = Vec::new();
        let mut und: Vec<Dual1> = Vec::new();
        let mut xd: Vec<Dual1> = Vec::new();
        let mut out = vec![Dual1::lift(0.0); k];
        let mut out2 = vec![Dual1::lift(0.0); k];

        let coord_index = |disc: &DgDiscretization, cell: usize, a: usize| {
            let node = disc.nodes_of(cell)[a / 2];
            2 * node + (a % 2)
        };

        for cell in 0..disc.n_cells {
            gather_dual_state(disc, cell, u, &mut ud);
            gather_dual_coords(disc, cell, x, &mut xd);
            for a in 0..kx {
                xd[a].der = 1.0;
                out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                volume_kernel(t, &ud, &xd, &mut out);
                xd[a].der = 0.0;
                let col = coord_index(disc, cell, a);
                for (row_loc, v) in out.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(cell * k + row_loc, col, v.der);
                    }
                }
            }
        }

        for f in &disc.interior_faces {
            gather_dual_state(disc, f.owner, u, &mut ud);
            gather_dual_state(disc, f.neighbor, u, &mut und);
            gather_dual_coords(disc, f.owner, x, &mut xd);
            for a in 0..kx {
                xd[a].der = 1.0;
                out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                out2.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                interior_face_kernel(
                    t,
                    f.owner_face,
                    f.neighbor_face,
                    &ud,
                    &und,
                    &xd,
                    &mut out,
                    &mut out2,
                );
                xd[a].der = 0.0;
                let col = coord_index(disc, f.owner, a);
                for (row_loc, v) in out.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(f.owner * k + row_loc, col, v.der);
                    }
                }
                for (row_loc, v) in out2.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(f.neighbor * k + row_loc, col, v.der);
                    }
                }
            }
        }

        for f in &disc.boundary_faces {
            gather_dual_state(disc, f.cell, u, &mut ud);
            gather_dual_coords(disc, f.cell, x, &mut xd);
            for a in 0..kx {
                xd[a].der = 1.0;
                out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
                boundary_face_kernel(t, f.face, f.tag, self.bc, &ud, &xd, &mut out);
                xd[a].der = 0.0;
                let col = coord_index(disc, f.cell, a);
                for (row_loc, v) in out.iter().enumerate() {
                    if v.der != 0.0 {
                        b.push(f.cell * k + row_loc, col, v.der);
                    }
                }
            }
        }

        Ok(b.build())
    }

    /// Dual-weighted second-derivative block of `lambda^T R`.
    pub fn dual_weighted_hessian(
        &self,
        u: &[f64],
        x: &[f64],
        lambda: &[f64],
        block: HessianBlock,
    ) -> Result<SparseMatrixCsr, EulerError> {
        self.validate_state(u)?;
        let disc = self.disc;
        let t = &disc.tables;
        let k = t.n_sol * N_FIELDS;
        let kx = 2 * t.n_geo;
        let (nrows, ncols) = match block {
            HessianBlock::StateState => (disc.n_state(), disc.n_state()),
            HessianBlock::StateGeometry => (disc.n_state(), disc.n_coords()),
            HessianBlock::GeometryGeometry => (disc.n_coords(), disc.n_coords()),
        };
        let mut b = CsrBuilder::new(nrows, ncols);

        let mut ud: Vec<Dual2> = Vec::new();
        let mut und: Vec<Dual2> = Vec::new();
        let mut xd: Vec<Dual2> = Vec::new();
        let mut out = vec![Dual2::constant(0.0); k];
        let mut out2 = vec![Dual2::constant(0.0); k];

        let coord_index = |cell: usize, a: usize| {
            let node = disc.nodes_of(cell)[a / 2];
            2 * node + (a % 2)
        };
        let state_index = |cell: usize, a: usize| cell * k + a;

        // Volume + boundary elements: one cell of unknowns. Interior faces:
        // the state union of both cells, geometry of the owner.
        enum Element {
            Cell(usize),
            Face(usize),
            Boundary(usize),
        }
        let mut elements = Vec::new();
        elements.extend((0..disc.n_cells).map(Element::Cell));
        elements.extend((0..disc.interior_faces.len()).map(Element::Face));
        elements.extend((0..disc.boundary_faces.len()).map(Element::Boundary));

        for element in elements {
            // local unknown descriptors: (is_face_neighbor_side, local index)
            let (cells, owner): (Vec<usize>, usize) = match &element {
                Element::Cell(c) => (vec![*c], *c),
                Element::Face(i) => {
                    let f = &disc.interior_faces[*i];
                    (vec![f.owner, f.neighbor], f.owner)
                }
                Element::Boundary(i) => {
                    let f = &disc.boundary_faces[*i];
                    (vec![f.cell], f.cell)
                }
            };

            gather_dual_state(disc, cells[0], u, &mut ud);
            if cells.len() == 2 {
                gather_dual_state(disc, cells[1], u, &mut und);
            }
            gather_dual_coords(disc, owner, x, &mut xd);

            let n_u_locals = k * cells.len();
            let set_u_seed = |ud: &mut Vec<Dual2>, und: &mut Vec<Dual2>, a: usize, outer: bool, on: f64| {
                let target = if a < k { &mut ud[a] } else { &mut und[a - k] };
                if outer {
                    target.der.val = on;
                } else {
                    target.val.der = on;
                }
            };
            let u_global = |a: usize| {
                if a < k {
                    state_index(cells[0], a)
                } else {
                    state_index(cells[1], a - k)
                }
            };

            let eval = |ud: &Vec<Dual2>, und: &Vec<Dual2>, xd: &Vec<Dual2>,
                            out: &mut Vec<Dual2>, out2: &mut Vec<Dual2>| -> f64 {
                out.iter_mut().for_each(|v| *v = Dual2::constant(0.0));
                out2.iter_mut().for_each(|v| *v = Dual2::constant(0.0));
                match &element {
                    Element::Cell(_) => volume_kernel(t, ud, xd, out),
                    Element::Face(i) => {
                        let f = &disc.interior_faces[*i];
                        interior_face_kernel(
                            t,
                            f.owner_face,
                            f.neighbor_face,
                            ud,
                            und,
                            xd,
                            out,
                            out2,
                        );
                    }
                    Element::Boundary(i) => {
                        let f = &disc.boundary_faces[*i];
                        boundary_face_kernel(t, f.face, f.tag, self.bc, ud, xd, out);
                    }
                }
                let mut g = Dual2::constant(0.0);
                for (row_loc, v) in out.iter().enumerate() {
                    g += v.scale(lambda[state_index(cells[0], row_loc)]);
                }
                if cells.len() == 2 {
                    for (row_loc, v) in out2.iter().enumerate() {
                        g += v.scale(lambda[state_index(cells[1], row_loc)]);
                    }
                }
                g.second()
            };

            match block {
                HessianBlock::StateState => {
                    for a in 0..n_u_locals {
                        set_u_seed(&mut ud, &mut und, a, true, 1.0);
                        for bcol in a..n_u_locals {
                            set_u_seed(&mut ud, &mut und, bcol, false, 1.0);
                            let h = eval(&ud, &und, &xd, &mut out, &mut out2);
                            set_u_seed(&mut ud, &mut und, bcol, false, 0.0);
                            if h != 0.0 {
                                b.push(u_global(a), u_global(bcol), h);
                                if bcol != a {
                                    b.push(u_global(bcol), u_global(a), h);
                                }
                            }
                        }
                        set_u_seed(&mut ud, &mut und, a, true, 0.0);
                    }
                }
                HessianBlock::StateGeometry => {
                    for a in 0..n_u_locals {
                        set_u_seed(&mut ud, &mut und, a, true, 1.0);
                        for bcol in 0..kx {
                            xd[bcol].val.der = 1.0;
                            let h = eval(&ud, &und, &xd, &mut out, &mut out2);
                            xd[bcol].val.der = 0.0;
                            if h != 0.0 {
                                b.push(u_global(a), coord_index(owner, bcol), h);
                            }
                        }
                        set_u_seed(&mut ud, &mut und, a, true, 0.0);
                    }
                }
                HessianBlock::GeometryGeometry => {
                    for a in 0..kx {
                        xd[a].der.val = 1.0;
                        for bcol in a..kx {
                            xd[bcol].val.der = 1.0;
                            let h = eval(&ud, &und, &xd, &mut out, &mut out2);
                            xd[bcol].val.der = 0.0;
                            if h != 0.0 {
                                let (ga, gb) = (coord_index(owner, a), coord_index(owner, bcol));
                                b.push(ga, gb, h);
                                if gb != ga {
                                    b.push(gb, ga, h);
                                }
                            }
                        }
                        xd[a].der.val = 0.0;
                    }
                }
            }
        }

        Ok(b.build())
    }

    /// Directional derivative of the residual along `(du, dx)` by a single
    /// forward-mode pass; used by tests as an independent route.
    pub fn residual_directional(
        &self,
        u: &[f64],
        x: &[f64],
        du: &[f64],
        dx: &[f64],
    ) -> Result<Vec<f64>, EulerError> {
        self.validate_state(u)?;
        let disc = self.disc;
        let t = &disc.tables;
        let k = t.n_sol * N_FIELDS;
        let mut deriv = vec![0.0; disc.n_state()];

        let mut ud: Vec<Dual1> = Vec::new();
        let mut und: Vec<Dual1> = Vec::new();
        let mut xd: Vec<Dual1> = Vec::new();
        let mut out = vec![Dual1::lift(0.0); k];
        let mut out2 = vec![Dual1::lift(0.0); k];

        let seed_state = |cell: usize, ud: &mut Vec<Dual1>| {
            let base = cell * k;
            for (a, v) in ud.iter_mut().enumerate() {
                v.der = du[base + a];
            }
        };
        let seed_coords = |cell: usize, xd: &mut Vec<Dual1>| {
            for (a, node) in disc.nodes_of(cell).iter().enumerate() {
                xd[2 * a].der = dx[2 * node];
                xd[2 * a + 1].der = dx[2 * node + 1];
            }
        };

        for cell in 0..disc.n_cells {
            gather_dual_state(disc, cell, u, &mut ud);
            gather_dual_coords(disc, cell, x, &mut xd);
            seed_state(cell, &mut ud);
            seed_coords(cell, &mut xd);
            out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
            volume_kernel(t, &ud, &xd, &mut out);
            for (row_loc, v) in out.iter().enumerate() {
                deriv[cell * k + row_loc] += v.der;
            }
        }
        for f in &disc.interior_faces {
            gather_dual_state(disc, f.owner, u, &mut ud);
            gather_dual_state(disc, f.neighbor, u, &mut und);
            gather_dual_coords(disc, f.owner, x, &mut xd);
            seed_state(f.owner, &mut ud);
            seed_state(f.neighbor, &mut und);
            seed_coords(f.owner, &mut xd);
            out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
            out2.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
            interior_face_kernel(t, f.owner_face, f.neighbor_face, &ud, &und, &xd, &mut out, &mut out2);
            for (row_loc, v) in out.iter().enumerate() {
                deriv[f.owner * k + row_loc] += v.der;
            }
            for (row_loc, v) in out2.iter().enumerate() {
                deriv[f.neighbor * k + row_loc] += v.der;
            }
        }
        for f in &disc.boundary_faces {
            gather_dual_state(disc, f.cell, u, &mut ud);
            gather_dual_coords(disc, f.cell, x, &mut xd);
            seed_state(f.cell, &mut ud);
            seed_coords(f.cell, &mut xd);
            out.iter_mut().for_each(|v| *v = Dual1::lift(0.0));
            boundary_face_kernel(t, f.face, f.tag, self.bc, &ud, &xd, &mut out);
            for (row_loc, v) in out.iter().enumerate() {
                deriv[f.cell * k + row_loc] += v.der;
            }
        }
        Ok(deriv)
    }
}

fn scatter_add(global: &mut [f64], cell: usize, n_sol: usize, local: &[f64]) {
    let base = cell * n_sol * N_FIELDS;
    for (i, v) in local.iter().enumerate() {
        global[base + i] += v;
    }
}

fn gather_dual_state<T: Scalar>(
    disc: &DgDiscretization,
    cell: usize,
    u: &[f64],
    out: &mut Vec<Dual<T>>,
) {
    let k = disc.tables.n_sol * N_FIELDS;
    out.clear();
    let base = cell * k;
    for a in 0..k {
        out.push(Dual::lift(T::constant(u[base + a])));
    }
}

fn gather_dual_coords<T: Scalar>(
    disc: &DgDiscretization,
    cell: usize,
    x: &[f64],
    out: &mut Vec<Dual<T>>,
) {
    out.clear();
    for &node in disc.nodes_of(cell) {
        out.push(Dual::lift(T::constant(x[2 * node])));
        out.push(Dual::lift(T::constant(x[2 * node + 1])));
    }
}
