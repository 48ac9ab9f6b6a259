//! Structured curved-quad discretization and the Gaussian-bump channel mesh.

use serde::{Deserialize, Serialize};

use crate::basis::{CellTables, FACE_BOTTOM, FACE_LEFT, FACE_RIGHT, FACE_TOP};

pub const N_FIELDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryTag {
    Inlet,
    Outlet,
    WallBottom,
    WallTop,
}

#[derive(Debug, Clone, Copy)]
pub struct InteriorFace {
    pub owner: usize,
    pub neighbor: usize,
    /// reference face of the owner cell
    pub owner_face: usize,
    /// matching reference face of the neighbor cell
    pub neighbor_face: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryFace {
    pub cell: usize,
    pub face: usize,
    pub tag: BoundaryTag,
}

/// Topology, bases, and quadrature of a structured quadrilateral DG mesh. The
/// geometry node coordinates live in a separate flat vector `x` (interleaved
/// `[x0, y0, x1, y1, ...]`) so the same discretization serves every deformed
/// configuration of the reference mesh.
#[derive(Debug, Clone)]
pub struct DgDiscretization {
    pub degree: usize,
    pub nx: usize,
    pub ny: usize,
    pub n_cells: usize,
    pub n_nodes: usize,
    /// global geometry-node ids per cell, `n_geo` each, row-major local order
    pub cell_nodes: Vec<usize>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_faces: Vec<BoundaryFace>,
    pub tables: CellTables,
}

impl DgDiscretization {
    /// Cells per row-major index.
    pub fn cell_index(&self, cx: usize, cy: usize) -> usize {
        cy * self.nx + cx
    }

    pub fn n_sol_nodes(&self) -> usize {
        self.tables.n_sol
    }

    /// Total state unknowns.
    pub fn n_state(&self) -> usize {
        self.n_cells * self.tables.n_sol * N_FIELDS
    }

    /// Total geometry coordinate unknowns (two per node).
    pub fn n_coords(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn state_dof(&self, cell: usize, node: usize, comp: usize) -> usize {
        (cell * self.tables.n_sol + node) * N_FIELDS + comp
    }

    /// Global node ids of one cell.
    pub fn nodes_of(&self, cell: usize) -> &[usize] {
        let n = self.tables.n_geo;
        &self.cell_nodes[cell * n..(cell + 1) * n]
    }

    /// Gather a cell's geometry coordinates from the global vector.
    pub fn gather_coords(&self, cell: usize, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for &node in self.nodes_of(cell) {
            out.push(x[2 * node]);
            out.push(x[2 * node + 1]);
        }
    }

    /// Gather a cell's state values.
    pub fn gather_state(&self, cell: usize, u: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let base = cell * self.tables.n_sol * N_FIELDS;
        out.extend_from_slice(&u[base..base + self.tables.n_sol * N_FIELDS]);
    }

    /// Global geometry-node ids on the bottom wall, ascending in x.
    pub fn bottom_wall_nodes(&self) -> Vec<usize> {
        let stride = self.nx * self.degree + 1;
        (0..stride).collect()
    }

    /// Cells owning a bottom-wall face.
    pub fn bottom_wall_faces(&self) -> Vec<BoundaryFace> {
        self.boundary_faces
            .iter()
            .copied()
            .filter(|f| f.tag == BoundaryTag::WallBottom)
            .collect()
    }

    /// Minimum metric Jacobian determinant over all volume quadrature points.
    pub fn min_jacobian_det(&self, x: &[f64]) -> f64 {
        let t = &self.tables;
        let mut x_loc = Vec::with_capacity(2 * t.n_geo);
        let mut min_det = f64::INFINITY;
        for cell in 0..self.n_cells {
            self.gather_coords(cell, x, &mut x_loc);
            for q in 0..t.n_sol {
                let mut j = [[0.0f64; 2]; 2];
                for a in 0..t.n_geo {
                    let g = t.vol_dpsi[q][a];
                    for r in 0..2 {
                        j[r][0] += x_loc[2 * a + r] * g[0];
                        j[r][1] += x_loc[2 * a + r] * g[1];
                    }
                }
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                min_det = min_det.min(det);
            }
        }
        min_det
    }
}

/// Gaussian-bump channel: `(x, y) in [-1.5, 1.5] x [0, 0.8]`, bottom wall at
/// `y = h exp(-25 x^2)`, interior graded linearly between the walls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BumpMeshSpec {
    pub nx: usize,
    pub ny: usize,
    pub degree: usize,
    pub bump_height: f64,
    pub x_range: (f64, f64),
    pub y_top: f64,
}

impl BumpMeshSpec {
    pub fn new(nx: usize, ny: usize, degree: usize, bump_height: f64) -> Self {
        Self {
            nx,
            ny,
            degree,
            bump_height,
            x_range: (-1.5, 1.5),
            y_top: 0.8,
        }
    }

    pub fn bottom_wall_height(&self, x: f64) -> f64 {
        self.bump_height * (-25.0 * x * x).exp()
    }

    /// Build the discretization and the reference coordinate vector.
    pub fn generate(&self) -> (DgDiscretization, Vec<f64>) {
        let (nx, ny, p) = (self.nx, self.ny, self.degree);
        assert!(nx >= 2 && ny >= 1 && p >= 1);
        let tables = CellTables::build(p);
        let gl = tables.geo_nodes_1d.clone();
        let nodes_x = nx * p + 1;
        let nodes_y = ny * p + 1;
        let n_nodes = nodes_x * nodes_y;

        let mut coords = vec![0.0; 2 * n_nodes];
        for gj in 0..nodes_y {
            let (cy, ay) = split_index(gj, p, ny);
            let tfrac = (cy as f64 + gl[ay]) / ny as f64;
            for gi in 0..nodes_x {
                let (cx, ax) = split_index(gi, p, nx);
                let xfrac = (cx as f64 + gl[ax]) / nx as f64;
                let x = self.x_range.0 + (self.x_range.1 - self.x_range.0) * xfrac;
                let yb = self.bottom_wall_height(x);
                let y = yb + tfrac * (self.y_top - yb);
                let id = gj * nodes_x + gi;
                coords[2 * id] = x;
                coords[2 * id + 1] = y;
            }
        }

        let n_geo = (p + 1) * (p + 1);
        let mut cell_nodes = Vec::with_capacity(nx * ny * n_geo);
        for cy in 0..ny {
            for cx in 0..nx {
                for ay in 0..=p {
                    for ax in 0..=p {
                        let gi = cx * p + ax;
                        let gj = cy * p + ay;
                        cell_nodes.push(gj * nodes_x + gi);
                    }
                }
            }
        }

        let cell = |cx: usize, cy: usize| cy * nx + cx;
        let mut interior_faces = Vec::new();
        let mut boundary_faces = Vec::new();
        for cy in 0..ny {
            for cx in 0..nx {
                if cx + 1 < nx {
                    interior_faces.push(InteriorFace {
                        owner: cell(cx, cy),
                        neighbor: cell(cx + 1, cy),
                        owner_face: FACE_RIGHT,
                        neighbor_face: FACE_LEFT,
                    });
                }
                if cy + 1 < ny {
                    interior_faces.push(InteriorFace {
                        owner: cell(cx, cy),
                        neighbor: cell(cx, cy + 1),
                        owner_face: FACE_TOP,
                        neighbor_face: FACE_BOTTOM,
                    });
                }
                if cx == 0 {
                    boundary_faces.push(BoundaryFace {
                        cell: cell(cx, cy),
                        face: FACE_LEFT,
                        tag: BoundaryTag::Inlet,
                    });
                }
                if cx + 1 == nx {
                    boundary_faces.push(BoundaryFace {
                        cell: cell(cx, cy),
                        face: FACE_RIGHT,
                        tag: BoundaryTag::Outlet,
                    });
                }
                if cy == 0 {
                    boundary_faces.push(BoundaryFace {
                        cell: cell(cx, cy),
                        face: FACE_BOTTOM,
                        tag: BoundaryTag::WallBottom,
                    });
                }
                if cy + 1 == ny {
                    boundary_faces.push(BoundaryFace {
                        cell: cell(cx, cy),
                        face: FACE_TOP,
                        tag: BoundaryTag::WallTop,
                    });
                }
            }
        }

        (
            DgDiscretization {
                degree: p,
                nx,
                ny,
                n_cells: nx * ny,
                n_nodes,
                cell_nodes,
                interior_faces,
                boundary_faces,
                tables,
            },
            coords,
        )
    }
}

/// Decompose a global 1D node index into (cell, local node), merging shared
/// endpoints into the left cell.
fn split_index(g: usize, p: usize, n_cells: usize) -> (usize, usize) {
    let c = (g / p).min(n_cells - 1);
    (c, g - c * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_channel_nodes_are_shared_and_rectangular() {
        let spec = BumpMeshSpec::new(4, 2, 2, 0.0);
        let (disc, x) = spec.generate();
        assert_eq!(disc.n_cells, 8);
        assert_eq!(disc.n_nodes, (4 * 2 + 1) * (2 * 2 + 1));
        assert!(disc.min_jacobian_det(&x) > 0.0);
        // neighbours share nodes along the interface
        let left = disc.nodes_of(disc.cell_index(0, 0)).to_vec();
        let right = disc.nodes_of(disc.cell_index(1, 0)).to_vec();
        let shared: Vec<usize> = left.iter().copied().filter(|n| right.contains(n)).collect();
        assert_eq!(shared.len(), 3); // p + 1 shared nodes per vertical face
    }

    #[test]
    fn face_counts_match_structure() {
        let (disc, _) = BumpMeshSpec::new(5, 3, 1, 0.0625).generate();
        assert_eq!(disc.interior_faces.len(), 4 * 3 + 5 * 2);
        assert_eq!(disc.boundary_faces.len(), 2 * 3 + 2 * 5);
        assert_eq!(disc.bottom_wall_faces().len(), 5);
    }

    #[test]
    fn bump_mesh_is_valid_and_follows_wall() {
        let spec = BumpMeshSpec::new(16, 4, 2, 0.0625);
        let (disc, x) = spec.generate();
        assert!(disc.min_jacobian_det(&x) > 0.0);
        for &n in &disc.bottom_wall_nodes() {
            let (px, py) = (x[2 * n], x[2 * n + 1]);
            assert!((py - spec.bottom_wall_height(px)).abs() < 1e-14);
        }
    }
}
