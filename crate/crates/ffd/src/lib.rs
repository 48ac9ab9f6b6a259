//! Free-form deformation of a 2D surface.
//!
//! A parallelepiped control box with origin `Q` and edge vectors `S`, `T`
//! carries an evenly spaced lattice of control points. Points embedded in the
//! box get local coordinates `(s, t) in [0,1]^2`; displacing lattice points
//! moves every embedded point through the tensor-product Bernstein polynomial.
//! The control variables are the y-displacements of the lattice points that
//! are not on the left-most column, right-most column, or bottom row, which
//! pins the box boundary and keeps the mesh valid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FfdError {
    #[error("degenerate control box: S and T are parallel")]
    DegenerateBox,
    #[error("point ({0}, {1}) is outside the control box")]
    OutsideBox(f64, f64),
    #[error("control vector has length {0}, expected {1}")]
    ControlLength(usize, usize),
    #[error("lattice needs at least 3 columns and 2 rows, got {0}x{1}")]
    LatticeTooSmall(usize, usize),
}

/// Bernstein basis value `B_i^n(t) = C(n, i) (1-t)^(n-i) t^i`.
pub fn bernstein(n: usize, i: usize, t: f64) -> f64 {
    binomial(n, i) * (1.0 - t).powi((n - i) as i32) * t.powi(i as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// 2D control lattice. `ns` and `nt` are the polynomial degrees, so the
/// lattice holds `(ns+1) x (nt+1)` points at rest positions
/// `Q + (i/ns) S + (j/nt) T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FfdBox {
    origin: [f64; 2],
    s_axis: [f64; 2],
    t_axis: [f64; 2],
    ns: usize,
    nt: usize,
    /// Current y-displacement of every lattice point, row-major `(j, i)`.
    displacement_y: Vec<f64>,
}

/// Embedded surface points: local coordinates plus the ids they came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddedSurface {
    pub point_ids: Vec<usize>,
    pub local_coords: Vec<[f64; 2]>,
}

impl FfdBox {
    pub fn new(
        origin: [f64; 2],
        s_axis: [f64; 2],
        t_axis: [f64; 2],
        ns: usize,
        nt: usize,
    ) -> Result<Self, FfdError> {
        let cross = s_axis[0] * t_axis[1] - s_axis[1] * t_axis[0];
        if cross.abs() < 1e-14 {
            return Err(FfdError::DegenerateBox);
        }
        if ns < 2 || nt < 1 {
            return Err(FfdError::LatticeTooSmall(ns + 1, nt + 1));
        }
        Ok(Self {
            origin,
            s_axis,
            t_axis,
            ns,
            nt,
            displacement_y: vec![0.0; (ns + 1) * (nt + 1)],
        })
    }

    /// Lattice sized for `n` active control variables: `(n/2 + 2)` columns and
    /// 3 rows, so that excluding the left/right columns and the bottom row
    /// leaves exactly `n` active y-displacements. `n` must be even.
    pub fn sized_for_controls(
        origin: [f64; 2],
        s_axis: [f64; 2],
        t_axis: [f64; 2],
        n_controls: usize,
    ) -> Result<Self, FfdError> {
        assert!(n_controls >= 2 && n_controls % 2 == 0, "control count must be even");
        let cols = n_controls / 2 + 2;
        Self::new(origin, s_axis, t_axis, cols - 1, 2)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.ns, self.nt)
    }

    /// Number of active control variables.
    pub fn n_controls(&self) -> usize {
        (self.ns - 1) * self.nt
    }

    /// Lattice indices `(i, j)` of the active control points in control-vector
    /// order: interior columns, bottom row excluded, row-major from j = 1.
    pub fn active_points(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_controls());
        for j in 1..=self.nt {
            for i in 1..self.ns {
                out.push((i, j));
            }
        }
        out
    }

    /// Rest position of lattice point `(i, j)`.
    pub fn lattice_rest_position(&self, i: usize, j: usize) -> [f64; 2] {
        let fs = i as f64 / self.ns as f64;
        let ft = j as f64 / self.nt as f64;
        [
            self.origin[0] + fs * self.s_axis[0] + ft * self.t_axis[0],
            self.origin[1] + fs * self.s_axis[1] + ft * self.t_axis[1],
        ]
    }

    /// Local coordinates of a point, using the perpendicular-vector form of
    /// the box inversion. Errors when the point falls outside `[0,1]^2`.
    pub fn embed(&self, p: [f64; 2]) -> Result<(f64, f64), FfdError> {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        let perp = |v: [f64; 2]| [v[1], -v[0]];
        let t_perp = perp(self.t_axis);
        let s_perp = perp(self.s_axis);
        let s = (d[0] * t_perp[0] + d[1] * t_perp[1])
            / (self.s_axis[0] * t_perp[0] + self.s_axis[1] * t_perp[1]);
        let t = (d[0] * s_perp[0] + d[1] * s_perp[1])
            / (self.t_axis[0] * s_perp[0] + self.t_axis[1] * s_perp[1]);
        let eps = 1e-12;
        if !((-eps..=1.0 + eps).contains(&s) && (-eps..=1.0 + eps).contains(&t)) {
            return Err(FfdError::OutsideBox(p[0], p[1]));
        }
        Ok((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)))
    }

    /// Embed every point that lies inside the box; points outside are skipped.
    pub fn embed_surface(&self, points: &[[f64; 2]]) -> EmbeddedSurface {
        let mut ids = Vec::new();
        let mut coords = Vec::new();
        for (k, p) in points.iter().enumerate() {
            if let Ok((s, t)) = self.embed(*p) {
                ids.push(k);
                coords.push([s, t]);
            }
        }
        EmbeddedSurface {
            point_ids: ids,
            local_coords: coords,
        }
    }

    /// Set lattice displacements from a control vector (y-components of the
    /// active points).
    pub fn set_controls(&mut self, z: &[f64]) -> Result<(), FfdError> {
        if z.len() != self.n_controls() {
            return Err(FfdError::ControlLength(z.len(), self.n_controls()));
        }
        self.displacement_y.fill(0.0);
        for (zk, (i, j)) in z.iter().zip(self.active_points()) {
            self.displacement_y[j * (self.ns + 1) + i] = *zk;
        }
        Ok(())
    }

    pub fn controls(&self) -> Vec<f64> {
        self.active_points()
            .iter()
            .map(|(i, j)| self.displacement_y[j * (self.ns + 1) + i])
            .collect()
    }

    /// Displacement of one embedded point under the current lattice.
    pub fn displacement_at(&self, s: f64, t: f64) -> [f64; 2] {
        let mut dy = 0.0;
        for j in 0..=self.nt {
            let bj = bernstein(self.nt, j, t);
            if bj == 0.0 {
                continue;
            }
            for i in 0..=self.ns {
                let w = bernstein(self.ns, i, s) * bj;
                dy += w * self.displacement_y[j * (self.ns + 1) + i];
            }
        }
        [0.0, dy]
    }

    /// Displaced positions of embedded points given their rest positions.
    pub fn deform(&self, rest: &[[f64; 2]], surface: &EmbeddedSurface) -> Vec<[f64; 2]> {
        surface
            .point_ids
            .iter()
            .zip(&surface.local_coords)
            .map(|(&id, &[s, t])| {
                let d = self.displacement_at(s, t);
                [rest[id][0] + d[0], rest[id][1] + d[1]]
            })
            .collect()
    }

    /// Constant Jacobian `d(y displacement of embedded point) / d(control)`:
    /// entry `(k, a)` is the Bernstein product weight of active point `a` at
    /// the k-th embedded point. Row-major dense storage, rows = embedded
    /// points, independent of the current lattice state.
    pub fn surface_jacobian(&self, surface: &EmbeddedSurface) -> SurfaceJacobian {
        let active = self.active_points();
        let n = active.len();
        let rows = surface.local_coords.len();
        let mut weights = vec![0.0; rows * n];
        for (k, &[s, t]) in surface.local_coords.iter().enumerate() {
            for (a, &(i, j)) in active.iter().enumerate() {
                weights[k * n + a] = bernstein(self.ns, i, s) * bernstein(self.nt, j, t);
            }
        }
        SurfaceJacobian {
            n_points: rows,
            n_controls: n,
            weights,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("FFD lattice serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Dense `n_points x n_controls` sensitivity of embedded-point y-displacements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceJacobian {
    pub n_points: usize,
    pub n_controls: usize,
    weights: Vec<f64>,
}

impl SurfaceJacobian {
    pub fn weight(&self, point: usize, control: usize) -> f64 {
        self.weights[point * self.n_controls + control]
    }

    /// dy = J z
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n_controls);
        let mut out = vec![0.0; self.n_points];
        for k in 0..self.n_points {
            let row = &self.weights[k * self.n_controls..(k + 1) * self.n_controls];
            out[k] = row.iter().zip(z).map(|(w, zi)| w * zi).sum();
        }
        out
    }

    /// z = J^T w
    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n_points);
        let mut out = vec![0.0; self.n_controls];
        for k in 0..self.n_points {
            let row = &self.weights[k * self.n_controls..(k + 1) * self.n_controls];
            for (o, wgt) in out.iter_mut().zip(row) {
                *o += wgt * w[k];
            }
        }
        out
    }

    /// Least-squares fit of controls to a desired y-displacement field, via
    /// normal equations with Cholesky. Used to build attainable target shapes.
    pub fn fit_least_squares(&self, dy: &[f64]) -> Vec<f64> {
        assert_eq!(dy.len(), self.n_points);
        let n = self.n_controls;
        // normal matrix J^T J and rhs J^T dy
        let mut ata = vec![0.0; n * n];
        let rhs = self.apply_transpose(dy);
        for k in 0..self.n_points {
            let row = &self.weights[k * n..(k + 1) * n];
            for a in 0..n {
                for b in 0..n {
                    ata[a * n + b] += row[a] * row[b];
                }
            }
        }
        // tiny ridge keeps near-rank-deficient fits stable
        for a in 0..n {
            ata[a * n + a] += 1e-12;
        }
        cholesky_solve(&mut ata, n, &rhs)
    }
}

fn cholesky_solve(a: &mut [f64], n: usize, b: &[f64]) -> Vec<f64> {
    // in-place LL^T
    for j in 0..n {
        for k in 0..j {
            let ljk = a[j * n + k];
            for i in j..n {
                a[i * n + j] -= a[i * n + k] * ljk;
            }
        }
        let d = a[j * n + j].max(1e-300).sqrt();
        for i in j..n {
            a[i * n + j] /= d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[i * n + k] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= a[k * n + i] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    y
}
