//! 1D quadrature rules and Lagrange bases on [0, 1], plus the precomputed
//! reference-cell tables used by the assembly kernels.

/// Gauss-Legendre rule with `n` points on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Newton iteration on P_n over [-1, 1], symmetric pairs
    for k in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    // map to [0, 1]
    for x in nodes.iter_mut() {
        *x = 0.5 * (*x + 1.0);
    }
    for w in weights.iter_mut() {
        *w *= 0.5;
    }
    (nodes, weights)
}

/// Gauss-Lobatto-Legendre rule with `n >= 2` points on [0, 1], endpoints included.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    // interior nodes: roots of P'_{n-1}; Newton on the derivative
    for k in 1..m {
        // Chebyshev-Gauss-Lobatto initial guess
        let mut x = -(std::f64::consts::PI * k as f64 / m as f64).cos();
        for _ in 0..100 {
            let (_, dp, ddp) = legendre_deriv2(m, x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[k] = x;
    }
    for k in 0..n {
        let (p, _) = legendre_and_deriv(m, nodes[k]);
        weights[k] = 2.0 / (m as f64 * (m as f64 + 1.0) * p * p);
    }
    for x in nodes.iter_mut() {
        *x = 0.5 * (*x + 1.0);
    }
    for w in weights.iter_mut() {
        *w *= 0.5;
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn legendre_deriv2(n: usize, x: f64) -> (f64, f64, f64) {
    let (p, dp) = legendre_and_deriv(n, x);
    // Legendre ODE: (1-x^2) P'' - 2x P' + n(n+1) P = 0
    let ddp = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
    (p, dp, ddp)
}

/// Nodal Lagrange basis on a fixed set of distinct nodes.
#[derive(Debug, Clone)]
pub struct Lagrange1d {
    pub nodes: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, k: usize, t: f64) -> f64 {
        let mut acc = 1.0;
        for (j, &xj) in self.nodes.iter().enumerate() {
            if j != k {
                acc *= (t - xj) / (self.nodes[k] - xj);
            }
        }
        acc
    }

    pub fn eval_deriv(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for (m, &xm) in self.nodes.iter().enumerate() {
            if m == k {
                continue;
            }
            let mut term = 1.0 / (self.nodes[k] - xm);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != k && j != m {
                    term *= (t - xj) / (self.nodes[k] - xj);
                }
            }
            acc += term;
        }
        acc
    }
}

/// Reference faces of the unit cell, numbered left, right, bottom, top.
pub const FACE_LEFT: usize = 0;
pub const FACE_RIGHT: usize = 1;
pub const FACE_BOTTOM: usize = 2;
pub const FACE_TOP: usize = 3;

/// Reference outward normal of each face.
pub const FACE_REF_NORMAL: [[f64; 2]; 4] = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];

/// Map a face parameter `t` to reference coordinates.
pub fn face_point(face: usize, t: f64) -> [f64; 2] {
    match face {
        FACE_LEFT => [0.0, t],
        FACE_RIGHT => [1.0, t],
        FACE_BOTTOM => [t, 0.0],
        FACE_TOP => [t, 1.0],
        _ => unreachable!(),
    }
}

/// Basis/quadrature tables evaluated once per discretization.
///
/// Solution: tensor Lagrange on Gauss points (order p). Geometry: tensor
/// Lagrange on Gauss-Lobatto points (order p), shared between cells. Volume
/// quadrature collocates with the solution nodes; faces carry (p+1) Gauss
/// points each.
#[derive(Debug, Clone)]
pub struct CellTables {
    pub degree: usize,
    /// points per direction
    pub nq: usize,
    /// solution nodes per cell
    pub n_sol: usize,
    /// geometry nodes per cell
    pub n_geo: usize,
    /// tensor quadrature weights at the volume points
    pub vol_weights: Vec<f64>,
    /// `phi[q][i]`: solution basis i at volume point q
    pub vol_phi: Vec<Vec<f64>>,
    /// `dphi[q][i]`: reference gradient of solution basis i at volume point q
    pub vol_dphi: Vec<Vec<[f64; 2]>>,
    /// geometry basis values / gradients at volume points
    pub vol_dpsi: Vec<Vec<[f64; 2]>>,
    /// face quadrature weights (same for all faces)
    pub face_weights: Vec<f64>,
    /// `face_phi[f][q][i]`: solution basis at face point
    pub face_phi: [Vec<Vec<f64>>; 4],
    /// `face_psi[f][q][a]`: geometry basis values at face points
    pub face_psi: [Vec<Vec<f64>>; 4],
    /// `face_dpsi[f][q][a]`: geometry basis gradients at face points
    pub face_dpsi: [Vec<Vec<[f64; 2]>>; 4],
    /// 1D solution nodes (Gauss) and geometry nodes (Lobatto)
    pub sol_nodes_1d: Vec<f64>,
    pub geo_nodes_1d: Vec<f64>,
}

impl CellTables {
    pub fn build(degree: usize) -> Self {
        let nq = degree + 1;
        let (gauss_nodes, gauss_w) = gauss_legendre(nq);
        let (lobatto_nodes, _) = gauss_lobatto(nq.max(2));
        let sol_basis = Lagrange1d::new(gauss_nodes.clone());
        let geo_basis = Lagrange1d::new(lobatto_nodes.clone());
        let n_sol = nq * nq;
        let n_geo = geo_basis.len() * geo_basis.len();
        let ng = geo_basis.len();

        let tensor_value = |basis: &Lagrange1d, i: usize, n1: usize, xi: f64, eta: f64| {
            let (ix, iy) = (i % n1, i / n1);
            basis.eval(ix, xi) * basis.eval(iy, eta)
        };
        let tensor_grad = |basis: &Lagrange1d, i: usize, n1: usize, xi: f64, eta: f64| {
            let (ix, iy) = (i % n1, i / n1);
            [
                basis.eval_deriv(ix, xi) * basis.eval(iy, eta),
                basis.eval(ix, xi) * basis.eval_deriv(iy, eta),
            ]
        };

        let mut vol_weights = Vec::with_capacity(n_sol);
        let mut vol_phi = Vec::with_capacity(n_sol);
        let mut vol_dphi = Vec::with_capacity(n_sol);
        let mut vol_dpsi = Vec::with_capacity(n_sol);
        for qy in 0..nq {
            for qx in 0..nq {
                let (xi, eta) = (gauss_nodes[qx], gauss_nodes[qy]);
                vol_weights.push(gauss_w[qx] * gauss_w[qy]);
                vol_phi.push((0..n_sol).map(|i| tensor_value(&sol_basis, i, nq, xi, eta)).collect());
                vol_dphi.push((0..n_sol).map(|i| tensor_grad(&sol_basis, i, nq, xi, eta)).collect());
                vol_dpsi.push((0..n_geo).map(|a| tensor_grad(&geo_basis, a, ng, xi, eta)).collect());
            }
        }

        let mut face_phi: [Vec<Vec<f64>>; 4] = Default::default();
        let mut face_psi: [Vec<Vec<f64>>; 4] = Default::default();
        let mut face_dpsi: [Vec<Vec<[f64; 2]>>; 4] = Default::default();
        for f in 0..4 {
            for &t in &gauss_nodes {
                let [xi, eta] = face_point(f, t);
                face_phi[f].push(
                    (0..n_sol)
                        .map(|i| tensor_value(&sol_basis, i, nq, xi, eta))
                        .collect(),
                );
                face_psi[f].push(
                    (0..n_geo)
                        .map(|a| tensor_value(&geo_basis, a, ng, xi, eta))
                        .collect(),
                );
                face_dpsi[f].push(
                    (0..n_geo)
                        .map(|a| tensor_grad(&geo_basis, a, ng, xi, eta))
                        .collect(),
                );
            }
        }

        Self {
            degree,
            nq,
            n_sol,
            n_geo,
            vol_weights,
            vol_phi,
            vol_dphi,
            vol_dpsi,
            face_weights: gauss_w,
            face_phi,
            face_psi,
            face_dpsi,
            sol_nodes_1d: gauss_nodes,
            geo_nodes_1d: lobatto_nodes,
        }
    }
}
