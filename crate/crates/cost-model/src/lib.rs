//! Closed-form flop/work model for a weak-form DG Euler discretization and the
//! derivative operators around it, plus an event ledger that converts solver
//! events into residual-equivalent work units.
//!
//! All costs are expressed relative to one residual assembly of a single cell,
//! so `relative work = flops(op) / flops(residual)`. Matrix-vector products of
//! pre-assembled operators run about three times faster per flop than residual
//! assembly, so their relative work is divided by 3 wherever work is charged
//! or break-even counts are computed.

mod ledger;
mod tables;

pub use ledger::{CostLedger, LedgerSnapshot, WorkEvent};
pub use tables::{table_by_name, table_names, CostTable, TableCell};

/// Residual-relative cost of a matrix-free forward-mode Jacobian-vector product.
pub const MATRIX_FREE_FORWARD: f64 = 2.25;
/// Residual-relative cost of a matrix-free reverse-mode transpose product.
pub const MATRIX_FREE_REVERSE: f64 = 3.5;
/// Residual-relative cost of a matrix-free dual-weighted Hessian-vector product
/// (reverse sweep followed by a single forward seed).
pub const MATRIX_FREE_SECOND_ORDER: f64 = 7.875;

/// Timing ratio between residual-assembly flops and sparse matvec flops.
pub const MATVEC_TIMING_DIVISOR: f64 = 3.0;

/// Derivative operators whose sparse matvec and assembly costs are modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    /// Flow Jacobian `R_u`.
    FlowJacobian,
    /// Mesh Jacobian `R_x`.
    MeshJacobian,
    /// Dual-weighted residual Hessian w.r.t. state twice.
    DualHessianUu,
    /// Dual-weighted residual Hessian, state/mesh cross block.
    DualHessianUx,
    /// Dual-weighted residual Hessian w.r.t. mesh coordinates twice.
    DualHessianXx,
}

/// Error for unsupported (p, d) or operator combinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedModel(pub String);

impl std::fmt::Display for UnsupportedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unsupported work model request: {}", self.0)
    }
}

impl std::error::Error for UnsupportedModel {}

/// Flop model for one cell of a degree-`p`, dimension-`d` DG discretization of
/// the Euler equations (`s = d + 2` fields, `(p+1)^d` basis functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkModel {
    pub dim: usize,
    pub degree: usize,
}

impl WorkModel {
    pub fn new(dim: usize, degree: usize) -> Result<Self, UnsupportedModel> {
        if !(dim == 2 || dim == 3) {
            return Err(UnsupportedModel(format!("dimension {dim} (expected 2 or 3)")));
        }
        if degree == 0 {
            return Err(UnsupportedModel("degree 0".into()));
        }
        Ok(Self { dim, degree })
    }

    /// Basis count per cell, `(p+1)^d`.
    pub fn n_basis(&self) -> u64 {
        ((self.degree + 1) as u64).pow(self.dim as u32)
    }

    /// Face quadrature count, `(p+1)^(d-1)`.
    pub fn n_face_quad(&self) -> u64 {
        ((self.degree + 1) as u64).pow(self.dim as u32 - 1)
    }

    /// Number of Euler fields, `d + 2`.
    pub fn n_fields(&self) -> u64 {
        self.dim as u64 + 2
    }

    /// Flops for the volume contribution of one cell residual.
    pub fn residual_volume_flops(&self) -> u64 {
        let np = self.n_basis();
        match self.dim {
            2 => 32 * np * np + 45 * np,
            3 => 58 * np * np + 121 * np,
            _ => unreachable!(),
        }
    }

    /// Flops for one face contribution of the residual.
    pub fn residual_face_flops(&self) -> u64 {
        let np = self.n_basis();
        let nf = self.n_face_quad();
        match self.dim {
            2 => 32 * np * nf + 227 * nf,
            3 => 48 * np * nf + 299 * nf,
            _ => unreachable!(),
        }
    }

    /// Total flops to assemble the residual of one cell. A structured mesh has
    /// `d` faces per cell once shared faces are split between neighbours.
    pub fn residual_flops(&self) -> u64 {
        self.residual_volume_flops() + self.dim as u64 * self.residual_face_flops()
    }

    /// Structural nonzeros per row of the flow Jacobian: cell stencil size
    /// times degrees of freedom per cell.
    pub fn jacobian_nnz_per_row(&self) -> u64 {
        (1 + 2 * self.dim as u64) * self.n_fields() * self.n_basis()
    }

    /// Flops of a sparse matvec with the given pre-assembled operator,
    /// counted over the block row of one cell.
    pub fn matvec_flops(&self, op: Operator) -> u64 {
        let d = self.dim as u64;
        let np2d = self.n_basis() * self.n_basis();
        match op {
            Operator::FlowJacobian | Operator::DualHessianUu => {
                (4 * d * d * d + 18 * d * d + 24 * d + 8) * np2d
            }
            Operator::MeshJacobian | Operator::DualHessianUx => (2 * d * d + 4 * d) * np2d,
            // d/(d+2) of the mesh-Jacobian product: fewer block rows.
            Operator::DualHessianXx => 2 * d * d * np2d,
        }
    }

    /// Residual-relative matvec work (raw flop ratio, before the timing divisor).
    pub fn matvec_relwork(&self, op: Operator) -> f64 {
        self.matvec_flops(op) as f64 / self.residual_flops() as f64
    }

    /// Independent variables of the volume kernel for a seed in state space.
    pub fn seed_cols_state_volume(&self) -> u64 {
        self.n_fields() * self.n_basis()
    }

    /// Independent variables of the face kernel for a seed in state space
    /// (both neighbouring cells contribute).
    pub fn seed_cols_state_face(&self) -> u64 {
        2 * self.n_fields() * self.n_basis()
    }

    /// Independent variables for a seed in mesh coordinates; faces use the
    /// owning cell's nodes only, so volume and face counts coincide.
    pub fn seed_cols_mesh(&self) -> u64 {
        self.dim as u64 * self.n_basis()
    }

    /// Residual-relative work to assemble an operator with vector-forward AD,
    /// averaging `1.25 + k` over the volume/face split of the residual.
    pub fn assembly_relwork(&self, op: Operator) -> f64 {
        let wv = self.residual_volume_flops() as f64;
        let wf = self.residual_face_flops() as f64;
        let wr = self.residual_flops() as f64;
        let d = self.dim as f64;
        let forward = |kv: f64, kf: f64| (wv * (1.25 + kv) + d * wf * (1.25 + kf)) / wr;
        match op {
            Operator::FlowJacobian => forward(
                self.seed_cols_state_volume() as f64,
                self.seed_cols_state_face() as f64,
            ),
            Operator::MeshJacobian => {
                let k = self.seed_cols_mesh() as f64;
                forward(k, k)
            }
            // Reverse sweep for the dual weight costs 3.5 residuals, then the
            // forward seeds multiply on top.
            Operator::DualHessianUu => {
                MATRIX_FREE_REVERSE * self.assembly_relwork(Operator::FlowJacobian)
            }
            Operator::DualHessianUx | Operator::DualHessianXx => {
                MATRIX_FREE_REVERSE * self.assembly_relwork(Operator::MeshJacobian)
            }
        }
    }

    /// Number of matvecs after which assembling the operator beats forming the
    /// product on-the-fly with AD. Operators reused in transposed form have
    /// their assembly cost halved.
    pub fn breakeven_count(&self, op: Operator) -> Result<u64, UnsupportedModel> {
        let (assembly, on_the_fly, matvec_rel) = match op {
            Operator::MeshJacobian => (
                self.assembly_relwork(op) / 2.0,
                MATRIX_FREE_FORWARD,
                self.matvec_relwork(Operator::MeshJacobian),
            ),
            Operator::DualHessianUu => (
                self.assembly_relwork(op),
                MATRIX_FREE_SECOND_ORDER,
                self.matvec_relwork(Operator::FlowJacobian),
            ),
            Operator::DualHessianUx => (
                self.assembly_relwork(op) / 2.0,
                MATRIX_FREE_SECOND_ORDER,
                self.matvec_relwork(Operator::MeshJacobian),
            ),
            Operator::DualHessianXx => (
                self.assembly_relwork(op),
                MATRIX_FREE_SECOND_ORDER,
                self.matvec_relwork(Operator::DualHessianXx),
            ),
            Operator::FlowJacobian => {
                return Err(UnsupportedModel(
                    "the flow Jacobian is always assembled (the ILUT preconditioner needs it)"
                        .into(),
                ))
            }
        };
        let savings = on_the_fly - matvec_rel / MATVEC_TIMING_DIVISOR;
        Ok((assembly / savings).round() as u64)
    }

    /// The three matrix-free AD constants: forward, reverse, second-order.
    pub fn matrix_free_constants() -> (f64, f64, f64) {
        (
            MATRIX_FREE_FORWARD,
            MATRIX_FREE_REVERSE,
            MATRIX_FREE_SECOND_ORDER,
        )
    }
}

/// Round to one decimal with ties going to the even digit, matching how the
/// relative-work figures are reported.
pub fn round_one_decimal(v: f64) -> f64 {
    (v * 10.0).round_ties_even() / 10.0
}

/// Round to two decimals (ties to even), used for the small matvec ratios.
pub fn round_two_decimals(v: f64) -> f64 {
    (v * 100.0).round_ties_even() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_flops_reference_values() {
        let cases = [
            (1, 2, 692, 710, 2112),
            (2, 2, 2997, 1545, 6087),
            (3, 2, 8912, 2956, 14824),
            (4, 2, 21125, 5135, 31395),
            (1, 3, 4680, 2732, 12876),
            (2, 3, 45549, 14355, 88614),
            (3, 3, 245312, 53936, 407120),
            (4, 3, 921375, 157475, 1393800),
        ];
        for (p, d, vol, face, total) in cases {
            let m = WorkModel::new(d, p).unwrap();
            assert_eq!(m.residual_volume_flops(), vol, "volume p={p} d={d}");
            assert_eq!(m.residual_face_flops(), face, "face p={p} d={d}");
            assert_eq!(m.residual_flops(), total, "total p={p} d={d}");
        }
    }

    #[test]
    fn jacobian_matvec_flops_and_relwork() {
        let m = WorkModel::new(2, 2).unwrap();
        assert_eq!(m.matvec_flops(Operator::FlowJacobian), 12960);
        assert_eq!(
            round_one_decimal(m.matvec_relwork(Operator::FlowJacobian)),
            2.1
        );
        let m = WorkModel::new(3, 1).unwrap();
        assert_eq!(m.matvec_flops(Operator::MeshJacobian), 1920);
        assert_eq!(
            round_two_decimals(m.matvec_relwork(Operator::MeshJacobian)),
            0.15
        );
        let m = WorkModel::new(3, 4).unwrap();
        assert_eq!(m.matvec_flops(Operator::DualHessianXx), 281250);
        assert_eq!(
            round_two_decimals(m.matvec_relwork(Operator::DualHessianXx)),
            0.20
        );
    }

    #[test]
    fn assembly_relwork_reference_values() {
        let m = WorkModel::new(2, 1).unwrap();
        assert_eq!(round_one_decimal(m.assembly_relwork(Operator::FlowJacobian)), 28.0);
        assert_eq!(round_one_decimal(m.assembly_relwork(Operator::DualHessianUu)), 98.0);
        assert_eq!(round_one_decimal(m.assembly_relwork(Operator::DualHessianUx)), 32.4);
        let m = WorkModel::new(3, 2).unwrap();
        assert_eq!(round_one_decimal(m.assembly_relwork(Operator::DualHessianUx)), 287.9);
    }

    #[test]
    fn breakeven_reference_values() {
        let m = WorkModel::new(2, 1).unwrap();
        assert_eq!(m.breakeven_count(Operator::MeshJacobian).unwrap(), 2);
        assert_eq!(m.breakeven_count(Operator::DualHessianUu).unwrap(), 13);
        assert_eq!(m.breakeven_count(Operator::DualHessianUx).unwrap(), 2);
        assert_eq!(m.breakeven_count(Operator::DualHessianXx).unwrap(), 4);
        let m = WorkModel::new(3, 4).unwrap();
        assert_eq!(m.breakeven_count(Operator::DualHessianXx).unwrap(), 169);
    }

    #[test]
    fn matrix_free_constants_match() {
        let (fwd, rev, second) = WorkModel::matrix_free_constants();
        assert_eq!(fwd, 1.25 + 1.0);
        assert_eq!(rev, 1.25 + 2.25);
        assert_eq!(second, rev * fwd);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        assert!(WorkModel::new(4, 1).is_err());
        assert!(WorkModel::new(1, 1).is_err());
    }
}
