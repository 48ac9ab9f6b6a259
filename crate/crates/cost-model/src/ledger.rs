//! Event-counting work ledger shared by the optimizers.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::{Operator, WorkModel, MATVEC_TIMING_DIVISOR};

/// Countable solver events. Work is charged through the matvec / assembly /
/// preconditioner events; the solve events exist so callers can audit how many
/// flow-Jacobian solves an algorithm consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WorkEvent {
    ResidualEval,
    JacobianAssembly,
    MeshJacobianAssembly,
    HessianUuAssembly,
    HessianUxAssembly,
    HessianXxAssembly,
    MatvecFlowJacobian,
    MatvecFlowJacobianT,
    MatvecMeshJacobian,
    MatvecMeshJacobianT,
    MatvecHessianUu,
    MatvecHessianUx,
    MatvecHessianXu,
    MatvecHessianXx,
    IlutApplication,
    /// One completed linear solve with the flow Jacobian.
    ForwardSolve,
    /// One completed linear solve with the transposed flow Jacobian.
    AdjointSolve,
    /// One KKT-preconditioner application (any variant).
    KktPrecondApplication,
    /// One outer Krylov iteration on the KKT system.
    KktIteration,
}

impl WorkEvent {
    /// Residual-equivalent work units per event under the given model.
    pub fn unit_work(self, model: &WorkModel) -> f64 {
        let matvec = |op: Operator| model.matvec_relwork(op) / MATVEC_TIMING_DIVISOR;
        match self {
            WorkEvent::ResidualEval => 1.0,
            WorkEvent::JacobianAssembly => model.assembly_relwork(Operator::FlowJacobian),
            WorkEvent::MeshJacobianAssembly => model.assembly_relwork(Operator::MeshJacobian),
            WorkEvent::HessianUuAssembly => model.assembly_relwork(Operator::DualHessianUu),
            WorkEvent::HessianUxAssembly => model.assembly_relwork(Operator::DualHessianUx),
            WorkEvent::HessianXxAssembly => model.assembly_relwork(Operator::DualHessianXx),
            WorkEvent::MatvecFlowJacobian | WorkEvent::MatvecFlowJacobianT => {
                matvec(Operator::FlowJacobian)
            }
            WorkEvent::MatvecMeshJacobian | WorkEvent::MatvecMeshJacobianT => {
                matvec(Operator::MeshJacobian)
            }
            WorkEvent::MatvecHessianUu => matvec(Operator::DualHessianUu),
            WorkEvent::MatvecHessianUx | WorkEvent::MatvecHessianXu => {
                matvec(Operator::DualHessianUx)
            }
            WorkEvent::MatvecHessianXx => matvec(Operator::DualHessianXx),
            // The ILUT factor carries twice the nonzeros of the Jacobian, so
            // its triangular sweeps cost two Jacobian matvecs.
            WorkEvent::IlutApplication => 2.0 * matvec(Operator::FlowJacobian),
            WorkEvent::ForwardSolve
            | WorkEvent::AdjointSolve
            | WorkEvent::KktPrecondApplication
            | WorkEvent::KktIteration => 0.0,
        }
    }
}

/// Immutable view of the ledger counters.
pub type LedgerSnapshot = BTreeMap<WorkEvent, u64>;

/// Monotone event accumulator. Interior mutability so parallel kernels can
/// report events through a shared reference.
#[derive(Debug, Default)]
pub struct CostLedger {
    counts: Mutex<LedgerSnapshot>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, event: WorkEvent) {
        self.record_many(event, 1);
    }

    pub fn record_many(&self, event: WorkEvent, n: u64) {
        if n == 0 {
            return;
        }
        let mut counts = self.counts.lock().expect("ledger poisoned");
        *counts.entry(event).or_insert(0) += n;
    }

    pub fn count(&self, event: WorkEvent) -> u64 {
        *self
            .counts
            .lock()
            .expect("ledger poisoned")
            .get(&event)
            .unwrap_or(&0)
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        self.counts.lock().expect("ledger poisoned").clone()
    }

    /// Total accumulated work in residual-equivalent units.
    pub fn total_work(&self, model: &WorkModel) -> f64 {
        self.snapshot()
            .iter()
            .map(|(ev, n)| ev.unit_work(model) * *n as f64)
            .sum()
    }

    /// Work accumulated since a previous snapshot.
    pub fn work_since(&self, model: &WorkModel, base: &LedgerSnapshot) -> f64 {
        self.snapshot()
            .iter()
            .map(|(ev, n)| {
                let before = base.get(ev).copied().unwrap_or(0);
                ev.unit_work(model) * n.saturating_sub(before) as f64
            })
            .sum()
    }

    pub fn count_since(&self, event: WorkEvent, base: &LedgerSnapshot) -> u64 {
        self.count(event)
            .saturating_sub(base.get(&event).copied().unwrap_or(0))
    }
}
