//! Frank-Wolfe boosting in function space.

mod generic;
mod loss;
mod surrogate;

pub use generic::{diameter, run_fw_generic, GenericConfig, GenericRecord, GenericTrace, Objective, Quadratic, SlackPolicy};
pub use loss::{
    psi_antiderivative, squared_loss, surrogate_gap, surrogate_gap_to_l2, surrogate_gradient, surrogate_loss, L2Conversion,
    LossKind, LossSpec,
};
pub use surrogate::{run_fw_surrogate, FwConfig, FwRecord, FwTrace, GapMonitor, IterateMonitor, Observation};
