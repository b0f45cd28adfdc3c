//! Benchmark objective functions.

mod envelope;
mod scharber;
mod tasks;

pub use envelope::{fit_outlier_envelope, EnvelopeError, OutlierEnvelope, PAPER_CONTAMINATION};
pub use scharber::{
    calibrate, fit_grid, fit_jsc_surrogate, open_circuit_voltage, scharber_pce, DeviceMode,
    FrontierEnergies, GapMode, JscFit, ScharberConfig, ScharberError, Spectrum,
};
pub use tasks::{
    all_tasks, evaluate_task, passes_bank, property_unit, required_properties, task_by_name,
    BankKind, ObjectiveError, PropertyMap, Quantity, TaskContext, TaskDefinition, TaskKind,
    PENALTY_FITNESS, PROPERTY_CATALOGUE,
};
