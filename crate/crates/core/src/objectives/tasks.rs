//! The twelve benchmark tasks and their fitness functions.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::envelope::OutlierEnvelope;
use super::scharber::{calibrate, scharber_pce, DeviceMode, FrontierEnergies, ScharberConfig};
use crate::mol::Molecule;
use crate::pattern::{apply_filter_bank, docking_bank, emitter_bank, reactivity_bank, FilterBank, FilterError, TpsaMode};

/// Fitness assigned when a hard constraint fails.
pub const PENALTY_FITNESS: f64 = -10_000.0;

/// Catalogue of provider properties and their unit tags.
pub const PROPERTY_CATALOGUE: &[(&str, &str)] = &[
    ("homo_ev", "eV"),
    ("lumo_ev", "eV"),
    ("gap_ev", "eV"),
    ("dipole_debye", "debye"),
    ("st_gap_ev", "eV"),
    ("osc_strength", "dimensionless"),
    ("vee_ev", "eV"),
    ("docking_1syh", "kcal/mol"),
    ("docking_6y2f", "kcal/mol"),
    ("docking_4lde", "kcal/mol"),
    ("sascore", "dimensionless"),
    ("qed", "dimensionless"),
    ("logp", "dimensionless"),
    ("tpsa", "A^2"),
    ("alerts_pass", "bool"),
    ("dE_act_kcal", "kcal/mol"),
    ("dE_rxn_kcal", "kcal/mol"),
];

pub fn property_unit(name: &str) -> Option<&'static str> {
    PROPERTY_CATALOGUE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, u)| u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Quantity {
        Quantity {
            value,
            unit: unit.to_string(),
        }
    }

    /// Tagged with the catalogue unit for `name`.
    pub fn catalogued(name: &str, value: f64) -> Option<Quantity> {
        property_unit(name).map(|u| Quantity::new(value, u))
    }
}

pub type PropertyMap = BTreeMap<String, Quantity>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("missing property '{0}'")]
    MissingProperty(String),
    #[error("property '{name}' has unit '{got}', expected '{expected}'")]
    UnitMismatch {
        name: String,
        expected: &'static str,
        got: String,
    },
    #[error(transparent)]
    Filter(#[from] FilterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    PcePcbmSas,
    PcePcdtbtSas,
    EmitterSingletTriplet,
    EmitterOscillator,
    EmitterCombined,
    Docking1syh,
    Docking6y2f,
    Docking4lde,
    ReactivityActivation,
    ReactivityReaction,
    ReactivitySum,
    ReactivityDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankKind {
    Docking,
    Emitter,
    Reactivity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDefinition {
    pub kind: TaskKind,
    pub name: &'static str,
    /// Bank used for success-rate statistics and, where `bank_gates` is
    /// set, as a hard constraint.
    pub bank: BankKind,
    pub bank_gates: bool,
    pub properties: &'static [&'static str],
    /// Hard SAscore ceiling, inclusive.
    pub sascore_max: Option<f64>,
    /// Reaction-energy outliers are penalized when an envelope is supplied.
    pub uses_envelope: bool,
    pub penalty_fitness: f64,
    pub population: usize,
    pub iterations: usize,
    /// Dataset column that ranks reference molecules for seeding, with the
    /// sign that turns it into a maximization.
    pub seed_column: (&'static str, f64),
}

const OPV_PROPS: &[&str] = &["homo_ev", "lumo_ev", "sascore"];
const EMITTER_PROPS: &[&str] = &["st_gap_ev", "osc_strength", "vee_ev", "sascore"];
const DOCKING_FILTER_PROPS: &[&str] = &["sascore", "qed", "logp", "tpsa", "alerts_pass"];
const REACTIVITY_PROPS: &[&str] = &["dE_act_kcal", "dE_rxn_kcal", "sascore"];

macro_rules! task {
    ($kind:ident, $name:expr, $bank:ident, $gates:expr, $props:expr, $sa:expr, $env:expr, $pop:expr, $it:expr, $col:expr) => {
        TaskDefinition {
            kind: TaskKind::$kind,
            name: $name,
            bank: BankKind::$bank,
            bank_gates: $gates,
            properties: $props,
            sascore_max: $sa,
            uses_envelope: $env,
            penalty_fitness: PENALTY_FITNESS,
            population: $pop,
            iterations: $it,
            seed_column: $col,
        }
    };
}

pub fn all_tasks() -> Vec<TaskDefinition> {
    alloc::vec![
        task!(PcePcbmSas, "pce_pcbm_sas", Emitter, false, OPV_PROPS, None, false, 500, 10, ("pce_pcbm_sas", 1.0)),
        task!(PcePcdtbtSas, "pce_pcdtbt_sas", Emitter, false, OPV_PROPS, None, false, 500, 10, ("pce_pcdtbt_sas", 1.0)),
        task!(EmitterSingletTriplet, "emitter_singlet_triplet", Emitter, false, EMITTER_PROPS, Some(4.5), false, 500, 10, ("st_gap_ev", -1.0)),
        task!(EmitterOscillator, "emitter_oscillator", Emitter, false, EMITTER_PROPS, Some(4.5), false, 500, 10, ("osc_strength", 1.0)),
        task!(EmitterCombined, "emitter_combined", Emitter, false, EMITTER_PROPS, Some(4.5), false, 500, 10, ("emitter_combined", 1.0)),
        task!(Docking1syh, "docking_1syh", Docking, true, &["docking_1syh", "sascore", "qed", "logp", "tpsa", "alerts_pass"], None, false, 500, 10, ("docking_1syh", -1.0)),
        task!(Docking6y2f, "docking_6y2f", Docking, true, &["docking_6y2f", "sascore", "qed", "logp", "tpsa", "alerts_pass"], None, false, 500, 10, ("docking_6y2f", -1.0)),
        task!(Docking4lde, "docking_4lde", Docking, true, &["docking_4lde", "sascore", "qed", "logp", "tpsa", "alerts_pass"], None, false, 500, 10, ("docking_4lde", -1.0)),
        task!(ReactivityActivation, "reactivity_activation", Reactivity, true, REACTIVITY_PROPS, None, true, 100, 50, ("dE_act_kcal", -1.0)),
        task!(ReactivityReaction, "reactivity_reaction", Reactivity, true, REACTIVITY_PROPS, None, true, 100, 50, ("dE_rxn_kcal", -1.0)),
        task!(ReactivitySum, "reactivity_sum", Reactivity, true, REACTIVITY_PROPS, Some(6.0), true, 100, 50, ("reactivity_sum", 1.0)),
        task!(ReactivityDifference, "reactivity_difference", Reactivity, true, REACTIVITY_PROPS, Some(6.0), true, 100, 50, ("reactivity_difference", 1.0)),
    ]
}

pub fn task_by_name(name: &str) -> Option<TaskDefinition> {
    all_tasks().into_iter().find(|t| t.name == name)
}

/// Frozen configuration shared by all task evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskContext {
    pub scharber: ScharberConfig,
    pub envelope: Option<OutlierEnvelope>,
    pub tpsa_mode: TpsaMode,
    docking: FilterBank,
    emitter: FilterBank,
    reactivity: FilterBank,
}

impl TaskContext {
    pub fn new(scharber: ScharberConfig, envelope: Option<OutlierEnvelope>, tpsa_mode: TpsaMode) -> TaskContext {
        TaskContext {
            scharber,
            envelope,
            tpsa_mode,
            docking: docking_bank(tpsa_mode),
            emitter: emitter_bank(),
            reactivity: reactivity_bank(),
        }
    }

    pub fn bank(&self, kind: BankKind) -> &FilterBank {
        match kind {
            BankKind::Docking => &self.docking,
            BankKind::Emitter => &self.emitter,
            BankKind::Reactivity => &self.reactivity,
        }
    }

    /// Replaces a bank, e.g. with a user-supplied file.
    pub fn set_bank(&mut self, kind: BankKind, bank: FilterBank) {
        match kind {
            BankKind::Docking => self.docking = bank,
            BankKind::Emitter => self.emitter = bank,
            BankKind::Reactivity => self.reactivity = bank,
        }
    }
}

fn get(props: &PropertyMap, name: &str) -> Result<f64, ObjectiveError> {
    let q = props
        .get(name)
        .ok_or_else(|| ObjectiveError::MissingProperty(name.to_string()))?;
    let expected = property_unit(name).unwrap_or("dimensionless");
    if q.unit != expected {
        return Err(ObjectiveError::UnitMismatch {
            name: name.to_string(),
            expected,
            got: q.unit.clone(),
        });
    }
    Ok(q.value)
}

/// Whether `m` passes the task's bank given provider values.
pub fn passes_bank(
    m: &Molecule,
    task: &TaskDefinition,
    props: &PropertyMap,
    ctx: &TaskContext,
) -> Result<bool, ObjectiveError> {
    let bank = ctx.bank(task.bank);
    let mut values = BTreeMap::new();
    for name in bank.external_descriptors() {
        values.insert(name.to_string(), get(props, name)?);
    }
    Ok(apply_filter_bank(m, bank, &values)?.pass)
}

/// Canonical maximization fitness. Constraint failures return the task's
/// penalty; only missing or mistagged inputs are errors.
pub fn evaluate_task(
    m: &Molecule,
    task: &TaskDefinition,
    props: &PropertyMap,
    ctx: &TaskContext,
) -> Result<f64, ObjectiveError> {
    if task.bank_gates && !passes_bank(m, task, props, ctx)? {
        return Ok(task.penalty_fitness);
    }
    if let Some(max) = task.sascore_max {
        if get(props, "sascore")? > max {
            return Ok(task.penalty_fitness);
        }
    }
    use TaskKind::*;
    let fitness = match task.kind {
        PcePcbmSas | PcePcdtbtSas => {
            let raw = FrontierEnergies::new(get(props, "homo_ev")?, get(props, "lumo_ev")?, 0.0);
            let e = calibrate(&raw, &ctx.scharber);
            let mode = if task.kind == PcePcbmSas {
                DeviceMode::DonorPcbm
            } else {
                DeviceMode::AcceptorPcdtbt
            };
            scharber_pce(&e, mode, &ctx.scharber) - get(props, "sascore")?
        }
        EmitterSingletTriplet => -get(props, "st_gap_ev")?,
        EmitterOscillator => get(props, "osc_strength")?,
        EmitterCombined => {
            get(props, "osc_strength")? - get(props, "st_gap_ev")? - (get(props, "vee_ev")? - 3.2).abs()
        }
        Docking1syh => -get(props, "docking_1syh")?,
        Docking6y2f => -get(props, "docking_6y2f")?,
        Docking4lde => -get(props, "docking_4lde")?,
        ReactivityActivation | ReactivityReaction | ReactivitySum | ReactivityDifference => {
            let act = get(props, "dE_act_kcal")?;
            let rxn = get(props, "dE_rxn_kcal")?;
            if let (true, Some(env)) = (task.uses_envelope, &ctx.envelope) {
                if env.is_outlier([rxn, act]) {
                    return Ok(task.penalty_fitness);
                }
            }
            match task.kind {
                ReactivityActivation => -act,
                ReactivityReaction => -rxn,
                ReactivitySum => -(act + rxn),
                _ => -(-act + rxn),
            }
        }
    };
    Ok(fitness)
}

/// Property names a provider must supply for `task`.
pub fn required_properties(task: &TaskDefinition) -> Vec<&'static str> {
    let mut v: Vec<&'static str> = task.properties.to_vec();
    if task.bank == BankKind::Docking {
        for p in DOCKING_FILTER_PROPS {
            if !v.contains(p) {
                v.push(p);
            }
        }
    }
    v
}
