#![allow(dead_code)]

use std::path::PathBuf;

use tartarus_bench::dataset::{load_dataset, Dataset};
use tartarus_bench::params::Params;
use tartarus_bench::spectrum::am15g;
use tartarus_bench::NullProvider;
use tartarus_core::objectives::{fit_outlier_envelope, TaskContext, PAPER_CONTAMINATION};
use tartarus_core::pattern::TpsaMode;

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn fixture() -> Dataset {
    load_dataset(&manifest_path("tests/fixtures/reactivity_fixture.tsv")).unwrap()
}

pub fn stub_command(args: &str) -> String {
    format!("python3 {} {args}", manifest_path("tests/support/stub_provider.py").display())
}

pub fn envelope_points(d: &Dataset) -> Vec<[f64; 2]> {
    let rxn = d.column_index("dE_rxn_kcal").unwrap();
    let act = d.column_index("dE_act_kcal").unwrap();
    d.entries.iter().map(|e| [e.values[rxn], e.values[act]]).collect()
}

/// Shipped-spectrum Scharber fit plus an envelope fitted on `d`.
pub fn reactivity_context(d: &Dataset) -> TaskContext {
    let params = Params::from_spectrum(&am15g()).unwrap();
    let env = fit_outlier_envelope(&envelope_points(d), PAPER_CONTAMINATION).unwrap();
    TaskContext::new(params.scharber_config(), Some(env), TpsaMode::AsWritten)
}

/// Serves exactly the dataset's own values; anything else is an error.
pub fn fixture_provider(d: &Dataset) -> NullProvider {
    let mut p = NullProvider::new();
    for (i, e) in d.entries.iter().enumerate() {
        p = p.with_fixture(&e.canonical_key, d.property_map(i)).unwrap();
    }
    p
}

/// Wraps a provider and counts the calls that reach it.
pub struct Counting<P> {
    pub inner: P,
    pub calls: std::sync::atomic::AtomicUsize,
}

impl<P> Counting<P> {
    pub fn new(inner: P) -> Counting<P> {
        Counting { inner, calls: Default::default() }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(std::sync::atomic::Ordering::SeqCst)
    }
}

impl<P: tartarus_bench::Provider> tartarus_bench::Provider for Counting<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn compute(&self, smiles: &str, props: &[String]) -> tartarus_bench::ProviderOutput {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        self.inner.compute(smiles, props)
    }
}
