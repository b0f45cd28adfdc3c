//! Property providers: anything that turns a SMILES string into a map of
//! unit-tagged property values.

use std::collections::BTreeMap;
use std::time::Instant;

use tartarus_core::mol::{canonical_key, parse_smiles};
use tartarus_core::objectives::{property_unit, PropertyMap, Quantity};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderFailure {
    #[error("provider error: {0}")]
    Error(String),
    #[error("provider timed out after {0:.1} s")]
    Timeout(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderOutput {
    pub result: Result<PropertyMap, ProviderFailure>,
    pub wall_seconds: f64,
}

pub trait Provider: Send + Sync {
    fn name(&self) -> &str;

    /// Computes `props` for one canonical SMILES. Implementations must be
    /// safe to call from several threads at once.
    fn compute(&self, smiles: &str, props: &[String]) -> ProviderOutput;
}

/// Rejects values whose unit tag disagrees with the catalogue.
pub fn check_units(values: &PropertyMap) -> Result<(), ProviderFailure> {
    for (name, q) in values {
        if let Some(expected) = property_unit(name) {
            if q.unit != expected {
                return Err(ProviderFailure::Error(format!(
                    "property '{name}' tagged '{}', expected '{expected}'",
                    q.unit
                )));
            }
        }
    }
    Ok(())
}

/// Deterministic provider backed by fixture tables, for tests and dry runs.
/// Molecules without a fixture fall back to the configured defaults; a
/// property with neither is a provider error.
#[derive(Debug, Clone, Default)]
pub struct NullProvider {
    fixtures: BTreeMap<String, PropertyMap>,
    defaults: PropertyMap,
}

impl NullProvider {
    pub fn new() -> NullProvider {
        NullProvider::default()
    }

    /// Adds (or replaces) the fixture for `smiles`, keyed canonically.
    pub fn with_fixture(mut self, smiles: &str, values: PropertyMap) -> Result<NullProvider, String> {
        let key = fixture_key(smiles)?;
        self.fixtures.entry(key).or_default().extend(values);
        Ok(self)
    }

    pub fn with_default(mut self, name: &str, value: Quantity) -> NullProvider {
        self.defaults.insert(name.to_string(), value);
        self
    }

    pub fn fixture_count(&self) -> usize {
        self.fixtures.len()
    }
}

fn fixture_key(smiles: &str) -> Result<String, String> {
    parse_smiles(smiles)
        .map(|m| canonical_key(&m))
        .map_err(|e| format!("fixture '{smiles}': {e}"))
}

impl Provider for NullProvider {
    fn name(&self) -> &str {
        "null"
    }

    fn compute(&self, smiles: &str, props: &[String]) -> ProviderOutput {
        let start = Instant::now();
        let fixture = fixture_key(smiles).ok().and_then(|k| self.fixtures.get(&k));
        let mut out = PropertyMap::new();
        let mut missing = Vec::new();
        for p in props {
            match fixture.and_then(|f| f.get(p)).or_else(|| self.defaults.get(p)) {
                Some(q) => {
                    out.insert(p.clone(), q.clone());
                }
                None => missing.push(p.as_str()),
            }
        }
        let result = if missing.is_empty() {
            check_units(&out).map(|_| out)
        } else {
            Err(ProviderFailure::Error(format!(
                "no value for {} of {smiles}",
                missing.join(", ")
            )))
        };
        ProviderOutput {
            result,
            wall_seconds: start.elapsed().as_secs_f64().max(1e-9),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_then_defaults() {
        let mut f = PropertyMap::new();
        f.insert("qed".into(), Quantity::new(0.7, "dimensionless"));
        let p = NullProvider::new()
            .with_fixture("OCC", f)
            .unwrap()
            .with_default("qed", Quantity::new(0.1, "dimensionless"));
        let props = vec!["qed".to_string()];
        let hit = p.compute("CCO", &props);
        assert_eq!(hit.result.unwrap()["qed"].value, 0.7);
        assert!(hit.wall_seconds > 0.0);
        assert_eq!(p.compute("CC", &props).result.unwrap()["qed"].value, 0.1);
        assert!(p.compute("CC", &["logp".to_string()]).result.is_err());
    }

    #[test]
    fn unit_mismatch_is_an_error() {
        let p = NullProvider::new().with_default("homo_ev", Quantity::new(-5.0, "hartree"));
        assert!(matches!(
            p.compute("C", &["homo_ev".to_string()]).result,
            Err(ProviderFailure::Error(_))
        ));
    }
}
