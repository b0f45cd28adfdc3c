//! Filter banks: versioned text files of forbidden/required patterns and
//! scalar descriptor rules.
//!
//! ```text
//! # comment
//! bank <name> <version>
//! forbid <pattern> [label]
//! require <pattern> [label]
//! rule <descriptor> <op> <threshold>     op: < <= > >= == !=
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::query::{compile_pattern, PatternGraph};
use super::{has_match, PatternError};
use crate::descriptors::local_descriptor;
use crate::mol::Molecule;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("descriptor '{0}' is neither supplied nor computable locally")]
    MissingDescriptor(String),
    #[error("bank line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("bank line {line}: {source}")]
    Pattern { line: usize, source: PatternError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Ne => value != threshold,
        }
    }

    pub fn negated(self) -> Comparator {
        match self {
            Comparator::Lt => Comparator::Ge,
            Comparator::Le => Comparator::Gt,
            Comparator::Gt => Comparator::Le,
            Comparator::Ge => Comparator::Lt,
            Comparator::Eq => Comparator::Ne,
            Comparator::Ne => Comparator::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }

    fn parse(s: &str) -> Option<Comparator> {
        Some(match s {
            "<" => Comparator::Lt,
            "<=" => Comparator::Le,
            ">" => Comparator::Gt,
            ">=" => Comparator::Ge,
            "==" => Comparator::Eq,
            "!=" => Comparator::Ne,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRule {
    pub descriptor: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl fmt::Display for ScalarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.descriptor, self.comparator.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Forbid { label: String, pattern: PatternGraph },
    Require { label: String, pattern: PatternGraph },
    Scalar(ScalarRule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub name: String,
    pub version: u32,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerdict {
    pub pass: bool,
    /// One entry per violated rule, in bank order.
    pub violations: Vec<String>,
}

/// Direction of the polar surface area rule in the docking bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TpsaMode {
    /// `tpsa > 140`, the direction printed in the source text.
    #[default]
    AsWritten,
    /// `tpsa <= 140`, the usual drug-likeness direction.
    Inverted,
}

impl FilterBank {
    pub fn empty(name: &str) -> FilterBank {
        FilterBank {
            name: name.to_string(),
            version: 1,
            rules: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<FilterBank, FilterError> {
        let mut bank = FilterBank::empty("unnamed");
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |message: &str| FilterError::Format {
                line: line_no,
                message: message.to_string(),
            };
            let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match keyword {
                "bank" => {
                    let mut parts = rest.split_whitespace();
                    bank.name = parts.next().ok_or_else(|| fail("bank needs a name"))?.to_string();
                    bank.version = match parts.next() {
                        Some(v) => v.parse().map_err(|_| fail("bad version"))?,
                        None => 1,
                    };
                }
                "forbid" | "require" => {
                    let (pat, label) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    if pat.is_empty() {
                        return Err(fail("missing pattern"));
                    }
                    let pattern = compile_pattern(pat).map_err(|source| FilterError::Pattern {
                        line: line_no,
                        source,
                    })?;
                    let label = match label.trim() {
                        "" => pat.to_string(),
                        l => l.to_string(),
                    };
                    bank.rules.push(if keyword == "forbid" {
                        Rule::Forbid { label, pattern }
                    } else {
                        Rule::Require { label, pattern }
                    });
                }
                "rule" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let [descriptor, op, threshold] = parts[..] else {
                        return Err(fail("rule needs: descriptor op threshold"));
                    };
                    bank.rules.push(Rule::Scalar(ScalarRule {
                        descriptor: descriptor.to_string(),
                        comparator: Comparator::parse(op).ok_or_else(|| fail("unknown comparator"))?,
                        threshold: threshold.parse().map_err(|_| fail("bad threshold"))?,
                    }));
                }
                _ => return Err(fail("unknown keyword")),
            }
        }
        Ok(bank)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("bank {} {}\n", self.name, self.version);
        for r in &self.rules {
            let line = match r {
                Rule::Forbid { label, pattern } => line_for("forbid", label, pattern),
                Rule::Require { label, pattern } => line_for("require", label, pattern),
                Rule::Scalar(s) => format!("rule {}", s),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn forbidden_patterns(&self) -> impl Iterator<Item = &PatternGraph> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Forbid { pattern, .. } => Some(pattern),
            _ => None,
        })
    }

    pub fn required_patterns(&self) -> impl Iterator<Item = &PatternGraph> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Require { pattern, .. } => Some(pattern),
            _ => None,
        })
    }

    pub fn scalar_rules(&self) -> impl Iterator<Item = &ScalarRule> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Scalar(s) => Some(s),
            _ => None,
        })
    }

    /// Descriptor names that must come from outside the core.
    pub fn external_descriptors(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .scalar_rules()
            .map(|s| s.descriptor.as_str())
            .filter(|d| !crate::descriptors::is_local_descriptor(d))
            .collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    /// Replaces the comparator of every rule on `descriptor` by its negation.
    pub fn negate_rule(&mut self, descriptor: &str) {
        for r in &mut self.rules {
            if let Rule::Scalar(s) = r {
                if s.descriptor == descriptor {
                    s.comparator = s.comparator.negated();
                }
            }
        }
    }
}

fn line_for(keyword: &str, label: &str, pattern: &PatternGraph) -> String {
    if label == pattern.source() {
        format!("{} {}", keyword, label)
    } else {
        format!("{} {} {}", keyword, pattern.source(), label)
    }
}

pub fn docking_bank(mode: TpsaMode) -> FilterBank {
    let mut bank = FilterBank::parse(include_str!("banks/docking.bank")).expect("shipped bank parses");
    if mode == TpsaMode::Inverted {
        bank.negate_rule("tpsa");
    }
    bank
}

pub fn emitter_bank() -> FilterBank {
    FilterBank::parse(include_str!("banks/emitter.bank")).expect("shipped bank parses")
}

pub fn reactivity_bank() -> FilterBank {
    FilterBank::parse(include_str!("banks/reactivity.bank")).expect("shipped bank parses")
}

/// Evaluates every rule of `bank`. Scalar rules read `descriptor_values`
/// first and fall back to descriptors computable from the graph.
pub fn apply_filter_bank(
    m: &Molecule,
    bank: &FilterBank,
    descriptor_values: &BTreeMap<String, f64>,
) -> Result<FilterVerdict, FilterError> {
    let mut violations = Vec::new();
    for rule in &bank.rules {
        match rule {
            Rule::Forbid { label, pattern } => {
                if has_match(m, pattern) {
                    violations.push(format!("forbidden substructure {}", label));
                }
            }
            Rule::Require { label, pattern } => {
                if !has_match(m, pattern) {
                    violations.push(format!("missing required {}", label));
                }
            }
            Rule::Scalar(s) => {
                let value = match descriptor_values.get(&s.descriptor) {
                    Some(&v) => v,
                    None => local_descriptor(m, &s.descriptor)
                        .ok_or_else(|| FilterError::MissingDescriptor(s.descriptor.clone()))?,
                };
                if !s.comparator.holds(value, s.threshold) {
                    violations.push(format!("{} (value {})", s, value));
                }
            }
        }
    }
    Ok(FilterVerdict {
        pass: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    #[test]
    fn shipped_banks_load() {
        let d = docking_bank(TpsaMode::AsWritten);
        assert_eq!(d.forbidden_patterns().count(), 28);
        assert_eq!(d.external_descriptors(), ["alerts_pass", "logp", "qed", "sascore", "tpsa"]);
        let inv = docking_bank(TpsaMode::Inverted);
        let tpsa = inv.scalar_rules().find(|s| s.descriptor == "tpsa").unwrap();
        assert_eq!(tpsa.comparator, Comparator::Le);
        assert_eq!(emitter_bank().forbidden_patterns().count(), 13);
        assert_eq!(emitter_bank().scalar_rules().count(), 10);
        assert_eq!(reactivity_bank().forbidden_patterns().count(), 23);
        assert_eq!(reactivity_bank().required_patterns().count(), 1);
        assert!(emitter_bank().external_descriptors().is_empty());
    }

    #[test]
    fn text_round_trip() {
        for bank in [docking_bank(TpsaMode::AsWritten), emitter_bank(), reactivity_bank()] {
            assert_eq!(FilterBank::parse(&bank.to_text()).unwrap(), bank);
        }
    }

    #[test]
    fn verdicts() {
        let none = BTreeMap::new();
        let benzene = parse_smiles("c1ccccc1").unwrap();
        let v = apply_filter_bank(&benzene, &FilterBank::empty("e"), &none).unwrap();
        assert!(v.pass);
        let v = apply_filter_bank(&benzene, &emitter_bank(), &none).unwrap();
        assert!(v.pass, "{:?}", v.violations);
        let v = apply_filter_bank(&benzene, &reactivity_bank(), &none).unwrap();
        assert!(!v.pass);
        assert!(v.violations.iter().any(|s| s.contains("core motif")));
        let err = apply_filter_bank(&benzene, &docking_bank(TpsaMode::AsWritten), &none);
        assert!(matches!(err, Err(FilterError::MissingDescriptor(_))));
    }

    #[test]
    fn parse_errors() {
        assert!(FilterBank::parse("frobnicate x").is_err());
        assert!(FilterBank::parse("rule tpsa >> 3").is_err());
        assert!(matches!(
            FilterBank::parse("forbid [C@H]"),
            Err(FilterError::Pattern { line: 1, .. })
        ));
    }
}
