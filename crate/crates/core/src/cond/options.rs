//! Configuration options and assignments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Value space of a configuration option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Exactly ON and OFF.
    Boolean,
    /// A fixed, duplicate-free set of string values.
    Enumerated { values: Vec<String> },
    /// Unconstrained (environment variables, free-form cache entries).
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionOrigin {
    OptionCommand,
    CacheOverride,
    Environment,
}

/// A user-overridable build-time setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigOption {
    pub name: String,
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub default: Option<String>,
    pub origin: OptionOrigin,
}

impl ConfigOption {
    pub fn boolean(name: impl Into<String>, default: Option<&str>, origin: OptionOrigin) -> Self {
        ConfigOption {
            name: name.into(),
            domain: Domain::Boolean,
            default: default.map(str::to_string),
            origin,
        }
    }

    pub fn enumerated(
        name: impl Into<String>,
        values: impl IntoIterator<Item = String>,
        default: Option<&str>,
        origin: OptionOrigin,
    ) -> Self {
        let mut seen = Vec::new();
        for v in values {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        assert!(!seen.is_empty(), "enumerated domain must be non-empty");
        ConfigOption {
            name: name.into(),
            domain: Domain::Enumerated { values: seen },
            default: default.map(str::to_string),
            origin,
        }
    }

    pub fn opaque(name: impl Into<String>, default: Option<&str>, origin: OptionOrigin) -> Self {
        ConfigOption {
            name: name.into(),
            domain: Domain::Opaque,
            default: default.map(str::to_string),
            origin,
        }
    }

    /// The values enumeration walks for this option, if the domain is finite.
    pub fn enumerable_values(&self) -> Option<Vec<String>> {
        match &self.domain {
            Domain::Boolean => Some(vec!["ON".into(), "OFF".into()]),
            Domain::Enumerated { values } => Some(values.clone()),
            Domain::Opaque => None,
        }
    }
}

/// CMake if-truthiness of a value string. False constants are OFF, NO,
/// FALSE, N, IGNORE, NOTFOUND, 0, the empty string, and anything ending in
/// `-NOTFOUND` (all case-insensitive); everything else is true.
pub fn cmake_truthy(value: &str) -> bool {
    if value.is_empty() {
        return false;
    }
    let upper = value.to_ascii_uppercase();
    !matches!(
        upper.as_str(),
        "OFF" | "NO" | "FALSE" | "N" | "IGNORE" | "NOTFOUND" | "0"
    ) && !upper.ends_with("-NOTFOUND")
}

/// Resolution of one option under an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptionValue {
    Set(String),
    /// The assignment is total and does not determine this option: the
    /// option is undefined (falsy, equal to nothing, not DEFINED).
    Undefined,
    /// The assignment is partial and silent about this option.
    Unknown,
}

/// A (possibly partial) assignment of configuration options to values.
///
/// When `total` is set, options without an explicit value fall back to their
/// declared defaults; anything still unmapped is treated as undefined rather
/// than unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationAssignment {
    pub values: BTreeMap<String, String>,
    pub total: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    defaults: BTreeMap<String, String>,
}

impl ConfigurationAssignment {
    pub fn empty() -> Self {
        ConfigurationAssignment {
            values: BTreeMap::new(),
            total: false,
            defaults: BTreeMap::new(),
        }
    }

    /// A partial assignment: unmapped options evaluate to unknown.
    pub fn partial(values: impl IntoIterator<Item = (String, String)>) -> Self {
        ConfigurationAssignment {
            values: values.into_iter().collect(),
            total: false,
            defaults: BTreeMap::new(),
        }
    }

    /// A total-by-default assignment: unmapped options take their declared
    /// default from `options`.
    pub fn total(
        values: impl IntoIterator<Item = (String, String)>,
        options: &[ConfigOption],
    ) -> Self {
        let defaults = options
            .iter()
            .filter_map(|o| o.default.clone().map(|d| (o.name.clone(), d)))
            .collect();
        ConfigurationAssignment {
            values: values.into_iter().collect(),
            total: true,
            defaults,
        }
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.values.insert(name.into(), value.into());
    }

    /// The effective value of an option under this assignment.
    pub fn resolve(&self, name: &str) -> OptionValue {
        if let Some(v) = self.values.get(name) {
            return OptionValue::Set(v.clone());
        }
        if self.total {
            return match self.defaults.get(name) {
                Some(d) => OptionValue::Set(d.clone()),
                None => OptionValue::Undefined,
            };
        }
        OptionValue::Unknown
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty() && !self.total
    }

    /// Out-of-domain values, reported as (option, value) pairs.
    pub fn domain_violations(&self, options: &[ConfigOption]) -> Vec<(String, String)> {
        let by_name: BTreeMap<&str, &ConfigOption> =
            options.iter().map(|o| (o.name.as_str(), o)).collect();
        let mut out = Vec::new();
        for (name, value) in &self.values {
            if let Some(opt) = by_name.get(name.as_str()) {
                let ok = match &opt.domain {
                    Domain::Boolean => value == "ON" || value == "OFF",
                    Domain::Enumerated { values } => values.contains(value),
                    Domain::Opaque => true,
                };
                if !ok {
                    out.push((name.clone(), value.clone()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truthiness_true_forms() {
        for v in ["ON", "on", "TRUE", "YES", "Y", "1", "2", "anything", "0.0"] {
            assert!(cmake_truthy(v), "{v} should be truthy");
        }
    }

    #[test]
    fn truthiness_false_forms() {
        for v in [
            "OFF", "off", "FALSE", "NO", "N", "0", "", "IGNORE", "NOTFOUND", "CURL-NOTFOUND",
            "curl-notfound",
        ] {
            assert!(!cmake_truthy(v), "{v} should be falsy");
        }
    }

    #[test]
    fn partial_lookup() {
        let a = ConfigurationAssignment::partial([("A".to_string(), "1".to_string())]);
        assert_eq!(a.resolve("A"), OptionValue::Set("1".into()));
        assert_eq!(a.resolve("B"), OptionValue::Unknown);
    }

    #[test]
    fn total_lookup_falls_back_to_default_then_undefined() {
        let options = vec![
            ConfigOption::boolean("A", Some("ON"), OptionOrigin::OptionCommand),
            ConfigOption::opaque("B", None, OptionOrigin::Environment),
        ];
        let a = ConfigurationAssignment::total([], &options);
        assert_eq!(a.resolve("A"), OptionValue::Set("ON".into()));
        assert_eq!(a.resolve("B"), OptionValue::Undefined);
        assert_eq!(a.resolve("UNHEARD_OF"), OptionValue::Undefined);
    }

    #[test]
    fn domain_violation_detection() {
        let options = vec![ConfigOption::boolean("A", None, OptionOrigin::OptionCommand)];
        let a = ConfigurationAssignment::partial([("A".to_string(), "MAYBE".to_string())]);
        assert_eq!(
            a.domain_violations(&options),
            vec![("A".to_string(), "MAYBE".to_string())]
        );
    }
}
