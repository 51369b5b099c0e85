//! Structured verification reports: every check is an assertion recording
//! both sides, the tolerance and the outcome.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs + tol * |rhs|`
    Le,
    /// `lhs >= rhs - tol * |rhs|`
    Ge,
    /// `|lhs - rhs| <= tol * |rhs|`
    Close,
    /// `|lhs - rhs| <= tol`
    CloseAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub tag: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn new(name: &str, tag: &str, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::Le => lhs <= rhs + tolerance * rhs.abs(),
            Relation::Ge => lhs >= rhs - tolerance * rhs.abs(),
            Relation::Close => (lhs - rhs).abs() <= tolerance * rhs.abs(),
            Relation::CloseAbs => (lhs - rhs).abs() <= tolerance,
        };
        Assertion {
            name: name.to_string(),
            tag: tag.to_string(),
            relation,
            lhs,
            rhs,
            tolerance,
            passed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub digest: String,
    pub seeds: Vec<u64>,
    pub values: BTreeMap<String, f64>,
    pub vectors: BTreeMap<String, Vec<f64>>,
    pub flags: BTreeMap<String, bool>,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(scenario: &str) -> Self {
        Report {
            scenario: scenario.to_string(),
            ..Default::default()
        }
    }

    pub fn value(&mut self, key: &str, v: f64) -> &mut Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn vector(&mut self, key: &str, v: &[f64]) -> &mut Self {
        self.vectors.insert(key.to_string(), v.to_vec());
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.flags.insert(key.to_string(), v);
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) -> &mut Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn assert(&mut self, a: Assertion) -> bool {
        let ok = a.passed;
        self.assertions.push(a);
        ok
    }

    pub fn check(&mut self, name: &str, tag: &str, relation: Relation, lhs: f64, rhs: f64, tol: f64) -> bool {
        self.assert(Assertion::new(name, tag, relation, lhs, rhs, tol))
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    /// Merge another report's content under a key prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        for (k, v) in other.values {
            self.values.insert(key(&k), v);
        }
        for (k, v) in other.vectors {
            self.vectors.insert(key(&k), v);
        }
        for (k, v) in other.flags {
            self.flags.insert(key(&k), v);
        }
        for mut a in other.assertions {
            a.name = key(&a.name);
            self.assertions.push(a);
        }
        for s in other.seeds {
            if !self.seeds.contains(&s) {
                self.seeds.push(s);
            }
        }
        self.warnings.extend(other.warnings);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat `(section, key, value...)` rows for tabular output.
    pub fn rows(&self) -> Vec<[String; 7]> {
        let mut rows = Vec::new();
        let blank = String::new;
        for a in &self.assertions {
            rows.push([
                "assertion".into(),
                a.name.clone(),
                a.tag.clone(),
                fmt(a.lhs),
                fmt(a.rhs),
                fmt(a.tolerance),
                a.passed.to_string(),
            ]);
        }
        for (k, v) in &self.values {
            rows.push(["value".into(), k.clone(), blank(), fmt(*v), blank(), blank(), blank()]);
        }
        for (k, v) in &self.vectors {
            let joined = v.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(" ");
            rows.push(["vector".into(), k.clone(), blank(), joined, blank(), blank(), blank()]);
        }
        for (k, v) in &self.flags {
            rows.push(["flag".into(), k.clone(), blank(), v.to_string(), blank(), blank(), blank()]);
        }
        for w in &self.warnings {
            rows.push(["warning".into(), w.clone(), blank(), blank(), blank(), blank(), blank()]);
        }
        rows
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Assertion::new("a", "t", Relation::Le, 1.0, 1.0, 0.0).passed);
        assert!(!Assertion::new("a", "t", Relation::Le, 1.02, 1.0, 0.01).passed);
        assert!(Assertion::new("a", "t", Relation::Ge, 0.995, 1.0, 0.01).passed);
        assert!(Assertion::new("a", "t", Relation::Close, 2.001, 2.0, 1e-3).passed);
        assert!(!Assertion::new("a", "t", Relation::CloseAbs, 1e-3, 0.0, 1e-4).passed);
        assert!(!Assertion::new("a", "t", Relation::Le, f64::NAN, 1.0, 0.1).passed);
    }
}
