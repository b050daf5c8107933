//! Named inequality checks with both sides materialized.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Relation asserted, e.g. `observed >= bound`.
    pub relation: String,
    pub bound: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: &str, bound: impl ToString, observed: impl ToString, pass: bool) -> Self {
        Check { name: name.into(), relation: relation.into(), bound: bound.to_string(), observed: observed.to_string(), pass }
    }

    /// `observed >= bound`.
    pub fn at_least<T: PartialOrd + ToString>(name: impl Into<String>, observed: T, bound: T) -> Self {
        let pass = observed >= bound;
        Check::new(name, "observed >= bound", bound.to_string(), observed.to_string(), pass)
    }

    /// `observed <= bound`.
    pub fn at_most<T: PartialOrd + ToString>(name: impl Into<String>, observed: T, bound: T) -> Self {
        let pass = observed <= bound;
        Check::new(name, "observed <= bound", bound.to_string(), observed.to_string(), pass)
    }

    pub fn holds(name: impl Into<String>, what: &str, pass: bool) -> Self {
        Check::new(name, what, "true", pass, pass)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
