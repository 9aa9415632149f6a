//! Derivation certificates: ordered, replayable records of how a result was
//! obtained.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: String,
    pub claim: String,
    pub rule: String,
    /// Name of the published result the rule relies on.
    pub citation: String,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a step and returns its id for use as a later input.
    pub fn push(
        &mut self,
        id: &str,
        claim: impl Into<String>,
        rule: &str,
        citation: &str,
        inputs: &[&str],
    ) -> String {
        self.steps.push(Step {
            id: id.to_string(),
            claim: claim.into(),
            rule: rule.to_string(),
            citation: citation.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        });
        id.to_string()
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn append(&mut self, other: Certificate) {
        self.steps.extend(other.steps);
        self.notes.extend(other.notes);
    }

    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    /// Every input names an earlier step or an `input:` / `module:` datum.
    pub fn is_well_founded(&self) -> bool {
        self.steps.iter().enumerate().all(|(k, s)| {
            s.inputs.iter().all(|inp| {
                inp.starts_with("input:")
                    || inp.starts_with("module:")
                    || self.steps[..k].iter().any(|prev| &prev.id == inp)
            })
        })
    }
}
