//! Ordered, labelled tensor-factor layouts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled subsystems.
///
/// Matrices over a layout are flattened row-major in list order: the first
/// subsystem is the most significant tensor index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLayout {
    systems: Vec<Subsystem>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let systems: Vec<Subsystem> = systems
            .into_iter()
            .map(|(label, dim)| Subsystem {
                label: label.into(),
                dim,
            })
            .collect();
        Self::from_subsystems(systems)
    }

    pub fn from_subsystems(systems: Vec<Subsystem>) -> Result<Self> {
        for (i, s) in systems.iter().enumerate() {
            if s.label.is_empty() {
                return Err(Error::InvariantViolation("empty subsystem label".into()));
            }
            if s.dim == 0 {
                return Err(Error::InvariantViolation(format!(
                    "subsystem {} has dimension 0",
                    s.label
                )));
            }
            if systems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::LabelClash(s.label.clone()));
            }
        }
        Ok(Self { systems })
    }

    /// Single subsystem layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.systems.iter().any(|s| s.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownSystem(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.systems[self.position(label)?].dim)
    }

    /// Positions of `labels`, sorted into layout order, rejecting repeats.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if pos.contains(&p) {
                return Err(Error::LabelClash(l.as_ref().to_string()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Product of the dimensions of `labels`.
    pub fn dim_of_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        Ok(self
            .positions(labels)?
            .iter()
            .map(|&p| self.systems[p].dim)
            .product())
    }

    /// Sub-layout at the given positions (kept in the order given).
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            systems: positions.iter().map(|&p| self.systems[p].clone()).collect(),
        }
    }

    /// Layout concatenation; fails if any label appears in both.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        Self::from_subsystems(systems)
    }

    /// Replace the subsystem `label` in place by `(new_label, dim)`.
    pub fn replace(&self, label: &str, new_label: &str, dim: usize) -> Result<Self> {
        let p = self.position(label)?;
        let mut systems = self.systems.clone();
        systems[p] = Subsystem {
            label: new_label.to_string(),
            dim,
        };
        Self::from_subsystems(systems)
    }

    pub fn with(&self, label: &str, dim: usize) -> Result<Self> {
        self.concat(&Self::single(label, dim)?)
    }

    pub fn relabel(&self, label: &str, new_label: &str) -> Result<Self> {
        let dim = self.dim_of(label)?;
        self.replace(label, new_label, dim)
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .systems
            .iter()
            .map(|s| format!("{}:{}", s.label, s.dim))
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}
