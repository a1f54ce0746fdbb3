use std::collections::HashSet;

use super::{Result, SimError};

/// Ordered, labelled qubit register.
///
/// Qubit 0 is the most significant bit of a basis index, so the basis index
/// of a classical bit string is its big-endian integer value.
#[derive(Clone, Debug)]
pub struct QubitRegister {
    labels: Vec<String>,
}

impl QubitRegister {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(SimError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Anonymous register of `width` qubits labelled `q0..`.
    pub fn anonymous(width: usize) -> Result<Self> {
        Self::new((0..width).map(|i| format!("q{i}")))
    }

    pub fn width(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(QubitRegister::new(["a", "b", "a"]).is_err());
        assert!(QubitRegister::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn lookup_by_label() {
        let r = QubitRegister::new(["a0", "a1", "bus"]).unwrap();
        assert_eq!(r.width(), 3);
        assert_eq!(r.dim(), 8);
        assert_eq!(r.index_of("bus"), Some(2));
        assert_eq!(r.index_of("nope"), None);
    }
}
