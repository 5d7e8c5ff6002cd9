//! Positions of subterms, used by type errors and checker diagnostics.

use std::fmt;

/// A path from the root of a term to a subterm, as child indices.
///
/// `Comp` children are `0` and `1`; `First` and `Loop` bodies are `0`.
/// The root is the empty path and prints as `/`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermPath(Vec<usize>);

impl TermPath {
    pub fn root() -> Self {
        TermPath(Vec::new())
    }

    /// The path extended by one child index.
    pub fn child(&self, index: usize) -> Self {
        let mut segs = self.0.clone();
        segs.push(index);
        TermPath(segs)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "/");
        }
        for seg in &self.0 {
            write!(f, "/{seg}")?;
        }
        Ok(())
    }
}
