//! Shared fixtures for the criterion benches.

use trispec_core::Signature;

/// Signatures used across benches, one per pattern family.
pub fn fixtures() -> Vec<Signature> {
    [(3, 3, 6), (4, 5, 6), (5, 5, 5), (2, 5, 7), (3, 4, 5)]
        .into_iter()
        .map(|(r, p, q)| Signature::finite(r, p, q).expect("hyperbolic"))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_hyperbolic() {
        assert_eq!(super::fixtures().len(), 5);
    }
}
