//! Shared fixtures for the criterion benchmarks.

use kerrcat::{coherent_state, DensityMatrix, TruncatedFockSpace, C64};

/// `|α⟩⟨α|` with real `α` on `dim` levels.
pub fn coherent_fixture(alpha: f64, dim: usize) -> DensityMatrix {
    let space = TruncatedFockSpace::new(dim).expect("bench dimension");
    coherent_state(C64::new(alpha, 0.0), space).projector()
}
