//! Fixtures shared by the benchmarks.

use qrf_core::{Codec, Complex64, ComplexMatrix, ScenarioId};

/// Scenarios benchmarked, smallest to largest joint space.
pub fn scenarios() -> Vec<ScenarioId> {
    vec![
        ScenarioId::PhaseReference { n_r: 8 },
        ScenarioId::DirectionIndicator { two_j_r: 8 },
        ScenarioId::CartesianFrame { j_r: 2 },
        ScenarioId::CartesianFrame { j_r: 4 },
    ]
}

pub fn codec(s: ScenarioId) -> Codec {
    s.codec().expect("benchmark scenario")
}

/// `|+><+|` in the system basis.
pub fn plus_state() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0))
}
