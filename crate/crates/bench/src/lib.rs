//! Fixtures shared by the benchmarks.

use carleson_core::measure::Atom;
use carleson_core::{Complex64, PlanarMeasure};

/// `n` atoms of unit weight on a spiral approaching the circle.
pub fn spiral_atoms(n: usize) -> PlanarMeasure {
    let atoms = (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            Atom::new(Complex64::from_polar(1.0 - 0.5f64.powf(1.0 + 10.0 * t), 40.0 * t), 1.0)
        })
        .collect();
    PlanarMeasure::atomic(atoms).expect("finite atoms")
}
