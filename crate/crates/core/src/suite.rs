//! Seeded random measure suites for the square/ball comparison.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkers::{equivalence_report, EquivalenceReport};
use crate::error::{invalid, Result};
use crate::measure::{Atom, PlanarMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub measures: usize,
    pub atoms: usize,
    /// Atom radii are `1 - 2^{-k}` with `k` uniform in `1..=max_level`.
    pub max_level: u32,
    pub weight_range: (f64, f64),
    pub beta: f64,
    pub depth: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            measures: 100,
            atoms: 20,
            max_level: 10,
            weight_range: (0.5, 2.0),
            beta: 1.5,
            depth: 12,
        }
    }
}

impl SuiteConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Measures of the suite, generated from the seed alone.
pub fn random_measures(config: &SuiteConfig) -> Result<Vec<PlanarMeasure>> {
    if config.max_level == 0 || config.atoms == 0 {
        return Err(invalid("suite", "needs at least one atom and one level"));
    }
    let (lo, hi) = config.weight_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(invalid("weight_range", format!("[{lo}, {hi}] is not a positive range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.measures)
        .map(|_| {
            let atoms = (0..config.atoms)
                .map(|_| {
                    let k = rng.gen_range(1..=config.max_level);
                    let r = 1.0 - (-(k as f64)).exp2();
                    let t = rng.gen::<f64>() * TAU;
                    Atom::new(Complex64::from_polar(r, t), rng.gen_range(lo..=hi))
                })
                .collect();
            PlanarMeasure::atomic(atoms)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub config: SuiteConfig,
    pub reports: Vec<EquivalenceReport>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Smallest `K` with every ratio in `[1/K, K]`.
    pub bracket: f64,
}

pub fn run_equivalence_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    let measures = random_measures(config)?;
    let reports: Result<Vec<EquivalenceReport>> = measures
        .par_iter()
        .map(|mu| equivalence_report(mu, config.beta, config.depth))
        .collect();
    let reports = reports?;
    let min_ratio = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SuiteResult {
        config: *config,
        bracket: max_ratio.max(1.0 / min_ratio).max(1.0),
        reports,
        min_ratio,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_depend_only_on_seed() {
        let c = SuiteConfig {
            measures: 3,
            ..SuiteConfig::with_seed(7)
        };
        let a = random_measures(&c).unwrap();
        assert_eq!(a, random_measures(&c).unwrap());
        assert_ne!(a, random_measures(&SuiteConfig { seed: 8, ..c }).unwrap());
        for mu in &a {
            for atom in mu.mass_elements() {
                let k = -(1.0 - atom.point.norm()).log2();
                assert!((k - k.round()).abs() < 1e-9 && (1.0..=10.0).contains(&k.round()));
                assert!((0.5..=2.0).contains(&atom.weight));
            }
        }
    }

    #[test]
    fn small_suite_is_bracketed() {
        let c = SuiteConfig {
            measures: 8,
            depth: 8,
            max_level: 6,
            ..SuiteConfig::with_seed(3)
        };
        let r = run_equivalence_suite(&c).unwrap();
        assert_eq!(r.reports.len(), 8);
        assert!(r.bracket >= 1.0 && r.bracket <= 64.0, "{r:?}");
        assert!(random_measures(&SuiteConfig { atoms: 0, ..c }).is_err());
    }
}
