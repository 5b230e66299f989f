//! Positive measures on the disc or on a domain, region queries, and
//! pullbacks through catalog maps.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{turn_of, CarlesonBox};
use crate::domain::{clipped_length, BoundaryCurve};
use crate::error::{invalid, Result};
use crate::maps::{ConformalMap, InverseSeeds};

pub const DEFAULT_INVERSION_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
/// Pulled-back atoms beyond this radius are flagged in the report.
pub const BOUNDARY_FLAG_RADIUS: f64 = 1.0 - 1e-6;

/// The exponent triple `(p, q, α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl EmbeddingParams {
    pub fn new(p: f64, q: f64, alpha: f64) -> Result<Self> {
        let params = Self { p, q, alpha };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(invalid("p", format!("{} is not a positive number", self.p)));
        }
        if !(self.q >= self.p && self.q.is_finite()) {
            return Err(invalid("q", format!("{} is below p = {}", self.q, self.p)));
        }
        if !(self.alpha > -1.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("{} is not above -1", self.alpha)));
        }
        Ok(())
    }

    /// `q/p`, the Hardy exponent.
    pub fn hardy_exponent(&self) -> f64 {
        self.q / self.p
    }

    /// `(2+α)q/p`, the Bergman exponent.
    pub fn bergman_exponent(&self) -> f64 {
        (2.0 + self.alpha) * self.q / self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Complex64,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Complex64, weight: f64) -> Self {
        Self { point, weight }
    }
}

/// Cell layout of a grid density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Square cells `origin + [i, i+1) × [j, j+1) · cell`, row-major in `i`.
    Cartesian {
        origin: Complex64,
        cell: f64,
        nx: usize,
        ny: usize,
    },
    /// Annular sectors between consecutive `radial_edges` and `angular`
    /// equal angles starting at 0; indexed radial band major.
    Polar { radial_edges: Vec<f64>, angular: usize },
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        match self {
            Self::Cartesian { nx, ny, .. } => nx * ny,
            Self::Polar { radial_edges, angular } => radial_edges.len().saturating_sub(1) * angular,
        }
    }

    pub fn cell_center(&self, idx: usize) -> Complex64 {
        match self {
            Self::Cartesian { origin, cell, nx, .. } => {
                let (i, j) = (idx % nx, idx / nx);
                origin + Complex64::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell)
            }
            Self::Polar { radial_edges, angular } => {
                let (b, a) = (idx / angular, idx % angular);
                let r = 0.5 * (radial_edges[b] + radial_edges[b + 1]);
                Complex64::from_polar(r, TAU * (a as f64 + 0.5) / *angular as f64)
            }
        }
    }

    pub fn cell_area(&self, idx: usize) -> f64 {
        match self {
            Self::Cartesian { cell, .. } => cell * cell,
            Self::Polar { radial_edges, angular } => {
                let b = idx / angular;
                let (r0, r1) = (radial_edges[b], radial_edges[b + 1]);
                0.5 * (r1 * r1 - r0 * r0) * TAU / *angular as f64
            }
        }
    }

    /// Largest distance from a cell centre to a point of its cell.
    pub fn resolution(&self) -> f64 {
        match self {
            Self::Cartesian { cell, .. } => cell * std::f64::consts::FRAC_1_SQRT_2,
            Self::Polar { radial_edges, angular } => radial_edges
                .windows(2)
                .map(|w| 0.5 * (w[1] - w[0]).hypot(w[1] * TAU / *angular as f64))
                .fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Cartesian { cell, nx, ny, .. } => {
                if !(*cell > 0.0) || *nx == 0 || *ny == 0 {
                    return Err(invalid("grid", "cartesian grid needs a positive cell and nx, ny ≥ 1"));
                }
            }
            Self::Polar { radial_edges, angular } => {
                if radial_edges.len() < 2 || *angular == 0 {
                    return Err(invalid("grid", "polar grid needs two radial edges and one sector"));
                }
                if radial_edges[0] < 0.0 || radial_edges.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("grid", "radial edges must increase from a non-negative start"));
                }
            }
        }
        Ok(())
    }
}

/// Radial edges `1 - 2^{-k}` for `k = 0..=levels`, each band split into
/// `sub` equal parts, closed by the last band `[1 - 2^{-levels}, 1]`.
pub fn geometric_radial_edges(levels: u32, sub: usize) -> Vec<f64> {
    let mut edges = vec![0.0];
    let outer = |k: u32| 1.0 - (-(k as f64)).exp2();
    for k in 0..=levels {
        let (a, b) = (outer(k), if k == levels { 1.0 } else { outer(k + 1) });
        for j in 1..=sub {
            edges.push(if j == sub {
                b
            } else {
                a + (b - a) * j as f64 / sub as f64
            });
        }
    }
    edges
}

/// `∫_{r0}^{r1} (1-r)^s r dr`, `s > -1`.
pub fn radial_power_integral(s: f64, r0: f64, r1: f64) -> f64 {
    let f = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            u.powf(s + 1.0) / (s + 1.0) - u.powf(s + 2.0) / (s + 2.0)
        }
    };
    f(1.0 - r0) - f(1.0 - r1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub spec: GridSpec,
    /// Density value per cell (against area measure).
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.cell_count() {
            return Err(invalid(
                "values",
                format!("{} values for {} cells", values.len(), spec.cell_count()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(
                "values",
                format!("cell value {v} is not a finite non-negative number"),
            ));
        }
        Ok(Self { spec, values })
    }

    pub fn cell_mass(&self, idx: usize) -> f64 {
        self.values[idx] * self.spec.cell_area(idx)
    }

    /// Density `(1-|z|)^s` on a polar grid; each cell value is the exact
    /// cell average, so cell masses are exact integrals.
    pub fn radial_power(s: f64, levels: u32, sub: usize, angular_bits: u32) -> Result<Self> {
        if !(s > -1.0) {
            return Err(invalid("s", format!("{s} is not above -1")));
        }
        let radial_edges = geometric_radial_edges(levels, sub);
        let angular = 1usize << angular_bits;
        let band_values: Vec<f64> = radial_edges
            .windows(2)
            .map(|w| radial_power_integral(s, w[0], w[1]) * 2.0 / (w[1] * w[1] - w[0] * w[0]))
            .collect();
        let values = band_values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, angular))
            .collect();
        Self::new(GridSpec::Polar { radial_edges, angular }, values)
    }
}

/// Density against arclength on each segment of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArcDensity {
    pub curve: BoundaryCurve,
    pub density: Vec<f64>,
}

/// A finite positive measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarMeasure {
    Atomic { atoms: Vec<Atom> },
    GridDensity(GridDensity),
    BoundaryArcDensity(BoundaryArcDensity),
}

impl PlanarMeasure {
    pub fn empty() -> Self {
        Self::Atomic { atoms: Vec::new() }
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms
            .iter()
            .find(|a| !(a.weight.is_finite() && a.weight >= 0.0 && a.point.re.is_finite() && a.point.im.is_finite()))
        {
            return Err(invalid("atoms", format!("atom {a:?} is not finite and non-negative")));
        }
        Ok(Self::Atomic { atoms })
    }

    pub fn dirac(point: Complex64, weight: f64) -> Result<Self> {
        Self::atomic(vec![Atom::new(point, weight)])
    }

    pub fn boundary_arc(curve: BoundaryCurve, density: Vec<f64>) -> Result<Self> {
        if density.len() != curve.len() {
            return Err(invalid("density", "one value per segment is required"));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("density", "values must be finite and non-negative"));
        }
        Ok(Self::BoundaryArcDensity(BoundaryArcDensity { curve, density }))
    }

    /// Area measure on the disc on a polar grid fine enough for dyadic
    /// boxes up to `levels` and `2^{angular_bits}` sectors.
    pub fn disc_area(levels: u32, sub: usize, angular_bits: u32) -> Result<Self> {
        Ok(Self::GridDensity(GridDensity::radial_power(
            0.0,
            levels,
            sub,
            angular_bits,
        )?))
    }

    /// Point masses: atoms as they are, grid cells at their centres, arc
    /// segments at their midpoints.
    pub fn mass_elements(&self) -> Vec<Atom> {
        match self {
            Self::Atomic { atoms } => atoms.clone(),
            Self::GridDensity(g) => (0..g.values.len())
                .filter(|&i| g.values[i] > 0.0)
                .map(|i| Atom::new(g.spec.cell_center(i), g.cell_mass(i)))
                .collect(),
            Self::BoundaryArcDensity(b) => b
                .curve
                .segments()
                .zip(&b.density)
                .filter(|(_, d)| **d > 0.0)
                .map(|((a, c), d)| Atom::new((a + c) * 0.5, d * (c - a).norm()))
                .collect(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_elements().iter().map(|a| a.weight).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mass_elements().is_empty()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            Self::Atomic { atoms } => Self::Atomic {
                atoms: atoms.iter().map(|a| Atom::new(a.point, a.weight * lambda)).collect(),
            },
            Self::GridDensity(g) => Self::GridDensity(GridDensity {
                spec: g.spec.clone(),
                values: g.values.iter().map(|v| v * lambda).collect(),
            }),
            Self::BoundaryArcDensity(b) => Self::BoundaryArcDensity(BoundaryArcDensity {
                curve: b.curve.clone(),
                density: b.density.iter().map(|v| v * lambda).collect(),
            }),
        }
    }

    /// Atomic measures only: every atom rotated about the origin.
    pub fn rotated(&self, theta: f64) -> Result<Self> {
        match self {
            Self::Atomic { atoms } => {
                let r = Complex64::from_polar(1.0, theta);
                Ok(Self::Atomic {
                    atoms: atoms.iter().map(|a| Atom::new(a.point * r, a.weight)).collect(),
                })
            }
            _ => Err(invalid("measure", "rotation is only defined for atomic measures")),
        }
    }
}

/// `μ(S)` for a half-open Carleson box; grid cells count when their centre
/// lies in the box.
pub fn measure_of_box(mu: &PlanarMeasure, b: &CarlesonBox) -> f64 {
    mu.mass_elements()
        .iter()
        .filter(|a| b.contains(a.point))
        .map(|a| a.weight)
        .sum()
}

/// `μ(B̄(center, radius))` for the closed ball; arc densities are clipped
/// exactly to the ball.
pub fn measure_of_ball(mu: &PlanarMeasure, center: Complex64, radius: f64) -> f64 {
    match mu {
        PlanarMeasure::BoundaryArcDensity(b) => b
            .curve
            .segments()
            .zip(&b.density)
            .map(|((a, c), d)| d * clipped_length(a, c, center, radius))
            .sum(),
        _ => mu
            .mass_elements()
            .iter()
            .filter(|a| (a.point - center).norm() <= radius)
            .map(|a| a.weight)
            .sum(),
    }
}

/// Number of radial buckets of a [`MassIndex`]; the last one holds points
/// with `|z| ≥ 1`.
const INDEX_LEVELS: usize = 56;

fn radial_level(r: f64) -> usize {
    if r >= 1.0 {
        INDEX_LEVELS - 1
    } else {
        ((-(1.0 - r).log2()).floor().max(0.0) as usize).min(INDEX_LEVELS - 2)
    }
}

/// Mass elements bucketed by radial level `⌊-log₂(1-|z|)⌋` and sorted by
/// angle inside each bucket, for fast ball and box queries.
#[derive(Clone, Debug)]
pub struct MassIndex {
    /// Per level: `(turn, point, weight)` sorted by turn.
    levels: Vec<Vec<(f64, Complex64, f64)>>,
}

impl MassIndex {
    pub fn new(mu: &PlanarMeasure) -> Self {
        let mut levels = vec![Vec::new(); INDEX_LEVELS];
        for a in mu.mass_elements() {
            levels[radial_level(a.point.norm())].push((turn_of(a.point), a.point, a.weight));
        }
        for l in &mut levels {
            l.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        Self { levels }
    }

    pub fn elements(&self) -> impl Iterator<Item = &(f64, Complex64, f64)> {
        self.levels.iter().flatten()
    }

    fn sum_window(&self, level: usize, lo: f64, hi: f64, keep: impl Fn(Complex64) -> bool) -> f64 {
        let bucket = &self.levels[level];
        let range = |a: f64, b: f64| {
            let s = bucket.partition_point(|e| e.0 < a);
            let t = bucket.partition_point(|e| e.0 <= b);
            &bucket[s..t.max(s)]
        };
        let mut sum = 0.0;
        let mut add = |slice: &[(f64, Complex64, f64)]| {
            for e in slice {
                if keep(e.1) {
                    sum += e.2;
                }
            }
        };
        if hi - lo >= 1.0 {
            add(bucket);
        } else if lo < 0.0 {
            add(range(lo + 1.0, 1.0));
            add(range(0.0, hi));
        } else if hi > 1.0 {
            add(range(lo, 1.0));
            add(range(0.0, hi - 1.0));
        } else {
            add(range(lo, hi));
        }
        sum
    }

    /// Closed-ball mass.
    pub fn ball(&self, center: Complex64, radius: f64) -> f64 {
        let c = center.norm();
        let k0 = radial_level((c - radius).max(0.0));
        let k1 = radial_level(c + radius);
        let (lo, hi) = if radius >= c {
            (0.0, 1.0)
        } else {
            let half = (radius / c).asin() / TAU + 1e-12;
            let t = turn_of(center);
            (t - half, t + half)
        };
        (k0..=k1)
            .map(|k| self.sum_window(k, lo, hi, |z| (z - center).norm() <= radius))
            .sum()
    }

    /// Half-open Carleson box mass.
    pub fn carleson_box(&self, b: &CarlesonBox) -> f64 {
        let k0 = radial_level(b.inner_radius);
        let lo = b.arc.start_turns();
        let hi = lo + b.arc.length_turns();
        (k0..INDEX_LEVELS - 1)
            .map(|k| self.sum_window(k, lo - 1e-12, hi + 1e-12, |z| b.contains(z)))
            .sum()
    }
}

/// Outcome of a pullback: the measure on `D` plus the atoms that could not
/// be inverted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pullback {
    pub measure: PlanarMeasure,
    pub rejected: Vec<Atom>,
    pub rejected_mass: f64,
    /// Pulled-back atoms with `|z| > 1 - 10⁻⁶`.
    pub near_boundary: usize,
}

/// `φ*(μ)`: every atom (or grid cell, as an atom at its centre) moved to its
/// preimage under `φ`, found by damped Newton from a seeded lookup.
pub fn pullback(map: &ConformalMap, mu: &PlanarMeasure, inversion_tol: f64) -> Result<Pullback> {
    weighted_pullback_with_tol(map, mu, 0.0, inversion_tol)
}

/// `φ*(μ)` reweighted by `|φ'|^{-exponent}` at each pulled-back atom.
pub fn weighted_pullback(map: &ConformalMap, mu: &PlanarMeasure, exponent: f64) -> Result<Pullback> {
    weighted_pullback_with_tol(map, mu, exponent, DEFAULT_INVERSION_TOL)
}

pub fn weighted_pullback_with_tol(
    map: &ConformalMap,
    mu: &PlanarMeasure,
    exponent: f64,
    inversion_tol: f64,
) -> Result<Pullback> {
    if !(inversion_tol > 0.0) {
        return Err(invalid("inversion_tol", "must be positive"));
    }
    if let PlanarMeasure::BoundaryArcDensity(_) = mu {
        return Err(invalid("measure", "pullback needs an atomic or grid measure"));
    }
    if *map == ConformalMap::identity() {
        let elements = mu.mass_elements();
        if elements.iter().all(|a| a.point.norm() < 1.0) {
            return Ok(Pullback {
                measure: mu.clone(),
                rejected: Vec::new(),
                rejected_mass: 0.0,
                near_boundary: elements
                    .iter()
                    .filter(|a| a.point.norm() > BOUNDARY_FLAG_RADIUS)
                    .count(),
            });
        }
    }
    let seeds = InverseSeeds::new(map);
    let solved: Vec<(Atom, Option<Complex64>)> = mu
        .mass_elements()
        .into_par_iter()
        .map(|a| {
            let z = map.invert_from(a.point, seeds.nearest(a.point), inversion_tol, NEWTON_MAX_ITER);
            (a, z)
        })
        .collect();
    let mut atoms = Vec::with_capacity(solved.len());
    let mut out = Pullback {
        measure: PlanarMeasure::empty(),
        rejected: Vec::new(),
        rejected_mass: 0.0,
        near_boundary: 0,
    };
    for (a, z) in solved {
        match z {
            Some(z) => {
                if z.norm() > BOUNDARY_FLAG_RADIUS {
                    out.near_boundary += 1;
                }
                let w = if exponent == 0.0 {
                    a.weight
                } else {
                    a.weight * (-exponent * map.log_abs_deriv(z)).exp()
                };
                atoms.push(Atom::new(z, w));
            }
            None => {
                out.rejected_mass += a.weight;
                out.rejected.push(a);
            }
        }
    }
    out.measure = PlanarMeasure::Atomic { atoms };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::{carleson_box, dyadic_boxes, CircleArc};
    use crate::maps::{standard_catalog, MapCatalogEntry};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(EmbeddingParams::new(1.0, 2.0, 0.0).is_ok());
        assert!(EmbeddingParams::new(2.0, 1.0, 0.0).is_err());
        assert!(EmbeddingParams::new(1.0, 1.0, -1.0).is_err());
        assert!(EmbeddingParams::new(0.0, 1.0, 0.0).is_err());
        let p = EmbeddingParams::new(2.0, 3.0, 1.0).unwrap();
        assert_eq!(p.hardy_exponent(), 1.5);
        assert_eq!(p.bergman_exponent(), 4.5);
    }

    #[test]
    fn box_and_ball_examples() {
        let mu = PlanarMeasure::dirac(c(0.9, 0.0), 1.0).unwrap();
        let b = carleson_box(CircleArc::new(0.0, PI / 2.0).unwrap());
        assert_eq!(b.inner_radius, 0.75);
        assert_eq!(measure_of_box(&mu, &b), 1.0);
        assert_eq!(measure_of_box(&PlanarMeasure::empty(), &b), 0.0);
        let o = PlanarMeasure::dirac(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(measure_of_ball(&o, c(0.0, 0.0), 0.1), 1.0);
        assert_eq!(measure_of_ball(&o, c(0.5, 0.0), 0.1), 0.0);
        // closed ball: an atom on the sphere counts
        assert_eq!(measure_of_ball(&o, c(0.25, 0.0), 0.25), 1.0);
    }

    #[test]
    fn area_measure_box_masses_are_exact() {
        let area = PlanarMeasure::disc_area(14, 1, 10).unwrap();
        assert!((area.total_mass() - PI).abs() < 1e-12);
        let index = MassIndex::new(&area);
        for b in dyadic_boxes(10).unwrap() {
            let l = b.arc.length();
            let h = l / TAU;
            let exact = l * h * (1.0 - h / 2.0);
            let direct = measure_of_box(&area, &b);
            assert!(
                (direct - exact).abs() < 1e-12 * exact.max(1e-300) + 1e-15,
                "{direct} vs {exact}"
            );
            assert!((index.carleson_box(&b) - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn area_measure_ball_mass() {
        let area = PlanarMeasure::disc_area(10, 8, 11).unwrap();
        let index = MassIndex::new(&area);
        for (z, r) in [(c(0.0, 0.0), 0.5), (c(0.5, 0.2), 0.15), (c(-0.3, -0.6), 0.05)] {
            let m = index.ball(z, r);
            assert!((m - PI * r * r).abs() < 0.03 * PI * r * r, "{m}");
            assert!((m - measure_of_ball(&area, z, r)).abs() < 1e-12 * m);
        }
    }

    #[test]
    fn index_matches_brute_force_on_random_atoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let atoms: Vec<_> = (0..400)
            .map(|_| {
                let r = 1.0 - (-(rng.gen_range(0.0..12.0f64))).exp2();
                Atom::new(
                    Complex64::from_polar(r, rng.gen_range(0.0..TAU)),
                    rng.gen_range(0.1..1.0),
                )
            })
            .collect();
        let mu = PlanarMeasure::atomic(atoms).unwrap();
        let index = MassIndex::new(&mu);
        for b in dyadic_boxes(8).unwrap() {
            assert!((index.carleson_box(&b) - measure_of_box(&mu, &b)).abs() < 1e-12);
        }
        for _ in 0..300 {
            let z = Complex64::from_polar(rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
            let r = rng.gen_range(0.0..1.0) * (1.0 - z.norm());
            assert!((index.ball(z, r) - measure_of_ball(&mu, z, r)).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_density_ball_is_clipped() {
        let curve = BoundaryCurve::circle(c(0.0, 0.0), 1.0, 1024).unwrap();
        let n = curve.len();
        let mu = PlanarMeasure::boundary_arc(curve, vec![1.0; n]).unwrap();
        let r = 0.3;
        let m = measure_of_ball(&mu, c(1.0, 0.0), r);
        assert!((m - 4.0 * (r / 2.0).asin()).abs() < 1e-4);
        assert!((mu.total_mass() - TAU).abs() < 1e-4);
    }

    #[test]
    fn pullback_identity_and_mass_bookkeeping() {
        let mu = PlanarMeasure::atomic(vec![
            Atom::new(c(0.3, 0.1), 1.0),
            Atom::new(c(-0.2, 0.5), 2.0),
            Atom::new(c(5.0, 0.0), 0.5),
        ])
        .unwrap();
        let inside = PlanarMeasure::atomic(mu.mass_elements()[..2].to_vec()).unwrap();
        let id = pullback(&ConformalMap::identity(), &inside, 1e-10).unwrap();
        assert_eq!(id.measure.mass_elements(), inside.mass_elements());
        let w = weighted_pullback(&ConformalMap::identity(), &inside, 3.0).unwrap();
        assert_eq!(w.measure.mass_elements(), inside.mass_elements());
        for map in std::iter::once(ConformalMap::identity()).chain(standard_catalog()) {
            let pb = pullback(&map, &mu, 1e-10).unwrap();
            let kept = pb.measure.total_mass();
            assert!((kept + pb.rejected_mass - mu.total_mass()).abs() < 1e-12);
            assert!(pb.rejected.iter().any(|a| a.point == c(5.0, 0.0)), "{}", map.label());
        }
    }

    #[test]
    fn moebius_roundtrip_and_weights() {
        let map = ConformalMap::new(MapCatalogEntry::moebius(0.5)).unwrap();
        let mu = PlanarMeasure::dirac(map.eval(c(0.3, 0.0)), 2.0).unwrap();
        let pb = pullback(&map, &mu, 1e-10).unwrap();
        let z = pb.measure.mass_elements()[0].point;
        assert!((z - c(0.3, 0.0)).norm() < 1e-10);
        let w = weighted_pullback(&map, &mu, 2.0).unwrap().measure.mass_elements()[0];
        // φ'(z) = (1 - a²)/(1 + a z)²
        let d = 0.75 / (1.0 + 0.5 * w.point.re).powi(2);
        assert!((w.weight - 2.0 / (d * d)).abs() < 1e-9);
        let w0 = weighted_pullback(&map, &mu, 0.0).unwrap().measure.mass_elements()[0];
        assert_eq!(w0.weight, 2.0);
    }

    #[test]
    fn grid_pullback_synthesizes_atoms() {
        let values = vec![1.0; 16];
        let g = GridDensity::new(
            GridSpec::Cartesian {
                origin: c(-0.2, -0.2),
                cell: 0.1,
                nx: 4,
                ny: 4,
            },
            values,
        )
        .unwrap();
        let mu = PlanarMeasure::GridDensity(g);
        let map = ConformalMap::new(MapCatalogEntry::quadratic(0.25)).unwrap();
        let pb = pullback(&map, &mu, 1e-10).unwrap();
        assert_eq!(pb.measure.mass_elements().len(), 16);
        assert!((pb.measure.total_mass() - 0.16).abs() < 1e-12);
        for a in pb.measure.mass_elements() {
            assert!(mu
                .mass_elements()
                .iter()
                .any(|b| (map.eval(a.point) - b.point).norm() < 1e-9));
        }
    }
}
