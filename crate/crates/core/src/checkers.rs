//! Best constants in the square, Whitney-ball and boundary-ball conditions.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{turn_of, DyadicIndex, MAX_DYADIC_DEPTH, WHITNEY_C};
use crate::domain::{dyadic_radii, Domain};
use crate::error::{invalid, Error, Result};
use crate::measure::{Atom, MassIndex, PlanarMeasure};
use crate::whitney::WhitneySquareCover;

/// One evaluated probe (box or ball) of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub probe_id: String,
    /// `|I|` for boxes, the radius for balls.
    pub parameter: f64,
    pub measure: f64,
    pub ratio: f64,
}

fn max_ratio(probes: &[Probe]) -> f64 {
    probes.iter().map(|p| p.ratio).fold(0.0, f64::max)
}

/// Box masses of every dyadic level in `min_level..=depth`, accumulated in
/// one pass over the mass elements. Only boxes of positive mass appear.
fn dyadic_box_masses(mu: &PlanarMeasure, min_level: usize, depth: usize) -> Result<Vec<HashMap<u64, f64>>> {
    if depth > MAX_DYADIC_DEPTH {
        return Err(Error::DepthLimit {
            depth,
            limit: MAX_DYADIC_DEPTH,
        });
    }
    let mut levels: Vec<HashMap<u64, f64>> = vec![HashMap::new(); depth + 1];
    for a in mu.mass_elements() {
        let r = a.point.norm();
        if r >= 1.0 {
            continue;
        }
        let t = turn_of(a.point);
        for (k, level) in levels.iter_mut().enumerate().skip(min_level) {
            let scale = (1u64 << k) as f64;
            if k > 0 && r < 1.0 - 1.0 / scale {
                break;
            }
            let idx = ((t * scale).floor() as u64).min((1u64 << k) - 1);
            *level.entry(idx).or_insert(0.0) += a.weight;
        }
    }
    Ok(levels)
}

/// Every positive-mass dyadic box up to `depth` with `μ(S(I)) / |I|^β`.
pub fn square_probes(mu: &PlanarMeasure, beta: f64, depth: usize) -> Result<Vec<Probe>> {
    square_probes_between(mu, beta, 0, depth)
}

pub fn square_probes_between(mu: &PlanarMeasure, beta: f64, min_level: usize, depth: usize) -> Result<Vec<Probe>> {
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("{beta} is not positive")));
    }
    let levels = dyadic_box_masses(mu, min_level, depth)?;
    let mut probes = Vec::new();
    for (k, level) in levels.iter().enumerate() {
        let len = TAU / (1u64 << k) as f64;
        let mut keys: Vec<_> = level.keys().copied().collect();
        keys.sort_unstable();
        for i in keys {
            let m = level[&i];
            probes.push(Probe {
                probe_id: format!("box:{k}:{i}"),
                parameter: len,
                measure: m,
                ratio: m / len.powf(beta),
            });
        }
    }
    Ok(probes)
}

/// `sup μ(S(I)) / |I|^β` over dyadic boxes of level at most `depth`.
pub fn square_constant(mu: &PlanarMeasure, beta: f64, depth: usize) -> Result<f64> {
    Ok(max_ratio(&square_probes(mu, beta, depth)?))
}

/// The same sup restricted to levels `min_level..=depth`.
pub fn square_constant_between(mu: &PlanarMeasure, beta: f64, min_level: usize, depth: usize) -> Result<f64> {
    Ok(max_ratio(&square_probes_between(mu, beta, min_level, depth)?))
}

/// Factor bounding the gap between the dyadic sup and the sup over all arcs:
/// every arc sits in the union of at most two dyadic arcs of at most twice
/// its length.
pub fn dyadic_comparability_factor(beta: f64) -> f64 {
    2.0 * 2f64.powf(beta)
}

/// Whitney-ball centres on the disc: the origin, then `2^{k+angular_bits}`
/// equally spaced points on each circle `|z| = 1 - 2^{-k}`, `k = 1..=levels`,
/// each with radius `radius_factor · (1 - |z|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneySampling {
    pub levels: u32,
    pub angular_bits: u32,
    pub radius_factor: f64,
}

impl WhitneySampling {
    pub const DEFAULT_ANGULAR_BITS: u32 = 4;

    pub fn new(levels: u32) -> Self {
        Self {
            levels,
            angular_bits: Self::DEFAULT_ANGULAR_BITS,
            radius_factor: 0.5,
        }
    }

    pub fn balls(&self) -> Vec<(DyadicIndex, Complex64, f64)> {
        let mut out = vec![(DyadicIndex::ROOT, Complex64::new(0.0, 0.0), self.radius_factor)];
        for k in 1..=self.levels {
            let delta = (-(k as f64)).exp2();
            let n = 1u64 << (k + self.angular_bits);
            for j in 0..n {
                let z = Complex64::from_polar(1.0 - delta, TAU * j as f64 / n as f64);
                out.push((DyadicIndex { level: k, index: j }, z, self.radius_factor * delta));
            }
        }
        out
    }
}

fn check_sampling(s: &WhitneySampling, c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(invalid("c", format!("{c} is outside (0, 1/2]")));
    }
    if !(s.radius_factor >= c && s.radius_factor <= 0.5) {
        return Err(invalid(
            "radius_factor",
            format!("{} is outside the Whitney band [{c}, 1/2]", s.radius_factor),
        ));
    }
    if s.levels as usize + s.angular_bits as usize > 40 {
        return Err(invalid("levels", "too many Whitney balls requested"));
    }
    Ok(())
}

pub fn whitney_probes(mu: &PlanarMeasure, beta: f64, sampling: &WhitneySampling, c: f64) -> Result<Vec<Probe>> {
    check_sampling(sampling, c)?;
    let index = MassIndex::new(mu);
    Ok(ball_probes(&index, beta, sampling.balls(), |i| {
        format!("ball:{}:{}", i.level, i.index)
    }))
}

fn ball_probes<K: Send + Sync>(
    index: &MassIndex,
    beta: f64,
    balls: Vec<(K, Complex64, f64)>,
    id: impl Fn(&K) -> String + Sync,
) -> Vec<Probe> {
    balls
        .par_iter()
        .filter_map(|(k, z, r)| {
            let m = index.ball(*z, *r);
            (m > 0.0).then(|| Probe {
                probe_id: id(k),
                parameter: *r,
                measure: m,
                ratio: m / r.powf(beta),
            })
        })
        .collect()
}

/// `sup μ(B(z, r)) / r^β` over the sampled Whitney balls of the disc.
pub fn whitney_ball_constant(mu: &PlanarMeasure, beta: f64, sampling: &WhitneySampling, c: f64) -> Result<f64> {
    Ok(max_ratio(&whitney_probes(mu, beta, sampling, c)?))
}

/// Whitney-ball constant on a domain: balls centred at the squares of a
/// Whitney cover with radius `radius_factor · δ_Ω(centre)`.
pub fn whitney_ball_constant_on_domain(
    mu: &PlanarMeasure,
    beta: f64,
    cover: &WhitneySquareCover,
    radius_factor: f64,
) -> Result<f64> {
    check_sampling(
        &WhitneySampling {
            levels: 0,
            angular_bits: 0,
            radius_factor,
        },
        WHITNEY_C.min(radius_factor),
    )?;
    let index = MassIndex::new(mu);
    let balls = cover
        .squares
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.center, radius_factor * s.delta))
        .collect();
    Ok(max_ratio(&ball_probes(&index, beta, balls, |i| format!("square:{i}"))))
}

/// Dyadic radii from `diam(Ω)` down to the sagitta of the boundary polyline
/// (at least down to the longest segment, below which the boundary is not
/// resolved).
pub fn default_boundary_radii(domain: &Domain) -> Vec<f64> {
    let floor = domain.sagitta().max(domain.curve().max_segment_length());
    dyadic_radii(domain.curve().diameter(), floor)
}

pub fn boundary_ball_probes(
    mu: &PlanarMeasure,
    domain: &Domain,
    beta: f64,
    centers: &[Complex64],
    radii: &[f64],
) -> Result<Vec<Probe>> {
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("{beta} is not positive")));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("radii", "radii must be positive"));
    }
    let inside: Vec<Atom> = mu
        .mass_elements()
        .into_par_iter()
        .filter(|a| domain.contains(a.point))
        .collect();
    let index = MassIndex::new(&PlanarMeasure::Atomic { atoms: inside });
    let balls = centers
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| radii.iter().enumerate().map(move |(j, &r)| ((i, j), c, r)))
        .collect();
    Ok(ball_probes(&index, beta, balls, |(i, j)| format!("boundary:{i}:{j}")))
}

/// `sup μ(B(ξ, R) ∩ Ω) / R^β` over the given boundary centres and radii.
pub fn boundary_ball_constant(
    mu: &PlanarMeasure,
    domain: &Domain,
    beta: f64,
    centers: &[Complex64],
    radii: &[f64],
) -> Result<f64> {
    Ok(max_ratio(&boundary_ball_probes(mu, domain, beta, centers, radii)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub square_c: f64,
    pub ball_c: f64,
    /// `square_c / ball_c`, or 1 when both vanish.
    pub ratio: f64,
}

/// Square and Whitney-ball constants for the same exponent `β > 1`, on the
/// same depth (box levels and ball levels up to `depth`).
pub fn equivalence_report(mu: &PlanarMeasure, beta: f64, depth: usize) -> Result<EquivalenceReport> {
    if !(beta > 1.0) {
        return Err(invalid("beta", format!("{beta} must exceed 1")));
    }
    let square_c = square_constant(mu, beta, depth)?;
    let ball_c = whitney_ball_constant(mu, beta, &WhitneySampling::new(depth as u32), WHITNEY_C)?;
    let ratio = match (square_c == 0.0, ball_c == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => square_c / ball_c,
    };
    Ok(EquivalenceReport {
        square_c,
        ball_c,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::dyadic_boxes;
    use crate::domain::boundary_distance;
    use crate::measure::measure_of_box;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_measure_has_zero_constants() {
        let mu = PlanarMeasure::empty();
        assert_eq!(square_constant(&mu, 2.0, 8).unwrap(), 0.0);
        assert_eq!(
            whitney_ball_constant(&mu, 2.0, &WhitneySampling::new(6), 0.25).unwrap(),
            0.0
        );
        let d = Domain::unit_disc(64).unwrap();
        let centers = d.curve().vertices().to_vec();
        assert_eq!(
            boundary_ball_constant(&mu, &d, 1.0, &centers, &[0.5, 0.25]).unwrap(),
            0.0
        );
        assert_eq!(equivalence_report(&mu, 1.5, 6).unwrap().ratio, 1.0);
    }

    #[test]
    fn point_mass_square_constant_matches_brute_force() {
        let mu = PlanarMeasure::dirac(c(0.5, 0.0), 1.0).unwrap();
        assert_eq!(square_constant(&mu, 1.0, 12).unwrap(), 1.0 / PI);
        // brute force over every box
        let brute = dyadic_boxes(12)
            .unwrap()
            .iter()
            .map(|b| measure_of_box(&mu, b) / b.arc.length())
            .fold(0.0, f64::max);
        assert_eq!(brute, 1.0 / PI);
    }

    #[test]
    fn square_scan_agrees_with_direct_box_masses() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let atoms = (0..50)
            .map(|_| {
                let r = 1.0 - (-(rng.gen_range(0.0..9.0f64))).exp2();
                Atom::new(
                    Complex64::from_polar(r, rng.gen_range(0.0..TAU)),
                    rng.gen_range(0.5..2.0),
                )
            })
            .collect();
        let mu = PlanarMeasure::atomic(atoms).unwrap();
        let brute = dyadic_boxes(9)
            .unwrap()
            .iter()
            .map(|b| measure_of_box(&mu, b) / b.arc.length().powf(1.5))
            .fold(0.0, f64::max);
        let fast = square_constant(&mu, 1.5, 9).unwrap();
        assert!((brute - fast).abs() <= 1e-12 * brute);
    }

    #[test]
    fn area_measure_square_constant() {
        let area = PlanarMeasure::disc_area(14, 1, 12).unwrap();
        let s = square_constant(&area, 2.0, 12).unwrap();
        let exact = (1.0 - (-13f64).exp2()) / TAU;
        assert!((s - exact).abs() < 1e-12, "{s} vs {exact}");
    }

    #[test]
    fn whitney_examples() {
        let beta = 2.0;
        let atoms = (1..=10)
            .map(|k| Atom::new(c(1.0 - (-(k as f64)).exp2(), 0.0), (-(k as f64) * beta).exp2()))
            .collect();
        let mu = PlanarMeasure::atomic(atoms).unwrap();
        let w = whitney_ball_constant(&mu, beta, &WhitneySampling::new(12), 0.25).unwrap();
        assert!((1.0..=4f64.powf(beta)).contains(&w), "{w}");
        // ball at 1 - 2^-k also reaches the next atom on its boundary sphere
        assert!((w - 5.0).abs() < 1e-9);

        let area = PlanarMeasure::disc_area(12, 8, 13).unwrap();
        let a = whitney_ball_constant(&area, 2.0, &WhitneySampling::new(8), 0.25).unwrap();
        assert!((a - PI).abs() < 0.05 * PI, "{a}");
        assert!(whitney_ball_constant(
            &area,
            2.0,
            &WhitneySampling {
                radius_factor: 0.6,
                ..WhitneySampling::new(3)
            },
            0.25
        )
        .is_err());
    }

    #[test]
    fn boundary_ball_examples() {
        let d = Domain::unit_disc(1024).unwrap();
        let curve = d.curve();
        // arclength measure pushed slightly inside
        let atoms = curve
            .segments()
            .map(|(a, b)| Atom::new((a + b) * 0.5 * (1.0 - 1e-6), (b - a).norm()))
            .collect();
        let mu = PlanarMeasure::atomic(atoms).unwrap();
        let centers: Vec<_> = curve.vertices().iter().step_by(16).cloned().collect();
        let small: Vec<_> = dyadic_radii(0.5, 0.02);
        let k = boundary_ball_constant(&mu, &d, 1.0, &centers, &small).unwrap();
        assert!((k - 2.0).abs() < 0.2 * 2.0, "{k}");

        let w0 = c(0.6, 0.2);
        let m = 3.0;
        let dirac = PlanarMeasure::dirac(w0, m).unwrap();
        let all = curve.vertices().to_vec();
        let radii = default_boundary_radii(&d);
        let k = boundary_ball_constant(&dirac, &d, 1.0, &all, &radii).unwrap();
        let delta = boundary_distance(&d, w0);
        assert!(
            k <= m / delta + 1e-12 && k >= m / (2.0 * delta + curve.max_segment_length()),
            "{k}"
        );

        // an atom outside the domain is ignored
        let outside = PlanarMeasure::dirac(c(1.5, 0.0), 1.0).unwrap();
        assert_eq!(boundary_ball_constant(&outside, &d, 1.0, &all, &radii).unwrap(), 0.0);
    }

    #[test]
    fn single_atom_equivalence() {
        let mu = PlanarMeasure::dirac(c(0.9, 0.0), 1.0).unwrap();
        let rep = equivalence_report(&mu, 1.5, 12).unwrap();
        assert!(rep.ratio >= 1.0 / 64.0 && rep.ratio <= 64.0, "{rep:?}");
        assert!(equivalence_report(&mu, 1.0, 4).is_err());
    }
}
