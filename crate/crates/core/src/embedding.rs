//! Hardy and Bergman norms, `L^q(μ)` norms and embedding-constant estimates
//! over families of test functions.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::DiscWhitneyBall;
use crate::domain::{boundary_distance, Domain};
use crate::error::{invalid, Error, Result};
use crate::measure::{measure_of_ball, PlanarMeasure};
use crate::quadrature::DiscRuleSpec;

/// Holomorphic test functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `((1-|a|²)/(1-āz)²)^{1/p}`, unit norm in `H^p`.
    HardyKernel {
        a: Complex64,
        p: f64,
    },
    /// `((1-|a|²)^{2+α}/(1-āz)^{2(2+α)})^{1/p}`, norm comparable to 1 in
    /// `A^p_α` uniformly in `a`.
    BergmanKernel {
        a: Complex64,
        p: f64,
        alpha: f64,
    },
    /// `1/(w - w₀*)²` with the pole outside the closed domain.
    ExteriorPole {
        pole: Complex64,
    },
    Monomial {
        n: u32,
    },
}

impl TestFunction {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Self::HardyKernel { a, p } => {
                let log = Complex64::new((1.0 - a.norm_sqr()).ln(), 0.0) - 2.0 * (one - a.conj() * z).ln();
                (log / p).exp()
            }
            Self::BergmanKernel { a, p, alpha } => {
                let s = 2.0 + alpha;
                let log = Complex64::new(s * (1.0 - a.norm_sqr()).ln(), 0.0) - 2.0 * s * (one - a.conj() * z).ln();
                (log / p).exp()
            }
            Self::ExteriorPole { pole } => {
                let d = z - pole;
                one / (d * d)
            }
            Self::Monomial { n } => z.powu(n),
        }
    }

    /// `|f(z)|`, rejecting non-finite values.
    pub fn abs_at(&self, z: Complex64) -> Result<f64> {
        let v = self.eval(z).norm();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { point: z, value: v })
        }
    }

    /// Point at which the function concentrates, used to focus quadrature.
    pub fn focus_angle(&self) -> f64 {
        match *self {
            Self::HardyKernel { a, .. } | Self::BergmanKernel { a, .. } => a.arg(),
            Self::ExteriorPole { pole } => pole.arg(),
            Self::Monomial { .. } => 0.0,
        }
    }
}

/// Where norms are integrated.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Carrier {
    /// The unit disc: `hardy_nodes` equispaced circle nodes; area integrals
    /// on a graded polar rule focused at each function's concentration angle.
    Disc { hardy_nodes: usize, area: DiscRuleSpec },
    /// A polygonal domain: boundary integrals at the vertices, area
    /// integrals by the midpoint rule on square cells of side `cell`.
    Domain { domain: Domain, cell: f64 },
}

impl Carrier {
    pub fn disc() -> Self {
        Self::Disc {
            hardy_nodes: 4096,
            area: DiscRuleSpec::default(),
        }
    }

    /// Same carrier with doubled node counts.
    pub fn refined(&self) -> Self {
        match self {
            Self::Disc { hardy_nodes, area } => Self::Disc {
                hardy_nodes: 2 * hardy_nodes,
                area: area.refined(),
            },
            Self::Domain { domain, cell } => Self::Domain {
                domain: domain.clone(),
                cell: cell / 2.0,
            },
        }
    }
}

/// `‖f‖_{H^p}`: on the disc `((1/2π) ∫ |f|^p dθ)^{1/p}` by the trapezoid rule
/// with `nodes` points; on a domain `(∫_Γ |f|^p ds)^{1/p}` with vertex
/// trapezoid weights.
pub fn hardy_norm(f: &TestFunction, p: f64, carrier: &Carrier) -> Result<f64> {
    if !(p > 0.0) {
        return Err(invalid("p", format!("{p} is not positive")));
    }
    let sum = match carrier {
        Carrier::Disc { hardy_nodes, .. } => {
            let n = *hardy_nodes;
            if n == 0 {
                return Err(invalid("nodes", "at least one node is needed"));
            }
            let vals: Result<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    f.abs_at(Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
                        .map(|v| v.powf(p))
                })
                .collect();
            vals?.iter().sum::<f64>() / n as f64
        }
        Carrier::Domain { domain, .. } => {
            let curve = domain.curve();
            let n = curve.len();
            let len = |i: usize| {
                let (a, b) = curve.segment(i);
                (b - a).norm()
            };
            let mut s = 0.0;
            for i in 0..n {
                let w = 0.5 * (len(i) + len((i + n - 1) % n));
                s += f.abs_at(curve.vertices()[i])?.powf(p) * w;
            }
            s
        }
    };
    Ok(sum.powf(1.0 / p))
}

/// `‖f‖_{A^p_α}`: on the disc `((1/π) ∫ |f|^p (1-|z|)^α dm)^{1/p}`, on a
/// domain `(∫_Ω |f|^p δ_Ω^α dm)^{1/p}`.
pub fn bergman_norm(f: &TestFunction, p: f64, alpha: f64, carrier: &Carrier) -> Result<f64> {
    if !(p > 0.0) {
        return Err(invalid("p", format!("{p} is not positive")));
    }
    if !(alpha > -1.0) {
        return Err(invalid("alpha", format!("{alpha} is not above -1")));
    }
    let sum = match carrier {
        Carrier::Disc { area, .. } => {
            let rule = area.focused(f.focus_angle()).area_rule()?;
            let vals: Result<Vec<f64>> = rule
                .par_iter()
                .map(|&(z, w)| f.abs_at(z).map(|v| v.powf(p) * (1.0 - z.norm()).powf(alpha) * w))
                .collect();
            vals?.iter().sum::<f64>() / PI
        }
        Carrier::Domain { domain, cell } => {
            let vals: Result<Vec<f64>> = domain_cells(domain, *cell)?
                .par_iter()
                .map(|&w| {
                    let d = boundary_distance(domain, w);
                    f.abs_at(w).map(|v| v.powf(p) * d.powf(alpha) * cell * cell)
                })
                .collect();
            vals?.iter().sum::<f64>()
        }
    };
    Ok(sum.powf(1.0 / p))
}

/// Centres of the square cells of side `cell` (aligned with the bounding
/// box) that lie in the domain.
pub fn domain_cells(domain: &Domain, cell: f64) -> Result<Vec<Complex64>> {
    if !(cell > 0.0) {
        return Err(invalid("cell", "must be positive"));
    }
    let (lo, hi) = domain.curve().bounding_box();
    let nx = ((hi.re - lo.re) / cell).ceil() as usize;
    let ny = ((hi.im - lo.im) / cell).ceil() as usize;
    if nx * ny > 50_000_000 {
        return Err(invalid("cell", "grid too fine"));
    }
    Ok((0..nx * ny)
        .into_par_iter()
        .map(|k| lo + Complex64::new(((k % nx) as f64 + 0.5) * cell, ((k / nx) as f64 + 0.5) * cell))
        .filter(|&w| domain.contains(w))
        .collect())
}

/// `(∫ |f|^q dμ)^{1/q}` over the mass elements of `μ`.
pub fn lq_mu_norm(f: &TestFunction, q: f64, mu: &PlanarMeasure) -> Result<f64> {
    if !(q > 0.0) {
        return Err(invalid("q", format!("{q} is not positive")));
    }
    let mut s = 0.0;
    for a in mu.mass_elements() {
        s += f.abs_at(a.point)?.powf(q) * a.weight;
    }
    Ok(s.powf(1.0 / q))
}

/// Target space of an embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Hardy { p: f64 },
    Bergman { p: f64, alpha: f64 },
}

impl Space {
    pub fn p(&self) -> f64 {
        match *self {
            Self::Hardy { p } | Self::Bergman { p, .. } => p,
        }
    }

    pub fn norm(&self, f: &TestFunction, carrier: &Carrier) -> Result<f64> {
        match *self {
            Self::Hardy { p } => hardy_norm(f, p, carrier),
            Self::Bergman { p, alpha } => bergman_norm(f, p, alpha, carrier),
        }
    }

    /// The reproducing-kernel test function of this space at `a`.
    pub fn kernel(&self, a: Complex64) -> TestFunction {
        match *self {
            Self::Hardy { p } => TestFunction::HardyKernel { a, p },
            Self::Bergman { p, alpha } => TestFunction::BergmanKernel { a, p, alpha },
        }
    }
}

/// Kernels of `space` at the hyperbolic grid points `(1 - 2^{-k}) e^{2πij/2^{k+bits}}`,
/// `k = 0..=levels`, followed by the monomials of degree `0..=max_degree`.
pub fn default_family(space: Space, levels: u32, angular_bits: u32, max_degree: u32) -> Vec<TestFunction> {
    let mut fam = vec![space.kernel(Complex64::new(0.0, 0.0))];
    for k in 1..=levels {
        let n = 1u64 << (k + angular_bits);
        let r = 1.0 - (-(k as f64)).exp2();
        for j in 0..n {
            fam.push(space.kernel(Complex64::from_polar(r, TAU * j as f64 / n as f64)));
        }
    }
    fam.extend((0..=max_degree).map(|n| TestFunction::Monomial { n }));
    fam
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingEstimate {
    /// `max ‖f‖_{L^q(μ)} / ‖f‖_X` over the family: a lower bound for the
    /// embedding constant.
    pub value: f64,
    pub best: Option<TestFunction>,
    /// Per-member ratio; `None` for members skipped because of zero norm.
    pub ratios: Vec<Option<f64>>,
}

pub fn embedding_constant(
    mu: &PlanarMeasure,
    space: Space,
    q: f64,
    family: &[TestFunction],
    carrier: &Carrier,
) -> Result<EmbeddingEstimate> {
    if family.is_empty() {
        return Err(invalid("family", "no test functions given"));
    }
    let ratios: Result<Vec<Option<f64>>> = family
        .par_iter()
        .map(|f| {
            let norm = space.norm(f, carrier)?;
            if norm == 0.0 {
                return Ok(None);
            }
            Ok(Some(lq_mu_norm(f, q, mu)? / norm))
        })
        .collect();
    let ratios = ratios?;
    let mut est = EmbeddingEstimate {
        value: 0.0,
        best: None,
        ratios,
    };
    for (f, r) in family.iter().zip(&est.ratios) {
        if let Some(r) = r {
            if *r > est.value {
                est.value = *r;
                est.best = Some(*f);
            }
        }
    }
    Ok(est)
}

/// `Σ_{k ≤ levels} μ(B_k) / (1 - |z_k|)^{2-q}` along the radius at angle
/// `vertex_angle`, with `z_k = (1 - 2^{-k}) e^{iξ}` and `B_k = B(z_k, (1-|z_k|)/2)`.
pub fn radial_cone_sum(mu: &PlanarMeasure, vertex_angle: f64, q: f64, levels: u32) -> Result<f64> {
    if !(q > 1.0) {
        return Err(invalid("q", format!("{q} must exceed 1")));
    }
    let mut total = 0.0;
    for k in 0..=levels {
        let delta = (-(k as f64)).exp2();
        let ball = DiscWhitneyBall::at(Complex64::from_polar(1.0 - delta, vertex_angle))?;
        total += measure_of_ball(mu, ball.center, ball.radius) / delta.powf(2.0 - q);
    }
    Ok(total)
}

/// Exterior point found near a boundary vertex, with the achieved ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorPoint {
    pub point: Complex64,
    /// `dist(w₀*, Ω̄) / R`
    pub clearance_ratio: f64,
    /// `|w₀* - ξ₀| / R`
    pub offset_ratio: f64,
}

/// Directions searched around a boundary vertex besides the outward normal.
const FAN_DIRECTIONS: usize = 64;
const RAY_STEPS: usize = 16;

/// Searches the outward normal at vertex `vertex` and a full fan of
/// directions for the exterior point `w` with `|w - ξ₀| ≤ R` farthest from
/// the domain.
pub fn exterior_point(domain: &Domain, vertex: usize, r: f64) -> Result<ExteriorPoint> {
    let curve = domain.curve();
    if vertex >= curve.len() {
        return Err(invalid("vertex", format!("index {vertex} out of range")));
    }
    if !(r > 0.0) {
        return Err(invalid("R", "must be positive"));
    }
    let n = curve.len();
    let xi = curve.vertices()[vertex];
    let tangent = curve.vertices()[(vertex + 1) % n] - curve.vertices()[(vertex + n - 1) % n];
    let mut dirs = vec![tangent * Complex64::new(0.0, -1.0) / tangent.norm()];
    dirs.extend((0..FAN_DIRECTIONS).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / FAN_DIRECTIONS as f64)));
    let best = dirs
        .par_iter()
        .flat_map_iter(|&d| (1..=RAY_STEPS).map(move |s| xi + d * (r * s as f64 / RAY_STEPS as f64)))
        .filter(|&w| !domain.contains(w))
        .map(|w| (w, curve.distance(w)))
        .reduce(
            || (xi, 0.0),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && (b.0.re, b.0.im) < (a.0.re, a.0.im)) {
                    b
                } else {
                    a
                }
            },
        );
    if best.1 < r / 16.0 {
        return Err(Error::NoExteriorPoint {
            vertex: xi,
            best_ratio: best.1 / r,
        });
    }
    Ok(ExteriorPoint {
        point: best.0,
        clearance_ratio: best.1 / r,
        offset_ratio: (best.0 - xi).norm() / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryCurve;
    use crate::maps::{ConformalMap, MapCatalogEntry};
    use crate::measure::Atom;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hardy_norm_examples() {
        let disc = Carrier::disc();
        for n in [0, 1, 7] {
            for p in [0.5, 1.0, 3.0] {
                let v = hardy_norm(&TestFunction::Monomial { n }, p, &disc).unwrap();
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
        for a in [c(0.5, 0.0), c(-0.3, 0.6), c(0.0, 0.95)] {
            for p in [1.0, 2.0] {
                let v = hardy_norm(&TestFunction::HardyKernel { a, p }, p, &disc).unwrap();
                assert!((v - 1.0).abs() < 1e-10, "{a} {p}: {v}");
            }
        }
    }

    #[test]
    fn exterior_pole_on_circle_domain() {
        // ∫_{|w|=1} |w - s|^{-2} ds = 2π/(s² - 1) and ∫ |w - s|^{-4} ds = 2π(1 + s²)/(s² - 1)³
        let d = Domain::from_curve(BoundaryCurve::circle(c(0.0, 0.0), 1.0, 8192).unwrap());
        let s = 1.5;
        let f = TestFunction::ExteriorPole { pole: c(s, 0.0) };
        let carrier = Carrier::Domain { domain: d, cell: 0.01 };
        let h1 = hardy_norm(&f, 1.0, &carrier).unwrap();
        let h2 = hardy_norm(&f, 2.0, &carrier).unwrap();
        let e1 = TAU / (s * s - 1.0);
        let e2 = (TAU * (1.0 + s * s) / (s * s - 1.0).powi(3)).sqrt();
        // the polygon sits inside the circle; its error is O(n^{-2})
        assert!((h1 - e1).abs() < 1e-5 * e1, "{h1} vs {e1}");
        assert!((h2 - e2).abs() < 1e-5 * e2, "{h2} vs {e2}");
    }

    #[test]
    fn bergman_norm_examples() {
        let disc = Carrier::disc();
        let one = TestFunction::Monomial { n: 0 };
        for p in [0.5, 1.0, 2.0] {
            assert!((bergman_norm(&one, p, 0.0, &disc).unwrap() - 1.0).abs() < 1e-12);
            let v = bergman_norm(&one, p, 1.0, &disc).unwrap();
            assert!((v - 3f64.powf(-1.0 / p)).abs() < 1e-12);
        }
        let z = TestFunction::Monomial { n: 1 };
        assert!((bergman_norm(&z, 2.0, 0.0, &disc).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(bergman_norm(&one, 1.0, -1.0, &disc).is_err());
    }

    #[test]
    fn norms_converge_under_refinement() {
        let disc = Carrier::disc();
        let fine = disc.refined();
        let fam = [
            TestFunction::HardyKernel { a: c(0.9, 0.2), p: 1.5 },
            TestFunction::BergmanKernel {
                a: c(-0.99, 0.0),
                p: 2.0,
                alpha: -0.5,
            },
            TestFunction::Monomial { n: 12 },
            TestFunction::ExteriorPole { pole: c(0.0, 1.3) },
        ];
        for f in fam {
            for (h0, h1) in [
                (hardy_norm(&f, 1.5, &disc).unwrap(), hardy_norm(&f, 1.5, &fine).unwrap()),
                (
                    bergman_norm(&f, 2.0, -0.5, &disc).unwrap(),
                    bergman_norm(&f, 2.0, -0.5, &fine).unwrap(),
                ),
            ] {
                assert!((h0 - h1).abs() < 0.005 * h1, "{f:?}: {h0} vs {h1}");
            }
        }
    }

    #[test]
    fn lq_norm_examples() {
        let f = TestFunction::HardyKernel { a: c(0.3, 0.0), p: 2.0 };
        let z0 = c(0.1, -0.4);
        let dirac = PlanarMeasure::dirac(z0, 1.0).unwrap();
        assert!((lq_mu_norm(&f, 3.0, &dirac).unwrap() - f.eval(z0).norm()).abs() < 1e-15);
        let two = PlanarMeasure::atomic(vec![Atom::new(z0, 1.0), Atom::new(c(0.5, 0.5), 1.0)]).unwrap();
        let s = f.eval(z0).norm() + f.eval(c(0.5, 0.5)).norm();
        assert!((lq_mu_norm(&f, 1.0, &two).unwrap() - s).abs() < 1e-14);
        let area = PlanarMeasure::disc_area(10, 2, 8).unwrap();
        let one = TestFunction::Monomial { n: 0 };
        assert!((lq_mu_norm(&one, 2.0, &area).unwrap() - PI.sqrt()).abs() < 1e-12);
        let pole = TestFunction::ExteriorPole { pole: z0 };
        assert!(matches!(lq_mu_norm(&pole, 1.0, &dirac), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn point_mass_extremal() {
        let z0 = c(0.5, 0.0);
        let mu = PlanarMeasure::dirac(z0, 1.0).unwrap();
        let space = Space::Hardy { p: 1.0 };
        let fam = default_family(space, 6, 2, 32);
        let est = embedding_constant(&mu, space, 1.0, &fam, &Carrier::disc()).unwrap();
        assert!((est.value - 4.0 / 3.0).abs() < 1e-12, "{}", est.value);
        assert_eq!(est.best, Some(TestFunction::HardyKernel { a: z0, p: 1.0 }));
        let empty = embedding_constant(&PlanarMeasure::empty(), space, 1.0, &fam, &Carrier::disc()).unwrap();
        assert_eq!(empty.value, 0.0);
    }

    #[test]
    fn identity_embedding_of_area_measure() {
        let area = PlanarMeasure::disc_area(12, 4, 9).unwrap().scaled(1.0 / PI);
        let space = Space::Bergman { p: 2.0, alpha: 0.0 };
        let fam = [TestFunction::Monomial { n: 0 }, TestFunction::Monomial { n: 3 }];
        let est = embedding_constant(&area, space, 2.0, &fam, &Carrier::disc()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-3, "{}", est.value);
    }

    #[test]
    fn radial_cone_sum_examples() {
        assert_eq!(radial_cone_sum(&PlanarMeasure::empty(), 0.0, 2.0, 20).unwrap(), 0.0);
        let atoms = (0..=40)
            .map(|k| Atom::new(c(1.0 - 0.875 * (-(k as f64)).exp2(), 0.0), 4f64.powi(-k)))
            .collect();
        let mu = PlanarMeasure::atomic(atoms).unwrap();
        let s = radial_cone_sum(&mu, 0.0, 2.0, 40).unwrap();
        assert!((s - 4.0 / 3.0).abs() < 1e-6);
        let off = PlanarMeasure::dirac(c(-0.9, 0.0), 1.0).unwrap();
        assert_eq!(radial_cone_sum(&off, 0.0, 2.0, 30).unwrap(), 0.0);
        assert!(radial_cone_sum(&mu, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn exterior_points() {
        let disc = Domain::unit_disc(1024).unwrap();
        for v in [0, 100, 700] {
            let r = 0.1;
            let e = exterior_point(&disc, v, r).unwrap();
            let xi = disc.curve().vertices()[v];
            assert!((e.point - xi * (1.0 + r)).norm() < 1e-12, "{e:?}");
            assert!((e.clearance_ratio - 1.0).abs() < 1e-3 && (e.offset_ratio - 1.0).abs() < 1e-12);
        }
        let square = Domain::from_curve(BoundaryCurve::square(1.0, 16).unwrap());
        // vertex 8 is the midpoint of the bottom edge
        let e = exterior_point(&square, 8, 0.2).unwrap();
        assert!((e.point - c(0.0, -1.2)).norm() < 1e-12);
        assert!((e.clearance_ratio - 1.0).abs() < 1e-12);

        let cardioid = ConformalMap::new(MapCatalogEntry::power_corner(2.0)).unwrap();
        let d = Domain::from_map(&cardioid, 4096).unwrap();
        let cusp = 2048;
        assert!(d.curve().vertices()[cusp].norm() < 1e-12);
        assert!(matches!(
            exterior_point(&d, cusp, 1e-4),
            Err(Error::NoExteriorPoint { .. })
        ));
        assert!(exterior_point(&d, 0, 0.05).is_ok());
    }
}
