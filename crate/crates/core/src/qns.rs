//! Quasi-nearly subharmonic checks: the least `C` with
//! `u(a) ≤ C r^{-2} ∫_{B(a,r)} u dm` on a sample of balls, and the two sides
//! of the weighted `L^q(μ)` / area inequality for such functions.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{boundary_distance, Domain};
use crate::embedding::{domain_cells, Carrier, TestFunction};
use crate::error::{invalid, Error, Result};
use crate::measure::{EmbeddingParams, PlanarMeasure};

/// Fewest ambient cells a ball must cover to be integrated on a grid.
pub const MIN_CELLS_PER_BALL: f64 = 32.0;

/// Piecewise-constant function on square cells; zero outside the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub origin: Complex64,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[j * nx + i]` for cell `(i, j)`.
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(origin: Complex64, cell: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if !(cell > 0.0) {
            return Err(invalid("cell", "must be positive"));
        }
        if values.len() != nx * ny {
            return Err(invalid(
                "values",
                format!("expected {} values, got {}", nx * ny, values.len()),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "must be finite and non-negative"));
        }
        Ok(Self {
            origin,
            cell,
            nx,
            ny,
            values,
        })
    }

    /// Grid on `[-1, 1]²` equal to 1 on the single cell containing `at`.
    pub fn spike(cell: f64, at: Complex64) -> Result<Self> {
        let n = (2.0 / cell).ceil() as usize;
        let mut g = Self::new(Complex64::new(-1.0, -1.0), cell, n, n, vec![0.0; n * n])?;
        let (i, j) = g
            .cell_of(at)
            .ok_or_else(|| invalid("at", format!("{at} is off the grid")))?;
        g.values[j * n + i] = 1.0;
        Ok(g)
    }

    fn cell_of(&self, w: Complex64) -> Option<(usize, usize)> {
        let x = ((w.re - self.origin.re) / self.cell).floor();
        let y = ((w.im - self.origin.im) / self.cell).floor();
        (x >= 0.0 && y >= 0.0 && (x as usize) < self.nx && (y as usize) < self.ny).then_some((x as usize, y as usize))
    }

    pub fn eval(&self, w: Complex64) -> f64 {
        self.cell_of(w).map_or(0.0, |(i, j)| self.values[j * self.nx + i])
    }

    /// Midpoint rule over the cells whose centres lie in the closed ball.
    fn ball_integral(&self, c: Complex64, r: f64, power: f64) -> f64 {
        let h = self.cell;
        let lo = |o: f64, x: f64| (((x - r - o) / h).floor().max(0.0)) as usize;
        let (i0, j0) = (lo(self.origin.re, c.re), lo(self.origin.im, c.im));
        let i1 = ((((c.re + r - self.origin.re) / h).ceil()) as usize).min(self.nx);
        let j1 = ((((c.im + r - self.origin.im) / h).ceil()) as usize).min(self.ny);
        let mut sum = 0.0;
        for j in j0..j1 {
            for i in i0..i1 {
                let v = self.values[j * self.nx + i];
                if v == 0.0 {
                    continue;
                }
                let mid = self.origin + Complex64::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if (mid - c).norm() <= r {
                    sum += v.powf(power) * h * h;
                }
            }
        }
        sum
    }
}

/// Non-negative candidate `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QnsCandidate {
    Constant {
        value: f64,
    },
    /// `|f|^power`.
    Modulus {
        f: TestFunction,
        power: f64,
    },
    /// `P(z, e^{iθ})^power` with `P(z, ζ) = (1 - |z|²)/|ζ - z|²`.
    Poisson {
        angle: f64,
        power: f64,
    },
    /// `g^power` for a grid function `g`.
    Grid {
        grid: GridFunction,
        power: f64,
    },
}

impl QnsCandidate {
    pub fn modulus(f: TestFunction) -> Self {
        Self::Modulus { f, power: 1.0 }
    }

    pub fn poisson(angle: f64) -> Self {
        Self::Poisson { angle, power: 1.0 }
    }

    pub fn grid(grid: GridFunction) -> Self {
        Self::Grid { grid, power: 1.0 }
    }

    /// `u^p`.
    pub fn powered(&self, p: f64) -> Self {
        match self {
            Self::Constant { value } => Self::Constant { value: value.powf(p) },
            Self::Modulus { f, power } => Self::Modulus {
                f: *f,
                power: power * p,
            },
            Self::Poisson { angle, power } => Self::Poisson {
                angle: *angle,
                power: power * p,
            },
            Self::Grid { grid, power } => Self::Grid {
                grid: grid.clone(),
                power: power * p,
            },
        }
    }

    pub fn eval(&self, w: Complex64) -> Result<f64> {
        let v = match self {
            Self::Constant { value } => *value,
            Self::Modulus { f, power } => f.abs_at(w)?.powf(*power),
            Self::Poisson { angle, power } => {
                let zeta = Complex64::from_polar(1.0, *angle);
                ((1.0 - w.norm_sqr()) / (zeta - w).norm_sqr()).powf(*power)
            }
            Self::Grid { grid, power } => {
                let g = grid.eval(w);
                if g == 0.0 {
                    0.0
                } else {
                    g.powf(*power)
                }
            }
        };
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::NonFinite { point: w, value: v })
        }
    }

    /// Grid resolution, if the candidate is only known on a grid.
    pub fn resolution(&self) -> Option<f64> {
        match self {
            Self::Grid { grid, .. } => Some(grid.cell),
            _ => None,
        }
    }

    fn focus_angle(&self) -> f64 {
        match self {
            Self::Modulus { f, .. } => f.focus_angle(),
            Self::Poisson { angle, .. } => *angle,
            _ => 0.0,
        }
    }
}

/// Polar midpoint rule used on each ball for candidates given by formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRule {
    pub rings: usize,
    pub sectors: usize,
}

impl Default for BallRule {
    fn default() -> Self {
        Self { rings: 8, sectors: 16 }
    }
}

impl BallRule {
    fn integral(&self, u: &QnsCandidate, c: Complex64, r: f64) -> Result<f64> {
        let dr = r / self.rings as f64;
        let dt = TAU / self.sectors as f64;
        let mut sum = 0.0;
        for i in 0..self.rings {
            let rho = (i as f64 + 0.5) * dr;
            for j in 0..self.sectors {
                let w = c + Complex64::from_polar(rho, (j as f64 + 0.5) * dt);
                sum += u.eval(w)? * rho;
            }
        }
        Ok(sum * dr * dt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRatio {
    pub center: Complex64,
    pub radius: f64,
    pub value: f64,
    pub integral: f64,
    /// `u(a) r² / ∫_B u`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnsReport {
    /// Max ratio over the balls that were evaluated; `∞` if some ball has
    /// `u(a) > 0` and zero integral.
    pub constant: f64,
    pub balls: Vec<BallRatio>,
    /// Balls with `u(a) = 0` and zero integral.
    pub skipped: usize,
    /// Balls not contained in the domain or below grid resolution.
    pub rejected: usize,
}

enum BallOutcome {
    Ratio(BallRatio),
    Skipped,
    Rejected,
}

/// Least `C` with `u(a) ≤ C r^{-2} ∫_{B(a,r)} u dm` over `balls`.
pub fn qns_constant(
    u: &QnsCandidate,
    domain: &Domain,
    balls: &[(Complex64, f64)],
    rule: BallRule,
) -> Result<QnsReport> {
    if rule.rings == 0 || rule.sectors == 0 {
        return Err(invalid("rule", "needs at least one ring and one sector"));
    }
    let outcomes: Result<Vec<BallOutcome>> = balls
        .par_iter()
        .map(|&(c, r)| {
            if !(r > 0.0) || !domain.contains(c) || boundary_distance(domain, c) < r {
                return Ok(BallOutcome::Rejected);
            }
            let integral = match u {
                QnsCandidate::Grid { grid, power } => {
                    if std::f64::consts::PI * r * r < MIN_CELLS_PER_BALL * grid.cell * grid.cell {
                        return Ok(BallOutcome::Rejected);
                    }
                    grid.ball_integral(c, r, *power)
                }
                _ => rule.integral(u, c, r)?,
            };
            let value = u.eval(c)?;
            Ok(match (value > 0.0, integral > 0.0) {
                (false, false) => BallOutcome::Skipped,
                (true, false) => BallOutcome::Ratio(BallRatio {
                    center: c,
                    radius: r,
                    value,
                    integral,
                    ratio: f64::INFINITY,
                }),
                _ => BallOutcome::Ratio(BallRatio {
                    center: c,
                    radius: r,
                    value,
                    integral,
                    ratio: value * r * r / integral,
                }),
            })
        })
        .collect();
    let mut report = QnsReport {
        constant: 0.0,
        balls: Vec::new(),
        skipped: 0,
        rejected: 0,
    };
    for o in outcomes? {
        match o {
            BallOutcome::Ratio(b) => {
                report.constant = report.constant.max(b.ratio);
                report.balls.push(b);
            }
            BallOutcome::Skipped => report.skipped += 1,
            BallOutcome::Rejected => report.rejected += 1,
        }
    }
    Ok(report)
}

/// QNS constants of `u` and `u^p` on the same balls.
pub fn power_stability(
    u: &QnsCandidate,
    p: f64,
    domain: &Domain,
    balls: &[(Complex64, f64)],
    rule: BallRule,
) -> Result<(f64, f64)> {
    if !(p > 0.0) {
        return Err(invalid("p", format!("{p} is not positive")));
    }
    let cu = qns_constant(u, domain, balls, rule)?.constant;
    let cup = qns_constant(&u.powered(p), domain, balls, rule)?.constant;
    Ok((cu, cup))
}

/// Random balls `B(a, r)` inside the unit disc with `r = t (1 - |a|)`,
/// `t ∈ [min_t, max_t]`.
pub fn random_disc_balls<R: rand::Rng>(
    rng: &mut R,
    count: usize,
    max_abs: f64,
    t_range: (f64, f64),
) -> Vec<(Complex64, f64)> {
    (0..count)
        .map(|_| {
            let a = Complex64::from_polar(max_abs * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
            let t = rng.gen_range(t_range.0..=t_range.1);
            (a, t * (1.0 - a.norm()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalitySides {
    /// `(∫ g^q dμ)^{1/q}`.
    pub lhs: f64,
    /// `(∫ g^p δ^α dm)^{1/p}` with `δ` the boundary distance.
    pub rhs: f64,
}

impl InequalitySides {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Both sides of `(∫ g^q dμ)^{1/q} ≤ C (∫ g^p δ^α dm)^{1/p}`; area integrals
/// on the carrier's rule, with `δ = 1 - |z|` on the disc.
pub fn weighted_inequality(
    g: &QnsCandidate,
    mu: &PlanarMeasure,
    carrier: &Carrier,
    params: EmbeddingParams,
) -> Result<InequalitySides> {
    params.validate()?;
    let (p, q, alpha) = (params.p, params.q, params.alpha);
    let lhs_terms: Result<Vec<f64>> = mu
        .mass_elements()
        .par_iter()
        .map(|a| g.eval(a.point).map(|v| v.powf(q) * a.weight))
        .collect();
    let lhs = lhs_terms?.iter().sum::<f64>().powf(1.0 / q);
    let rhs_terms: Result<Vec<f64>> = match carrier {
        Carrier::Disc { area, .. } => area
            .focused(g.focus_angle())
            .area_rule()?
            .par_iter()
            .map(|&(z, w)| g.eval(z).map(|v| v.powf(p) * (1.0 - z.norm()).powf(alpha) * w))
            .collect(),
        Carrier::Domain { domain, cell } => domain_cells(domain, *cell)?
            .par_iter()
            .map(|&w| {
                g.eval(w)
                    .map(|v| v.powf(p) * boundary_distance(domain, w).powf(alpha) * cell * cell)
            })
            .collect(),
    };
    let rhs = rhs_terms?.iter().sum::<f64>().powf(1.0 / p);
    Ok(InequalitySides { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn disc() -> Domain {
        Domain::unit_disc(2048).unwrap()
    }

    fn balls(seed: u64, n: usize) -> Vec<(Complex64, f64)> {
        random_disc_balls(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.95, (0.05, 0.5))
    }

    #[test]
    fn constant_gives_inverse_pi() {
        let one = QnsCandidate::Constant { value: 1.0 };
        let r = qns_constant(&one, &disc(), &balls(1, 50), BallRule::default()).unwrap();
        assert_eq!(r.balls.len(), 50);
        assert!((r.constant - 1.0 / PI).abs() < 1e-12);
        let (cu, cup) = power_stability(&one, 3.0, &disc(), &balls(1, 50), BallRule::default()).unwrap();
        assert!((cu - 1.0 / PI).abs() < 1e-12 && (cup - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn harmonic_is_mean_value_equal() {
        let u = QnsCandidate::poisson(0.7);
        let r = qns_constant(&u, &disc(), &balls(2, 200), BallRule::default()).unwrap();
        for b in &r.balls {
            assert!((b.ratio * PI - 1.0).abs() < 1e-3, "{b:?}");
        }
    }

    #[test]
    fn modulus_of_analytic_is_submean() {
        let u = QnsCandidate::modulus(TestFunction::Monomial { n: 1 });
        let bs = balls(3, 200);
        let r = qns_constant(&u, &disc(), &bs, BallRule::default()).unwrap();
        assert!(r.constant <= 1.0 / PI + 1e-3);
        let (cu, cup) = power_stability(&u, 0.5, &disc(), &bs, BallRule::default()).unwrap();
        assert!(cu <= 1.0 / PI + 1e-3 && cup <= 1.0 / PI + 1e-3);
    }

    #[test]
    fn spike_is_flagged() {
        let h = 1.0 / 64.0;
        let at = Complex64::new(0.1 + h / 2.0, 0.2 + h / 2.0);
        let grid = GridFunction::spike(h, at).unwrap();
        let u = QnsCandidate::grid(grid);
        let centre = Complex64::new(
            -1.0 + (((at.re + 1.0) / h).floor() + 0.5) * h,
            -1.0 + (((at.im + 1.0) / h).floor() + 0.5) * h,
        );
        let r = qns_constant(
            &u,
            &disc(),
            &[(centre, 4.0 * h), (Complex64::new(-0.5, 0.0), 0.1), (centre, h)],
            BallRule::default(),
        )
        .unwrap();
        assert_eq!(r.constant, 16.0);
        assert_eq!((r.skipped, r.rejected), (1, 1));
        let (_, cup) = power_stability(&u, 2.0, &disc(), &[(centre, 4.0 * h)], BallRule::default()).unwrap();
        assert_eq!(cup, 16.0);
    }

    #[test]
    fn grid_resolution_limits_balls() {
        let grid = GridFunction::new(Complex64::new(-1.0, -1.0), 0.01, 200, 200, {
            let mut v = vec![0.0; 40_000];
            v[100 * 200 + 100] = 1.0;
            v
        })
        .unwrap();
        let u = QnsCandidate::grid(grid);
        let c = Complex64::new(0.001, 0.001);
        let r = qns_constant(&u, &disc(), &[(c, 0.0049), (c, 0.04)], BallRule::default()).unwrap();
        assert_eq!(r.rejected, 1);
        assert!((r.constant - 16.0).abs() < 1e-9);
        let balls = [(Complex64::new(0.3, 0.3), 0.1)];
        assert_eq!(
            qns_constant(&u, &disc(), &balls, BallRule::default()).unwrap().skipped,
            1
        );
    }

    #[test]
    fn balls_outside_are_rejected() {
        let one = QnsCandidate::Constant { value: 2.0 };
        let r = qns_constant(
            &one,
            &disc(),
            &[(Complex64::new(0.9, 0.0), 0.2), (Complex64::new(1.5, 0.0), 0.1)],
            BallRule::default(),
        )
        .unwrap();
        assert_eq!((r.rejected, r.balls.len(), r.constant), (2, 0, 0.0));
    }

    #[test]
    fn constant_inequality_sides() {
        let mu = PlanarMeasure::atomic(vec![Atom::new(Complex64::new(0.5, 0.0), 4.0)]).unwrap();
        let one = QnsCandidate::Constant { value: 1.0 };
        let params = EmbeddingParams::new(1.0, 2.0, 1.0).unwrap();
        let s = weighted_inequality(&one, &mu, &Carrier::disc(), params).unwrap();
        assert_eq!(s.lhs, 2.0);
        // ∫ (1 - |z|) dm = π/3
        assert!((s.rhs - PI / 3.0).abs() < 1e-12);
    }
}
