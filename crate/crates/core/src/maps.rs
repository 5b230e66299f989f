//! Closed-form univalent maps of the unit disc onto bounded domains.
//!
//! Every catalog entry carries its derivative, a continuous branch of
//! `log φ'` and the logarithmic derivative `φ''/φ'`, together with an
//! explicit bound for `|φ''/φ'|` on `|z| <= r` used to certify sampling
//! errors.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Catalog of closed-form univalent maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapCatalogEntry {
    Identity,
    /// `z ↦ (z + a)/(1 + ā z)`, `|a| < 1`.
    Moebius {
        a: Complex64,
    },
    /// `z ↦ z + c z²`, `|c| <= 1/2`.
    Quadratic {
        c: Complex64,
    },
    /// `z ↦ ((1 + z)/2)^γ`, `0 < γ <= 2`. The boundary has a corner of
    /// opening `γπ` at the origin; `γ = 2` is the cardioid with an inward cusp.
    PowerCorner {
        gamma: f64,
    },
    /// Stages applied first to last; all but the last must be disc automorphisms.
    Composition {
        stages: Vec<MapCatalogEntry>,
    },
}

impl MapCatalogEntry {
    pub fn moebius(a: f64) -> Self {
        Self::Moebius {
            a: Complex64::new(a, 0.0),
        }
    }

    pub fn quadratic(c: f64) -> Self {
        Self::Quadratic {
            c: Complex64::new(c, 0.0),
        }
    }

    pub fn power_corner(gamma: f64) -> Self {
        Self::PowerCorner { gamma }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Identity => Ok(()),
            Self::Moebius { a } => {
                if a.norm() < 1.0 {
                    Ok(())
                } else {
                    Err(invalid("a", format!("|a| = {} must be < 1", a.norm())))
                }
            }
            Self::Quadratic { c } => {
                if c.norm() <= 0.5 {
                    Ok(())
                } else {
                    Err(invalid("c", format!("|c| = {} exceeds 1/2", c.norm())))
                }
            }
            Self::PowerCorner { gamma } => {
                if *gamma > 0.0 && *gamma <= 2.0 {
                    Ok(())
                } else {
                    Err(invalid("gamma", format!("{gamma} not in (0, 2]")))
                }
            }
            Self::Composition { stages } => {
                if stages.is_empty() {
                    return Err(invalid("stages", "composition needs at least one stage"));
                }
                for (i, s) in stages.iter().enumerate() {
                    s.validate()?;
                    if i + 1 < stages.len() && !s.is_disc_automorphism() {
                        return Err(invalid("stages", "only the last stage may leave the unit disc"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_disc_automorphism(&self) -> bool {
        match self {
            Self::Identity | Self::Moebius { .. } => true,
            Self::Composition { stages } => stages.iter().all(|s| s.is_disc_automorphism()),
            _ => false,
        }
    }

    /// Short human-readable tag, e.g. `quadratic(0.5)`.
    pub fn label(&self) -> String {
        fn c(z: &Complex64) -> String {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else {
                format!("{}{:+}i", z.re, z.im)
            }
        }
        match self {
            Self::Identity => "identity".into(),
            Self::Moebius { a } => format!("moebius({})", c(a)),
            Self::Quadratic { c: q } => format!("quadratic({})", c(q)),
            Self::PowerCorner { gamma } => format!("power_corner({gamma})"),
            Self::Composition { stages } => {
                let parts: Vec<_> = stages.iter().map(|s| s.label()).collect();
                format!("compose[{}]", parts.join(" -> "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Jet {
    value: Complex64,
    deriv: Complex64,
    log_deriv: Complex64,
    /// `φ''/φ'`
    dlog: Complex64,
}

fn stage_jet(entry: &MapCatalogEntry, z: Complex64) -> Jet {
    let one = Complex64::new(1.0, 0.0);
    match entry {
        MapCatalogEntry::Identity => Jet {
            value: z,
            deriv: one,
            log_deriv: Complex64::new(0.0, 0.0),
            dlog: Complex64::new(0.0, 0.0),
        },
        MapCatalogEntry::Moebius { a } => {
            let den = one + a.conj() * z;
            let k = 1.0 - a.norm_sqr();
            Jet {
                value: (z + a) / den,
                deriv: k / (den * den),
                log_deriv: Complex64::new(k.ln(), 0.0) - 2.0 * den.ln(),
                dlog: -2.0 * a.conj() / den,
            }
        }
        MapCatalogEntry::Quadratic { c } => {
            let d = one + 2.0 * c * z;
            Jet {
                value: z + c * z * z,
                deriv: d,
                log_deriv: d.ln(),
                dlog: 2.0 * c / d,
            }
        }
        MapCatalogEntry::PowerCorner { gamma } => {
            let g = *gamma;
            let half = (one + z) * 0.5;
            let log_half = half.ln();
            Jet {
                value: (log_half * g).exp(),
                deriv: (log_half * (g - 1.0)).exp() * (g / 2.0),
                log_deriv: Complex64::new((g / 2.0).ln(), 0.0) + log_half * (g - 1.0),
                dlog: Complex64::new(g - 1.0, 0.0) / (one + z),
            }
        }
        MapCatalogEntry::Composition { stages } => {
            let mut jet = stage_jet(&MapCatalogEntry::Identity, z);
            for s in stages {
                let next = stage_jet(s, jet.value);
                jet = Jet {
                    value: next.value,
                    deriv: next.deriv * jet.deriv,
                    log_deriv: next.log_deriv + jet.log_deriv,
                    dlog: next.dlog * jet.deriv + jet.dlog,
                };
            }
            jet
        }
    }
}

/// `(sup |φ''/φ'|, sup |φ'|, sup |φ|)` over `|z| <= r`, as explicit upper bounds.
fn stage_bounds(entry: &MapCatalogEntry, r: f64) -> (f64, f64, f64) {
    match entry {
        MapCatalogEntry::Identity => (0.0, 1.0, r),
        MapCatalogEntry::Moebius { a } => {
            let s = a.norm();
            (
                2.0 * s / (1.0 - s * r),
                (1.0 - s * s) / ((1.0 - s * r) * (1.0 - s * r)),
                ((r + s) / (1.0 + s * r)).min(1.0),
            )
        }
        MapCatalogEntry::Quadratic { c } => {
            let s = c.norm();
            (2.0 * s / (1.0 - 2.0 * s * r), 1.0 + 2.0 * s * r, r + s * r * r)
        }
        MapCatalogEntry::PowerCorner { gamma } => {
            let g = *gamma;
            let dsup = if g >= 1.0 {
                (g / 2.0) * ((1.0 + r) / 2.0).powf(g - 1.0)
            } else {
                (g / 2.0) * ((1.0 - r) / 2.0).powf(g - 1.0)
            };
            ((g - 1.0).abs() / (1.0 - r), dsup, ((1.0 + r) / 2.0).powf(g))
        }
        MapCatalogEntry::Composition { stages } => {
            let (mut rho, mut scale, mut total) = (r, 1.0, 0.0);
            for s in stages {
                let (b, d, img) = stage_bounds(s, rho);
                total += b * scale;
                scale *= d;
                rho = img;
            }
            (total, scale, rho)
        }
    }
}

/// A validated univalent map `φ: D → Ω` from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapCatalogEntry", into = "MapCatalogEntry")]
pub struct ConformalMap {
    entry: MapCatalogEntry,
    /// Multiple of 2πi removed so that `log φ'(0)` is the principal value.
    branch_shift: f64,
}

impl TryFrom<MapCatalogEntry> for ConformalMap {
    type Error = crate::Error;

    fn try_from(entry: MapCatalogEntry) -> Result<Self> {
        Self::new(entry)
    }
}

impl From<ConformalMap> for MapCatalogEntry {
    fn from(map: ConformalMap) -> Self {
        map.entry
    }
}

impl ConformalMap {
    pub fn new(entry: MapCatalogEntry) -> Result<Self> {
        entry.validate()?;
        let jet = stage_jet(&entry, Complex64::new(0.0, 0.0));
        let principal = jet.deriv.arg();
        let branch_shift = TAU * ((jet.log_deriv.im - principal) / TAU).round();
        Ok(Self { entry, branch_shift })
    }

    pub fn identity() -> Self {
        Self::new(MapCatalogEntry::Identity).expect("identity is valid")
    }

    pub fn entry(&self) -> &MapCatalogEntry {
        &self.entry
    }

    pub fn label(&self) -> String {
        self.entry.label()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        stage_jet(&self.entry, z).value
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        stage_jet(&self.entry, z).deriv
    }

    /// Continuous branch of `log φ'` with principal value at the origin.
    pub fn log_deriv(&self, z: Complex64) -> Complex64 {
        let l = stage_jet(&self.entry, z).log_deriv;
        Complex64::new(l.re, l.im - self.branch_shift)
    }

    /// `log |φ'(z)|`.
    pub fn log_abs_deriv(&self, z: Complex64) -> f64 {
        stage_jet(&self.entry, z).log_deriv.re
    }

    /// `φ''(z)/φ'(z)`.
    pub fn dlog_deriv(&self, z: Complex64) -> Complex64 {
        stage_jet(&self.entry, z).dlog
    }

    /// Upper bound for `|φ''/φ'|` on the closed disc `|z| <= r`, `r < 1`.
    pub fn dlog_bound(&self, r: f64) -> f64 {
        stage_bounds(&self.entry, r).0
    }

    /// Boundary value of `log |φ'|` at `e^{iθ}` from the closed form; `-∞` or
    /// `+∞` at a critical or singular boundary point.
    pub fn boundary_log_abs_deriv(&self, theta: f64) -> f64 {
        self.log_abs_deriv(Complex64::from_polar(1.0, theta))
    }

    pub fn is_disc_automorphism(&self) -> bool {
        self.entry.is_disc_automorphism()
    }

    /// Images of `n` equally spaced boundary points `e^{2πij/n}`.
    pub fn boundary_samples(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| self.eval(Complex64::from_polar(1.0, TAU * j as f64 / n as f64)))
            .collect()
    }

    /// Solves `φ(z) = w` by damped Newton iteration from `seed`.
    pub fn invert_from(&self, w: Complex64, seed: Complex64, tol: f64, max_iter: usize) -> Option<Complex64> {
        let mut z = seed;
        let mut res = self.eval(z) - w;
        for _ in 0..max_iter {
            if res.norm() < tol {
                return Some(z);
            }
            let d = self.deriv(z);
            if d.norm() == 0.0 || !d.is_finite() {
                return None;
            }
            let step = res / d;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = z - step * lambda;
                if cand.norm() < 1.0 {
                    let r2 = self.eval(cand) - w;
                    if r2.norm() < res.norm() {
                        z = cand;
                        res = r2;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (res.norm() < tol).then_some(z)
    }
}

/// Coarse image grid used to seed Newton inversion of a map.
#[derive(Debug)]
pub struct InverseSeeds {
    points: Vec<Complex64>,
    images: Vec<Complex64>,
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl InverseSeeds {
    pub fn new(map: &ConformalMap) -> Self {
        let mut points = vec![Complex64::new(0.0, 0.0)];
        for k in 1..=40 {
            let r = 1.0 - (-(k as f64) / 2.0).exp2();
            let n = (32usize << (k / 2).min(9)).min(8192);
            for j in 0..n {
                points.push(Complex64::from_polar(r, TAU * j as f64 / n as f64));
            }
        }
        let images: Vec<_> = points.iter().map(|z| map.eval(*z)).collect();
        let (mut lo, mut hi) = (images[0], images[0]);
        for w in &images {
            lo = Complex64::new(lo.re.min(w.re), lo.im.min(w.im));
            hi = Complex64::new(hi.re.max(w.re), hi.im.max(w.im));
        }
        let nx = 128usize;
        let ny = 128usize;
        let cell = ((hi.re - lo.re).max(hi.im - lo.im) / nx as f64).max(1e-12);
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut seeds = Self {
            points,
            images: Vec::new(),
            origin: lo,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, w) in images.iter().enumerate() {
            let (bx, by) = seeds.bucket_of(*w);
            buckets[by * nx + bx].push(i as u32);
        }
        seeds.images = images;
        seeds.buckets = buckets;
        seeds
    }

    fn bucket_of(&self, w: Complex64) -> (usize, usize) {
        let fx = ((w.re - self.origin.re) / self.cell).floor();
        let fy = ((w.im - self.origin.im) / self.cell).floor();
        (
            fx.clamp(0.0, (self.nx - 1) as f64) as usize,
            fy.clamp(0.0, (self.ny - 1) as f64) as usize,
        )
    }

    /// Disc point whose image is closest to `w` among the seeds.
    pub fn nearest(&self, w: Complex64) -> Complex64 {
        let (bx, by) = self.bucket_of(w);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let x0 = bx.saturating_sub(ring);
            let x1 = (bx + ring).min(self.nx - 1);
            let y0 = by.saturating_sub(ring);
            let y1 = (by + ring).min(self.ny - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let on_ring = x == x0 || x == x1 || y == y0 || y == y1;
                    if !on_ring && ring > 0 {
                        continue;
                    }
                    for &i in &self.buckets[y * self.nx + x] {
                        let d = (self.images[i as usize] - w).norm();
                        if best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, i as usize));
                        }
                    }
                }
            }
            if let Some((d, _)) = best {
                // anything in a further ring is at least `ring * cell` away
                if d <= ring as f64 * self.cell {
                    break;
                }
            }
        }
        best.map(|(_, i)| self.points[i])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }
}

/// The standard catalog used by sweeps: one representative per geometric regime.
pub fn standard_catalog() -> Vec<ConformalMap> {
    [
        MapCatalogEntry::Identity,
        MapCatalogEntry::moebius(0.5),
        MapCatalogEntry::moebius(0.7),
        MapCatalogEntry::quadratic(0.25),
        MapCatalogEntry::quadratic(0.5),
        MapCatalogEntry::power_corner(0.5),
        MapCatalogEntry::power_corner(1.0),
        MapCatalogEntry::power_corner(1.5),
        MapCatalogEntry::power_corner(2.0),
        MapCatalogEntry::Composition {
            stages: vec![
                MapCatalogEntry::Moebius {
                    a: Complex64::new(0.2, -0.3),
                },
                MapCatalogEntry::quadratic(0.5),
            ],
        },
    ]
    .into_iter()
    .map(|e| ConformalMap::new(e).expect("catalog entries are valid"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parameter_ranges() {
        assert!(ConformalMap::new(MapCatalogEntry::moebius(1.0)).is_err());
        assert!(ConformalMap::new(MapCatalogEntry::quadratic(0.51)).is_err());
        assert!(ConformalMap::new(MapCatalogEntry::power_corner(2.01)).is_err());
        assert!(ConformalMap::new(MapCatalogEntry::power_corner(0.0)).is_err());
        let bad = MapCatalogEntry::Composition {
            stages: vec![MapCatalogEntry::quadratic(0.2), MapCatalogEntry::moebius(0.1)],
        };
        assert!(ConformalMap::new(bad).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for map in standard_catalog() {
            for z in [c(0.1, 0.2), c(-0.5, 0.3), c(0.6, -0.6), c(-0.8, 0.0)] {
                let fd = (map.eval(z + h) - map.eval(z - h)) / (2.0 * h);
                assert!((fd - map.deriv(z)).norm() < 1e-6 * (1.0 + fd.norm()), "{}", map.label());
                let fd2 = (map.log_deriv(z + h) - map.log_deriv(z - h)) / (2.0 * h);
                assert!(
                    (fd2 - map.dlog_deriv(z)).norm() < 1e-5 * (1.0 + fd2.norm()),
                    "{}",
                    map.label()
                );
                let l = map.log_deriv(z);
                assert!((l.exp() - map.deriv(z)).norm() < 1e-10 * map.deriv(z).norm());
            }
        }
    }

    #[test]
    fn log_branch_is_continuous_along_radii() {
        for map in standard_catalog() {
            let l0 = map.log_deriv(c(0.0, 0.0));
            assert!((l0.im - map.deriv(c(0.0, 0.0)).arg()).abs() < 1e-12);
            for k in 0..16 {
                let dir = Complex64::from_polar(1.0, TAU * k as f64 / 16.0);
                let mut prev = l0;
                for s in 1..999 {
                    let cur = map.log_deriv(dir * (s as f64 * 1e-3));
                    assert!((cur.im - prev.im).abs() < 1.0, "{} jumps", map.label());
                    prev = cur;
                }
            }
        }
    }

    #[test]
    fn dlog_bound_dominates_samples() {
        for map in standard_catalog() {
            for r in [0.3, 0.7, 0.95] {
                let b = map.dlog_bound(r);
                for k in 0..64 {
                    let z = Complex64::from_polar(r, TAU * k as f64 / 64.0);
                    assert!(map.dlog_deriv(z).norm() <= b * (1.0 + 1e-12), "{}", map.label());
                }
            }
        }
    }

    #[test]
    fn catalog_maps_are_injective_on_a_grid() {
        for map in standard_catalog() {
            let pts: Vec<_> = (0..200)
                .map(|i| {
                    let r = 0.05 + 0.9 * ((i % 10) as f64 / 10.0);
                    Complex64::from_polar(r, TAU * (i / 10) as f64 / 20.0)
                })
                .collect();
            let imgs: Vec<_> = pts.iter().map(|z| map.eval(*z)).collect();
            for i in 0..imgs.len() {
                assert!(map.deriv(pts[i]).norm() > 0.0);
                for j in 0..i {
                    assert!((imgs[i] - imgs[j]).norm() > 1e-9, "{}", map.label());
                }
            }
        }
    }

    #[test]
    fn newton_inversion_roundtrip() {
        for map in standard_catalog() {
            let seeds = InverseSeeds::new(&map);
            for z in [c(0.3, 0.0), c(-0.7, 0.2), c(0.1, -0.9), c(-0.95, 0.01)] {
                let w = map.eval(z);
                let back = map.invert_from(w, seeds.nearest(w), 1e-12, 100).unwrap();
                assert!((back - z).norm() < 1e-8, "{}: {z} -> {back}", map.label());
            }
        }
    }
}
