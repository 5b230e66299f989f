//! Polygonal boundary curves and the geometric constants measured on them.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::maps::ConformalMap;

/// Minimum number of distinct vertices of a boundary polyline.
pub const MIN_VERTICES: usize = 16;

/// Boundary samples taken from a catalog map unless stated otherwise.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 1 << 12;

/// Closed, simple, positively oriented polyline. The closing segment from the
/// last vertex back to the first is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct BoundaryCurve {
    vertices: Vec<Complex64>,
    /// `cumulative[i]` is the arclength from vertex 0 to vertex `i`;
    /// `cumulative[n]` is the total length.
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<Complex64>> for BoundaryCurve {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BoundaryCurve> for Vec<Complex64> {
    fn from(c: BoundaryCurve) -> Self {
        c.vertices
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Length of the part of `[a, b]` inside the closed ball `B(c, r)`.
pub fn clipped_length(a: Complex64, b: Complex64, c: Complex64, r: f64) -> f64 {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sqr();
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * (f * d.conj()).re;
    let qc = f.norm_sqr() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t1 = ((-qb - s) / (2.0 * qa)).max(0.0);
    let t2 = ((-qb + s) / (2.0 * qa)).min(1.0);
    if t2 > t1 {
        (t2 - t1) * qa.sqrt()
    } else {
        0.0
    }
}

impl BoundaryCurve {
    /// Validates and wraps a vertex list. A repeated closing vertex is dropped.
    pub fn new(mut vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < MIN_VERTICES {
            return Err(Error::InvalidCurve(format!(
                "{} vertices, at least {MIN_VERTICES} required",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::InvalidCurve(format!("non-finite vertex {p}")));
        }
        let n = vertices.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let len = (vertices[(i + 1) % n] - vertices[i]).norm();
            if len == 0.0 {
                return Err(Error::InvalidCurve(format!("repeated vertex at index {i}")));
            }
            acc += len;
            cumulative.push(acc);
        }
        let curve = Self { vertices, cumulative };
        if curve.signed_area() <= 0.0 {
            return Err(Error::InvalidCurve("curve is not positively oriented".into()));
        }
        if let Some((i, j)) = curve.find_self_intersection() {
            return Err(Error::InvalidCurve(format!("segments {i} and {j} intersect")));
        }
        Ok(curve)
    }

    /// Polyline through `n` equally spaced boundary images of a catalog map.
    pub fn from_map(map: &ConformalMap, n: usize) -> Result<Self> {
        Self::new(map.boundary_samples(n))
    }

    /// Regular `n`-gon inscribed in the circle `|w - center| = radius`.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|j| center + Complex64::from_polar(radius, TAU * j as f64 / n as f64))
                .collect(),
        )
    }

    /// Axis-parallel square `[-h, h]²` with `per_side` vertices on each side.
    pub fn square(h: f64, per_side: usize) -> Result<Self> {
        let corners = [
            Complex64::new(-h, -h),
            Complex64::new(h, -h),
            Complex64::new(h, h),
            Complex64::new(-h, h),
        ];
        let mut v = Vec::with_capacity(4 * per_side);
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for j in 0..per_side {
                v.push(a + (b - a) * (j as f64 / per_side as f64));
            }
        }
        Self::new(v)
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.len()]
    }

    /// Segment `i`, from vertex `i` to vertex `i + 1` (cyclically).
    pub fn segment(&self, i: usize) -> (Complex64, Complex64) {
        (self.vertices[i], self.vertices[(i + 1) % self.len()])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        (0..self.len()).map(move |i| self.segment(i))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.segments().map(|(a, b)| cross(a, b)).sum::<f64>()
    }

    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for v in &self.vertices {
            lo.re = lo.re.min(v.re);
            lo.im = lo.im.min(v.im);
            hi.re = hi.re.max(v.re);
            hi.im = hi.im.max(v.im);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        self.vertices
            .par_iter()
            .map(|a| self.vertices.iter().map(|b| (a - b).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_segment_length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).fold(0.0, f64::max)
    }

    /// Sort-and-sweep over the x-extents of the segments; adjacent segments
    /// share a vertex and are not compared.
    fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let xmin = |i: usize| {
            let (a, b) = self.segment(i);
            a.re.min(b.re)
        };
        let xmax = |i: usize| {
            let (a, b) = self.segment(i);
            a.re.max(b.re)
        };
        order.sort_by(|&i, &j| xmin(i).partial_cmp(&xmin(j)).unwrap_or(Ordering::Equal));
        let mut active: Vec<usize> = Vec::new();
        for &i in &order {
            let x0 = xmin(i);
            active.retain(|&j| xmax(j) >= x0);
            let (a, b) = self.segment(i);
            for &j in &active {
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if adjacent {
                    continue;
                }
                let (c, d) = self.segment(j);
                if segments_intersect(a, b, c, d) {
                    return Some((i.min(j), i.max(j)));
                }
            }
            active.push(i);
        }
        None
    }

    /// Euclidean distance from `w` to the polyline.
    pub fn distance(&self, w: Complex64) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(w, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Crossing-number test; points on the polyline count as inside.
    pub fn contains(&self, w: Complex64) -> bool {
        let mut inside = false;
        for (a, b) in self.segments() {
            if point_segment_distance(w, a, b) == 0.0 {
                return true;
            }
            if (a.im > w.im) != (b.im > w.im) {
                let x = a.re + (w.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if w.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Length of the shorter boundary arc between vertices `i` and `j`.
    pub fn shorter_arc(&self, i: usize, j: usize) -> f64 {
        let forward = (self.cumulative[j] - self.cumulative[i]).abs();
        forward.min(self.length() - forward)
    }

    /// Arclength of the polyline inside the closed ball `B(center, r)`.
    pub fn length_in_ball(&self, center: Complex64, r: f64) -> f64 {
        self.segments().map(|(a, b)| clipped_length(a, b, center, r)).sum()
    }
}

/// A bounded simply connected domain given by its boundary polyline,
/// optionally remembering the catalog map that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Domain {
    curve: BoundaryCurve,
    source_map: Option<ConformalMap>,
    sagitta: f64,
}

impl Domain {
    /// Domain bounded by an explicit polyline; the polyline is the boundary,
    /// so the discretisation error is zero.
    pub fn from_curve(curve: BoundaryCurve) -> Self {
        Self {
            curve,
            source_map: None,
            sagitta: 0.0,
        }
    }

    /// `φ(D)` approximated by the polyline through `n` boundary images.
    pub fn from_map(map: &ConformalMap, n: usize) -> Result<Self> {
        let curve = BoundaryCurve::from_map(map, n)?;
        let sagitta = (0..n)
            .into_par_iter()
            .map(|j| {
                let (a, b) = curve.segment(j);
                let mid = map.eval(Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) / n as f64));
                (mid - (a + b) * 0.5).norm()
            })
            .reduce(|| 0.0, f64::max);
        Ok(Self {
            curve,
            source_map: Some(map.clone()),
            sagitta,
        })
    }

    /// The unit disc as a regular polygon with `n` vertices.
    pub fn unit_disc(n: usize) -> Result<Self> {
        Self::from_map(&ConformalMap::identity(), n)
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn source_map(&self) -> Option<&ConformalMap> {
        self.source_map.as_ref()
    }

    /// Largest deviation between the polyline and the curve it samples,
    /// measured at parameter midpoints of the segments.
    pub fn sagitta(&self) -> f64 {
        self.sagitta
    }

    pub fn contains(&self, w: Complex64) -> bool {
        self.curve.contains(w)
    }

    pub fn area(&self) -> f64 {
        self.curve.signed_area()
    }
}

/// `δ_Ω(w)`: distance from `w` to the boundary polyline (unsigned).
pub fn boundary_distance(domain: &Domain, w: Complex64) -> f64 {
    domain.curve.distance(w)
}

/// Largest `length(Γ ∩ B(z, R)) / R` over the given centres and radii.
pub fn ahlfors_constant(curve: &BoundaryCurve, centers: &[Complex64], radii: &[f64]) -> Result<f64> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(invalid("radii", format!("radius {r} is not positive")));
    }
    Ok(centers
        .par_iter()
        .map(|&c| {
            radii
                .iter()
                .map(|&r| curve.length_in_ball(c, r) / r)
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// Dyadic radii `diam·2^{-k}` from the diameter down to (and not below) `floor`.
pub fn dyadic_radii(diameter: f64, floor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = diameter;
    while r >= floor && out.len() < 64 {
        out.push(r);
        r *= 0.5;
    }
    out
}

/// Largest `min(ℓ_forward, ℓ_backward) / |z₁ - z₂|` over vertex pairs.
/// All pairs are used when `sample_pairs` covers them; otherwise the pairs
/// among an evenly strided subset of vertices of matching size.
pub fn chordarc_constant(curve: &BoundaryCurve, sample_pairs: usize) -> Result<f64> {
    if sample_pairs == 0 {
        return Err(invalid("sample_pairs", "must be at least 1"));
    }
    let n = curve.len();
    let all = n * (n - 1) / 2;
    let idx: Vec<usize> = if sample_pairs >= all {
        (0..n).collect()
    } else {
        let m = (((2 * sample_pairs) as f64).sqrt().ceil() as usize + 1).clamp(2, n);
        (0..m).map(|k| k * n / m).collect()
    };
    let v = curve.vertices();
    Ok(idx
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut best = 0.0f64;
            for &j in &idx[a + 1..] {
                let chord = (v[i] - v[j]).norm();
                if chord > 0.0 {
                    best = best.max(curve.shorter_arc(i, j) / chord);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::koebe_delta_bounds;
    use crate::maps::{standard_catalog, MapCatalogEntry};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn curve_validation() {
        assert!(BoundaryCurve::circle(c(0.0, 0.0), 1.0, 8).is_err());
        let mut cw: Vec<_> = BoundaryCurve::circle(c(0.0, 0.0), 1.0, 32).unwrap().into();
        cw.reverse();
        assert!(BoundaryCurve::new(cw.clone()).is_err());
        cw.reverse();
        cw.push(cw[0]);
        assert_eq!(BoundaryCurve::new(cw).unwrap().len(), 32);
        // figure eight
        let eight: Vec<_> = (0..64)
            .map(|j| {
                let t = TAU * j as f64 / 64.0;
                c(t.sin(), (2.0 * t).sin() / 2.0)
            })
            .collect();
        assert!(BoundaryCurve::new(eight).is_err());
    }

    #[test]
    fn circle_distances() {
        let d = Domain::unit_disc(256).unwrap();
        assert!(d.sagitta() < 1e-4);
        assert!((boundary_distance(&d, c(0.0, 0.0)) - 1.0).abs() < 3e-4);
        assert!((boundary_distance(&d, c(0.5, 0.0)) - 0.5).abs() < 3e-4);
        assert!((boundary_distance(&d, c(0.0, 2.0)) - 1.0).abs() < 3e-4);
        assert!(d.contains(c(0.3, -0.4)) && !d.contains(c(0.9, 0.9)));
        assert!((d.area() - PI).abs() < 1e-3);
    }

    #[test]
    fn koebe_sandwich_on_catalog() {
        for map in standard_catalog() {
            let d = Domain::from_map(&map, 2048).unwrap();
            for i in 1..10 {
                for j in 0..12 {
                    let z = Complex64::from_polar(0.095 * i as f64, TAU * j as f64 / 12.0);
                    let (lo, hi) = koebe_delta_bounds(&map, z).unwrap();
                    let dist = boundary_distance(&d, map.eval(z));
                    let s = d.sagitta();
                    assert!(
                        dist + s >= lo && dist - s <= hi,
                        "{} at {z}: {dist} vs [{lo}, {hi}]",
                        map.label()
                    );
                }
            }
        }
    }

    #[test]
    fn ahlfors_of_circle_and_line() {
        let circle = BoundaryCurve::circle(c(0.0, 0.0), 1.0, 1024).unwrap();
        let centers: Vec<_> = circle.vertices().iter().step_by(64).cloned().collect();
        let radii = dyadic_radii(2.0, 1e-3);
        let a = ahlfors_constant(&circle, &centers, &radii).unwrap();
        assert!(a <= PI + 1e-6 && a > PI - 1e-3, "{a}");
        // closed-form arc length 4 asin(R/2) for R <= 2
        for r in [0.1, 0.7, 1.5] {
            let l = circle.length_in_ball(c(1.0, 0.0), r);
            assert!((l - 4.0 * (r / 2.0).asin()).abs() < 1e-4, "{l}");
        }
        assert!((clipped_length(c(-5.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), 1.0) / 1.0 - 2.0).abs() < 1e-15);
        assert!(ahlfors_constant(&circle, &centers, &[0.0]).is_err());
    }

    #[test]
    fn chordarc_closed_forms() {
        let circle = BoundaryCurve::circle(c(0.0, 0.0), 1.0, 256).unwrap();
        let k = chordarc_constant(&circle, usize::MAX).unwrap();
        assert!((k - PI / 2.0).abs() < 1e-3, "{k}");
        let square = BoundaryCurve::square(1.0, 8).unwrap();
        // midpoints of opposite sides: arc 4 over chord 2
        let k = chordarc_constant(&square, usize::MAX).unwrap();
        assert!((k - 2.0).abs() < 1e-12, "{k}");
        let sub = chordarc_constant(&circle, 100).unwrap();
        assert!(sub <= k.max(PI / 2.0) + 1e-12 && sub > 1.0);
    }

    #[test]
    fn cusp_is_not_chord_arc() {
        let map = ConformalMap::new(MapCatalogEntry::power_corner(2.0)).unwrap();
        let mut prev = 0.0;
        for n in [256, 512, 1024] {
            let k = chordarc_constant(&BoundaryCurve::from_map(&map, n).unwrap(), usize::MAX).unwrap();
            assert!(k > 1.5 * prev, "{n}: {k}");
            prev = k;
        }
    }
}
