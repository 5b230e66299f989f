//! Arcs of the unit circle, Carleson boxes, their tops, cones and Whitney
//! balls of the unit disc.
//!
//! Arcs are stored in turns (fractions of the full circle) so that dyadic
//! arcs `[j/2^k, (j+1)/2^k)` are represented exactly. All arcs and boxes are
//! half-open: the left endpoint of the arc and the inner radius of the box are
//! included, the right endpoint and the unit circle are not.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default Whitney constant `c` in `c·(1-|z|) <= r <= (1-|z|)/2`.
pub const WHITNEY_C: f64 = 0.25;

/// Default aperture of nontangential cones.
pub const DEFAULT_APERTURE: f64 = 2.0;

/// Deepest dyadic level accepted by [`dyadic_boxes`].
pub const MAX_DYADIC_DEPTH: usize = 30;

/// Position of `z` on the circle in turns, in `[0, 1)`.
pub fn turn_of(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re) / TAU;
    if t >= 0.0 {
        t
    } else {
        let shifted = t + 1.0;
        if shifted >= 1.0 {
            // largest double below one: the point sits just before angle 2π
            1.0 - f64::EPSILON / 2.0
        } else {
            shifted
        }
    }
}

/// A half-open arc `[start, start + length)` of the unit circle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CircleArc {
    start: f64,
    length: f64,
}

impl CircleArc {
    /// Arc of `length` radians centred at `center_angle`.
    pub fn new(center_angle: f64, length: f64) -> Result<Self> {
        if !center_angle.is_finite() {
            return Err(invalid("center_angle", "must be finite"));
        }
        if !(length > 0.0 && length <= TAU * (1.0 + 1e-15)) {
            return Err(invalid("length", format!("{length} not in (0, 2π]")));
        }
        let length = (length / TAU).min(1.0);
        let start = (center_angle / TAU - length / 2.0).rem_euclid(1.0);
        Ok(Self::from_parts(start, length))
    }

    /// Arc from a start position and a length, both in turns.
    pub fn from_turns(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !(length > 0.0 && length <= 1.0) {
            return Err(invalid("length", format!("{length} turns not in (0, 1]")));
        }
        Ok(Self::from_parts(start.rem_euclid(1.0), length))
    }

    fn from_parts(start: f64, length: f64) -> Self {
        let start = if start >= 1.0 { 0.0 } else { start };
        Self { start, length }
    }

    pub fn full() -> Self {
        Self {
            start: 0.0,
            length: 1.0,
        }
    }

    /// The `index`-th arc of level `level`, i.e. `[index/2^level, (index+1)/2^level)`.
    pub fn dyadic(level: u32, index: u64) -> Self {
        let scale = (-(level as f64)).exp2();
        Self {
            start: (index as f64 * scale).rem_euclid(1.0),
            length: scale,
        }
    }

    pub fn start_turns(&self) -> f64 {
        self.start
    }

    pub fn length_turns(&self) -> f64 {
        self.length
    }

    /// Arc length in radians.
    pub fn length(&self) -> f64 {
        self.length * TAU
    }

    pub fn start_angle(&self) -> f64 {
        self.start * TAU
    }

    pub fn end_angle(&self) -> f64 {
        (self.start + self.length) * TAU
    }

    pub fn center_angle(&self) -> f64 {
        ((self.start + self.length / 2.0) * TAU).rem_euclid(TAU)
    }

    /// Unit vector at the midpoint of the arc.
    pub fn midpoint(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.center_angle())
    }

    pub fn contains_turn(&self, t: f64) -> bool {
        if self.length >= 1.0 {
            return true;
        }
        (t - self.start).rem_euclid(1.0) < self.length
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        self.contains_turn((theta / TAU).rem_euclid(1.0))
    }

    /// Position of `t` inside the arc as a fraction of its length, if inside.
    pub fn relative_position(&self, t: f64) -> Option<f64> {
        let rel = (t - self.start).rem_euclid(1.0);
        if self.length >= 1.0 {
            Some(rel)
        } else if rel < self.length {
            Some(rel / self.length)
        } else {
            None
        }
    }

    pub fn rotated(&self, theta: f64) -> Self {
        Self::from_parts((self.start + theta / TAU).rem_euclid(1.0), self.length)
    }

    /// Left and right halves.
    pub fn halves(&self) -> (Self, Self) {
        let half = self.length / 2.0;
        (
            Self::from_parts(self.start, half),
            Self::from_parts((self.start + half).rem_euclid(1.0), half),
        )
    }

    /// The `index`-th of the `2^level` equal sub-arcs.
    pub fn subarc(&self, level: u32, index: u64) -> Self {
        let len = self.length * (-(level as f64)).exp2();
        Self::from_parts((self.start + index as f64 * len).rem_euclid(1.0), len)
    }
}

impl PartialEq for CircleArc {
    fn eq(&self, other: &Self) -> bool {
        let ds = (self.start - other.start).rem_euclid(1.0);
        (ds == 0.0 || ds == 1.0) && self.length == other.length
    }
}

/// Carleson box `S(I) = { r e^{iθ} : e^{iθ} ∈ I, 1 - |I|/2π <= r < 1 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonBox {
    pub arc: CircleArc,
    pub inner_radius: f64,
}

/// Builds the Carleson box over `arc`.
pub fn carleson_box(arc: CircleArc) -> CarlesonBox {
    CarlesonBox {
        arc,
        inner_radius: (1.0 - arc.length_turns()).max(0.0),
    }
}

impl CarlesonBox {
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r >= self.inner_radius && r < 1.0 && self.arc.contains_turn(turn_of(z))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.arc.length() * (1.0 - self.inner_radius * self.inner_radius)
    }

    pub fn top(&self) -> BoxTop {
        BoxTop::new(self.arc)
    }

    pub fn children(&self) -> (CarlesonBox, CarlesonBox) {
        let (l, r) = self.arc.halves();
        (carleson_box(l), carleson_box(r))
    }

    pub fn rotated(&self, theta: f64) -> Self {
        carleson_box(self.arc.rotated(theta))
    }
}

/// Top `T(S)` of a Carleson box: the radii `[1 - |I|/2π, 1 - |I|/4π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxTop {
    pub arc: CircleArc,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl BoxTop {
    pub fn new(arc: CircleArc) -> Self {
        let h = arc.length_turns();
        Self {
            arc,
            inner_radius: (1.0 - h).max(0.0),
            outer_radius: 1.0 - h / 2.0,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r >= self.inner_radius && r < self.outer_radius && self.arc.contains_turn(turn_of(z))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.arc.length() * (self.outer_radius * self.outer_radius - self.inner_radius * self.inner_radius)
    }

    /// Radial and angular midpoint of the top.
    pub fn center(&self) -> Complex64 {
        Complex64::from_polar(0.5 * (self.inner_radius + self.outer_radius), self.arc.center_angle())
    }

    /// Cell-centred polar grid with `radial × angular` points.
    pub fn sample_grid(&self, radial: usize, angular: usize) -> Vec<Complex64> {
        let dr = (self.outer_radius - self.inner_radius) / radial as f64;
        let dt = self.arc.length() / angular as f64;
        let t0 = self.arc.start_angle();
        let mut out = Vec::with_capacity(radial * angular);
        for i in 0..radial {
            let r = self.inner_radius + (i as f64 + 0.5) * dr;
            for j in 0..angular {
                out.push(Complex64::from_polar(r, t0 + (j as f64 + 0.5) * dt));
            }
        }
        out
    }

    /// Every point of the top lies within this Euclidean distance of a point
    /// of [`BoxTop::sample_grid`] with the same resolution.
    pub fn covering_radius(&self, radial: usize, angular: usize) -> f64 {
        let dr = (self.outer_radius - self.inner_radius) / radial as f64;
        let arc = self.outer_radius * self.arc.length() / angular as f64;
        0.5 * dr.hypot(arc)
    }
}

/// Splits a total sample budget into a `radial × 2·radial` grid.
pub fn top_grid_shape(samples: usize) -> (usize, usize) {
    let radial = ((samples as f64 / 2.0).sqrt().round() as usize).max(1);
    (radial, 2 * radial)
}

/// Nontangential cone `Γ_ξ = { z : |z - e^{iξ}| < α (1 - |z|) }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub vertex_angle: f64,
    pub aperture: f64,
}

impl Cone {
    pub fn new(vertex_angle: f64, aperture: f64) -> Result<Self> {
        if !(aperture > 0.0) {
            return Err(invalid("aperture", "must be positive"));
        }
        Ok(Self { vertex_angle, aperture })
    }

    pub fn vertex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.vertex_angle)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        cone_contains(self, z)
    }
}

pub fn cone_contains(cone: &Cone, z: Complex64) -> bool {
    let r = z.norm();
    r < 1.0 && (z - cone.vertex()).norm() < cone.aperture * (1.0 - r)
}

/// Ball `B(z, r)` of the disc in the Whitney band `c(1-|z|) <= r <= (1-|z|)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscWhitneyBall {
    pub center: Complex64,
    pub radius: f64,
}

impl DiscWhitneyBall {
    pub fn new(center: Complex64, radius: f64, c: f64) -> Result<Self> {
        let delta = 1.0 - center.norm();
        if !(delta > 0.0) {
            return Err(Error::OutsideDisc { point: center });
        }
        if radius < c * delta || radius > 0.5 * delta {
            return Err(invalid(
                "radius",
                format!("{radius} outside Whitney band [{}, {}]", c * delta, 0.5 * delta),
            ));
        }
        Ok(Self { center, radius })
    }

    /// The ball of radius `(1 - |z|)/2` at `z`.
    pub fn at(center: Complex64) -> Result<Self> {
        let delta = 1.0 - center.norm();
        Self::new(center, 0.5 * delta, WHITNEY_C)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// Position of a box in the dyadic tree of a root arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub level: u32,
    pub index: u64,
}

impl DyadicIndex {
    pub const ROOT: Self = Self { level: 0, index: 0 };

    pub fn children(self) -> [Self; 2] {
        [
            Self {
                level: self.level + 1,
                index: 2 * self.index,
            },
            Self {
                level: self.level + 1,
                index: 2 * self.index + 1,
            },
        ]
    }

    pub fn parent(self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    /// Ancestor at `level` (self if the level matches).
    pub fn ancestor(self, level: u32) -> Self {
        debug_assert!(level <= self.level);
        Self {
            level,
            index: self.index >> (self.level - level),
        }
    }
}

/// All dyadic arcs of levels `0..=depth`, level by level.
pub fn dyadic_arcs(depth: usize) -> Result<Vec<(DyadicIndex, CircleArc)>> {
    if depth > MAX_DYADIC_DEPTH {
        return Err(Error::DepthLimit {
            depth,
            limit: MAX_DYADIC_DEPTH,
        });
    }
    let mut out = Vec::with_capacity((1usize << (depth + 1)) - 1);
    for level in 0..=depth as u32 {
        for index in 0..(1u64 << level) {
            out.push((DyadicIndex { level, index }, CircleArc::dyadic(level, index)));
        }
    }
    Ok(out)
}

/// The `2^k` boxes over level-`k` dyadic arcs for every `k <= depth`.
pub fn dyadic_boxes(depth: usize) -> Result<Vec<CarlesonBox>> {
    Ok(dyadic_arcs(depth)?
        .into_iter()
        .map(|(_, arc)| carleson_box(arc))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn box_inner_radius() {
        assert_eq!(carleson_box(CircleArc::new(0.0, TAU).unwrap()).inner_radius, 0.0);
        assert_eq!(carleson_box(CircleArc::new(0.0, PI).unwrap()).inner_radius, 0.5);
        for k in 0..16 {
            let theta = k as f64 * 0.41;
            let b = carleson_box(CircleArc::new(theta, PI / 2.0).unwrap());
            assert_eq!(b.inner_radius, 0.75);
        }
    }

    #[test]
    fn dyadic_counts_and_limit() {
        assert_eq!(dyadic_boxes(0).unwrap().len(), 1);
        assert_eq!(dyadic_boxes(2).unwrap().len(), 7);
        assert_eq!(dyadic_boxes(10).unwrap().len(), 2047);
        assert!(matches!(dyadic_boxes(31), Err(Error::DepthLimit { .. })));
    }

    #[test]
    fn level_ten_arcs_tile_the_circle() {
        let arcs: Vec<_> = dyadic_arcs(10)
            .unwrap()
            .into_iter()
            .filter(|(idx, _)| idx.level == 10)
            .map(|(_, a)| a)
            .collect();
        let total: f64 = arcs.iter().map(|a| a.length_turns()).sum();
        assert_eq!(total, 1.0);
        for w in arcs.windows(2) {
            assert_eq!(w[0].start_turns() + w[0].length_turns(), w[1].start_turns());
        }
        let last = arcs.last().unwrap();
        assert_eq!(last.start_turns() + last.length_turns(), 1.0);
        // each sampled angle falls in exactly one arc
        for s in 0..5000 {
            let t = s as f64 / 5000.0;
            assert_eq!(arcs.iter().filter(|a| a.contains_turn(t)).count(), 1);
        }
    }

    #[test]
    fn dyadic_endpoints_are_half_open() {
        let a = CircleArc::dyadic(3, 2);
        assert!(a.contains_turn(0.25));
        assert!(!a.contains_turn(0.375));
        let b = carleson_box(a);
        assert!(b.contains(Complex64::from_polar(0.875, TAU * 0.25)));
        assert!(!b.contains(Complex64::from_polar(0.8749, TAU * 0.3)));
    }

    #[test]
    fn cone_membership() {
        let cone = Cone::new(0.0, 2.0).unwrap();
        assert!(cone_contains(&cone, Complex64::new(0.0, 0.0)));
        assert!(!cone_contains(&cone, Complex64::new(-0.9, 0.0)));
        assert!(cone_contains(&cone, Complex64::new(0.5, 0.0)));
    }

    #[test]
    fn whitney_band_enforced() {
        let z = Complex64::new(0.5, 0.0);
        assert!(DiscWhitneyBall::new(z, 0.25, WHITNEY_C).is_ok());
        assert!(DiscWhitneyBall::new(z, 0.26, WHITNEY_C).is_err());
        assert!(DiscWhitneyBall::new(z, 0.1, WHITNEY_C).is_err());
        assert!(DiscWhitneyBall::at(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn nesting_and_rotation() {
        let boxes = dyadic_arcs(6).unwrap();
        for (idx, arc) in boxes.iter().filter(|(i, _)| i.level > 0) {
            let parent = CircleArc::dyadic(idx.level - 1, idx.index / 2);
            let mid = arc.start_turns() + arc.length_turns() / 2.0;
            assert!(parent.contains_turn(arc.start_turns()));
            assert!(parent.contains_turn(mid));
            let parents = boxes
                .iter()
                .filter(|(j, a)| j.level == idx.level - 1 && a.contains_turn(mid))
                .count();
            assert_eq!(parents, 1);
        }
        let b = carleson_box(CircleArc::new(0.3, 0.8).unwrap());
        let rb = b.rotated(1.1);
        for k in 0..50 {
            let z = Complex64::from_polar(0.5 + 0.01 * k as f64, 0.3 + 0.8 * (k as f64 / 50.0 - 0.5));
            assert_eq!(b.contains(z), rb.contains(z * Complex64::from_polar(1.0, 1.1)));
        }
    }

    #[test]
    fn top_grid_is_inside_top() {
        let top = carleson_box(CircleArc::dyadic(4, 5)).top();
        let pts = top.sample_grid(4, 8);
        assert_eq!(pts.len(), 32);
        assert!(pts.iter().all(|z| top.contains(*z)));
        assert_eq!(top_grid_shape(32), (4, 8));
        assert_eq!(top_grid_shape(128), (8, 16));
    }
}
