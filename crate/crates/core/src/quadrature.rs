//! Area quadrature on the disc, graded towards the boundary and towards a
//! focus direction.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(n).ok_or_else(|| invalid("nodes", "at least one node is needed"))?;
    let rule = GaussLegendre::new(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect())
}

/// Shape of a polar product rule on the disc.
///
/// Radially: Gauss–Legendre on the bands `[1 - 2^{-k}, 1 - 2^{-k-1}]`,
/// `k < levels`, and on the last band `[1 - 2^{-levels}, 1]`. Angularly:
/// panels whose edges sit at `focus ± π 2^{-j}`, `j = 0..=levels`, each with
/// its own Gauss–Legendre rule, so features of width `2^{-levels}` around the
/// focus are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscRuleSpec {
    pub levels: u32,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub focus: f64,
}

impl Default for DiscRuleSpec {
    fn default() -> Self {
        Self {
            levels: 16,
            radial_nodes: 8,
            angular_nodes: 8,
            focus: 0.0,
        }
    }
}

impl DiscRuleSpec {
    /// Twice as many nodes per panel in both directions.
    pub fn refined(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            angular_nodes: 2 * self.angular_nodes,
            ..*self
        }
    }

    pub fn focused(&self, focus: f64) -> Self {
        Self { focus, ..*self }
    }

    /// Nodes `z` with weights for `∫ f dm` (area element included).
    pub fn area_rule(&self) -> Result<Vec<(Complex64, f64)>> {
        let radial = radial_rule(self.levels, self.radial_nodes)?;
        let angular = angular_rule(self.levels, self.angular_nodes, self.focus)?;
        let mut out = Vec::with_capacity(radial.len() * angular.len());
        for &(r, wr) in &radial {
            for &(t, wt) in &angular {
                out.push((Complex64::from_polar(r, t), wr * r * wt));
            }
        }
        Ok(out)
    }
}

/// Radial nodes and weights on `[0, 1]` graded geometrically towards 1.
pub fn radial_rule(levels: u32, nodes: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for k in 0..=levels {
        let a = 1.0 - (-(k as f64)).exp2();
        let b = if k == levels {
            1.0
        } else {
            1.0 - (-(k as f64) - 1.0).exp2()
        };
        out.extend(gauss_legendre(nodes, a, b)?);
    }
    Ok(out)
}

/// Angular nodes and weights on a full turn, graded towards `focus`.
pub fn angular_rule(levels: u32, nodes: usize, focus: f64) -> Result<Vec<(f64, f64)>> {
    let mut edges: Vec<f64> = (0..=levels).map(|j| PI * (-(j as f64)).exp2()).collect();
    edges.push(0.0);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        out.extend(gauss_legendre(nodes, focus + w[1], focus + w[0])?);
        out.extend(gauss_legendre(nodes, focus - w[0], focus - w[1])?);
    }
    debug_assert!((out.iter().map(|p| p.1).sum::<f64>() - TAU).abs() < 1e-9);
    Ok(out)
}
