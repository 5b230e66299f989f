//! Estimators built on a conformal map: oscillation of `log|φ'|` on box
//! tops, dyadic BMO of its boundary values, the discrete Poisson extension,
//! sampled nontangential maxima and the Koebe distance bounds.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{carleson_box, dyadic_arcs, top_grid_shape, BoxTop, CircleArc, DyadicIndex};
use crate::error::{invalid, Error, Result};
use crate::maps::ConformalMap;

/// Default number of samples per box top (a 4 × 8 polar grid).
pub const DEFAULT_TOP_SAMPLES: usize = 32;

/// Largest `| log|φ'(z₁)| - log|φ'(z₂)| |` over the sampled points of a top.
pub fn bloch_oscillation(map: &ConformalMap, top: &BoxTop, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(invalid("samples", "at least two samples are needed"));
    }
    let (nr, na) = top_grid_shape(samples);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in top.sample_grid(nr, na) {
        let v = map.log_abs_deriv(z);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// Largest Bloch oscillation over the tops of each dyadic level `0..=depth`.
pub fn bloch_sweep(map: &ConformalMap, depth: usize, samples: usize) -> Result<Vec<f64>> {
    let mut per_level = vec![0.0f64; depth + 1];
    for (idx, arc) in dyadic_arcs(depth)? {
        let osc = bloch_oscillation(map, &BoxTop::new(arc), samples)?;
        let slot = &mut per_level[idx.level as usize];
        *slot = slot.max(osc);
    }
    Ok(per_level)
}

/// Point `z_I = (1 - ℓ/2) ξ_I` attached to an arc, with `ℓ` the normalised
/// arc length (turns) and `ξ_I` its midpoint.
pub fn arc_reference_point(arc: &CircleArc) -> Complex64 {
    arc.midpoint() * (1.0 - arc.length_turns() / 2.0)
}

/// Result of [`bmo_norm_estimate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BmoEstimate {
    pub value: f64,
    /// Arc attaining the sup.
    pub worst_arc: Option<DyadicIndex>,
    /// Quadrature nodes dropped because the boundary value was not finite.
    pub skipped_nodes: usize,
}

/// Dyadic sup of `(1/|I|) ∫_I |log|φ'(ξ)| - log|φ'(z_I)|| dξ`, midpoint rule
/// with `quad_points` nodes per arc.
pub fn bmo_norm_estimate(map: &ConformalMap, depth: usize, quad_points: usize) -> Result<BmoEstimate> {
    if quad_points == 0 {
        return Err(invalid("quad_points", "must be positive"));
    }
    let mut best = BmoEstimate {
        value: 0.0,
        worst_arc: None,
        skipped_nodes: 0,
    };
    for (idx, arc) in dyadic_arcs(depth)? {
        let reference = map.log_abs_deriv(arc_reference_point(&arc));
        let step = arc.length() / quad_points as f64;
        let (mut sum, mut used) = (0.0, 0usize);
        for j in 0..quad_points {
            let theta = arc.start_angle() + (j as f64 + 0.5) * step;
            let v = map.boundary_log_abs_deriv(theta);
            if v.is_finite() {
                sum += (v - reference).abs();
                used += 1;
            } else {
                best.skipped_nodes += 1;
            }
        }
        if used > 0 {
            let avg = sum / used as f64;
            if avg > best.value {
                best.value = avg;
                best.worst_arc = Some(idx);
            }
        }
    }
    Ok(best)
}

/// Discrete Poisson integral of boundary samples `(θ_j, f_j)` on a uniform
/// periodic grid, evaluated at `z`.
pub fn poisson_extension(boundary_values: &[(f64, f64)], z: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisc { point: z });
    }
    let n = boundary_values.len();
    if n == 0 {
        return Err(invalid("boundary_values", "empty grid"));
    }
    let spacing = TAU / n as f64;
    for w in boundary_values.windows(2) {
        if ((w[1].0 - w[0].0) - spacing).abs() > 1e-9 {
            return Err(invalid("boundary_values", "grid is not uniform"));
        }
    }
    let k = 1.0 - z.norm_sqr();
    let total: f64 = boundary_values
        .iter()
        .map(|&(theta, f)| {
            let d = Complex64::from_polar(1.0, theta) - z;
            k / d.norm_sqr() * f
        })
        .sum();
    Ok(total / n as f64)
}

/// Uniform boundary grid `θ_j = 2πj/n` with the values of `f`.
pub fn boundary_grid(n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|j| {
            let t = TAU * j as f64 / n as f64;
            (t, f(t))
        })
        .collect()
}

/// Sampled nontangential maximum, reported with the cone aperture it used.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NontangentialMax {
    pub value: f64,
    pub aperture: f64,
    pub samples: usize,
}

/// Relative lateral offsets sampled at each radial level of the cone.
const CONE_OFFSETS: [f64; 9] = [0.0, -0.25, 0.25, -0.5, 0.5, -0.75, 0.75, -0.95, 0.95];

/// Max of `|u|` over points of `Γ_ξ` on the circles `|z| = 1 - 2^{-k}`,
/// `k = 0..=radial_levels`, each circle sampled across the cone's width.
pub fn nontangential_max<F>(u: F, vertex_angle: f64, aperture: f64, radial_levels: usize) -> Result<NontangentialMax>
where
    F: Fn(Complex64) -> f64,
{
    if !(aperture > 1.0) {
        return Err(invalid("aperture", "cones need aperture > 1 to reach the radius"));
    }
    let mut best = 0.0f64;
    let mut samples = 0usize;
    for k in 0..=radial_levels {
        let rho = 1.0 - (-(k as f64)).exp2();
        if rho == 0.0 {
            best = best.max(u(Complex64::new(0.0, 0.0)).abs());
            samples += 1;
            continue;
        }
        let width = aperture * (1.0 - rho);
        let cos_bound = (rho * rho + 1.0 - width * width) / (2.0 * rho);
        let t_max = if cos_bound <= -1.0 {
            std::f64::consts::PI
        } else {
            cos_bound.min(1.0).acos()
        };
        for s in CONE_OFFSETS {
            let z = Complex64::from_polar(rho, vertex_angle + s * t_max);
            if (z - Complex64::from_polar(1.0, vertex_angle)).norm() < width {
                best = best.max(u(z).abs());
                samples += 1;
            }
        }
    }
    Ok(NontangentialMax {
        value: best,
        aperture,
        samples,
    })
}

/// Koebe bounds `(¼|φ'(z)|(1-|z|²), |φ'(z)|(1-|z|²))` for `δ_Ω(φ(z))`.
pub fn koebe_delta_bounds(map: &ConformalMap, z: Complex64) -> Result<(f64, f64)> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisc { point: z });
    }
    let upper = map.deriv(z).norm() * (1.0 - z.norm_sqr());
    Ok((0.25 * upper, upper))
}

/// Reference point used for a Carleson box in the stopping-time argument:
/// the radial and angular centre of its top.
pub fn top_center(arc: &CircleArc) -> Complex64 {
    carleson_box(*arc).top().center()
}
