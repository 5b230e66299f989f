//! Generational stopping-time decomposition of a Carleson box driven by the
//! oscillation of `log|φ'|`.
//!
//! Boxes are addressed by their position in the dyadic tree of the root arc,
//! which need not itself be dyadic. A box stops when some sample of its top
//! deviates from the current reference value by more than `log M`; it then
//! becomes the reference for everything below it. The region of a reference
//! box is its own top together with the tops of all non-stopped descendants
//! it governs.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{bmo_norm_estimate, DEFAULT_TOP_SAMPLES};
use crate::disc::{carleson_box, top_grid_shape, BoxTop, CarlesonBox, CircleArc, DyadicIndex};
use crate::error::{invalid, Result};
use crate::maps::ConformalMap;
use crate::measure::{pullback, EmbeddingParams, PlanarMeasure, DEFAULT_INVERSION_TOL};

pub const MAX_STOPPING_DEPTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingConfig {
    /// Threshold `M > 1`.
    pub m: f64,
    /// Deepest level below the root that is examined.
    pub max_depth: usize,
    /// Samples per top for the stopping test.
    pub top_samples: usize,
}

impl StoppingConfig {
    pub fn new(m: f64, max_depth: usize, top_samples: usize) -> Result<Self> {
        let c = Self {
            m,
            max_depth,
            top_samples,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0 && self.m.is_finite()) {
            return Err(invalid("M", format!("{} is not above 1", self.m)));
        }
        if self.max_depth > MAX_STOPPING_DEPTH {
            return Err(invalid(
                "max_depth",
                format!("{} exceeds {MAX_STOPPING_DEPTH}", self.max_depth),
            ));
        }
        if self.top_samples < 2 {
            return Err(invalid("top_samples", "at least two samples are needed"));
        }
        Ok(())
    }

    /// `M = exp(1 + ‖log|φ'|‖_*)` with the dyadic BMO estimate at depth 10.
    pub fn default_threshold(map: &ConformalMap) -> Result<f64> {
        Ok((1.0 + bmo_norm_estimate(map, 10, 64)?.value).exp())
    }

    pub fn log_m(&self) -> f64 {
        self.m.ln()
    }
}

/// The root or a stopped box, with the region it governs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionNode {
    /// Position below the root arc.
    pub index: DyadicIndex,
    pub arc: CircleArc,
    /// 0 for the root, `n` for boxes of `G_n`.
    pub generation: usize,
    pub parent: Option<usize>,
    /// `z_I`, the centre of the box's top.
    pub reference: Complex64,
    pub reference_log: f64,
    /// Sampled deviation from the parent reference that triggered the stop.
    pub stop_oscillation: f64,
    /// Descendant tops governed by this node (not stopped, within depth).
    pub governed: Vec<DyadicIndex>,
}

impl RegionNode {
    pub fn top(&self) -> BoxTop {
        BoxTop::new(self.arc)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerationTree {
    pub root: CarlesonBox,
    pub config: StoppingConfig,
    /// `nodes[0]` is the root; the rest are stopped boxes.
    pub nodes: Vec<RegionNode>,
    /// Node ids of `G_1, G_2, …`.
    pub generations: Vec<Vec<usize>>,
    /// Boxes one level below `max_depth` that were never examined.
    pub unresolved: Vec<DyadicIndex>,
}

impl GenerationTree {
    pub fn root_arc(&self) -> CircleArc {
        self.root.arc
    }

    /// Arc of the box at `index` below the root.
    pub fn arc_of(&self, index: DyadicIndex) -> CircleArc {
        self.root.arc.subarc(index.level, index.index)
    }

    pub fn region_count(&self) -> usize {
        self.nodes.len()
    }

    /// Area of region `id`: its own top plus the governed tops.
    pub fn region_area(&self, id: usize) -> f64 {
        let node = &self.nodes[id];
        node.top().area()
            + node
                .governed
                .iter()
                .map(|&i| BoxTop::new(self.arc_of(i)).area())
                .sum::<f64>()
    }

    pub fn unresolved_area(&self) -> f64 {
        self.unresolved
            .iter()
            .map(|&i| carleson_box(self.arc_of(i)).area())
            .sum()
    }

    /// Stopped-node lookup by position.
    pub fn node_index(&self) -> HashMap<DyadicIndex, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.index, i)).collect()
    }

    /// Region owning the box at `index`: the nearest stopped ancestor (or
    /// the box itself when it stopped).
    pub fn owner(&self, index: DyadicIndex, lookup: &HashMap<DyadicIndex, usize>) -> usize {
        let mut i = index;
        loop {
            if let Some(&id) = lookup.get(&i) {
                return id;
            }
            match i.parent() {
                Some(p) => i = p,
                None => return 0,
            }
        }
    }

    /// One line per root or stopped box: generation, arc endpoints in
    /// radians, and `log|φ'(z_I)|`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# generation start_angle end_angle reference_log_abs_deriv\n");
        for n in &self.nodes {
            let _ = writeln!(
                s,
                "{} {:.12} {:.12} {:.12}",
                n.generation,
                n.arc.start_angle(),
                n.arc.end_angle(),
                n.reference_log
            );
        }
        s
    }
}

fn top_deviation(map: &ConformalMap, top: &BoxTop, reference_log: f64, samples: usize) -> f64 {
    let (nr, na) = top_grid_shape(samples);
    top.sample_grid(nr, na)
        .into_iter()
        .map(|z| (map.log_abs_deriv(z) - reference_log).abs())
        .fold(0.0, f64::max)
}

/// Builds the generations below `root`.
pub fn build_generations(map: &ConformalMap, root: CarlesonBox, config: StoppingConfig) -> Result<GenerationTree> {
    config.validate()?;
    let log_m = config.log_m();
    let root_top = root.top();
    let root_ref = root_top.center();
    let mut tree = GenerationTree {
        root,
        config,
        nodes: vec![RegionNode {
            index: DyadicIndex::ROOT,
            arc: root.arc,
            generation: 0,
            parent: None,
            reference: root_ref,
            reference_log: map.log_abs_deriv(root_ref),
            stop_oscillation: 0.0,
            governed: Vec::new(),
        }],
        generations: Vec::new(),
        unresolved: Vec::new(),
    };
    // (box, id of the region it falls under)
    let mut stack: Vec<(DyadicIndex, usize)> = DyadicIndex::ROOT.children().into_iter().rev().map(|c| (c, 0)).collect();
    while let Some((idx, owner)) = stack.pop() {
        if idx.level as usize > config.max_depth {
            tree.unresolved.push(idx);
            continue;
        }
        let arc = root.arc.subarc(idx.level, idx.index);
        let top = BoxTop::new(arc);
        let dev = top_deviation(map, &top, tree.nodes[owner].reference_log, config.top_samples);
        let next_owner = if dev > log_m {
            let reference = top.center();
            let generation = tree.nodes[owner].generation + 1;
            let id = tree.nodes.len();
            tree.nodes.push(RegionNode {
                index: idx,
                arc,
                generation,
                parent: Some(owner),
                reference,
                reference_log: map.log_abs_deriv(reference),
                stop_oscillation: dev,
                governed: Vec::new(),
            });
            if tree.generations.len() < generation {
                tree.generations.push(Vec::new());
            }
            tree.generations[generation - 1].push(id);
            id
        } else {
            tree.nodes[owner].governed.push(idx);
            owner
        };
        for c in idx.children().into_iter().rev() {
            stack.push((c, next_owner));
        }
    }
    Ok(tree)
}

/// Sampled oscillation of `log|φ'|` over a region, relative to its reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionOscillation {
    /// Over the governed descendant tops.
    pub governed: f64,
    /// Over the region's own top.
    pub own_top: f64,
    pub total: f64,
}

/// `max |log|φ'(z)| - log|φ'(z_ref)||` over `samples` points per top of the
/// region.
pub fn region_oscillation(
    map: &ConformalMap,
    tree: &GenerationTree,
    region: usize,
    samples: usize,
) -> Result<RegionOscillation> {
    let node = tree
        .nodes
        .get(region)
        .ok_or_else(|| invalid("region", format!("no region {region}")))?;
    if samples < 2 {
        return Err(invalid("samples", "at least two samples are needed"));
    }
    let own_top = top_deviation(map, &node.top(), node.reference_log, samples);
    let governed = node
        .governed
        .par_iter()
        .map(|&i| top_deviation(map, &BoxTop::new(tree.arc_of(i)), node.reference_log, samples))
        .reduce(|| 0.0, f64::max);
    Ok(RegionOscillation {
        governed,
        own_top,
        total: governed.max(own_top),
    })
}

/// Bound on how far the true sup over any top of the tree can exceed the
/// sampled max: the Lipschitz bound of `log|φ'|` on the top's outer circle
/// times the covering radius of the sample grid.
pub fn sampling_slack(map: &ConformalMap, tree: &GenerationTree) -> f64 {
    let (nr, na) = top_grid_shape(tree.config.top_samples);
    let slack = |top: BoxTop| map.dlog_bound(top.outer_radius) * top.covering_radius(nr, na);
    tree.nodes
        .par_iter()
        .map(|n| {
            n.governed
                .iter()
                .map(|&i| slack(BoxTop::new(tree.arc_of(i))))
                .fold(slack(n.top()), f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `Σ_{I ∈ G_n} |I| / |I_root|` for `n = 1, 2, …`.
pub fn generation_decay(tree: &GenerationTree) -> Vec<f64> {
    let root_len = tree.root.arc.length_turns();
    tree.generations
        .iter()
        .map(|g| g.iter().map(|&i| tree.nodes[i].arc.length_turns()).sum::<f64>() / root_len)
        .collect()
}

/// Largest ratio `t_n / t_{n-1}` between consecutive generation totals,
/// `n ≥ 2`; 0 when fewer than two generations exist.
pub fn decay_ratio(totals: &[f64]) -> f64 {
    totals.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionPullback {
    /// `Σ_l Σ_{z ∈ R_l} m / |φ'(z_l)|^{s}` with the frozen reference per region.
    pub via_regions: f64,
    /// `Σ_{z ∈ S} m / |φ'(z)|^{s}`, the direct weighted pullback of the box.
    pub direct: f64,
    /// Mass whose preimage fell below `max_depth` (charged to the owning region).
    pub unresolved_mass: f64,
    /// Atoms that could not be inverted.
    pub failures: usize,
}

impl RegionPullback {
    pub fn ratio(&self) -> f64 {
        if self.direct == 0.0 && self.via_regions == 0.0 {
            1.0
        } else {
            self.via_regions / self.direct
        }
    }
}

/// Weighted pullback mass of the root box computed region by region with
/// exponent `q/p` from `params`.
pub fn pullback_via_regions(
    map: &ConformalMap,
    mu: &PlanarMeasure,
    tree: &GenerationTree,
    params: EmbeddingParams,
) -> Result<RegionPullback> {
    params.validate()?;
    let s = params.hardy_exponent();
    let pb = pullback(map, mu, DEFAULT_INVERSION_TOL)?;
    let lookup = tree.node_index();
    let h = tree.root.arc.length_turns();
    let mut out = RegionPullback {
        via_regions: 0.0,
        direct: 0.0,
        unresolved_mass: 0.0,
        failures: pb.rejected.len(),
    };
    for a in pb.measure.mass_elements() {
        let z = a.point;
        if !tree.root.contains(z) {
            continue;
        }
        let t = crate::disc::turn_of(z);
        let rel = tree.root.arc.relative_position(t).unwrap_or(0.0);
        let depth = ((h / (1.0 - z.norm())).log2().floor().max(0.0)) as u32;
        let level = if depth as usize > tree.config.max_depth {
            out.unresolved_mass += a.weight;
            tree.config.max_depth as u32
        } else {
            depth
        };
        let index = DyadicIndex {
            level,
            index: ((rel * (1u64 << level) as f64).floor() as u64).min((1u64 << level) - 1),
        };
        let region = &tree.nodes[tree.owner(index, &lookup)];
        out.via_regions += a.weight * (-s * region.reference_log).exp();
        out.direct += a.weight * (-s * map.log_abs_deriv(z)).exp();
    }
    Ok(out)
}

/// Default root used in examples: the arc of length π/2 centred at π.
pub fn default_root() -> CarlesonBox {
    carleson_box(CircleArc::new(std::f64::consts::PI, std::f64::consts::FRAC_PI_2).expect("valid arc"))
}

pub fn default_config(map: &ConformalMap) -> Result<StoppingConfig> {
    StoppingConfig::new(StoppingConfig::default_threshold(map)?, 12, DEFAULT_TOP_SAMPLES)
}
