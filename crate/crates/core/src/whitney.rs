//! Quadtree Whitney covers of a polygonal domain and the graph version of the
//! quasi-hyperbolic distance.

use num_complex::Complex64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{boundary_distance, Domain};
use crate::error::{Error, Result};

pub const MAX_COVER_DEPTH: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneySquare {
    pub center: Complex64,
    pub side: f64,
    pub depth: usize,
    /// `δ_Ω` at the centre.
    pub delta: f64,
}

impl WhitneySquare {
    pub fn diam(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    /// Closed square membership.
    pub fn contains(&self, w: Complex64) -> bool {
        let h = self.side / 2.0;
        (w.re - self.center.re).abs() <= h && (w.im - self.center.im).abs() <= h
    }

    fn touches(&self, other: &Self) -> bool {
        let reach = (self.side + other.side) / 2.0 * (1.0 + 1e-9);
        (self.center.re - other.center.re).abs() <= reach && (self.center.im - other.center.im).abs() <= reach
    }
}

/// Kept squares plus the bookkeeping of what the refinement could not decide.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhitneySquareCover {
    pub squares: Vec<WhitneySquare>,
    /// Number of squares kept at each quadtree depth.
    pub per_depth: Vec<usize>,
    /// Cells meeting the domain that were still undecided at `max_depth`.
    pub dropped: usize,
    pub dropped_area: f64,
}

impl WhitneySquareCover {
    pub fn area(&self) -> f64 {
        self.squares.iter().map(|s| s.side * s.side).sum()
    }

    pub fn locate(&self, w: Complex64) -> Option<usize> {
        self.squares.iter().position(|s| s.contains(w))
    }
}

/// Quadtree refinement of a bounding square: a cell whose centre lies in `Ω`
/// is kept once `diam ≤ ½ δ(centre)`; cells provably outside are discarded;
/// everything else is split until `max_depth`.
///
/// A kept cell's parent failed the test, which forces `diam ≥ (2/9) δ`.
pub fn whitney_cover(domain: &Domain, max_depth: usize) -> Result<WhitneySquareCover> {
    if max_depth > MAX_COVER_DEPTH {
        return Err(Error::DepthLimit {
            depth: max_depth,
            limit: MAX_COVER_DEPTH,
        });
    }
    let (lo, hi) = domain.curve().bounding_box();
    let side = (hi.re - lo.re).max(hi.im - lo.im) * 1.01;
    let mut cells = vec![(lo + hi) * 0.5];
    let mut cover = WhitneySquareCover {
        squares: Vec::new(),
        per_depth: vec![0; max_depth + 1],
        dropped: 0,
        dropped_area: 0.0,
    };
    for depth in 0..=max_depth {
        let s = side / (1u64 << depth) as f64;
        let diam = s * std::f64::consts::SQRT_2;
        let verdicts: Vec<(Complex64, f64, bool)> = cells
            .par_iter()
            .map(|&c| (c, boundary_distance(domain, c), domain.contains(c)))
            .collect();
        let mut next = Vec::new();
        for (c, d, inside) in verdicts {
            if inside && diam <= 0.5 * d {
                cover.squares.push(WhitneySquare {
                    center: c,
                    side: s,
                    depth,
                    delta: d,
                });
                cover.per_depth[depth] += 1;
            } else if !inside && d > diam / 2.0 {
                continue;
            } else if depth == max_depth {
                cover.dropped += 1;
                cover.dropped_area += s * s;
            } else {
                let q = s / 4.0;
                for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
                    next.push(c + Complex64::new(dx, dy));
                }
            }
        }
        cells = next;
    }
    Ok(cover)
}

/// Shortest path through touching squares with edge weight
/// `|c₁ - c₂| / δ(midpoint)`; the endpoints attach to the squares containing
/// them with the same weight.
pub fn quasihyperbolic_distance(
    domain: &Domain,
    w1: Complex64,
    w2: Complex64,
    cover: &WhitneySquareCover,
) -> Result<f64> {
    if w1 == w2 {
        return Ok(0.0);
    }
    let s1 = cover.locate(w1).ok_or(Error::NotCovered(w1))?;
    let s2 = cover.locate(w2).ok_or(Error::NotCovered(w2))?;
    let weight = |a: Complex64, b: Complex64| (a - b).norm() / boundary_distance(domain, (a + b) * 0.5);

    let mut g: UnGraph<(), f64> = UnGraph::with_capacity(cover.squares.len() + 2, 4 * cover.squares.len());
    let nodes: Vec<NodeIndex> = cover.squares.iter().map(|_| g.add_node(())).collect();
    let mut order: Vec<usize> = (0..cover.squares.len()).collect();
    let left = |i: usize| cover.squares[i].center.re - cover.squares[i].side / 2.0;
    order.sort_by(|&i, &j| left(i).total_cmp(&left(j)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let sq = &cover.squares[i];
        active.retain(|&j| {
            let o = &cover.squares[j];
            o.center.re + o.side / 2.0 >= left(i) - 1e-12
        });
        for &j in &active {
            if sq.touches(&cover.squares[j]) {
                g.add_edge(nodes[i], nodes[j], weight(sq.center, cover.squares[j].center));
            }
        }
        active.push(i);
    }
    let a = g.add_node(());
    let b = g.add_node(());
    g.add_edge(a, nodes[s1], weight(w1, cover.squares[s1].center));
    g.add_edge(b, nodes[s2], weight(w2, cover.squares[s2].center));
    let costs = dijkstra(&g, a, Some(b), |e| *e.weight());
    costs.get(&b).copied().ok_or(Error::Disconnected { from: w1, to: w2 })
}
