//! Certified enclosure of the largest-empty-disk quantity
//! `2 · max_{z∈S} dist(z, ∪ regions)` over an oriented square `S`.
//!
//! The estimator is a branch-and-bound over an adaptively refined grid
//! aligned to `S`. Every cell carries a certified upper bound for the
//! max-min distance over it, built from three ingredients:
//!
//!  * the 1-Lipschitz bound `d(center) + cell radius`,
//!  * the exact corner bound `max_corners d(·, R)` for a single convex
//!    region (distance to a convex set is convex),
//!  * for two square regions whose relevant edge dominates the whole cell,
//!    the exact maximum of `min` of the two resulting affine edge distances.
//!
//! Cells contained in one region are pruned at zero. The sampled center
//! distances are exact function values and give the lower endpoint. The
//! refinement runs in deterministic passes: splitting decisions in a pass
//! only depend on the lower bound frozen at the start of the pass, and all
//! parallel merges are max-reductions.

use super::{Disk, OrientedSquare, Point, SQRT_2};
use crate::error::Error;
use crate::interval::Interval;
use crate::Result;

/// Obstacle region: pieces are exact squares for affine systems and
/// certified disks otherwise.
#[derive(Debug, Clone, Copy)]
pub enum Region {
    Square(OrientedSquare),
    Disk(Disk),
}

#[derive(Debug, Clone, Copy)]
pub struct EmptyDiskOptions {
    /// Relative width target for the enclosure (dist scale).
    pub rel_tol: f64,
    /// Maximum number of refinement passes.
    pub max_passes: u32,
    /// Node budget per pass; exceeding it keeps the result certified but
    /// possibly wider than the target.
    pub node_budget: u64,
}

impl Default for EmptyDiskOptions {
    fn default() -> Self {
        Self {
            rel_tol: 0.05,
            max_passes: 4,
            node_budget: 30_000_000,
        }
    }
}

/// Certified enclosure of `2 · max_{z∈S̄} dist(z, ∪ regions)` with grid
/// pitch `h`: the lower endpoint is twice the best sampled distance, the
/// upper endpoint twice the certified cell-bound maximum.
pub fn largest_empty_disk(s: &OrientedSquare, regions: &[Region], h: f64) -> Result<Interval> {
    largest_empty_disk_opt(s, regions, h, &EmptyDiskOptions::default())
}

pub fn largest_empty_disk_opt(
    s: &OrientedSquare,
    regions: &[Region],
    h: f64,
    opts: &EmptyDiskOptions,
) -> Result<Interval> {
    let out = max_min_dist(s, regions, h, opts)?;
    Ok(Interval::new(
        (2.0 * out.lo).next_down().max(0.0),
        (2.0 * out.hi).next_up(),
    ))
}

/// Raw output of the branch-and-bound on the distance scale.
#[derive(Debug, Clone, Copy)]
pub struct MaxMinDist {
    /// Best exact sampled value of `min_i dist(z, R_i)`.
    pub lo: f64,
    /// Best sampled value of `min(min_i dist(z, R_i), dist(z, ∂S))`; this is
    /// the one that witnesses a disk fully inside `S`.
    pub lo_constrained: f64,
    /// Certified upper bound of the maximum over `S̄`.
    pub hi: f64,
    pub converged: bool,
}

pub fn max_min_dist(
    s: &OrientedSquare,
    regions: &[Region],
    h: f64,
    opts: &EmptyDiskOptions,
) -> Result<MaxMinDist> {
    if regions.is_empty() {
        return Err(Error::EmptyRegionList);
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("grid pitch must be > 0, got {h}")));
    }
    let ctx = Ctx::new(s, regions, h, opts);
    let hs = s.half_side();

    let mut lo = 0.0f64;
    let mut lo_con = 0.0f64;
    let mut hi = f64::INFINITY;
    let mut converged = false;
    for pass in 0..opts.max_passes.max(1) {
        // Pass 0 only refines to the requested grid; later passes refine
        // against the threshold frozen from the best lower bound so far.
        let threshold = if pass == 0 {
            f64::INFINITY
        } else {
            lo + ctx.width_target(lo)
        };
        let out = ctx.run_pass(threshold);
        lo = lo.max(out.lo);
        lo_con = lo_con.max(out.lo_con);
        hi = hi.min(out.hi);
        if hi <= lo + ctx.width_target(lo) * (1.0 + 1e-9) + 1e-300 && !out.saturated {
            converged = true;
            break;
        }
    }
    let _ = hs;
    Ok(MaxMinDist {
        lo,
        lo_constrained: lo_con,
        hi: hi.max(lo),
        converged,
    })
}

// Regions expressed in the frame where S is axis-aligned and centered at 0.
#[derive(Clone, Copy)]
struct LocalSquare {
    cx: f64,
    cy: f64,
    cos: f64,
    sin: f64,
    half: f64,
}

#[derive(Clone, Copy)]
enum LocalRegion {
    Sq(LocalSquare),
    Dk { cx: f64, cy: f64, r: f64 },
}

impl LocalRegion {
    fn center(&self) -> (f64, f64) {
        match self {
            LocalRegion::Sq(s) => (s.cx, s.cy),
            LocalRegion::Dk { cx, cy, .. } => (*cx, *cy),
        }
    }

    fn radius_bound(&self) -> f64 {
        match self {
            LocalRegion::Sq(s) => s.half * SQRT_2,
            LocalRegion::Dk { r, .. } => *r,
        }
    }

    /// Local coordinates of a point in the region's own frame.
    fn to_own(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            LocalRegion::Sq(s) => {
                let dx = x - s.cx;
                let dy = y - s.cy;
                (dx * s.cos + dy * s.sin, -dx * s.sin + dy * s.cos)
            }
            LocalRegion::Dk { cx, cy, .. } => (x - cx, y - cy),
        }
    }

    fn dist(&self, x: f64, y: f64) -> f64 {
        match self {
            LocalRegion::Sq(s) => {
                let (lx, ly) = self.to_own(x, y);
                let ex = (lx.abs() - s.half).max(0.0);
                let ey = (ly.abs() - s.half).max(0.0);
                (ex * ex + ey * ey).sqrt()
            }
            LocalRegion::Dk { r, .. } => {
                let (lx, ly) = self.to_own(x, y);
                ((lx * lx + ly * ly).sqrt() - r).max(0.0)
            }
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            LocalRegion::Sq(s) => {
                let (lx, ly) = self.to_own(x, y);
                lx.abs() <= s.half && ly.abs() <= s.half
            }
            LocalRegion::Dk { r, .. } => {
                let (lx, ly) = self.to_own(x, y);
                lx * lx + ly * ly <= r * r
            }
        }
    }
}

struct Bins {
    min_x: f64,
    min_y: f64,
    size: f64,
    nx: i64,
    ny: i64,
    cells: Vec<Vec<u32>>,
    max_rad: f64,
}

impl Bins {
    fn build(regions: &[LocalRegion]) -> Self {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        let mut max_rad = 0.0f64;
        for r in regions {
            let (x, y) = r.center();
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            max_rad = max_rad.max(r.radius_bound());
        }
        let per_axis = (((regions.len() as f64 / 2.0).sqrt().ceil()) as i64).clamp(1, 512);
        let ext = (max_x - min_x).max(max_y - min_y).max(1e-300);
        let size = ext / per_axis as f64;
        let nx = ((max_x - min_x) / size).floor() as i64 + 1;
        let ny = ((max_y - min_y) / size).floor() as i64 + 1;
        let mut cells = vec![Vec::new(); (nx * ny) as usize];
        for (i, r) in regions.iter().enumerate() {
            let (x, y) = r.center();
            let bx = (((x - min_x) / size).floor() as i64).clamp(0, nx - 1);
            let by = (((y - min_y) / size).floor() as i64).clamp(0, ny - 1);
            cells[(by * nx + bx) as usize].push(i as u32);
        }
        Self {
            min_x,
            min_y,
            size,
            nx,
            ny,
            cells,
            max_rad,
        }
    }

    /// Exact nearest and second-nearest region by distance from `(x, y)`.
    fn query2(&self, regions: &[LocalRegion], x: f64, y: f64) -> (u32, f64, u32, f64) {
        let bx = (((x - self.min_x) / self.size).floor() as i64).clamp(0, self.nx - 1);
        let by = (((y - self.min_y) / self.size).floor() as i64).clamp(0, self.ny - 1);
        let mut b1 = (u32::MAX, f64::INFINITY);
        let mut b2 = (u32::MAX, f64::INFINITY);
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            if (ring - 1) as f64 * self.size - self.max_rad > b2.1 {
                break;
            }
            let x0 = bx - ring;
            let x1 = bx + ring;
            let y0 = by - ring;
            let y1 = by + ring;
            let mut visit = |cx: i64, cy: i64, b1: &mut (u32, f64), b2: &mut (u32, f64)| {
                if cx < 0 || cy < 0 || cx >= self.nx || cy >= self.ny {
                    return;
                }
                for &i in &self.cells[(cy * self.nx + cx) as usize] {
                    let d = regions[i as usize].dist(x, y);
                    if d < b1.1 {
                        *b2 = *b1;
                        *b1 = (i, d);
                    } else if d < b2.1 {
                        *b2 = (i, d);
                    }
                }
            };
            if ring == 0 {
                visit(bx, by, &mut b1, &mut b2);
            } else {
                for cx in x0..=x1 {
                    visit(cx, y0, &mut b1, &mut b2);
                    visit(cx, y1, &mut b1, &mut b2);
                }
                for cy in (y0 + 1)..y1 {
                    visit(x0, cy, &mut b1, &mut b2);
                    visit(x1, cy, &mut b1, &mut b2);
                }
            }
        }
        (b1.0, b1.1, b2.0, b2.1)
    }
}

struct Ctx {
    regions: Vec<LocalRegion>,
    bins: Bins,
    half_side: f64,
    grid_half: f64,
    min_half: f64,
    slack: f64,
    rel_tol: f64,
    lip_term: f64,
    floor: f64,
    node_budget: u64,
}

#[derive(Debug, Clone, Copy)]
struct PassOut {
    lo: f64,
    lo_con: f64,
    hi: f64,
    saturated: bool,
}

impl PassOut {
    const NONE: Self = Self {
        lo: 0.0,
        lo_con: 0.0,
        hi: 0.0,
        saturated: false,
    };

    fn merge(self, o: Self) -> Self {
        Self {
            lo: self.lo.max(o.lo),
            lo_con: self.lo_con.max(o.lo_con),
            hi: self.hi.max(o.hi),
            saturated: self.saturated || o.saturated,
        }
    }
}

impl Ctx {
    fn new(s: &OrientedSquare, regions: &[Region], h: f64, opts: &EmptyDiskOptions) -> Self {
        let local: Vec<LocalRegion> = regions
            .iter()
            .map(|r| match r {
                Region::Square(q) => {
                    let c = s.to_local(q.center);
                    let rel = q.rotation - s.rotation;
                    LocalRegion::Sq(LocalSquare {
                        cx: c.re,
                        cy: c.im,
                        cos: rel.cos(),
                        sin: rel.sin(),
                        half: q.half_side(),
                    })
                }
                Region::Disk(d) => {
                    let c = s.to_local(d.center);
                    LocalRegion::Dk {
                        cx: c.re,
                        cy: c.im,
                        r: d.radius(),
                    }
                }
            })
            .collect();
        let bins = Bins::build(&local);
        let hs = s.half_side();
        Self {
            regions: local,
            bins,
            half_side: hs,
            grid_half: 0.5 * h,
            min_half: hs * 1e-14,
            slack: 1e-12 * s.diameter,
            rel_tol: opts.rel_tol,
            lip_term: h * SQRT_2 / 2.0,
            floor: 1e-12 * s.diameter,
            node_budget: opts.node_budget,
        }
    }

    fn width_target(&self, lo: f64) -> f64 {
        self.lip_term.min(self.rel_tol * lo).max(self.floor)
    }

    fn run_pass(&self, threshold: f64) -> PassOut {
        let budget = std::sync::atomic::AtomicU64::new(self.node_budget);
        self.recurse(0.0, 0.0, self.half_side, threshold, &budget, 0)
    }

    fn recurse(
        &self,
        cx: f64,
        cy: f64,
        half: f64,
        threshold: f64,
        budget: &std::sync::atomic::AtomicU64,
        depth: u32,
    ) -> PassOut {
        use std::sync::atomic::Ordering;

        let (d_c, bound, prune_inside) = self.cell_bound(cx, cy, half);
        let lo_con = d_c.min(self.half_side - cx.abs().max(cy.abs()));
        let mut out = PassOut {
            lo: d_c,
            lo_con,
            hi: 0.0,
            saturated: false,
        };
        if prune_inside {
            return out;
        }
        let forced = half > self.grid_half;
        let want_split = (forced || bound > threshold) && half > self.min_half;
        if !want_split {
            out.hi = bound;
            return out;
        }
        if budget.fetch_sub(1, Ordering::Relaxed) == 0 {
            budget.store(0, Ordering::Relaxed);
            out.hi = bound;
            out.saturated = true;
            return out;
        }
        let q = 0.5 * half;
        let kids = [
            (cx - q, cy - q),
            (cx + q, cy - q),
            (cx - q, cy + q),
            (cx + q, cy + q),
        ];
        let child = if depth < 6 {
            // Parallel at shallow depths; max-merges keep it deterministic.
            let ((a, b), (c, d)) = rayon::join(
                || {
                    rayon::join(
                        || self.recurse(kids[0].0, kids[0].1, q, threshold, budget, depth + 1),
                        || self.recurse(kids[1].0, kids[1].1, q, threshold, budget, depth + 1),
                    )
                },
                || {
                    rayon::join(
                        || self.recurse(kids[2].0, kids[2].1, q, threshold, budget, depth + 1),
                        || self.recurse(kids[3].0, kids[3].1, q, threshold, budget, depth + 1),
                    )
                },
            );
            a.merge(b).merge(c).merge(d)
        } else {
            let mut acc = PassOut::NONE;
            for (kx, ky) in kids {
                acc = acc.merge(self.recurse(kx, ky, q, threshold, budget, depth + 1));
            }
            acc
        };
        out.merge(child)
    }

    /// Exact center distance, certified upper bound for the max over the
    /// cell, and whether the whole cell sits inside one region.
    fn cell_bound(&self, cx: f64, cy: f64, half: f64) -> (f64, f64, bool) {
        let (i1, d1, i2, d2) = self.bins.query2(&self.regions, cx, cy);
        let corners = [
            (cx - half, cy - half),
            (cx + half, cy - half),
            (cx - half, cy + half),
            (cx + half, cy + half),
        ];
        if d1 == 0.0 {
            let r = &self.regions[i1 as usize];
            if corners.iter().all(|&(x, y)| r.contains(x, y)) {
                return (0.0, 0.0, true);
            }
        }
        // Lipschitz bound from the center sample.
        let mut bound = d1 + half * SQRT_2;
        // Exact convex corner bound for the one or two nearest regions.
        let mut planes: [Option<AffineEdge>; 2] = [None, None];
        for (slot, idx) in [(0usize, i1), (1usize, i2)] {
            if idx == u32::MAX {
                continue;
            }
            let r = &self.regions[idx as usize];
            let mut corner_max: f64 = 0.0;
            for &(x, y) in &corners {
                corner_max = corner_max.max(r.dist(x, y));
            }
            bound = bound.min(corner_max);
            if let LocalRegion::Sq(sq) = r {
                planes[slot] = AffineEdge::for_cell(sq, r, &corners);
            }
        }
        // Exact max of min of two affine edge distances, when both nearest
        // regions are squares whose facing edge dominates the cell.
        if let (Some(pa), Some(pb)) = (planes[0], planes[1]) {
            bound = bound.min(max_min_two_affine(&pa, &pb, &corners));
        }
        (d1, bound + self.slack, false)
    }
}

/// The distance to a square region restricted to a cell, when it reduces
/// exactly to the clamped affine distance beyond one edge: `d = max(f, 0)`
/// with `f` affine. Stored as the four corner values of `f`.
#[derive(Debug, Clone, Copy)]
struct AffineEdge {
    f: [f64; 4],
}

impl AffineEdge {
    fn for_cell(sq: &LocalSquare, region: &LocalRegion, corners: &[(f64, f64); 4]) -> Option<Self> {
        let mut locals = [(0.0f64, 0.0f64); 4];
        for (k, &(x, y)) in corners.iter().enumerate() {
            locals[k] = region.to_own(x, y);
        }
        // Pick the dominant facing edge from the first corner.
        let (lx0, ly0) = locals[0];
        let use_y = ly0.abs() >= lx0.abs();
        let sgn = if use_y {
            if ly0 >= 0.0 {
                1.0
            } else {
                -1.0
            }
        } else if lx0 >= 0.0 {
            1.0
        } else {
            -1.0
        };
        let mut f = [0.0f64; 4];
        for k in 0..4 {
            let (lx, ly) = locals[k];
            let (along, across) = if use_y { (lx, ly) } else { (ly, lx) };
            // The reduction is exact only if every corner projects onto the
            // edge laterally and none crosses to the opposite side.
            if along.abs() > sq.half || sgn * across < -sq.half {
                return None;
            }
            f[k] = sgn * across - sq.half;
        }
        Some(Self { f })
    }
}

/// Exact `max over the cell of max(min(fA, fB), 0)` for two affine
/// functions given by their corner values. The max of a concave piecewise
/// affine function over a square is attained at a corner or where the ridge
/// `fA = fB` crosses an edge.
fn max_min_two_affine(a: &AffineEdge, b: &AffineEdge, _corners: &[(f64, f64); 4]) -> f64 {
    let mut best = 0.0f64;
    for k in 0..4 {
        best = best.max(a.f[k].min(b.f[k]));
    }
    // Cell edges in corner index order (the corner array is a Z pattern).
    const EDGES: [(usize, usize); 4] = [(0, 1), (1, 3), (3, 2), (2, 0)];
    for (i, j) in EDGES {
        let ga = a.f[i] - b.f[i];
        let gb = a.f[j] - b.f[j];
        if (ga > 0.0) != (gb > 0.0) && ga != gb {
            let t = ga / (ga - gb);
            let fa = a.f[i] + t * (a.f[j] - a.f[i]);
            let fb = b.f[i] + t * (b.f[j] - b.f[i]);
            best = best.max(fa.max(fb));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn sq(cx: f64, cy: f64, diameter: f64, rot: f64) -> OrientedSquare {
        OrientedSquare::new(Point::new(cx, cy), diameter, rot)
    }

    #[test]
    fn covered_square_gives_zero() {
        let s = sq(0.0, 0.0, SQRT_2, 0.0);
        let cover = Region::Square(sq(0.0, 0.0, 2.0 * SQRT_2, 0.0));
        let out = largest_empty_disk(&s, &[cover], s.side() / 64.0).unwrap();
        assert_eq!(out.lo, 0.0);
        assert!(out.hi <= 1e-9);
    }

    #[test]
    fn empty_region_list_rejected() {
        let s = sq(0.0, 0.0, SQRT_2, 0.0);
        assert!(matches!(
            largest_empty_disk(&s, &[], 0.01),
            Err(Error::EmptyRegionList)
        ));
    }

    #[test]
    fn concentric_half_side_square() {
        // S of diameter √2 (side 1); inner concentric square of half the
        // side. Farthest point is the corner of S, at distance 0.25·√2 from
        // the inner square, so the true value is 2·0.25·√2.
        let s = sq(0.0, 0.0, SQRT_2, 0.0);
        let inner = Region::Square(sq(0.0, 0.0, SQRT_2 / 2.0, 0.0));
        let truth = 2.0 * 0.25 * SQRT_2;
        let out = largest_empty_disk(&s, &[inner], s.side() / 128.0).unwrap();
        assert!(out.contains(truth), "{out} should contain {truth}");
        assert!(out.width() <= 0.05 * truth + 1e-9);
    }

    #[test]
    fn halving_pitch_never_widens() {
        let s = sq(0.0, 0.0, SQRT_2, 0.0);
        let inner = Region::Square(sq(0.1, -0.05, SQRT_2 / 3.0, 0.3));
        let mut prev = f64::INFINITY;
        let mut h = s.side() / 16.0;
        for _ in 0..4 {
            let out = largest_empty_disk(&s, &[inner], h).unwrap();
            assert!(out.width() <= prev * (1.0 + 1e-9) + 1e-12);
            prev = out.width();
            h *= 0.5;
        }
    }

    #[test]
    fn disk_regions_work() {
        // One disk in the middle; the corner of S is the farthest point.
        let s = sq(0.0, 0.0, SQRT_2, 0.0);
        let d = Region::Disk(Disk::new(Point::ZERO, 0.4));
        let truth = 2.0 * (SQRT_2 / 2.0 - 0.2);
        let out = largest_empty_disk(&s, &[d], s.side() / 128.0).unwrap();
        assert!(out.contains(truth), "{out} vs {truth}");
    }

    #[test]
    fn rotated_square_region() {
        let s = sq(0.0, 0.0, 2.0, 0.7);
        let inner = Region::Square(sq(0.05, 0.0, 0.9, 0.7 + 0.4));
        let out = largest_empty_disk(&s, &[inner], s.side() / 256.0).unwrap();
        // Sampled check: the enclosure must dominate a brute sample max.
        let inner_sq = match inner {
            Region::Square(q) => q,
            _ => unreachable!(),
        };
        let mut brute: f64 = 0.0;
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let h = s.half_side();
                let p = s.from_local(Point::new(
                    -h + 2.0 * h * i as f64 / n as f64,
                    -h + 2.0 * h * j as f64 / n as f64,
                ));
                brute = brute.max(inner_sq.exterior_dist(p));
            }
        }
        assert!(out.hi >= 2.0 * brute);
        assert!(out.lo <= 2.0 * brute + 1e-9);
    }
}
