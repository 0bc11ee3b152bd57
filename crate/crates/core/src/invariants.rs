//! Certified invariants of a dynamical Cantor set: distortion, reduction
//! ratios, the gap quantity, thickness, and the well-balanced verdict.
//!
//! All quantities are dimensionless; reports are computed on an internally
//! normalized copy of the system (square centered at 0, diameter 1) so that
//! rescaled inputs land on the same floating-point path.

use crate::error::Error;
use crate::geometry::{empty_disk, OrientedSquare, Point, Region};
use crate::ifs::{
    deepest_affordable, enumerate_depth, piece_budget, ContractionMap, HoloMap, IfsSpec,
};
use crate::interval::Interval;
use crate::Result;
use std::sync::Arc;

/// Full invariant report. Interval fields enclose the true values; the
/// `cap_` prefix marks the paper-side capital variants (`Λ⁰`, `Λ`).
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub d: Interval,
    pub lambda0: Interval,
    pub cap_lambda0: Interval,
    pub lambda: Interval,
    pub cap_lambda: Interval,
    pub sigma0: Interval,
    pub sigma: Interval,
    pub thickness: Interval,
    pub depth_used: u32,
    pub grid_used: f64,
    pub square: OrientedSquare,
}

/// Verdict of the well-balanced test (sufficient-condition form).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BalanceVerdict {
    /// The robust sufficient condition holds with certified margins.
    Certified,
    /// The first condition (`Λ < 1/20`) certifiably fails.
    FailedCondition1,
    /// `Λ < 1/20` holds but the sufficient inequality certifiably fails;
    /// the full condition may still hold, this test cannot decide it.
    FailedSufficientCondition,
    /// Enclosures straddle a threshold; nothing is decided.
    Unknown,
}

/// Closed-form distortion bounds: exactly 1 for affine systems, otherwise
/// the uniform bound coming from the extension disk of ratio `r`.
pub fn distortion_bounds(spec: &IfsSpec) -> Interval {
    if spec.is_affine() {
        return Interval::ONE;
    }
    let r = spec.extension_ratio();
    let b1 = (1.0 + r).powi(3) / (1.0 - r);
    let b2 = (1.0 + r) / (1.0 - r).powi(3);
    Interval::new(1.0, b1.min(b2).next_up())
}

/// Sampled lower estimate of the depth-n distortion maximum
/// `max_{|I|=n} max_{z,z'} |f'_I(z)| / |f'_I(z')|`, over a boundary plus
/// interior grid of the square with `grid` points per side.
pub fn s_n(spec: &IfsSpec, n: u32, grid: u32) -> Result<f64> {
    if spec.is_affine() || n == 0 {
        return Ok(1.0);
    }
    let grid = grid.max(2);
    let samples = sample_points(spec.square(), grid);
    let p = spec.map_count() as u128;
    let needed = p.pow(n) * samples.len() as u128;
    if needed > piece_budget() as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: piece_budget(),
        });
    }
    // Depth-first over words; carry per-sample (orbit point, derivative).
    let mut best = 1.0f64;
    let mut stack: Vec<(u32, Vec<(Point, Point)>)> = vec![(
        0,
        samples.iter().map(|&z| (z, Point::new(1.0, 0.0))).collect(),
    )];
    // The root entry is a sentinel: expand only, never score.
    let mut first = true;
    while let Some((depth, states)) = stack.pop() {
        if !first && depth == n {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (_, d) in &states {
                let a = d.abs();
                lo = lo.min(a);
                hi = hi.max(a);
            }
            if lo > 0.0 {
                best = best.max(hi / lo);
            }
            continue;
        }
        if depth == n {
            continue;
        }
        first = false;
        for m in spec.maps() {
            let next: Vec<(Point, Point)> = states
                .iter()
                .map(|&(z, d)| (m.eval(z), m.deriv(z).mul(d)))
                .collect();
            stack.push((depth + 1, next));
        }
    }
    Ok(best)
}

fn sample_points(square: &OrientedSquare, grid: u32) -> Vec<Point> {
    let h = square.half_side();
    let mut pts = Vec::new();
    let g = grid as i64;
    for i in 0..=g {
        for j in 0..=g {
            let on_boundary = i == 0 || j == 0 || i == g || j == g;
            let interior_step = (g / 4).max(1);
            if on_boundary || (i % interior_step == 0 && j % interior_step == 0) {
                pts.push(square.from_local(Point::new(
                    -h + 2.0 * h * i as f64 / g as f64,
                    -h + 2.0 * h * j as f64 / g as f64,
                )));
            }
        }
    }
    pts
}

/// Smallest n with `∏_{k≥n} (1 + coef·a^k) ≤ 1 + eps`.
pub(crate) fn smallest_tail_index(coef: f64, a: f64, eps: f64) -> Option<u32> {
    debug_assert!(a > 0.0 && a < 1.0);
    for n in 1..100_000u32 {
        if tail_product(coef, a, n) <= 1.0 + eps {
            return Some(n);
        }
    }
    None
}

pub(crate) fn tail_product(coef: f64, a: f64, n: u32) -> f64 {
    let mut acc = 1.0f64;
    let mut term = coef * a.powi(n as i32);
    while term > 1e-18 {
        acc *= 1.0 + term;
        term *= a;
    }
    acc * (1.0 + 1e-12)
}

/// Distortion refinement for non-affine systems: a finite-depth sampled
/// maximum combined with the geometric tail bound
/// `S_n ≤ S_{n₀} · ∏_{k≥n₀} (1 + (5/R)·a^k)`, intersected with the closed
/// form. The upper endpoint inherits the sampling of `s_n` (the tail factor
/// itself is rigorous); the closed form caps it either way.
pub fn distortion_refine(spec: &IfsSpec, eps: f64) -> Result<Interval> {
    if spec.is_affine() {
        return Ok(Interval::ONE);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let closed = distortion_bounds(spec);
    let pieces = enumerate_depth(spec, 1, closed)?;
    let big_delta_s = spec.square().escribed_diameter();
    // Per-step escribed contraction factor.
    let mut a: f64 = 0.0;
    // Koebe radius: margin of every depth-1 image inside the square.
    let mut r_margin = f64::INFINITY;
    for p in &pieces {
        a = a.max(p.escribed.hi / big_delta_s);
        r_margin = r_margin.min(spec.square().interior_depth(p.center) - 0.5 * p.escribed.hi);
    }
    if !(a < 1.0) {
        return Err(Error::TailBoundUnavailable(format!(
            "escribed contraction factor {a} is not < 1"
        )));
    }
    if !(r_margin > 0.0) {
        return Err(Error::TailBoundUnavailable(
            "no positive Koebe radius around the depth-1 images".into(),
        ));
    }
    let coef = 5.0 / r_margin;
    let n_eps = smallest_tail_index(coef, a, eps)
        .ok_or_else(|| Error::TailBoundUnavailable("tail index search exhausted".into()))?;
    // Keep the word enumeration within budget.
    let grid = 6u32;
    let sample_count = sample_points(spec.square(), grid).len() as u128;
    let p_count = spec.map_count() as u128;
    let mut n_used = 1u32;
    let mut cost = p_count * sample_count;
    while n_used < n_eps && cost.saturating_mul(p_count) <= 2_000_000 {
        cost = cost.saturating_mul(p_count);
        n_used += 1;
    }
    let mut s_lo = 1.0f64;
    for n in 1..=n_used {
        s_lo = s_lo.max(s_n(spec, n, grid)?);
    }
    let hi = s_lo.max(s_n(spec, n_used, grid)? * tail_product(coef, a, n_used));
    let refined = Interval::new(s_lo.min(closed.hi), hi.max(s_lo));
    Ok(refined.intersect(closed).unwrap_or(closed))
}

/// The four reduction ratios from the depth-1 pieces:
/// `λ⁰ = min δ(S_i)/δ(S)`, `Λ⁰ = max Δ(S_i)/δ(S)`, `λ = λ⁰/D²`, `Λ = D²Λ⁰`.
pub fn reduction_ratios(
    spec: &IfsSpec,
    d: Interval,
) -> Result<(Interval, Interval, Interval, Interval)> {
    let pieces = enumerate_depth(spec, 1, d)?;
    let delta_s = Interval::point(spec.square().inscribed_diameter());
    let mut lambda0: Option<Interval> = None;
    let mut cap_lambda0: Option<Interval> = None;
    for p in &pieces {
        let lo = p.inscribed.div(delta_s);
        let hi = p.escribed.div(delta_s);
        lambda0 = Some(lambda0.map_or(lo, |v| v.min(lo)));
        cap_lambda0 = Some(cap_lambda0.map_or(hi, |v| v.max(hi)));
    }
    let lambda0 = lambda0.unwrap();
    let cap_lambda0 = cap_lambda0.unwrap();
    let d2 = d.powi(2);
    Ok((lambda0, cap_lambda0, lambda0.div(d2), d2.mul(cap_lambda0)))
}

/// Options threaded into the gap estimator.
#[derive(Debug, Clone, Copy)]
pub struct SigmaOptions {
    pub empty_disk: empty_disk::EmptyDiskOptions,
    /// Requested depth for the lower-bound enumeration (budget-capped).
    pub depth: u32,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            empty_disk: empty_disk::EmptyDiskOptions::default(),
            depth: 3,
        }
    }
}

/// Certified enclosure of the gap `σ⁰ = ρ(S)/δ(S)`.
///
/// Upper bound: one-level fixed point `ρ(S) ≤ ρ̂₁ / (1 − L)` where `ρ̂₁`
/// bounds the largest disk avoiding the depth-1 piece inner enclosures and
/// `L < 1` bounds the depth-1 Lipschitz constants. Lower bound: a disk
/// inside `S` avoiding every escribed disk at the deepest affordable level.
pub fn gap_sigma(spec: &IfsSpec, d: Interval, h: f64) -> Result<Interval> {
    gap_sigma_with(spec, d, h, &SigmaOptions::default())
}

pub fn gap_sigma_with(
    spec: &IfsSpec,
    d: Interval,
    h: f64,
    opts: &SigmaOptions,
) -> Result<Interval> {
    let square = spec.square();
    let lip = spec.lipschitz_bound(d);
    if lip >= 1.0 {
        return Err(Error::DivergentRecursion { lipschitz: lip });
    }
    let depth1 = enumerate_depth(spec, 1, d)?;
    let mut regions = Vec::with_capacity(depth1.len());
    for p in &depth1 {
        if let Some(poly) = p.polygon {
            regions.push(Region::Square(poly));
        } else {
            if !(p.inscribed.lo > 0.0) {
                return Err(Error::TailBoundUnavailable(
                    "no certified inner disk for a depth-1 piece".into(),
                ));
            }
            regions.push(Region::Disk(p.inscribed_disk()));
        }
    }
    let mm = empty_disk::max_min_dist(square, &regions, h, &opts.empty_disk)?;
    let rho_hat1 = (2.0 * mm.hi).next_up();
    let rho_hi = (rho_hat1 / (1.0 - lip).next_down()).next_up();

    // Lower bound against escribed disks at the deepest affordable level.
    let depth_lo = deepest_affordable(spec, opts.depth.max(1));
    let deep = enumerate_depth(spec, depth_lo, d)?;
    let disks: Vec<Region> = deep.iter().map(|p| Region::Disk(p.escribed_disk())).collect();
    let mut cheap = opts.empty_disk;
    cheap.rel_tol = cheap.rel_tol.max(0.25);
    let mm_lo = empty_disk::max_min_dist(square, &disks, h, &cheap)?;
    let rho_lo = (2.0 * mm_lo.lo_constrained).next_down().max(0.0);

    let delta_s = square.inscribed_diameter();
    let hi = (rho_hi / delta_s).next_up();
    let lo = ((rho_lo / delta_s).next_down()).clamp(0.0, hi);
    Ok(Interval::new(lo, hi))
}

/// Full certified report with the default depth (3) and grid (`δ(S)/512`).
pub fn thickness(spec: &IfsSpec) -> Result<InvariantReport> {
    let h = spec.square().inscribed_diameter() / 512.0;
    thickness_with(spec, 3, h, &SigmaOptions::default())
}

pub fn thickness_with(
    spec: &IfsSpec,
    depth: u32,
    grid_h: f64,
    opts: &SigmaOptions,
) -> Result<InvariantReport> {
    if !(grid_h > 0.0) {
        return Err(Error::InvalidParams(format!(
            "grid pitch must be positive, got {grid_h}"
        )));
    }
    let norm = normalize(spec)?;
    let h = grid_h / spec.square().diameter;

    let d = if norm.is_affine() {
        Interval::ONE
    } else {
        match distortion_refine(&norm, 0.1) {
            Ok(refined) => refined,
            Err(Error::TailBoundUnavailable(_)) => distortion_bounds(&norm),
            Err(e) => return Err(e),
        }
    };
    let (lambda0, cap_lambda0, lambda, cap_lambda) = reduction_ratios(&norm, d)?;
    let mut sig_opts = *opts;
    sig_opts.depth = depth;
    let sigma0 = gap_sigma_with(&norm, d, h, &sig_opts)?;
    let sigma = d.powi(2).mul(sigma0);

    // t(K) = λ⁰ / (D⁵ √σ⁰), with an unbounded upper endpoint when the
    // lower σ bound degenerates to zero.
    let denom = d.powi(5).mul(sigma0.sqrt());
    let t_lo = (lambda0.lo / denom.hi).next_down().max(0.0);
    let t_hi = if denom.lo > 0.0 {
        (lambda0.hi / denom.lo).next_up()
    } else {
        f64::INFINITY
    };

    Ok(InvariantReport {
        d,
        lambda0,
        cap_lambda0,
        lambda,
        cap_lambda,
        sigma0,
        sigma,
        thickness: Interval::new(t_lo, t_hi),
        depth_used: deepest_affordable(spec, depth),
        grid_used: grid_h,
        square: *spec.square(),
    })
}

/// Remark-style sufficient test for the well-balanced condition. `Certified`
/// and `FailedCondition1` are one-sided certified decisions; everything the
/// enclosures cannot decide is reported as such.
pub fn well_balanced(rk: &InvariantReport, rl: &InvariantReport) -> Result<BalanceVerdict> {
    same_square(rk, rl)?;
    let th = 1.0 / 20.0;
    let bound = |d_other: Interval, hi: bool| {
        let d2 = if hi {
            d_other.hi * d_other.hi
        } else {
            d_other.lo * d_other.lo
        };
        1.0 / (20.0 * d2)
    };
    let certified = rk.cap_lambda.hi.max(rl.cap_lambda.hi) < th
        && rk.sigma.hi + 2.0 * rk.cap_lambda.hi < bound(rl.d, true)
        && rl.sigma.hi + 2.0 * rl.cap_lambda.hi < bound(rk.d, true);
    if certified {
        return Ok(BalanceVerdict::Certified);
    }
    if rk.cap_lambda.lo.max(rl.cap_lambda.lo) >= th {
        return Ok(BalanceVerdict::FailedCondition1);
    }
    let sufficient_fails = rk.sigma.lo + 2.0 * rk.cap_lambda.lo >= bound(rl.d, false)
        || rl.sigma.lo + 2.0 * rl.cap_lambda.lo >= bound(rk.d, false);
    if rk.cap_lambda.hi.max(rl.cap_lambda.hi) < th && sufficient_fails {
        return Ok(BalanceVerdict::FailedSufficientCondition);
    }
    Ok(BalanceVerdict::Unknown)
}

pub(crate) fn same_square(rk: &InvariantReport, rl: &InvariantReport) -> Result<()> {
    let tol = 1e-9 * rk.square.diameter.max(rl.square.diameter);
    let ok = crate::geometry::dist(rk.square.center, rl.square.center) <= tol
        && (rk.square.diameter - rl.square.diameter).abs() <= tol
        && (rk.square.rotation - rl.square.rotation).abs() <= 1e-9;
    ok.then_some(()).ok_or(Error::MismatchedSquares)
}

/// Conjugate of a general map under the normalizing similarity.
struct ConjugatedMap {
    inner: Arc<dyn HoloMap>,
    scale: f64,
    offset: Point,
}

impl HoloMap for ConjugatedMap {
    fn eval(&self, z: Point) -> Point {
        self.inner
            .eval(self.offset.add(z.scale(self.scale)))
            .sub(self.offset)
            .scale(1.0 / self.scale)
    }

    fn deriv(&self, z: Point) -> Point {
        self.inner.deriv(self.offset.add(z.scale(self.scale)))
    }
}

/// Rescales the system so the initial square is centered at 0 with
/// diameter 1; all reported invariants are ratios, so they are unchanged.
pub(crate) fn normalize(spec: &IfsSpec) -> Result<IfsSpec> {
    let sq = spec.square();
    if sq.center == Point::ZERO && sq.diameter == 1.0 {
        return Ok(spec.clone());
    }
    let c = sq.center;
    let scale = sq.diameter;
    let maps = spec
        .maps()
        .iter()
        .map(|m| match m {
            ContractionMap::Affine { a, b } => ContractionMap::Affine {
                a: *a,
                b: a.mul(c).add(*b).sub(c).scale(1.0 / scale),
            },
            ContractionMap::General(g) => ContractionMap::General(Arc::new(ConjugatedMap {
                inner: g.clone(),
                scale,
                offset: c,
            })),
        })
        .collect();
    IfsSpec::new(
        OrientedSquare::new(Point::ZERO, 1.0, sq.rotation),
        maps,
        spec.extension_ratio(),
    )
}
