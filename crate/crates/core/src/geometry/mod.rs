//! Exact planar primitives: points of the plane with complex arithmetic,
//! open disks and open oriented squares measured by their diameter (diagonal
//! for squares), separating-axis overlap, and the two disk constructions the
//! intersection certificates rely on.

pub mod empty_disk;

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

pub use empty_disk::{largest_empty_disk, EmptyDiskOptions, Region};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A point of the plane, doubling as a complex number `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl Point {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }

    /// Complex multiplication.
    pub fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    /// Complex division.
    pub fn div(self, o: Self) -> Self {
        let n = o.re * o.re + o.im * o.im;
        Self::new(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.re * k, self.im * k)
    }

    pub fn abs(self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }

    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    /// Rotation by `theta` radians about the origin.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(self.re * c - self.im * s, self.re * s + self.im * c)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Euclidean distance between two points.
pub fn dist(a: Point, b: Point) -> f64 {
    a.sub(b).abs()
}

/// An open disk given by center and diameter (twice the radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub diameter: f64,
}

impl Disk {
    pub fn new(center: Point, diameter: f64) -> Self {
        Self { center, diameter }
    }

    pub fn radius(self) -> f64 {
        0.5 * self.diameter
    }

    /// Concentric disk of half the diameter.
    pub fn middle(self) -> Self {
        Self::new(self.center, 0.5 * self.diameter)
    }

    pub fn contains_point(self, p: Point, margin: f64) -> bool {
        dist(self.center, p) <= self.radius() - margin
    }

    pub fn contains_disk(self, inner: Disk, margin: f64) -> bool {
        dist(self.center, inner.center) + inner.radius() <= self.radius() - margin
    }

    pub fn overlaps_disk(self, other: Disk) -> bool {
        dist(self.center, other.center) < self.radius() + other.radius()
    }
}

/// An open square described by center, diameter (diagonal length) and the
/// rotation of its sides. A square of diameter `d` has side `d/√2`; its
/// inscribed disk has diameter `d/√2` and its escribed disk diameter `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedSquare {
    pub center: Point,
    pub diameter: f64,
    pub rotation: f64,
}

impl OrientedSquare {
    pub fn new(center: Point, diameter: f64, rotation: f64) -> Self {
        Self {
            center,
            diameter,
            rotation,
        }
    }

    pub fn side(self) -> f64 {
        self.diameter / SQRT_2
    }

    pub fn half_side(self) -> f64 {
        0.5 * self.side()
    }

    pub fn inscribed_diameter(self) -> f64 {
        self.side()
    }

    pub fn escribed_diameter(self) -> f64 {
        self.diameter
    }

    pub fn inscribed_disk(self) -> Disk {
        Disk::new(self.center, self.inscribed_diameter())
    }

    /// Middle inscribed disk: concentric with the inscribed disk, half its
    /// diameter.
    pub fn middle_inscribed_disk(self) -> Disk {
        Disk::new(self.center, 0.5 * self.inscribed_diameter())
    }

    /// Coordinates in the frame where the square is axis-aligned at 0.
    pub fn to_local(self, p: Point) -> Point {
        p.sub(self.center).rotate(-self.rotation)
    }

    pub fn from_local(self, p: Point) -> Point {
        p.rotate(self.rotation).add(self.center)
    }

    pub fn corners(self) -> [Point; 4] {
        let h = self.half_side();
        [
            self.from_local(Point::new(h, h)),
            self.from_local(Point::new(-h, h)),
            self.from_local(Point::new(-h, -h)),
            self.from_local(Point::new(h, -h)),
        ]
    }

    /// Closed containment test with a margin: `margin > 0` demands the point
    /// stay `margin` inside, `margin < 0` tolerates slack outside.
    pub fn contains_point(self, p: Point, margin: f64) -> bool {
        let l = self.to_local(p);
        let h = self.half_side();
        l.re.abs() <= h - margin && l.im.abs() <= h - margin
    }

    /// Distance from a point to the closed square (zero inside).
    pub fn exterior_dist(self, p: Point) -> f64 {
        let l = self.to_local(p);
        let h = self.half_side();
        let dx = (l.re.abs() - h).max(0.0);
        let dy = (l.im.abs() - h).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }

    /// Depth inside the square: positive inside, negative outside
    /// (Chebyshev, so it is exact for the nearest side).
    pub fn interior_depth(self, p: Point) -> f64 {
        let l = self.to_local(p);
        self.half_side() - l.re.abs().max(l.im.abs())
    }

    /// Nearest point of the closed square to `p`.
    pub fn nearest_point(self, p: Point) -> Point {
        let l = self.to_local(p);
        let h = self.half_side();
        self.from_local(Point::new(l.re.clamp(-h, h), l.im.clamp(-h, h)))
    }

    pub fn contains_square(self, inner: OrientedSquare, margin: f64) -> bool {
        inner
            .corners()
            .iter()
            .all(|c| self.contains_point(*c, margin))
    }

    pub fn contains_disk(self, d: Disk, margin: f64) -> bool {
        let l = self.to_local(d.center);
        let h = self.half_side();
        let r = d.radius();
        l.re.abs() + r <= h - margin && l.im.abs() + r <= h - margin
    }

    pub fn overlaps_disk(self, d: Disk) -> bool {
        self.exterior_dist(d.center) < d.radius()
    }
}

/// Square contained in a disk, by corner distances (exact for convex sets).
pub fn square_in_disk(inner: &OrientedSquare, outer: &Disk, margin: f64) -> bool {
    inner
        .corners()
        .iter()
        .all(|c| dist(*c, outer.center) <= outer.radius() - margin)
}

fn project(corners: &[Point; 4], axis: Point) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let v = c.re * axis.re + c.im * axis.im;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn sat_axes(a: &OrientedSquare, b: &OrientedSquare) -> [Point; 4] {
    let (sa, ca) = a.rotation.sin_cos();
    let (sb, cb) = b.rotation.sin_cos();
    [
        Point::new(ca, sa),
        Point::new(-sa, ca),
        Point::new(cb, sb),
        Point::new(-sb, cb),
    ]
}

/// Whether two open squares intersect, decided by the separating-axis test
/// over the four edge normals. Exact up to floating point: squares that only
/// touch along boundaries do not count as overlapping.
pub fn overlap_exact(a: &OrientedSquare, b: &OrientedSquare) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    for axis in sat_axes(a, b) {
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        if ahi <= blo || bhi <= alo {
            return false;
        }
    }
    true
}

/// Whether two squares are separated by at least `margin` along some axis;
/// used as the certified-disjointness test when validating an IFS.
pub fn separated_by(a: &OrientedSquare, b: &OrientedSquare, margin: f64) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    for axis in sat_axes(a, b) {
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        if ahi + margin <= blo || bhi + margin <= alo {
            return true;
        }
    }
    false
}

/// Disk construction behind the small-scale geometric lemma: given distinct
/// `z, z2` in the square `s`, let `Γ` be the disk centered at `z` through
/// `z2`; returns a disk contained in `Γ ∩ s` built from the incircle of the
/// right triangle spanned inside a quarter of `Γ`.
///
/// The returned diameter is `(2−√2)·|z−z2|` when `|z−z2| ≤ side/2` and
/// `|z−z2|/(2+2√2)` otherwise, so always more than `|z−z2|/5`.
pub fn quarter_disk_in_square(z: Point, z2: Point, s: &OrientedSquare) -> Result<Disk> {
    let d = dist(z, z2);
    if !(d > 0.0) || !z.is_finite() || !z2.is_finite() {
        return Err(Error::DegenerateInput(
            "quarter disk needs two distinct finite points".into(),
        ));
    }
    let slack = -1e-12 * s.diameter;
    if !s.contains_point(z, slack) || !s.contains_point(z2, slack) {
        return Err(Error::DegenerateInput(
            "quarter disk needs both points inside the square".into(),
        ));
    }
    let half = s.half_side();
    // Radius of the quarter disk that fits in the square no matter where z
    // sits: the full |z−z2| when small, shrunk by 1/(2√2) otherwise.
    let rho = if d <= half {
        d
    } else {
        (d / (2.0 * SQRT_2)).min(half)
    };
    let u = s.to_local(z);
    let sx = if u.re <= 0.0 { 1.0 } else { -1.0 };
    let sy = if u.im <= 0.0 { 1.0 } else { -1.0 };
    // Incircle of the right triangle with legs rho along the chosen quadrant.
    let r_in = rho / (2.0 + SQRT_2);
    let center = s.from_local(Point::new(u.re + sx * r_in, u.im + sy * r_in));
    Ok(Disk::new(center, 2.0 * r_in))
}

/// Disk construction behind the crossing lemma, for an affine piece: the
/// image of `base` under `w ↦ a·w + t` is assumed to meet both the middle
/// disk of `gamma1` and the complement of `gamma1`; returns a disk inside
/// `gamma1 ∩ piece` of diameter at least `δ(gamma1)/20` (affine maps have
/// unit distortion).
pub fn crossing_disk(gamma1: &Disk, base: &OrientedSquare, a: Point, t: Point) -> Result<Disk> {
    let abs_a = a.abs();
    if !(abs_a > 0.0) {
        return Err(Error::DegenerateInput("affine multiplier is zero".into()));
    }
    let piece = OrientedSquare::new(
        a.mul(base.center).add(t),
        abs_a * base.diameter,
        base.rotation + a.arg(),
    );
    let gamma2 = gamma1.middle();

    // z1: point of the piece inside the middle disk.
    let z1 = piece.nearest_point(gamma2.center);
    if dist(z1, gamma2.center) > gamma2.radius() {
        return Err(Error::DegenerateInput(
            "piece does not meet the middle disk".into(),
        ));
    }
    // The piece must also leave gamma1.
    let reaches_out = piece
        .corners()
        .iter()
        .any(|c| dist(*c, gamma1.center) > gamma1.radius());
    if !reaches_out {
        return Err(Error::DegenerateInput(
            "piece is contained in the outer disk".into(),
        ));
    }

    let z2 = z1.sub(t).div(a);
    // Preimage of ∂gamma1 is a circle; z3 is its closest point to z2 within
    // the closed base square.
    let c_pre = gamma1.center.sub(t).div(a);
    let r_pre = gamma1.radius() / abs_a;
    let z3 = nearest_on_circle_in_square(c_pre, r_pre, z2, base).ok_or_else(|| {
        Error::DegenerateInput("piece boundary circle misses the base square".into())
    })?;

    let omega2 = quarter_disk_in_square(z2, z3, base)?;
    Ok(Disk::new(
        a.mul(omega2.center).add(t),
        abs_a * omega2.diameter,
    ))
}

/// Closest point to `p` on `circle(c, r) ∩ closed square`, or None if the
/// intersection is empty.
fn nearest_on_circle_in_square(
    c: Point,
    r: f64,
    p: Point,
    s: &OrientedSquare,
) -> Option<Point> {
    let mut best: Option<(f64, Point)> = None;
    let mut consider = |q: Point| {
        if s.contains_point(q, -1e-12 * s.diameter) {
            let d = dist(p, q);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, q));
            }
        }
    };
    // Radial projection of p onto the circle.
    let v = p.sub(c);
    let n = v.abs();
    if n > 0.0 {
        consider(c.add(v.scale(r / n)));
    } else {
        consider(c.add(Point::new(r, 0.0)));
    }
    // Circle ∩ square boundary, edge by edge in local coordinates.
    let cl = s.to_local(c);
    let h = s.half_side();
    for (fixed_y, y0) in [(true, h), (true, -h), (false, h), (false, -h)] {
        let (cc, co) = if fixed_y { (cl.re, cl.im) } else { (cl.im, cl.re) };
        let disc = r * r - (y0 - co) * (y0 - co);
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        for x in [cc - sq, cc + sq] {
            if x.abs() <= h + 1e-12 * s.diameter {
                let local = if fixed_y {
                    Point::new(x, y0)
                } else {
                    Point::new(y0, x)
                };
                consider(s.from_local(local));
            }
        }
    }
    best.map(|(_, q)| q)
}
