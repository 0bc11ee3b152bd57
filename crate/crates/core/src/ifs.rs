//! Iterated function systems on a square: contraction maps, words, pieces,
//! and certified piece geometry.
//!
//! Words follow the composition convention `f_I = f_{i_k} ∘ … ∘ f_{i_1}`
//! (the first digit acts first). A son of the piece `f_I(S)` is `f_I(f_i(S))`,
//! so sons extend the digit sequence at the front.

use crate::error::Error;
use crate::geometry::{separated_by, Disk, OrientedSquare, Point};
use crate::interval::Interval;
use crate::Result;
use std::sync::Arc;

/// Default cap on enumerated pieces, overridable via `CANTOR_GAP_BUDGET`.
pub const DEFAULT_PIECE_BUDGET: u64 = 10_000_000;

pub fn piece_budget() -> u64 {
    std::env::var("CANTOR_GAP_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_PIECE_BUDGET)
}

/// Evaluator for a holomorphic map given as code. Implementors declare (as
/// a trust boundary) that the map extends univalently to the extension disk.
pub trait HoloMap: Send + Sync {
    fn eval(&self, z: Point) -> Point;
    fn deriv(&self, z: Point) -> Point;
}

/// Affine map perturbed by a quadratic term: `z ↦ a·z + eps·z² + b`.
/// Univalent wherever `|2·eps·z| < |a|`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticMap {
    pub a: Point,
    pub b: Point,
    pub eps: Point,
}

impl HoloMap for QuadraticMap {
    fn eval(&self, z: Point) -> Point {
        self.a.mul(z).add(self.eps.mul(z).mul(z)).add(self.b)
    }

    fn deriv(&self, z: Point) -> Point {
        self.a.add(self.eps.mul(z).scale(2.0))
    }
}

#[derive(Clone)]
pub enum ContractionMap {
    /// `z ↦ a·z + b` with `|a| < 1`.
    Affine { a: Point, b: Point },
    /// Arbitrary holomorphic contraction with declared univalent extension.
    General(Arc<dyn HoloMap>),
}

impl std::fmt::Debug for ContractionMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContractionMap::Affine { a, b } => write!(f, "Affine{{a:{a:?}, b:{b:?}}}"),
            ContractionMap::General(_) => write!(f, "General{{..}}"),
        }
    }
}

impl ContractionMap {
    pub fn eval(&self, z: Point) -> Point {
        match self {
            ContractionMap::Affine { a, b } => a.mul(z).add(*b),
            ContractionMap::General(m) => m.eval(z),
        }
    }

    pub fn deriv(&self, z: Point) -> Point {
        match self {
            ContractionMap::Affine { a, .. } => *a,
            ContractionMap::General(m) => m.deriv(z),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, ContractionMap::Affine { .. })
    }
}

/// A finite digit sequence `(i_1, …, i_k)` indexing the composition
/// `f_{i_k} ∘ … ∘ f_{i_1}`. Digits are stored as 0-based map indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    pub digits: Vec<u32>,
}

impl Word {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn from_indices(digits: &[u32]) -> Self {
        Self {
            digits: digits.to_vec(),
        }
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// Word of the son obtained by post-composing the piece map with `f_i`,
    /// i.e. the new digit acts first.
    pub fn son(&self, i: u32) -> Self {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.push(i);
        digits.extend_from_slice(&self.digits);
        Self { digits }
    }

    /// Ancestor `levels` above (dropping the innermost digits).
    pub fn ancestor(&self, depth: usize) -> Self {
        assert!(depth <= self.depth());
        Self {
            digits: self.digits[self.depth() - depth..].to_vec(),
        }
    }

    /// True when `self` denotes a piece nested inside `other`.
    pub fn descends_from(&self, other: &Word) -> bool {
        self.depth() >= other.depth() && self.digits[self.depth() - other.depth()..] == other.digits[..]
    }
}

/// The IFS itself: a square, at least two contraction maps with images
/// compactly inside the square and pairwise disjoint, and the extension
/// ratio of the common univalent extension disk.
#[derive(Debug, Clone)]
pub struct IfsSpec {
    square: OrientedSquare,
    maps: Vec<ContractionMap>,
    extension_ratio: f64,
    all_affine: bool,
}

impl IfsSpec {
    pub fn new(
        square: OrientedSquare,
        maps: Vec<ContractionMap>,
        extension_ratio: f64,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "an IFS needs at least 2 maps, got {}",
                maps.len()
            )));
        }
        if !(extension_ratio > 0.0 && extension_ratio < 1.0) {
            return Err(Error::InvalidParams(format!(
                "extension ratio must lie in (0,1), got {extension_ratio}"
            )));
        }
        if !(square.diameter > 0.0) || !square.center.is_finite() {
            return Err(Error::InvalidParams("degenerate initial square".into()));
        }
        let all_affine = maps.iter().all(|m| m.is_affine());
        let spec = Self {
            square,
            maps,
            extension_ratio,
            all_affine,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let margin = 1e-12 * self.square.diameter;
        for (i, m) in self.maps.iter().enumerate() {
            match m {
                ContractionMap::Affine { a, .. } => {
                    if !(a.abs() < 1.0) {
                        return Err(Error::InvalidParams(format!(
                            "map {i} is not a contraction: |a| = {}",
                            a.abs()
                        )));
                    }
                    let img = self.affine_image(i);
                    if !self.square.contains_square(img, margin) {
                        return Err(Error::InvalidParams(format!(
                            "map {i} does not send the square strictly inside itself"
                        )));
                    }
                }
                ContractionMap::General(map) => {
                    // Boundary sample of the extension disk: the image must
                    // stay strictly inside S and |f'| strictly below 1 (the
                    // modulus of a holomorphic derivative peaks on the
                    // boundary). Univalence itself is declared, not proven.
                    let r_ext = self.square.diameter / (2.0 * self.extension_ratio);
                    let m_img = 1e-6 * self.square.inscribed_diameter();
                    for k in 0..512 {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / 512.0;
                        let z = self
                            .square
                            .center
                            .add(Point::new(r_ext * th.cos(), r_ext * th.sin()));
                        let fz = map.eval(z);
                        if !self.square.contains_point(fz, m_img) {
                            return Err(Error::InvalidParams(format!(
                                "map {i}: extension-disk image leaves the square"
                            )));
                        }
                        if !(map.deriv(z).abs() < 1.0 - 1e-9) {
                            return Err(Error::InvalidParams(format!(
                                "map {i}: derivative modulus reaches 1 on the extension disk"
                            )));
                        }
                    }
                }
            }
        }
        self.validate_disjoint(margin)
    }

    /// Pairwise disjointness of the depth-1 images, certified with a margin.
    /// Candidate pairs come from a uniform hash of the image centers.
    fn validate_disjoint(&self, margin: f64) -> Result<()> {
        let p = self.maps.len();
        let d_root = Interval::ONE; // distortion not needed for enclosures here
        let _ = d_root;
        let mut centers = Vec::with_capacity(p);
        let mut radii = Vec::with_capacity(p);
        for i in 0..p {
            let (c, r) = self.image_enclosure(i);
            centers.push(c);
            radii.push(r);
        }
        let max_rad = radii.iter().copied().fold(0.0f64, f64::max);
        let bin = (2.0 * max_rad).max(1e-12 * self.square.diameter);
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        for c in &centers {
            min_x = min_x.min(c.re);
            min_y = min_y.min(c.im);
        }
        use std::collections::HashMap;
        let mut bins: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        let key = |c: &Point| {
            (
                ((c.re - min_x) / bin).floor() as i64,
                ((c.im - min_y) / bin).floor() as i64,
            )
        };
        for (i, c) in centers.iter().enumerate() {
            bins.entry(key(c)).or_default().push(i as u32);
        }
        for (i, c) in centers.iter().enumerate() {
            let (bx, by) = key(c);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(cand) = bins.get(&(bx + dx, by + dy)) else {
                        continue;
                    };
                    for &j in cand {
                        let j = j as usize;
                        if j <= i {
                            continue;
                        }
                        if !self.images_disjoint(i, j, margin) {
                            return Err(Error::InvalidParams(format!(
                                "depth-1 images {i} and {j} are not certified disjoint"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn images_disjoint(&self, i: usize, j: usize, margin: f64) -> bool {
        match (&self.maps[i], &self.maps[j]) {
            (ContractionMap::Affine { .. }, ContractionMap::Affine { .. }) => {
                separated_by(&self.affine_image(i), &self.affine_image(j), margin)
            }
            _ => {
                let (ci, ri) = self.image_enclosure(i);
                let (cj, rj) = self.image_enclosure(j);
                crate::geometry::dist(ci, cj) > ri + rj + margin
            }
        }
    }

    /// Exact image square of an affine map.
    pub fn affine_image(&self, i: usize) -> OrientedSquare {
        match &self.maps[i] {
            ContractionMap::Affine { a, b } => OrientedSquare::new(
                a.mul(self.square.center).add(*b),
                a.abs() * self.square.diameter,
                self.square.rotation + a.arg(),
            ),
            _ => panic!("affine_image on a general map"),
        }
    }

    /// Center and escribed radius bound of a depth-1 image.
    fn image_enclosure(&self, i: usize) -> (Point, f64) {
        let c = self.maps[i].eval(self.square.center);
        match &self.maps[i] {
            ContractionMap::Affine { a, .. } => (c, 0.5 * a.abs() * self.square.diameter),
            ContractionMap::General(_) => {
                let d_hi = crate::invariants::distortion_bounds(self).hi;
                let abs = self.maps[i].deriv(self.square.center).abs();
                (c, 0.5 * d_hi * abs * self.square.diameter * (1.0 + 1e-9))
            }
        }
    }

    pub fn square(&self) -> &OrientedSquare {
        &self.square
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    pub fn extension_ratio(&self) -> f64 {
        self.extension_ratio
    }

    pub fn is_affine(&self) -> bool {
        self.all_affine
    }

    /// Max Lipschitz bound of the depth-1 maps on the square; `< 1` for the
    /// gap recursion to converge.
    pub fn lipschitz_bound(&self, d: Interval) -> f64 {
        let mut l: f64 = 0.0;
        for m in &self.maps {
            let v = match m {
                ContractionMap::Affine { a, .. } => a.abs(),
                ContractionMap::General(g) => {
                    d.hi * g.deriv(self.square.center).abs() * (1.0 + 1e-9)
                }
            };
            l = l.max(v);
        }
        l.next_up()
    }

    /// Extension disk `S'`.
    pub fn extension_disk(&self) -> Disk {
        Disk::new(self.square.center, self.square.diameter / self.extension_ratio)
    }
}

/// A piece `f_I(S)` with certified geometry: exact center and derivative at
/// the square center, enclosures of the inscribed and escribed diameters,
/// and the exact image polygon when the whole system is affine.
#[derive(Debug, Clone)]
pub struct Piece {
    pub word: Word,
    pub center: Point,
    pub deriv: Point,
    pub inscribed: Interval,
    pub escribed: Interval,
    pub polygon: Option<OrientedSquare>,
}

impl Piece {
    /// Disk certified to contain the piece.
    pub fn escribed_disk(&self) -> Disk {
        Disk::new(self.center, self.escribed.hi)
    }

    /// Disk certified to be contained in the piece.
    pub fn inscribed_disk(&self) -> Disk {
        Disk::new(self.center, self.inscribed.lo)
    }

    /// Middle inscribed disk (half the inscribed diameter), inner enclosure.
    pub fn middle_inscribed_disk(&self) -> Disk {
        Disk::new(self.center, 0.5 * self.inscribed.lo)
    }
}

/// `f_I(z)`, applying the first digit first. Errors with `DomainEscape` if
/// an intermediate iterate leaves the extension disk.
pub fn evaluate(spec: &IfsSpec, w: &Word, z: Point) -> Result<Point> {
    let ext = spec.extension_disk();
    let slack = 1e-9 * spec.square().diameter;
    let mut z = z;
    if crate::geometry::dist(z, ext.center) > ext.radius() + slack {
        return Err(Error::DomainEscape { position: 0 });
    }
    for (k, &i) in w.digits.iter().enumerate() {
        z = spec.maps()[i as usize].eval(z);
        if crate::geometry::dist(z, ext.center) > ext.radius() + slack {
            return Err(Error::DomainEscape { position: k + 1 });
        }
    }
    Ok(z)
}

/// `f'_I(z)` by the chain rule along the orbit of `z`.
pub fn derivative_at(spec: &IfsSpec, w: &Word, z: Point) -> Result<Point> {
    let ext = spec.extension_disk();
    let slack = 1e-9 * spec.square().diameter;
    let mut z = z;
    let mut d = Point::new(1.0, 0.0);
    if crate::geometry::dist(z, ext.center) > ext.radius() + slack {
        return Err(Error::DomainEscape { position: 0 });
    }
    for (k, &i) in w.digits.iter().enumerate() {
        let m = &spec.maps()[i as usize];
        d = m.deriv(z).mul(d);
        z = m.eval(z);
        if crate::geometry::dist(z, ext.center) > ext.radius() + slack {
            return Err(Error::DomainEscape { position: k + 1 });
        }
    }
    Ok(d)
}

/// Builds the certified piece for a word, given a distortion enclosure
/// (`[1,1]` for affine systems).
pub fn piece_of(spec: &IfsSpec, w: &Word, d: Interval) -> Result<Piece> {
    let c_s = spec.square().center;
    let center = evaluate(spec, w, c_s)?;
    let deriv = derivative_at(spec, w, c_s)?;
    Ok(make_piece(spec, w.clone(), center, deriv, d))
}

fn make_piece(spec: &IfsSpec, word: Word, center: Point, deriv: Point, d: Interval) -> Piece {
    let abs = Interval::around(deriv.abs());
    let delta_s = spec.square().inscribed_diameter();
    let big_delta_s = spec.square().escribed_diameter();
    let enclose = |base: f64| -> Interval {
        Interval::new(
            (abs.lo * base / d.hi).next_down(),
            (abs.hi * base * d.hi).next_up(),
        )
    };
    let polygon = spec.is_affine().then(|| {
        OrientedSquare::new(
            center,
            deriv.abs() * spec.square().diameter,
            spec.square().rotation + deriv.arg(),
        )
    });
    Piece {
        word,
        center,
        deriv,
        inscribed: enclose(delta_s),
        escribed: enclose(big_delta_s),
        polygon,
    }
}

/// The root piece `S` itself (empty word).
pub fn root_piece(spec: &IfsSpec, d: Interval) -> Piece {
    make_piece(
        spec,
        Word::root(),
        spec.square().center,
        Point::new(1.0, 0.0),
        d,
    )
}

/// The p sons of a piece, in map order. For affine systems this is exact
/// and O(1) per son; general systems re-evaluate along the word.
pub fn children(spec: &IfsSpec, piece: &Piece, d: Interval) -> Result<Vec<Piece>> {
    let c_s = spec.square().center;
    let mut out = Vec::with_capacity(spec.map_count());
    if spec.is_affine() {
        // f_I(z) = a_I z + t_I reconstructed from the piece data.
        let a_i = piece.deriv;
        let t_i = piece.center.sub(a_i.mul(c_s));
        for (i, m) in spec.maps().iter().enumerate() {
            let ContractionMap::Affine { a, b } = m else {
                unreachable!()
            };
            let a_child = a_i.mul(*a);
            let t_child = a_i.mul(*b).add(t_i);
            let center = a_child.mul(c_s).add(t_child);
            out.push(make_piece(
                spec,
                piece.word.son(i as u32),
                center,
                a_child,
                d,
            ));
        }
    } else {
        for i in 0..spec.map_count() {
            out.push(piece_of(spec, &piece.word.son(i as u32), d)?);
        }
    }
    Ok(out)
}

/// All pieces of a given depth, breadth-first with an explicit frontier.
pub fn enumerate_depth(spec: &IfsSpec, n: u32, d: Interval) -> Result<Vec<Piece>> {
    let budget = piece_budget();
    let p = spec.map_count() as u128;
    let mut needed: u128 = 1;
    for _ in 0..n {
        needed = needed.saturating_mul(p);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let mut frontier = vec![root_piece(spec, d)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(frontier.len() * spec.map_count());
        for piece in &frontier {
            next.extend(children(spec, piece, d)?);
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Deepest depth whose full enumeration fits in the budget (at least 1).
pub fn deepest_affordable(spec: &IfsSpec, want: u32) -> u32 {
    let budget = piece_budget();
    let p = spec.map_count() as u128;
    let mut depth = 0u32;
    let mut count: u128 = 1;
    while depth < want {
        count = count.saturating_mul(p);
        if count > budget as u128 {
            break;
        }
        depth += 1;
    }
    depth.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SQRT_2;

    fn square() -> OrientedSquare {
        OrientedSquare::new(Point::ZERO, 1.0, 0.0)
    }

    fn affine(a: Point, b: Point) -> ContractionMap {
        ContractionMap::Affine { a, b }
    }

    fn two_map_spec() -> IfsSpec {
        IfsSpec::new(
            square(),
            vec![
                affine(Point::new(0.2, 0.0), Point::new(-0.2, -0.2)),
                affine(Point::new(0.15, 0.05), Point::new(0.2, 0.2)),
            ],
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn rejects_single_map() {
        let r = IfsSpec::new(
            square(),
            vec![affine(Point::new(0.5, 0.0), Point::ZERO)],
            0.9,
        );
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_overlapping_images() {
        let r = IfsSpec::new(
            square(),
            vec![
                affine(Point::new(0.4, 0.0), Point::ZERO),
                affine(Point::new(0.4, 0.0), Point::new(0.01, 0.0)),
            ],
            0.9,
        );
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn evaluate_empty_word_is_identity() {
        let spec = two_map_spec();
        let z = Point::new(0.1, -0.2);
        assert_eq!(evaluate(&spec, &Word::root(), z).unwrap(), z);
        assert_eq!(
            derivative_at(&spec, &Word::root(), z).unwrap(),
            Point::new(1.0, 0.0)
        );
    }

    #[test]
    fn evaluate_power_of_scaling() {
        let spec = IfsSpec::new(
            square(),
            vec![
                affine(Point::new(0.5, 0.0), Point::ZERO),
                affine(Point::new(0.2, 0.0), Point::new(0.3, 0.3)),
            ],
            0.9,
        )
        .unwrap();
        let w = Word::from_indices(&[0, 0]);
        let z = evaluate(&spec, &w, Point::new(1.0, 0.0)).unwrap();
        assert!((z.re - 0.25).abs() < 1e-15 && z.im == 0.0);
    }

    #[test]
    fn derivative_product_of_constants() {
        let spec = IfsSpec::new(
            square(),
            vec![
                affine(Point::new(0.3, 0.0), Point::new(-0.3, 0.0)),
                affine(Point::new(0.0, 0.2), Point::new(0.3, 0.0)),
            ],
            0.9,
        )
        .unwrap();
        let d = derivative_at(&spec, &Word::from_indices(&[0, 1]), Point::ZERO).unwrap();
        assert!((d.re - 0.0).abs() < 1e-15);
        assert!((d.im - 0.06).abs() < 1e-15);
    }

    #[test]
    fn root_piece_measures_square() {
        let spec = two_map_spec();
        let root = root_piece(&spec, Interval::ONE);
        let ds = spec.square().inscribed_diameter();
        assert!(root.inscribed.contains(ds));
        assert!((root.inscribed.mid() - ds).abs() < 1e-14);
        assert!((root.escribed.mid() - spec.square().diameter).abs() < 1e-14);
        assert_eq!(root.polygon.unwrap(), *spec.square());
    }

    #[test]
    fn affine_piece_is_exact() {
        // Multiplier 0.1 on the diameter-1 square: δ = 0.1/√2, Δ = 0.1.
        let spec = IfsSpec::new(
            square(),
            vec![
                affine(Point::new(0.1, 0.0), Point::new(-0.25, 0.0)),
                affine(Point::new(0.1, 0.0), Point::new(0.25, 0.0)),
            ],
            0.9,
        )
        .unwrap();
        let p = piece_of(&spec, &Word::from_indices(&[0]), Interval::ONE).unwrap();
        assert!((p.inscribed.mid() - 0.1 / SQRT_2).abs() < 1e-14);
        assert!((p.escribed.mid() - 0.1).abs() < 1e-14);
        assert!(p.inscribed.width() < 1e-14);
    }

    #[test]
    fn children_pin_composition_convention() {
        // Sons are f_I ∘ f_i: the son's digit acts first.
        let spec = two_map_spec();
        let d = Interval::ONE;
        let father = piece_of(&spec, &Word::from_indices(&[1]), d).unwrap();
        let sons = children(&spec, &father, d).unwrap();
        assert_eq!(sons.len(), 2);
        assert_eq!(sons[0].word, Word::from_indices(&[0, 1]));
        let expect = spec.maps()[1].eval(spec.maps()[0].eval(Point::ZERO));
        assert!(crate::geometry::dist(sons[0].center, expect) < 1e-14);
        // Contraction: every son is strictly smaller than its father.
        for s in &sons {
            assert!(s.escribed.hi < father.escribed.hi);
            assert!(s.inscribed.hi < father.inscribed.hi);
        }
    }

    #[test]
    fn affine_sons_nest_in_father_polygon() {
        let spec = two_map_spec();
        let d = Interval::ONE;
        let mut frontier = vec![root_piece(&spec, d)];
        for _ in 0..3 {
            let mut next = Vec::new();
            for f in &frontier {
                for s in children(&spec, f, d).unwrap() {
                    assert!(f
                        .polygon
                        .unwrap()
                        .contains_square(s.polygon.unwrap(), -1e-12));
                    next.push(s);
                }
            }
            frontier = next;
        }
    }

    #[test]
    fn enumerate_counts_and_budget() {
        let spec = two_map_spec();
        assert_eq!(enumerate_depth(&spec, 3, Interval::ONE).unwrap().len(), 8);
        assert!(matches!(
            enumerate_depth(&spec, 60, Interval::ONE),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn word_ancestry() {
        let w = Word::from_indices(&[3, 1, 2]);
        assert_eq!(w.ancestor(2), Word::from_indices(&[1, 2]));
        assert!(w.descends_from(&Word::from_indices(&[2])));
        assert!(w.descends_from(&Word::root()));
        assert!(!w.descends_from(&Word::from_indices(&[1])));
    }
}
