//! Generator for the regular N×N affine family: N² similarity maps of real
//! multiplier `r/N` whose depth-1 images tile the initial square as a
//! regular lattice of subsquares of relative size `r`.

use crate::error::Error;
use crate::geometry::{OrientedSquare, Point};
use crate::ifs::{ContractionMap, IfsSpec};
use crate::Result;

/// Builds the N×N grid IFS on the square of diameter 1 centered at 0.
/// Cell k (row-major from the bottom-left) has center
/// `((i+1/2)/N − 1/2, (j+1/2)/N − 1/2) · side`.
pub fn grid_spec(n: u32, r: f64) -> Result<IfsSpec> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("grid needs n >= 2, got {n}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParams(format!(
            "relative size must lie in (0,1), got {r}"
        )));
    }
    let square = OrientedSquare::new(Point::ZERO, 1.0, 0.0);
    let side = square.side();
    let a = Point::new(r / n as f64, 0.0);
    let mut maps = Vec::with_capacity((n * n) as usize);
    for j in 0..n {
        for i in 0..n {
            let b = Point::new(
                ((i as f64 + 0.5) / n as f64 - 0.5) * side,
                ((j as f64 + 0.5) / n as f64 - 0.5) * side,
            );
            maps.push(ContractionMap::Affine { a, b });
        }
    }
    let ext = grid_extension_ratio(&square, &maps);
    IfsSpec::new(square, maps, ext)
}

/// Smallest extension ratio whose disk keeps every affine image inside the
/// square, when one exists; affine systems do not use the extension for
/// their distortion (it is exactly 1), so an infeasible geometry falls back
/// to a nominal ratio.
fn grid_extension_ratio(square: &OrientedSquare, maps: &[ContractionMap]) -> f64 {
    let mut max_r_prime = f64::INFINITY;
    for m in maps {
        let ContractionMap::Affine { a, b } = m else {
            continue;
        };
        let depth = square.interior_depth(*b);
        if depth <= 0.0 {
            return 0.95;
        }
        max_r_prime = max_r_prime.min(depth / a.abs());
    }
    let needed = 0.5 * square.diameter / max_r_prime;
    if needed < 0.99 {
        (needed * (1.0 + 1e-9)).max(0.05)
    } else {
        0.95
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist;
    use crate::ifs::{enumerate_depth, evaluate, Word};
    use crate::interval::Interval;

    #[test]
    fn rejects_bad_params() {
        assert!(grid_spec(1, 0.5).is_err());
        assert!(grid_spec(4, 0.0).is_err());
        assert!(grid_spec(4, 1.0).is_err());
    }

    #[test]
    fn n4_has_16_cells_on_the_lattice() {
        let spec = grid_spec(4, 0.9).unwrap();
        assert_eq!(spec.map_count(), 16);
        let side = spec.square().side();
        let pieces = enumerate_depth(&spec, 1, Interval::ONE).unwrap();
        assert_eq!(pieces.len(), 16);
        for (k, p) in pieces.iter().enumerate() {
            let i = (k % 4) as f64;
            let j = (k / 4) as f64;
            let expect = Point::new(
                ((i + 0.5) / 4.0 - 0.5) * side,
                ((j + 0.5) / 4.0 - 0.5) * side,
            );
            assert!(dist(p.center, expect) < 1e-14);
            // Word (k) maps the center of S to the k-th cell center.
            let z = evaluate(&spec, &Word::from_indices(&[k as u32]), Point::ZERO).unwrap();
            assert!(dist(z, expect) < 1e-14);
        }
    }

    #[test]
    fn small_multiplier_grid_gets_tight_extension() {
        // r = 0.5 on N=2: the extension disk constraint is feasible.
        let spec = grid_spec(2, 0.5).unwrap();
        assert!(spec.extension_ratio() < 1.0);
        let ext = spec.extension_disk();
        for i in 0..spec.map_count() {
            let img_center = spec.maps()[i].eval(Point::ZERO);
            let img_radius = 0.25 * ext.radius();
            // Image of the extension disk strictly inside the square.
            assert!(
                spec.square().interior_depth(img_center) > img_radius,
                "extension image leaks for map {i}"
            );
        }
    }
}
