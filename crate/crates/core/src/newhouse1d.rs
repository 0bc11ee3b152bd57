//! Classical one-dimensional thickness, the gap-lemma trichotomy, and the
//! Hausdorff-dimension lower bound. Used as a reference implementation and
//! cross-check for the planar machinery.
//!
//! A Cantor set is represented by a finite defining prefix of its gaps; the
//! thickness computed over that prefix is exact for self-similar sets once a
//! full period of gaps is listed. The two unbounded components outside the
//! bounding interval count as gaps of infinite length.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cantor1D {
    /// Bounding interval `[a, b]`.
    pub interval: (f64, f64),
    /// Open gaps, sorted, pairwise disjoint, inside the bounding interval.
    pub gaps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapLemmaVerdict {
    KInGapOfL,
    LInGapOfK,
    MustIntersect,
    Inconclusive,
}

impl Cantor1D {
    pub fn new(interval: (f64, f64), mut gaps: Vec<(f64, f64)>) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) {
            return Err(Error::InvalidParams("empty bounding interval".into()));
        }
        gaps.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in gaps.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::InvalidParams("gaps overlap".into()));
            }
        }
        for &(lo, hi) in &gaps {
            if !(lo < hi) || lo < a || hi > b {
                return Err(Error::InvalidParams(
                    "gap degenerate or outside the bounding interval".into(),
                ));
            }
        }
        Ok(Self { interval, gaps })
    }

    /// Defining prefix of the middle-`alpha` Cantor set on `[0,1]` down to
    /// the given depth (each kept interval loses its centered `alpha`
    /// fraction per level).
    pub fn middle_alpha_prefix(alpha: f64, depth: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams("alpha must lie in (0,1)".into()));
        }
        let mut kept = vec![(0.0f64, 1.0f64)];
        let mut gaps = Vec::new();
        for _ in 0..depth {
            let mut next = Vec::with_capacity(kept.len() * 2);
            for &(a, b) in &kept {
                let len = b - a;
                let keep = 0.5 * (1.0 - alpha) * len;
                gaps.push((a + keep, b - keep));
                next.push((a, a + keep));
                next.push((b - keep, b));
            }
            kept = next;
        }
        Self::new((0.0, 1.0), gaps)
    }

    /// The kept (bridge) intervals once the listed gaps are removed.
    pub fn bridges(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.interval;
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut x = a;
        for &(lo, hi) in &self.gaps {
            if lo > x {
                out.push((x, lo));
            }
            x = x.max(hi);
        }
        if x < b {
            out.push((x, b));
        }
        out
    }
}

/// Thickness over the listed gaps: for each bounded gap `I`, the smallest
/// interval `U` separating it from a gap at least as long (boundary
/// components count as infinite gaps), minimized over `ℓ(U)/ℓ(I)`.
pub fn tau(c: &Cantor1D) -> Result<f64> {
    if c.gaps.is_empty() {
        return Err(Error::NoGaps);
    }
    let (a, b) = c.interval;
    let mut best = f64::INFINITY;
    for (i, &(lo, hi)) in c.gaps.iter().enumerate() {
        let len = hi - lo;
        // Nearest gap at least as long on the left; the exterior (-∞, a)
        // qualifies always.
        let mut left = lo - a;
        for &(plo, phi) in c.gaps[..i].iter().rev() {
            if phi - plo >= len {
                left = lo - phi;
                break;
            }
        }
        let mut right = b - hi;
        for &(nlo, nhi) in &c.gaps[i + 1..] {
            if nhi - nlo >= len {
                right = nlo - hi;
                break;
            }
        }
        best = best.min(left.min(right) / len);
    }
    Ok(best)
}

/// Newhouse trichotomy on the finite prefixes: containment of one set in a
/// gap of the other when detected, `MustIntersect` when the thickness
/// product certifies it, `Inconclusive` otherwise.
pub fn gap_lemma_1d(k: &Cantor1D, l: &Cantor1D) -> Result<GapLemmaVerdict> {
    if in_gap_of(k, l) {
        return Ok(GapLemmaVerdict::KInGapOfL);
    }
    if in_gap_of(l, k) {
        return Ok(GapLemmaVerdict::LInGapOfK);
    }
    let product = tau(k)? * tau(l)?;
    if product >= 1.0 {
        Ok(GapLemmaVerdict::MustIntersect)
    } else {
        Ok(GapLemmaVerdict::Inconclusive)
    }
}

fn in_gap_of(inner: &Cantor1D, outer: &Cantor1D) -> bool {
    let (a, b) = inner.interval;
    let (oa, ob) = outer.interval;
    if b < oa || a > ob {
        return true; // inside an unbounded gap
    }
    outer.gaps.iter().any(|&(lo, hi)| lo < a && b < hi)
}

/// Dimension lower bound `log 2 / log(2 + 1/τ)`.
pub fn hausdorff_lower(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonpositiveTau(tau));
    }
    Ok(2.0f64.ln() / (2.0 + 1.0 / tau).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_single_middle_third() {
        let c = Cantor1D::new((0.0, 1.0), vec![(1.0 / 3.0, 2.0 / 3.0)]).unwrap();
        assert!((tau(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_middle_thirds_prefix_is_one() {
        for depth in 1..=3 {
            let c = Cantor1D::middle_alpha_prefix(1.0 / 3.0, depth).unwrap();
            assert!(
                (tau(&c).unwrap() - 1.0).abs() < 1e-12,
                "depth {depth}: tau = {}",
                tau(&c).unwrap()
            );
        }
    }

    #[test]
    fn tau_middle_half() {
        // Removing the middle half leaves bridges (1−α)/2 = 1/4 against
        // gaps of length 1/2: τ = 0.5.
        let c = Cantor1D::middle_alpha_prefix(0.5, 3).unwrap();
        assert!((tau(&c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tau_rescale_invariance() {
        let c = Cantor1D::middle_alpha_prefix(1.0 / 3.0, 4).unwrap();
        let scale = 3.7;
        let shift = -1.3;
        let scaled = Cantor1D::new(
            (shift, scale + shift),
            c.gaps
                .iter()
                .map(|&(a, b)| (scale * a + shift, scale * b + shift))
                .collect(),
        )
        .unwrap();
        let t0 = tau(&c).unwrap();
        let t1 = tau(&scaled).unwrap();
        assert!((t0 - t1).abs() <= 1e-12 * t0.max(1.0));
    }

    #[test]
    fn no_gaps_errors() {
        let c = Cantor1D::new((0.0, 1.0), vec![]).unwrap();
        assert!(matches!(tau(&c), Err(Error::NoGaps)));
    }

    #[test]
    fn gap_lemma_cases() {
        let thirds = Cantor1D::middle_alpha_prefix(1.0 / 3.0, 4).unwrap();
        assert_eq!(
            gap_lemma_1d(&thirds, &thirds).unwrap(),
            GapLemmaVerdict::MustIntersect
        );

        // K inside a gap of L.
        let l = Cantor1D::new((0.0, 1.0), vec![(0.05, 0.5)]).unwrap();
        let k = Cantor1D::new((0.1, 0.3), vec![(0.15, 0.2)]).unwrap();
        assert_eq!(gap_lemma_1d(&k, &l).unwrap(), GapLemmaVerdict::KInGapOfL);
        assert_eq!(gap_lemma_1d(&l, &k).unwrap(), GapLemmaVerdict::LInGapOfK);

        // Thin sets: τ·τ = 0.25 < 1 → inconclusive.
        let thin = Cantor1D::middle_alpha_prefix(0.5, 3).unwrap();
        assert_eq!(
            gap_lemma_1d(&thin, &thin).unwrap(),
            GapLemmaVerdict::Inconclusive
        );
    }

    #[test]
    fn hausdorff_values() {
        let d = hausdorff_lower(1.0).unwrap();
        assert!((d - 2.0f64.ln() / 3.0f64.ln()).abs() < 1e-15);
        assert!((hausdorff_lower(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(hausdorff_lower(1e9).unwrap() > 0.99);
        assert!(matches!(hausdorff_lower(0.0), Err(Error::NonpositiveTau(_))));
        // Strictly increasing in τ.
        let mut prev = 0.0;
        for t in [0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
            let v = hausdorff_lower(t).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn bridges_partition() {
        let c = Cantor1D::middle_alpha_prefix(1.0 / 3.0, 2).unwrap();
        let b = c.bridges();
        assert_eq!(b.len(), 4);
        assert!((b[0].1 - 1.0 / 9.0).abs() < 1e-12);
    }
}
