//! Closed real intervals `[lo, hi]` with outward-rounded arithmetic.
//!
//! Every operation widens its result by one ulp on each side, so a value
//! contained in the inputs stays contained in the output. That is cheap and
//! sufficient here: the quantities we enclose are well scaled and the gaps
//! the certificates rely on are many orders of magnitude above 1 ulp.

use serde::{Deserialize, Serialize};

/// Fixed absolute slack used for certified comparisons of exact doubles
/// (distances, diameters) where full interval propagation would be noise.
pub const CMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Degenerate interval `[v, v]`.
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    /// Interval around an exactly computed double, one ulp each side.
    pub fn around(v: f64) -> Self {
        Self {
            lo: v.next_down(),
            hi: v.next_up(),
        }
    }

    pub const ONE: Self = Self { lo: 1.0, hi: 1.0 };

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(self, other: Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(self, other: Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn add(self, other: Self) -> Self {
        Self {
            lo: (self.lo + other.lo).next_down(),
            hi: (self.hi + other.hi).next_up(),
        }
    }

    pub fn sub(self, other: Self) -> Self {
        Self {
            lo: (self.lo - other.hi).next_down(),
            hi: (self.hi - other.lo).next_up(),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    /// Division; the denominator must not straddle zero.
    pub fn div(self, other: Self) -> Self {
        assert!(
            other.lo > 0.0 || other.hi < 0.0,
            "interval division by a zero-straddling interval [{}, {}]",
            other.lo,
            other.hi
        );
        let p = [
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    /// Square root of a nonnegative interval (lo clamped at zero).
    pub fn sqrt(self) -> Self {
        debug_assert!(self.hi >= 0.0);
        Self {
            lo: self.lo.max(0.0).sqrt().next_down().max(0.0),
            hi: self.hi.sqrt().next_up(),
        }
    }

    /// Integer power for small nonnegative exponents.
    pub fn powi(self, n: u32) -> Self {
        let mut out = Self::ONE;
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Scale by an exact nonnegative double.
    pub fn scale(self, k: f64) -> Self {
        debug_assert!(k >= 0.0);
        Self {
            lo: (self.lo * k).next_down(),
            hi: (self.hi * k).next_up(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Relative agreement of the endpoints of two intervals, used by the
    /// scale-invariance tests.
    pub fn endpoint_distance_rel(self, other: Self) -> f64 {
        let scale = self.lo.abs().max(self.hi.abs()).max(1e-300);
        ((self.lo - other.lo).abs()).max((self.hi - other.hi).abs()) / scale
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_arithmetic_encloses() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a.add(b);
        assert!(s.contains(0.1 + 0.2));
        assert!(s.width() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn sqrt_encloses() {
        let x = Interval::new(2.0, 2.0).sqrt();
        assert!(x.contains(std::f64::consts::SQRT_2));
    }

    #[test]
    #[should_panic]
    fn div_by_zero_straddle_panics() {
        let _ = Interval::point(1.0).div(Interval::new(-1.0, 1.0));
    }

    proptest! {
        // Sampled containment: op(x, y) ∈ OP([x],[y]) for x ∈ [x], y ∈ [y].
        #[test]
        fn ops_contain_samples(a in -1e6f64..1e6, b in -1e6f64..1e6,
                               wa in 0.0f64..10.0, wb in 0.0f64..10.0,
                               ta in 0.0f64..=1.0, tb in 0.0f64..=1.0) {
            let ia = Interval::new(a, a + wa);
            let ib = Interval::new(b, b + wb);
            let xa = a + ta * wa;
            let xb = b + tb * wb;
            prop_assert!(ia.add(ib).contains(xa + xb));
            prop_assert!(ia.sub(ib).contains(xa - xb));
            prop_assert!(ia.mul(ib).contains(xa * xb));
            if ib.lo > 1e-9 {
                prop_assert!(ia.div(ib).contains(xa / xb));
            }
        }

        #[test]
        fn sqrt_contains_samples(a in 0.0f64..1e9, w in 0.0f64..100.0, t in 0.0f64..=1.0) {
            let i = Interval::new(a, a + w);
            prop_assert!(i.sqrt().contains((a + t * w).sqrt()));
        }
    }
}
