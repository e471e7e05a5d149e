//! Closed bounded real intervals with the center-width partial order.
//!
//! Arithmetic is plain binary floating point without outward rounding. On
//! dyadic inputs of moderate magnitude every operation here is exact.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A compact interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    /// Builds `[lo, hi]`. Reversed or NaN endpoints are rejected, never swapped.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[0, s]` for `s >= 0`; the handicap interval added to competitors.
    pub fn shift(s: f64) -> Result<Self> {
        Interval::new(0.0, s)
    }

    pub fn from_center_width(center: f64, width: f64) -> Result<Self> {
        Interval::new(center - width, center + width)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn center(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    /// Half-width `(hi - lo) / 2`.
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn scale(&self, alpha: f64) -> Self {
        if alpha >= 0.0 {
            Interval {
                lo: alpha * self.lo,
                hi: alpha * self.hi,
            }
        } else {
            Interval {
                lo: alpha * self.hi,
                hi: alpha * self.lo,
            }
        }
    }

    /// Generalized Hukuhara difference `self ⊖ other`.
    pub fn gh_diff(&self, other: &Interval) -> Self {
        let a = self.lo - other.lo;
        let b = self.hi - other.hi;
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    /// `max(|lo|, |hi|)`.
    pub fn norm(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Hausdorff distance, `max(|lo - lo'|, |hi - hi'|)`.
    pub fn hausdorff(&self, other: &Interval) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }

    /// `self ≼_CW other`: center and width both no larger.
    pub fn cw_leq(&self, other: &Interval) -> bool {
        self.center() <= other.center() && self.width() <= other.width()
    }

    /// `self ≺_CW other`: center and width both strictly smaller.
    pub fn cw_lt(&self, other: &Interval) -> bool {
        self.center() < other.center() && self.width() < other.width()
    }

    /// `self + [0, s]` for `s >= 0`.
    pub fn plus_handicap(&self, s: f64) -> Self {
        debug_assert!(s >= 0.0);
        Interval {
            lo: self.lo,
            hi: self.hi + s,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl Mul<Interval> for f64 {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        rhs.scale(self)
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |acc, q| acc + q)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(q: Interval) -> Self {
        [q.lo, q.hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn addition() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 5.0), iv(4.0, 7.0));
        assert_eq!(iv(-1.0, 1.0) + iv(-2.0, 0.0), iv(-3.0, 1.0));
        let q = iv(0.25, 9.5);
        assert_eq!(q + Interval::ZERO, q);
    }

    #[test]
    fn scalar_multiplication() {
        assert_eq!(0.0 * iv(1.0, 3.0), iv(0.0, 0.0));
        assert_eq!(-2.0 * iv(1.0, 3.0), iv(-6.0, -2.0));
        assert_eq!(2.0 * iv(-1.0, 4.0), iv(-2.0, 8.0));
    }

    #[test]
    fn gh_difference() {
        let q = iv(-3.5, 2.25);
        assert_eq!(q.gh_diff(&q), Interval::ZERO);
        assert_eq!(iv(5.0, 7.0).gh_diff(&iv(1.0, 2.0)), iv(4.0, 5.0));
        assert_eq!(iv(0.0, 2.0).gh_diff(&iv(0.0, 1.0)), iv(0.0, 1.0));
    }

    #[test]
    fn hausdorff_and_norm() {
        assert_eq!(iv(0.0, 1.0).hausdorff(&iv(0.0, 1.0)), 0.0);
        assert_eq!(iv(1.0, 2.0).hausdorff(&iv(3.0, 5.0)), 3.0);
        assert_eq!(iv(-1.0, 0.0).hausdorff(&iv(0.0, 2.0)), 2.0);
        assert_eq!(Interval::ZERO.norm(), 0.0);
        assert_eq!(iv(-3.0, 2.0).norm(), 3.0);
        assert_eq!(iv(1.0, 4.0).norm(), 4.0);
    }

    #[test]
    fn cw_orders() {
        let q = iv(-1.0, 0.5);
        assert!(q.cw_leq(&q));
        assert!(!q.cw_lt(&q));
        assert!(iv(1.0, 3.0).cw_lt(&iv(2.0, 6.0)));
        // widths 0.5 > 0.25: incomparable despite the smaller center
        assert!(!iv(0.0, 1.0).cw_leq(&iv(2.0, 2.5)));
        assert!(!iv(2.0, 2.5).cw_leq(&iv(0.0, 1.0)));
    }

    #[test]
    fn reversed_endpoints_rejected() {
        assert!(matches!(
            Interval::new(2.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn serde_as_pair() {
        let q: Interval = serde_json::from_str("[1.5, 2]").unwrap();
        assert_eq!(q, iv(1.5, 2.0));
        assert!(serde_json::from_str::<Interval>("[3, 2]").is_err());
        assert_eq!(serde_json::to_string(&q).unwrap(), "[1.5,2.0]");
    }

    fn dyadic() -> impl Strategy<Value = f64> {
        (-4096i32..4096).prop_map(|k| k as f64 / 64.0)
    }

    fn dyadic_interval() -> impl Strategy<Value = Interval> {
        (dyadic(), dyadic()).prop_map(|(a, b)| iv(a.min(b), a.max(b)))
    }

    proptest! {
        #[test]
        fn center_width_reconstruct(q in dyadic_interval()) {
            prop_assert!(q.width() >= 0.0);
            prop_assert_eq!(Interval::from_center_width(q.center(), q.width()).unwrap(), q);
        }

        #[test]
        fn gh_norm_is_hausdorff(q in dyadic_interval(), r in dyadic_interval()) {
            prop_assert_eq!(q.gh_diff(&r).norm(), q.hausdorff(&r));
            prop_assert_eq!(q.hausdorff(&r), r.hausdorff(&q));
            prop_assert_eq!(q.hausdorff(&r) == 0.0, q == r);
        }

        #[test]
        fn strict_implies_weak(q in dyadic_interval(), r in dyadic_interval()) {
            if q.cw_lt(&r) {
                prop_assert!(q.cw_leq(&r));
            }
        }
    }
}
