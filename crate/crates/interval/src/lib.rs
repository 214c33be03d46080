//! Integer intervals with infinite endpoints.
//!
//! This is a library-level crate: it knows nothing about programs, only about
//! sets of mathematical integers of the form `[lo, hi]` where `lo` may be
//! `-oo` and `hi` may be `+oo`. Endpoint arithmetic is carried out in `i128`
//! and rounded outwards when a result leaves the `i64` range, so every
//! operation over-approximates the concrete result.

use std::cmp::{max, min, Ordering};
use std::fmt;

/// One endpoint of an interval.
///
/// The derived ordering is the natural one: `NegInf < Finite(_) < PosInf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Finite(i64),
    PosInf,
}

impl Bound {
    pub fn finite(self) -> Option<i64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn ext(self) -> Ext {
        match self {
            Bound::NegInf => Ext::NegInf,
            Bound::Finite(v) => Ext::Fin(v as i128),
            Bound::PosInf => Ext::PosInf,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-oo"),
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::PosInf => f.write_str("+oo"),
        }
    }
}

/// Extended integer used for intermediate endpoint computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(i128),
    PosInf,
}

impl Ext {
    fn signum(self) -> i32 {
        match self {
            Ext::NegInf => -1,
            Ext::PosInf => 1,
            Ext::Fin(v) => v.signum() as i32,
        }
    }

    fn inf_with_sign(sign: i32) -> Ext {
        if sign < 0 {
            Ext::NegInf
        } else {
            Ext::PosInf
        }
    }

    fn add(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.saturating_add(b)),
            // Callers never add opposite infinities: lower bounds are never
            // +oo and upper bounds are never -oo.
            (Ext::NegInf, _) | (_, Ext::NegInf) => Ext::NegInf,
            _ => Ext::PosInf,
        }
    }

    fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Fin(v) => Ext::Fin(-v),
        }
    }

    fn mul(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.saturating_mul(b)),
            _ => {
                let s = self.signum() * other.signum();
                if s == 0 {
                    Ext::Fin(0)
                } else {
                    Ext::inf_with_sign(s)
                }
            }
        }
    }

    /// Truncating division; `other` is never zero.
    fn div(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a / b),
            (Ext::Fin(_), _) => Ext::Fin(0),
            (_, Ext::Fin(b)) => Ext::inf_with_sign(self.signum() * b.signum() as i32),
            // Both infinite: another corner of the box already carries the
            // infinite extreme, so zero is a safe representative here.
            _ => Ext::Fin(0),
        }
    }

    fn abs(self) -> Ext {
        match self {
            Ext::Fin(v) => Ext::Fin(v.abs()),
            _ => Ext::PosInf,
        }
    }

    /// Round towards -oo into a lower bound.
    fn lower(self) -> Bound {
        match self {
            Ext::NegInf => Bound::NegInf,
            Ext::PosInf => Bound::Finite(i64::MAX),
            Ext::Fin(v) if v < i64::MIN as i128 => Bound::NegInf,
            Ext::Fin(v) if v > i64::MAX as i128 => Bound::Finite(i64::MAX),
            Ext::Fin(v) => Bound::Finite(v as i64),
        }
    }

    /// Round towards +oo into an upper bound.
    fn upper(self) -> Bound {
        match self {
            Ext::PosInf => Bound::PosInf,
            Ext::NegInf => Bound::Finite(i64::MIN),
            Ext::Fin(v) if v > i64::MAX as i128 => Bound::PosInf,
            Ext::Fin(v) if v < i64::MIN as i128 => Bound::Finite(i64::MIN),
            Ext::Fin(v) => Bound::Finite(v as i64),
        }
    }
}

/// A possibly empty, possibly unbounded set of consecutive integers.
///
/// Non-bottom values always satisfy `lo <= hi`, `lo != +oo` and `hi != -oo`;
/// the constructors enforce this by returning `Bottom` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Bottom,
    Range { lo: Bound, hi: Bound },
}

impl Default for Interval {
    fn default() -> Self {
        Interval::TOP
    }
}

impl Interval {
    pub const TOP: Interval = Interval::Range {
        lo: Bound::NegInf,
        hi: Bound::PosInf,
    };

    pub fn new(lo: Bound, hi: Bound) -> Interval {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            Interval::Bottom
        } else {
            Interval::Range { lo, hi }
        }
    }

    pub fn range(lo: i64, hi: i64) -> Interval {
        Interval::new(Bound::Finite(lo), Bound::Finite(hi))
    }

    pub fn singleton(v: i64) -> Interval {
        Interval::range(v, v)
    }

    /// `[lo, +oo]`
    pub fn at_least(lo: i64) -> Interval {
        Interval::new(Bound::Finite(lo), Bound::PosInf)
    }

    /// `[-oo, hi]`
    pub fn at_most(hi: i64) -> Interval {
        Interval::new(Bound::NegInf, Bound::Finite(hi))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Interval::Bottom)
    }

    pub fn is_top(&self) -> bool {
        *self == Interval::TOP
    }

    pub fn lo(&self) -> Option<Bound> {
        match self {
            Interval::Bottom => None,
            Interval::Range { lo, .. } => Some(*lo),
        }
    }

    pub fn hi(&self) -> Option<Bound> {
        match self {
            Interval::Bottom => None,
            Interval::Range { hi, .. } => Some(*hi),
        }
    }

    pub fn bounds(&self) -> Option<(Bound, Bound)> {
        match self {
            Interval::Bottom => None,
            Interval::Range { lo, hi } => Some((*lo, *hi)),
        }
    }

    pub fn as_singleton(&self) -> Option<i64> {
        match self {
            Interval::Range {
                lo: Bound::Finite(a),
                hi: Bound::Finite(b),
            } if a == b => Some(*a),
            _ => None,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Interval::Bottom => false,
            Interval::Range { lo, hi } => *lo <= Bound::Finite(v) && Bound::Finite(v) <= *hi,
        }
    }

    /// Inclusion order: `self ⊑ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        match (self, other) {
            (Interval::Bottom, _) => true,
            (_, Interval::Bottom) => false,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => c <= a && b <= d,
        }
    }

    /// Convex hull.
    pub fn join(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => *x,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                Interval::Range {
                    lo: min(*a, *c),
                    hi: max(*b, *d),
                }
            }
        }
    }

    pub fn meet(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                Interval::new(max(*a, *c), min(*b, *d))
            }
        }
    }

    /// Any bound of `new` that grows past the corresponding bound of `self`
    /// jumps to infinity.
    pub fn widen(&self, new: &Interval) -> Interval {
        match (self, new) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => *x,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                let lo = if c < a { Bound::NegInf } else { *a };
                let hi = if d > b { Bound::PosInf } else { *b };
                Interval::Range { lo, hi }
            }
        }
    }

    /// Replace infinite bounds of `self` by those of `new`; finite bounds are
    /// kept. The result is always included in `self`.
    pub fn narrow(&self, new: &Interval) -> Interval {
        match (self, new) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                let lo = if *a == Bound::NegInf { max(*a, *c) } else { *a };
                let hi = if *b == Bound::PosInf { min(*b, *d) } else { *b };
                Interval::new(lo, hi)
            }
        }
    }

    fn ext_bounds(&self) -> Option<(Ext, Ext)> {
        self.bounds().map(|(lo, hi)| (lo.ext(), hi.ext()))
    }

    fn from_ext(lo: Ext, hi: Ext) -> Interval {
        Interval::new(lo.lower(), hi.upper())
    }

    pub fn neg(&self) -> Interval {
        match self.ext_bounds() {
            None => Interval::Bottom,
            Some((lo, hi)) => Interval::from_ext(hi.neg(), lo.neg()),
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        match (self.ext_bounds(), other.ext_bounds()) {
            (Some((a, b)), Some((c, d))) => Interval::from_ext(a.add(c), b.add(d)),
            _ => Interval::Bottom,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        match (self.ext_bounds(), other.ext_bounds()) {
            (Some((a, b)), Some((c, d))) => {
                let corners = [a.mul(c), a.mul(d), b.mul(c), b.mul(d)];
                let lo = *corners.iter().min().unwrap();
                let hi = *corners.iter().max().unwrap();
                Interval::from_ext(lo, hi)
            }
            _ => Interval::Bottom,
        }
    }

    /// Splits into the strictly negative and strictly positive parts.
    fn nonzero_parts(&self) -> [Interval; 2] {
        [
            self.meet(&Interval::at_most(-1)),
            self.meet(&Interval::at_least(1)),
        ]
    }

    /// Truncating division restricted to nonzero divisors. A divisor of
    /// exactly `[0, 0]` yields `Bottom`: no execution survives it.
    pub fn div(&self, divisor: &Interval) -> Interval {
        let Some((a, b)) = self.ext_bounds() else {
            return Interval::Bottom;
        };
        let mut out = Interval::Bottom;
        for part in divisor.nonzero_parts() {
            let Some((c, d)) = part.ext_bounds() else {
                continue;
            };
            let corners = [a.div(c), a.div(d), b.div(c), b.div(d)];
            let lo = *corners.iter().min().unwrap();
            let hi = *corners.iter().max().unwrap();
            out = out.join(&Interval::from_ext(lo, hi));
        }
        out
    }

    /// Truncating remainder (sign follows the dividend) restricted to nonzero
    /// divisors.
    pub fn rem(&self, divisor: &Interval) -> Interval {
        let Some((a, b)) = self.ext_bounds() else {
            return Interval::Bottom;
        };
        let parts = divisor.nonzero_parts();
        if parts.iter().all(Interval::is_bottom) {
            return Interval::Bottom;
        }
        if let (Some(x), Some(y)) = (self.as_singleton(), divisor.as_singleton()) {
            if y != 0 {
                return Interval::singleton(x.wrapping_rem(y));
            }
        }
        // Largest possible |remainder| is max|divisor| - 1.
        let mut largest = Ext::Fin(0);
        for part in parts {
            if let Some((c, d)) = part.ext_bounds() {
                largest = max(largest, max(c.abs(), d.abs()));
            }
        }
        let m = largest.add(Ext::Fin(-1));
        let lo = if a >= Ext::Fin(0) { Ext::Fin(0) } else { max(a, m.neg()) };
        let hi = if b <= Ext::Fin(0) { Ext::Fin(0) } else { min(b, m) };
        Interval::from_ext(lo, hi)
    }

    /// Definite comparison of all values of `self` against all of `other`:
    /// `Some(Less)` if every value is smaller, `Some(Greater)` if every value
    /// is larger, `Some(Equal)` if both are the same singleton.
    pub fn compare(&self, other: &Interval) -> Option<Ordering> {
        let (a, b) = self.bounds()?;
        let (c, d) = other.bounds()?;
        if b < c {
            Some(Ordering::Less)
        } else if a > d {
            Some(Ordering::Greater)
        } else if a == b && c == d && a == c && a.finite().is_some() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bottom => f.write_str("bottom"),
            Interval::Range { lo, hi } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_is_hull() {
        assert_eq!(Interval::range(0, 3).join(&Interval::range(5, 9)), Interval::range(0, 9));
    }

    #[test]
    fn widen_jumps_growing_bound() {
        assert_eq!(
            Interval::range(0, 1).widen(&Interval::range(0, 2)),
            Interval::at_least(0)
        );
        assert_eq!(
            Interval::range(0, 1).widen(&Interval::range(-1, 1)),
            Interval::at_most(1)
        );
    }

    #[test]
    fn narrow_refines_infinite_bound_only() {
        assert_eq!(
            Interval::at_least(0).narrow(&Interval::range(0, 10)),
            Interval::range(0, 10)
        );
        assert_eq!(
            Interval::range(0, 5).narrow(&Interval::range(-3, 10)),
            Interval::range(0, 5)
        );
    }

    #[test]
    fn endpoint_arithmetic() {
        assert_eq!(Interval::range(1, 3).add(&Interval::range(2, 2)), Interval::range(3, 5));
        let x = Interval::range(-2, 3);
        assert_eq!(x.mul(&x), Interval::range(-6, 9));
        assert_eq!(Interval::range(0, 10).div(&Interval::range(0, 2)), Interval::range(0, 10));
    }

    #[test]
    fn division_by_zero_only_is_bottom() {
        assert!(Interval::range(1, 5).div(&Interval::singleton(0)).is_bottom());
        assert!(Interval::range(1, 5).rem(&Interval::singleton(0)).is_bottom());
    }

    #[test]
    fn overflow_rounds_outwards() {
        let big = Interval::singleton(i64::MAX);
        assert_eq!(big.add(&Interval::singleton(1)), Interval::new(Bound::Finite(i64::MAX), Bound::PosInf));
        let min = Interval::singleton(i64::MIN);
        assert_eq!(min.neg(), Interval::new(Bound::Finite(i64::MAX), Bound::PosInf));
    }

    #[test]
    fn infinite_products() {
        let pos = Interval::at_least(0);
        assert_eq!(pos.mul(&Interval::singleton(0)), Interval::singleton(0));
        assert_eq!(pos.mul(&Interval::singleton(-2)), Interval::at_most(0));
        assert_eq!(Interval::TOP.div(&Interval::at_least(1)), Interval::TOP);
    }

    #[test]
    fn compare_is_definite_only() {
        use Ordering::*;
        assert_eq!(Interval::range(0, 1).compare(&Interval::range(2, 3)), Some(Less));
        assert_eq!(Interval::singleton(4).compare(&Interval::singleton(4)), Some(Equal));
        assert_eq!(Interval::range(0, 4).compare(&Interval::range(2, 3)), None);
    }

    #[test]
    fn display() {
        assert_eq!(Interval::at_least(10).to_string(), "[10, +oo]");
        assert_eq!(Interval::Bottom.to_string(), "bottom");
    }
}
