//! Exact dyadic arithmetic.
//!
//! A [`DyadicIndex`] `(j, k)` names the interval `[k 2^-j, (k + 1) 2^-j)`, so
//! larger `j` means a finer interval. Points on `R+` are carried as exact
//! dyadic rationals ([`DyadicPoint`]) so that membership, the smallest common
//! interval and the dyadic distance are decided with integer shifts and never
//! hit a floating point tie at an interval boundary.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default depth of the dyadic grid used for evaluation points.
pub const DEFAULT_GRID_DEPTH: u32 = 20;

/// Largest supported depth for a [`DyadicPoint`].
pub const MAX_DEPTH: u32 = 62;

/// The dyadic interval `[k 2^-j, (k + 1) 2^-j)`.
///
/// Ordered by scale first and translation second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub j: i32,
    pub k: i64,
}

impl DyadicIndex {
    pub const fn new(j: i32, k: i64) -> Self {
        DyadicIndex { j, k }
    }

    /// `|I| = 2^-j`.
    pub fn length(&self) -> f64 {
        pow2(-self.j)
    }

    pub fn left(&self) -> f64 {
        self.k as f64 * self.length()
    }

    pub fn right(&self) -> f64 {
        (self.k as f64 + 1.0) * self.length()
    }

    /// Whether the interval lies in `R+`, i.e. belongs to the restricted family `D+`.
    pub fn is_nonnegative(&self) -> bool {
        self.k >= 0
    }

    pub fn parent(&self) -> DyadicIndex {
        DyadicIndex::new(self.j - 1, self.k.div_euclid(2))
    }

    pub fn children(&self) -> [DyadicIndex; 2] {
        [
            DyadicIndex::new(self.j + 1, 2 * self.k),
            DyadicIndex::new(self.j + 1, 2 * self.k + 1),
        ]
    }

    /// `[I, parent(I), parent(parent(I)), ...]` with `count + 1` entries.
    pub fn ancestors(&self, count: usize) -> Vec<DyadicIndex> {
        let mut out = Vec::with_capacity(count + 1);
        let mut cur = *self;
        out.push(cur);
        for _ in 0..count {
            cur = cur.parent();
            out.push(cur);
        }
        out
    }

    /// Exact membership test `k 2^-j <= x < (k + 1) 2^-j`.
    pub fn contains(&self, x: DyadicPoint) -> bool {
        x.floor_scaled(self.j) == Some(self.k)
    }

    /// Floating point membership test, for points that are not dyadic rationals.
    pub fn contains_f64(&self, x: f64) -> bool {
        (x * pow2(self.j)).floor() == self.k as f64
    }

    /// The interval of scale `j` that contains `x`.
    pub fn containing(x: DyadicPoint, j: i32) -> Result<DyadicIndex> {
        x.floor_scaled(j)
            .map(|k| DyadicIndex::new(j, k))
            .ok_or_else(|| Error::Overflow(format!("translation of {x} at scale {j}")))
    }

    /// The half of `I` that holds `x`: `Some(0)` for the left half,
    /// `Some(1)` for the right half and `None` when `x` is outside `I`.
    pub fn half_of(&self, x: DyadicPoint) -> Option<u8> {
        if !self.contains(x) {
            return None;
        }
        let child = x.floor_scaled(self.j + 1)?;
        Some((child - 2 * self.k) as u8)
    }
}

impl fmt::Display for DyadicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.j, self.k)
    }
}

/// A nonnegative dyadic rational `numerator * 2^-depth`.
///
/// Always stored in lowest terms: the numerator is odd, or the point is zero
/// with depth 0. Equality and hashing are therefore value equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    numerator: u64,
    depth: u32,
}

impl DyadicPoint {
    pub const ZERO: DyadicPoint = DyadicPoint {
        numerator: 0,
        depth: 0,
    };

    pub fn new(numerator: u64, depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::invalid(format!(
                "dyadic depth {depth} exceeds the maximum {MAX_DEPTH}"
            )));
        }
        if numerator >= 1 << 62 {
            return Err(Error::invalid("dyadic numerator must be below 2^62"));
        }
        Ok(Self::canonical(numerator, depth))
    }

    fn canonical(numerator: u64, depth: u32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let tz = numerator.trailing_zeros().min(depth);
        DyadicPoint {
            numerator: numerator >> tz,
            depth: depth - tz,
        }
    }

    /// Exact conversion of a float that is a multiple of `2^-depth`.
    pub fn from_f64(x: f64, depth: u32) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::invalid(format!(
                "{x} is not a nonnegative finite number"
            )));
        }
        let scaled = x * pow2(depth as i32);
        if scaled.fract() != 0.0 || scaled >= (1u64 << 62) as f64 {
            return Err(Error::invalid(format!("{x} is not on the 2^-{depth} grid")));
        }
        Self::new(scaled as u64, depth)
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 * pow2(-(self.depth as i32))
    }

    /// Numerator at a (deeper or equal) common depth.
    fn numerator_at(&self, depth: u32) -> u128 {
        debug_assert!(depth >= self.depth);
        (self.numerator as u128) << (depth - self.depth)
    }

    /// `floor(x 2^j)`, or `None` when it does not fit in an `i64`.
    pub fn floor_scaled(&self, j: i32) -> Option<i64> {
        if self.numerator == 0 {
            return Some(0);
        }
        let shift = j as i64 - self.depth as i64;
        let value: u128 = if shift >= 0 {
            if shift >= 64 {
                return None;
            }
            (self.numerator as u128) << shift
        } else if -shift >= 64 {
            0
        } else {
            (self.numerator as u128) >> (-shift)
        };
        i64::try_from(value).ok()
    }
}

impl PartialOrd for DyadicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.depth.max(other.depth);
        self.numerator_at(d).cmp(&other.numerator_at(d))
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depth == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.depth)
        }
    }
}

/// The smallest interval of `D+` containing both points.
///
/// Computed from the longest common binary prefix of the two numerators
/// brought to a common depth.
pub fn smallest_common(x: DyadicPoint, y: DyadicPoint) -> Result<DyadicIndex> {
    if x == y {
        return Err(Error::DegeneratePair);
    }
    let d = x.depth.max(y.depth);
    let a = x.numerator_at(d);
    let b = y.numerator_at(d);
    let shift = 128 - (a ^ b).leading_zeros();
    let k = i64::try_from(a >> shift)
        .map_err(|_| Error::Overflow(format!("common interval of {x} and {y}")))?;
    Ok(DyadicIndex::new(d as i32 - shift as i32, k))
}

/// `delta(x, y) = inf { |I| : x, y in I, I in D+ }`, with `delta(x, x) = 0`.
pub fn dyadic_distance(x: DyadicPoint, y: DyadicPoint) -> f64 {
    match smallest_common(x, y) {
        Ok(i) => i.length(),
        Err(_) => 0.0,
    }
}

/// Exact `2^e` for the exponent range used here.
pub(crate) fn pow2(e: i32) -> f64 {
    f64::powi(2.0, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(num: u64, depth: u32) -> DyadicPoint {
        DyadicPoint::new(num, depth).unwrap()
    }

    #[test]
    fn contains_endpoints() {
        let unit = DyadicIndex::new(0, 0);
        assert!(unit.contains(DyadicPoint::ZERO));
        assert!(!unit.contains(p(1, 0)));
        assert!(DyadicIndex::new(1, 1).contains(p(3, 2)));
        assert!(!DyadicIndex::new(1, 1).contains(p(1, 2)));
    }

    #[test]
    fn canonical_form() {
        assert_eq!(p(4, 3), p(1, 1));
        assert_eq!(p(0, 9), DyadicPoint::ZERO);
        assert_eq!(p(6, 0).depth(), 0);
        assert_eq!(DyadicPoint::from_f64(0.75, 4).unwrap(), p(3, 2));
        assert!(DyadicPoint::from_f64(0.1, 10).is_err());
        assert!(DyadicPoint::new(1, MAX_DEPTH + 1).is_err());
    }

    #[test]
    fn smallest_common_examples() {
        // 3/32 and 5/16 share the prefix 0.0 in binary.
        assert_eq!(
            smallest_common(p(3, 5), p(5, 4)).unwrap(),
            DyadicIndex::new(1, 0)
        );
        assert_eq!(
            smallest_common(p(7, 4), p(9, 4)).unwrap(),
            DyadicIndex::new(0, 0)
        );
        assert_eq!(
            smallest_common(p(1, 2), p(3, 2)).unwrap(),
            DyadicIndex::new(0, 0)
        );
        // Above the unit scale.
        assert_eq!(
            smallest_common(p(1, 1), p(3, 0)).unwrap(),
            DyadicIndex::new(-2, 0)
        );
        assert!(matches!(
            smallest_common(p(1, 1), p(2, 2)),
            Err(Error::DegeneratePair)
        ));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dyadic_distance(p(1, 1), p(1, 1)), 0.0);
        assert_eq!(dyadic_distance(p(3, 5), p(5, 4)), 0.5);
        assert_eq!(dyadic_distance(p(7, 4), p(9, 4)), 1.0);
    }

    #[test]
    fn ancestor_chains() {
        assert_eq!(
            DyadicIndex::new(2, 1).ancestors(2),
            vec![
                DyadicIndex::new(2, 1),
                DyadicIndex::new(1, 0),
                DyadicIndex::new(0, 0)
            ]
        );
        assert_eq!(
            DyadicIndex::new(0, 0).ancestors(1),
            vec![DyadicIndex::new(0, 0), DyadicIndex::new(-1, 0)]
        );
        assert_eq!(
            DyadicIndex::new(5, 7).ancestors(0),
            vec![DyadicIndex::new(5, 7)]
        );
        // Parent on the negative axis rounds toward -infinity.
        assert_eq!(DyadicIndex::new(3, -1).parent(), DyadicIndex::new(2, -1));
    }

    #[test]
    fn halves() {
        let unit = DyadicIndex::new(0, 0);
        assert_eq!(unit.half_of(p(1, 2)), Some(0));
        assert_eq!(unit.half_of(p(1, 1)), Some(1));
        assert_eq!(unit.half_of(p(5, 2)), None);
    }

    #[test]
    fn floor_scaled_extremes() {
        assert_eq!(p(1, 0).floor_scaled(70), None);
        assert_eq!(p(1, 40).floor_scaled(-30), Some(0));
        assert_eq!(p(3, 1).floor_scaled(-1), Some(0));
        assert_eq!(p(3, 0).floor_scaled(-1), Some(1));
    }
}
