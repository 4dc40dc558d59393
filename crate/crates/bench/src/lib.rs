//! Fixtures shared by the benchmarks.

use wavesum::operator::GridFunction;

/// A pair at distance `2^-6` away from dyadic boundaries.
pub const PAIR: (f64, f64) = (0.3, 0.3 + 1.0 / 64.0);

/// A smooth test function on `[0, 1)` at grid depth `depth`.
pub fn test_function(depth: u32) -> GridFunction {
    GridFunction::from_fn(0, depth, |x| (6.0 * x).sin() + 0.25 * (40.0 * x).cos())
        .expect("valid grid")
}
