// Float helpers that core does not provide without libm. Inputs are
// non-negative and small, so truncating casts act as floor.

/// Round half to even for `x >= 0`.
pub(crate) fn round_half_even(x: f64) -> usize {
    let floor = x as usize;
    let frac = x - floor as f64;
    if frac > 0.5 || (frac == 0.5 && floor % 2 == 1) {
        floor + 1
    } else {
        floor
    }
}

/// Ceiling for `x >= 0`, ignoring representation error below 1e-9.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    let floor = x as usize;
    if x - floor as f64 > 1e-9 {
        floor + 1
    } else {
        floor
    }
}
