use crate::error::{invalid, Result};

/// Binary entropy in bits.
pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Inverse of [`h2`] on `[0, 1/2]`, by bisection.
pub fn h2_inv(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid!("h2_inv argument {v} outside [0,1]"));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if v == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // 60 halvings bring the bracket below 1e-18
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
