//! Float helpers over `libm`; the crate is `no_std`, so every
//! transcendental goes through here.

pub(crate) use libm::{exp, fabs as abs, log as ln, log1p as ln_1p, pow as powf};

/// ln(e^x + e^y) without overflow; tolerates -inf arguments.
pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + ln_1p(exp(lo - hi))
}
