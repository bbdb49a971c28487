//! Scaled lower incomplete gamma function `g(b, S) = gamma(b, S) / S^b`.
//!
//! The Stokes tensor's nonlocal part reduces to `tau^{-b} g(b, S)` with
//! `S = |z|^2 / 4 tau`, so the kernel needs a whole ladder
//! `g(b0, S), g(b0 + 1, S), ...`. The top rung is computed directly and the
//! rest by the downward recurrence `g(b, S) = (S g(b+1, S) + e^{-S}) / b`,
//! which only adds positive terms and is therefore stable for every `S`.

use super::KernelError;

const MAX_TERMS: usize = 2000;
const REL_EPS: f64 = 1e-17;

/// `Gamma(b)` for positive integers and half-integers.
pub fn gamma_half_integer(b: f64) -> f64 {
    let twice = (2.0 * b).round();
    debug_assert!((twice - 2.0 * b).abs() < 1e-12 && twice >= 1.0);
    let (mut value, mut x) = if twice as i64 % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while x < b - 0.25 {
        value *= x;
        x += 1.0;
    }
    value
}

/// Direct evaluation of `g(b, S)` for `b > 0`, `S >= 0`.
pub fn scaled_lower_gamma(b: f64, s: f64) -> Result<f64, KernelError> {
    if s == 0.0 {
        return Ok(1.0 / b);
    }
    if s < b + 40.0 {
        // e^{-S} sum_k S^k / (b (b+1) ... (b+k))
        let mut term = 1.0 / b;
        let mut sum = term;
        for k in 1..MAX_TERMS {
            term *= s / (b + k as f64);
            sum += term;
            if term < REL_EPS * sum {
                return Ok((-s).exp() * sum);
            }
        }
        Err(KernelError::NotConverged { b, s })
    } else {
        let upper = upper_gamma_cf(b, s)?;
        Ok((gamma_half_integer(b) - upper) / s.powf(b))
    }
}

/// `Gamma(b, S)` by the modified Lentz continued fraction, valid for `S > b + 1`.
fn upper_gamma_cf(b: f64, s: f64) -> Result<f64, KernelError> {
    let tiny = 1e-300;
    let mut bb = s + 1.0 - b;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / bb;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - b);
        bb += 2.0;
        d = an * d + bb;
        if d.abs() < tiny {
            d = tiny;
        }
        c = bb + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok((-s + b * s.ln()).exp() * h);
        }
    }
    Err(KernelError::NotConverged { b, s })
}

/// `g(b, S)` for `b` in `{1/2, 1}` in closed form.
fn scaled_lower_gamma_base(b: f64, s: f64) -> f64 {
    if b == 1.0 {
        -(-s).exp_m1() / s
    } else {
        let r = s.sqrt();
        std::f64::consts::PI.sqrt() * libm::erf(r) / r
    }
}

/// Fill `out[i] = g(b0 + i, S)` for `i = 0..out.len()`.
///
/// For moderate `S` the ladder is built upwards from a closed form with
/// `g(b + 1, S) = (b g(b, S) - e^{-S}) / S`; each step multiplies rounding
/// errors by at most `b / S`, which stays small for `S >= 2` and the short
/// ladders used here. Otherwise the top rung is summed directly and the
/// stable downward recurrence fills the rest.
pub fn scaled_lower_gamma_ladder(b0: f64, s: f64, out: &mut [f64]) -> Result<(), KernelError> {
    let top = out.len() - 1;
    let base = if (b0 - b0.round()).abs() < 1e-12 { 1.0 } else { 0.5 };
    let start_steps = (b0 - base).round() as usize;
    let b_top = b0 + top as f64;
    if s >= 2.0 && s < b_top + 40.0 && b_top <= 8.0 && b0 >= base {
        let es = (-s).exp();
        let mut g = scaled_lower_gamma_base(base, s);
        let mut b = base;
        for i in 0..start_steps + out.len() {
            if i >= start_steps {
                out[i - start_steps] = g;
            }
            g = (b * g - es) / s;
            b += 1.0;
        }
        return Ok(());
    }
    out[top] = scaled_lower_gamma(b0 + top as f64, s)?;
    let es = (-s).exp();
    for i in (0..top).rev() {
        out[i] = (s * out[i + 1] + es) / (b0 + i as f64);
    }
    Ok(())
}
