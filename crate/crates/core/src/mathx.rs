//! Float transcendentals routed through libm so the crate works without std
//! and produces the same bits on every host.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub fn hypot_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    sqrt(hypot_sq(v))
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// SplitMix64 step, the seed mixer for deterministic perturbations and
/// per-stratum substreams.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Exact integer binomial coefficient; arguments stay far below overflow
/// for the coordinate dimensions this crate supports.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut b: u128 = 1;
    for i in 1..=k as u128 {
        b = b * (n as u128 - k as u128 + i) / i;
    }
    b
}

/// Natural log of the integer binomial coefficient, exact argument first.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    ln(binomial(n, k) as f64)
}

/// Generalized binomial C(gamma + n, n) for real gamma > 0 via lgamma.
pub fn binomial_real(gamma: f64, n: u32) -> f64 {
    let nf = n as f64;
    exp(ln_gamma(gamma + nf + 1.0) - ln_gamma(gamma + 1.0) - ln_gamma(nf + 1.0))
}
