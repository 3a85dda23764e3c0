//! Binomials and rising factorials with real arguments.
//!
//! Products are formed term by term; the integer arguments stay small.

/// `a (a-1) ... (a-m+1) / m!`, equal to 1 for `m = 0`.
pub fn generalized_binomial(a: f64, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (a - i as f64) / (i as f64 + 1.0))
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`, equal to 1 for `n = 0`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// `Gamma(a+b+1) / (Gamma(a+1) Gamma(b+1))`, the binomial with real lower
/// argument. Requires `a, b > -1`.
pub fn real_binomial(a: f64, b: f64) -> f64 {
    (libm::lgamma(a + b + 1.0) - libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0)).exp()
}

/// Beta function `B(p, q)` for `p, q > 0`.
pub fn beta_fn(p: f64, q: f64) -> f64 {
    (libm::lgamma(p) + libm::lgamma(q) - libm::lgamma(p + q)).exp()
}
