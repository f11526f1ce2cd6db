//! Unit phases and closed-form integrals of complex exponentials over
//! intervals with rational endpoints.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::Rational;

/// `e^{2πi p/q}`, with `p` reduced modulo `q` in exact arithmetic first.
pub fn cis_frac(p: i128, q: i128) -> Complex64 {
    debug_assert!(q > 0);
    let r = p.rem_euclid(q);
    let theta = 2.0 * PI * (r as f64) / (q as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// `e^{2πi ν t}` for rational t.
pub fn cis_at(nu: i64, t: Rational) -> Complex64 {
    cis_frac(nu as i128 * *t.numer() as i128, *t.denom() as i128)
}

/// `sin(π p/q)` with `p` reduced modulo `2q`.
fn sin_pi_frac(p: i128, q: i128) -> f64 {
    let r = p.rem_euclid(2 * q);
    (PI * r as f64 / q as f64).sin()
}

/// `∫_a^b e^{2πiνt} dt` for integer ν, evaluated as
/// `e^{πiν(a+b)} sin(πν(b-a)) / (πν)`.
pub fn exp_integral(nu: i64, a: Rational, b: Rational) -> Complex64 {
    let len = b - a;
    if nu == 0 {
        return Complex64::new(*len.numer() as f64 / *len.denom() as f64, 0.0);
    }
    let mid = a + b; // phase uses ν(a+b)/2
    let phase = cis_frac(nu as i128 * *mid.numer() as i128, 2 * *mid.denom() as i128);
    let s = sin_pi_frac(nu as i128 * *len.numer() as i128, *len.denom() as i128);
    phase * (s / (PI * nu as f64))
}
