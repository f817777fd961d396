//! Normalized Gegenbauer polynomials `R_m^λ(x) = C_m^λ(x) / C_m^λ(1)`.
//!
//! The three-term recurrence is applied to the ratio itself:
//! `R_{m+1} = (2(m+λ) x R_m − m R_{m−1}) / (m + 2λ)`, which stays in
//! `[-1, 1]` and reduces to the Chebyshev recurrence at `λ = 0`.

use crate::real::Real;

/// `C_m^λ(x) / C_m^λ(1)`; `λ = 0` gives `cos(m θ)` with `x = cos θ`.
pub fn gegenbauer_ratio<T: Real>(m: usize, lambda: T, x: T) -> T {
    if x == T::one() {
        return T::one();
    }
    if x == -T::one() {
        return if m % 2 == 0 { T::one() } else { -T::one() };
    }
    let mut prev = T::one();
    if m == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..m {
        let next = step(k, lambda, x, cur, prev);
        prev = cur;
        cur = next;
    }
    clamp_unit(cur)
}

/// All ratios for degrees `0..=m_max` at one point.
pub fn gegenbauer_ratios<T: Real>(m_max: usize, lambda: T, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(m_max + 1);
    gegenbauer_ratios_into(m_max, lambda, x, &mut out);
    out
}

/// Fills `out` with the ratios for degrees `0..=m_max`.
pub fn gegenbauer_ratios_into<T: Real>(m_max: usize, lambda: T, x: T, out: &mut Vec<T>) {
    out.clear();
    out.push(T::one());
    if m_max == 0 {
        return;
    }
    if x == T::one() {
        out.resize(m_max + 1, T::one());
        return;
    }
    if x == -T::one() {
        out.extend((1..=m_max).map(|k| if k % 2 == 0 { T::one() } else { -T::one() }));
        return;
    }
    let mut prev = T::one();
    let mut cur = x;
    out.push(cur);
    for k in 1..m_max {
        let next = step(k, lambda, x, cur, prev);
        prev = cur;
        cur = next;
        out.push(clamp_unit(cur));
    }
}

#[inline]
fn step<T: Real>(k: usize, lambda: T, x: T, cur: T, prev: T) -> T {
    let kf = T::of(k);
    let two = T::lit(2.0);
    (two * (kf + lambda) * x * cur - kf * prev) / (kf + two * lambda)
}

#[inline]
fn clamp_unit<T: Real>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}
