//! Bessel functions `J_ν` and `K_ν` of real order and positive argument.

use super::gamma::{ln_gamma, sin_pi};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::real::{Compensated, Real};

/// Bessel function of the first kind `J_ν(x)`, `ν ≥ 0`, `x ≥ 0`.
///
/// Power series while it is free of cancellation (`x ≤ 12` or `x² ≤ 4(ν+1)`),
/// otherwise Bessel's integral
/// `J_ν(x) = (1/π)∫₀^π cos(νt − x sin t) dt − (sin νπ/π)∫₀^∞ e^{−x sinh t − νt} dt`.
pub fn bessel_j<T: Real>(nu: T, x: T) -> Result<T> {
    if nu < T::zero() {
        return Err(Error::Domain {
            function: "bessel_j",
            at: nu.to_f(),
            reason: "order must be >= 0",
        });
    }
    if x < T::zero() {
        return Err(Error::Domain {
            function: "bessel_j",
            at: x.to_f(),
            reason: "argument must be >= 0",
        });
    }
    if x == T::zero() {
        return Ok(if nu == T::zero() { T::one() } else { T::zero() });
    }
    let quarter_sq = x * x * T::lit(0.25);
    if x <= T::lit(12.0) || quarter_sq <= nu + T::one() {
        return bessel_j_series(nu, x);
    }
    Ok(bessel_j_integral(nu, x))
}

fn bessel_j_series<T: Real>(nu: T, x: T) -> Result<T> {
    let q = -x * x * T::lit(0.25);
    let mut term = T::one();
    let mut sum = Compensated::new();
    sum.add(term);
    let eps = T::epsilon() * T::lit(0.25);
    for k in 1..2000 {
        let kf = T::of(k);
        term = term * q / (kf * (nu + kf));
        sum.add(term);
        if term.abs() <= eps * sum.value().abs() && kf * kf > q.abs() {
            break;
        }
    }
    let ln_pre = nu * (x * T::lit(0.5)).ln() - ln_gamma(nu + T::one())?;
    Ok(sum.value() * ln_pre.exp())
}

fn bessel_j_integral<T: Real>(nu: T, x: T) -> T {
    let gl = GaussLegendre::<T>::new(20);
    let panels = ((x + nu).to_f() / 2.0).ceil() as usize + 8;
    let first =
        gl.composite(T::zero(), T::PI(), panels, |t| (nu * t - x * t.sin()).cos()) / T::PI();
    let s = sin_pi(nu);
    if s == T::zero() {
        return first;
    }
    // x sinh t + νt reaches 40 before t = asinh(40/x)
    let upper = (T::lit(40.0) / x).asinh();
    let second = gl.composite(T::zero(), upper, 16, |t| (-x * t.sinh() - nu * t).exp());
    first - s * second / T::PI()
}

/// Modified Bessel function of the second kind `K_ν(x)`, `x > 0`.
///
/// Half-integer orders use the terminating closed form; all other orders use
/// `K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt` with composite Gauss–Legendre
/// panels sized to the peak of the integrand.
pub fn bessel_k<T: Real>(nu: T, x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain {
            function: "bessel_k",
            at: x.to_f(),
            reason: "argument must be > 0",
        });
    }
    let nu = nu.abs();
    let twice = nu + nu;
    if twice == twice.floor() && twice.to_f() % 2.0 == 1.0 && nu < T::lit(40.0) {
        return Ok(bessel_k_half_integer(nu, x));
    }
    Ok(bessel_k_integral(nu, x))
}

/// `K_{n+1/2}(x) = √(π/(2x)) e^{−x} Σ_{k≤n} (n+k)! / (k!(n−k)!(2x)^k)`.
fn bessel_k_half_integer<T: Real>(nu: T, x: T) -> T {
    let n = (nu - T::lit(0.5)).round().to_usize().unwrap_or(0);
    let mut term = T::one();
    let mut sum = T::one();
    let two_x = x + x;
    for k in 0..n {
        // ratio a_{k+1}/a_k = (n+k+1)(n−k) / ((k+1) 2x)
        term = term * T::of((n + k + 1) * (n - k)) / (T::of(k + 1) * two_x);
        sum = sum + term;
    }
    (T::PI() / two_x).sqrt() * (-x).exp() * sum
}

fn bessel_k_integral<T: Real>(nu: T, x: T) -> T {
    let ln_cosh = |y: T| -> T {
        let a = y.abs();
        a + (-(a + a)).exp().ln_1p() - T::LN_2()
    };
    let log_f = |t: T| -x * t.cosh() + ln_cosh(nu * t);
    let t_peak = (nu / x).asinh();
    let l0 = log_f(t_peak);
    let width = (x * x + nu * nu).sqrt().powf(T::lit(-0.5)).min(T::one());
    let mut delta = width;
    while log_f(t_peak + delta) - l0 > T::lit(-46.0) {
        delta = delta + delta;
    }
    let upper = t_peak + delta;
    let gl = GaussLegendre::<T>::new(20);
    let mut panels = ((upper / width).to_f().ceil() as usize).clamp(4, 4096);
    let mut prev = gl.composite(T::zero(), upper, panels, |t| (log_f(t) - l0).exp());
    for _ in 0..4 {
        panels *= 2;
        let next = gl.composite(T::zero(), upper, panels, |t| (log_f(t) - l0).exp());
        let done = (next - prev).abs() <= T::lit(1e-14) * next.abs();
        prev = next;
        if done {
            break;
        }
    }
    prev * l0.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K_ν(x) = ½(x/2)^ν ∫_ℝ exp(−e^s − (x²/4)e^{−s} − νs) ds` by the
    /// trapezoid rule, which converges geometrically for this integrand.
    fn k_oracle(nu: f64, x: f64) -> f64 {
        let q = x * x / 4.0;
        let g = |s: f64| -s.exp() - q * (-s).exp() - nu * s;
        // maximum of g: bisection on the decreasing g'(s) = −e^s + q e^{−s} − ν
        let (mut lo, mut hi) = (-100.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if -mid.exp() + q * (-mid).exp() - nu > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        let gmax = g(s);
        let h = 0.01;
        let mut acc = 0.0;
        for dir in [-1.0, 1.0] {
            let mut k = if dir < 0.0 { 1 } else { 0 };
            loop {
                let v = (g(s + dir * h * k as f64) - gmax).exp();
                acc += v;
                if v < 1e-20 && k > 10 {
                    break;
                }
                k += 1;
            }
        }
        0.5 * (x / 2.0).powf(nu) * acc * h * gmax.exp()
    }

    #[test]
    fn k_half_closed_form() {
        let v = bessel_k(0.5, 2.0).unwrap();
        let exact = (std::f64::consts::PI / 4.0).sqrt() * (-2.0f64).exp();
        assert!(((v - exact) / exact).abs() < 1e-15);
        assert!(((bessel_k_integral(0.5, 2.0) - exact) / exact).abs() < 1e-12);
        let big = bessel_k(0.5, 300.0f64).unwrap();
        let lead = (std::f64::consts::PI / 600.0).sqrt() * (-300.0f64).exp();
        assert!((big / lead - 1.0).abs() < 1e-14);
    }

    #[test]
    fn k_three_halves_matches_integral() {
        let v: f64 = bessel_k(1.5, 1.0).unwrap();
        let oracle = bessel_k_integral(1.5, 1.0);
        assert!(((v - oracle) / oracle).abs() < 1e-12);
        assert!(((v - k_oracle(1.5, 1.0)) / v).abs() < 1e-12);
    }

    #[test]
    fn k_grid_agrees_with_trapezoid_oracle() {
        let mut worst = 0.0f64;
        for i in 0..20 {
            let nu = 0.05 + 9.9 * i as f64 / 19.0;
            for j in 0..20 {
                let x = 10f64.powf(-6.0 + 8.0 * j as f64 / 19.0);
                let v = bessel_k(nu, x).unwrap();
                let o = k_oracle(nu, x);
                worst = worst.max(((v - o) / o).abs());
            }
        }
        assert!(worst < 1e-10, "worst relative deviation {worst:e}");
    }

    #[test]
    fn k_recurrence_and_symmetry() {
        for &(nu, x) in &[(0.3f64, 0.7f64), (2.2, 5.0), (7.9, 30.0)] {
            let lhs = bessel_k(nu + 1.0, x).unwrap();
            let rhs = bessel_k(nu - 1.0, x).unwrap() + 2.0 * nu / x * bessel_k(nu, x).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-11);
        }
        assert_eq!(bessel_k(-1.3, 2.0).unwrap(), bessel_k(1.3, 2.0).unwrap());
        assert!(bessel_k(1.0, 0.0f64).is_err());
    }

    #[test]
    fn j_trivial_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3.0, 0.0).unwrap(), 0.0);
        let v = bessel_j(0.5, std::f64::consts::PI).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn j_half_integer_closed_forms() {
        for &x in &[0.3, 5.0, 11.9, 12.1, 40.0, 250.0, 500.0] {
            let s = (2.0 / (std::f64::consts::PI * x)).sqrt();
            let j05 = s * x.sin();
            let j15 = s * (x.sin() / x - x.cos());
            assert!((bessel_j(0.5, x).unwrap() - j05).abs() < 1e-12, "x = {x}");
            assert!((bessel_j(1.5, x).unwrap() - j15).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn j_neumann_sum_rule() {
        // J_0(x) + 2 Σ_k J_{2k}(x) = 1
        for &x in &[3.0, 15.0, 60.0, 200.0] {
            let mut s = bessel_j(0.0, x).unwrap();
            let kmax = (x as usize) + 40;
            for k in 1..=kmax {
                s += 2.0 * bessel_j(2.0 * k as f64, x).unwrap();
            }
            assert!((s - 1.0).abs() < 1e-10, "x = {x}: {s}");
        }
    }

    #[test]
    fn j_recurrence_large_order() {
        for &(nu, x) in &[
            (59.0f64, 80.0f64),
            (30.5, 20.0),
            (10.2, 450.0),
            (45.0, 13.0),
        ] {
            let lhs = bessel_j(nu - 1.0, x).unwrap() + bessel_j(nu + 1.0, x).unwrap();
            let rhs = 2.0 * nu / x * bessel_j(nu, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-11, "nu = {nu}, x = {x}");
        }
    }
}
