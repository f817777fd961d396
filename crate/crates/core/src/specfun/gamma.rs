//! Gamma, log-Gamma, polygamma, Pochhammer and Beta functions.

use crate::error::{Error, Result};
use crate::real::Real;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
/// Polygamma functions shift their argument above this before using the
/// asymptotic series.
const ASYMPTOTIC_START: f64 = 20.0;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn lanczos_series<T: Real>(x: T) -> T {
    let mut y = x;
    let mut ser = T::lit(LANCZOS_C0);
    for &c in LANCZOS.iter() {
        y = y + T::one();
        ser = ser + T::lit(c) / y;
    }
    ser
}

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let mut r = x - two * (x / two).round();
    let sign = if r < T::zero() { -T::one() } else { T::one() };
    r = r.abs();
    if r > T::lit(0.5) {
        r = T::one() - r;
    }
    sign * (T::PI() * r).sin()
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

/// Gamma function.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if x.is_nan() {
        return Ok(x);
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "gamma",
            at: x.to_f(),
        });
    }
    let half = T::lit(0.5);
    if x < half {
        let g = gamma(T::one() - x)?;
        return Ok(T::PI() / (sin_pi(x) * g));
    }
    if x > T::lit(171.7) {
        return Ok(T::infinity());
    }
    if x == x.floor() {
        let mut g = T::one();
        let mut k = T::lit(2.0);
        while k < x {
            g = g * k;
            k = k + T::one();
        }
        return Ok(g);
    }
    let two = T::lit(2.0);
    if x < two {
        let t = x + T::lit(LANCZOS_G);
        let p = t.powf((x + half) / two);
        return Ok(p * ((-t).exp() * p) * T::lit(SQRT_2PI) * lanczos_series(x) / x);
    }
    // Reduce to [1, 2) and climb with exact-ish products.
    let n = x.floor();
    let mut k = x - n + T::one();
    let mut g = gamma(k)?;
    while k < x - half {
        g = g * k;
        k = k + T::one();
    }
    Ok(g)
}

/// `ln|Γ(x)|`, together with the sign of `Γ(x)`.
pub fn ln_gamma_signed<T: Real>(x: T) -> Result<(T, T)> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "ln_gamma",
            at: x.to_f(),
        });
    }
    if x > T::zero() {
        return Ok((T::one(), ln_gamma_pos(x)));
    }
    // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
    let s = sin_pi(x);
    let lg = ln_gamma_pos(T::one() - x);
    let sign = if s < T::zero() { -T::one() } else { T::one() };
    Ok((sign, T::PI().ln() - s.abs().ln() - lg))
}

/// `ln Γ(x)` for `x > 0`; for negative non-integers returns `ln|Γ(x)|`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    ln_gamma_signed(x).map(|(_, l)| l)
}

fn ln_gamma_pos<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let t = x + T::lit(LANCZOS_G);
    (x + half) * t.ln() - t + (T::lit(SQRT_2PI) * lanczos_series(x) / x).ln()
}

/// Digamma function `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "digamma",
            at: x.to_f(),
        });
    }
    if x <= T::zero() {
        let tan = sin_pi(x) / (T::PI() * x).cos();
        return Ok(digamma(T::one() - x)? - T::PI() / tan);
    }
    let mut acc = T::zero();
    let mut y = x;
    let start = T::lit(ASYMPTOTIC_START);
    while y < start {
        acc = acc - y.recip();
        y = y + T::one();
    }
    let r = (y * y).recip();
    let series = r
        * (T::lit(1.0 / 12.0)
            - r * (T::lit(1.0 / 120.0)
                - r * (T::lit(1.0 / 252.0) - r * (T::lit(1.0 / 240.0) - r * T::lit(1.0 / 132.0)))));
    Ok(acc + y.ln() - T::lit(0.5) / y - series)
}

/// Trigamma `ψ'(x)` for `x > 0`.
pub fn trigamma<T: Real>(x: T) -> Result<T> {
    if x <= T::zero() {
        return Err(Error::Domain {
            function: "trigamma",
            at: x.to_f(),
            reason: "requires x > 0",
        });
    }
    let mut acc = T::zero();
    let mut y = x;
    let start = T::lit(ASYMPTOTIC_START);
    while y < start {
        acc = acc + (y * y).recip();
        y = y + T::one();
    }
    let r = y.recip();
    let r2 = r * r;
    let series = r
        + T::lit(0.5) * r2
        + r * r2
            * (T::lit(1.0 / 6.0)
                - r2 * (T::lit(1.0 / 30.0) - r2 * (T::lit(1.0 / 42.0) - r2 * T::lit(1.0 / 30.0))));
    Ok(acc + series)
}

/// Tetragamma `ψ''(x)` for `x > 0`.
pub fn tetragamma<T: Real>(x: T) -> Result<T> {
    if x <= T::zero() {
        return Err(Error::Domain {
            function: "tetragamma",
            at: x.to_f(),
            reason: "requires x > 0",
        });
    }
    let mut acc = T::zero();
    let mut y = x;
    let start = T::lit(ASYMPTOTIC_START);
    let two = T::lit(2.0);
    while y < start {
        acc = acc - two / (y * y * y);
        y = y + T::one();
    }
    let r = y.recip();
    let r2 = r * r;
    let series = -r2
        - r2 * r
        - r2 * r2
            * (T::lit(0.5)
                - r2 * (T::lit(1.0 / 6.0) - r2 * (T::lit(1.0 / 6.0) - r2 * T::lit(0.3))));
    Ok(acc + series)
}

/// Pochhammer symbol `(c)_n = Γ(c+n)/Γ(c)`.
pub fn pochhammer<T: Real>(c: T, n: usize) -> T {
    if n <= 64 {
        let mut p = T::one();
        let mut k = c;
        for _ in 0..n {
            p = p * k;
            k = k + T::one();
        }
        if p.is_finite() {
            return p;
        }
    }
    let (s, l) = ln_pochhammer(c, n);
    s * l.exp()
}

/// `(sign, ln|(c)_n|)`; sign is zero when the symbol vanishes.
pub fn ln_pochhammer<T: Real>(c: T, n: usize) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    if n <= 64 {
        let mut sign = T::one();
        let mut l = T::zero();
        let mut k = c;
        for _ in 0..n {
            if k == T::zero() {
                return (T::zero(), T::neg_infinity());
            }
            if k < T::zero() {
                sign = -sign;
            }
            l = l + k.abs().ln();
            k = k + T::one();
        }
        return (sign, l);
    }
    let end = c + T::of(n);
    if is_nonpositive_integer(c) {
        // The product passes through zero iff c + n − 1 >= 0.
        if end > T::zero() {
            return (T::zero(), T::neg_infinity());
        }
    }
    match (ln_gamma_signed(end), ln_gamma_signed(c)) {
        (Ok((s1, l1)), Ok((s2, l2))) => (s1 * s2, l1 - l2),
        // Both endpoints at poles (c, c+n non-positive integers): Γ ratio limit.
        _ => {
            let (s1, l1) = ln_gamma_signed(T::one() - c).expect("positive argument");
            let (s2, l2) = ln_gamma_signed(T::one() - end).expect("positive argument");
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            (sign * s1 * s2, l1 - l2)
        }
    }
}

/// `ln B(x, y)` for positive arguments.
pub fn ln_beta<T: Real>(x: T, y: T) -> Result<T> {
    if !(x > T::zero()) || !(y > T::zero()) {
        let at = if x > T::zero() { y } else { x };
        return Err(Error::Domain {
            function: "beta",
            at: at.to_f(),
            reason: "requires x, y > 0",
        });
    }
    Ok(ln_gamma(x)? + ln_gamma(y)? - ln_gamma(x + y)?)
}

/// Beta function `B(x, y) = Γ(x)Γ(y)/Γ(x+y)`, evaluated through log-Gamma.
pub fn beta<T: Real>(x: T, y: T) -> Result<T> {
    ln_beta(x, y).map(T::exp)
}

/// `ln Γ(x+a) − ln Γ(x+b)` for positive `x+a`, `x+b`, without the
/// cancellation of two large log-Gammas when `x` dominates.
pub fn ln_gamma_ratio<T: Real>(x: T, a: T, b: T) -> Result<T> {
    let z1 = x + a;
    let z2 = x + b;
    if !(z1 > T::zero() && z2 > T::zero()) {
        return Err(Error::Domain {
            function: "ln_gamma_ratio",
            at: z1.min(z2).to_f(),
            reason: "requires x+a, x+b > 0",
        });
    }
    if z1.min(z2) < T::lit(16.0) {
        return Ok(ln_gamma(z1)? - ln_gamma(z2)?);
    }
    // Stirling: (z−½)ln z − z + Σ B_{2k} / (2k(2k−1) z^{2k−1}), differenced
    // with ln z1 − ln z2 = ln1p((a−b)/z2)
    const S: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let d = a - b;
    let half = T::lit(0.5);
    let lead = (z1 - half) * (d / z2).ln_1p() + d * z2.ln() - d;
    let (r1, r2) = (z1.recip(), z2.recip());
    let (q1, q2) = (r1 * r1, r2 * r2);
    let (mut p1, mut p2) = (r1, r2);
    let mut series = T::zero();
    for c in S {
        series = series + T::lit(c) * (p1 - p2);
        p1 = p1 * q1;
        p2 = p2 * q2;
    }
    Ok(lead + series)
}
