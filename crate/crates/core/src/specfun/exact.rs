//! Exact rational summation of hypergeometric series.
//!
//! Terminating series whose terms alternate and grow far beyond the size of
//! the result cannot be summed in floating point. Here the partial sum is
//! accumulated as a single fraction by fraction-free nested Horner
//! evaluation, `V_j = 1 + (P_j/Q_j) V_{j+1}`, so no gcd is ever taken.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fraction `numer / denom` without normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSum {
    pub numer: BigInt,
    pub denom: BigInt,
}

impl ExactSum {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numer.clone(), self.denom.clone())
    }

    /// Nearest `f64` (correct to within one rounding of a 64-bit quotient).
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.numer, &self.denom)
    }
}

/// `n / d` rounded to `f64` without forming either operand as a float.
pub fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let negative = (n.sign() == Sign::Minus) != (d.sign() == Sign::Minus);
    let n = n.abs();
    let d = d.abs();
    let shift = 64i64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << shift as usize) / d
    } else {
        n / (d << (-shift) as usize)
    };
    let mut v = q.to_f64().unwrap_or(f64::INFINITY);
    // Scale by 2^{-shift} in steps that stay inside the exponent range.
    let mut s = -shift;
    while s != 0 {
        let step = s.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        s -= step;
    }
    if negative {
        -v
    } else {
        v
    }
}

/// The simplest fraction that rounds to `x` (denominator ≤ 10⁶), falling back
/// to the exact binary value of `x`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Domain {
            function: "rational_from_f64",
            at: x,
            reason: "non-finite value",
        });
    }
    // Continued-fraction convergents.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x.abs();
    for _ in 0..40 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 1_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64) / (k1 as f64) == x.abs() {
            let num = if x < 0.0 { -h1 } else { h1 };
            return Ok(BigRational::new(BigInt::from(num), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    BigRational::from_float(x).ok_or(Error::Domain {
        function: "rational_from_f64",
        at: x,
        reason: "not representable",
    })
}

/// A hypergeometric series with exact rational parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSeries {
    numerator: Vec<BigRational>,
    denominator: Vec<BigRational>,
    argument: BigRational,
}

impl ExactSeries {
    pub fn new(
        numerator: Vec<BigRational>,
        denominator: Vec<BigRational>,
        argument: BigRational,
    ) -> Self {
        Self {
            numerator,
            denominator,
            argument,
        }
    }

    /// Parameters rationalized with [`rational_from_f64`].
    pub fn from_f64(numerator: &[f64], denominator: &[f64], argument: f64) -> Result<Self> {
        let conv = |v: &[f64]| {
            v.iter()
                .map(|x| rational_from_f64(*x))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self::new(
            conv(numerator)?,
            conv(denominator)?,
            rational_from_f64(argument)?,
        ))
    }

    /// Index of the last non-zero term of a terminating series.
    pub fn terminates_after(&self) -> Option<usize> {
        self.numerator
            .iter()
            .filter(|a| !a.is_positive() && a.is_integer())
            .filter_map(|a| (-a.to_integer()).to_usize())
            .min()
    }

    /// Exact `Σ_{j=0}^{last} t_j`.
    pub fn partial_sum(&self, last: usize) -> Result<ExactSum> {
        let (kn, kd) = self.scales();
        let mut numer = BigInt::one();
        let mut denom = BigInt::one();
        for j in (0..last).rev() {
            let (p, q) = self.ratio_factors(j, &kn, &kd)?;
            // V_j = (Q_j D + P_j N) / (Q_j D)
            let qd = &q * &denom;
            numer = &qd + p * numer;
            denom = qd;
        }
        Ok(ExactSum { numer, denom })
    }

    /// Integer factors with `t_{j+1}/t_j = P_j/Q_j`.
    fn ratio_factors(&self, j: usize, kn: &BigInt, kd: &BigInt) -> Result<(BigInt, BigInt)> {
        let jb = BigInt::from(j);
        let mut p = kn.clone();
        for a in &self.numerator {
            p *= a.numer() + &jb * a.denom();
        }
        let mut q = kd.clone() * BigInt::from(j + 1);
        for b in &self.denominator {
            let f = b.numer() + &jb * b.denom();
            if f.is_zero() {
                return Err(Error::Pole {
                    function: "exact pfq",
                    at: -(j as f64),
                });
            }
            q *= f;
        }
        Ok((p, q))
    }

    fn scales(&self) -> (BigInt, BigInt) {
        let kn = self
            .denominator
            .iter()
            .fold(self.argument.numer().clone(), |acc, b| acc * b.denom());
        let kd = self
            .numerator
            .iter()
            .fold(self.argument.denom().clone(), |acc, a| acc * a.denom());
        (kn, kd)
    }

    /// `Σ_{j=0}^{last} t_j` in fixed point with `bits` fractional bits.
    ///
    /// Each truncating division is off by less than one unit and that error
    /// is carried forward multiplied by `|t_j|`, so the result is within
    /// `2^{−bits} Σ_{j≤last} |t_j|` of the exact partial sum.
    pub fn fixed_partial_sum(&self, last: usize, bits: usize) -> Result<BigInt> {
        let (kn, kd) = self.scales();
        let one = BigInt::one() << bits;
        let mut v = one.clone();
        for j in (0..last).rev() {
            let (p, q) = self.ratio_factors(j, &kn, &kd)?;
            v = &one + (p * v) / q;
        }
        Ok(v)
    }

    /// Sum of a terminating series, or a partial sum of a convergent series
    /// long enough that the geometric tail majorant is below `tail_tol`
    /// relative to the result. Returns `(value, rel_error, terms)`, where the
    /// error covers both the truncated tail and fixed-point rounding.
    ///
    /// The working precision is chosen from `Σ|t_j|` and a guess for the
    /// size of the result; a result smaller than the guess triggers a retry
    /// with more bits.
    pub fn sum_f64(&self, tail_tol: f64, max_terms: usize) -> Result<(f64, f64, usize)> {
        let stop = self.terminates_after();
        let p = self.numerator.len();
        let q = self.denominator.len();
        let z = self.argument.to_f64().unwrap_or(f64::NAN);
        if stop.is_none() && (p > q + 1 || (p == q + 1 && z.abs() >= 1.0)) {
            return Err(Error::Divergent {
                function: "exact pfq",
                reason: format!("p = {p}, q = {q}, |z| = {}", z.abs()),
            });
        }
        let a: Vec<f64> = self
            .numerator
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect();
        let mut b: Vec<f64> = self
            .denominator
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect();
        b.push(1.0);
        let ln_ratio = |j: usize| -> f64 {
            let jf = j as f64;
            let mut l = z.abs().ln();
            for x in &a {
                l += (x + jf).abs().ln();
            }
            for x in &b {
                l -= (x + jf).abs().ln();
            }
            l
        };
        let majorant = |j: usize| -> Option<f64> {
            let jf = j as f64;
            if a.iter().chain(&b).any(|c| c + jf <= 0.0) {
                return None;
            }
            let mut rho = z.abs();
            for (i, d) in b.iter().enumerate() {
                match a.get(i) {
                    Some(x) => rho *= ((x + jf) / (d + jf)).max(1.0),
                    None => rho /= d + jf,
                }
            }
            (rho < 1.0).then_some(rho)
        };
        let mut ln_t = vec![0.0f64];
        let extend = |ln_t: &mut Vec<f64>, upto: usize| {
            while ln_t.len() <= upto {
                let j = ln_t.len() - 1;
                let next = ln_t[j] + ln_ratio(j);
                ln_t.push(next);
            }
        };
        let ln2 = std::f64::consts::LN_2;
        // assumed lower bound for ln|result|
        let mut assume = -64.0 * ln2;
        for _attempt in 0..12 {
            let target = assume + tail_tol.ln() - 4f64.ln();
            let (last, ln_tail) = match stop {
                Some(n) => (n, f64::NEG_INFINITY),
                None => {
                    let mut last = 0usize;
                    loop {
                        extend(&mut ln_t, last + 1);
                        if let Some(rho) = majorant(last + 1) {
                            let lb = ln_t[last + 1] - (1.0 - rho).ln();
                            if lb < target {
                                break (last, lb);
                            }
                        }
                        if last >= max_terms {
                            return Err(Error::NonConvergence {
                                function: "exact pfq",
                                terms: last,
                                tail: f64::INFINITY,
                                tol: tail_tol,
                            });
                        }
                        last += 1;
                    }
                }
            };
            extend(&mut ln_t, last);
            let peak = ln_t[..=last]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let ln_abs_sum = peak
                + ln_t[..=last]
                    .iter()
                    .map(|l| (l - peak).exp())
                    .sum::<f64>()
                    .ln();
            let bits = ((ln_abs_sum - target) / ln2).ceil().max(0.0) as usize + 8;
            let v = self.fixed_partial_sum(last, bits)?;
            let value = ratio_to_f64(&v, &(BigInt::one() << bits));
            let ln_round = ln_abs_sum - bits as f64 * ln2;
            if value != 0.0 && value.abs().ln() >= assume {
                let rel = (ln_tail.exp() + ln_round.exp()) / value.abs();
                return Ok((value, rel, last + 1));
            }
            if let (Some(n), true) = (stop, value == 0.0 || assume < ln_abs_sum - 4096.0 * ln2) {
                // Pathological cancellation: settle it exactly.
                return Ok((self.partial_sum(n)?.to_f64(), 0.0, n + 1));
            }
            assume = if value == 0.0 {
                assume - 256.0 * ln2
            } else {
                value.abs().ln() - 32.0 * ln2
            };
        }
        Err(Error::NonConvergence {
            function: "exact pfq",
            terms: 0,
            tail: f64::INFINITY,
            tol: tail_tol,
        })
    }
}
