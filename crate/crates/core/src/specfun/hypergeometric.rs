//! Generalized hypergeometric series `pFq(a; b; z)`.
//!
//! Partial sums are carried with a shared logarithmic scale so that
//! factorially large intermediate terms never overflow. Away from unit
//! argument the truncation error is bounded by a geometric majorant of the
//! term ratios. At `z = 1` with `p = q + 1` the terms decay only like
//! `j^{-(1+s)}` (`s` the parameter excess); there the series is summed
//! directly until the term ratio is close to one, and the remainder is
//! obtained by Euler–Maclaurin summation of the analytic continuation of
//! the terms.

use serde::{Deserialize, Serialize};

use super::gamma::{digamma, gamma, ln_gamma, ln_gamma_signed, tetragamma, trigamma};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::real::{Compensated, Real, Scaled};

/// Parameters of `pFq(numerator; denominator; argument)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfqParams<T> {
    pub numerator: Vec<T>,
    pub denominator: Vec<T>,
    pub argument: T,
}

impl<T: Real> PfqParams<T> {
    pub fn new(numerator: impl Into<Vec<T>>, denominator: impl Into<Vec<T>>, argument: T) -> Self {
        Self {
            numerator: numerator.into(),
            denominator: denominator.into(),
            argument,
        }
    }

    /// `Σ b − Σ a`.
    pub fn excess(&self) -> T {
        self.denominator.iter().copied().sum::<T>() - self.numerator.iter().copied().sum::<T>()
    }

    /// Number of the last non-zero term if a numerator parameter is a
    /// non-positive integer.
    pub fn terminates_after(&self) -> Option<usize> {
        self.numerator
            .iter()
            .filter(|a| **a <= T::zero() && a.floor() == **a)
            .map(|a| (-*a).to_usize().unwrap_or(usize::MAX))
            .min()
    }

    fn check(&self) -> Result<Regime> {
        let stop = self.terminates_after();
        for b in &self.denominator {
            if *b <= T::zero() && b.floor() == *b {
                let k = (-*b).to_usize().unwrap_or(usize::MAX);
                match stop {
                    Some(n) if n < k => {}
                    _ => {
                        return Err(Error::Pole {
                            function: "pfq",
                            at: b.to_f(),
                        })
                    }
                }
            }
        }
        if let Some(n) = stop {
            return Ok(Regime::Terminating(n));
        }
        let z = self.argument;
        if z == T::zero() {
            return Ok(Regime::Terminating(0));
        }
        let p = self.numerator.len();
        let q = self.denominator.len();
        if p <= q {
            return Ok(Regime::Geometric);
        }
        if p > q + 1 {
            return Err(Error::Divergent {
                function: "pfq",
                reason: format!("p = {p} > q + 1 = {}", q + 1),
            });
        }
        let az = z.abs();
        if az < T::one() {
            Ok(Regime::Geometric)
        } else if az > T::one() {
            Err(Error::Divergent {
                function: "pfq",
                reason: format!("|z| = {} > 1 with p = q + 1", az.to_f()),
            })
        } else if z > T::zero() {
            let s = self.excess();
            if s > T::zero() {
                Ok(Regime::UnitArgument)
            } else {
                Err(Error::Divergent {
                    function: "pfq",
                    reason: format!("excess {} <= 0 at z = 1", s.to_f()),
                })
            }
        } else if self.excess() > -T::one() {
            Ok(Regime::Alternating)
        } else {
            Err(Error::Divergent {
                function: "pfq",
                reason: "excess <= -1 at z = -1".into(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Terminating(usize),
    Geometric,
    Alternating,
    UnitArgument,
}

/// Summation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfqOptions {
    /// Target for the tail bound relative to the magnitude of the sum.
    pub tail_tol: f64,
    pub max_terms: usize,
}

impl Default for PfqOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-15,
            max_terms: 200_000,
        }
    }
}

/// A summed series with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfqSum<T> {
    pub sum: Scaled<T>,
    /// Bound on the truncation error, relative to `|sum|`.
    pub rel_tail: T,
    /// `ln max_j |t_j|`, for judging cancellation.
    pub ln_max_term: T,
    pub terms: usize,
}

impl<T: Real> PfqSum<T> {
    pub fn value(&self) -> T {
        self.sum.value()
    }

    pub fn ln_abs(&self) -> T {
        self.sum.ln_abs()
    }

    pub fn sign(&self) -> T {
        self.sum.mantissa.signum()
    }

    /// `max |t_j| / |sum|`: the amplification of rounding errors.
    pub fn condition(&self) -> T {
        (self.ln_max_term - self.ln_abs()).exp().max(T::one())
    }

    /// Truncation bound plus rounding estimate, relative to `|sum|`.
    pub fn rel_error(&self) -> T {
        self.rel_tail
            + self.condition() * T::epsilon() * T::of(self.terms.max(1)).sqrt() * T::lit(4.0)
    }
}

/// Value with an absolute error bound (truncation plus rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfqValue<T> {
    pub value: T,
    pub tail_bound: T,
    pub terms: usize,
}

/// `pFq` evaluated to a relative tail tolerance.
pub fn pfq<T: Real>(params: &PfqParams<T>, tail_tol: T) -> Result<PfqValue<T>> {
    let s = pfq_scaled(
        params,
        PfqOptions {
            tail_tol: tail_tol.to_f(),
            ..Default::default()
        },
    )?;
    let value = s.value();
    Ok(PfqValue {
        value,
        tail_bound: s.rel_error() * value.abs(),
        terms: s.terms,
    })
}

/// `pFq` with the sum kept in scaled form.
pub fn pfq_scaled<T: Real>(params: &PfqParams<T>, opts: PfqOptions) -> Result<PfqSum<T>> {
    let regime = params.check()?;
    let mut series = Series::new(params);
    let tol = T::lit(opts.tail_tol);
    match regime {
        Regime::Terminating(n) => {
            for _ in 0..n {
                series.advance();
            }
            Ok(series.finish(T::zero()))
        }
        Regime::Geometric | Regime::Alternating => loop {
            let j = series.j;
            if j >= opts.max_terms {
                let tail = series.geometric_tail().unwrap_or(T::infinity());
                return Err(Error::NonConvergence {
                    function: "pfq",
                    terms: j,
                    tail: tail.to_f(),
                    tol: opts.tail_tol,
                });
            }
            series.advance();
            let tail = if regime == Regime::Alternating {
                series.alternating_tail()
            } else {
                series.geometric_tail()
            };
            if let Some(t) = tail {
                if t <= tol {
                    return Ok(series.finish(t));
                }
            }
        },
        Regime::UnitArgument => unit_argument(params, series, opts),
    }
}

/// Term-by-term state of a series.
struct Series<'a, T> {
    p: &'a PfqParams<T>,
    /// Index of the most recently added term.
    j: usize,
    /// Current term `t_j` relative to `exp(scale)`.
    term: T,
    acc: Compensated<T>,
    scale: T,
    ln_max: T,
}

impl<'a, T: Real> Series<'a, T> {
    fn new(p: &'a PfqParams<T>) -> Self {
        let mut acc = Compensated::new();
        acc.add(T::one());
        Self {
            p,
            j: 0,
            term: T::one(),
            acc,
            scale: T::zero(),
            ln_max: T::zero(),
        }
    }

    fn ratio(&self, j: usize) -> T {
        let jf = T::of(j);
        let mut r = self.p.argument / (jf + T::one());
        for a in &self.p.numerator {
            r = r * (*a + jf);
        }
        for b in &self.p.denominator {
            r = r / (*b + jf);
        }
        r
    }

    fn advance(&mut self) {
        let r = self.ratio(self.j);
        self.term = self.term * r;
        self.j += 1;
        self.acc.add(self.term);
        let big = T::lit(1e200);
        let mag = self.term.abs().max(self.acc.value().abs());
        if mag > big {
            let k = mag.ln();
            let f = (-k).exp();
            let v = self.acc.value();
            self.acc = Compensated::new();
            self.acc.add(v * f);
            self.term = self.term * f;
            self.scale = self.scale + k;
        }
        let lt = self.term.abs().ln() + self.scale;
        if lt > self.ln_max {
            self.ln_max = lt;
        }
    }

    fn ln_term(&self) -> T {
        self.term.abs().ln() + self.scale
    }

    fn sum_abs(&self) -> T {
        self.acc.value().abs()
    }

    /// Bound on `Σ_{i>j} |t_i|` relative to the current sum, if the
    /// geometric majorant applies from here on.
    fn geometric_tail(&self) -> Option<T> {
        let j = self.j + 1;
        let jf = T::of(j);
        if self
            .p
            .numerator
            .iter()
            .chain(&self.p.denominator)
            .any(|c| *c + jf <= T::zero())
        {
            return None;
        }
        let mut dens: Vec<T> = self.p.denominator.clone();
        dens.push(T::one());
        let mut rho = self.p.argument.abs();
        for (i, d) in dens.iter().enumerate() {
            match self.p.numerator.get(i) {
                Some(a) => rho = rho * ((*a + jf) / (*d + jf)).max(T::one()),
                None => rho = rho / (*d + jf),
            }
        }
        if self.p.numerator.len() > dens.len() || rho >= T::one() {
            return None;
        }
        let next = (self.term * self.ratio(self.j)).abs();
        Some(next / (T::one() - rho) / self.sum_abs())
    }

    /// Leibniz bound for an alternating series with decreasing terms.
    fn alternating_tail(&self) -> Option<T> {
        let r = self.ratio(self.j);
        let jf = T::of(self.j + 1);
        if self
            .p
            .numerator
            .iter()
            .chain(&self.p.denominator)
            .any(|c| *c + jf <= T::zero())
        {
            return None;
        }
        if r < T::zero() && r.abs() < T::one() {
            Some((self.term * r).abs() / self.sum_abs())
        } else {
            None
        }
    }

    fn finish(&self, rel_tail: T) -> PfqSum<T> {
        let v = self.acc.value();
        let sum = if v == T::zero() {
            Scaled::zero()
        } else {
            Scaled {
                mantissa: v,
                ln_scale: self.scale,
            }
        };
        PfqSum {
            sum,
            rel_tail,
            ln_max_term: self.ln_max,
            terms: self.j + 1,
        }
    }
}

/// `(x − ½) ln x − x + ½ ln 2π`, the part of Stirling's series shared by
/// every `ln Γ(c + x)`.
fn stirling_common<T: Real>(x: T) -> T {
    (x - T::lit(0.5)) * x.ln() - x + T::lit(0.918_938_533_204_672_8)
}

/// `ln Γ(c + x) − stirling_common(x)`, free of the `x ln x` growth.
fn shifted_ln_gamma<T: Real>(c: T, x: T) -> T {
    let y = c + x;
    if y >= T::lit(16.0) {
        let r = y.recip();
        let r2 = r * r;
        let corr = r
            * (T::lit(1.0 / 12.0)
                - r2 * (T::lit(1.0 / 360.0)
                    - r2 * (T::lit(1.0 / 1260.0)
                        - r2 * (T::lit(1.0 / 1680.0) - r2 * T::lit(1.0 / 1188.0)))));
        c * x.ln() + (c + x - T::lit(0.5)) * (c / x).ln_1p() - c + corr
    } else {
        ln_gamma(y).unwrap_or(T::nan()) - stirling_common(x)
    }
}

/// Log of the analytic continuation of the terms of a unit-argument series,
/// up to an additive constant.
struct TermShape<'a, T> {
    p: &'a PfqParams<T>,
}

impl<T: Real> TermShape<'_, T> {
    fn ln_term(&self, x: T) -> T {
        let mut l = T::zero();
        for a in &self.p.numerator {
            l = l + shifted_ln_gamma(*a, x);
        }
        for b in &self.p.denominator {
            l = l - shifted_ln_gamma(*b, x);
        }
        l = l - shifted_ln_gamma(T::one(), x);
        let signs = self.p.numerator.len() as i64 - self.p.denominator.len() as i64 - 1;
        if signs != 0 {
            l = l + T::lit(signs as f64) * stirling_common(x);
        }
        l
    }

    /// First three derivatives of `ln_term` at `x`.
    fn derivatives(&self, x: T) -> Result<(T, T, T)> {
        let mut g = [T::zero(); 3];
        let mut add = |c: T, s: T| -> Result<()> {
            g[0] = g[0] + s * digamma(c + x)?;
            g[1] = g[1] + s * trigamma(c + x)?;
            g[2] = g[2] + s * tetragamma(c + x)?;
            Ok(())
        };
        for a in &self.p.numerator {
            add(*a, T::one())?;
        }
        for b in &self.p.denominator {
            add(*b, -T::one())?;
        }
        add(T::one(), -T::one())?;
        Ok((g[0], g[1], g[2]))
    }
}

fn unit_argument<T: Real>(
    params: &PfqParams<T>,
    mut series: Series<'_, T>,
    opts: PfqOptions,
) -> Result<PfqSum<T>> {
    let shape = TermShape { p: params };
    let tol = T::lit(opts.tail_tol);
    let mut min_start = 16usize;
    loop {
        // Advance until the ratio is within e^{±0.05} of one and every
        // Pochhammer factor is positive.
        loop {
            if series.j >= opts.max_terms {
                return Err(Error::NonConvergence {
                    function: "pfq",
                    terms: series.j,
                    tail: f64::INFINITY,
                    tol: opts.tail_tol,
                });
            }
            let jf = T::of(series.j + 1);
            let positive = params
                .numerator
                .iter()
                .chain(&params.denominator)
                .all(|c| *c + jf > T::zero());
            let r = series.ratio(series.j);
            if series.j + 1 >= min_start
                && positive
                && r > T::zero()
                && r.ln().abs() <= T::lit(0.05)
            {
                break;
            }
            series.advance();
        }
        // Remainder Σ_{j ≥ J0} t_j with t_{J0} the next (not yet added) term.
        let j0 = T::of(series.j + 1);
        let r = series.ratio(series.j);
        let ln_t0 = series.ln_term() + r.abs().ln();
        let sign_t0 = (series.term * r).signum();
        let l0 = shape.ln_term(j0);
        let (g0, g1, g2) = shape.derivatives(j0)?;
        let (integral, int_err) = remainder_integral(&shape, j0, l0)?;
        // Euler–Maclaurin: ∫ + t/2 − t'/12 + t'''/720, relative to t_{J0}.
        let d3 = g0 * g0 * g0 + T::lit(3.0) * g0 * g1 + g2;
        let mut rem = integral;
        rem.add_ln(T::one(), T::lit(0.5).ln());
        let corr = -g0 / T::lit(12.0) + d3 / T::lit(720.0);
        if corr != T::zero() {
            rem.add_ln(corr.signum(), corr.abs().ln());
        }
        let scale = g0.abs() + g1.abs().sqrt() + g2.abs().cbrt();
        let em_err = scale.powi(5) / T::lit(30240.0);
        let mut total = series.finish(T::zero()).sum;
        let mut tail_part = rem;
        tail_part.ln_scale = tail_part.ln_scale + ln_t0;
        tail_part.mantissa = tail_part.mantissa * sign_t0;
        total.add(tail_part);
        let ln_total = total.ln_abs();
        let em_rel = (ln_t0 + em_err.ln() - ln_total).exp();
        let int_rel = (ln_t0 + int_err.ln() + rem.ln_abs() - ln_total).exp();
        let rel_tail = em_rel + int_rel;
        // Pushing the start further out only shrinks the Euler–Maclaurin part.
        if rel_tail <= tol || em_rel <= tol * T::lit(0.5) {
            let ln_max = series.ln_max.max(ln_t0);
            return Ok(PfqSum {
                sum: total,
                rel_tail,
                ln_max_term: ln_max,
                terms: series.j + 1,
            });
        }
        if min_start >= opts.max_terms {
            return Err(Error::NonConvergence {
                function: "pfq",
                terms: series.j,
                tail: rel_tail.to_f(),
                tol: opts.tail_tol,
            });
        }
        min_start = (series.j + 1).max(min_start) * 2;
    }
}

/// `∫_{x0}^∞ exp(ln_term(x) − l0) dx` in scaled form, with a relative error
/// estimate, by tanh-sinh after the substitution `x = x0/u`.
fn remainder_integral<T: Real>(shape: &TermShape<'_, T>, x0: T, l0: T) -> Result<(Scaled<T>, T)> {
    // far enough out that the power-law decay leaves nothing
    let far = T::lit(1e150);
    let r = tanh_sinh(T::zero(), T::one(), T::lit(1e-15), |u, _, _| {
        let x = x0 / u;
        if !(u > T::zero()) || !(x < far) {
            return T::zero();
        }
        let v = (shape.ln_term(x) - l0).exp() * x0 / (u * u);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    });
    if !(r.value > T::zero()) {
        return Err(Error::NonConvergence {
            function: "pfq remainder integral",
            terms: r.evaluations,
            tail: f64::NAN,
            tol: 0.0,
        });
    }
    let total = Scaled {
        mantissa: r.value,
        ln_scale: T::zero(),
    };
    Ok((total, (r.error / r.value).max(T::epsilon())))
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for real `z ≤ 1`.
///
/// Direct series for `|z| ≤ ½`, the Pfaff transformation for `z < −½`,
/// Euler's integral for `½ < z < 1` and Gauss's theorem at `z = 1`.
pub fn hyp2f1<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    let direct = |z: T| -> Result<T> {
        let params = PfqParams::new(vec![a, b], vec![c], z);
        Ok(pfq_scaled(&params, PfqOptions::default())?.value())
    };
    let half = T::lit(0.5);
    let terminating = |x: T| x <= T::zero() && x == x.floor();
    if z > T::one() {
        return Err(Error::Domain {
            function: "hyp2f1",
            at: z.to_f(),
            reason: "requires z <= 1",
        });
    }
    if z.abs() <= half || terminating(a) || terminating(b) {
        return direct(z);
    }
    if z < -half {
        let w = z / (z - T::one());
        return Ok((T::one() - z).powf(-a) * hyp2f1(a, c - b, c, w)?);
    }
    if z == T::one() {
        let s = c - a - b;
        if !(s > T::zero()) {
            return Err(Error::Divergent {
                function: "hyp2f1",
                reason: "c − a − b <= 0 at z = 1".into(),
            });
        }
        let (s1, l1) = ln_gamma_signed(c)?;
        let (s2, l2) = ln_gamma_signed(s)?;
        let (s3, l3) = ln_gamma_signed(c - a)?;
        let (s4, l4) = ln_gamma_signed(c - b)?;
        return Ok(s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp());
    }
    // Euler's transformation turns a cancelling sum into a terminating one.
    let s = c - a - b;
    if terminating(c - a) || terminating(c - b) {
        return Ok((T::one() - z).powf(s) * direct_params(c - a, c - b, c, z)?);
    }
    if let Some(v) = euler_integral(a, b, c, z)? {
        return Ok(v);
    }
    if let Some(v) = euler_integral(c - a, c - b, c, z)? {
        return Ok((T::one() - z).powf(s) * v);
    }
    if s != s.round() {
        if let Ok(v) = connection_one_minus_z(a, b, c, z) {
            return Ok(v);
        }
    }
    direct(z)
}

fn direct_params<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    let params = PfqParams::new(vec![a, b], vec![c], z);
    Ok(pfq_scaled(&params, PfqOptions::default())?.value())
}

/// `B(b, c−b) ₂F₁(a,b;c;z) = ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−zt)^{−a} dt`, with the
/// roles of `a` and `b` swapped if needed so that `c > b > 0`.
fn euler_integral<T: Real>(a: T, b: T, c: T, z: T) -> Result<Option<T>> {
    let (aa, bb) = if c > b && b > T::zero() {
        (a, b)
    } else if c > a && a > T::zero() {
        (b, a)
    } else {
        return Ok(None);
    };
    let one_minus_z = T::one() - z;
    let r = tanh_sinh(T::zero(), T::one(), T::lit(1e-15), |_, t, one_minus_t| {
        let base = one_minus_z + z * one_minus_t;
        t.powf(bb - T::one()) * one_minus_t.powf(c - bb - T::one()) * base.powf(-aa)
    });
    let pre = gamma_ratio(c, bb, c - bb)?;
    Ok(Some(pre * r.value))
}

/// Connection formula between `z` and `1 − z`; needs `c − a − b` non-integer.
fn connection_one_minus_z<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    let s = c - a - b;
    let w = T::one() - z;
    let signed_ratio = |num: [T; 2], den: [T; 2]| -> Result<T> {
        let mut sign = T::one();
        let mut ln = T::zero();
        for (x, positive) in num
            .iter()
            .map(|x| (x, true))
            .chain(den.iter().map(|x| (x, false)))
        {
            let (sg, l) = ln_gamma_signed(*x)?;
            sign = sign * sg;
            ln = if positive { ln + l } else { ln - l };
        }
        Ok(sign * ln.exp())
    };
    let first = signed_ratio([c, s], [c - a, c - b])? * direct_params(a, b, T::one() - s, w)?;
    let second = signed_ratio([c, -s], [a, b])? * direct_params(c - a, c - b, T::one() + s, w)?;
    Ok(first + w.powf(s) * second)
}

/// `Γ(c) / (Γ(a) Γ(b))`.
fn gamma_ratio<T: Real>(c: T, a: T, b: T) -> Result<T> {
    if c < T::lit(150.0) && a > T::zero() && b > T::zero() {
        return Ok(gamma(c)? / (gamma(a)? * gamma(b)?));
    }
    let (s1, l1) = ln_gamma_signed(c)?;
    let (s2, l2) = ln_gamma_signed(a)?;
    let (s3, l3) = ln_gamma_signed(b)?;
    Ok(s1 * s2 * s3 * (l1 - l2 - l3).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn val(num: &[f64], den: &[f64], z: f64) -> f64 {
        pfq(&PfqParams::new(num.to_vec(), den.to_vec(), z), 1e-15)
            .unwrap()
            .value
    }

    #[test]
    fn argument_zero_is_one() {
        assert_eq!(val(&[1.3, -2.2], &[0.7], 0.0), 1.0);
        assert_eq!(val(&[], &[], 0.0), 1.0);
    }

    #[test]
    fn exponential_and_binomial() {
        assert!((val(&[], &[], 1.5) - 1.5f64.exp()).abs() < 1e-14);
        assert!((val(&[], &[], -2.0) - (-2.0f64).exp()).abs() < 1e-15);
        // ₁F₀(a;;z) = (1−z)^{−a}
        assert!((val(&[0.7], &[], 0.6) - 0.4f64.powf(-0.7)).abs() < 1e-13);
    }

    #[test]
    fn gauss_summation_unit_argument() {
        // ₂F₁(1,1;3;1) = Γ(3)Γ(1)/(Γ(2)Γ(2)) = 2
        let s = pfq(&PfqParams::new(vec![1.0f64, 1.0], vec![3.0], 1.0), 1e-13).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12, "{s:?}");
        // partial-sum oracle: Σ 2/((j+1)(j+2)) telescopes, tail after J is 2/(J+2)
        let mut partial = 0.0f64;
        for j in 0..1_000_000usize {
            partial += 2.0 / ((j as f64 + 1.0) * (j as f64 + 2.0));
        }
        assert!((partial + 2.0 / 1_000_001.0 - s.value).abs() < 1e-12);
    }

    #[test]
    fn gauss_summation_general() {
        let (a, b, c) = (0.3f64, 1.7, 2.9);
        let exact = gamma(c).unwrap() * gamma(c - a - b).unwrap()
            / (gamma(c - a).unwrap() * gamma(c - b).unwrap());
        let v = val(&[a, b], &[c], 1.0);
        assert!(((v - exact) / exact).abs() < 1e-13);
        // small excess: slow algebraic decay
        let (a, b, c) = (0.9f64, 1.0, 2.0);
        let exact = gamma(c).unwrap() * gamma(c - a - b).unwrap()
            / (gamma(c - a).unwrap() * gamma(c - b).unwrap());
        let v = val(&[a, b], &[c], 1.0);
        assert!(((v - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn saalschutz_unit_argument() {
        // Pfaff–Saalschütz: ₃F₂(−n, a, b; c, 1+a+b−c−n; 1) = (c−a)_n(c−b)_n/((c)_n(c−a−b)_n)
        use super::super::gamma::pochhammer;
        let (n, a, b, c) = (7usize, 0.4f64, 1.3, 2.2);
        let v = val(&[-(n as f64), a, b], &[c, 1.0 + a + b - c - n as f64], 1.0);
        let exact = pochhammer(c - a, n) * pochhammer(c - b, n)
            / (pochhammer(c, n) * pochhammer(c - a - b, n));
        assert!(((v - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn dixon_type_four_f_three_large_terms() {
        // ₃F₂(a,b,c; 1+a−b, 1+a−c; 1) by Dixon, here with growing intermediate terms.
        let (a, b, c) = (10.0f64, 2.5, 3.25);
        let v = val(&[a, b, c], &[1.0 + a - b, 1.0 + a - c], 1.0);
        let lg = |x: f64| ln_gamma(x).unwrap();
        let exact =
            (lg(1.0 + a / 2.0) + lg(1.0 + a - b) + lg(1.0 + a - c) + lg(1.0 + a / 2.0 - b - c)
                - lg(1.0 + a)
                - lg(1.0 + a / 2.0 - b)
                - lg(1.0 + a / 2.0 - c)
                - lg(1.0 + a - b - c))
            .exp();
        assert!(((v - exact) / exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn divergence_and_poles() {
        let p = PfqParams::new(vec![1.0, 1.0], vec![2.0], 1.0);
        assert!(matches!(pfq(&p, 1e-12), Err(Error::Divergent { .. })));
        let p = PfqParams::new(vec![1.0, 1.0, 1.0], vec![2.0], 0.1);
        assert!(matches!(pfq(&p, 1e-12), Err(Error::Divergent { .. })));
        let p = PfqParams::new(vec![1.0], vec![-2.0], 0.1);
        assert!(matches!(pfq(&p, 1e-12), Err(Error::Pole { .. })));
        // terminating first: ₂F₁(−2, 1; −5; z) is a polynomial
        let p = PfqParams::new(vec![-2.0f64, 1.0], vec![-5.0], 0.5);
        let v = pfq(&p, 1e-12).unwrap().value;
        let exact = 1.0
            + (-2.0 * 1.0 / -5.0) * 0.5
            + (-2.0 * -1.0 * 1.0 * 2.0) / (-5.0 * -4.0 * 2.0) * 0.25;
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let p = PfqParams::new(vec![1.0, 1.0], vec![2.05], 1.0);
        let r = pfq_scaled(
            &p,
            PfqOptions {
                tail_tol: 1e-15,
                max_terms: 20,
            },
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn hyp2f1_regions() {
        // ₂F₁(1,1;2;z) = −ln(1−z)/z
        for &z in &[-0.99, -0.7, -0.2, 0.3, 0.6, 0.9, 0.999_999] {
            let v = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
            let exact = -(-z as f64).ln_1p() / z;
            assert!(
                ((v - exact) / exact).abs() < 1e-13,
                "z = {z}: {v} vs {exact}"
            );
        }
        // ₂F₁(½,1;3/2;z²) = atanh(z)/z
        let z: f64 = 0.95;
        let v = hyp2f1(0.5, 1.0, 1.5, z * z).unwrap();
        assert!((v - z.atanh() / z).abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn hyp2f1_degenerate_binomial(a in -5.0f64..5.0, b in 0.05f64..8.0, z in -0.999f64..0.999) {
            let v = hyp2f1(a, b, b, z).unwrap();
            let exact = (1.0 - z).powf(-a);
            prop_assert!(((v - exact) / exact).abs() < 1e-10, "{} vs {}", v, exact);
        }

        #[test]
        fn one_f_zero_within_tail(a in -3.0f64..3.0, z in -0.95f64..0.95) {
            let r = pfq(&PfqParams::new(vec![a], vec![], z), 1e-14).unwrap();
            let exact = (1.0 - z).powf(-a);
            prop_assert!((r.value - exact).abs() <= r.tail_bound + 1e-13 * exact.abs());
        }
    }
}
