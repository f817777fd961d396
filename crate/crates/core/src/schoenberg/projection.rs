//! Projection of Hilbert-sphere sequences (`ψ(θ) = Σ b_k cos^k θ`) onto `S^d`.
//!
//! Expanding `cos^k` in normalized Gegenbauer polynomials gives
//! `b_{m,d} = P_{m,d} Σ_j b_{m+2j} f_j` with `f_0 = 1` and
//! `f_{j+1}/f_j = (m+2j+1)(m+2j+2) / (4(j+1)(m+(d+1)/2+j))`.

use super::{assemble, CoeffOptions, Dim, Provenance, SchoenbergSequence, Truncation};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::real::{Compensated, Real};
use crate::specfun::{digamma, ln_beta, ln_gamma, ln_gamma_ratio};

/// Largest direct-summation length for one inner sum.
const MAX_INNER_TERMS: usize = 1 << 20;

/// Relative accuracy asked of each inner sum; rounding in the summed terms
/// leaves changes near `1e-13`.
pub const PROJECTION_TOL: f64 = 1e-12;

/// A coefficient sequence on the Hilbert sphere.
pub trait HilbertSequence<T: Real> {
    /// `b_k`.
    fn coeff(&self, k: usize) -> T;

    /// `b_{k+1}/b_k`, used to walk long stretches of an infinite sequence.
    fn ratio(&self, k: usize) -> T {
        self.coeff(k + 1) / self.coeff(k)
    }

    /// Last non-zero index for finitely supported sequences.
    fn last_nonzero(&self) -> Option<usize>;

    /// Mass known to be missing from a finitely supported sequence.
    fn missing_mass(&self) -> T {
        T::zero()
    }

    /// Decay exponent of the projected sequences on `S^d`, `b_{m,d} ≍ m^{−p}`.
    fn sphere_decay_exponent(&self) -> Option<T>;

    /// `(ln b(x), d/dx ln b(x))` for a smooth interpolant of an infinite
    /// sequence, used for the Euler–Maclaurin tail of the inner sums.
    fn interpolant(&self, _x: T) -> Option<(T, T)> {
        None
    }

    fn check_source(&self) -> Result<()> {
        Ok(())
    }
}

/// Hilbert-sphere coefficients of the F-family,
/// `b_k = B(α,ν+τ)/B(α,ν) · (τ)_k (α)_k / ((α+ν+τ)_k k!)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FFamilyHilbert<T> {
    tau: T,
    alpha: T,
    nu: T,
    ln_b0: T,
}

impl<T: Real> FFamilyHilbert<T> {
    pub fn new(tau: T, alpha: T, nu: T) -> Result<Self> {
        crate::kernels::IsotropicKernel::ffamily(tau, alpha, nu)?;
        let ln_b0 = ln_beta(alpha, nu + tau)? - ln_beta(alpha, nu)?;
        Ok(Self {
            tau,
            alpha,
            nu,
            ln_b0,
        })
    }

    /// `(τ, α, ν)`.
    pub fn params(&self) -> (T, T, T) {
        (self.tau, self.alpha, self.nu)
    }

    /// `ln b_k`.
    pub fn ln_coeff(&self, k: usize) -> T {
        self.ln_coeff_at(T::of(k))
    }

    fn ln_coeff_at(&self, x: T) -> T {
        let s = self.alpha + self.nu + self.tau;
        let one = T::one();
        let r = |a: T, b: T| ln_gamma_ratio(x, a, b).unwrap_or_else(|_| T::nan());
        let lg = |x: T| ln_gamma(x).unwrap_or_else(|_| T::nan());
        self.ln_b0 + r(self.tau, one) + r(self.alpha, s) + lg(s) - lg(self.tau) - lg(self.alpha)
    }
}

impl<T: Real> HilbertSequence<T> for FFamilyHilbert<T> {
    fn coeff(&self, k: usize) -> T {
        self.ln_coeff(k).exp()
    }

    fn ratio(&self, k: usize) -> T {
        let kf = T::of(k);
        (self.tau + kf) * (self.alpha + kf)
            / ((self.alpha + self.nu + self.tau + kf) * (kf + T::one()))
    }

    fn last_nonzero(&self) -> Option<usize> {
        None
    }

    fn sphere_decay_exponent(&self) -> Option<T> {
        Some(T::one() + self.nu + self.nu)
    }

    fn interpolant(&self, x: T) -> Option<(T, T)> {
        let s = self.alpha + self.nu + self.tau;
        let dg = |x: T| digamma(x).ok();
        let d = dg(self.tau + x)? + dg(self.alpha + x)? - dg(s + x)? - dg(x + T::one())?;
        Some((self.ln_coeff_at(x), d))
    }
}

impl<T: Real> HilbertSequence<T> for SchoenbergSequence<T> {
    fn coeff(&self, k: usize) -> T {
        SchoenbergSequence::coeff(self, k)
    }

    fn last_nonzero(&self) -> Option<usize> {
        Some(
            self.coeffs()
                .iter()
                .rposition(|b| *b != T::zero())
                .unwrap_or(0),
        )
    }

    fn missing_mass(&self) -> T {
        self.tail_bound()
    }

    fn sphere_decay_exponent(&self) -> Option<T> {
        None
    }

    fn check_source(&self) -> Result<()> {
        match self.dim() {
            Dim::Infinite => Ok(()),
            Dim::Finite(d) => Err(Error::Unsupported(format!(
                "projection needs a Hilbert-sphere source, got S^{d}"
            ))),
        }
    }
}

/// F-family coefficients on the Hilbert sphere; the tail is the mass defect,
/// since the coefficients sum to one.
pub fn ffamily_hilbert_coeffs<T: Real>(
    tau: T,
    alpha: T,
    nu: T,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    let h = FFamilyHilbert::new(tau, alpha, nu)?;
    let (coeffs, _, note) = assemble(truncation, Some(T::one() + nu), opts, |lo, hi| {
        Ok((lo..=hi).map(|k| h.coeff(k)).collect())
    })?;
    let kept: Compensated<T> = coeffs.iter().copied().collect();
    let tail = (T::one() - kept.value()).max(T::zero());
    let seq = SchoenbergSequence::new(Dim::Infinite, coeffs, tail, Provenance::ClosedForm)?;
    Ok(match note {
        Some(n) => seq.with_note(n),
        None => seq,
    })
}

/// `ln P_{m,d}`, the normalization in front of the inner sum.
fn ln_prefactor<T: Real>(m: usize, d: usize) -> Result<T> {
    let (mf, df) = (T::of(m), T::of(d));
    if m == 0 {
        return Ok(T::zero());
    }
    if d == 1 {
        return Ok((T::one() - mf) * T::LN_2());
    }
    let half = T::lit(0.5);
    Ok(
        half * T::PI().ln() - (mf + df - T::lit(2.0)) * T::LN_2() - ln_gamma(df * half)?
            + ln_gamma(mf + df - T::one())?
            - ln_gamma(mf + (df - T::one()) * half)?,
    )
}

/// Rescaling step for the running inner sum, `2^600`.
const RESCALE_LN: f64 = 600.0 * std::f64::consts::LN_2;

/// `Σ_j b_{m+2j} f_j` as `(s, ln_scale)` with the value `s·exp(ln_scale)`;
/// the products `f_j` grow like `2^m` before decaying.
fn inner_sum<T: Real, S: HilbertSequence<T> + ?Sized>(
    src: &S,
    d: usize,
    m: usize,
    tol: T,
) -> Result<(T, T)> {
    let mf = T::of(m);
    let c = mf + T::of(d + 1) * T::lit(0.5);
    let f_step = |j: usize| {
        let jf = T::of(j);
        let a = mf + jf + jf;
        (a + T::one()) * (a + T::lit(2.0)) / (T::lit(4.0) * (jf + T::one()) * (c + jf))
    };
    let big = T::lit(RESCALE_LN).exp();
    let mut acc = Compensated::new();
    let mut ln_scale = T::zero();
    let mut b = src.coeff(m);
    let mut f = T::one();
    let mut j = 0usize;
    let mut advance = |until: usize,
                       acc: &mut Compensated<T>,
                       ln_scale: &mut T,
                       b: &mut T,
                       f: &mut T,
                       exact: bool| {
        while j < until {
            acc.add(*b * *f);
            *b = if exact {
                src.coeff(m + 2 * j + 2)
            } else {
                *b * src.ratio(m + 2 * j) * src.ratio(m + 2 * j + 1)
            };
            *f = *f * f_step(j);
            if *f > big {
                *f = *f / big;
                acc.scale(big.recip());
                *ln_scale = *ln_scale + T::lit(RESCALE_LN);
            }
            j += 1;
        }
    };
    if let Some(last) = src.last_nonzero() {
        let until = if m > last { 0 } else { (last - m) / 2 + 1 };
        advance(until, &mut acc, &mut ln_scale, &mut b, &mut f, true);
        return Ok((acc.value(), ln_scale));
    }
    let interp = |x: T| src.interpolant(x);
    let Some((ln_bm, _)) = interp(mf) else {
        return Err(Error::Unsupported(
            "projection of an infinite sequence needs its continuous interpolant".into(),
        ));
    };
    // b is tracked relative to b_m so that tiny b_m cannot underflow
    b = T::one();
    // ln f(x) for real x, with ln Γ(m+2x+1) split by the duplication formula
    // so that only differences of nearby log-Gammas appear
    let half = T::lit(0.5);
    let (h1, h2) = ((mf + T::one()) * half, (mf + T::lit(2.0)) * half);
    let ln_f0 = mf * T::LN_2() - half * T::PI().ln() + ln_gamma(c)? - ln_gamma(mf + T::one())?;
    let ln_g = |x: T| -> Result<(T, T)> {
        let (lb, dlb) = interp(mf + x + x).expect("interpolant checked above");
        let lf = ln_f0 + ln_gamma_ratio(x, h1, T::one())? + ln_gamma_ratio(x, h2, c)?;
        let dlf = digamma(x + h1)? + digamma(x + h2)? - digamma(x + T::one())? - digamma(c + x)?;
        Ok((lb - ln_bm + lf, dlb + dlb + dlf))
    };
    let mut big_j = 4 * m + 64;
    let mut previous: Option<T> = None;
    loop {
        advance(big_j, &mut acc, &mut ln_scale, &mut b, &mut f, false);
        let total = acc.value() + em_tail(&ln_g, T::of(big_j), ln_scale, tol)?;
        if let Some(p) = previous {
            let err = (total - p).abs();
            if err <= tol * total.abs() {
                return Ok((total, ln_scale + ln_bm));
            }
            if big_j >= MAX_INNER_TERMS {
                if err <= T::lit(1e-8) * total.abs() {
                    return Ok((total, ln_scale + ln_bm));
                }
                return Err(Error::NonConvergence {
                    function: "project_to_sphere",
                    terms: big_j,
                    tail: (err / total.abs()).to_f(),
                    tol: tol.to_f(),
                });
            }
        }
        // the running sum may have been rescaled since the last estimate
        previous = Some(total);
        big_j *= 2;
    }
}

/// `Σ_{j≥J} g(j)` by the midpoint Euler–Maclaurin formula,
/// `∫_{J−½}^∞ g − g'(J−½)/24`, with the integral mapped onto `(0, 1]`.
fn em_tail<T: Real>(
    ln_g: &impl Fn(T) -> Result<(T, T)>,
    big_j: T,
    ln_scale: T,
    tol: T,
) -> Result<T> {
    let x0 = big_j - T::lit(0.5);
    let (l0, dl0) = ln_g(x0)?;
    let mut failure = None;
    // scale by g(x0) to keep the integrand near one
    let integral = tanh_sinh(T::zero(), T::one(), tol * T::lit(0.1), |u, _, _| {
        if u <= T::zero() {
            return T::zero();
        }
        let x = x0 / u;
        // power-law decay: nothing left to integrate this far out
        if !(x < T::lit(1e150)) {
            return T::zero();
        }
        match ln_g(x) {
            Ok((l, _)) => {
                let v = (l - l0).exp() * x0 / (u * u);
                if v.is_finite() {
                    v
                } else {
                    T::zero()
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((l0 - ln_scale).exp() * (integral.value - dl0 / T::lit(24.0)))
}

/// Coefficients on `S^d` of the kernel `Σ_k b_k cos^k θ`.
///
/// For finitely supported sources automatic truncation stops at the degree
/// and the tail is the mass defect; otherwise the decay law of `src` sets
/// the tail.
pub fn project_to_sphere<T: Real, S: HilbertSequence<T> + ?Sized>(
    src: &S,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    src.check_source()?;
    if d == 0 {
        return Err(Error::param(
            "dim",
            0.0,
            "sphere dimension must be at least 1",
        ));
    }
    let tol = T::lit(opts.series_tol.max(PROJECTION_TOL));
    let one = |m: usize| -> Result<T> {
        let (s, ln_scale) = inner_sum(src, d, m, tol)?;
        Ok(s * (ln_scale + ln_prefactor::<T>(m, d)?).exp())
    };
    let block = |lo: usize, hi: usize| (lo..=hi).map(one).collect::<Result<Vec<T>>>();
    let (coeffs, tail, note) = match src.last_nonzero() {
        Some(last) => {
            let m = match truncation {
                Truncation::Fixed(m) => m,
                Truncation::Auto => last,
            };
            let coeffs = block(0, m)?;
            let source_mass: T = (0..=last)
                .map(|k| src.coeff(k))
                .collect::<Compensated<T>>()
                .value();
            let kept: T = coeffs.iter().copied().collect::<Compensated<T>>().value();
            // rounding in the two sums can leave a few ulps either way
            let defect = source_mass + src.missing_mass() - kept;
            let slack = T::epsilon() * T::of(64 * (m + last + 2));
            let tail = if defect.abs() <= slack {
                T::zero()
            } else {
                defect.max(T::zero())
            };
            (coeffs, tail, None)
        }
        None => assemble(truncation, src.sphere_decay_exponent(), opts, block)?,
    };
    let seq = SchoenbergSequence::new(Dim::Finite(d), coeffs, tail, Provenance::Projection)?;
    Ok(match note {
        Some(n) => seq.with_note(n),
        None => seq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CoeffOptions {
        CoeffOptions::default()
    }

    #[test]
    fn hilbert_ffamily_unit_parameters() {
        let h = FFamilyHilbert::new(1.0f64, 1.0, 1.0).unwrap();
        for k in [0usize, 1, 5, 100, 10_000] {
            let want = 1.0 / ((k as f64 + 1.0) * (k as f64 + 2.0));
            assert!((h.coeff(k) / want - 1.0).abs() < 1e-10, "k={k}");
            assert!((h.ratio(k) - h.coeff(k + 1) / h.coeff(k)).abs() < 1e-10);
        }
        let s = ffamily_hilbert_coeffs(1.0f64, 1.0, 1.0, Truncation::Fixed(99), &opts()).unwrap();
        // Σ_{k≥100} 1/((k+1)(k+2)) = 1/101
        assert!((s.tail_bound() - 1.0 / 101.0).abs() < 1e-14);
    }

    #[test]
    fn cos_squared_on_two_sphere() {
        // cos² = 1/3 + (2/3) P_2
        let src = SchoenbergSequence::<f64>::delta(Dim::Infinite, 2);
        let s = project_to_sphere(&src, 2, Truncation::Auto, &opts()).unwrap();
        assert_eq!(s.truncation(), 2);
        assert!((s.coeffs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.coeffs()[1], 0.0);
        assert!((s.coeffs()[2] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.tail_bound(), 0.0);
    }

    #[test]
    fn cos_cubed_on_circle() {
        // cos³θ = (3 cos θ + cos 3θ)/4
        let src = SchoenbergSequence::<f64>::delta(Dim::Infinite, 3);
        let s = project_to_sphere(&src, 1, Truncation::Fixed(5), &opts()).unwrap();
        let want = [0.0, 0.75, 0.0, 0.25, 0.0, 0.0];
        for (b, w) in s.coeffs().iter().zip(want) {
            assert!((b - w).abs() < 1e-15);
        }
        let cut = project_to_sphere(&src, 1, Truncation::Fixed(2), &opts()).unwrap();
        assert!((cut.tail_bound() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ffamily_projection_mass() {
        let h = FFamilyHilbert::new(2.0f64, 1.5, 1.0).unwrap();
        let s = project_to_sphere(&h, 2, Truncation::Fixed(40), &opts()).unwrap();
        assert!(s.strictly_positive());
        // the tail estimate is good to about a percent at this truncation
        assert!(
            (s.mass() - 1.0).abs() < 0.02 * s.tail_bound(),
            "{}",
            s.mass()
        );
    }

    #[test]
    fn finite_dimension_source_rejected() {
        let src = SchoenbergSequence::<f64>::delta(Dim::Finite(2), 1);
        assert!(project_to_sphere(&src, 2, Truncation::Auto, &opts()).is_err());
    }
}
