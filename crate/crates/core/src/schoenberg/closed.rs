//! Closed-form coefficient sequences for the Matérn, F-family and generalised
//! Wendland kernels.

use super::projection::FFamilyHilbert;
use super::{
    assemble, ln_harmonic_dim, oracle, CoeffOptions, Dim, Provenance, SchoenbergSequence,
    Truncation,
};
use crate::error::{Context, Result};
use crate::kernels::IsotropicKernel;
use crate::real::Real;
use crate::specfun::exact::ExactSeries;
use crate::specfun::{ln_gamma, ln_gamma_signed, pfq_scaled, PfqOptions, PfqParams};

/// Distance from an integer below which the Matérn closed form is abandoned:
/// its two terms each carry a Gamma pole there.
const MATERN_INTEGER_GAP: f64 = 1e-6;

/// Largest relative error accepted from a closed-form evaluation before the
/// quadrature route takes over.
const CLOSED_FORM_BUDGET: f64 = 1e-9;

fn with_optional_note<T: Real>(
    seq: SchoenbergSequence<T>,
    note: Option<String>,
) -> SchoenbergSequence<T> {
    match note {
        Some(n) => seq.with_note(n),
        None => seq,
    }
}

fn fallback<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
    why: String,
) -> Result<SchoenbergSequence<T>> {
    log::info!("{why}; using quadrature");
    Ok(oracle::quadrature_coeffs(k, d, truncation, opts)?
        .with_note(format!("{why}; computed by quadrature")))
}

struct NotAccurate(String);

/// Matérn coefficients on `S^d` as a sum of two `₁F₂` terms.
pub fn matern_coeffs<T: Real>(
    nu: T,
    alpha: T,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    let k = IsotropicKernel::matern(nu, alpha)?;
    k.check_dimension(d)?;
    if (nu - nu.round()).abs().to_f() < MATERN_INTEGER_GAP {
        return fallback(
            &k,
            d,
            truncation,
            opts,
            format!("nu = {nu} is (nearly) an integer"),
        );
    }
    let p = k.decay_exponent();
    let mut bad: Option<NotAccurate> = None;
    let res = assemble(truncation, p, opts, |lo, hi| {
        (lo..=hi)
            .map(|m| {
                let (b, rel) = matern_one(nu, alpha, d, m, opts)?;
                if !(rel.to_f() <= CLOSED_FORM_BUDGET) || !(b >= T::zero()) {
                    bad.get_or_insert(NotAccurate(format!(
                        "Matern closed form lost accuracy at m = {m} (relative error {:.1e})",
                        rel.to_f()
                    )));
                }
                Ok(b)
            })
            .collect()
    })
    .context("Matern closed form")?;
    if let Some(NotAccurate(why)) = bad {
        return fallback(&k, d, truncation, opts, why);
    }
    let (coeffs, tail, note) = res;
    Ok(with_optional_note(
        SchoenbergSequence::new(Dim::Finite(d), coeffs, tail, Provenance::ClosedForm)?,
        note,
    ))
}

/// One Matérn coefficient and an estimate of its relative error.
fn matern_one<T: Real>(nu: T, alpha: T, d: usize, m: usize, opts: &CoeffOptions) -> Result<(T, T)> {
    let one = T::one();
    let half = T::lit(0.5);
    let (mf, df) = (T::of(m), T::of(d));
    let hd = df * half;
    let hd1 = (df + one) * half;
    let z = (alpha * alpha).recip();
    let popts = PfqOptions {
        tail_tol: opts.series_tol,
        ..Default::default()
    };

    // ln(Γ((d+1)/2) N_{m,d}) = ln κ + ln 2 + ((d+1)/2) ln π
    let ln_gn = ln_gamma(hd1)? + ln_harmonic_dim::<T>(m, d);
    let ln_kappa = ln_gn - T::LN_2() - hd1 * T::PI().ln();

    let f1 = pfq_scaled(
        &PfqParams::new(vec![nu + hd], vec![nu + one - mf, mf + nu + df], z),
        popts,
    )?;
    let (s1, lg1) = ln_gamma_signed(mf - nu)?;
    let ln1 = df * T::LN_2() + hd * T::PI().ln() + ln_gamma(nu + hd)?
        - ln_gamma(nu)?
        - (nu + nu) * alpha.ln()
        + ln_kappa
        + lg1
        - ln_gamma(mf + nu + df)?
        + f1.ln_abs();
    let t1 = s1 * f1.sign() * ln1.exp();

    let f2 = pfq_scaled(
        &PfqParams::new(vec![mf + hd], vec![mf - nu + one, mf + mf + df], z),
        popts,
    )?;
    let (s2, lg2) = ln_gamma_signed(nu - mf)?;
    let ln2 = ln_gn + lg2 - ln_gamma(nu)? - ln_gamma(mf + hd1)? - (mf + mf) * (alpha + alpha).ln()
        + f2.ln_abs();
    let t2 = s2 * f2.sign() * ln2.exp();

    let b = t1 + t2;
    // rounding in ~10 log-domain terms magnified by exp, plus series error
    let ln_err = T::epsilon() * T::lit(16.0) * (ln1.abs() + ln2.abs() + T::one());
    let err = t1.abs() * (f1.rel_error() + ln_err) + t2.abs() * (f2.rel_error() + ln_err);
    Ok((b, err / b.abs()))
}

/// F-family coefficients on `S^d` from the unit-argument `₄F₃` closed form.
pub fn ffamily_coeffs<T: Real>(
    tau: T,
    alpha: T,
    nu: T,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    let k = IsotropicKernel::ffamily(tau, alpha, nu)?;
    k.check_dimension(d)?;
    let hilbert = FFamilyHilbert::new(tau, alpha, nu)?;
    let mut bad: Option<NotAccurate> = None;
    let res = assemble(truncation, k.decay_exponent(), opts, |lo, hi| {
        (lo..=hi)
            .map(|m| {
                let (b, rel) = ffamily_one(&hilbert, d, m, opts)?;
                if !(rel.to_f() <= CLOSED_FORM_BUDGET) || !(b >= T::zero()) {
                    bad.get_or_insert(NotAccurate(format!(
                        "F-family closed form lost accuracy at m = {m} (relative error {:.1e})",
                        rel.to_f()
                    )));
                }
                Ok(b)
            })
            .collect()
    })
    .context("F-family closed form")?;
    if let Some(NotAccurate(why)) = bad {
        return fallback(&k, d, truncation, opts, why);
    }
    let (coeffs, tail, note) = res;
    Ok(with_optional_note(
        SchoenbergSequence::new(Dim::Finite(d), coeffs, tail, Provenance::ClosedForm)?,
        note,
    ))
}

fn ffamily_one<T: Real>(
    h: &FFamilyHilbert<T>,
    d: usize,
    m: usize,
    opts: &CoeffOptions,
) -> Result<(T, T)> {
    let (tau, alpha, nu) = h.params();
    let one = T::one();
    let half = T::lit(0.5);
    let (mf, df) = (T::of(m), T::of(d));
    let ln_bm = h.ln_coeff(m);
    // ln C_{m,d}
    let ln_c = if d == 1 {
        let c = ln_bm + (one - mf) * T::LN_2();
        if m == 0 {
            c - T::LN_2()
        } else {
            c
        }
    } else {
        ln_bm - (mf + df - T::lit(2.0)) * T::LN_2() + ln_gamma(mf + df - one)?
            - ln_gamma(mf + (df - one) * half)?
            + half * T::PI().ln()
            - ln_gamma(df * half)?
    };
    let a = alpha + mf;
    let t = tau + mf;
    let s = alpha + nu + tau + mf;
    let params = PfqParams::new(
        vec![a * half, (a + one) * half, t * half, (t + one) * half],
        vec![s * half, (s + one) * half, mf + (df + one) * half],
        one,
    );
    let f = pfq_scaled(
        &params,
        PfqOptions {
            tail_tol: opts.series_tol,
            ..Default::default()
        },
    )?;
    let b = (ln_c + f.ln_abs()).exp() * f.sign();
    let rel = f.rel_error() + T::epsilon() * T::lit(16.0) * (ln_c.abs() + one);
    Ok((b, rel))
}

/// Generalised Wendland coefficients on `S^d` from a `₃F₂` in `1/(4ε²)`,
/// summed in fixed point because its terms are far larger than its value.
pub fn wendland_coeffs<T: Real>(
    nu: T,
    alpha: T,
    eps: T,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    let k = IsotropicKernel::wendland(nu, alpha, eps)?;
    k.check_dimension(d)?;
    if d % 2 == 1 && eps.to_f() <= 0.5 {
        return fallback(
            &k,
            d,
            truncation,
            opts,
            format!("Wendland series diverges for odd d with eps = {eps} <= 1/2"),
        );
    }
    let (nu, alpha, eps) = (nu.to_f(), alpha.to_f(), eps.to_f());
    let ln_pre = wendland_prefactor(nu, alpha, eps, d)?;
    let (coeffs, tail, note) = assemble(truncation, k.decay_exponent(), opts, |lo, hi| {
        (lo..=hi)
            .map(|m| wendland_one(nu, alpha, eps, d, m, ln_pre, opts).map(T::lit))
            .collect()
    })
    .context("Wendland closed form")?;
    Ok(with_optional_note(
        SchoenbergSequence::new(Dim::Finite(d), coeffs, tail, Provenance::ClosedForm)?,
        note,
    ))
}

/// `ln(2Γ(2α+ν+1) Γ(d) / (2 Γ(2α+ν+1+d) B(α+½, d/2) ε^d))`.
fn wendland_prefactor(nu: f64, alpha: f64, eps: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let g = 2.0 * alpha + nu + 1.0;
    Ok(ln_gamma(g)?
        - ln_gamma(g + df)?
        - crate::specfun::ln_beta(alpha + 0.5, df / 2.0)?
        - df * eps.ln()
        + ln_gamma(df)?)
}

fn wendland_one(
    nu: f64,
    alpha: f64,
    eps: f64,
    d: usize,
    m: usize,
    ln_pre: f64,
    opts: &CoeffOptions,
) -> Result<f64> {
    let (mf, df) = (m as f64, d as f64);
    let c = (df + 1.0) / 2.0 + alpha;
    let series = ExactSeries::from_f64(
        &[-(mf + (df - 2.0) / 2.0), mf + df / 2.0, c],
        &[c + nu / 2.0, c + (nu + 1.0) / 2.0],
        1.0 / (4.0 * eps * eps),
    )?;
    let (f, _rel, _terms) = series.sum_f64(opts.series_tol, 1_000_000)?;
    Ok((ln_pre + ln_harmonic_dim::<f64>(m, d)).exp() * f)
}
