//! Native-space and Sobolev norms from harmonic coefficients, decay-exponent
//! fits and Sobolev-order identification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::IsotropicKernel;
use crate::real::{Compensated, Real};
use crate::schoenberg::{harmonic_dim, FourierSequence, SchoenbergSequence};
use crate::specfun::ln_gamma;

/// One spherical Fourier coefficient `f̂_{m,n}`, `1 ≤ n ≤ N_{m,d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HarmonicEntry<T> {
    pub m: usize,
    pub n: usize,
    pub value: T,
}

/// Sparse harmonic coefficients of a function on `S^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients<T> {
    dim: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Real> HarmonicCoefficients<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param(
                "dim",
                0.0,
                "sphere dimension must be at least 1",
            ));
        }
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = HarmonicEntry<T>>,
    ) -> Result<Self> {
        let mut f = Self::new(dim)?;
        for e in entries {
            f.insert(e)?;
        }
        Ok(f)
    }

    /// Sets `f̂_{m,n}`; repeated indices replace the earlier value.
    pub fn insert(&mut self, e: HarmonicEntry<T>) -> Result<()> {
        let n_max = harmonic_dim(e.m, self.dim).unwrap_or(u128::MAX);
        if e.n == 0 || e.n as u128 > n_max {
            return Err(Error::param(
                "n",
                e.n as f64,
                format!("index must lie in 1..=N({}, {}) = {n_max}", e.m, self.dim),
            ));
        }
        self.entries.insert((e.m, e.n), e.value);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest degree present (0 for the zero function).
    pub fn truncation(&self) -> usize {
        self.entries.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = HarmonicEntry<T>> + '_ {
        self.entries
            .iter()
            .map(|(&(m, n), &value)| HarmonicEntry { m, n, value })
    }
}

fn weight_for<T: Real>(psi_hat: &FourierSequence<T>, m: usize) -> Result<T> {
    let c = *psi_hat.coeffs().get(m).ok_or(Error::DimensionMismatch {
        expected: psi_hat.truncation(),
        found: m,
    })?;
    if !(c > T::zero()) {
        return Err(Error::Domain {
            function: "native_norm_sq",
            at: m as f64,
            reason: "ψ̂_m must be positive at every used degree",
        });
    }
    Ok(c)
}

/// `Σ f̂_{m,n} ĝ_{m,n} / ψ̂_m`.
pub fn native_inner<T: Real>(
    f: &HarmonicCoefficients<T>,
    g: &HarmonicCoefficients<T>,
    psi_hat: &FourierSequence<T>,
) -> Result<T> {
    for h in [f, g] {
        if h.dim != psi_hat.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi_hat.dim(),
                found: h.dim,
            });
        }
    }
    let mut acc = Compensated::new();
    for (key, a) in &f.entries {
        if let Some(b) = g.entries.get(key) {
            acc.add(*a * *b / weight_for(psi_hat, key.0)?);
        }
    }
    // degrees outside the range are an error even when the product vanishes
    for key in g.entries.keys() {
        weight_for(psi_hat, key.0)?;
    }
    Ok(acc.value())
}

/// `‖f‖²_ψ = Σ |f̂_{m,n}|² / ψ̂_m`.
pub fn native_norm_sq<T: Real>(
    f: &HarmonicCoefficients<T>,
    psi_hat: &FourierSequence<T>,
) -> Result<T> {
    native_inner(f, f, psi_hat)
}

/// `Σ (1+m)^{2γ} |f̂_{m,n}|²`.
pub fn sobolev_norm_sq<T: Real>(f: &HarmonicCoefficients<T>, gamma: T) -> T {
    f.iter()
        .map(|e| (T::of(e.m + 1)).powf(gamma + gamma) * e.value * e.value)
        .collect::<Compensated<T>>()
        .value()
}

/// Degrees `lo..=hi` used by [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRange {
    pub lo: usize,
    pub hi: usize,
}

impl FitRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    /// `[M/4, M]`.
    pub fn default_for(truncation: usize) -> Self {
        Self {
            lo: truncation / 4,
            hi: truncation,
        }
    }
}

/// Power-law fit `ψ̂_m ≈ C (1+m)^{−(d+γ)}` and the Sobolev order it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DecayFit<T> {
    pub dim: usize,
    pub gamma_hat: T,
    /// `(d + γ̂)/2`.
    pub beta: T,
    pub constant_hat: T,
    /// Empirical norm-equivalence constants: min and max of
    /// `ψ̂_m (1+m)^{d+γ̂}` over the fitted degrees.
    pub sandwich: (T, T),
    pub fit_range: (usize, usize),
    /// Largest relative deviation of the data from the fitted law.
    pub residual: T,
    /// `β > d/2`.
    pub embeds_continuously: bool,
}

/// Sequences [`fit_decay`] accepts.
pub trait Spectrum<T: Real> {
    fn fourier(&self) -> Result<FourierSequence<T>>;
}

impl<T: Real> Spectrum<T> for FourierSequence<T> {
    fn fourier(&self) -> Result<FourierSequence<T>> {
        Ok(self.clone())
    }
}

impl<T: Real> Spectrum<T> for SchoenbergSequence<T> {
    fn fourier(&self) -> Result<FourierSequence<T>> {
        self.to_fourier()
    }
}

/// Log-log least squares of `ψ̂_m` against `1+m` over `range`
/// (`[M/4, M]` when `None`).
pub fn fit_decay<T: Real, S: Spectrum<T> + ?Sized>(
    s: &S,
    range: Option<FitRange>,
) -> Result<DecayFit<T>> {
    let f = s.fourier()?;
    let d = f.dim();
    let r = range.unwrap_or_else(|| FitRange::default_for(f.truncation()));
    if r.lo >= r.hi || r.hi > f.truncation() {
        return Err(Error::param(
            "fit_range",
            r.hi as f64,
            format!(
                "need lo < hi <= {} (got [{}, {}])",
                f.truncation(),
                r.lo,
                r.hi
            ),
        ));
    }
    let mut pts = Vec::with_capacity(r.hi - r.lo + 1);
    for m in r.lo..=r.hi {
        let c = f.coeffs()[m];
        if !(c > T::zero()) {
            return Err(Error::Domain {
                function: "fit_decay",
                at: m as f64,
                reason: "coefficient is not positive",
            });
        }
        pts.push((T::of(m + 1).ln(), c.ln()));
    }
    let (slope, intercept) = fit_line(&pts);
    let order = -slope;
    let gamma_hat = order - T::of(d);
    let beta = order * T::lit(0.5);
    let (mut lo, mut hi, mut residual) = (T::infinity(), T::neg_infinity(), T::zero());
    for (x, y) in &pts {
        let scaled = (*y + order * *x).exp();
        lo = lo.min(scaled);
        hi = hi.max(scaled);
        residual = residual.max((*y - intercept - slope * *x).exp_m1().abs());
    }
    Ok(DecayFit {
        dim: d,
        gamma_hat,
        beta,
        constant_hat: intercept.exp(),
        sandwich: (lo, hi),
        fit_range: (r.lo, r.hi),
        residual,
        embeds_continuously: beta > T::of(d) * T::lit(0.5),
    })
}

/// Least-squares line `y = slope·x + intercept` through `pts`.
pub(crate) fn fit_line<T: Real>(pts: &[(T, T)]) -> (T, T) {
    let n = T::of(pts.len());
    let mean = |g: &dyn Fn(&(T, T)) -> T| pts.iter().map(g).collect::<Compensated<T>>().value() / n;
    let (xm, ym) = (mean(&|p| p.0), mean(&|p| p.1));
    let sxy = mean(&|p| (p.0 - xm) * (p.1 - ym));
    let sxx = mean(&|p| (p.0 - xm) * (p.0 - xm));
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

/// Leading-order behaviour of `b_{m,d}` for large `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyAsymptote<T> {
    /// `(2/α^{2ν}) Γ(ν+d/2) / (Γ(ν)Γ(d/2)) m^{−1−2ν}`.
    Matern { nu: T, alpha: T },
    /// `Γ(ν+α)Γ(ν+τ)/(Γ(α)Γ(ν)Γ(τ)) · 2^{ν+1} Γ(d/2+ν)/Γ(d/2) · m^{−1−2ν}`.
    FFamily { tau: T, alpha: T, nu: T },
    /// `C (1+m)^{−p}`.
    PowerLaw { constant: T, exponent: T },
}

impl<T: Real> FamilyAsymptote<T> {
    pub fn for_kernel(k: &IsotropicKernel<T>) -> Result<Self> {
        match k {
            IsotropicKernel::Matern { nu, alpha } => Ok(Self::Matern {
                nu: *nu,
                alpha: *alpha,
            }),
            IsotropicKernel::FFamily { tau, alpha, nu } => Ok(Self::FFamily {
                tau: *tau,
                alpha: *alpha,
                nu: *nu,
            }),
            IsotropicKernel::GeneralisedWendland { .. } => Err(Error::Unsupported(
                "the Wendland family has no closed-form asymptote; use wendland_sandwich".into(),
            )),
            IsotropicKernel::Custom { .. } => Err(Error::Unsupported(
                "polynomial kernels have finitely many coefficients".into(),
            )),
        }
    }

    /// `ln` of the asymptote at degree `m ≥ 1` on `S^d`.
    pub fn ln_value(&self, m: usize, d: usize) -> Result<T> {
        let half_d = T::of(d) * T::lit(0.5);
        let ln_m = T::of(m).ln();
        let two = T::lit(2.0);
        Ok(match *self {
            Self::Matern { nu, alpha } => {
                T::LN_2() - two * nu * alpha.ln() + ln_gamma(nu + half_d)?
                    - ln_gamma(nu)?
                    - ln_gamma(half_d)?
                    - (T::one() + two * nu) * ln_m
            }
            Self::FFamily { tau, alpha, nu } => {
                ln_gamma(nu + alpha)? + ln_gamma(nu + tau)?
                    - ln_gamma(alpha)?
                    - ln_gamma(nu)?
                    - ln_gamma(tau)?
                    + (nu + T::one()) * T::LN_2()
                    + ln_gamma(half_d + nu)?
                    - ln_gamma(half_d)?
                    - (T::one() + two * nu) * ln_m
            }
            Self::PowerLaw { constant, exponent } => constant.ln() - exponent * T::of(m + 1).ln(),
        })
    }
}

/// `r_m = b_{m,d} / asymptote(m)` for `m` in `lo..=hi`; `lo ≥ 1`.
pub fn asymptote_ratio<T: Real>(
    s: &SchoenbergSequence<T>,
    asymptote: &FamilyAsymptote<T>,
    lo: usize,
    hi: usize,
) -> Result<Vec<T>> {
    let d = s
        .dim()
        .finite()
        .ok_or_else(|| Error::Unsupported("asymptotes are stated on finite spheres".into()))?;
    if lo == 0 || lo > hi || hi > s.truncation() {
        return Err(Error::param(
            "range",
            lo as f64,
            format!("need 1 <= lo <= hi <= {}", s.truncation()),
        ));
    }
    (lo..=hi)
        .map(|m| Ok(s.coeffs()[m] / asymptote.ln_value(m, d)?.exp()))
        .collect()
}

/// Min and max of `ε^{−(2α+1)} (1+m)^{2+2α} b_{m,d}` over `lo..=hi`.
pub fn wendland_sandwich<T: Real>(
    s: &SchoenbergSequence<T>,
    alpha: T,
    eps: T,
    lo: usize,
    hi: usize,
) -> Result<(T, T)> {
    if lo > hi || hi > s.truncation() {
        return Err(Error::param(
            "range",
            hi as f64,
            format!("need lo <= hi <= {}", s.truncation()),
        ));
    }
    let two = T::lit(2.0);
    let scale = -(two * alpha + T::one()) * eps.ln();
    Ok((lo..=hi)
        .map(|m| s.coeffs()[m] * (scale + (two + two * alpha) * T::of(m + 1).ln()).exp())
        .fold((T::infinity(), T::neg_infinity()), |(a, b), v| {
            (a.min(v), b.max(v))
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schoenberg::Provenance;
    use proptest::prelude::*;

    fn power_law(d: usize, p: f64, c: f64, m_max: usize) -> FourierSequence<f64> {
        FourierSequence::new(
            d,
            (0..=m_max).map(|m| c * (1.0 + m as f64).powf(-p)).collect(),
        )
        .unwrap()
    }

    fn entry(m: usize, n: usize, value: f64) -> HarmonicEntry<f64> {
        HarmonicEntry { m, n, value }
    }

    #[test]
    fn norms_of_simple_functions() {
        let psi = power_law(2, 3.0, 1.0, 10);
        let f = HarmonicCoefficients::from_entries(2, [entry(3, 2, 2.0)]).unwrap();
        assert!((native_norm_sq(&f, &psi).unwrap() - 4.0 * 64.0).abs() < 1e-12);
        assert!((sobolev_norm_sq(&f, 1.0) - 64.0).abs() < 1e-12);
        assert_eq!(sobolev_norm_sq(&f, 0.0), 4.0);
        let zero = HarmonicCoefficients::<f64>::new(2).unwrap();
        assert_eq!(native_norm_sq(&zero, &psi).unwrap(), 0.0);
        let g = HarmonicCoefficients::from_entries(2, [entry(1, 1, 1.0)]).unwrap();
        let both =
            HarmonicCoefficients::from_entries(2, [entry(3, 2, 2.0), entry(1, 1, 1.0)]).unwrap();
        let sum = native_norm_sq(&f, &psi).unwrap() + native_norm_sq(&g, &psi).unwrap();
        assert!((native_norm_sq(&both, &psi).unwrap() - sum).abs() < 1e-12);
        assert_eq!(native_inner(&f, &g, &psi).unwrap(), 0.0);
    }

    #[test]
    fn bad_entries_and_degrees() {
        // N(1, 2) = 3
        assert!(HarmonicCoefficients::from_entries(2, [entry(1, 4, 1.0)]).is_err());
        assert!(HarmonicCoefficients::from_entries(2, [entry(1, 0, 1.0)]).is_err());
        let psi = power_law(2, 3.0, 1.0, 2);
        let f = HarmonicCoefficients::from_entries(2, [entry(5, 1, 1.0)]).unwrap();
        assert!(native_norm_sq(&f, &psi).is_err());
        let mut zeroed = psi.coeffs().to_vec();
        zeroed[1] = 0.0;
        let psi0 = FourierSequence::new(2, zeroed).unwrap();
        let g = HarmonicCoefficients::from_entries(2, [entry(1, 1, 1.0)]).unwrap();
        assert!(native_norm_sq(&g, &psi0).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let (gamma, d) = (1.7, 2);
        let f = fit_decay(&power_law(d, gamma + d as f64, 1.0, 400), None).unwrap();
        assert!((f.gamma_hat - gamma).abs() < 1e-10);
        assert!((f.beta - 1.85).abs() < 1e-10);
        assert!(f.residual < 1e-9);
        assert_eq!(f.fit_range, (100, 400));
        assert!(f.embeds_continuously);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let psi = power_law(2, 3.0, 1.0, 10);
        assert!(fit_decay(&psi, Some(FitRange::new(5, 5))).is_err());
        assert!(fit_decay(&psi, Some(FitRange::new(2, 11))).is_err());
        let mut c = psi.coeffs().to_vec();
        c[7] = 0.0;
        assert!(fit_decay(&FourierSequence::new(2, c).unwrap(), None).is_err());
    }

    #[test]
    fn power_law_asymptote_matches_itself() {
        let c: Vec<f64> = (0..=50)
            .map(|m| 0.3 * (1.0 + m as f64).powf(-4.0))
            .collect();
        let s = SchoenbergSequence::new(
            crate::schoenberg::Dim::Finite(3),
            c,
            0.0,
            Provenance::ClosedForm,
        )
        .unwrap();
        let a = FamilyAsymptote::PowerLaw {
            constant: 0.3,
            exponent: 4.0,
        };
        for r in asymptote_ratio(&s, &a, 1, 50).unwrap() {
            assert!((r - 1.0).abs() < 1e-13);
        }
        assert!(asymptote_ratio(&s, &a, 0, 5).is_err());
        let w = IsotropicKernel::wendland(4.0, 1.0, 0.75).unwrap();
        assert!(FamilyAsymptote::for_kernel(&w).is_err());
    }

    fn random_f(d: usize, m_max: usize, vals: &[(usize, f64)]) -> HarmonicCoefficients<f64> {
        HarmonicCoefficients::from_entries(
            d,
            vals.iter().map(|&(m, v)| entry(m % (m_max + 1), 1, v)),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn native_space_of_power_weights_is_sobolev(
            gamma in 0.0f64..3.0,
            vals in prop::collection::vec((0usize..200, -5.0f64..5.0), 1..40),
        ) {
            let psi = FourierSequence::new(2, (0..=200).map(|m| (1.0 + m as f64).powf(-2.0 * gamma)).collect()).unwrap();
            let f = random_f(2, 200, &vals);
            let a = native_norm_sq(&f, &psi).unwrap();
            let b = sobolev_norm_sq(&f, gamma);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn sandwich_brackets_the_sobolev_norm(
            wiggle in prop::collection::vec(0.5f64..2.0, 101),
            vals in prop::collection::vec((0usize..100, -5.0f64..5.0), 1..30),
        ) {
            let psi = FourierSequence::new(
                2,
                wiggle.iter().enumerate().map(|(m, w)| w * (1.0 + m as f64).powf(-5.0)).collect(),
            ).unwrap();
            let fit = fit_decay(&psi, Some(FitRange::new(0, 100))).unwrap();
            let f = random_f(2, 100, &vals);
            let native = native_norm_sq(&f, &psi).unwrap();
            let sob = sobolev_norm_sq(&f, fit.beta);
            let slack = 1e-12 * sob;
            prop_assert!(fit.sandwich.0 * native <= sob + slack);
            prop_assert!(sob <= fit.sandwich.1 * native + slack);
        }

        #[test]
        fn fit_is_scale_equivariant(c in 1e-6f64..1e6, p in 2.5f64..8.0) {
            let a = fit_decay(&power_law(3, p, 1.0, 200), None).unwrap();
            let b = fit_decay(&power_law(3, p, c, 200), None).unwrap();
            prop_assert!((a.gamma_hat - b.gamma_hat).abs() < 1e-9);
            prop_assert!((b.constant_hat / (c * a.constant_hat) - 1.0).abs() < 1e-9);
        }
    }
}
