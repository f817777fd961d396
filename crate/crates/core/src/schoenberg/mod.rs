//! d-Schoenberg coefficient sequences: closed forms, projection from the
//! Hilbert sphere and a quadrature oracle; Fourier conversion; kernel
//! reconstruction.

mod closed;
pub mod io;
mod oracle;
mod projection;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::IsotropicKernel;
use crate::real::{Compensated, Real};
use crate::specfun::{gegenbauer_ratios_into, ln_gamma};

pub use closed::{ffamily_coeffs, matern_coeffs, wendland_coeffs};
pub use oracle::quadrature_coeffs;
pub use projection::{
    ffamily_hilbert_coeffs, project_to_sphere, FFamilyHilbert, HilbertSequence, PROJECTION_TOL,
};

/// Sphere dimension of a sequence; `Infinite` for the Hilbert sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Finite(usize),
    Infinite,
}

impl Dim {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dim::Finite(d) => Some(d),
            Dim::Infinite => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Finite(d) => write!(f, "{d}"),
            Dim::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Dim {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Dim::Infinite),
            t => t
                .parse::<usize>()
                .ok()
                .filter(|d| *d >= 1)
                .map(Dim::Finite)
                .ok_or_else(|| Error::Parse(format!("bad dimension {t:?}"))),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Finite(d) => s.serialize_u64(*d as u64),
            Dim::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(de)? {
            Raw::N(0) => Err(serde::de::Error::custom("dimension must be at least 1")),
            Raw::N(d) => Ok(Dim::Finite(d)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which route produced a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    Projection,
    Quadrature,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ClosedForm" => Ok(Self::ClosedForm),
            "Projection" => Ok(Self::Projection),
            "Quadrature" => Ok(Self::Quadrature),
            t => Err(Error::Parse(format!("unknown provenance {t:?}"))),
        }
    }
}

/// Coefficients below zero but above this are rounding dust and are clamped.
pub const NEGATIVE_DUST: f64 = 1e-10;

/// A truncated d-Schoenberg sequence `b_{0,d}, …, b_{M,d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergSequence<T> {
    dim: Dim,
    coeffs: Vec<T>,
    tail_bound: T,
    provenance: Provenance,
    notes: Vec<String>,
    clamped: usize,
}

impl<T: Real> SchoenbergSequence<T> {
    /// Validates non-negativity; values in `[−1e-10, 0)` are clamped to zero.
    pub fn new(
        dim: Dim,
        mut coeffs: Vec<T>,
        tail_bound: T,
        provenance: Provenance,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", 0.0, "a sequence needs at least b_0"));
        }
        if !(tail_bound >= T::zero()) {
            return Err(Error::param(
                "tail_bound",
                tail_bound.to_f(),
                "must be non-negative",
            ));
        }
        let mut clamped = 0;
        for (m, b) in coeffs.iter_mut().enumerate() {
            if !b.is_finite() {
                return Err(Error::param(
                    "coeffs",
                    b.to_f(),
                    format!("b[{m}] is not finite"),
                ));
            }
            if *b < T::zero() {
                if *b >= -T::lit(NEGATIVE_DUST) {
                    *b = T::zero();
                    clamped += 1;
                } else {
                    return Err(Error::NegativeCoefficient { m, value: b.to_f() });
                }
            }
        }
        if clamped > 0 {
            log::warn!(
                "clamped {clamped} negative coefficient(s) above -{NEGATIVE_DUST:e} to zero"
            );
        }
        Ok(Self {
            dim,
            coeffs,
            tail_bound,
            provenance,
            notes: Vec::new(),
            clamped,
        })
    }

    /// The sequence `b_k = 1`, all others zero: `ψ = cos^k θ` on the Hilbert
    /// sphere, or the degree-`k` normalized Gegenbauer kernel on `S^d`.
    pub fn delta(dim: Dim, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Self {
            dim,
            coeffs,
            tail_bound: T::zero(),
            provenance: Provenance::ClosedForm,
            notes: Vec::new(),
            clamped: 0,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `b_m`, zero beyond the truncation.
    pub fn coeff(&self, m: usize) -> T {
        self.coeffs.get(m).copied().unwrap_or_else(T::zero)
    }

    /// Highest stored degree `M`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Estimated mass beyond `M`.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Number of negative values clamped to zero on construction.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// `Σ b_m + tail_bound`; one for unit-variance kernels.
    pub fn mass(&self) -> T {
        let mut acc: Compensated<T> = self.coeffs.iter().copied().collect();
        acc.add(self.tail_bound);
        acc.value()
    }

    /// Every stored coefficient is positive.
    pub fn strictly_positive(&self) -> bool {
        self.coeffs.iter().all(|b| *b > T::zero())
    }

    /// First `m_max + 1` coefficients, with the dropped mass moved into the
    /// tail.
    pub fn truncated(&self, m_max: usize) -> Self {
        if m_max >= self.truncation() {
            return self.clone();
        }
        let dropped: T = self.coeffs[m_max + 1..].iter().copied().sum();
        Self {
            coeffs: self.coeffs[..=m_max].to_vec(),
            tail_bound: self.tail_bound + dropped,
            ..self.clone()
        }
    }

    pub fn to_fourier(&self) -> Result<FourierSequence<T>> {
        fourier_from_schoenberg(self)
    }
}

/// Spherical Fourier coefficients `ψ̂_m` of an isotropic kernel on `S^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FourierSequence<T> {
    dim: usize,
    coeffs: Vec<T>,
}

impl<T: Real> FourierSequence<T> {
    pub fn new(dim: usize, coeffs: Vec<T>) -> Result<Self> {
        if dim == 0 || coeffs.is_empty() {
            return Err(Error::param(
                "dim",
                dim as f64,
                "need d >= 1 and at least one coefficient",
            ));
        }
        Ok(Self { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Exact `N_{m,d}`, the dimension of degree-`m` spherical harmonics on `S^d`.
pub fn harmonic_dim(m: usize, d: usize) -> Result<u128> {
    if d == 0 {
        return Err(Error::param(
            "dim",
            0.0,
            "sphere dimension must be at least 1",
        ));
    }
    if m == 0 {
        return Ok(1);
    }
    if d == 1 {
        return Ok(2);
    }
    // N = (2m+d−1)/(d−1) · C(m+d−2, m)
    let overflow = || Error::Overflow { m, d };
    let k = (d - 2).min(m) as u128;
    let n = (m + d - 2) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul(n - i).ok_or_else(overflow)? / (i + 1);
    }
    let top = c
        .checked_mul((2 * m + d - 1) as u128)
        .ok_or_else(overflow)?;
    Ok(top / (d - 1) as u128)
}

/// `ln N_{m,d}`.
pub fn ln_harmonic_dim<T: Real>(m: usize, d: usize) -> T {
    if let Ok(n) = harmonic_dim(m, d) {
        if n < (1u128 << 100) {
            return T::lit(n as f64).ln();
        }
    }
    let (mf, df) = (T::of(m), T::of(d));
    let one = T::one();
    (mf + mf + df - one).ln() + ln_gamma(mf + df - one).unwrap_or(T::nan())
        - ln_gamma(df).unwrap_or(T::nan())
        - ln_gamma(mf + one).unwrap_or(T::nan())
}

/// `N_{m,d}` as a float: exact when it fits, otherwise via log-Gamma.
pub fn harmonic_dim_real<T: Real>(m: usize, d: usize) -> T {
    match harmonic_dim(m, d) {
        Ok(n) => T::lit(n as f64),
        Err(_) => ln_harmonic_dim::<T>(m, d).exp(),
    }
}

/// `ln(2π^{(d+1)/2} / Γ((d+1)/2))`: the surface area of `S^d`.
pub(crate) fn ln_sphere_area<T: Real>(d: usize) -> T {
    let h = T::of(d + 1) * T::lit(0.5);
    T::LN_2() + h * T::PI().ln() - ln_gamma(h).unwrap_or(T::nan())
}

/// `ψ̂_m = b_{m,d} · 2π^{(d+1)/2} / (Γ((d+1)/2) N_{m,d})`.
pub fn fourier_from_schoenberg<T: Real>(s: &SchoenbergSequence<T>) -> Result<FourierSequence<T>> {
    let d = s
        .dim
        .finite()
        .ok_or_else(|| Error::Unsupported("Fourier coefficients need a finite dimension".into()))?;
    let area = ln_sphere_area::<T>(d);
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, b)| *b * (area - ln_harmonic_dim::<T>(m, d)).exp())
        .collect();
    FourierSequence::new(d, coeffs)
}

/// Inverse of [`fourier_from_schoenberg`].
pub fn schoenberg_from_fourier<T: Real>(
    f: &FourierSequence<T>,
    provenance: Provenance,
    tail_bound: T,
) -> Result<SchoenbergSequence<T>> {
    let area = ln_sphere_area::<T>(f.dim);
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| *c * (ln_harmonic_dim::<T>(m, f.dim) - area).exp())
        .collect();
    SchoenbergSequence::new(Dim::Finite(f.dim), coeffs, tail_bound, provenance)
}

/// `ψ(θ) = Σ_m b_{m,d} R_m(cos θ)` (or `Σ b_m cos^m θ` on the Hilbert sphere),
/// accurate to within the tail mass.
pub fn reconstruct_kernel<T: Real>(s: &SchoenbergSequence<T>, theta: T) -> T {
    let x = theta.cos();
    match s.dim {
        Dim::Infinite => s.coeffs.iter().rev().fold(T::zero(), |acc, b| acc * x + *b),
        Dim::Finite(d) => {
            let lambda = T::of(d - 1) * T::lit(0.5);
            let mut r = Vec::with_capacity(s.coeffs.len());
            if d == 1 {
                // exact Chebyshev values avoid drift of the recurrence
                r.extend((0..s.coeffs.len()).map(|m| (T::of(m) * theta).cos()));
            } else {
                gegenbauer_ratios_into(s.truncation(), lambda, x, &mut r);
            }
            s.coeffs
                .iter()
                .zip(&r)
                .map(|(b, g)| *b * *g)
                .collect::<Compensated<T>>()
                .value()
        }
    }
}

/// Truncation degree `M`, fixed or chosen from the decay law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Fixed(usize),
    Auto,
}

impl Serialize for Truncation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Truncation::Fixed(m) => s.serialize_u64(*m as u64),
            Truncation::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(de)? {
            Raw::N(m) => Ok(Truncation::Fixed(m)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for Truncation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Truncation::Auto),
            t => t
                .parse()
                .map(Truncation::Fixed)
                .map_err(|_| Error::Parse(format!("bad truncation {t:?}"))),
        }
    }
}

/// Coefficient route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Family closed form where one exists (projection for polynomial kernels).
    Closed,
    Projection,
    Quadrature,
}

impl FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed" => Ok(Route::Closed),
            "projection" => Ok(Route::Projection),
            "quadrature" => Ok(Route::Quadrature),
            t => Err(Error::Parse(format!("unknown route {t:?}"))),
        }
    }
}

/// Gauss–Legendre oracle settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    /// Nodes per panel.
    pub order: usize,
    /// Largest change between two panel doublings that counts as converged.
    pub tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            order: 8,
            tol: 1e-11,
            max_nodes: 1 << 20,
        }
    }
}

/// Settings shared by the coefficient routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoeffOptions {
    /// Target tail mass for automatic truncation.
    pub tail_target: f64,
    /// First `M` tried by automatic truncation.
    pub auto_start: usize,
    /// Largest `M` automatic truncation may pick.
    pub auto_max: usize,
    /// Relative tolerance for hypergeometric and projection series.
    pub series_tol: f64,
    pub quad: QuadSpec,
}

impl Default for CoeffOptions {
    fn default() -> Self {
        Self {
            tail_target: 1e-8,
            auto_start: 64,
            auto_max: 4096,
            series_tol: 1e-14,
            quad: QuadSpec::default(),
        }
    }
}

/// `Σ_{k≥0} (n+k)^{−p}` for `p > 1`, `n ≥ 1` (Euler–Maclaurin).
pub(crate) fn hurwitz_zeta<T: Real>(p: T, n: T) -> T {
    let one = T::one();
    let lead = n.powf(one - p) / (p - one)
        + n.powf(-p) * T::lit(0.5)
        + p * n.powf(-p - one) / T::lit(12.0);
    lead - p * (p + one) * (p + T::lit(2.0)) * n.powf(-p - T::lit(3.0)) / T::lit(720.0)
}

/// Estimated `Σ_{m>M} b_m` for `b_m ≈ C (m+s)^{−p}`: `p` from the decay law,
/// the shift `s` fitted through `b_{M/2}` and `b_M`.
pub fn decay_tail<T: Real>(coeffs: &[T], p: T) -> T {
    let big_m = coeffs.len() - 1;
    let b_last = coeffs[big_m];
    if b_last <= T::zero() {
        return T::zero();
    }
    let mf = T::of(big_m);
    let mut shift = T::one();
    if big_m >= 16 {
        let half = big_m / 2;
        let b_half = coeffs[half];
        if b_half > b_last {
            // (M+s)/(M/2+s) = ρ  ⇒  s = (ρ M/2 − M)/(1 − ρ)
            let rho = (b_half / b_last).powf(p.recip());
            let h = T::of(half);
            let s = (rho * h - mf) / (T::one() - rho);
            if s > -h && s < T::lit(4.0) * mf {
                shift = s;
            }
        }
    }
    b_last * (mf + shift).powf(p) * hurwitz_zeta(p, mf + T::one() + shift)
}

/// `1 − Σ b_m` for a unit-mass sequence, zero when only rounding is left.
pub(crate) fn mass_defect<T: Real>(coeffs: &[T]) -> T {
    let kept: Compensated<T> = coeffs.iter().copied().collect();
    let defect = T::one() - kept.value();
    let slack = T::epsilon() * T::of(64 * (coeffs.len() + 1));
    if defect <= slack {
        T::zero()
    } else {
        defect
    }
}

/// Builds `b_0..b_M` by calling `range(lo, hi)` for successive blocks,
/// growing `M` until the decay-law tail is below target when `Auto`.
///
/// The returned tail is the mass defect `1 − Σ b_m` of the unit-mass
/// sequence; a note is attached when the decay law disagrees with it by more
/// than a factor of two.
pub(crate) fn assemble<T: Real>(
    truncation: Truncation,
    decay: Option<T>,
    opts: &CoeffOptions,
    mut range: impl FnMut(usize, usize) -> Result<Vec<T>>,
) -> Result<(Vec<T>, T, Option<String>)> {
    let tail_of = |c: &[T]| decay.map_or_else(T::zero, |p| decay_tail(c, p));
    let mut m = match truncation {
        Truncation::Fixed(m) => m,
        Truncation::Auto => opts.auto_start.min(opts.auto_max),
    };
    let mut coeffs = range(0, m)?;
    let mut tail = tail_of(&coeffs);
    let mut note = None;
    if let (Truncation::Auto, Some(p)) = (truncation, decay) {
        let target = T::lit(opts.tail_target);
        while tail > target {
            if m >= opts.auto_max {
                let n = format!(
                    "automatic truncation capped at M = {m}; tail estimate {:e}",
                    tail.to_f()
                );
                log::warn!("{n}");
                note = Some(n);
                break;
            }
            let grow = (tail / target).powf((p - T::one()).recip()).to_f();
            let next = ((m as f64 * grow * 1.05).ceil() as usize + 1).clamp(m + 1, opts.auto_max);
            coeffs.extend(range(m + 1, next)?);
            m = next;
            tail = tail_of(&coeffs);
        }
    }
    let defect = mass_defect(&coeffs);
    let two = T::lit(2.0);
    if decay.is_some() && defect > T::lit(1e-12) && (tail > two * defect || defect > two * tail) {
        let n = format!(
            "decay-law tail {:e} disagrees with the mass defect {:e}",
            tail.to_f(),
            defect.to_f()
        );
        log::warn!("{n}");
        note = Some(match note {
            Some(prev) => format!("{prev}; {n}"),
            None => n,
        });
    }
    Ok((coeffs, defect, note))
}

/// Coefficients of `k` on `S^d` by the chosen route.
///
/// `Closed` uses the family closed form, falling back to quadrature where the
/// closed form does not apply; `Projection` is available for kernels with a
/// Hilbert-sphere expansion (F-family, custom power series).
pub fn schoenberg_coeffs<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    truncation: Truncation,
    route: Route,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    k.check_dimension(d)?;
    match (route, k) {
        (Route::Quadrature, _) => quadrature_coeffs(k, d, truncation, opts),
        (Route::Closed, IsotropicKernel::Matern { nu, alpha }) => {
            matern_coeffs(*nu, *alpha, d, truncation, opts)
        }
        (Route::Closed, IsotropicKernel::FFamily { tau, alpha, nu }) => {
            ffamily_coeffs(*tau, *alpha, *nu, d, truncation, opts)
        }
        (Route::Closed, IsotropicKernel::GeneralisedWendland { nu, alpha, eps }) => {
            wendland_coeffs(*nu, *alpha, *eps, d, truncation, opts)
        }
        (Route::Closed | Route::Projection, IsotropicKernel::Custom { cos_power }) => {
            let src = SchoenbergSequence::new(
                Dim::Infinite,
                cos_power.clone(),
                T::zero(),
                Provenance::ClosedForm,
            )?;
            project_to_sphere(&src, d, truncation, opts)
        }
        (Route::Projection, IsotropicKernel::FFamily { tau, alpha, nu }) => project_to_sphere(
            &FFamilyHilbert::new(*tau, *alpha, *nu)?,
            d,
            truncation,
            opts,
        ),
        (Route::Projection, other) => Err(Error::Unsupported(format!(
            "no Hilbert-sphere expansion for the {:?} family; use the closed or quadrature route",
            other.family()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dim(0, 5).unwrap(), 1);
        assert_eq!(harmonic_dim(1, 2).unwrap(), 3);
        assert_eq!(harmonic_dim(2, 2).unwrap(), 5);
        assert_eq!(harmonic_dim(7, 1).unwrap(), 2);
        // S^3: (m+1)²
        assert_eq!(harmonic_dim(9, 3).unwrap(), 100);
        // direct formula (2m+d−1)(m+d−2)!/((d−1)! m!) in exact rationals
        let fact = |n: u128| (1..=n).product::<u128>();
        for d in 2..12u128 {
            for m in 1..20u128 {
                let want = (2 * m + d - 1) * fact(m + d - 2) / (fact(d - 1) * fact(m));
                assert_eq!(
                    harmonic_dim(m as usize, d as usize).unwrap(),
                    want,
                    "m={m} d={d}"
                );
            }
        }
        assert!(harmonic_dim(1000, 40).is_err());
        let approx: f64 = harmonic_dim_real(1000, 40);
        let ln = ln_harmonic_dim::<f64>(1000, 40);
        assert!((approx.ln() - ln).abs() < 1e-12);
    }

    #[test]
    fn fourier_conversion() {
        let s = SchoenbergSequence::new(
            Dim::Finite(2),
            vec![1.0f64, 0.0],
            0.0,
            Provenance::ClosedForm,
        )
        .unwrap();
        let f = fourier_from_schoenberg(&s).unwrap();
        assert!((f.coeffs()[0] - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert_eq!(f.coeffs()[1], 0.0);
        let inf = SchoenbergSequence::<f64>::delta(Dim::Infinite, 0);
        assert!(fourier_from_schoenberg(&inf).is_err());
    }

    #[test]
    fn negative_dust_is_clamped() {
        let s = SchoenbergSequence::new(
            Dim::Finite(2),
            vec![1.0f64, -1e-12],
            0.0,
            Provenance::Quadrature,
        )
        .unwrap();
        assert_eq!(s.coeffs()[1], 0.0);
        assert_eq!(s.clamped(), 1);
        assert!(!s.strictly_positive());
        let e = SchoenbergSequence::new(
            Dim::Finite(2),
            vec![1.0f64, -1e-6],
            0.0,
            Provenance::Quadrature,
        );
        assert!(matches!(e, Err(Error::NegativeCoefficient { m: 1, .. })));
    }

    #[test]
    fn reconstruction_of_deltas() {
        let s = SchoenbergSequence::<f64>::delta(Dim::Infinite, 1);
        assert!((reconstruct_kernel(&s, 0.7) - 0.7f64.cos()).abs() < 1e-16);
        let s = SchoenbergSequence::<f64>::delta(Dim::Finite(2), 2);
        let x = 0.7f64.cos();
        assert!((reconstruct_kernel(&s, 0.7) - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
        let s = SchoenbergSequence::<f64>::delta(Dim::Finite(1), 3);
        assert!((reconstruct_kernel(&s, 0.7) - 2.1f64.cos()).abs() < 1e-15);
        let s = SchoenbergSequence::new(
            Dim::Finite(3),
            vec![0.5f64, 0.25, 0.125],
            0.0,
            Provenance::ClosedForm,
        )
        .unwrap();
        assert!((reconstruct_kernel(&s, 0.0) - 0.875).abs() < 1e-16);
    }

    #[test]
    fn tail_of_pure_power_law() {
        // b_m = (m+3)^{-4}: the fitted shift recovers the tail almost exactly
        let p = 4.0f64;
        let c: Vec<f64> = (0..=60).map(|m| (m as f64 + 3.0).powf(-p)).collect();
        let exact: f64 = (61..2_000_000).map(|m| (m as f64 + 3.0).powf(-p)).sum();
        let est = decay_tail(&c, p);
        assert!(((est - exact) / exact).abs() < 1e-6, "{est} vs {exact}");
    }

    #[test]
    fn serde_forms() {
        assert_eq!(serde_json::to_string(&Dim::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<Dim>("3").unwrap(), Dim::Finite(3));
        assert!(serde_json::from_str::<Dim>("0").is_err());
        assert_eq!(
            serde_json::from_str::<Truncation>("\"auto\"").unwrap(),
            Truncation::Auto
        );
        assert_eq!(
            serde_json::from_str::<Truncation>("40").unwrap(),
            Truncation::Fixed(40)
        );
        assert_eq!("quadrature".parse::<Route>().unwrap(), Route::Quadrature);
    }

    proptest! {
        #[test]
        fn fourier_round_trip(coeffs in prop::collection::vec(0.0f64..1.0, 1..40), d in 1usize..9) {
            let s = SchoenbergSequence::new(Dim::Finite(d), coeffs.clone(), 0.0, Provenance::ClosedForm).unwrap();
            let back = schoenberg_from_fourier(&fourier_from_schoenberg(&s).unwrap(), Provenance::ClosedForm, 0.0).unwrap();
            for (a, b) in coeffs.iter().zip(back.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-14 * a.abs());
            }
        }

        #[test]
        fn fourier_is_linear(a in prop::collection::vec(0.0f64..1.0, 8), b in prop::collection::vec(0.0f64..1.0, 8), t in 0.0f64..3.0) {
            let mk = |v: Vec<f64>| SchoenbergSequence::new(Dim::Finite(3), v, 0.0, Provenance::ClosedForm).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * y).collect();
            let fa = fourier_from_schoenberg(&mk(a)).unwrap();
            let fb = fourier_from_schoenberg(&mk(b)).unwrap();
            let fs = fourier_from_schoenberg(&mk(sum)).unwrap();
            for m in 0..8 {
                let want = fa.coeffs()[m] + t * fb.coeffs()[m];
                prop_assert!((fs.coeffs()[m] - want).abs() <= 1e-13 * want.abs().max(1.0));
            }
        }
    }
}
