//! Geodesically isotropic kernels `ψ(θ)` on the unit sphere `S^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};
use crate::quadrature::tanh_sinh;
use crate::real::Real;
use crate::specfun::{bessel_k, hyp2f1, ln_beta, ln_gamma};

/// Family tag of an [`IsotropicKernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Matern,
    FFamily,
    GeneralisedWendland,
    Custom,
}

/// A unit-variance isotropic kernel, `ψ(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsotropicKernel<T> {
    /// Matérn radial function restricted through the chordal distance.
    Matern { nu: T, alpha: T },
    /// `B(α,ν+τ)/B(α,ν) · ₂F₁(τ, α; α+ν+τ; cos θ)`.
    #[serde(rename = "ffamily", alias = "f_family")]
    FFamily { tau: T, alpha: T, nu: T },
    /// Generalised Wendland radial function restricted through the chordal
    /// distance; support `r ≤ 1/ε`.
    #[serde(rename = "wendland", alias = "generalised_wendland")]
    GeneralisedWendland { nu: T, alpha: T, eps: T },
    /// `ψ(θ) = Σ_k c_k cos^k θ` with `c_k ≥ 0` and `Σ c_k = 1`.
    Custom { cos_power: Vec<T> },
}

impl<T: Real> IsotropicKernel<T> {
    pub fn matern(nu: T, alpha: T) -> Result<Self> {
        let k = Self::Matern { nu, alpha };
        k.validate()?;
        Ok(k)
    }

    pub fn ffamily(tau: T, alpha: T, nu: T) -> Result<Self> {
        let k = Self::FFamily { tau, alpha, nu };
        k.validate()?;
        Ok(k)
    }

    pub fn wendland(nu: T, alpha: T, eps: T) -> Result<Self> {
        let k = Self::GeneralisedWendland { nu, alpha, eps };
        k.validate()?;
        Ok(k)
    }

    pub fn custom(cos_power: Vec<T>) -> Result<Self> {
        let k = Self::Custom { cos_power };
        k.validate()?;
        Ok(k)
    }

    /// `ψ ≡ 1`.
    pub fn constant() -> Self {
        Self::Custom {
            cos_power: vec![T::one()],
        }
    }

    /// `ψ(θ) = cos^n θ`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![T::zero(); n + 1];
        c[n] = T::one();
        Self::Custom { cos_power: c }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Matern { .. } => Family::Matern,
            Self::FFamily { .. } => Family::FFamily,
            Self::GeneralisedWendland { .. } => Family::GeneralisedWendland,
            Self::Custom { .. } => Family::Custom,
        }
    }

    /// Parameter invariants that do not depend on the sphere dimension.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| -> Result<()> {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, v.to_f(), "must be positive and finite"))
            }
        };
        match self {
            Self::Matern { nu, alpha } => {
                positive("nu", *nu)?;
                positive("alpha", *alpha)
            }
            Self::FFamily { tau, alpha, nu } => {
                positive("tau", *tau)?;
                positive("alpha", *alpha)?;
                positive("nu", *nu)
            }
            Self::GeneralisedWendland { nu, alpha, eps } => {
                positive("nu", *nu)?;
                positive("alpha", *alpha)?;
                positive("eps", *eps)
            }
            Self::Custom { cos_power } => {
                if cos_power.is_empty() {
                    return Err(Error::param(
                        "cos_power",
                        0.0,
                        "needs at least one coefficient",
                    ));
                }
                if let Some(c) = cos_power
                    .iter()
                    .find(|c| !(**c >= T::zero()) || !c.is_finite())
                {
                    return Err(Error::param(
                        "cos_power",
                        c.to_f(),
                        "coefficients must be non-negative",
                    ));
                }
                let total: T = cos_power.iter().copied().sum();
                if (total - T::one()).abs() > T::lit(1e-10) {
                    return Err(Error::param(
                        "cos_power",
                        total.to_f(),
                        "coefficients must sum to 1",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Checks that the kernel is positive definite on `S^d`.
    pub fn check_dimension(&self, d: usize) -> Result<()> {
        self.validate()?;
        if d == 0 {
            return Err(Error::param(
                "dim",
                0.0,
                "sphere dimension must be at least 1",
            ));
        }
        if let Self::GeneralisedWendland { nu, alpha, .. } = self {
            let need = T::of(d + 2) / T::lit(2.0) + *alpha;
            if *nu < need {
                return Err(Error::param(
                    "nu",
                    nu.to_f(),
                    format!(
                        "Wendland needs nu >= (d+2)/2 + alpha = {} on S^{d}",
                        need.to_f()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Exponent `p` of the coefficient decay `b_{m,d} ≍ m^{−p}`, independent
    /// of `d`. `None` for polynomial kernels, whose sequences are finite.
    pub fn decay_exponent(&self) -> Option<T> {
        let two = T::lit(2.0);
        match self {
            Self::Matern { nu, .. } | Self::FFamily { nu, .. } => Some(T::one() + two * *nu),
            Self::GeneralisedWendland { alpha, .. } => Some(two + two * *alpha),
            Self::Custom { .. } => None,
        }
    }

    /// `ψ(θ)` for `θ ∈ [0, π]`.
    pub fn eval(&self, theta: T) -> Result<T> {
        if !(theta >= T::zero() && theta <= T::PI() + T::lit(1e-12)) {
            return Err(Error::Domain {
                function: "eval_kernel",
                at: theta.to_f(),
                reason: "theta must lie in [0, pi]",
            });
        }
        self.eval_angle(Angle::from_geodesic(theta.min(T::PI())))
    }

    /// `ψ(θ(x, y))`, using the chordal distance computed from the points.
    pub fn eval_between(&self, x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<T> {
        self.eval_angle(Angle::between(x, y)?)
    }

    pub(crate) fn eval_angle(&self, a: Angle<T>) -> Result<T> {
        match self {
            Self::Matern { nu, alpha } => {
                matern_radial(*nu, *alpha, a.chord).context("Matern kernel")
            }
            // ψ(0) = 1 exactly, so coincident points give identical Gram entries
            Self::FFamily { .. } if a.chord == T::zero() => Ok(T::one()),
            Self::FFamily { tau, alpha, nu } => {
                ffamily(*tau, *alpha, *nu, a.cos).context("F-family kernel")
            }
            Self::GeneralisedWendland { nu, alpha, eps } => {
                wendland_radial(*nu, *alpha, *eps * a.chord).context("Wendland kernel")
            }
            Self::Custom { cos_power } => Ok(cos_power
                .iter()
                .rev()
                .fold(T::zero(), |acc, c| acc * a.cos + *c)),
        }
    }
}

/// `ψ(θ)`; see [`IsotropicKernel::eval`].
pub fn eval_kernel<T: Real>(k: &IsotropicKernel<T>, theta: T) -> Result<T> {
    k.eval(theta)
}

/// An angle carried in the two forms the kernels need.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Angle<T> {
    pub cos: T,
    pub chord: T,
}

impl<T: Real> Angle<T> {
    pub fn from_geodesic(theta: T) -> Self {
        Self {
            cos: theta.cos(),
            chord: chordal_from_geodesic(theta),
        }
    }

    pub fn between(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<Self> {
        check_same_dim(x, y)?;
        let mut dot = T::zero();
        let mut diff = T::zero();
        for (a, b) in x.coords.iter().zip(&y.coords) {
            dot = dot + *a * *b;
            diff = diff + (*a - *b) * (*a - *b);
        }
        Ok(Self {
            cos: dot.max(-T::one()).min(T::one()),
            chord: diff.sqrt().min(T::lit(2.0)),
        })
    }
}

fn matern_radial<T: Real>(nu: T, alpha: T, r: T) -> Result<T> {
    let x = r / alpha;
    if x == T::zero() {
        return Ok(T::one());
    }
    let k = bessel_k(nu, x)?;
    if k == T::zero() {
        return Ok(T::zero());
    }
    let ln = (T::one() - nu) * T::LN_2() - ln_gamma(nu)? + nu * x.ln() + k.ln();
    Ok(ln.exp().min(T::one()))
}

fn ffamily<T: Real>(tau: T, alpha: T, nu: T, z: T) -> Result<T> {
    let pre = (ln_beta(alpha, nu + tau)? - ln_beta(alpha, nu)?).exp();
    Ok(pre * hyp2f1(tau, alpha, alpha + nu + tau, z)?)
}

/// Generalised Wendland function of `s = εr`.
fn wendland_radial<T: Real>(nu: T, alpha: T, s: T) -> Result<T> {
    if s >= T::one() {
        return Ok(T::zero());
    }
    if s == T::zero() {
        return Ok(T::one());
    }
    if alpha == T::one() {
        return Ok(wendland_alpha_one(nu, s));
    }
    let w = T::one() - s * s;
    if w <= T::lit(0.5) {
        wendland_hypergeometric(nu, alpha, s)
    } else {
        wendland_integral(nu, alpha, s)
    }
}

/// `(1−s)^{ν+1}(1+(ν+1)s)`.
fn wendland_alpha_one<T: Real>(nu: T, s: T) -> T {
    let n1 = nu + T::one();
    (T::one() - s).powf(n1) * (T::one() + n1 * s)
}

/// `(1/B(2α,ν+1)) ∫_s^1 (1−t)^ν t (t²−s²)^{α−1} dt`.
fn wendland_integral<T: Real>(nu: T, alpha: T, s: T) -> Result<T> {
    let am1 = alpha - T::one();
    let r = tanh_sinh(s, T::one(), T::lit(1e-14), |t, t_minus_s, one_minus_t| {
        one_minus_t.powf(nu) * t * (t_minus_s * (t + s)).powf(am1)
    });
    Ok(r.value / (ln_beta(alpha + alpha, nu + T::one())?).exp())
}

/// `B(α,ν+1)/(2^{ν+1}B(2α,ν+1)) (1−s²)^{ν+α} ₂F₁(ν/2, (ν+1)/2; ν+α+1; 1−s²)`.
fn wendland_hypergeometric<T: Real>(nu: T, alpha: T, s: T) -> Result<T> {
    let half = T::lit(0.5);
    let w = T::one() - s * s;
    let ln_pre = ln_beta(alpha, nu + T::one())?
        - (nu + T::one()) * T::LN_2()
        - ln_beta(alpha + alpha, nu + T::one())?;
    let f = hyp2f1(nu * half, (nu + T::one()) * half, nu + alpha + T::one(), w)?;
    Ok((ln_pre + (nu + alpha) * w.ln()).exp() * f)
}

/// `d`-dimensional radial Fourier transform of the Matérn function,
/// `2^{d/2} Γ(ν+d/2) / (α^{2ν} Γ(ν)) · (1/α² + r²)^{−(ν+d/2)}`.
pub fn matern_radial_ft<T: Real>(nu: T, alpha: T, dim: usize, r: T) -> Result<T> {
    if !(nu > T::zero() && alpha > T::zero()) {
        return Err(Error::param(
            "nu/alpha",
            nu.min(alpha).to_f(),
            "must be positive",
        ));
    }
    let h = T::of(dim) * T::lit(0.5);
    let ln = h * T::LN_2() + ln_gamma(nu + h)?
        - (nu + nu) * alpha.ln()
        - ln_gamma(nu)?
        - (nu + h) * ((alpha * alpha).recip() + r * r).ln();
    Ok(ln.exp())
}

/// A point on `S^d` stored as a unit vector in `R^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real")]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::param(
                "coords",
                coords.len() as f64,
                "a sphere point needs at least 2 coordinates",
            ));
        }
        let norm = coords.iter().map(|c| *c * *c).sum::<T>().sqrt();
        if !(norm > T::zero() && norm.is_finite()) {
            return Err(Error::param("coords", norm.to_f(), "cannot normalize"));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// `(0, …, 0, 1)` on `S^d`.
    pub fn north_pole(d: usize) -> Self {
        let mut coords = vec![T::zero(); d + 1];
        coords[d] = T::one();
        Self { coords }
    }

    /// Sphere dimension `d`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

impl<T: Real> TryFrom<Vec<T>> for SpherePoint<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<SpherePoint<T>> for Vec<T> {
    fn from(p: SpherePoint<T>) -> Vec<T> {
        p.coords
    }
}

fn check_same_dim<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<()> {
    if x.coords.len() != y.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// Great-circle distance in `[0, π]`, computed as `2 atan2(|x−y|, |x+y|)`
/// which keeps full relative accuracy near `0` and `π`.
pub fn geodesic_distance<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<T> {
    check_same_dim(x, y)?;
    let (mut minus, mut plus) = (T::zero(), T::zero());
    for (a, b) in x.coords.iter().zip(&y.coords) {
        minus = minus + (*a - *b) * (*a - *b);
        plus = plus + (*a + *b) * (*a + *b);
    }
    Ok((minus.sqrt().atan2(plus.sqrt()) * T::lit(2.0)).min(T::PI()))
}

/// `√(2 − 2 cos θ) = 2 sin(θ/2)`.
pub fn chordal_from_geodesic<T: Real>(theta: T) -> T {
    T::lit(2.0) * (theta * T::lit(0.5)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(v: &[f64]) -> SpherePoint<f64> {
        SpherePoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn geodesic_special_angles() {
        let n = p(&[0.0, 0.0, 1.0]);
        assert_eq!(geodesic_distance(&n, &n).unwrap(), 0.0);
        assert!((geodesic_distance(&n, &p(&[0.0, 0.0, -1.0])).unwrap() - PI).abs() < 1e-15);
        assert!((geodesic_distance(&n, &p(&[1.0, 0.0, 0.0])).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(geodesic_distance(&n, &p(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn chordal_special_angles() {
        assert_eq!(chordal_from_geodesic(0.0f64), 0.0);
        assert!((chordal_from_geodesic(PI) - 2.0).abs() < 1e-15);
        assert!((chordal_from_geodesic(PI / 2.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn points_are_normalized() {
        let x = p(&[3.0, 4.0]);
        assert!((x.coords()[0] - 0.6).abs() < 1e-16);
        assert_eq!(x.dim(), 1);
        assert!(SpherePoint::new(vec![0.0f64, 0.0]).is_err());
    }

    #[test]
    fn matern_half_collapses_to_exponential() {
        let k = IsotropicKernel::matern(0.5f64, 0.8).unwrap();
        for i in 0..=20 {
            let t = PI * i as f64 / 20.0;
            let want = (-(2.0 - 2.0 * t.cos()).sqrt() / 0.8).exp();
            assert!((k.eval(t).unwrap() - want).abs() < 1e-13, "theta = {t}");
        }
    }

    #[test]
    fn matern_three_halves_closed_form() {
        let k = IsotropicKernel::matern(1.5f64, 0.7).unwrap();
        for i in 0..=20 {
            let t = PI * i as f64 / 20.0;
            let x = chordal_from_geodesic(t) / 0.7;
            assert!((k.eval(t).unwrap() - (1.0 + x) * (-x).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn matern_is_monotone() {
        for &(nu, alpha) in &[(0.3, 0.5), (1.5, 0.7), (2.2, 1.3), (6.0, 0.2)] {
            let k = IsotropicKernel::matern(nu, alpha).unwrap();
            let mut prev = 1.0f64;
            for i in 0..=400 {
                let v = k.eval(PI * i as f64 / 400.0).unwrap();
                assert!(v <= prev + 1e-15, "nu = {nu}: {v} > {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn ffamily_unit_parameters() {
        // τ=α=ν=1: ψ(θ) = ((1−z)ln(1−z) + z)/z², z = cos θ
        let k = IsotropicKernel::ffamily(1.0f64, 1.0, 1.0).unwrap();
        assert!((k.eval(0.0).unwrap() - 1.0).abs() < 1e-12);
        for i in 1..=40 {
            let t = PI * i as f64 / 40.0;
            let z = t.cos();
            if z.abs() < 1e-3 {
                continue;
            }
            let want = ((1.0 - z) * (-z).ln_1p() + z) / (z * z);
            assert!((k.eval(t).unwrap() - want).abs() < 1e-12, "theta = {t}");
        }
    }

    #[test]
    fn wendland_routes_agree() {
        // α = 1 closed form against the defining integral
        for &s in &[0.01, 0.2, 0.5, 0.8, 0.99] {
            let a = wendland_alpha_one(4.0f64, s);
            let b = wendland_integral(4.0f64, 1.0, s).unwrap();
            assert!((a - b).abs() < 1e-13, "s = {s}: {a} vs {b}");
        }
        // integral against the ₂F₁ form, both routes on each side of the switch
        for &(nu, alpha) in &[(4.0f64, 1.5), (5.5, 0.5), (3.0, 2.25)] {
            for &s in &[0.3, 0.6, 0.7, 0.75, 0.9] {
                let a = wendland_integral(nu, alpha, s).unwrap();
                let b = wendland_hypergeometric(nu, alpha, s).unwrap();
                assert!(
                    (a - b).abs() < 1e-12,
                    "nu={nu} alpha={alpha} s={s}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn wendland_support() {
        let k = IsotropicKernel::wendland(4.0f64, 1.0, 0.75).unwrap();
        for i in 0..=200 {
            let t = PI * i as f64 / 200.0;
            if chordal_from_geodesic(t) >= 1.0 / 0.75 {
                assert_eq!(k.eval(t).unwrap(), 0.0);
            }
        }
        let k = IsotropicKernel::wendland(5.0f64, 1.5, 2.0).unwrap();
        assert_eq!(k.eval(PI).unwrap(), 0.0);
        assert!(k.eval(0.2).unwrap() > 0.0);
    }

    #[test]
    fn wendland_dimension_guard() {
        let k = IsotropicKernel::wendland(4.0f64, 1.0, 0.75).unwrap();
        assert!(k.check_dimension(3).is_ok());
        assert!(k.check_dimension(5).is_err());
    }

    #[test]
    fn custom_kernels() {
        let k = IsotropicKernel::<f64>::monomial(3);
        assert!((k.eval(0.4).unwrap() - 0.4f64.cos().powi(3)).abs() < 1e-15);
        assert!(IsotropicKernel::custom(vec![0.5f64, 0.6]).is_err());
        assert!(IsotropicKernel::custom(vec![1.5f64, -0.5]).is_err());
        assert_eq!(IsotropicKernel::<f64>::constant().eval(2.0).unwrap(), 1.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(IsotropicKernel::matern(0.0f64, 1.0).is_err());
        assert!(IsotropicKernel::ffamily(1.0f64, f64::NAN, 1.0).is_err());
        assert!(IsotropicKernel::matern(1.0f64, 1.0)
            .unwrap()
            .eval(4.0)
            .is_err());
    }

    #[test]
    fn radial_ft_values() {
        let at0 = matern_radial_ft(1.3f64, 0.6, 3, 0.0).unwrap();
        let want = 2f64.powf(1.5) * crate::specfun::gamma(2.8).unwrap() * 0.6f64.powi(3)
            / crate::specfun::gamma(1.3).unwrap();
        assert!((at0 / want - 1.0).abs() < 1e-13);
        assert!((matern_radial_ft(1.0f64, 1.0, 2, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn serde_shape() {
        let k: IsotropicKernel<f64> =
            serde_json::from_str(r#"{"family":"matern","nu":1.5,"alpha":0.7}"#).unwrap();
        assert_eq!(
            k,
            IsotropicKernel::Matern {
                nu: 1.5,
                alpha: 0.7
            }
        );
        let bad = serde_json::from_str::<IsotropicKernel<f64>>(
            r#"{"family":"matern","nu":1.5,"alpha":0.7,"x":1}"#,
        );
        assert!(bad.is_err());
        let w: IsotropicKernel<f64> =
            serde_json::from_str(r#"{"family":"wendland","nu":4,"alpha":1,"eps":0.75}"#).unwrap();
        assert_eq!(w.family(), Family::GeneralisedWendland);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn unit_at_origin(a in 0.1f64..4.0, b in 0.1f64..4.0, c in 0.1f64..4.0) {
            for k in [
                IsotropicKernel::matern(a, b).unwrap(),
                IsotropicKernel::ffamily(a, b, c).unwrap(),
                IsotropicKernel::wendland(c + 3.0, a, b).unwrap(),
            ] {
                let v = k.eval(0.0).unwrap();
                prop_assert!((v - 1.0).abs() < 1e-10, "{:?}: {}", k, v);
            }
        }

        #[test]
        fn bounded_by_one(a in 0.1f64..4.0, b in 0.1f64..4.0, c in 0.1f64..4.0, t in 0.0f64..PI) {
            for k in [
                IsotropicKernel::matern(a, b).unwrap(),
                IsotropicKernel::ffamily(a, b, c).unwrap(),
                IsotropicKernel::wendland(c + 3.0, a, b).unwrap(),
            ] {
                let v = k.eval(t).unwrap();
                prop_assert!(v.abs() <= 1.0 + 1e-12, "{:?} at {}: {}", k, t, v);
            }
        }

        #[test]
        fn geodesic_is_symmetric(x in prop::collection::vec(-1.0f64..1.0, 4), y in prop::collection::vec(-1.0f64..1.0, 4)) {
            prop_assume!(x.iter().any(|v| v.abs() > 1e-3) && y.iter().any(|v| v.abs() > 1e-3));
            let (x, y) = (p(&x), p(&y));
            let a = geodesic_distance(&x, &y).unwrap();
            let b = geodesic_distance(&y, &x).unwrap();
            prop_assert_eq!(a, b);
            let dot: f64 = x.coords().iter().zip(y.coords()).map(|(u, v)| u * v).sum();
            prop_assert!((a - dot.clamp(-1.0, 1.0).acos()).abs() < 1e-7);
        }
    }
}
