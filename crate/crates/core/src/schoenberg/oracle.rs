//! Direct Gegenbauer projection by composite Gauss–Legendre quadrature.

use super::{
    assemble, harmonic_dim_real, CoeffOptions, Dim, Provenance, QuadSpec, SchoenbergSequence,
    Truncation,
};
use crate::error::{Error, Result};
use crate::kernels::{Angle, IsotropicKernel};
use crate::quadrature::GaussLegendre;
use crate::real::{Compensated, Real};
use crate::specfun::{gegenbauer_ratios_into, ln_gamma};

/// Geometric refinement levels next to a singular point.
const GRADING_LEVELS: usize = 24;

/// `b_{m,d} = N_{m,d} ∫₀^π ψ(θ) R_m(cos θ) sin^{d−1}θ dθ / ∫₀^π sin^{d−1}θ dθ`
/// for `m = 0..=M`, doubling the panel count until the largest change is
/// below `opts.quad.tol`.
pub fn quadrature_coeffs<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    truncation: Truncation,
    opts: &CoeffOptions,
) -> Result<SchoenbergSequence<T>> {
    k.check_dimension(d)?;
    let (coeffs, tail, note) = assemble(truncation, k.decay_exponent(), opts, |lo, hi| {
        project_range(k, d, lo, hi, &opts.quad)
    })?;
    let coeffs = match (k, truncation) {
        // polynomial kernels: auto truncation stops at the degree
        (IsotropicKernel::Custom { cos_power }, Truncation::Auto) => {
            let deg = cos_power.len() - 1;
            if coeffs.len() > deg + 1 {
                coeffs[..=deg].to_vec()
            } else {
                project_range(k, d, 0, deg, &opts.quad)?
            }
        }
        _ => coeffs,
    };
    let tail = match k {
        IsotropicKernel::Custom { .. } => {
            let kept: Compensated<T> = coeffs.iter().copied().collect();
            (T::one() - kept.value()).max(T::zero())
        }
        _ => tail,
    };
    let seq = SchoenbergSequence::new(Dim::Finite(d), coeffs, tail, Provenance::Quadrature)?;
    Ok(match note {
        Some(n) => seq.with_note(n),
        None => seq,
    })
}

/// Panel breakpoints: uniform panels plus geometric grading towards `θ = 0`
/// and both sides of a support edge.
fn breakpoints<T: Real>(panels: usize, edge: Option<T>) -> Vec<T> {
    let pi = T::PI();
    let h = pi / T::of(panels);
    let mut pts: Vec<T> = (0..=panels).map(|i| h * T::of(i)).collect();
    let grade = |pts: &mut Vec<T>, centre: T, dir: T| {
        let mut step = h;
        for _ in 0..GRADING_LEVELS {
            step = step * T::lit(0.5);
            let p = centre + dir * step;
            if p > T::zero() && p < pi {
                pts.push(p);
            }
        }
    };
    grade(&mut pts, T::zero(), T::one());
    if let Some(e) = edge {
        pts.push(e);
        grade(&mut pts, e, -T::one());
        grade(&mut pts, e, T::one());
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * T::lit(4.0));
    pts
}

/// Geodesic radius of the Wendland support, when it is less than `π`.
fn support_edge<T: Real>(k: &IsotropicKernel<T>) -> Option<T> {
    match k {
        IsotropicKernel::GeneralisedWendland { eps, .. } => {
            let s = (T::lit(0.5) / *eps).min(T::one());
            (s < T::one()).then(|| T::lit(2.0) * s.asin())
        }
        _ => None,
    }
}

/// One pass: unnormalized `∫ ψ R_m sin^{d−1}` for `m ∈ [lo, hi]`.
fn integrate_once<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    lo: usize,
    hi: usize,
    pts: &[T],
    gl: &GaussLegendre<T>,
) -> Result<Vec<T>> {
    let lambda = T::of(d - 1) * T::lit(0.5);
    let mut acc = vec![Compensated::<T>::new(); hi - lo + 1];
    let mut ratios = Vec::with_capacity(hi + 1);
    for w in pts.windows(2) {
        for (theta, weight) in gl.mapped(w[0], w[1]) {
            let psi = k.eval_angle(Angle::from_geodesic(theta))?;
            if !psi.is_finite() {
                return Err(Error::Domain {
                    function: "quadrature_coeffs",
                    at: theta.to_f(),
                    reason: "kernel is not finite",
                });
            }
            let f = weight * psi * theta.sin().powi(d as i32 - 1);
            if f == T::zero() {
                continue;
            }
            gegenbauer_ratios_into(hi, lambda, theta.cos(), &mut ratios);
            for (a, r) in acc.iter_mut().zip(&ratios[lo..]) {
                a.add(f * *r);
            }
        }
    }
    Ok(acc.iter().map(Compensated::value).collect())
}

/// Coefficients `b_{lo..=hi, d}` with the doubling convergence loop.
pub(crate) fn project_range<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    lo: usize,
    hi: usize,
    spec: &QuadSpec,
) -> Result<Vec<T>> {
    let gl = GaussLegendre::<T>::new(spec.order.max(2));
    let edge = support_edge(k);
    // N_{m,d} / ∫₀^π sin^{d−1} with ∫₀^π sin^{d−1} = √π Γ(d/2) / Γ((d+1)/2)
    let half = T::lit(0.5);
    let ln_s = half * T::PI().ln() + ln_gamma(T::of(d) * half)? - ln_gamma(T::of(d + 1) * half)?;
    let scale: Vec<T> = (lo..=hi)
        .map(|m| harmonic_dim_real::<T>(m, d) / ln_s.exp())
        .collect();
    let mut panels = 16 * (hi + 4);
    let mut prev: Option<Vec<T>> = None;
    let tol = T::lit(spec.tol);
    loop {
        let pts = breakpoints(panels, edge);
        let nodes = (pts.len() - 1) * gl.order();
        let raw = integrate_once(k, d, lo, hi, &pts, &gl)?;
        let cur: Vec<T> = raw.iter().zip(&scale).map(|(v, s)| *v * *s).collect();
        if let Some(p) = &prev {
            let change = p
                .iter()
                .zip(&cur)
                .map(|(a, b)| (*a - *b).abs())
                .fold(T::zero(), T::max);
            if change < tol {
                return Ok(cur);
            }
            if 2 * nodes > spec.max_nodes {
                return Err(Error::Quadrature {
                    nodes,
                    change: change.to_f(),
                });
            }
        }
        prev = Some(cur);
        panels *= 2;
    }
}
