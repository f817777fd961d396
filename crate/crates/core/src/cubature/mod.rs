//! Point sets on `S^d`, Gram matrices, optimal cubature weights for the
//! uniform measure and worst-case errors (kernel discrepancies).

pub mod io;
mod linalg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use linalg::{condition_estimate, Cholesky, SymMatrix};

use crate::error::{Context, Error, Result};
use crate::kernels::{IsotropicKernel, SpherePoint};
use crate::real::{Compensated, Real};
use crate::schoenberg::{schoenberg_coeffs, CoeffOptions, Route, SchoenbergSequence, Truncation};
use crate::sobolev::fit_line;

/// Where the points of a rule came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Normalized standard Gaussian vectors from a ChaCha8 stream.
    UniformRandom {
        seed: u64,
    },
    /// Spherical Fibonacci lattice, `d = 2` only.
    Fibonacci,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Equal,
    Optimal,
}

/// Weighted point set `Σ wᵢ δ(xᵢ)` on `S^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CubatureRule<T> {
    points: Vec<SpherePoint<T>>,
    weights: Vec<T>,
    dim: usize,
    generator: Generator,
    weight_mode: WeightMode,
}

impl<T: Real> CubatureRule<T> {
    pub fn new(
        points: Vec<SpherePoint<T>>,
        weights: Vec<T>,
        generator: Generator,
        weight_mode: WeightMode,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("n", 0.0, "a rule needs at least one point"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if generator == Generator::Fibonacci && dim != 2 {
            return Err(Error::param(
                "dim",
                dim as f64,
                "the Fibonacci lattice lives on S^2",
            ));
        }
        Ok(Self {
            points,
            weights,
            dim,
            generator,
            weight_mode,
        })
    }

    /// Weights `1/n`.
    pub fn equal_weights(points: Vec<SpherePoint<T>>, generator: Generator) -> Result<Self> {
        let w = T::one() / T::of(points.len().max(1));
        let weights = vec![w; points.len()];
        Self::new(points, weights, generator, WeightMode::Equal)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    /// Same points, new weights.
    pub fn with_weights(&self, weights: Vec<T>, mode: WeightMode) -> Result<Self> {
        Self::new(self.points.clone(), weights, self.generator, mode)
    }
}

/// `n` points on `S^d`.
pub fn generate_points<T: Real>(
    generator: Generator,
    n: usize,
    d: usize,
) -> Result<Vec<SpherePoint<T>>> {
    if n == 0 || d == 0 {
        return Err(Error::param(
            "n",
            n as f64,
            "need n >= 1 points on S^d with d >= 1",
        ));
    }
    match generator {
        Generator::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| loop {
                    let v: Vec<T> = (0..=d)
                        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                        .collect();
                    // a zero vector has probability zero but cannot be normalized
                    if let Ok(p) = SpherePoint::new(v) {
                        break Ok(p);
                    }
                })
                .collect()
        }
        Generator::Fibonacci => {
            if d != 2 {
                return Err(Error::param(
                    "dim",
                    d as f64,
                    "the Fibonacci lattice lives on S^2",
                ));
            }
            if n == 1 {
                return Ok(vec![SpherePoint::north_pole(2)]);
            }
            // golden angle π(3 − √5), equal-area latitudes z = 1 − (2i+1)/n
            let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
            let nf = T::of(n);
            (0..n)
                .map(|i| {
                    let z = T::one() - T::of(2 * i + 1) / nf;
                    let r = (T::one() - z * z).max(T::zero()).sqrt();
                    let lon = golden * T::of(i);
                    SpherePoint::new(vec![r * lon.cos(), r * lon.sin(), z])
                })
                .collect()
        }
        Generator::UserSupplied => Err(Error::Unsupported(
            "user-supplied points are read from a file, not generated".into(),
        )),
    }
}

/// `G_{ij} = ψ(θ(xᵢ, xⱼ))`, assembled in parallel over rows.
pub fn gram_matrix<T: Real>(
    k: &IsotropicKernel<T>,
    pts: &[SpherePoint<T>],
) -> Result<SymMatrix<T>> {
    if let Some(p) = pts.first() {
        k.check_dimension(p.dim())?;
    }
    let rows = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| {
                    if i == j {
                        Ok(T::one())
                    } else {
                        k.eval_between(&pts[i], &pts[j])
                    }
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()
        .context("Gram matrix")?;
    Ok(SymMatrix::from_lower_rows(rows))
}

fn cross_gram<T: Real>(
    k: &IsotropicKernel<T>,
    a: &[SpherePoint<T>],
    b: &[SpherePoint<T>],
) -> Result<Vec<Vec<T>>> {
    a.par_iter()
        .map(|x| b.iter().map(|y| k.eval_between(x, y)).collect())
        .collect()
}

/// Settings for the cubature routines.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureOptions {
    pub coeffs: CoeffOptions,
    /// Route for the kernel mean `b_{0,d}`.
    pub route: Route,
    /// Jitter is multiplied by ten at most this many times.
    pub jitter_escalations: usize,
    /// Power and inverse iterations for the condition estimate.
    pub condition_iters: usize,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        Self {
            coeffs: CoeffOptions::default(),
            route: Route::Closed,
            jitter_escalations: 3,
            condition_iters: 30,
        }
    }
}

/// `∫∫ ψ dσ dσ = b_{0,d}` for the normalized uniform measure `σ`.
pub fn kernel_mean_uniform<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    opts: &CubatureOptions,
) -> Result<T> {
    Ok(mean_sequence(k, d, opts)?.coeffs()[0])
}

fn mean_sequence<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    opts: &CubatureOptions,
) -> Result<SchoenbergSequence<T>> {
    schoenberg_coeffs(k, d, Truncation::Fixed(0), opts.route, &opts.coeffs).context("kernel mean")
}

/// Worst-case integration error of a rule against the uniform measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscrepancyReport<T> {
    /// `√max(wce², 0)`.
    pub wce: T,
    /// Before clamping.
    pub wce_sq: T,
    /// Truncation of the coefficient sequence that supplied `b_{0,d}`.
    pub truncation: usize,
    pub kernel_mean: T,
    pub gram_condition: T,
    pub jitter_used: T,
    pub kernel: IsotropicKernel<T>,
}

/// `wᵀGw − 2(Σw) b₀ + b₀`, compensated.
fn wce_sq<T: Real>(g: &SymMatrix<T>, w: &[T], mean: T) -> T {
    let mut acc = Compensated::new();
    for (i, wi) in w.iter().enumerate() {
        for (gij, wj) in g.row(i).iter().zip(w) {
            acc.add(*wi * *wj * *gij);
        }
        acc.add(-(T::lit(2.0) * *wi * mean));
    }
    acc.add(mean);
    acc.value()
}

fn jitter_start<T: Real>(g: &SymMatrix<T>) -> T {
    T::lit(1e-12) * g.trace() / T::of(g.n().max(1))
}

fn report<T: Real>(
    k: &IsotropicKernel<T>,
    g: &SymMatrix<T>,
    chol: &Cholesky<T>,
    w: &[T],
    mean: &SchoenbergSequence<T>,
    opts: &CubatureOptions,
) -> DiscrepancyReport<T> {
    let b0 = mean.coeffs()[0];
    let sq = wce_sq(g, w, b0);
    DiscrepancyReport {
        wce: sq.max(T::zero()).sqrt(),
        wce_sq: sq,
        truncation: mean.truncation(),
        kernel_mean: b0,
        gram_condition: condition_estimate(g, chol, opts.condition_iters),
        jitter_used: chol.jitter,
        kernel: k.clone(),
    }
}

/// Worst-case error of `rule` in the native space of `k`.
pub fn worst_case_error<T: Real>(
    k: &IsotropicKernel<T>,
    rule: &CubatureRule<T>,
    opts: &CubatureOptions,
) -> Result<DiscrepancyReport<T>> {
    let mean = mean_sequence(k, rule.dim(), opts)?;
    let g = gram_matrix(k, rule.points())?;
    let chol = Cholesky::with_jitter(&g, jitter_start(&g), opts.jitter_escalations)?;
    Ok(report(k, &g, &chol, rule.weights(), &mean, opts))
}

/// Weights solving `(G + jitter·I) w = b_{0,d} 1`, with the report of the
/// resulting rule.
pub fn optimal_weights<T: Real>(
    k: &IsotropicKernel<T>,
    points: Vec<SpherePoint<T>>,
    generator: Generator,
    opts: &CubatureOptions,
) -> Result<(CubatureRule<T>, DiscrepancyReport<T>)> {
    let d = points
        .first()
        .map(SpherePoint::dim)
        .ok_or_else(|| Error::param("n", 0.0, "a rule needs at least one point"))?;
    let mean = mean_sequence(k, d, opts)?;
    let g = gram_matrix(k, &points)?;
    let chol = Cholesky::with_jitter(&g, jitter_start(&g), opts.jitter_escalations)?;
    let w = chol.solve(&vec![mean.coeffs()[0]; points.len()]);
    let rep = report(k, &g, &chol, &w, &mean, opts);
    let rule = CubatureRule::new(points, w, generator, WeightMode::Optimal)?;
    Ok((rule, rep))
}

/// Maximum mean discrepancy `√(aᵀG_a a − 2aᵀG_ab b + bᵀG_b b)` between two
/// weighted point sets, clamped at zero.
pub fn discrepancy_between<T: Real>(
    k: &IsotropicKernel<T>,
    a: &CubatureRule<T>,
    b: &CubatureRule<T>,
) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ga = gram_matrix(k, a.points())?;
    let gb = gram_matrix(k, b.points())?;
    let gab = cross_gram(k, a.points(), b.points())?;
    let mut acc = Compensated::new();
    for (g, w) in [(&ga, a.weights()), (&gb, b.weights())] {
        for (i, wi) in w.iter().enumerate() {
            for (gij, wj) in g.row(i).iter().zip(w) {
                acc.add(*wi * *wj * *gij);
            }
        }
    }
    for (row, wi) in gab.iter().zip(a.weights()) {
        for (gij, wj) in row.iter().zip(b.weights()) {
            // doubled after the product so the terms match the diagonal blocks
            acc.add(-(*wi * *wj * *gij) - *wi * *wj * *gij);
        }
    }
    Ok(acc.value().max(T::zero()).sqrt())
}

/// One row of a rate study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RatePoint<T> {
    pub n: usize,
    pub wce: T,
    pub gram_condition: T,
    pub jitter_used: T,
}

/// Optimal-weight worst-case errors over a grid of sizes and the fitted
/// slope of `log wce` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RateStudy<T> {
    pub kernel: IsotropicKernel<T>,
    pub dim: usize,
    pub generator: Generator,
    pub rows: Vec<RatePoint<T>>,
    pub slope: T,
    pub intercept: T,
}

pub fn rate_study<T: Real>(
    k: &IsotropicKernel<T>,
    d: usize,
    n_grid: &[usize],
    generator: Generator,
    opts: &CubatureOptions,
) -> Result<RateStudy<T>> {
    if n_grid.len() < 2 {
        return Err(Error::param(
            "n_grid",
            n_grid.len() as f64,
            "a slope needs at least two sizes",
        ));
    }
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let pts = generate_points(generator, n, d)?;
            let (_, rep) = optimal_weights(k, pts, generator, opts)
                .with_context(|| format!("rate study at n = {n}"))?;
            Ok(RatePoint {
                n,
                wce: rep.wce,
                gram_condition: rep.gram_condition,
                jitter_used: rep.jitter_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(T, T)> = rows.iter().map(|r| (T::of(r.n).ln(), r.wce.ln())).collect();
    let (slope, intercept) = fit_line(&pts);
    Ok(RateStudy {
        kernel: k.clone(),
        dim: d,
        generator,
        rows,
        slope,
        intercept,
    })
}
