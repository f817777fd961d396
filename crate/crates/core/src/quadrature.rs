//! Gauss–Legendre and tanh-sinh quadrature.

use crate::real::{Compensated, Real};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Rule of order `n` (exact for polynomials of degree `2n - 1`).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Newton iteration on P_n in f64, then a final polish in T.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let xt = T::lit(x);
            let (p, dp) = legendre_with_derivative(n, xt);
            let xt = xt - p / dp;
            let (_, dp) = legendre_with_derivative(n, xt);
            let w = T::lit(2.0) / ((T::one() - xt * xt) * dp * dp);
            nodes[i] = -xt;
            weights[i] = w;
            nodes[n - 1 - i] = xt;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut acc = Compensated::new();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let h = (b - a) / T::of(panels);
        let mut acc = Compensated::new();
        for p in 0..panels {
            let lo = a + h * T::of(p);
            let hi = if p + 1 == panels { b } else { lo + h };
            acc.add(self.integrate(lo, hi, &mut f));
        }
        acc.value()
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::of(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let dp = T::of(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)` with both distances computed
/// without cancellation, so endpoint singularities such as `(b - x)^(-0.9)`
/// can be evaluated accurately.
pub fn tanh_sinh<T: Real, F: FnMut(T, T, T) -> T>(a: T, b: T, rel_tol: T, mut f: F) -> Integral<T> {
    let width = b - a;
    let half_pi = T::FRAC_PI_2();
    let u_max = T::lit(6.2);
    let mut evaluations = 0usize;
    let mut node = |u: T, f: &mut F| -> T {
        let v = half_pi * u.sinh();
        let da = width / (T::one() + (-v - v).exp());
        let db = width / (T::one() + (v + v).exp());
        if da <= T::zero() || db <= T::zero() {
            return T::zero();
        }
        let c = v.cosh();
        let w = half_pi * u.cosh() / (c * c);
        if !(w > T::zero()) {
            return T::zero();
        }
        evaluations += 1;
        let x = if u < T::zero() { a + da } else { b - db };
        let fx = f(x, da, db);
        w * fx
    };

    let mut h = T::lit(0.5);
    let mut sum = Compensated::new();
    sum.add(node(T::zero(), &mut f));
    let mut k = 1usize;
    loop {
        let u = h * T::of(k);
        if u > u_max {
            break;
        }
        sum.add(node(u, &mut f));
        sum.add(node(-u, &mut f));
        k += 1;
    }
    let half_w = width * T::lit(0.5);
    let mut estimate = sum.value() * h * half_w;
    let mut error = T::infinity();
    for level in 1..=10 {
        h = h * T::lit(0.5);
        let mut k = 1usize;
        loop {
            let u = h * T::of(k);
            if u > u_max {
                break;
            }
            sum.add(node(u, &mut f));
            sum.add(node(-u, &mut f));
            k += 2;
        }
        let next = sum.value() * h * half_w;
        error = (next - estimate).abs();
        estimate = next;
        if level >= 3 && error <= rel_tol * estimate.abs() {
            break;
        }
        if estimate == T::zero() && error == T::zero() && level >= 3 {
            break;
        }
    }
    Integral {
        value: estimate,
        error,
        evaluations,
    }
}
