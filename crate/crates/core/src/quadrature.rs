//! Quadrature on the unit disk, the unit circle and the real chord `[-1, 1]`.
//!
//! These are the numerical oracles for every closed-form disk integral in
//! [`crate::theory`], and they evaluate the one real-case term that has no
//! closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature rule needs at least one node ({0} = 0)")]
    EmptyRule(&'static str),
    #[error("grid with {angular_nodes} angular nodes is not symmetric under x -> -x and has nodes on y = 0")]
    AsymmetricGrid { angular_nodes: usize },
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
    if n == 0 {
        return Err(QuadratureError::EmptyRule("gauss-legendre nodes"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskNode {
    pub r: f64,
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Product rule on the unit disk: Gauss–Legendre in `r ∈ (0, 1)` with the
/// Jacobian `r` folded into the weights, times the equispaced (trapezoidal)
/// rule in `θ` with a half-step offset `θ_j = (j + 1/2) 2π / n`.
///
/// With an even number of angular nodes the node set is symmetric under
/// `y → -y` and `x → -x` and no node lies on the real axis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    radial_nodes: usize,
    angular_nodes: usize,
    nodes: Vec<DiskNode>,
}

impl DiskGrid {
    pub fn new(radial_nodes: usize, angular_nodes: usize) -> Result<Self, QuadratureError> {
        if radial_nodes == 0 {
            return Err(QuadratureError::EmptyRule("radial_nodes"));
        }
        if angular_nodes == 0 {
            return Err(QuadratureError::EmptyRule("angular_nodes"));
        }
        let (xi, wi) = gauss_legendre(radial_nodes)?;
        let dtheta = 2.0 * PI / angular_nodes as f64;
        let angles: Vec<(f64, f64, f64)> = (0..angular_nodes)
            .map(|j| {
                let theta = (j as f64 + 0.5) * dtheta;
                let (sin, cos) = theta.sin_cos();
                (theta, cos, sin)
            })
            .collect();
        let mut nodes = Vec::with_capacity(radial_nodes * angular_nodes);
        for (x, w) in xi.iter().zip(&wi) {
            let r = 0.5 * (x + 1.0);
            let radial_weight = 0.5 * w * r * dtheta;
            for &(theta, cos, sin) in &angles {
                nodes.push(DiskNode {
                    r,
                    theta,
                    x: r * cos,
                    y: r * sin,
                    weight: radial_weight,
                });
            }
        }
        Ok(Self {
            radial_nodes,
            angular_nodes,
            nodes,
        })
    }

    /// 400 radial × 512 angular nodes.
    pub fn standard() -> Self {
        Self::new(400, 512).expect("non-empty grid")
    }

    /// Same rule with both node counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self, QuadratureError> {
        Self::new(self.radial_nodes * factor, self.angular_nodes * factor)
    }

    pub fn radial_nodes(&self) -> usize {
        self.radial_nodes
    }

    pub fn angular_nodes(&self) -> usize {
        self.angular_nodes
    }

    pub fn nodes(&self) -> &[DiskNode] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).collect::<NeumaierSum>().value()
    }

    pub fn is_reflection_symmetric(&self) -> bool {
        self.angular_nodes % 2 == 0
    }
}

/// `∫_𝐃 f(x, y) dx dy`.
pub fn disk_integral<F>(f: F, grid: &DiskGrid) -> Complex64
where
    F: Fn(f64, f64) -> Complex64,
{
    grid.nodes
        .iter()
        .map(|n| f(n.x, n.y) * n.weight)
        .collect::<ComplexSum>()
        .value()
}

/// `∫_𝐃 f(x, y) dx dy` for real integrands.
pub fn disk_integral_real<F>(f: F, grid: &DiskGrid) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    grid.nodes
        .iter()
        .map(|n| f(n.x, n.y) * n.weight)
        .collect::<NeumaierSum>()
        .value()
}

/// `(1/2π) ∫_0^{2π} f(θ) dθ` as the mean over `n_nodes` equispaced angles
/// `θ_j = 2πj/n`. `f` receives the angle of the point `e^{iθ}`.
pub fn boundary_average<F>(f: F, n_nodes: usize) -> Result<Complex64, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    if n_nodes == 0 {
        return Err(QuadratureError::EmptyRule("n_nodes"));
    }
    let step = 2.0 * PI / n_nodes as f64;
    let total = (0..n_nodes)
        .map(|j| f(j as f64 * step))
        .collect::<ComplexSum>()
        .value();
    Ok(total / n_nodes as f64)
}

/// `(1/2π) ∫_{-1}^{1} e^{itx} / √(1 - x²) dx` by Chebyshev–Gauss quadrature.
///
/// The sine part is odd and cancels, so the value is real; it equals `J_0(t)/2`.
pub fn chord_integral(t: f64, n_nodes: usize) -> Result<f64, QuadratureError> {
    if n_nodes == 0 {
        return Err(QuadratureError::EmptyRule("n_nodes"));
    }
    let n = n_nodes as f64;
    let total = (1..=n_nodes)
        .map(|j| (t * ((2 * j - 1) as f64 * PI / (2.0 * n)).cos()).cos())
        .collect::<NeumaierSum>()
        .value();
    Ok(total / (2.0 * n))
}

/// `(1 - cos u) / u²` in the cancellation-free form `2 sin²(u/2) / u²`.
#[inline]
pub fn one_minus_cos_over_sq(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        return 0.5 - u * u / 24.0;
    }
    let h = (0.5 * u).sin();
    2.0 * h * h / (u * u)
}

/// `(1/4π) ∫_𝐃 e^{itx} (1 - e^{isy}) / y² dx dy`.
///
/// Only the even part `cos(tx)(1 - cos(sy))/y²` is integrated: the odd parts
/// `sin(tx)(…)` and `-i e^{itx} sin(sy)/y²` vanish over the symmetric disk,
/// the latter only as a symmetric (principal-value) limit, so the grid must
/// be reflection symmetric.
pub fn real_axis_correction_integral(t: f64, s: f64, grid: &DiskGrid) -> Result<f64, QuadratureError> {
    if !grid.is_reflection_symmetric() {
        return Err(QuadratureError::AsymmetricGrid {
            angular_nodes: grid.angular_nodes,
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let s2 = s * s;
    let integral = disk_integral_real(|x, y| (t * x).cos() * s2 * one_minus_cos_over_sq(s * y), grid);
    Ok(integral / (4.0 * PI))
}
