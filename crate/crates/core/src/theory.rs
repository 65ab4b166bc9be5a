//! Analytic DSFF predictions.
//!
//! For `τ = t + is` the DSFF is `|Σ_j f_τ(σ_j)|² / N²` with the plane wave
//! `f_τ(z) = exp(i(t Re z + s Im z))`, so its expectation splits into the
//! squared mean and the variance of that linear statistic:
//!
//! ```text
//! K(τ) ≈ e(τ)² + v(τ) / N²
//! ```
//!
//! `e` and `v` come from the central limit theorem for linear eigenvalue
//! statistics of i.i.d. matrices, evaluated in closed form through Bessel
//! functions. The real-field expectation has one disk integral without a
//! closed form; it is computed with [`crate::quadrature`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bessel::{j1_over_x, j3_over_x, BesselError, BesselPolicy, SeriesWeight};
use crate::quadrature::{real_axis_correction_integral, DiskGrid, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("the large-|τ| form needs |τ| > 0")]
    ZeroTau,
    #[error("matrix dimension must be positive")]
    ZeroDimension,
}

/// Complex time `τ = t + is`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    pub t: f64,
    pub s: f64,
}

impl ComplexTime {
    pub const ZERO: ComplexTime = ComplexTime { t: 0.0, s: 0.0 };

    pub fn new(t: f64, s: f64) -> Self {
        Self { t, s }
    }

    /// `τ = |τ| (cos θ + i sin θ)`.
    pub fn from_polar(abs_tau: f64, theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self {
            t: abs_tau * cos,
            s: abs_tau * sin,
        }
    }

    pub fn abs_tau(&self) -> f64 {
        self.t.hypot(self.s)
    }

    /// Argument of `τ`; `0` at the origin.
    pub fn theta(&self) -> f64 {
        if self.abs_tau() == 0.0 {
            0.0
        } else {
            self.s.atan2(self.t)
        }
    }

    /// Angle with `sin φ = t/|τ|`, `cos φ = s/|τ|`; `0` at the origin.
    pub fn phi(&self) -> f64 {
        if self.abs_tau() == 0.0 {
            0.0
        } else {
            self.t.atan2(self.s)
        }
    }
}

/// Field of the matrix entries, carrying `β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// `β = 1`
    Real,
    /// `β = 2`
    Complex,
}

impl Symmetry {
    pub fn beta(self) -> u8 {
        match self {
            Symmetry::Real => 1,
            Symmetry::Complex => 2,
        }
    }

    pub fn from_beta(beta: u8) -> Option<Self> {
        match beta {
            1 => Some(Symmetry::Real),
            2 => Some(Symmetry::Complex),
            _ => None,
        }
    }
}

/// Terms of `E Σ_j f_τ(σ_j)` (not yet divided by `N`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationTerms {
    /// `2N J_1(|τ|)/|τ|`
    pub leading: f64,
    /// `-|τ| J_1(|τ|)/4`
    pub laplacian: f64,
    /// `2κ₄ J_3(|τ|)/|τ|`, i.e. `-(κ₄/π) ∫_𝐃 f (2|z|² - 1)`
    pub kappa4: f64,
    /// Real field only: `I(t,s) - J_0(|τ|) + J_0(t)/2 + cos(t)/2`.
    pub real_axis: f64,
}

impl ExpectationTerms {
    pub fn total(&self) -> f64 {
        self.leading + self.laplacian + self.kappa4 + self.real_axis
    }
}

/// Terms of `Var Σ_j f_τ(σ_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    /// `|τ|²/4`
    pub gradient: f64,
    /// Boundary series: `(1/2) Σ|k| J_k²` (complex) or the symmetrized
    /// `Σ|k| |f̂_sym(k)|²` (real).
    pub series: f64,
    /// `κ₄ (2J_1(|τ|)/|τ| - J_0(|τ|))²`
    pub kappa4: f64,
    /// Real field only: `(t² - s²) J_1(2s) / (4s)`.
    pub real_ramp: f64,
}

impl VarianceTerms {
    pub fn total(&self) -> f64 {
        self.gradient + self.series + self.kappa4 + self.real_ramp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub tau: ComplexTime,
    pub n: usize,
    pub symmetry: Symmetry,
    pub kappa4: f64,
    /// `E Σ f / N`
    pub e_value: f64,
    /// `Var Σ f`
    pub v_value: f64,
    /// `e² + v/N²`
    pub k_total: f64,
    /// `e²`
    pub disconnected: f64,
    /// `v/N²`
    pub connected: f64,
    pub expectation_terms: ExpectationTerms,
    pub variance_terms: VarianceTerms,
    /// Set when `|τ| > N^{2/7}`, outside the proven range.
    pub validity_warning: bool,
}

/// Large-`N` complex Ginibre DSFF split into contact `1/N`,
/// disconnected `4J_1(|τ|)²/|τ|²`, connected `-exp(-|τ|²/4N)/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GinibreExact {
    pub contact: f64,
    pub disconnected: f64,
    pub connected: f64,
}

impl GinibreExact {
    pub fn total(&self) -> f64 {
        self.disconnected + self.variance_part()
    }

    /// `(1 - exp(-|τ|²/4N))/N`, the variance part `Var(Σf)/N²`; this is what
    /// the estimator's connected component measures.
    pub fn variance_part(&self) -> f64 {
        self.contact + self.connected
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    /// `N^{2/5}`, where connected and disconnected parts balance.
    pub tau_edge: f64,
    /// `N^{1/2}`, the inverse mean eigenvalue spacing.
    pub tau_hei: f64,
}

pub fn timescales(n: usize) -> Timescales {
    let n = n as f64;
    Timescales {
        tau_edge: n.powf(0.4),
        tau_hei: n.sqrt(),
    }
}

/// `N^{2/7}`, the edge of the proven range.
pub fn validity_limit(n: usize) -> f64 {
    (n as f64).powf(2.0 / 7.0)
}

/// `J_1(2s)/(4s)`, equal to `1/4` at `s = 0`.
fn ramp_ratio(s: f64) -> Result<f64, BesselError> {
    Ok(0.5 * j1_over_x(2.0 * s)?)
}

/// Evaluates the analytic predictions with fixed Bessel and quadrature rules.
#[derive(Clone, Debug)]
pub struct Theory {
    pub bessel: BesselPolicy,
    pub grid: DiskGrid,
}

impl Default for Theory {
    fn default() -> Self {
        Self {
            bessel: BesselPolicy::default(),
            grid: DiskGrid::standard(),
        }
    }
}

impl Theory {
    pub fn new(bessel: BesselPolicy, grid: DiskGrid) -> Self {
        Self { bessel, grid }
    }

    fn j(&self, n: i64, x: f64) -> Result<f64, BesselError> {
        self.bessel.j(n, x)
    }

    /// `2J_1(x)/x - J_0(x)` (which is `J_2(x)`), the κ₄ variance amplitude.
    pub fn kappa4_amplitude(&self, abs_tau: f64) -> Result<f64, TheoryError> {
        Ok(2.0 * j1_over_x(abs_tau)? - self.j(0, abs_tau)?)
    }

    pub fn expectation_linear_stat(
        &self,
        tau: ComplexTime,
        n: usize,
        kappa4: f64,
        symmetry: Symmetry,
    ) -> Result<ExpectationTerms, TheoryError> {
        if n == 0 {
            return Err(TheoryError::ZeroDimension);
        }
        let a = tau.abs_tau();
        let j1 = self.j(1, a)?;
        let real_axis = match symmetry {
            Symmetry::Complex => 0.0,
            Symmetry::Real => {
                real_axis_correction_integral(tau.t, tau.s, &self.grid)? - self.j(0, a)?
                    + 0.5 * self.j(0, tau.t)?
                    + 0.5 * tau.t.cos()
            }
        };
        Ok(ExpectationTerms {
            leading: 2.0 * n as f64 * j1_over_x(a)?,
            laplacian: -a * j1 / 4.0,
            kappa4: 2.0 * kappa4 * j3_over_x(a)?,
            real_axis,
        })
    }

    pub fn variance_linear_stat(
        &self,
        tau: ComplexTime,
        kappa4: f64,
        symmetry: Symmetry,
    ) -> Result<VarianceTerms, TheoryError> {
        let a = tau.abs_tau();
        let amplitude = self.kappa4_amplitude(a)?;
        let (series, real_ramp) = match symmetry {
            Symmetry::Complex => (0.5 * self.bessel.weighted_series(a, SeriesWeight::AbsK)?, 0.0),
            Symmetry::Real => {
                let series = self
                    .bessel
                    .weighted_series(a, SeriesWeight::AbsKSymmetrized { phi: tau.phi() })?;
                let ramp = (tau.t * tau.t - tau.s * tau.s) * ramp_ratio(tau.s)?;
                (series, ramp)
            }
        };
        Ok(VarianceTerms {
            gradient: a * a / 4.0,
            series,
            kappa4: kappa4 * amplitude * amplitude,
            real_ramp,
        })
    }

    /// `K(τ) = e² + v/N²` with its component breakdown.
    pub fn dsff_theory(
        &self,
        tau: ComplexTime,
        n: usize,
        kappa4: f64,
        symmetry: Symmetry,
    ) -> Result<TheoryPrediction, TheoryError> {
        let expectation_terms = self.expectation_linear_stat(tau, n, kappa4, symmetry)?;
        let variance_terms = self.variance_linear_stat(tau, kappa4, symmetry)?;
        let nf = n as f64;
        let e_value = expectation_terms.total() / nf;
        let v_value = variance_terms.total();
        let disconnected = e_value * e_value;
        let connected = v_value / (nf * nf);
        Ok(TheoryPrediction {
            tau,
            n,
            symmetry,
            kappa4,
            e_value,
            v_value,
            k_total: disconnected + connected,
            disconnected,
            connected,
            expectation_terms,
            variance_terms,
            validity_warning: tau.abs_tau() > validity_limit(n),
        })
    }

    /// Large-`|τ|` form `4J_1(|τ|)²/|τ|² + (|τ|²/4 + (t²-s²)(2/β-1) J_1(2s)/(4s)) / N²`.
    pub fn dsff_simplified(&self, tau: ComplexTime, n: usize, symmetry: Symmetry) -> Result<f64, TheoryError> {
        if n == 0 {
            return Err(TheoryError::ZeroDimension);
        }
        let a = tau.abs_tau();
        if a == 0.0 {
            return Err(TheoryError::ZeroTau);
        }
        let ratio = 2.0 * j1_over_x(a)?;
        let class_factor = 2.0 / symmetry.beta() as f64 - 1.0;
        let ramp = if class_factor == 0.0 {
            0.0
        } else {
            (tau.t * tau.t - tau.s * tau.s) * class_factor * ramp_ratio(tau.s)?
        };
        let nf = n as f64;
        Ok(ratio * ratio + (a * a / 4.0 + ramp) / (nf * nf))
    }

    pub fn ginibre_exact_dsff(&self, tau: ComplexTime, n: usize) -> Result<GinibreExact, TheoryError> {
        if n == 0 {
            return Err(TheoryError::ZeroDimension);
        }
        let a = tau.abs_tau();
        let nf = n as f64;
        let ratio = 2.0 * j1_over_x(a)?;
        Ok(GinibreExact {
            contact: 1.0 / nf,
            disconnected: ratio * ratio,
            connected: -(-a * a / (4.0 * nf)).exp() / nf,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::bessel::bessel_j;
    use crate::quadrature::{boundary_average, disk_integral};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn theory() -> &'static Theory {
        static T: OnceLock<Theory> = OnceLock::new();
        T.get_or_init(Theory::default)
    }

    fn light() -> &'static Theory {
        static T: OnceLock<Theory> = OnceLock::new();
        T.get_or_init(|| Theory::new(BesselPolicy::default(), DiskGrid::new(96, 128).unwrap()))
    }

    const J1_2: f64 = 0.576_724_807_756_873_39;
    const J3_2: f64 = 0.128_943_249_474_402_05;

    #[test]
    fn complex_time_angles() {
        let tau = ComplexTime::new(1.5, 0.7);
        let phi = tau.phi();
        assert!((phi.sin() - 1.5 / tau.abs_tau()).abs() < 1e-15);
        assert!((phi.cos() - 0.7 / tau.abs_tau()).abs() < 1e-15);
        assert_eq!(ComplexTime::ZERO.phi(), 0.0);
        assert_eq!(ComplexTime::ZERO.theta(), 0.0);
        let p = ComplexTime::from_polar(2.0, 0.3);
        assert!((p.theta() - 0.3).abs() < 1e-15 && (p.abs_tau() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_at_origin_is_n() {
        for n in [1, 7, 100] {
            let e = theory()
                .expectation_linear_stat(ComplexTime::ZERO, n, 0.7, Symmetry::Complex)
                .unwrap();
            assert_eq!(e.total(), n as f64);
        }
    }

    #[test]
    fn expectation_examples() {
        let tau = ComplexTime::from_polar(2.0, 1.1);
        let e = theory()
            .expectation_linear_stat(tau, 100, 0.0, Symmetry::Complex)
            .unwrap()
            .total();
        let expected = 100.0 * J1_2 * (1.0 - 1.0 / 200.0);
        assert!((e - expected).abs() < 1e-12);

        let e_k = theory()
            .expectation_linear_stat(tau, 100, -2.0, Symmetry::Complex)
            .unwrap()
            .total();
        assert!((e_k - (expected + 2.0 * -2.0 * J3_2 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn kappa4_mean_coefficient_matches_quadrature() {
        // -(κ₄/π) ∫ f (2|z|²-1) = 2κ₄ J_3/|τ|.
        let tau = ComplexTime::from_polar(2.0, 0.4);
        let integral = disk_integral(
            |x, y| Complex64::from_polar(1.0, tau.t * x + tau.s * y) * (2.0 * (x * x + y * y) - 1.0),
            &theory().grid,
        );
        let kappa4 = -2.0;
        let via_quadrature = -kappa4 / PI * integral.re;
        let terms = theory().expectation_linear_stat(tau, 10, kappa4, Symmetry::Complex).unwrap();
        assert!((terms.kappa4 - via_quadrature).abs() < 1e-10);
    }

    #[test]
    fn real_expectation_at_origin() {
        // f ≡ 1: the extra real-field terms are 0 - 1 + 1/2 + 1/2 = 0.
        let e = theory()
            .expectation_linear_stat(ComplexTime::ZERO, 50, 0.0, Symmetry::Real)
            .unwrap();
        assert!(e.real_axis.abs() < 1e-15);
        assert!((e.total() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn variance_vanishes_at_origin() {
        for sym in [Symmetry::Real, Symmetry::Complex] {
            let v = theory().variance_linear_stat(ComplexTime::ZERO, 1.3, sym).unwrap();
            assert_eq!(v.total(), 0.0);
        }
    }

    #[test]
    fn complex_variance_example() {
        let v = theory()
            .variance_linear_stat(ComplexTime::from_polar(5.0, 0.2), 0.0, Symmetry::Complex)
            .unwrap();
        let series = 3.180_332_628_230_239_0;
        assert!((v.total() - (25.0 / 4.0 + 0.5 * series)).abs() < 1e-10);
        assert!(v.series <= 0.5 * 5.0 / 2f64.sqrt());
    }

    #[test]
    fn real_variance_on_real_axis_doubles_complex() {
        // s -> 0+: ramp -> t²/4 and every harmonic survives.
        let t = 3.0;
        let tau = ComplexTime::new(t, 1e-9);
        let v = theory().variance_linear_stat(tau, 0.0, Symmetry::Real).unwrap();
        let expected = 9.0 / 4.0 + 9.0 / 4.0 + 1.907_810_804_420_139_3;
        assert!((v.total() - expected).abs() < 1e-9);
        let vc = theory()
            .variance_linear_stat(ComplexTime::new(t, 0.0), 0.0, Symmetry::Complex)
            .unwrap();
        assert!((v.total() / vc.total() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn real_gradient_terms_match_symmetrized_quadrature() {
        use crate::quadrature::disk_integral_real;
        for (t, s) in [(3.0, 1e-6), (1.0, 2.0), (4.0, -1.5)] {
            let v = theory().variance_linear_stat(ComplexTime::new(t, s), 0.0, Symmetry::Real).unwrap();
            let quad = disk_integral_real(
                |_, y| {
                    let (sin, cos) = (s * y).sin_cos();
                    t * t * cos * cos + s * s * sin * sin
                },
                &theory().grid,
            ) / (2.0 * PI);
            assert!((v.gradient + v.real_ramp - quad).abs() < 1e-8);
        }
    }

    /// Σ_k |k| |f̂_sym(k)|² from boundary Fourier coefficients of
    /// e^{itx} cos(sy), without any Bessel evaluation.
    fn symmetrized_series_by_fourier(t: f64, s: f64) -> f64 {
        let kmax = 80;
        (-kmax..=kmax)
            .map(|k: i64| {
                let c = boundary_average(
                    |th| {
                        Complex64::from_polar(1.0, t * th.cos() - k as f64 * th) * (s * th.sin()).cos()
                    },
                    512,
                )
                .unwrap();
                k.unsigned_abs() as f64 * c.norm_sqr()
            })
            .sum()
    }

    #[test]
    fn real_series_matches_fourier_oracle() {
        for (t, s) in [(1.5, 0.7), (0.0, 4.0), (6.0, 0.0), (-2.0, 3.0), (10.0, 10.0)] {
            let v = theory().variance_linear_stat(ComplexTime::new(t, s), 0.0, Symmetry::Real).unwrap();
            let oracle = symmetrized_series_by_fourier(t, s);
            assert!((v.series - oracle).abs() < 1e-10, "({t},{s}): {} vs {oracle}", v.series);
        }
    }

    #[test]
    fn literal_sin_squared_weight_misses_even_harmonics() {
        let tau = ComplexTime::new(1.5, 0.7);
        let literal = theory()
            .bessel
            .weighted_series(tau.abs_tau(), SeriesWeight::AbsKSinSq { phi: tau.phi() })
            .unwrap();
        let oracle = symmetrized_series_by_fourier(1.5, 0.7);
        assert!((literal - oracle).abs() > 0.05);
    }

    #[test]
    fn kappa4_variance_coefficient_matches_quadrature() {
        for (t, s) in [(1.0, 0.0), (2.0, 3.0), (-0.5, 0.25)] {
            let tau = ComplexTime::new(t, s);
            let f = |x: f64, y: f64| Complex64::from_polar(1.0, t * x + s * y);
            let bulk = disk_integral(f, &theory().grid) / PI;
            let edge = boundary_average(|th| f(th.cos(), th.sin()), 512).unwrap();
            let quad = (bulk - edge).norm_sqr();
            let amp = theory().kappa4_amplitude(tau.abs_tau()).unwrap();
            assert!((quad - amp * amp).abs() < 1e-8);
            // 2J_1(x)/x - J_0(x) = J_2(x).
            let j2 = bessel_j(2, tau.abs_tau()).unwrap();
            assert!((amp - j2).abs() < 1e-13);
        }
    }

    #[test]
    fn kappa4_term_for_rademacher_at_unit_time() {
        let v = theory().variance_linear_stat(ComplexTime::new(1.0, 0.0), -2.0, Symmetry::Real).unwrap();
        assert!((v.kappa4 - -0.026_405_621_698_991).abs() < 1e-13);
    }

    #[test]
    fn dsff_at_origin_is_one() {
        for sym in [Symmetry::Real, Symmetry::Complex] {
            let p = theory().dsff_theory(ComplexTime::ZERO, 64, 0.0, sym).unwrap();
            assert!((p.k_total - 1.0).abs() < 1e-14);
            assert_eq!(p.connected, 0.0);
            assert!(!p.validity_warning);
        }
    }

    #[test]
    fn dsff_example_dominated_by_disconnected() {
        let n = 1000;
        let p = light()
            .dsff_theory(ComplexTime::from_polar(10.0, 0.0), n, 0.0, Symmetry::Complex)
            .unwrap();
        let j1 = 0.043_472_746_168_861_437;
        let e = 2.0 * j1 / 10.0 - 10.0 * j1 / 4.0 / 1000.0;
        assert!((p.disconnected - e * e).abs() < 1e-15);
        assert!((p.disconnected - 4.0 * j1 * j1 / 100.0).abs() / p.disconnected < 0.03);
        assert!(p.v_value > 25.0 && p.v_value < 25.0 + 10.0 / 2f64.sqrt());
        assert!(p.validity_warning);
        assert!((p.k_total - (p.disconnected + p.v_value / 1e6)).abs() < 1e-18);
    }

    #[test]
    fn connected_ratio_real_to_complex_on_real_axis() {
        let n = 1000;
        let tau = ComplexTime::from_polar((n as f64).powf(0.45), 0.0);
        let r = light().dsff_theory(tau, n, 0.0, Symmetry::Real).unwrap();
        let c = light().dsff_theory(tau, n, 0.0, Symmetry::Complex).unwrap();
        assert!((r.connected / c.connected - 2.0).abs() < 1e-12);
        // Along the diagonal the classes agree to leading order.
        let tau = ComplexTime::from_polar((n as f64).powf(0.45), PI / 4.0);
        let r = light().dsff_theory(tau, n, 0.0, Symmetry::Real).unwrap();
        let c = light().dsff_theory(tau, n, 0.0, Symmetry::Complex).unwrap();
        assert!((r.connected / c.connected - 1.0).abs() < 0.05);
    }

    #[test]
    fn simplified_form_examples() {
        let t = theory();
        assert_eq!(t.dsff_simplified(ComplexTime::ZERO, 10, Symmetry::Real), Err(TheoryError::ZeroTau));
        // β = 2: no real-axis term.
        let tau = ComplexTime::from_polar(15.0, 0.9);
        let j1 = 0.205_104_038_613_522_76;
        let expected = 4.0 * j1 * j1 / 225.0 + 225.0 / (4.0 * 250_000.0);
        assert!((t.dsff_simplified(tau, 500, Symmetry::Complex).unwrap() - expected).abs() < 1e-15);
        // θ = π/4, β = 1: anisotropy vanishes.
        let diag = ComplexTime::new(5.0, 5.0);
        assert!(
            (t.dsff_simplified(diag, 100, Symmetry::Real).unwrap() - t.dsff_simplified(diag, 100, Symmetry::Complex).unwrap())
                .abs()
                < 1e-18
        );
    }

    #[test]
    fn corollary_agrees_with_theorem_in_its_window() {
        let n = 1_000_000;
        for a in [12.0, 20.0, 40.0] {
            for sym in [Symmetry::Real, Symmetry::Complex] {
                let tau = ComplexTime::from_polar(a, 0.3);
                let full = light().dsff_theory(tau, n, 0.0, sym).unwrap().k_total;
                let simple = light().dsff_simplified(tau, n, sym).unwrap();
                let rel = ((full - simple) / full).abs();
                assert!(rel < 0.05, "|τ|={a} {sym:?}: {rel}");
            }
        }
    }

    #[test]
    fn ginibre_exact_values() {
        let t = theory();
        for n in [1, 10, 1000] {
            let g = t.ginibre_exact_dsff(ComplexTime::ZERO, n).unwrap();
            assert_eq!(g.total(), 1.0);
        }
        let far = t.ginibre_exact_dsff(ComplexTime::from_polar(5e3, 0.2), 100).unwrap();
        assert!((far.total() - 0.01).abs() < 1e-6);
        let hei = t.ginibre_exact_dsff(ComplexTime::from_polar(10.0, 0.0), 100).unwrap();
        let j1 = 0.043_472_746_168_861_437;
        let expected = 0.01 + 4.0 * j1 * j1 / 100.0 - (-0.25f64).exp() / 100.0;
        assert!((hei.total() - expected).abs() < 1e-15);
    }

    #[test]
    fn ginibre_small_ramp() {
        let n = 1_000_000;
        for a in [2.0, 10.0, 30.0] {
            let g = theory().ginibre_exact_dsff(ComplexTime::from_polar(a, 0.0), n).unwrap();
            let ramp = a * a / (4.0 * (n * n) as f64);
            let x = a * a / n as f64;
            assert!((g.variance_part() / ramp - 1.0).abs() < x);
        }
    }

    #[test]
    fn timescale_values() {
        let one = timescales(1);
        assert_eq!((one.tau_edge, one.tau_hei), (1.0, 1.0));
        let t = timescales(1024);
        assert!((t.tau_edge - 16.0).abs() < 1e-12 && t.tau_hei == 32.0);
        let t = timescales(1000);
        assert!((t.tau_edge - 15.848_931_924_611_137).abs() < 1e-12);
        assert!((t.tau_hei - 31.622_776_601_683_793).abs() < 1e-12);
    }

    #[test]
    fn rotational_symmetry_complex() {
        let a = 4.3;
        let base = light()
            .dsff_theory(ComplexTime::from_polar(a, 0.0), 200, 0.4, Symmetry::Complex)
            .unwrap()
            .k_total;
        for i in 1..=10 {
            let theta = i as f64 * 0.61;
            let k = light()
                .dsff_theory(ComplexTime::from_polar(a, theta), 200, 0.4, Symmetry::Complex)
                .unwrap()
                .k_total;
            assert!((k - base).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn real_reflection_symmetry(t in -8.0f64..8.0, s in -8.0f64..8.0, kappa4 in -2.0f64..2.0) {
            let th = light();
            let base = th.dsff_theory(ComplexTime::new(t, s), 300, kappa4, Symmetry::Real).unwrap().k_total;
            let flip_s = th.dsff_theory(ComplexTime::new(t, -s), 300, kappa4, Symmetry::Real).unwrap().k_total;
            let flip_t = th.dsff_theory(ComplexTime::new(-t, s), 300, kappa4, Symmetry::Real).unwrap().k_total;
            prop_assert!((base - flip_s).abs() < 1e-12);
            prop_assert!((base - flip_t).abs() < 1e-12);
        }

        #[test]
        fn variance_is_nonnegative(t in -30.0f64..30.0, s in -30.0f64..30.0, excess in 0.0f64..4.0, real in any::<bool>()) {
            // κ₄ is bounded below by -2 (real) and -1 (complex) since E|χ|⁴ ≥ (E|χ|²)².
            let (sym, kappa4) = if real { (Symmetry::Real, excess - 2.0) } else { (Symmetry::Complex, excess - 1.0) };
            let p = light().dsff_theory(ComplexTime::new(t, s), 500, kappa4, sym).unwrap();
            prop_assert!(p.v_value >= 0.0);
            prop_assert!(p.k_total.is_finite() && p.e_value.is_finite());
            prop_assert!((p.k_total - (p.e_value * p.e_value + p.v_value / 250_000.0)).abs() <= 1e-15 * p.k_total.max(1.0));
        }
    }
}
