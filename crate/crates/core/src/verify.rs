//! Deterministic identities that must hold on any build, grouped into suites.
//!
//! Every check records the measured error next to its tolerance so a report
//! can be printed or serialized as is.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{BesselPolicy, SeriesWeight};
use crate::ensembles::{EnsembleSpec, EntryDistribution, Field};
use crate::estimator::{build_tau_grid, dsff_grid, linear_stat, Spacing};
use crate::quadrature::{
    boundary_average, chord_integral, disk_integral, disk_integral_real, real_axis_correction_integral,
    DiskGrid, QuadratureError,
};
use crate::spectra::sample_spectra;
use crate::sum::ComplexSum;
use crate::theory::{ComplexTime, Symmetry, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bessel,
    Quadrature,
    Theory,
    Estimator,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Bessel, Suite::Quadrature, Suite::Theory, Suite::Estimator];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

struct Report {
    suite: Suite,
    checks: Vec<InvariantCheck>,
}

impl Report {
    fn new(suite: Suite) -> Self {
        Self { suite, checks: Vec::new() }
    }

    /// Records `measured ≤ tolerance`; NaN fails.
    fn check(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.checks.push(InvariantCheck {
            suite: self.suite,
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        });
    }

    /// Records a check whose evaluation itself failed.
    fn failed(&mut self, name: impl Into<String>) {
        self.check(name, f64::NAN, 0.0);
    }
}

/// `Grid` chooses the quadrature used by the quadrature and theory suites.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub bessel: BesselPolicy,
    pub grid: DiskGrid,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            bessel: BesselPolicy::default(),
            grid: DiskGrid::standard(),
        }
    }
}

impl VerifyConfig {
    /// The standard grid with both node counts multiplied by `scale`.
    pub fn with_grid_scale(scale: usize) -> Result<Self, QuadratureError> {
        Ok(Self {
            bessel: BesselPolicy::default(),
            grid: DiskGrid::standard().refined(scale)?,
        })
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Vec<InvariantCheck> {
    let mut r = Report::new(suite);
    match suite {
        Suite::Bessel => bessel_suite(&mut r, &config.bessel),
        Suite::Quadrature => quadrature_suite(&mut r, config),
        Suite::Theory => theory_suite(&mut r, config),
        Suite::Estimator => estimator_suite(&mut r),
    }
    r.checks
}

pub fn run_all(config: &VerifyConfig) -> Vec<InvariantCheck> {
    Suite::ALL.iter().flat_map(|&s| run_suite(s, config)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn bessel_suite(r: &mut Report, p: &BesselPolicy) {
    for x in [0.5, 5.0, 12.0, 20.0, 35.0, 50.0] {
        let name = format!("normalization x={x}");
        match p.truncation_order(x).and_then(|k| p.j_row(k, x)) {
            Ok(row) => {
                let sum = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
                r.check(name, (sum - 1.0).abs(), 1e-10);
            }
            Err(_) => r.failed(name),
        }
    }

    for x in [0.7, 9.0, 23.0] {
        let mut worst = 0.0f64;
        for n in 0..12i64 {
            match (p.j(-n, x), p.j(n, x)) {
                (Ok(a), Ok(b)) => {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    worst = worst.max((a - sign * b).abs());
                }
                _ => worst = f64::NAN,
            }
        }
        r.check(format!("reflection x={x}"), worst, 0.0);
    }

    for x in [1.0f64, 4.0, 15.0] {
        match p.weighted_series(x, SeriesWeight::KSquared) {
            Ok(v) => r.check(format!("k-squared sum x={x}"), rel(v, x * x / 2.0), 1e-8),
            Err(_) => r.failed(format!("k-squared sum x={x}")),
        }
        match p.weighted_series(x, SeriesWeight::AbsK) {
            Ok(v) => r.check(format!("|k| sum bound x={x}"), (v - x / 2f64.sqrt()).max(0.0), 0.0),
            Err(_) => r.failed(format!("|k| sum bound x={x}")),
        }
    }

    // Σ_k J_k(x)² e^{-ikθ} = J_0(2x sin(θ/2)).
    for x in [0.8, 3.0, 10.0] {
        for theta in [0.0, PI / 2.0, PI] {
            let name = format!("Graf x={x} theta={theta:.4}");
            let value = p.truncation_order(x).and_then(|k| p.j_row(k, x)).and_then(|row| {
                let series = row[0] * row[0]
                    + 2.0
                        * row[1..]
                            .iter()
                            .enumerate()
                            .map(|(k, v)| v * v * ((k + 1) as f64 * theta).cos())
                            .sum::<f64>();
                Ok((series, p.j(0, 2.0 * x * (theta / 2.0).sin())?))
            });
            match value {
                Ok((lhs, rhs)) => r.check(name, (lhs - rhs).abs(), 1e-9),
                Err(_) => r.failed(name),
            }
        }
    }

    // (1/z) d/dz (z^k J_k) = z^{k-1} J_{k-1}.
    let h = 1e-5;
    for k in 1..=3i64 {
        for z in [0.5, 2.0, 4.5, 7.0, 10.0] {
            let name = format!("derivative k={k} z={z}");
            let g = |z: f64| p.j(k, z).map(|j| z.powi(k as i32) * j);
            match (g(z + h), g(z - h), p.j(k - 1, z)) {
                (Ok(a), Ok(b), Ok(jm)) => {
                    let lhs = (a - b) / (2.0 * h) / z;
                    let rhs = z.powi(k as i32 - 1) * jm;
                    r.check(name, (lhs - rhs).abs() / rhs.abs().max(1.0), 1e-6);
                }
                _ => r.failed(name),
            }
        }
    }

    match p.j(0, 200.0) {
        Ok(j0) => r.check(
            "asymptotic envelope x=200",
            (j0.abs() - 1.1 * (2.0 / (PI * 200.0)).sqrt()).max(0.0),
            0.0,
        ),
        Err(_) => r.failed("asymptotic envelope x=200"),
    }
}

fn plane_wave(tau: ComplexTime) -> impl Fn(f64, f64) -> Complex64 {
    move |x, y| {
        let (sin, cos) = (tau.t * x + tau.s * y).sin_cos();
        Complex64::new(cos, sin)
    }
}

fn quadrature_suite(r: &mut Report, config: &VerifyConfig) {
    let p = &config.bessel;
    let grid = &config.grid;
    r.check("disk area", (grid.total_weight() - PI).abs(), 1e-12);

    let taus = [
        ComplexTime::from_polar(3.0, 0.0),
        ComplexTime::new(1.5, 0.7),
        ComplexTime::new(-4.0, 9.0),
        ComplexTime::from_polar(19.5, 2.2),
    ];
    for tau in taus {
        let a = tau.abs_tau();
        let label = format!("t={:.3} s={:.3}", tau.t, tau.s);
        let (j0, j1, j3) = match (p.j(0, a), p.j(1, a), p.j(3, a)) {
            (Ok(j0), Ok(j1), Ok(j3)) => (j0, j1, j3),
            _ => {
                r.failed(format!("bessel values {label}"));
                continue;
            }
        };
        let f = plane_wave(tau);
        let plain = disk_integral(&f, grid);
        r.check(format!("∫f = 2πJ1/|τ| {label}"), (plain - 2.0 * PI * j1 / a).norm(), 1e-8);
        let weighted = disk_integral(|x, y| f(x, y) * (2.0 * (x * x + y * y) - 1.0), grid);
        r.check(format!("∫f(2|z|²-1) = -2πJ3/|τ| {label}"), (weighted + 2.0 * PI * j3 / a).norm(), 1e-8);
        let lap = disk_integral(|x, y| -a * a * f(x, y), grid) / (8.0 * PI);
        r.check(format!("laplacian {label}"), (lap.re + a * j1 / 4.0).abs(), 1e-8);
        let grad = disk_integral_real(|_, _| a * a, grid) / (4.0 * PI);
        r.check(format!("gradient norm {label}"), (grad - a * a / 4.0).abs(), 1e-10);
        match boundary_average(|th| f(th.cos(), th.sin()), 256) {
            Ok(v) => r.check(format!("boundary mean = J0 {label}"), (v - j0).norm(), 1e-8),
            Err(_) => r.failed(format!("boundary mean = J0 {label}")),
        }
        if tau.s != 0.0 {
            let (t, s) = (tau.t, tau.s);
            let got = disk_integral_real(
                |_, y| {
                    let (sin, cos) = (s * y).sin_cos();
                    t * t * cos * cos + s * s * sin * sin
                },
                grid,
            ) / (2.0 * PI);
            match p.j(1, 2.0 * s) {
                Ok(j) => r.check(
                    format!("symmetrized gradient {label}"),
                    (got - a * a / 4.0 - (t * t - s * s) * j / (4.0 * s)).abs(),
                    1e-8,
                ),
                Err(_) => r.failed(format!("symmetrized gradient {label}")),
            }
        }
    }

    // Boundary Fourier coefficient: mean of e^{-ikθ} f(e^{iθ}) is e^{iφk} J_k(|τ|).
    let tau = ComplexTime::new(1.5, 0.7);
    let f = plane_wave(tau);
    for k in [1i64, 2, 5] {
        let name = format!("boundary coefficient k={k}");
        let lhs = boundary_average(|th| f(th.cos(), th.sin()) * Complex64::from_polar(1.0, -(k as f64) * th), 256);
        match (lhs, p.j(k, tau.abs_tau())) {
            (Ok(v), Ok(jk)) => r.check(name, (v - Complex64::from_polar(jk, tau.phi() * k as f64)).norm(), 1e-8),
            _ => r.failed(name),
        }
    }

    for t in [0.0, 2.0, 10.0] {
        let name = format!("chord = J0/2 t={t}");
        match (chord_integral(t, 256), p.j(0, t)) {
            (Ok(v), Ok(j0)) => r.check(name, (v - j0 / 2.0).abs(), 1e-8),
            _ => r.failed(name),
        }
    }

    // Real-axis term: evenness and convergence under refinement.
    let at = |t: f64, s: f64, g: &DiskGrid| real_axis_correction_integral(t, s, g);
    match (at(1.0, 1.0, grid), at(-1.0, 1.0, grid), at(1.0, -1.0, grid)) {
        (Ok(a), Ok(b), Ok(c)) => {
            r.check("real-axis term even in t", (a - b).abs(), 0.0);
            r.check("real-axis term even in s", (a - c).abs(), 0.0);
        }
        _ => r.failed("real-axis term evenness"),
    }
    match grid.refined(2) {
        Ok(fine) => {
            for (t, s) in [(1.0, 1.0), (2.0, 3.0)] {
                let name = format!("real-axis term converged (t,s)=({t},{s})");
                match (at(t, s, grid), at(t, s, &fine)) {
                    (Ok(a), Ok(b)) => r.check(name, (a - b).abs(), 1e-8),
                    _ => r.failed(name),
                }
            }
        }
        Err(_) => r.failed("refined grid"),
    }
}

fn theory_suite(r: &mut Report, config: &VerifyConfig) {
    let th = Theory::new(config.bessel.clone(), config.grid.clone());

    // Rotations of a fixed |τ| (β = 2).
    for (abs_tau, n) in [(3.0, 100), (17.0, 1000)] {
        let name = format!("rotational symmetry |τ|={abs_tau}");
        let values: Result<Vec<f64>, _> = (0..10)
            .map(|k| {
                th.dsff_theory(ComplexTime::from_polar(abs_tau, 0.61 * k as f64), n, -0.5, Symmetry::Complex)
                    .map(|p| p.k_total)
            })
            .collect();
        match values {
            Ok(v) => {
                let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[0]).abs()));
                r.check(name, spread, 1e-12);
            }
            Err(_) => r.failed(name),
        }
    }

    // Reflections t → -t, s → -s (β = 1).
    for (t, s) in [(1.0, 0.5), (4.0, 2.5)] {
        let name = format!("reflection symmetry (t,s)=({t},{s})");
        let k = |t: f64, s: f64| th.dsff_theory(ComplexTime::new(t, s), 200, -2.0, Symmetry::Real).map(|p| p.k_total);
        match (k(t, s), k(-t, s), k(t, -s)) {
            (Ok(a), Ok(b), Ok(c)) => r.check(name, (a - b).abs().max((a - c).abs()), 1e-12),
            _ => r.failed(name),
        }
    }

    // κ₄ amplitude against ((1/π)∫f - boundary mean)².
    for abs_tau in [1.0, 4.0, 11.0] {
        let name = format!("kappa4 amplitude |τ|={abs_tau}");
        let tau = ComplexTime::from_polar(abs_tau, 0.4);
        let f = plane_wave(tau);
        let area = disk_integral(&f, &config.grid) / PI;
        let boundary = boundary_average(|a| f(a.cos(), a.sin()), 256);
        match (boundary, th.kappa4_amplitude(abs_tau)) {
            (Ok(b), Ok(amp)) => r.check(name, ((area - b).norm_sqr() - amp * amp).abs(), 1e-8),
            _ => r.failed(name),
        }
    }

    // Corollary against theorem inside its window.
    for symmetry in [Symmetry::Real, Symmetry::Complex] {
        for theta in [0.0, 0.3] {
            let name = format!("corollary vs theorem {symmetry:?} θ={theta} |τ|=12 N=1e6");
            let tau = ComplexTime::from_polar(12.0, theta);
            let n = 1_000_000;
            match (th.dsff_theory(tau, n, 0.0, symmetry), th.dsff_simplified(tau, n, symmetry)) {
                (Ok(full), Ok(simple)) => r.check(name, rel(simple, full.k_total), 0.05),
                _ => r.failed(name),
            }
        }
    }

    // Ginibre connected part against |τ|²/(4N²) while |τ|² ≪ N.
    for (abs_tau, n) in [(1.0, 10_000usize), (3.0, 100_000)] {
        let name = format!("Ginibre small ramp |τ|={abs_tau} N={n}");
        match th.ginibre_exact_dsff(ComplexTime::new(abs_tau, 0.0), n) {
            Ok(g) => {
                let nf = n as f64;
                let ramp = abs_tau * abs_tau / (4.0 * nf * nf);
                r.check(name, rel(g.variance_part(), ramp), abs_tau * abs_tau / nf);
            }
            Err(_) => r.failed(name),
        }
    }

    match th.dsff_theory(ComplexTime::ZERO, 50, 0.3, Symmetry::Real) {
        Ok(p) => r.check("K(0) = 1", (p.k_total - 1.0).abs(), 1e-12),
        Err(_) => r.failed("K(0) = 1"),
    }
}

fn estimator_suite(r: &mut Report) {
    let taus = match build_tau_grid(0.7, 0.3, 25.0, 6, Spacing::Log) {
        Ok(t) => t,
        Err(_) => return r.failed("tau grid"),
    };
    for (field, n) in [(Field::Complex, 8usize), (Field::Real, 64)] {
        let spec = EnsembleSpec::new(field, EntryDistribution::Gaussian, n);
        let set = match sample_spectra(&spec, 3, 2024, 1) {
            Ok(s) => s,
            Err(_) => {
                r.failed(format!("spectra {field:?} N={n}"));
                continue;
            }
        };
        let n2 = (n * n) as f64;
        let mut worst = 0.0f64;
        for sample in &set.samples {
            for &tau in &taus {
                let k = linear_stat(sample, tau).norm_sqr() / n2;
                let mut acc = ComplexSum::new();
                for a in &sample.eigenvalues {
                    for b in &sample.eigenvalues {
                        let phase = tau.t * (a.re - b.re) + tau.s * (a.im - b.im);
                        acc.add(Complex64::new(phase.cos(), phase.sin()));
                    }
                }
                worst = worst.max((k - acc.value().re / n2).abs());
            }
        }
        r.check(format!("double-sum identity {field:?} N={n}"), worst, 1e-12);

        match dsff_grid(&set, &taus) {
            Ok(estimates) => {
                let m = set.m() as f64;
                let mut worst = 0.0f64;
                for e in &estimates {
                    let s2 = e.connected.unwrap_or(f64::NAN) * n2;
                    let l_bar_sq = e.disconnected_unbiased.unwrap_or(f64::NAN) * n2 + s2 / m;
                    let lhs = e.k_mean * n2;
                    worst = worst.max(rel(l_bar_sq + (m - 1.0) / m * s2, lhs));
                }
                r.check(format!("decomposition identity {field:?} N={n}"), worst, 1e-12);

                let mut reversed = set.clone();
                for s in &mut reversed.samples {
                    s.eigenvalues.reverse();
                }
                let same = dsff_grid(&reversed, &taus).map(|v| v == estimates).unwrap_or(false);
                r.check(
                    format!("permutation invariance {field:?} N={n}"),
                    if same { 0.0 } else { 1.0 },
                    0.0,
                );
            }
            Err(_) => r.failed(format!("estimates {field:?} N={n}")),
        }
    }
}
