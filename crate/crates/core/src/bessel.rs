//! Bessel functions of the first kind for integer order and real argument,
//! and the weighted series `Σ_k w(k) J_k(x)²` that enter the variance of
//! linear eigenvalue statistics.
//!
//! Small arguments use the power series. Larger arguments use Miller's
//! downward recurrence started well above the turning point `k ≈ x` and
//! normalized with `J_0 + 2 Σ_{k≥1} J_{2k} = 1`.

use thiserror::Error;

use crate::sum::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("Bessel argument must be finite, got {0}")]
    NonFiniteArgument(f64),
    #[error("Bessel order {order} exceeds the policy maximum {max_order}")]
    OrderTooLarge { order: u64, max_order: usize },
    #[error("weighted series at x = {x} needs truncation order {required}, above the policy maximum {max_order}")]
    TruncationTooLarge {
        x: f64,
        required: usize,
        max_order: usize,
    },
    #[error("invalid Bessel policy: {0}")]
    InvalidPolicy(&'static str),
}

/// Evaluation and truncation controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselPolicy {
    /// Arguments below this use the power series.
    pub series_threshold: f64,
    /// Absolute truncation target for series over the order `k`.
    pub tail_tolerance: f64,
    /// Largest order that may be requested or used as a truncation point.
    pub max_order: usize,
}

impl Default for BesselPolicy {
    fn default() -> Self {
        Self {
            series_threshold: 12.0,
            tail_tolerance: 1e-12,
            max_order: 1 << 16,
        }
    }
}

/// Weight `w(k)` of a symmetric series `Σ_{k∈Z} w(k) J_k(x)²`.
///
/// Every weight is even in `k` and vanishes at `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesWeight {
    /// `|k|`
    AbsK,
    /// `k²`
    KSquared,
    /// `|k| sin²(φk)`, the literal odd-harmonic weight. It coincides with
    /// [`SeriesWeight::AbsKSymmetrized`] on odd orders only.
    AbsKSinSq { phi: f64 },
    /// `|k| (1 + (-1)^k cos(2kφ)) / 2`: `|k|` times the squared modulus of the
    /// `k`-th boundary Fourier coefficient of `e^{itx} cos(sy)` divided by
    /// `J_k(|τ|)²`. Equals `sin²(φk)` for odd `k` and `cos²(φk)` for even `k`.
    AbsKSymmetrized { phi: f64 },
}

impl SeriesWeight {
    pub fn at(&self, k: i64) -> f64 {
        let ka = k.unsigned_abs() as f64;
        match *self {
            SeriesWeight::AbsK => ka,
            SeriesWeight::KSquared => ka * ka,
            SeriesWeight::AbsKSinSq { phi } => {
                let s = (phi * ka).sin();
                ka * s * s
            }
            SeriesWeight::AbsKSymmetrized { phi } => {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                ka * 0.5 * (1.0 + sign * (2.0 * phi * ka).cos())
            }
        }
    }

    /// Upper bound of `w(k)` valid for `k ≥ 1`.
    fn bound(&self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            SeriesWeight::KSquared => k * k,
            _ => k,
        }
    }
}

impl BesselPolicy {
    pub fn validate(&self) -> Result<(), BesselError> {
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance.is_finite()) {
            return Err(BesselError::InvalidPolicy("tail_tolerance must be positive"));
        }
        if !(self.series_threshold > 0.0 && self.series_threshold.is_finite()) {
            return Err(BesselError::InvalidPolicy("series_threshold must be positive"));
        }
        if self.max_order == 0 {
            return Err(BesselError::InvalidPolicy("max_order must be positive"));
        }
        Ok(())
    }

    fn check_order(&self, order: u64) -> Result<usize, BesselError> {
        if order > self.max_order as u64 {
            return Err(BesselError::OrderTooLarge {
                order,
                max_order: self.max_order,
            });
        }
        Ok(order as usize)
    }

    /// `J_n(x)` for any integer order and finite real argument.
    ///
    /// Negative orders and arguments are reduced with `J_{-n}(x) = (-1)^n J_n(x)`
    /// and `J_n(-x) = (-1)^n J_n(x)`.
    pub fn j(&self, n: i64, x: f64) -> Result<f64, BesselError> {
        check_finite(x)?;
        let order = self.check_order(n.unsigned_abs())?;
        let mut value = if x.abs() < self.series_threshold {
            series_j(order, x.abs())
        } else {
            miller_row(order, x.abs())[order]
        };
        let odd = order % 2 == 1;
        if odd && n < 0 {
            value = -value;
        }
        if odd && x < 0.0 {
            value = -value;
        }
        Ok(value)
    }

    /// `[J_0(x), …, J_{n_max}(x)]` for `x ≥ 0`.
    pub fn j_row(&self, n_max: usize, x: f64) -> Result<Vec<f64>, BesselError> {
        check_finite(x)?;
        self.check_order(n_max as u64)?;
        let ax = x.abs();
        let mut row = if ax < self.series_threshold {
            (0..=n_max).map(|k| series_j(k, ax)).collect()
        } else {
            miller_row(n_max, ax)
        };
        if x < 0.0 {
            row.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
        }
        Ok(row)
    }

    /// Smallest truncation order used for series at argument `x`:
    /// `ceil(x) + ceil(3 x^{1/3}) + 20`.
    pub fn base_truncation_order(x: f64) -> usize {
        let x = x.abs();
        x.ceil() as usize + (3.0 * x.cbrt()).ceil() as usize + 20
    }

    /// Truncation order `K` for series at `x`, extended beyond the base order
    /// until `K² J_K(x)²` drops below the tail tolerance.
    pub fn truncation_order(&self, x: f64) -> Result<usize, BesselError> {
        Ok(self.truncated_row(x, &SeriesWeight::KSquared)?.len() - 1)
    }

    fn truncated_row(&self, x: f64, weight: &SeriesWeight) -> Result<Vec<f64>, BesselError> {
        check_finite(x)?;
        let mut order = Self::base_truncation_order(x);
        loop {
            if order > self.max_order {
                return Err(BesselError::TruncationTooLarge {
                    x,
                    required: order,
                    max_order: self.max_order,
                });
            }
            let row = self.j_row(order, x.abs())?;
            let last = row[order];
            let prev = row[order - 1];
            let tail = 4.0 * weight.bound(order).max(1.0) * (last * last + prev * prev);
            if tail < self.tail_tolerance {
                return Ok(row);
            }
            order += 20 + order / 4;
        }
    }

    /// `Σ_{k∈Z} w(k) J_k(x)²`, truncated once the running tail bound falls
    /// below `tail_tolerance`.
    pub fn weighted_series(&self, x: f64, weight: SeriesWeight) -> Result<f64, BesselError> {
        check_finite(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let row = self.truncated_row(x, &weight)?;
        let mut acc = NeumaierSum::new();
        // Walk from the tail so small terms accumulate first.
        for (k, jk) in row.iter().enumerate().skip(1).rev() {
            acc.add(weight.at(k as i64) * jk * jk);
        }
        Ok(2.0 * acc.value())
    }
}

/// `J_n(x)` under the default policy.
pub fn bessel_j(n: i64, x: f64) -> Result<f64, BesselError> {
    BesselPolicy::default().j(n, x)
}

/// `[J_0(x), …, J_{n_max}(x)]` under the default policy.
pub fn bessel_j_row(n_max: usize, x: f64) -> Result<Vec<f64>, BesselError> {
    BesselPolicy::default().j_row(n_max, x)
}

/// `Σ_{k∈Z} w(k) J_k(x)²` under the default policy.
pub fn weighted_bessel_series(x: f64, weight: SeriesWeight) -> Result<f64, BesselError> {
    BesselPolicy::default().weighted_series(x, weight)
}

/// `J_1(x)/x`, continuous through `x = 0` where it equals `1/2`.
pub fn j1_over_x(x: f64) -> Result<f64, BesselError> {
    if x.abs() < 1e-4 {
        let q = x * x / 4.0;
        return Ok(0.5 * (1.0 - q / 2.0 + q * q / 12.0));
    }
    Ok(bessel_j(1, x)? / x)
}

/// `J_3(x)/x`, continuous through `x = 0` where it equals `0`.
pub fn j3_over_x(x: f64) -> Result<f64, BesselError> {
    if x.abs() < 1e-4 {
        let q = x * x / 4.0;
        return Ok(x * x / 48.0 * (1.0 - q / 4.0));
    }
    Ok(bessel_j(3, x)? / x)
}

fn check_finite(x: f64) -> Result<(), BesselError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(BesselError::NonFiniteArgument(x))
    }
}

/// Power series `Σ_m (-1)^m (x/2)^{2m+n} / (m! (m+n)!)` for `x ≥ 0`.
fn series_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut acc = NeumaierSum::new();
    acc.add(term);
    for m in 1..1000 {
        let m_f = m as f64;
        term *= -q / (m_f * (m_f + n as f64));
        acc.add(term);
        if m_f > half && term.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
    }
    acc.value()
}

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Miller's downward recurrence `J_{k-1} = (2k/x) J_k - J_{k+1}` for `x > 0`,
/// returning `J_0..=J_{n_max}`.
fn miller_row(n_max: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let mut top = n_max.max(x.ceil() as usize) + 20 + (15.0 * (0.5 * x).cbrt()).ceil() as usize;
    top += top % 2;

    let mut row = vec![0.0; n_max + 1];
    let mut above = 0.0;
    let mut current = 1.0;
    let mut norm = NeumaierSum::new();
    for k in (1..=top).rev() {
        if k <= n_max {
            row[k] = current;
        }
        if k % 2 == 0 {
            norm.add(2.0 * current);
        }
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            let partial = norm.value() * RESCALE_BY;
            norm = NeumaierSum::new();
            norm.add(partial);
            for v in row.iter_mut().skip(k.saturating_sub(1)) {
                *v *= RESCALE_BY;
            }
        }
    }
    row[0] = current;
    norm.add(current);
    let scale = 1.0 / norm.value();
    row.iter_mut().for_each(|v| *v *= scale);
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference values from an independent 40-digit evaluation.
    const REFERENCE: &[(i64, f64, f64)] = &[
        (0, 1.0, 0.765_197_686_557_966_55),
        (1, 1.0, 0.440_050_585_744_933_52),
        (2, 1.0, 0.114_903_484_931_900_48),
        (0, 2.0, 0.223_890_779_141_235_67),
        (1, 2.0, 0.576_724_807_756_873_39),
        (3, 2.0, 0.128_943_249_474_402_05),
        (2, 5.0, 0.046_565_116_277_752_216),
        (3, 3.0, 0.309_062_722_255_251_64),
        (0, 10.0, -0.245_935_764_451_348_34),
        (1, 10.0, 0.043_472_746_168_861_437),
        (0, 12.0, 0.047_689_310_796_833_537),
        (1, 12.0, -0.223_447_104_490_627_61),
        (5, 12.0, -0.073_470_963_101_658_581),
        (1, 15.0, 0.205_104_038_613_522_76),
        (0, 30.0, -0.086_367_983_581_040_211),
        (7, 50.0, 0.060_491_201_259_537_108),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, x, expected) in REFERENCE {
            let got = bessel_j(n, x).unwrap();
            assert!((got - expected).abs() < 1e-13, "J_{n}({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(4, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j_row(3, 0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn row_entries_match_reference() {
        let row = bessel_j_row(2, 1.0).unwrap();
        assert!((row[0] - 0.765_197_686_557_966_55).abs() < 1e-13);
        assert!((row[1] - 0.440_050_585_744_933_52).abs() < 1e-13);
        assert!((row[2] - 0.114_903_484_931_900_48).abs() < 1e-13);
    }

    #[test]
    fn row_agrees_with_pointwise_values_across_threshold() {
        for x in [0.5, 7.0, 11.999, 12.0, 20.0, 47.5] {
            let row = bessel_j_row(200, x).unwrap();
            for (k, v) in row.iter().enumerate() {
                let single = bessel_j(k as i64, x).unwrap();
                assert!((v - single).abs() < 1e-12, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn series_and_recurrence_agree_near_threshold() {
        let series = BesselPolicy {
            series_threshold: 100.0,
            ..Default::default()
        };
        let recurrence = BesselPolicy {
            series_threshold: 1e-3,
            ..Default::default()
        };
        // The series loses about log10(e^x) digits to cancellation.
        for x in [2.0f64, 6.5, 11.0, 12.0, 13.0] {
            let tol = 1e-16 * x.exp();
            for n in 0..40 {
                let a = series.j(n, x).unwrap();
                let b = recurrence.j(n, x).unwrap();
                assert!((a - b).abs() < tol, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn reflection_is_exact() {
        for x in [0.3, 4.0, 17.0] {
            for n in 1..8 {
                let pos = bessel_j(n, x).unwrap();
                let neg = bessel_j(-n, x).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(neg, sign * pos);
            }
        }
        assert_eq!(bessel_j(-3, 2.5).unwrap(), -bessel_j(3, 2.5).unwrap());
    }

    #[test]
    fn squared_row_sums_to_one() {
        let policy = BesselPolicy::default();
        for x in [0.5, 5.0, 20.0] {
            let k = policy.truncation_order(x).unwrap();
            let row = policy.j_row(k, x).unwrap();
            let total = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((total - 1.0).abs() < 1e-12, "x={x}: {total}");
        }
    }

    #[test]
    fn weighted_series_at_zero_vanishes() {
        for w in [
            SeriesWeight::AbsK,
            SeriesWeight::KSquared,
            SeriesWeight::AbsKSinSq { phi: 0.3 },
            SeriesWeight::AbsKSymmetrized { phi: 0.3 },
        ] {
            assert_eq!(weighted_bessel_series(0.0, w).unwrap(), 0.0);
        }
    }

    #[test]
    fn k_squared_series_is_half_square() {
        for x in [1.0, 4.0, 15.0] {
            let got = weighted_bessel_series(x, SeriesWeight::KSquared).unwrap();
            assert!(((got - x * x / 2.0) / (x * x / 2.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn abs_k_series_matches_reference_and_bound() {
        let reference = [
            (1.0, 0.442_446_327_347_621_89),
            (3.0, 1.907_810_804_420_139_3),
            (4.0, 2.488_518_701_751_746_7),
            (5.0, 3.180_332_628_230_239_0),
            (15.0, 9.554_512_965_983_699_3),
        ];
        for (x, expected) in reference {
            let got = weighted_bessel_series(x, SeriesWeight::AbsK).unwrap();
            assert!((got - expected).abs() < 1e-11, "x={x}: {got}");
            assert!(got <= x / 2f64.sqrt());
        }
    }

    #[test]
    fn symmetrized_weight_limits() {
        // s -> 0 (phi = pi/2): every harmonic survives.
        let all = weighted_bessel_series(3.0, SeriesWeight::AbsK).unwrap();
        let sym = weighted_bessel_series(
            3.0,
            SeriesWeight::AbsKSymmetrized {
                phi: std::f64::consts::FRAC_PI_2,
            },
        )
        .unwrap();
        assert!((all - sym).abs() < 1e-12);
        // t = 0 (phi = 0): only even harmonics survive.
        let row = bessel_j_row(60, 3.0).unwrap();
        let even: f64 = 2.0 * (1..=60).filter(|k| k % 2 == 0).map(|k| k as f64 * row[k] * row[k]).sum::<f64>();
        let got = weighted_bessel_series(3.0, SeriesWeight::AbsKSymmetrized { phi: 0.0 }).unwrap();
        assert!((got - even).abs() < 1e-12);
    }

    #[test]
    fn truncation_beyond_max_order_is_reported() {
        let policy = BesselPolicy {
            max_order: 30,
            ..Default::default()
        };
        assert!(matches!(
            policy.weighted_series(40.0, SeriesWeight::AbsK),
            Err(BesselError::TruncationTooLarge { .. })
        ));
        assert!(matches!(policy.j(31, 1.0), Err(BesselError::OrderTooLarge { .. })));
    }

    #[test]
    fn rejects_non_finite_argument() {
        assert!(matches!(bessel_j(0, f64::NAN), Err(BesselError::NonFiniteArgument(_))));
        assert!(matches!(bessel_j_row(2, f64::INFINITY), Err(BesselError::NonFiniteArgument(_))));
    }

    #[test]
    fn invalid_policy_rejected() {
        let p = BesselPolicy {
            tail_tolerance: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(BesselPolicy::default().validate().is_ok());
    }

    #[test]
    fn asymptotic_envelope_at_large_argument() {
        let x = 200.0;
        let j0 = bessel_j(0, x).unwrap();
        assert!(j0.abs() <= 1.1 * (2.0 / (std::f64::consts::PI * x)).sqrt());
    }

    #[test]
    fn removable_ratios_are_continuous() {
        for x in [1e-6, 9.9e-5, 1.01e-4, 1e-3] {
            let direct1 = bessel_j(1, x).unwrap() / x;
            let direct3 = bessel_j(3, x).unwrap() / x;
            assert!((j1_over_x(x).unwrap() - direct1).abs() < 1e-14);
            assert!((j3_over_x(x).unwrap() - direct3).abs() < 1e-14);
        }
        assert_eq!(j1_over_x(0.0).unwrap(), 0.5);
        assert_eq!(j3_over_x(0.0).unwrap(), 0.0);
    }

    #[test]
    fn huge_orders_underflow_without_overflowing() {
        let row = bessel_j_row(2000, 30.0).unwrap();
        assert!(row.iter().all(|v| v.is_finite()));
        assert_eq!(row[2000], 0.0);
        assert!((row[0] - (-0.086_367_983_581_040_211)).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn three_term_recurrence_holds(x in 0.1f64..50.0, n in 1i64..60) {
            let a = bessel_j(n - 1, x).unwrap();
            let b = bessel_j(n, x).unwrap();
            let c = bessel_j(n + 1, x).unwrap();
            prop_assert!((a + c - 2.0 * n as f64 / x * b).abs() < 1e-10 * (1.0 + n as f64 / x));
        }

        #[test]
        fn normalization_with_own_truncation(x in 0.0f64..50.0) {
            let policy = BesselPolicy::default();
            let k = policy.truncation_order(x).unwrap();
            let row = policy.j_row(k, x).unwrap();
            let total = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
