//! i.i.d. matrix ensembles `X_ij = N^{-1/2} χ` with `E χ = 0`, `E|χ|² = 1`
//! and, for complex entries, `E χ² = 0`.
//!
//! Sampling is keyed: matrix `index` under `master_seed` is drawn from the
//! ChaCha20 stream `(key = master_seed, stream = index)`, entries in
//! row-major order. Any sample can therefore be regenerated on its own, in
//! any order and on any thread.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::theory::Symmetry;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Law of the normalized entry `χ`.
///
/// Complex laws are `(a + ib)/√2` with `a`, `b` independent draws of the
/// corresponding real law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryDistribution {
    /// Standard normal.
    Gaussian,
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub field: Field,
    pub distribution: EntryDistribution,
    pub n: usize,
}

/// Canonical header form of an [`EnsembleSpec`]; field order is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDescriptor {
    pub field: Field,
    pub distribution: EntryDistribution,
    pub n: usize,
    pub kappa4: f64,
}

impl EnsembleSpec {
    pub fn new(field: Field, distribution: EntryDistribution, n: usize) -> Self {
        Self { field, distribution, n }
    }

    pub fn symmetry(&self) -> Symmetry {
        match self.field {
            Field::Real => Symmetry::Real,
            Field::Complex => Symmetry::Complex,
        }
    }

    pub fn beta(&self) -> u8 {
        self.symmetry().beta()
    }

    /// Fourth cumulant `E|χ|⁴ - (1 + 2/β)`.
    pub fn kappa4(&self) -> f64 {
        self.fourth_moment() - (1.0 + 2.0 / self.beta() as f64)
    }

    /// `E|χ|⁴` in closed form.
    pub fn fourth_moment(&self) -> f64 {
        // Fourth moment of the underlying real law.
        let m4 = match self.distribution {
            EntryDistribution::Gaussian => 3.0,
            EntryDistribution::Rademacher => 1.0,
            EntryDistribution::Uniform => 9.0 / 5.0,
        };
        match self.field {
            Field::Real => m4,
            // E(a² + b²)²/4 with E a² = E b² = 1.
            Field::Complex => (2.0 * m4 + 2.0) / 4.0,
        }
    }

    pub fn descriptor(&self) -> EnsembleDescriptor {
        EnsembleDescriptor {
            field: self.field,
            distribution: self.distribution,
            n: self.n,
            kappa4: self.kappa4(),
        }
    }

    /// Canonical JSON `{"field","distribution","n","kappa4"}`.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.descriptor()).expect("descriptor serializes")
    }
}

/// Generator for sample `index` under `master_seed`.
pub fn sample_rng(master_seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// One draw of the real law (unit variance).
fn draw_real<R: Rng + ?Sized>(dist: EntryDistribution, rng: &mut R) -> f64 {
    match dist {
        EntryDistribution::Gaussian => rng.sample(StandardNormal),
        EntryDistribution::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        EntryDistribution::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
    }
}

/// One draw of `χ` (not yet scaled by `N^{-1/2}`).
pub fn draw_chi<R: Rng + ?Sized>(field: Field, dist: EntryDistribution, rng: &mut R) -> Complex64 {
    match field {
        Field::Real => Complex64::new(draw_real(dist, rng), 0.0),
        Field::Complex => {
            let a = draw_real(dist, rng);
            let b = draw_real(dist, rng);
            Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

#[derive(Clone, Debug)]
pub enum MatrixEntries {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl MatrixEntries {
    pub fn dim(&self) -> usize {
        match self {
            MatrixEntries::Real(m) => m.nrows(),
            MatrixEntries::Complex(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            MatrixEntries::Real(m) => Complex64::new(m[(i, j)], 0.0),
            MatrixEntries::Complex(m) => {
                let v = m[(i, j)];
                Complex64::new(v.re, v.im)
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct MatrixSample {
    pub entries: MatrixEntries,
    pub master_seed: u64,
    pub index: u64,
}

/// Matrix `index` of the ensemble under `master_seed`.
pub fn sample_matrix(spec: &EnsembleSpec, master_seed: u64, index: u64) -> MatrixSample {
    let n = spec.n;
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = sample_rng(master_seed, index);
    let entries = match spec.field {
        Field::Real => {
            let mut m = Mat::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = scale * draw_real(spec.distribution, &mut rng);
                }
            }
            MatrixEntries::Real(m)
        }
        Field::Complex => {
            let mut m = Mat::<c64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let chi = draw_chi(Field::Complex, spec.distribution, &mut rng) * scale;
                    m[(i, j)] = c64::new(chi.re, chi.im);
                }
            }
            MatrixEntries::Complex(m)
        }
    };
    MatrixSample {
        entries,
        master_seed,
        index,
    }
}
