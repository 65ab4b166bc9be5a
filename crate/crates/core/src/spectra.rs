//! Eigenvalue sampling and the on-disk spectrum cache.
//!
//! Cache layout: one JSON header line (canonical field order, `\n`
//! terminated) followed by `m * n` little-endian `(re, im)` f64 pairs,
//! sample-major.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::{c64, Par};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_matrix, EnsembleDescriptor, EnsembleSpec, MatrixEntries};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC: &str = "dsff-spectra";

#[derive(Debug, thiserror::Error)]
pub enum SpectraError {
    #[error("eigensolver did not converge for sample {sample_index}")]
    NoConvergence { sample_index: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("corrupt cache header: {0}")]
    CorruptHeader(String),
    #[error("unsupported cache format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("cache payload has {actual} bytes, header implies {expected}")]
    LengthMismatch { expected: u64, actual: u64 },
    #[error("invalid spectrum set: {0}")]
    InvalidSet(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<Complex64>,
    pub sample_index: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSet {
    pub spec: EnsembleSpec,
    pub master_seed: u64,
    pub samples: Vec<SpectrumSample>,
    pub format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    magic: String,
    format_version: u32,
    spec: EnsembleDescriptor,
    m: usize,
    master_seed: u64,
}

/// Eigenvalues of a dense matrix, single-threaded.
pub fn eigenvalues(matrix: &MatrixEntries) -> Option<Vec<Complex64>> {
    let n = matrix.dim();
    if n == 0 {
        return Some(Vec::new());
    }
    let no = ComputeEigenvectors::No;
    match matrix {
        MatrixEntries::Real(a) => {
            let mut re = faer::diag::Diag::<f64>::zeros(n);
            let mut im = faer::diag::Diag::<f64>::zeros(n);
            let mut buf = MemBuffer::new(evd::evd_scratch::<f64>(n, no, no, Par::Seq, Default::default()));
            evd::evd_real(
                a.as_ref(),
                re.as_mut(),
                im.as_mut(),
                None,
                None,
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .ok()?;
            Some((0..n).map(|i| Complex64::new(re[i], im[i])).collect())
        }
        MatrixEntries::Complex(a) => {
            let mut s = faer::diag::Diag::<c64>::zeros(n);
            let mut buf = MemBuffer::new(evd::evd_scratch::<c64>(n, no, no, Par::Seq, Default::default()));
            evd::evd_cplx(
                a.as_ref(),
                s.as_mut(),
                None,
                None,
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .ok()?;
            Some((0..n).map(|i| Complex64::new(s[i].re, s[i].im)).collect())
        }
    }
}

/// Spectrum of matrix `index`.
pub fn sample_spectrum(spec: &EnsembleSpec, master_seed: u64, index: u64) -> Result<SpectrumSample, SpectraError> {
    let matrix = sample_matrix(spec, master_seed, index);
    let eigenvalues =
        eigenvalues(&matrix.entries).ok_or(SpectraError::NoConvergence { sample_index: index })?;
    Ok(SpectrumSample {
        eigenvalues,
        sample_index: index,
    })
}

/// Draws `m` spectra on `workers` threads. The result does not depend on
/// `workers`.
pub fn sample_spectra(
    spec: &EnsembleSpec,
    m: usize,
    master_seed: u64,
    workers: usize,
) -> Result<SpectrumSet, SpectraError> {
    if spec.n == 0 {
        return Err(SpectraError::InvalidSet("matrix dimension must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SpectraError::InvalidSet(format!("thread pool: {e}")))?;
    let samples = pool.install(|| {
        (0..m as u64)
            .into_par_iter()
            .map(|i| sample_spectrum(spec, master_seed, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(SpectrumSet {
        spec: *spec,
        master_seed,
        samples,
        format_version: FORMAT_VERSION,
    })
}

impl SpectrumSet {
    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// The first `m` samples, as if only `m` had been drawn.
    pub fn truncated(&self, m: usize) -> SpectrumSet {
        SpectrumSet {
            spec: self.spec,
            master_seed: self.master_seed,
            samples: self.samples[..m.min(self.samples.len())].to_vec(),
            format_version: self.format_version,
        }
    }

    pub fn spectra(&self) -> impl Iterator<Item = &[Complex64]> {
        self.samples.iter().map(|s| s.eigenvalues.as_slice())
    }

    fn validate(&self) -> Result<(), SpectraError> {
        for (k, s) in self.samples.iter().enumerate() {
            if s.eigenvalues.len() != self.spec.n {
                return Err(SpectraError::InvalidSet(format!(
                    "sample {k} has {} eigenvalues, expected {}",
                    s.eigenvalues.len(),
                    self.spec.n
                )));
            }
            if s.sample_index != k as u64 {
                return Err(SpectraError::InvalidSet(format!(
                    "sample at position {k} has index {}",
                    s.sample_index
                )));
            }
        }
        Ok(())
    }

    fn header_line(&self) -> String {
        let header = Header {
            magic: MAGIC.to_string(),
            format_version: self.format_version,
            spec: self.spec.descriptor(),
            m: self.m(),
            master_seed: self.master_seed,
        };
        let mut line = serde_json::to_string(&header).expect("header serializes");
        line.push('\n');
        line
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), SpectraError> {
        self.validate()?;
        w.write_all(self.header_line().as_bytes())?;
        for s in &self.samples {
            for z in &s.eigenvalues {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<SpectrumSet, SpectraError> {
        let mut r = BufReader::new(r);
        let mut line = Vec::new();
        io::BufRead::read_until(&mut r, b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(SpectraError::CorruptHeader("missing header terminator".into()));
        }
        line.pop();
        let value: serde_json::Value = serde_json::from_slice(&line)
            .map_err(|e| SpectraError::CorruptHeader(e.to_string()))?;
        if value.get("magic").and_then(|m| m.as_str()) != Some(MAGIC) {
            return Err(SpectraError::CorruptHeader("bad magic".into()));
        }
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| SpectraError::CorruptHeader("missing format_version".into()))?;
        if version != FORMAT_VERSION as u64 {
            return Err(SpectraError::VersionMismatch {
                found: version as u32,
                expected: FORMAT_VERSION,
            });
        }
        let header: Header =
            serde_json::from_value(value).map_err(|e| SpectraError::CorruptHeader(e.to_string()))?;
        let spec = EnsembleSpec::new(header.spec.field, header.spec.distribution, header.spec.n);
        if spec.kappa4() != header.spec.kappa4 {
            return Err(SpectraError::CorruptHeader(format!(
                "kappa4 {} does not match ensemble ({})",
                header.spec.kappa4,
                spec.kappa4()
            )));
        }

        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        let expected = (header.m as u64) * (spec.n as u64) * 16;
        if payload.len() as u64 != expected {
            return Err(SpectraError::LengthMismatch {
                expected,
                actual: payload.len() as u64,
            });
        }
        let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
        let samples = payload
            .chunks_exact(16 * spec.n.max(1))
            .take(header.m)
            .enumerate()
            .map(|(k, chunk)| SpectrumSample {
                eigenvalues: chunk
                    .chunks_exact(16)
                    .map(|p| Complex64::new(f(&p[..8]), f(&p[8..])))
                    .collect(),
                sample_index: k as u64,
            })
            .collect();
        Ok(SpectrumSet {
            spec,
            master_seed: header.master_seed,
            samples,
            format_version: FORMAT_VERSION,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), SpectraError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<SpectrumSet, SpectraError> {
        Self::read_from(File::open(path)?)
    }
}

/// Sanity checks on one spectrum against the matrix it came from.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumCheck {
    /// `|Σλ - tr X|`.
    pub trace_error: f64,
    /// For real matrices, the worst distance from a non-real eigenvalue to
    /// the nearest conjugate partner; zero for complex matrices.
    pub conjugation_error: f64,
    pub spectral_radius: f64,
}

pub fn check_spectrum(matrix: &MatrixEntries, eigenvalues: &[Complex64]) -> SpectrumCheck {
    let sum: Complex64 = eigenvalues.iter().sum();
    let trace_error = (sum - matrix.trace()).norm();
    let conjugation_error = match matrix {
        MatrixEntries::Real(_) => eigenvalues
            .iter()
            .map(|z| {
                eigenvalues
                    .iter()
                    .map(|w| (w - z.conj()).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max),
        MatrixEntries::Complex(_) => 0.0,
    };
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    SpectrumCheck {
        trace_error,
        conjugation_error,
        spectral_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{EntryDistribution, Field};
    use faer::Mat;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_matrix() {
        let m = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [2.0, -1.0, 0.5][i] } else { 0.0 });
        let ev = sorted(eigenvalues(&MatrixEntries::Real(m)).unwrap());
        let expect = [-1.0, 0.5, 2.0];
        for (z, e) in ev.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator() {
        let m = Mat::<f64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        });
        let ev = sorted(eigenvalues(&MatrixEntries::Real(m)).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn random_real_spectrum_checks() {
        let spec = EnsembleSpec::new(Field::Real, EntryDistribution::Gaussian, 6);
        for index in 0..20 {
            let m = sample_matrix(&spec, 5, index);
            let ev = eigenvalues(&m.entries).unwrap();
            let c = check_spectrum(&m.entries, &ev);
            assert!(c.trace_error < 1e-10, "{c:?}");
            assert!(c.conjugation_error < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn random_complex_trace() {
        let spec = EnsembleSpec::new(Field::Complex, EntryDistribution::Rademacher, 16);
        let m = sample_matrix(&spec, 1, 0);
        let ev = eigenvalues(&m.entries).unwrap();
        assert!(check_spectrum(&m.entries, &ev).trace_error < 1e-10);
    }

    #[test]
    fn worker_count_does_not_change_samples() {
        let spec = EnsembleSpec::new(Field::Real, EntryDistribution::Uniform, 12);
        let a = sample_spectra(&spec, 9, 77, 1).unwrap();
        let b = sample_spectra(&spec, 9, 77, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let spec = EnsembleSpec::new(Field::Complex, EntryDistribution::Gaussian, 5);
        let set = sample_spectra(&spec, 4, 3, 2).unwrap();
        let mut bytes = Vec::new();
        set.write_to(&mut bytes).unwrap();
        let back = SpectrumSet::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, set);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(bytes, again);
        let header = std::str::from_utf8(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()]).unwrap();
        assert_eq!(
            header,
            r#"{"magic":"dsff-spectra","format_version":1,"spec":{"field":"complex","distribution":"gaussian","n":5,"kappa4":0.0},"m":4,"master_seed":3}"#
        );
    }

    #[test]
    fn cache_errors_are_distinguished() {
        let spec = EnsembleSpec::new(Field::Real, EntryDistribution::Gaussian, 4);
        let set = sample_spectra(&spec, 3, 0, 1).unwrap();
        let mut bytes = Vec::new();
        set.write_to(&mut bytes).unwrap();

        let short = &bytes[..bytes.len() - 8];
        assert!(matches!(
            SpectrumSet::read_from(short),
            Err(SpectraError::LengthMismatch { expected: 192, actual: 184 })
        ));

        let text = String::from_utf8_lossy(&bytes).replace("\"format_version\":1", "\"format_version\":9");
        let mut v = text.into_bytes();
        // The lossy round trip only touched the header; rebuild the payload.
        let nl = v.iter().position(|&b| b == b'\n').unwrap();
        v.truncate(nl + 1);
        v.extend_from_slice(&bytes[bytes.iter().position(|&b| b == b'\n').unwrap() + 1..]);
        assert!(matches!(
            SpectrumSet::read_from(v.as_slice()),
            Err(SpectraError::VersionMismatch { found: 9, expected: 1 })
        ));

        assert!(matches!(
            SpectrumSet::read_from(&b"not json\n"[..]),
            Err(SpectraError::CorruptHeader(_))
        ));
        assert!(matches!(
            SpectrumSet::read_from(&b""[..]),
            Err(SpectraError::CorruptHeader(_))
        ));
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let spec = EnsembleSpec::new(Field::Real, EntryDistribution::Rademacher, 7);
        let set = sample_spectra(&spec, 2, 11, 1).unwrap();
        set.save(&path).unwrap();
        assert_eq!(SpectrumSet::load(&path).unwrap(), set);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let spec = EnsembleSpec::new(Field::Complex, EntryDistribution::Gaussian, 6);
        let full = sample_spectra(&spec, 6, 8, 2).unwrap();
        let short = sample_spectra(&spec, 3, 8, 1).unwrap();
        assert_eq!(full.truncated(3), short);
    }

    #[test]
    fn circular_law_second_moment() {
        // Complex Ginibre: E (1/N) Σ|λ|² = (N + 1)/(2N).
        let spec = EnsembleSpec::new(Field::Complex, EntryDistribution::Gaussian, 64);
        let set = sample_spectra(&spec, 200, 1, 4).unwrap();
        let mean: f64 = set.spectra().flatten().map(|z| z.norm_sqr()).sum::<f64>() / (64.0 * 200.0);
        assert!((mean - 65.0 / 128.0).abs() < 0.01, "{mean}");
        let radius = set
            .spectra()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(radius < 1.5, "{radius}");
    }
}
