use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;
use crate::inseparability::TWO_VACUA;
use crate::par::Execution;

/// Draws per generator stream. Chunk `i` uses stream `i`, so batches do not depend on
/// the number of workers.
pub const CHUNK_SAMPLES: usize = 4096;

/// Quadrature draws, row-major `n_samples x 2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n_modes: usize,
    samples: Vec<f64>,
    seed: u64,
}

impl SampleBatch {
    pub fn from_raw(n_modes: usize, samples: Vec<f64>, seed: u64) -> Result<Self> {
        if n_modes == 0 || !samples.len().is_multiple_of(2 * n_modes) {
            return Err(invalid(format!(
                "{} values do not form rows of {} quadratures",
                samples.len(),
                2 * n_modes
            )));
        }
        Ok(Self { n_modes, samples, seed })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len() / (2 * self.n_modes)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = 2 * self.n_modes;
        &self.samples[i * w..(i + 1) * w]
    }

    /// `c . row` for every row.
    pub fn project(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != 2 * self.n_modes {
            return Err(invalid(format!(
                "coefficient vector has length {}, expected {}",
                coeffs.len(),
                2 * self.n_modes
            )));
        }
        Ok(self
            .samples
            .chunks_exact(2 * self.n_modes)
            .map(|r| r.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Unbiased sample covariance.
    pub fn sample_cov(&self) -> DMatrix<f64> {
        let w = 2 * self.n_modes;
        let n = self.n_samples() as f64;
        let mut mean = DVector::zeros(w);
        for r in self.samples.chunks_exact(w) {
            mean += DVector::from_column_slice(r);
        }
        mean /= n;
        let mut cov = DMatrix::zeros(w, w);
        for r in self.samples.chunks_exact(w) {
            let d = DVector::from_column_slice(r) - &mean;
            cov += &d * d.transpose();
        }
        cov / (n - 1.0)
    }

    /// Rows `[0, at)` and `[at, n)`.
    pub fn split_at(&self, at: usize) -> (SampleBatch, SampleBatch) {
        let k = at.min(self.n_samples()) * 2 * self.n_modes;
        (
            SampleBatch {
                n_modes: self.n_modes,
                samples: self.samples[..k].to_vec(),
                seed: self.seed,
            },
            SampleBatch {
                n_modes: self.n_modes,
                samples: self.samples[k..].to_vec(),
                seed: self.seed,
            },
        )
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }
}

pub fn sample_state(state: &GaussianState, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    sample_state_with(state, n_samples, seed, Execution::default())
}

/// Multivariate normal draws `mean + Q sqrt(L) z` from the eigendecomposition of the
/// covariance.
pub fn sample_state_with(state: &GaussianState, n_samples: usize, seed: u64, exec: Execution) -> Result<SampleBatch> {
    if n_samples < 2 {
        return Err(Error::InsufficientSamples {
            got: n_samples,
            need: 2,
        });
    }
    let w = 2 * state.n_modes();
    let eig = SymmetricEigen::new(state.cov().clone());
    let min = eig.eigenvalues.min();
    if min < -1e-10 {
        return Err(Error::NotPhysical(format!(
            "covariance has eigenvalue {min:e}; cannot factorize"
        )));
    }
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    let mean = state.mean().clone();
    let mut samples = vec![0.0; n_samples * w];
    exec.for_each_chunk_mut(&mut samples, CHUNK_SAMPLES * w, |chunk, out| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let mut z = vec![0.0; w];
        for row in out.chunks_exact_mut(w) {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            for (i, dst) in row.iter_mut().enumerate() {
                let mut acc = mean[i];
                for (j, zj) in z.iter().enumerate() {
                    acc += root[(i, j)] * zj;
                }
                *dst = acc;
            }
        }
    });
    Ok(SampleBatch {
        n_modes: state.n_modes(),
        samples,
        seed,
    })
}

fn moments(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut cab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        va += dx * dx;
        vb += dy * dy;
        cab += dx * dy;
    }
    (va / (n - 1.0), vb / (n - 1.0), cab / (n - 1.0))
}

/// Unbiased variance of `coeffs . q` with the Gaussian standard error `s^2 sqrt(2/(n-1))`.
pub fn estimate_variance(batch: &SampleBatch, coeffs: &[f64]) -> Result<Estimate> {
    let n = batch.n_samples();
    if n < 10 {
        return Err(Error::InsufficientSamples { got: n, need: 10 });
    }
    let u = batch.project(coeffs)?;
    let (v, _, _) = moments(&u, &u);
    Ok(Estimate {
        value: v,
        std_error: v * (2.0 / (n as f64 - 1.0)).sqrt(),
    })
}

/// Plug-in EPR sum, normalized like [`crate::inseparability::delta_epr`].
///
/// For Gaussian data `Var(s_u^2) = 2 s_u^4/(n-1)` and `Cov(s_u^2, s_w^2) = 2 c_uw^2/(n-1)`.
pub fn estimate_delta_epr(batch: &SampleBatch, mode_a: usize, mode_b: usize) -> Result<Estimate> {
    let n = batch.n_samples();
    if n < 10 {
        return Err(Error::InsufficientSamples { got: n, need: 10 });
    }
    let m = batch.n_modes();
    if mode_a == mode_b || mode_a >= m || mode_b >= m {
        return Err(invalid(format!(
            "modes ({mode_a}, {mode_b}) invalid for a {m}-mode batch"
        )));
    }
    let mut cx = vec![0.0; 2 * m];
    cx[2 * mode_a] = 1.0;
    cx[2 * mode_b] = -1.0;
    let mut cp = vec![0.0; 2 * m];
    cp[2 * mode_a + 1] = 1.0;
    cp[2 * mode_b + 1] = 1.0;
    let u = batch.project(&cx)?;
    let w = batch.project(&cp)?;
    let (vu, vw, cuw) = moments(&u, &w);
    let norm = 2.0 * TWO_VACUA;
    let var = 2.0 * (vu * vu + vw * vw + 2.0 * cuw * cuw) / (n as f64 - 1.0);
    Ok(Estimate {
        value: (vu + vw) / norm,
        std_error: var.sqrt() / norm,
    })
}
