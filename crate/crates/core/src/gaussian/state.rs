use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::elements::{phase_rotation, symplectic_form, BeamSplitterSpec, LossChannel, SqueezerSpec};
use crate::error::{invalid, Error, Result};
use crate::units::VACUUM_VARIANCE;

const SYMMETRY_TOL: f64 = 1e-12;
const PHYSICALITY_TOL: f64 = 1e-10;

/// Gaussian state of `n` optical modes in `(x1, p1, x2, p2, ...)` order, `hbar = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// `n_modes` vacua: zero mean, covariance `I/4`.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("a state needs at least one mode"));
        }
        Ok(Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        })
    }

    /// Builds a state from explicit moments, checking symmetry and the uncertainty bound.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || cov.ncols() != dim {
            return Err(invalid(format!(
                "covariance must be square with even dimension, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.len() != dim {
            return Err(invalid(format!("mean has length {}, expected {dim}", mean.len())));
        }
        if cov.iter().chain(mean.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("moments must be finite"));
        }
        let scale = cov.abs().max().max(1.0);
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > SYMMETRY_TOL * scale {
            return Err(invalid(format!("covariance is not symmetric (max deviation {asym:e})")));
        }
        let state = Self { mean, cov };
        let nu = state.min_symplectic_eigenvalue()?;
        if nu < VACUUM_VARIANCE - PHYSICALITY_TOL {
            return Err(Error::NotPhysical(format!(
                "minimum symplectic eigenvalue {nu} is below the vacuum bound {VACUUM_VARIANCE}"
            )));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// 2x2 covariance block of one mode.
    pub fn mode_cov(&self, mode: usize) -> Result<DMatrix<f64>> {
        self.check_mode(mode)?;
        Ok(self.cov.view((2 * mode, 2 * mode), (2, 2)).into_owned())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(invalid(format!(
                "mode index {mode} out of range for a {}-mode state",
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// Applies a `2k x 2k` symplectic matrix to the listed modes (in that order).
    pub fn apply_symplectic(&self, modes: &[usize], s: &DMatrix<f64>) -> Result<Self> {
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(invalid(format!("mode {m} listed twice")));
            }
        }
        if s.nrows() != 2 * modes.len() || s.ncols() != 2 * modes.len() {
            return Err(invalid(format!(
                "symplectic matrix is {}x{}, expected {}x{}",
                s.nrows(),
                s.ncols(),
                2 * modes.len(),
                2 * modes.len()
            )));
        }
        let dim = self.mean.len();
        let mut full = DMatrix::identity(dim, dim);
        for (i, &mi) in modes.iter().enumerate() {
            for (j, &mj) in modes.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        full[(2 * mi + a, 2 * mj + b)] = s[(2 * i + a, 2 * j + b)];
                    }
                }
            }
        }
        let cov = &full * &self.cov * full.transpose();
        Ok(Self {
            mean: &full * &self.mean,
            cov: symmetrize(cov),
        })
    }

    pub fn apply_squeezer(&self, mode: usize, spec: &SqueezerSpec) -> Result<Self> {
        self.apply_symplectic(&[mode], &spec.symplectic())
    }

    pub fn apply_beamsplitter(&self, mode_a: usize, mode_b: usize, spec: &BeamSplitterSpec) -> Result<Self> {
        if mode_a == mode_b {
            return Err(invalid("beam splitter needs two distinct modes"));
        }
        self.apply_symplectic(&[mode_a, mode_b], &spec.symplectic())
    }

    pub fn apply_phase_shift(&self, mode: usize, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(invalid(format!("phase shift must be finite, got {theta}")));
        }
        self.apply_symplectic(&[mode], &phase_rotation(theta))
    }

    /// Mixes the mode with vacuum: `V -> eta V + (1 - eta) I/4` on its block, `sqrt(eta)`
    /// on its cross blocks and mean.
    pub fn apply_loss(&self, mode: usize, channel: &LossChannel) -> Result<Self> {
        self.check_mode(mode)?;
        let eta = channel.eta();
        let g = eta.sqrt();
        let mut cov = self.cov.clone();
        let mut mean = self.mean.clone();
        let dim = mean.len();
        for a in 0..2 {
            let i = 2 * mode + a;
            mean[i] *= g;
            for j in 0..dim {
                let in_block = j / 2 == mode;
                if in_block {
                    continue;
                }
                cov[(i, j)] *= g;
                cov[(j, i)] *= g;
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let (i, j) = (2 * mode + a, 2 * mode + b);
                let vac = if a == b { VACUUM_VARIANCE } else { 0.0 };
                cov[(i, j)] = eta * self.cov[(i, j)] + (1.0 - eta) * vac;
            }
        }
        Ok(Self { mean, cov })
    }

    /// `c^T V c` for a real coefficient vector of length `2n`.
    pub fn quadrature_variance(&self, coeffs: &[f64]) -> Result<f64> {
        if coeffs.len() != self.mean.len() {
            return Err(invalid(format!(
                "coefficient vector has length {}, expected {}",
                coeffs.len(),
                self.mean.len()
            )));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(invalid("coefficient vector is all zero"));
        }
        let c = DVector::from_column_slice(coeffs);
        Ok((c.transpose() * &self.cov * &c)[(0, 0)])
    }

    /// Coefficients selecting `wa * q(mode_a) + wb * q(mode_b)`, `q` being `x` (`quad = 0`)
    /// or `p` (`quad = 1`).
    pub fn pair_coeffs(&self, mode_a: usize, wa: f64, mode_b: usize, wb: f64, quad: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.mean.len()];
        c[2 * mode_a + quad] += wa;
        c[2 * mode_b + quad] += wb;
        c
    }

    /// Williamson spectrum, ascending, one value per mode.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let scale = self.cov.abs().max().max(1.0);
        let min_eig = eig.eigenvalues.min();
        if min_eig < -PHYSICALITY_TOL * scale {
            return Err(Error::NotPhysical(format!(
                "covariance has negative eigenvalue {min_eig:e}"
            )));
        }
        let sqrt_diag = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_diag) * eig.eigenvectors.transpose();
        // A = V^{1/2} Omega V^{1/2} is antisymmetric with singular values nu_k (each twice).
        let a = &root * symplectic_form(self.n_modes()) * &root;
        let ata = symmetrize(a.transpose() * &a);
        let mut sq: Vec<f64> = SymmetricEigen::new(ata)
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0))
            .collect();
        sq.sort_by(|a, b| a.total_cmp(b));
        Ok(sq.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).sqrt()).collect())
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?[0])
    }

    /// Total mean photon number `Tr V + |d|^2 - n/2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.cov.trace() + self.mean.norm_squared() - 0.5 * self.n_modes() as f64
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
