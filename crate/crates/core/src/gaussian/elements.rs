use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Largest accepted squeezing parameter; `e^{2r}` stays far from overflow.
pub const MAX_SQUEEZING: f64 = 10.0;

/// Standard skew form `Omega` for `n` modes: block diagonal `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Phase-space rotation for `a -> e^{i theta} a`.
pub fn phase_rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Single-mode squeezer.
///
/// The anti-squeezed axis sits at `angle` from `x`: angle `0` gives
/// `Var(x) = e^{2r}/4`, `Var(p) = e^{-2r}/4`, and angle `pi/2` squeezes `x` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerSpec {
    r: f64,
    angle: f64,
}

impl SqueezerSpec {
    pub fn new(r: f64, angle: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(invalid(format!(
                "squeezing parameter r must be finite and >= 0 (encode direction via angle), got {r}"
            )));
        }
        if r > MAX_SQUEEZING {
            return Err(invalid(format!(
                "squeezing parameter r = {r} exceeds the supported maximum {MAX_SQUEEZING}"
            )));
        }
        if !angle.is_finite() {
            return Err(invalid(format!("squeezer angle must be finite, got {angle}")));
        }
        Ok(Self {
            r,
            angle: angle.rem_euclid(TAU),
        })
    }

    /// Squeezer that reduces the vacuum variance of the squeezed quadrature to `ratio`.
    pub fn from_variance_ratio(ratio: f64, angle: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(invalid(format!("variance ratio must be in (0, 1], got {ratio}")));
        }
        Self::new(-ratio.ln() / 2.0, angle)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Angle normalized into `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The squeezer that undoes this one.
    pub fn inverse(&self) -> Self {
        Self {
            r: self.r,
            angle: (self.angle + std::f64::consts::FRAC_PI_2).rem_euclid(TAU),
        }
    }

    /// `R(angle) diag(e^r, e^-r) R(angle)^T`.
    pub fn symplectic(&self) -> DMatrix<f64> {
        let rot = phase_rotation(self.angle);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![self.r.exp(), (-self.r).exp()]));
        &rot * diag * rot.transpose()
    }
}

/// Lossless two-port beam splitter.
///
/// With amplitude transmission `t = sqrt(T)`, reflection `rho = sqrt(1 - T)` and phase `phi`:
///
/// ```text
/// a_out = t a - rho e^{i phi} b
/// b_out = rho e^{-i phi} a + t b
/// ```
///
/// `T = 1` is the identity. At `T = 1/2`, `phi = 0` the outputs are `(a - b)/sqrt 2` and
/// `(a + b)/sqrt 2`, so `x_out_a - x_out_b = -sqrt 2 x_b` and `p_out_a + p_out_b = sqrt 2 p_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    transmittance: f64,
    relative_phase: f64,
}

impl BeamSplitterSpec {
    pub fn new(transmittance: f64, relative_phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(invalid(format!(
                "beam splitter transmittance must be in [0, 1], got {transmittance}"
            )));
        }
        if !relative_phase.is_finite() {
            return Err(invalid(format!(
                "beam splitter phase must be finite, got {relative_phase}"
            )));
        }
        Ok(Self {
            transmittance,
            relative_phase,
        })
    }

    /// Half beam splitter.
    pub fn balanced() -> Self {
        Self {
            transmittance: 0.5,
            relative_phase: 0.0,
        }
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn relative_phase(&self) -> f64 {
        self.relative_phase
    }

    /// Real 4x4 orthosymplectic matrix acting on `(x_a, p_a, x_b, p_b)`.
    pub fn symplectic(&self) -> DMatrix<f64> {
        let t = self.transmittance.sqrt();
        let rho = (1.0 - self.transmittance).sqrt();
        let (s, c) = self.relative_phase.sin_cos();
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            t,        0.0,      -rho * c,  rho * s,
            0.0,      t,        -rho * s, -rho * c,
            rho * c,  rho * s,   t,        0.0,
           -rho * s,  rho * c,   0.0,      t,
        ]);
        m
    }
}

/// Pure-loss channel with power transmittance `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    eta: f64,
}

impl LossChannel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("loss transmittance eta must be in [0, 1], got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Two channels in series.
    pub fn then(&self, other: &LossChannel) -> LossChannel {
        LossChannel {
            eta: self.eta * other.eta,
        }
    }
}

/// Square-root gain law `r = gain * sqrt(P)` for a waveguide pumped with `P` mW.
pub fn pump_to_squeezing(coupled_pump_power_mw: f64, gain_per_sqrt_mw: f64) -> Result<SqueezerSpec> {
    if !coupled_pump_power_mw.is_finite() || coupled_pump_power_mw < 0.0 {
        return Err(invalid(format!(
            "coupled pump power must be >= 0 mW, got {coupled_pump_power_mw}"
        )));
    }
    if !gain_per_sqrt_mw.is_finite() || gain_per_sqrt_mw <= 0.0 {
        return Err(invalid(format!(
            "gain coefficient must be > 0 per sqrt(mW), got {gain_per_sqrt_mw}"
        )));
    }
    SqueezerSpec::new(gain_per_sqrt_mw * coupled_pump_power_mw.sqrt(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_symplectic(s: &DMatrix<f64>) {
        let n = s.nrows() / 2;
        let omega = symplectic_form(n);
        let err = (s * &omega * s.transpose() - &omega).abs().max();
        assert!(err < 1e-10, "S Omega S^T deviates by {err}");
    }

    #[test]
    fn squeezer_rejects_bad_parameters() {
        assert!(SqueezerSpec::new(-0.1, 0.0).is_err());
        assert!(SqueezerSpec::new(f64::NAN, 0.0).is_err());
        assert!(SqueezerSpec::new(10.5, 0.0).is_err());
        assert!(SqueezerSpec::new(10.0, 0.0).is_ok());
    }

    #[test]
    fn squeezer_angle_normalized() {
        let s = SqueezerSpec::new(0.1, -std::f64::consts::FRAC_PI_2).unwrap();
        assert!((s.angle() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        let s = SqueezerSpec::new(0.1, 7.0).unwrap();
        assert!((s.angle() - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn squeezer_inverse_is_matrix_inverse() {
        let s = SqueezerSpec::new(0.7, 0.3).unwrap();
        let prod = s.symplectic() * s.inverse().symplectic();
        assert!((prod - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn beam_splitter_bounds() {
        assert!(BeamSplitterSpec::new(-0.01, 0.0).is_err());
        assert!(BeamSplitterSpec::new(1.01, 0.0).is_err());
        let id = BeamSplitterSpec::new(1.0, 0.4).unwrap().symplectic();
        assert!((id - DMatrix::identity(4, 4)).abs().max() < 1e-15);
    }

    #[test]
    fn loss_bounds() {
        assert!(LossChannel::new(-1e-9).is_err());
        assert!(LossChannel::new(1.0 + 1e-9).is_err());
        assert_eq!(
            LossChannel::new(0.5)
                .unwrap()
                .then(&LossChannel::new(0.5).unwrap())
                .eta(),
            0.25
        );
    }

    #[test]
    fn pump_mapping() {
        assert_eq!(pump_to_squeezing(0.0, 0.03).unwrap().r(), 0.0);
        assert!(pump_to_squeezing(-1.0, 0.03).is_err());
        assert!(pump_to_squeezing(1.0, 0.0).is_err());

        // gain chosen so that 30 mW gives e^{-2r} = 0.68
        let gain = -(0.68f64).ln() / 2.0 / 30f64.sqrt();
        assert!((gain - 0.035_206).abs() < 1e-6);
        let s = pump_to_squeezing(30.0, gain).unwrap();
        assert!(((-2.0 * s.r()).exp() - 0.68).abs() < 1e-12);

        let r1 = pump_to_squeezing(7.5, gain).unwrap().r();
        let r4 = pump_to_squeezing(30.0, gain).unwrap().r();
        assert!((r4 - 2.0 * r1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn elements_are_symplectic(r in 0.0f64..3.0, angle in 0.0f64..TAU,
                                   t in 0.0f64..=1.0, phi in -7.0f64..7.0, theta in -7.0f64..7.0) {
            assert_symplectic(&SqueezerSpec::new(r, angle).unwrap().symplectic());
            let bs = BeamSplitterSpec::new(t, phi).unwrap().symplectic();
            assert_symplectic(&bs);
            // orthogonal as well
            prop_assert!((&bs * bs.transpose() - DMatrix::identity(4, 4)).abs().max() < 1e-12);
            assert_symplectic(&phase_rotation(theta));
        }
    }
}
