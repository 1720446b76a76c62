//! Exact maximum-gain beamforming through the DPSS spectral expansion.
//!
//! Every application of the inverse lossy coupling matrix goes through the
//! spectral decomposition (a sum over 1/(lambda_k + rho)); the matrix is
//! never factorized directly. That isolates the ill-conditioning mode by
//! mode: modes with lambda_k + rho below [`LAMBDA_FLOOR`] are excluded and
//! the result carries a `floor_limited` flag.

use num_complex::Complex64;

use crate::array::{spatial_frequency, ArrayConfig, CurrentVector};
use crate::error::{Error, Result};
use crate::numerics::sum::NeumaierSum;
use crate::spectrum::{decompose, LossyCoupling};

/// Modes with lossy eigenvalue below this are excluded from inverse
/// applications.
pub const LAMBDA_FLOOR: f64 = 1e-13;

/// Maximum-gain solution at one steering frequency.
#[derive(Debug, Clone)]
pub struct BeamSolution {
    /// Steering frequency in [-d, d].
    pub f_prime: f64,
    /// Optimal unit-norm excitation.
    pub current: CurrentVector,
    /// Supergain factor (gain normalized by the uncoupled lossless gain N).
    pub supergain: f64,
    /// Unnormalized gain N * supergain.
    pub gain: f64,
    /// Q factor of the optimal excitation.
    pub q_factor: f64,
    /// Real spectral expansion coefficients of the optimal current
    /// (magnitudes in the degenerate d = 1/2 case); unit sum of squares.
    pub coefficients: Vec<f64>,
    /// True when floor-excluded modes truncated the solution.
    pub floor_limited: bool,
}

/// Conditioning diagnostics of the supergain level set.
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidDiagnostics {
    /// Dynamic range of the supergain over all unit response vectors; the
    /// condition number of the lossy coupling matrix.
    pub kappa: f64,
    /// Largest attainable supergain 1/(lambda_{N-1} + rho).
    pub g_max: f64,
    /// Smallest attainable supergain 1/(lambda_0 + rho).
    pub g_min: f64,
    /// Squared gradient-norm proxy ||C^{-1} a(f')||^2: sensitivity of the
    /// supergain to perturbations of the steering direction.
    pub sensitivity: f64,
    /// True when the extreme eigenvalues sit below the resolution floor.
    pub floor_limited: bool,
}

/// One row of a supergain-vs-angle profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub theta: f64,
    pub supergain: f64,
    pub floor_limited: bool,
}

/// Maximum-gain solver for one array configuration. Construction performs
/// the spectral decomposition once; all queries reuse it.
#[derive(Debug, Clone)]
pub struct BeamSynthesizer {
    cfg: ArrayConfig,
    coupling: LossyCoupling,
    retained: Vec<usize>,
    truncated: bool,
}

impl BeamSynthesizer {
    pub fn new(cfg: ArrayConfig) -> Result<Self> {
        let spectrum = decompose(cfg.antenna_count(), cfg.spacing())?;
        let coupling = LossyCoupling::new(spectrum, cfg.loss_factor())?;
        let retained: Vec<usize> = (0..cfg.antenna_count())
            .filter(|&k| coupling.lambda_lossy(k) >= LAMBDA_FLOOR)
            .collect();
        if retained.is_empty() {
            return Err(Error::IllConditioned {
                lambda_min_lossy: coupling.lambda_lossy(cfg.antenna_count() - 1),
                floor: LAMBDA_FLOOR,
            });
        }
        let truncated = retained.len() < cfg.antenna_count();
        Ok(Self {
            cfg,
            coupling,
            retained,
            truncated,
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn coupling(&self) -> &LossyCoupling {
        &self.coupling
    }

    /// True when some modes were excluded by the eigenvalue floor.
    pub fn is_floor_limited(&self) -> bool {
        self.truncated
    }

    fn check_steering(&self, f_prime: f64) -> Result<()> {
        let d = self.cfg.spacing();
        if f_prime.abs() > d * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "steering frequency {f_prime} outside the visible region [-{d}, {d}]"
            )));
        }
        Ok(())
    }

    /// U_k(f') for the retained modes.
    fn dpswf_at(&self, f_prime: f64) -> Vec<(usize, f64)> {
        self.retained
            .iter()
            .map(|&k| {
                (
                    k,
                    self.coupling
                        .base()
                        .dpswf_value(k, f_prime)
                        .expect("retained index valid"),
                )
            })
            .collect()
    }

    /// Supergain factor (1/N) sum_k U_k(f')^2 / (lambda_k + rho).
    pub fn supergain(&self, f_prime: f64) -> Result<f64> {
        self.check_steering(f_prime)?;
        if self.coupling.base().is_degenerate() {
            return Ok(self.cfg.efficiency());
        }
        let mut acc = NeumaierSum::new();
        for (k, u) in self.dpswf_at(f_prime) {
            acc.add(u * u / self.coupling.lambda_lossy(k));
        }
        Ok(acc.value() / self.cfg.antenna_count() as f64)
    }

    /// Unnormalized maximum gain N * supergain.
    pub fn gain(&self, f_prime: f64) -> Result<f64> {
        Ok(self.cfg.antenna_count() as f64 * self.supergain(f_prime)?)
    }

    /// Q factor of the optimal current,
    /// (sum U_k^2/lambda_k^2) / (sum U_k^2/lambda_k).
    pub fn q_factor(&self, f_prime: f64) -> Result<f64> {
        self.check_steering(f_prime)?;
        if self.coupling.base().is_degenerate() {
            return Ok(self.cfg.efficiency());
        }
        let mut first = NeumaierSum::new();
        let mut second = NeumaierSum::new();
        for (k, u) in self.dpswf_at(f_prime) {
            let l = self.coupling.lambda_lossy(k);
            first.add(u * u / l);
            second.add(u * u / (l * l));
        }
        Ok(second.value() / first.value())
    }

    /// Optimal unit-norm current, the normalization of C^{-1} a(f') realized
    /// as sum_k eps_k U_k(f')/(lambda_k + rho) v_k. Maximum-ratio weights in
    /// the uncoupled d = 1/2 case.
    pub fn optimal_current(&self, f_prime: f64) -> Result<CurrentVector> {
        self.check_steering(f_prime)?;
        let n = self.cfg.antenna_count();
        if self.coupling.base().is_degenerate() {
            return Ok(CurrentVector::steering(&self.cfg, f_prime));
        }
        let mut re = vec![NeumaierSum::new(); n];
        let mut im = vec![NeumaierSum::new(); n];
        for (k, u) in self.dpswf_at(f_prime) {
            let coeff = u / self.coupling.lambda_lossy(k);
            let v = self.coupling.base().vector(k);
            if k % 2 == 0 {
                for (acc, &vi) in re.iter_mut().zip(v) {
                    acc.add(coeff * vi);
                }
            } else {
                for (acc, &vi) in im.iter_mut().zip(v) {
                    acc.add(coeff * vi);
                }
            }
        }
        let entries: Vec<Complex64> = re
            .iter()
            .zip(&im)
            .map(|(r, i)| Complex64::new(r.value(), i.value()))
            .collect();
        CurrentVector::new(entries)
    }

    /// Full solution at one steering frequency.
    pub fn solve(&self, f_prime: f64) -> Result<BeamSolution> {
        self.check_steering(f_prime)?;
        let n = self.cfg.antenna_count();
        if self.coupling.base().is_degenerate() {
            let scale = 1.0 / (n as f64).sqrt();
            return Ok(BeamSolution {
                f_prime,
                current: CurrentVector::steering(&self.cfg, f_prime),
                supergain: self.cfg.efficiency(),
                gain: n as f64 * self.cfg.efficiency(),
                q_factor: self.cfg.efficiency(),
                coefficients: vec![scale; n],
                floor_limited: false,
            });
        }
        let supergain = self.supergain(f_prime)?;
        let q_factor = self.q_factor(f_prime)?;
        let current = self.optimal_current(f_prime)?;
        // J_k = (U_k/lambda_k) / sqrt(sum U^2/lambda^2)
        let mut norm_sq = NeumaierSum::new();
        let mut raw = vec![0.0; n];
        for (k, u) in self.dpswf_at(f_prime) {
            let c = u / self.coupling.lambda_lossy(k);
            raw[k] = c;
            norm_sq.add(c * c);
        }
        let scale = 1.0 / norm_sq.value().sqrt();
        for c in raw.iter_mut() {
            *c *= scale;
        }
        Ok(BeamSolution {
            f_prime,
            current,
            supergain,
            gain: n as f64 * supergain,
            q_factor,
            coefficients: raw,
            floor_limited: self.truncated,
        })
    }

    /// Supergain swept over propagation angles (radians, in [-pi/2, pi/2]).
    pub fn supergain_profile(&self, thetas: &[f64]) -> Result<Vec<ProfilePoint>> {
        thetas
            .iter()
            .map(|&theta| {
                let f = spatial_frequency(theta, self.cfg.spacing())?;
                Ok(ProfilePoint {
                    theta,
                    supergain: self.supergain(f)?,
                    floor_limited: self.truncated,
                })
            })
            .collect()
    }

    /// Conditioning diagnostics; `sensitivity` is evaluated at `f_prime`.
    pub fn ellipsoid_diagnostics(&self, f_prime: f64) -> Result<EllipsoidDiagnostics> {
        self.check_steering(f_prime)?;
        let n = self.cfg.antenna_count();
        let l_max = self.coupling.lambda_lossy(0);
        let l_min = self.coupling.lambda_lossy(n - 1);
        let sensitivity = if self.coupling.base().is_degenerate() {
            let e = self.cfg.efficiency();
            e * e
        } else {
            let mut acc = NeumaierSum::new();
            for (k, u) in self.dpswf_at(f_prime) {
                let l = self.coupling.lambda_lossy(k);
                acc.add(u * u / (l * l));
            }
            acc.value() / n as f64
        };
        let floor_limited = self.truncated
            || (n > 0 && self.coupling.base().is_floor_limited(n - 1));
        Ok(EllipsoidDiagnostics {
            kappa: l_max / l_min,
            g_max: 1.0 / l_min,
            g_min: 1.0 / l_max,
            sensitivity,
            floor_limited,
        })
    }

    /// Spectral expansion coefficients J_k of an arbitrary unit current in
    /// the DPSS basis: J_k = eps_k^{-1} v_k^T j, so that
    /// J(f) = sum_k J_k U_k(f). The squared magnitudes sum to one.
    pub fn expansion_coefficients(&self, j: &CurrentVector) -> Result<Vec<Complex64>> {
        if j.len() != self.cfg.antenna_count() {
            return Err(Error::domain(format!(
                "current length {} does not match antenna count {}",
                j.len(),
                self.cfg.antenna_count()
            )));
        }
        let coeffs = (0..self.cfg.antenna_count())
            .map(|k| {
                let v = self.coupling.base().vector(k);
                let mut re = NeumaierSum::new();
                let mut im = NeumaierSum::new();
                for (&vi, ji) in v.iter().zip(j.entries()) {
                    re.add(vi * ji.re);
                    im.add(vi * ji.im);
                }
                let dot = Complex64::new(re.value(), im.value());
                if k % 2 == 0 {
                    dot
                } else {
                    // divide by eps_k = j
                    dot * Complex64::new(0.0, -1.0)
                }
            })
            .collect();
        Ok(coeffs)
    }
}
