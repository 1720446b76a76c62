//! Array-domain primitives: geometry, current vectors and spectra, the
//! Dirichlet kernel, and the gain/directivity/Q functionals for arbitrary
//! excitations.
//!
//! Antennas are indexed by the symmetric set {-(N-1)/2, ..., (N-1)/2}, which
//! requires odd N. All lengths are wavelength-normalized; the spacing d must
//! satisfy 0 < d <= 1/2 so no grating lobes enter the visible region |f| <= d.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::sum::NeumaierSum;

/// A uniform linear array: N antennas (odd), spacing d in (0, 1/2], and
/// loss factor rho = R_L/R_R >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n: usize,
    d: f64,
    rho: f64,
}

impl ArrayConfig {
    pub fn new(n: usize, d: f64, rho: f64) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::domain(format!(
                "antenna count must be odd and >= 1, got {n}"
            )));
        }
        if !(d > 0.0 && d <= 0.5) || !d.is_finite() {
            return Err(Error::domain(format!("spacing must be in (0, 1/2], got {d}")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("loss factor must be >= 0, got {rho}")));
        }
        Ok(Self { n, d, rho })
    }

    /// Lossless variant of this configuration.
    pub fn lossless(self) -> Self {
        Self { rho: 0.0, ..self }
    }

    pub fn antenna_count(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn loss_factor(&self) -> f64 {
        self.rho
    }

    /// Aperture L = (N-1) d.
    pub fn aperture(&self) -> f64 {
        (self.n - 1) as f64 * self.d
    }

    /// Spatial degrees of freedom N0 = 2 d N.
    pub fn dof(&self) -> f64 {
        2.0 * self.d * self.n as f64
    }

    /// Radiation efficiency eta = 1/(1 + rho).
    pub fn efficiency(&self) -> f64 {
        1.0 / (1.0 + self.rho)
    }

    /// Symmetric antenna indices -(N-1)/2 ..= (N-1)/2.
    pub fn index_set(&self) -> impl Iterator<Item = i64> {
        let half = (self.n as i64 - 1) / 2;
        -half..=half
    }

    /// Unit-norm array response vector a(f), entry (1/sqrt(N)) e^{j 2 pi f n}.
    pub fn steering_vector(&self, f: f64) -> Vec<Complex64> {
        let scale = 1.0 / (self.n as f64).sqrt();
        self.index_set()
            .map(|n| Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * f * n as f64))
            .collect()
    }
}

/// N complex excitation phasors with unit total power, indexed by the
/// symmetric antenna set.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentVector {
    entries: Vec<Complex64>,
}

impl CurrentVector {
    /// Build from raw phasors, normalizing to unit 2-norm.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() || entries.len() % 2 == 0 {
            return Err(Error::domain(format!(
                "current vector length must be odd and >= 1, got {}",
                entries.len()
            )));
        }
        let norm_sq: f64 = {
            let mut acc = NeumaierSum::new();
            for e in &entries {
                acc.add(e.norm_sqr());
            }
            acc.value()
        };
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::domain("current vector must be nonzero and finite"));
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(Self {
            entries: entries.into_iter().map(|e| e * scale).collect(),
        })
    }

    /// Real-valued currents, normalized.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Uniform in-phase excitation 1/sqrt(N).
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0); n])
    }

    /// Maximum-ratio (steering) excitation a(f).
    pub fn steering(cfg: &ArrayConfig, f: f64) -> Self {
        Self {
            entries: cfg.steering_vector(f),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in antenna-index order -(N-1)/2 ..= (N-1)/2.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry for the symmetric antenna index `n`.
    pub fn entry(&self, n: i64) -> Complex64 {
        let half = (self.entries.len() as i64 - 1) / 2;
        self.entries[(n + half) as usize]
    }

    /// Squared 2-norm; unit up to rounding by construction.
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for e in &self.entries {
            acc.add(e.norm_sqr());
        }
        acc.value()
    }

    /// Inner product a(f)^H j with the array response vector.
    pub fn steering_inner(&self, f: f64) -> Complex64 {
        let n = self.entries.len();
        let half = (n as i64 - 1) / 2;
        let scale = 1.0 / (n as f64).sqrt();
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for (i, j) in self.entries.iter().enumerate() {
            let idx = i as i64 - half;
            let phase = -2.0 * std::f64::consts::PI * f * idx as f64;
            let w = Complex64::from_polar(scale, phase);
            let term = w * j;
            re.add(term.re);
            im.add(term.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Sampled current spectrum on a strictly increasing frequency grid in
/// [-1/2, 1/2].
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
}

impl SpectrumGrid {
    /// Sample the spectrum of `j` on `freqs` (strictly increasing, within
    /// [-1/2, 1/2]).
    pub fn sample(j: &CurrentVector, freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::domain("frequency grid must be non-empty"));
        }
        if freqs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("frequency grid must be strictly increasing"));
        }
        if freqs[0] < -0.5 || *freqs.last().unwrap() > 0.5 {
            return Err(Error::domain("frequency grid must lie in [-1/2, 1/2]"));
        }
        let values = freqs.iter().map(|&f| current_spectrum(j, f)).collect();
        Ok(Self { freqs, values })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Trapezoid integral of |J|^2 over the grid.
    pub fn power_trapezoid(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for w in 0..self.freqs.len().saturating_sub(1) {
            let h = self.freqs[w + 1] - self.freqs[w];
            acc.add(0.5 * h * (self.values[w].norm_sqr() + self.values[w + 1].norm_sqr()));
        }
        acc.value()
    }
}

/// Normalized spatial frequency f = d sin(theta) for a propagation angle
/// theta in [-pi/2, pi/2] relative to broadside.
pub fn spatial_frequency(theta: f64, d: f64) -> Result<f64> {
    if !(theta.abs() <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::domain(format!(
            "angle must lie in [-pi/2, pi/2], got {theta}"
        )));
    }
    if !(d > 0.0 && d <= 0.5) {
        return Err(Error::domain(format!("spacing must be in (0, 1/2], got {d}")));
    }
    Ok(d * theta.sin())
}

/// Current spectrum J(f) = sum_n j_n e^{-j 2 pi f n}, period 1 in f.
pub fn current_spectrum(j: &CurrentVector, f: f64) -> Complex64 {
    let half = (j.len() as i64 - 1) / 2;
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (i, jn) in j.entries().iter().enumerate() {
        let n = i as i64 - half;
        let phase = -2.0 * std::f64::consts::PI * f * n as f64;
        let term = jn * Complex64::from_polar(1.0, phase);
        re.add(term.re);
        im.add(term.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Dirichlet kernel D_N(f) = sin(pi N f)/sin(pi f) with the removable value
/// D_N(m) = N at integers, for odd N (period 1).
pub fn dirichlet_kernel(n: usize, f: f64) -> Result<f64> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::domain(format!("kernel order must be odd, got {n}")));
    }
    // period-1 reduction (exact for odd N)
    let r = f - f.round();
    if r == 0.0 {
        return Ok(n as f64);
    }
    let pi = std::f64::consts::PI;
    Ok((pi * n as f64 * r).sin() / (pi * r).sin())
}

/// Average radiated power (1/2d) \int_{-d}^{d} |J|^2 via the closed form
/// \int_{-d}^{d} e^{j 2 pi f n} df = sin(2 pi d n)/(pi n): the quadratic form
/// of the current with the lossless coupling matrix.
pub fn visible_power_fraction(d: f64, j: &CurrentVector) -> f64 {
    let n = j.len();
    let half = (n as i64 - 1) / 2;
    let pi = std::f64::consts::PI;
    // lag kernel sin(2 pi d l)/(2 pi d l), l = 0 is 1
    let coupling = |l: i64| -> f64 {
        if l == 0 {
            1.0
        } else {
            (2.0 * pi * d * l as f64).sin() / (2.0 * pi * d * l as f64)
        }
    };
    let mut acc = NeumaierSum::new();
    for a in 0..n {
        for b in 0..n {
            let l = (a as i64 - half) - (b as i64 - half);
            let term = (j.entries()[a].conj() * j.entries()[b]).re * coupling(l);
            acc.add(term);
        }
    }
    acc.value()
}

/// Array gain G(N, d, rho, j, f) = |J(f)|^2 / ((1/2d)\int_{-d}^{d}|J|^2 + rho)
/// for a unit-norm current.
pub fn gain_for_current(cfg: &ArrayConfig, j: &CurrentVector, f: f64) -> Result<f64> {
    if j.len() != cfg.antenna_count() {
        return Err(Error::domain(format!(
            "current length {} does not match antenna count {}",
            j.len(),
            cfg.antenna_count()
        )));
    }
    if !(-0.5..=0.5).contains(&f) {
        return Err(Error::domain(format!(
            "spatial frequency must lie in [-1/2, 1/2], got {f}"
        )));
    }
    let num = current_spectrum(j, f).norm_sqr();
    let den = visible_power_fraction(cfg.spacing(), j) + cfg.loss_factor();
    Ok(num / den)
}

/// Directivity: gain with losses forced to zero.
pub fn directivity_for_current(cfg: &ArrayConfig, j: &CurrentVector, f: f64) -> Result<f64> {
    gain_for_current(&cfg.lossless(), j, f)
}

/// Q factor Q(N, d, rho, j) = ((1/2d)\int_{-d}^{d}|J|^2 + rho)^{-1} for a
/// unit-norm current; equals eta(rho) for every current at d = 1/2.
pub fn q_factor_for_current(cfg: &ArrayConfig, j: &CurrentVector) -> Result<f64> {
    if j.len() != cfg.antenna_count() {
        return Err(Error::domain(format!(
            "current length {} does not match antenna count {}",
            j.len(),
            cfg.antenna_count()
        )));
    }
    Ok(1.0 / (visible_power_fraction(cfg.spacing(), j) + cfg.loss_factor()))
}
